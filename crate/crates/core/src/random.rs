//! Seeded random matrices used for search starts and randomized checks.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::groupalg::{Element, FourierSeries, GroupModel};
use crate::multiplier::{AtomicMeasure, FourierSymbol};
use crate::scalar::Real;
use crate::schatten::CMatrix;

/// Deterministic stream for `(seed, stream)`; distinct streams are statistically independent.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// FNV-1a over a byte slice, used to derive per-problem seeds.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn complex_gaussian<T: Real>(rng: &mut (impl Rng + ?Sized)) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re), T::lit(im))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<T: Real>(rows: usize, cols: usize, rng: &mut (impl Rng + ?Sized)) -> CMatrix<T> {
    CMatrix::wrap(DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng)))
}

/// Series with i.i.d. Gaussian `block × block` coefficients on `spectrum`.
pub fn gaussian_series<T: Real>(
    group: GroupModel,
    spectrum: &[Element],
    block: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<FourierSeries<T>> {
    let terms = spectrum.iter().map(|g| (*g, gaussian_matrix::<T>(block, block, rng).into_inner())).collect();
    FourierSeries::block(group, block, terms)
}

/// Symbol with i.i.d. standard complex Gaussian values on `domain`.
pub fn gaussian_symbol<T: Real>(group: GroupModel, domain: &[Element], rng: &mut (impl Rng + ?Sized)) -> Result<FourierSymbol<T>> {
    FourierSymbol::from_fn(group, domain, |_| complex_gaussian(rng))
}

/// Atomic measure with `atoms` distinct locations in `(2π/N)ℤ` and `Σ|a|^p = 1` for a single
/// atom, `Σ|a|^p ≤ 1` otherwise; phases are uniform.
pub fn random_atomic_measure(
    order: u64,
    atoms: usize,
    p: f64,
    rng: &mut (impl Rng + ?Sized),
) -> Result<AtomicMeasure<f64>> {
    if atoms == 0 || atoms as u64 > order {
        return Err(Error::InvalidInput(format!("cannot place {atoms} atoms on {order} points")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidExponent(format!("atomic masses need 0 < p <= 1, got {p}")));
    }
    let mut locs = Vec::with_capacity(atoms);
    while locs.len() < atoms {
        let j = rng.random_range(0..order);
        if !locs.contains(&j) {
            locs.push(j);
        }
    }
    // Split a mass at most one among the atoms; a single atom carries all of it.
    let total = if atoms == 1 { 1.0 } else { rng.random::<f64>() };
    let mut cuts: Vec<f64> = (0..atoms - 1).map(|_| rng.random::<f64>()).collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    let step = 2.0 * std::f64::consts::PI / order as f64;
    let list = locs
        .iter()
        .zip(cuts.windows(2))
        .map(|(&j, w)| {
            let modulus = (total * (w[1] - w[0])).powf(1.0 / p);
            let phase = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            (j as f64 * step, Complex::from_polar(modulus, phase))
        })
        .collect();
    AtomicMeasure::new(list)
}

/// Haar-distributed unitary via QR of a Gaussian matrix with phase correction.
pub fn random_unitary<T: Real>(n: usize, rng: &mut (impl Rng + ?Sized)) -> CMatrix<T> {
    let g = gaussian_matrix::<T>(n, n, rng).into_inner();
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let m = d.re.hypot(d.im);
        if m > T::zero() {
            let ph = d / Complex::new(m, T::zero());
            for i in 0..n {
                q[(i, j)] *= ph;
            }
        }
    }
    CMatrix::wrap(q)
}
