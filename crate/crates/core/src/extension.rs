//! Norm-preserving extension of partially specified rank-one Schur multipliers on `S^∞`.
//!
//! A relative multiplier `(x_r y_c)_{(r,c) ∈ I}` is extended to the full rectangle as an
//! entrywise product of one rank-one symbol and a chain of two-valued block symbols, each
//! of norm at most one.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiplier::{schur_apply_truncating, SchurSymbol, Support};
use crate::normest::{schur_multiplier_norm, AscentOptions};
use crate::random::{complex_gaussian, gaussian_matrix, random_unitary, rng_for};
use crate::scalar::{abs, cis, cr, Real};
use crate::schatten::{min_hermitian_eigenvalue, schatten_norm, CMatrix, Convention, Exponent};

/// Weighted rank-one symbol `weight · (left_i right_j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dyad<T: Real> {
    pub weight: T,
    pub left: [Complex<T>; 2],
    pub right: [Complex<T>; 2],
}

/// Splitting of `[[z̄, w], [w̄, z]]` into two unimodular dyads.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignDecomposition<T: Real> {
    /// `z = |z| t²`.
    pub t: Complex<T>,
    /// `w = |w| u²`.
    pub u: Complex<T>,
    pub dyads: [Dyad<T>; 2],
    /// `max(|z|, |w|)`.
    pub norm: T,
}

impl<T: Real> SignDecomposition<T> {
    pub fn reconstruct(&self) -> CMatrix<T> {
        let m = DMatrix::from_fn(2, 2, |i, j| {
            self.dyads.iter().fold(Complex::zero(), |s, d| s + d.left[i] * d.right[j] * cr(d.weight))
        });
        CMatrix::wrap(m)
    }
}

/// Principal square root of the phase of `z` (`1` for `z = 0`).
fn half_phase<T: Real>(z: Complex<T>) -> Complex<T> {
    if z == Complex::zero() {
        return cr(T::one());
    }
    cis(z.im.atan2(z.re) / T::lit(2.0))
}

/// Writes `[[z̄, w], [w̄, z]]` as `½(|z|+|w|) a bᵀ + ½(|z|-|w|) a' b'ᵀ` with unimodular
/// vectors, so its norm is `max(|z|, |w|)`.
pub fn phase_sign_decompose<T: Real>(z: Complex<T>, w: Complex<T>) -> SignDecomposition<T> {
    let t = half_phase(z);
    let u = half_phase(w);
    let (az, aw) = (abs(z), abs(w));
    let half = T::lit(0.5);
    let (tc, uc) = (t.conj(), u.conj());
    let plus = Dyad { weight: (az + aw) * half, left: [tc * u, t * uc], right: [tc * uc, t * u] };
    let minus = Dyad { weight: (az - aw) * half, left: [tc * u, -(t * uc)], right: [tc * uc, -(t * u)] };
    SignDecomposition { t, u, dyads: [plus, minus], norm: az.max(aw) }
}

/// Partially specified rank-one symbol `(x_r y_c)` on a support `I ⊆ R × C`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneSpec<T: Real> {
    pub x: Vec<Complex<T>>,
    pub y: Vec<Complex<T>>,
    pub support: Support,
}

impl<T: Real> RankOneSpec<T> {
    pub fn new(x: Vec<Complex<T>>, y: Vec<Complex<T>>, support: Support) -> Result<Self> {
        if support.nrows() != x.len() || support.ncols() != y.len() {
            return Err(Error::Dimension(format!(
                "support is {}x{} but x has {} and y has {} entries",
                support.nrows(),
                support.ncols(),
                x.len(),
                y.len()
            )));
        }
        if support.is_empty() {
            return Err(Error::InvalidInput("support must be nonempty".into()));
        }
        Ok(Self { x, y, support })
    }

    /// `sup_{(r,c) ∈ I} |x_r y_c|`.
    pub fn bound(&self) -> T {
        self.support.pairs().iter().fold(T::zero(), |m, &(r, c)| m.max(abs(self.x[r] * self.y[c])))
    }

    pub fn relative_symbol(&self) -> Result<SchurSymbol<T>> {
        SchurSymbol::on_support(self.support.clone(), |r, c| self.x[r] * self.y[c])
    }
}

/// A two-valued block symbol `[[z̄, 1], [1, z]]` on the partition
/// `(rows in upper) × (cols ≤ split)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Correction<T: Real> {
    pub z: Complex<T>,
    pub symbol: SchurSymbol<T>,
    /// Norm of the block pattern, `max(|z|, 1)`.
    pub norm: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionCertificate<T: Real> {
    pub spec: RankOneSpec<T>,
    pub base: SchurSymbol<T>,
    pub corrections: Vec<Correction<T>>,
    pub product: SchurSymbol<T>,
    pub bound: T,
    /// Retained rows and columns in construction order.
    pub row_order: Vec<usize>,
    pub col_order: Vec<usize>,
    /// `c_r` per position in `row_order`, as a position in `col_order`.
    pub first_cols: Vec<usize>,
}

fn stable_order<T: Real>(v: &[Complex<T>], keep: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).filter(|&i| keep(i)).collect();
    idx.sort_by(|&a, &b| abs(v[b]).partial_cmp(&abs(v[a])).expect("finite"));
    idx
}

/// Extends `spec` to the full rectangle without increasing the `S^∞` multiplier norm.
pub fn extend_rank_one<T: Real>(spec: &RankOneSpec<T>) -> Result<ExtensionCertificate<T>> {
    let (nr, nc) = (spec.x.len(), spec.y.len());
    let s = &spec.support;
    if s.nrows() != nr || s.ncols() != nc {
        return Err(Error::Dimension("support does not match the universes".into()));
    }
    for v in spec.x.iter().chain(&spec.y) {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite spec entry".into()));
        }
    }
    let zero = Complex::<T>::zero();
    let col_kept = |c: usize| spec.y[c] != zero;
    let row_kept = |r: usize| s.pairs().iter().any(|&(a, c)| a == r && col_kept(c));
    let rows = stable_order(&spec.x, row_kept);
    let cols = stable_order(&spec.y, col_kept);
    let mut col_pos = vec![usize::MAX; nc];
    for (k, &c) in cols.iter().enumerate() {
        col_pos[c] = k;
    }

    // c_r: running minimum over sorted rows of the first support column.
    let mut first_cols = Vec::with_capacity(rows.len());
    let mut running = usize::MAX;
    for &r in &rows {
        let own = s.pairs().iter().filter(|&&(a, c)| a == r && col_kept(c)).map(|&(_, c)| col_pos[c]).min();
        running = running.min(own.expect("retained rows meet a retained column"));
        first_cols.push(running);
    }
    // r_c = min { r : c_r ≤ c }, or the number of rows when no such r exists.
    let thresholds: Vec<usize> =
        (0..cols.len()).map(|c| first_cols.iter().position(|&cr_| cr_ <= c).unwrap_or(rows.len())).collect();

    // Every universe row is assigned the construction row it copies and its effective x.
    let mut source = vec![(0usize, zero); nr];
    for (k, &r) in rows.iter().enumerate() {
        source[r] = (k, spec.x[r]);
    }
    for r in (0..nr).filter(|&r| !row_kept(r)) {
        if rows.is_empty() {
            break;
        }
        // Nearest retained row with |x| at least |x_r|; above the top row, clamp |x_r|.
        let k = rows.iter().rposition(|&q| abs(spec.x[q]) >= abs(spec.x[r])).unwrap_or(0);
        let top = abs(spec.x[rows[k]]);
        let xr = if abs(spec.x[r]) > top { spec.x[r] * cr(top / abs(spec.x[r])) } else { spec.x[r] };
        source[r] = (k, xr);
    }

    let base = SchurSymbol::full_fn(nr, nc, |r, c| {
        if rows.is_empty() || !col_kept(c) {
            return zero;
        }
        let (k, xr) = source[r];
        xr * spec.y[cols[first_cols[k]]]
    })?;
    let mut corrections = Vec::with_capacity(cols.len().saturating_sub(1));
    for c in 0..cols.len().saturating_sub(1) {
        let z = spec.y[cols[c + 1]] / spec.y[cols[c]];
        let symbol = SchurSymbol::full_fn(nr, nc, |r, col| {
            if !col_kept(col) {
                return cr(T::one());
            }
            let upper = source[r].0 < thresholds[c];
            let left = col_pos[col] <= c;
            match (upper, left) {
                (true, true) => z.conj(),
                (false, false) => z,
                _ => cr(T::one()),
            }
        })?;
        corrections.push(Correction { z, symbol, norm: abs(z).max(T::one()) });
    }
    let product = corrections.iter().try_fold(base.clone(), |acc, k| {
        SchurSymbol::full_fn(nr, nc, |r, c| acc.value(r, c).unwrap_or(zero) * k.symbol.value(r, c).unwrap_or(zero))
    })?;
    let cert = ExtensionCertificate {
        spec: spec.clone(),
        base,
        corrections,
        product,
        bound: spec.bound(),
        row_order: rows,
        col_order: cols,
        first_cols,
    };
    let structural = cert.structural_checks();
    if !structural.passed() {
        return Err(Error::InvalidInput(format!("extension failed its own checks: {structural:?}")));
    }
    Ok(cert)
}

/// Checks that need no sampling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuralChecks {
    pub support_deviation: f64,
    pub max_correction_norm: f64,
    pub max_correction_entry: f64,
    pub first_cols_monotone: bool,
    pub threshold_equivalence: bool,
}

impl StructuralChecks {
    pub fn passed(&self) -> bool {
        self.support_deviation <= 1e-12
            && self.max_correction_norm <= 1.0 + 1e-12
            && self.max_correction_entry <= 1.0 + 1e-12
            && self.first_cols_monotone
            && self.threshold_equivalence
    }
}

impl<T: Real> ExtensionCertificate<T> {
    pub fn structural_checks(&self) -> StructuralChecks {
        let spec = &self.spec;
        let scale = self.bound.max(T::one());
        let support_deviation = spec
            .support
            .pairs()
            .iter()
            .map(|&(r, c)| abs(self.product.value(r, c).unwrap_or_else(Complex::zero) - spec.x[r] * spec.y[c]) / scale)
            .fold(T::zero(), |m, d| m.max(d))
            .to_f64_lossy();
        let max_correction_norm = self.corrections.iter().fold(0.0f64, |m, k| m.max(k.norm.to_f64_lossy()));
        let max_correction_entry = self.corrections.iter().fold(0.0f64, |m, k| m.max(k.symbol.max_abs().to_f64_lossy()));
        let first_cols_monotone = self.first_cols.windows(2).all(|w| w[0] >= w[1]);
        let n = self.first_cols.len();
        let thresholds: Vec<usize> = (0..self.col_order.len())
            .map(|c| self.first_cols.iter().position(|&x| x <= c).unwrap_or(n))
            .collect();
        let threshold_equivalence =
            (0..n).all(|r| (0..self.col_order.len()).all(|c| (thresholds[c] <= r) == (self.first_cols[r] <= c)));
        StructuralChecks {
            support_deviation,
            max_correction_norm,
            max_correction_entry,
            first_cols_monotone,
            threshold_equivalence,
        }
    }

    pub fn to_json(&self, checks: Option<&VerificationReport>) -> ExtensionJson {
        let m = self.product.to_matrix();
        let rho_tilde = (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| [m.get(r, c).re.to_f64_lossy(), m.get(r, c).im.to_f64_lossy()]).collect())
            .collect();
        ExtensionJson {
            rho_tilde,
            bound: self.bound.to_f64_lossy(),
            corrections: self.corrections.len(),
            checks: checks.cloned(),
        }
    }
}

/// Outcome of [`verify_certificate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub structural: StructuralChecks,
    pub trials: usize,
    /// `max ‖ρ̃∘A‖_∞ - bound·‖A‖_∞` over the trials.
    pub ceiling_excess: f64,
    pub restriction_lower: f64,
    pub bound: f64,
    pub support_ok: bool,
    pub corrections_ok: bool,
    pub ceiling_ok: bool,
    pub lower_ok: bool,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.support_ok && self.corrections_ok && self.ceiling_ok && self.lower_ok
    }
}

/// Checks agreement on the support, correction norms, the norm ceiling on random inputs, and
/// that ascent on the relative symbol reaches the bound.
pub fn verify_certificate<T: Real>(cert: &ExtensionCertificate<T>, trials: usize, seed: u64) -> Result<VerificationReport> {
    let structural = cert.structural_checks();
    let (nr, nc) = (cert.product.nrows(), cert.product.ncols());
    let e = Exponent::<T>::Infinity;
    let bound = cert.bound;
    let excess: Vec<T> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let a = match i % 3 {
                0 => gaussian_matrix(nr, nc, &mut rng),
                1 if nr == nc => random_unitary(nr, &mut rng),
                _ => {
                    let g = gaussian_matrix::<T>(nr, 1, &mut rng);
                    let h = gaussian_matrix::<T>(1, nc, &mut rng);
                    g.matmul(&h)?
                }
            };
            let lhs = schatten_norm(&schur_apply_truncating(&cert.product, &a)?, &e, Convention::Standard)?;
            let rhs = schatten_norm(&a, &e, Convention::Standard)?;
            Ok(lhs - bound * rhs)
        })
        .collect::<Result<_>>()?;
    let ceiling_excess = excess.iter().fold(f64::NEG_INFINITY, |m, x| m.max(x.to_f64_lossy()));
    let relative = cert.product.restrict(&cert.spec.support)?;
    let opts = AscentOptions { restarts: 2, max_iter: 500, ..Default::default() };
    let restriction_lower = schur_multiplier_norm(&relative, &e, &opts)?.lower.to_f64_lossy();
    let b = bound.to_f64_lossy();
    Ok(VerificationReport {
        support_ok: structural.support_deviation <= 1e-12,
        corrections_ok: structural.max_correction_norm <= 1.0 + 1e-12,
        ceiling_ok: trials == 0 || ceiling_excess <= 1e-8,
        lower_ok: restriction_lower >= b - 1e-6,
        structural,
        trials,
        ceiling_excess: if trials == 0 { 0.0 } else { ceiling_excess },
        restriction_lower,
        bound: b,
    })
}

/// Random specification with at most `max_size` rows and columns and at most `max_support`
/// support entries; about one coordinate in ten of `x` and `y` is zero.
pub fn random_rank_one_spec(rng: &mut (impl Rng + ?Sized), max_size: usize, max_support: usize) -> Result<RankOneSpec<f64>> {
    if max_size == 0 || max_support == 0 {
        return Err(Error::InvalidInput("sizes must be positive".into()));
    }
    let rows = rng.random_range(1..=max_size);
    let cols = rng.random_range(1..=max_size);
    let mut cells: Vec<(usize, usize)> = (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).collect();
    cells.shuffle(rng);
    let k = rng.random_range(1..=max_support.min(cells.len()));
    fn coord(rng: &mut (impl Rng + ?Sized)) -> Complex<f64> {
        if rng.random_bool(0.1) {
            Complex::zero()
        } else {
            complex_gaussian(rng)
        }
    }
    let x = (0..rows).map(|_| coord(rng)).collect();
    let y = (0..cols).map(|_| coord(rng)).collect();
    RankOneSpec::new(x, y, Support::new(rows, cols, cells[..k].iter().copied())?)
}

/// `x = a`, `y = 1/a` on `{r ≤ c}`: the relative multiplier `(a_r/a_c)_{r ≤ c}`.
pub fn ratio_family_spec(a: &[f64]) -> Result<RankOneSpec<f64>> {
    if a.is_empty() || a.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("ratio family needs positive finite entries".into()));
    }
    let n = a.len();
    let support = Support::new(n, n, (0..n).flat_map(|r| (r..n).map(move |c| (r, c))))?;
    RankOneSpec::new(a.iter().map(|&v| cr(v)).collect(), a.iter().map(|&v| cr(1.0 / v)).collect(), support)
}

/// Smallest eigenvalue of the (Hermitian part of the) extended symbol.
pub fn extension_min_eigenvalue<T: Real>(cert: &ExtensionCertificate<T>) -> Result<T> {
    let m = cert.product.to_matrix();
    let h = m.add(&m.adjoint())?.scale(cr(T::lit(0.5)));
    min_hermitian_eigenvalue(&h)
}

/// Complex number accepted either as a bare real or as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexRepr {
    pub fn value(&self) -> Complex<f64> {
        match *self {
            Self::Real(r) => Complex::new(r, 0.0),
            Self::Pair([re, im]) => Complex::new(re, im),
        }
    }
}

/// `{x: [...], y: [...], support: [[r, c], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOneSpecJson {
    pub x: Vec<ComplexRepr>,
    pub y: Vec<ComplexRepr>,
    pub support: Vec<(usize, usize)>,
}

impl RankOneSpecJson {
    pub fn into_spec(&self) -> Result<RankOneSpec<f64>> {
        let support = Support::new(self.x.len(), self.y.len(), self.support.iter().copied())?;
        RankOneSpec::new(self.x.iter().map(ComplexRepr::value).collect(), self.y.iter().map(ComplexRepr::value).collect(), support)
    }

    pub fn from_spec(spec: &RankOneSpec<f64>) -> Self {
        let rep = |z: &Complex<f64>| if z.im == 0.0 { ComplexRepr::Real(z.re) } else { ComplexRepr::Pair([z.re, z.im]) };
        Self { x: spec.x.iter().map(rep).collect(), y: spec.y.iter().map(rep).collect(), support: spec.support.pairs().to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionJson {
    pub rho_tilde: Vec<Vec<[f64; 2]>>,
    pub bound: f64,
    pub corrections: usize,
    pub checks: Option<VerificationReport>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn decomposition_examples() {
        let d = phase_sign_decompose::<f64>(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(d.norm, 1.0);
        assert!(d.reconstruct().max_abs_diff(&CMatrix::identity(2)) < 1e-12);
        assert_eq!(phase_sign_decompose::<f64>(c(2.0, 0.0), c(1.0, 0.0)).norm, 2.0);
        let d = phase_sign_decompose::<f64>(c(0.0, 0.0), c(0.0, 1.0));
        assert_eq!(d.norm, 1.0);
        assert_eq!(d.t, c(1.0, 0.0));
        assert!((d.u - cis(std::f64::consts::FRAC_PI_4)).norm() < 1e-15);
        let expect = CMatrix::from_rows(&[vec![c(0., 0.), c(0., 1.)], vec![c(0., -1.), c(0., 0.)]]).unwrap();
        assert!(d.reconstruct().max_abs_diff(&expect) < 1e-12);
        for dy in d.dyads {
            assert!(dy.left.iter().chain(&dy.right).all(|z| (z.norm() - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn ratio_family_example() {
        let spec = ratio_family_spec(&[1.0, 2.0, 4.0]).unwrap();
        let cert = extend_rank_one(&spec).unwrap();
        let expect = CMatrix::from_real_rows(&[&[1., 0.5, 0.25], &[0.5, 1., 0.5], &[0.25, 0.5, 1.]]).unwrap();
        assert!(cert.product.to_matrix().max_abs_diff(&expect) < 1e-14);
        assert_eq!(cert.bound, 1.0);
        assert!(extension_min_eigenvalue(&cert).unwrap() >= -1e-12);
    }

    #[test]
    fn full_rectangle_is_rank_one() {
        let x: Vec<Complex<f64>> = vec![c(1., 1.), c(-0.5, 0.)];
        let y: Vec<Complex<f64>> = vec![c(2., 0.), c(0., 1.), c(0.3, -0.2)];
        let spec = RankOneSpec::new(x.clone(), y.clone(), Support::full(2, 3)).unwrap();
        let cert = extend_rank_one(&spec).unwrap();
        for r in 0..2 {
            for col in 0..3 {
                assert!((cert.product.value(r, col).unwrap() - x[r] * y[col]).norm() < 1e-12);
            }
        }
        assert!((cert.bound - 2f64.sqrt() * 2.0).abs() < 1e-12);
        let rep = verify_certificate(&cert, 30, 1).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn single_pair_and_dropped_rows() {
        let spec = RankOneSpec::<f64>::new(
            vec![c(3., 0.), c(1., 0.), c(0.5, 0.5)],
            vec![c(0., 0.), c(1., 0.), c(0., 2.)],
            Support::new(3, 3, [(1, 2)]).unwrap(),
        )
        .unwrap();
        let cert = extend_rank_one(&spec).unwrap();
        assert!((cert.bound - 2.0).abs() < 1e-15);
        assert!((cert.product.value(1, 2).unwrap() - c(0., 2.)).norm() < 1e-15);
        assert!(cert.product.max_abs() <= cert.bound + 1e-12);
        // The zero column stays zero.
        assert!((0..3).all(|r| cert.product.value(r, 0).unwrap() == c(0., 0.)));
        assert!(verify_certificate(&cert, 30, 2).unwrap().passed());
    }

    #[test]
    fn json_roundtrip() {
        let spec = ratio_family_spec(&[1.0, 3.0]).unwrap();
        let j = RankOneSpecJson::from_spec(&spec);
        let s = serde_json::to_string(&j).unwrap();
        assert_eq!(s, r#"{"x":[1.0,3.0],"y":[1.0,0.3333333333333333],"support":[[0,0],[0,1],[1,1]]}"#);
        let back: RankOneSpecJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back.into_spec().unwrap(), spec);
        let parsed: RankOneSpecJson = serde_json::from_str(r#"{"x":[[0,1]],"y":[2],"support":[[0,0]]}"#).unwrap();
        assert_eq!(parsed.into_spec().unwrap().x[0], c(0., 1.));
    }
}
