//! The Hilbert matrix transform and the matrix Riesz projection: symbols, analytic norm
//! values, Cotlar's recursion, and finite-size convergence scans.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiplier::SchurSymbol;
use crate::normest::{schur_multiplier_norm_warm, AscentOptions, NormEstimate};
use crate::scalar::{cr, Real};
use crate::schatten::{CMatrix, Exponent};

/// `ρ_{ij} = z` for `i ≤ j` and `w` for `i > j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangularSymbol<T: Real> {
    pub n: usize,
    pub z: Complex<T>,
    pub w: Complex<T>,
}

impl<T: Real> TriangularSymbol<T> {
    pub fn new(n: usize, z: Complex<T>, w: Complex<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("size must be positive".into()));
        }
        Ok(Self { n, z, w })
    }

    pub fn symbol(&self) -> Result<SchurSymbol<T>> {
        SchurSymbol::full_fn(self.n, self.n, |i, j| if i <= j { self.z } else { self.w })
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("size must be positive".into()));
    }
    Ok(())
}

/// `sgn(i - j)` with `sgn(0) = 1`: `+1` on and below the diagonal, `-1` above.
pub fn hilbert_symbol<T: Real>(n: usize) -> Result<SchurSymbol<T>> {
    check_size(n)?;
    SchurSymbol::full_fn(n, n, |i, j| cr(if i >= j { T::one() } else { -T::one() }))
}

/// Indicator of `i ≥ j` (diagonal included).
pub fn riesz_symbol<T: Real>(n: usize) -> Result<SchurSymbol<T>> {
    check_size(n)?;
    SchurSymbol::full_fn(n, n, |i, j| cr(if i >= j { T::one() } else { T::zero() }))
}

/// `cot(π / 2p)`, with a flag telling whether the value is proven (`p` or `p'` a power of two)
/// or only a conjectured target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HilbertTarget {
    pub p: f64,
    pub value: f64,
    pub certified: bool,
}

/// Norm of the Hilbert transform on `S^p`; exponents below 2 go through `p ↦ p'`.
pub fn hilbert_norm_formula(p: f64) -> Result<HilbertTarget> {
    if !(p > 1.0) || p.is_infinite() {
        return Err(Error::InvalidExponent(format!("the Hilbert transform is unbounded at p = {p}")));
    }
    let q = if p < 2.0 { p / (p - 1.0) } else { p };
    let l = q.log2();
    let certified = (l - l.round()).abs() < 1e-12;
    let value = if q == 2.0 { 1.0 } else { 1.0 / (PI / (2.0 * q)).tan() };
    Ok(HilbertTarget { p, value, certified })
}

/// `u_{2^k}` from `u_2 = 1`, `u_{2p} = u_p + √(u_p² + 1)`.
pub fn cotlar_recursion<T: Real>(k: u32) -> Result<T> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let mut u = T::one();
    for _ in 1..k {
        u = u + (u * u + T::one()).sqrt();
    }
    Ok(u)
}

/// One line of the recursion cross-check against `cot(π / 2^{k+1})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CotlarRow {
    pub k: u32,
    pub recursion: f64,
    pub trig: f64,
    pub rel_error: f64,
}

pub fn cotlar_table(k_max: u32) -> Result<Vec<CotlarRow>> {
    (1..=k_max)
        .map(|k| {
            let recursion = cotlar_recursion::<f64>(k)?;
            let trig = 1.0 / (PI / 2f64.powi(k as i32 + 1)).tan();
            Ok(CotlarRow { k, recursion, trig, rel_error: (recursion - trig).abs() / trig })
        })
        .collect()
}

/// Norm of the triangular projection on `S^4`.
pub fn riesz_l4_formula() -> f64 {
    2f64.sqrt()
}

/// `csc(π/p)`, the `L^p` norm of the Riesz projection, `1 < p < ∞`.
pub fn riesz_lp_target(p: f64) -> Result<f64> {
    if !(p > 1.0) || p.is_infinite() {
        return Err(Error::InvalidExponent(format!("the Riesz projection is unbounded at p = {p}")));
    }
    Ok(1.0 / (PI / p).sin())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalSymbol {
    Hilbert,
    Riesz,
}

impl ClassicalSymbol {
    pub fn symbol<T: Real>(&self, n: usize) -> Result<SchurSymbol<T>> {
        match self {
            Self::Hilbert => hilbert_symbol(n),
            Self::Riesz => riesz_symbol(n),
        }
    }

    /// Analytic norm on `S^p` (a conjectured value for Hilbert at non-dyadic `p`).
    pub fn target(&self, p: f64) -> Result<f64> {
        match self {
            Self::Hilbert => Ok(hilbert_norm_formula(p)?.value),
            Self::Riesz => riesz_lp_target(p),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: usize,
    pub lower: f64,
    pub target: f64,
    pub gap: f64,
    pub seconds: f64,
}

/// Lower bounds at increasing sizes. Each run starts from the previous witness padded with
/// zeros; both symbols are Toeplitz, so the padded witness keeps its ratio and the bounds
/// are nondecreasing.
pub fn convergence_scan(
    kind: ClassicalSymbol,
    p: f64,
    sizes: &[usize],
    opts: &AscentOptions,
) -> Result<Vec<ScanRow>> {
    Ok(convergence_scan_estimates(kind, p, sizes, opts)?.into_iter().map(|(row, _)| row).collect())
}

/// As [`convergence_scan`], keeping the full estimates.
pub fn convergence_scan_estimates(
    kind: ClassicalSymbol,
    p: f64,
    sizes: &[usize],
    opts: &AscentOptions,
) -> Result<Vec<(ScanRow, NormEstimate<f64>)>> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
        return Err(Error::InvalidInput("sizes must be positive and increasing".into()));
    }
    let target = kind.target(p)?;
    let e = Exponent::p(p)?;
    let mut out: Vec<(ScanRow, NormEstimate<f64>)> = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let start = Instant::now();
        let sym = kind.symbol::<f64>(n)?;
        let warm: Vec<CMatrix<f64>> = match out.last().and_then(|(_, est)| est.witness_matrix()) {
            Some(w) => vec![pad(w, n)],
            None => vec![],
        };
        let est = schur_multiplier_norm_warm(&sym, &e, opts, &warm)?;
        let row = ScanRow { n, lower: est.lower, target, gap: target - est.lower, seconds: start.elapsed().as_secs_f64() };
        out.push((row, est));
    }
    Ok(out)
}

fn pad<T: Real>(w: &CMatrix<T>, n: usize) -> CMatrix<T> {
    CMatrix::from_fn(n, n, |i, j| if i < w.nrows() && j < w.ncols() { w.get(i, j) } else { cr(T::zero()) })
        .expect("finite entries")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_examples() {
        let h = hilbert_symbol::<f64>(2).unwrap().to_matrix();
        assert_eq!(h, CMatrix::from_real_rows(&[&[1., -1.], &[1., 1.]]).unwrap());
        let r = riesz_symbol::<f64>(2).unwrap().to_matrix();
        assert_eq!(r, CMatrix::from_real_rows(&[&[1., 0.], &[1., 1.]]).unwrap());
        assert_eq!(hilbert_symbol::<f64>(1).unwrap().to_matrix(), CMatrix::identity(1));
        assert!(hilbert_symbol::<f64>(0).is_err());
    }

    #[test]
    fn triangular_parametrisation() {
        let t = TriangularSymbol::new(3, cr(-1.0), cr(1.0)).unwrap().symbol().unwrap();
        let h = hilbert_symbol::<f64>(3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                // Hilbert is the (z, w) = (-1, 1) family up to its diagonal.
                if i != j {
                    assert_eq!(t.value(i, j), h.value(i, j));
                }
            }
        }
    }

    #[test]
    fn formula_examples() {
        assert!((hilbert_norm_formula(2.0).unwrap().value - 1.0).abs() < 1e-15);
        assert!((hilbert_norm_formula(4.0).unwrap().value - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        let t8 = hilbert_norm_formula(8.0).unwrap();
        assert!((t8.value - 5.027339492125848).abs() < 1e-12 && t8.certified);
        assert!(!hilbert_norm_formula(3.0).unwrap().certified);
        let dual = hilbert_norm_formula(4.0 / 3.0).unwrap();
        assert!((dual.value - (1.0 + 2f64.sqrt())).abs() < 1e-12 && dual.certified);
        assert!(hilbert_norm_formula(1.0).is_err());
        assert!((riesz_lp_target(4.0).unwrap() - riesz_l4_formula()).abs() < 1e-15);
        assert!((riesz_lp_target(2.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cotlar_examples() {
        assert_eq!(cotlar_recursion::<f64>(1).unwrap(), 1.0);
        assert!((cotlar_recursion::<f64>(2).unwrap() - (1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!((cotlar_recursion::<f64>(3).unwrap() - 5.027339492125848).abs() < 1e-12);
        assert!(cotlar_recursion::<f64>(0).is_err());
    }

    #[test]
    fn scan_at_two_is_one() {
        let rows = convergence_scan(ClassicalSymbol::Hilbert, 2.0, &[2, 4, 8], &AscentOptions::default()).unwrap();
        assert!(rows.iter().all(|r| r.lower == 1.0 && r.gap.abs() < 1e-15));
        assert!(convergence_scan(ClassicalSymbol::Riesz, 4.0, &[4, 4], &AscentOptions::default()).is_err());
    }
}
