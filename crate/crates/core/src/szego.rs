//! Truncations of group-algebra elements over Følner sets, empirical versus exact moments,
//! the compression/embedding pair, and Reiter-mean embedding norms.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupalg::{Element, FolnerNet, FourierSeries, GroupModel, ReiterMean};
use crate::scalar::{cr, Real};
use crate::schatten::{schatten_norm, singular_values, CMatrix, Convention, Exponent};

/// `p_Γ y p_Γ` as the block matrix `(y_{r c⁻¹})_{r, c ∈ Γ}`.
pub fn truncate<T: Real>(y: &FourierSeries<T>, window: &[Element]) -> Result<CMatrix<T>> {
    y.realize(window, window)
}

/// `Id ⊗ (tr/|Γ|)(y_Γ^k)` for each requested order, on one truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMoments<T: Real> {
    pub window_size: usize,
    pub orders: Vec<u32>,
    /// One `m × m` matrix per order.
    pub values: Vec<CMatrix<T>>,
}

fn check_selfadjoint<T: Real>(y: &FourierSeries<T>) -> Result<()> {
    let scale = y.l2_coeff_norm().max(T::one());
    if !y.is_selfadjoint(T::lit(1e-12) * scale) {
        return Err(Error::NotSelfAdjoint);
    }
    Ok(())
}

/// Sum of the diagonal `m × m` blocks divided by the number of blocks.
fn partial_trace<T: Real>(z: &DMatrix<Complex<T>>, m: usize) -> DMatrix<Complex<T>> {
    let blocks = z.nrows() / m;
    let mut acc = DMatrix::zeros(m, m);
    for b in 0..blocks {
        acc += z.view((b * m, b * m), (m, m));
    }
    acc / cr(T::lit(blocks as f64))
}

fn moments_on_window<T: Real>(y: &FourierSeries<T>, window: &[Element], orders: &[u32]) -> Result<EmpiricalMoments<T>> {
    let m = y.block_size();
    let yt = truncate(y, window)?.into_inner();
    let kmax = orders.iter().copied().max().unwrap_or(0);
    let mut powers = Vec::with_capacity(kmax as usize + 1);
    powers.push(DMatrix::identity(yt.nrows(), yt.ncols()));
    for k in 1..=kmax as usize {
        powers.push(&powers[k - 1] * &yt);
    }
    let values = orders.iter().map(|&k| CMatrix::wrap(partial_trace(&powers[k as usize], m))).collect();
    Ok(EmpiricalMoments { window_size: window.len(), orders: orders.to_vec(), values })
}

/// Empirical moments on every set of the net. Requires `y = y*`.
pub fn empirical_moments<T: Real>(y: &FourierSeries<T>, net: &FolnerNet, orders: &[u32]) -> Result<Vec<EmpiricalMoments<T>>> {
    check_selfadjoint(y)?;
    if net.group() != y.group() {
        return Err(Error::InvalidInput("net and element live on different groups".into()));
    }
    net.sets().par_iter().map(|w| moments_on_window(y, w, orders)).collect()
}

/// Coefficients of `x · y` in the group algebra.
fn convolve<T: Real>(
    g: &GroupModel,
    x: &BTreeMap<Element, DMatrix<Complex<T>>>,
    y: &BTreeMap<Element, DMatrix<Complex<T>>>,
) -> BTreeMap<Element, DMatrix<Complex<T>>> {
    let mut out: BTreeMap<Element, DMatrix<Complex<T>>> = BTreeMap::new();
    for (a, xa) in x {
        for (b, yb) in y {
            let prod = xa * yb;
            out.entry(g.compose(a, b)).and_modify(|s| *s += &prod).or_insert(prod);
        }
    }
    out
}

/// `Id ⊗ τ(y^k)` by summing coefficient products over closed walks.
pub fn spectral_moments<T: Real>(y: &FourierSeries<T>, orders: &[u32]) -> Result<Vec<CMatrix<T>>> {
    let g = *y.group();
    let m = y.block_size();
    let kmax = orders.iter().copied().max().unwrap_or(0);
    let id = g.identity();
    let mut power: BTreeMap<Element, DMatrix<Complex<T>>> = BTreeMap::from([(id, DMatrix::identity(m, m))]);
    let mut traces = vec![DMatrix::identity(m, m)];
    for _ in 0..kmax {
        power = convolve(&g, &power, y.coeffs());
        traces.push(power.get(&id).cloned().unwrap_or_else(|| DMatrix::zeros(m, m)));
    }
    Ok(orders.iter().map(|&k| CMatrix::wrap(traces[k as usize].clone())).collect())
}

/// One `(window, k)` line of the convergence report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SzegoRow {
    pub window: usize,
    pub k: u32,
    /// Normalised trace `(1/m) tr` of the empirical moment.
    pub empirical: f64,
    pub exact: f64,
    /// Largest entrywise deviation of the matrix-valued moments.
    pub abs_error: f64,
    /// `(k - 1) ‖y‖^{k-1} D / |Γ|` with `D = Σ_γ ‖y_γ‖_1 |γΓ \ Γ|`.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SzegoReport {
    pub rows: Vec<SzegoRow>,
    /// Per order, `max_ι |Γ_ι| · error_ι`.
    pub fitted_constants: Vec<(u32, f64)>,
}

impl SzegoReport {
    pub fn constants_finite(&self) -> bool {
        self.fitted_constants.iter().all(|(_, c)| c.is_finite())
    }

    pub fn within_bound(&self) -> bool {
        self.rows.iter().all(|r| r.abs_error <= r.bound + 1e-9)
    }
}

/// Upper bound for `‖y‖_∞` by the triangle inequality over coefficients.
fn coefficient_norm_bound<T: Real>(y: &FourierSeries<T>) -> Result<f64> {
    y.coeffs().values().try_fold(0.0, |s, a| Ok(s + singular_values(&CMatrix::wrap(a.clone()))?.max().to_f64_lossy()))
}

/// `Σ_γ ‖y_γ‖_1 · |γΓ \ Γ|`, a bound for the trace norm of `(1 - p_Γ) y p_Γ`.
fn boundary_defect<T: Real>(y: &FourierSeries<T>, window: &[Element]) -> Result<f64> {
    let g = y.group();
    let set: BTreeSet<Element> = window.iter().copied().collect();
    y.coeffs().iter().try_fold(0.0, |s, (gamma, a)| {
        let escaped = window.iter().filter(|c| !set.contains(&g.compose(gamma, c))).count();
        let trace = singular_values(&CMatrix::wrap(a.clone()))?.values().iter().fold(0.0, |t, v| t + v.to_f64_lossy());
        Ok(s + trace * escaped as f64)
    })
}

pub fn szego_convergence_report<T: Real>(y: &FourierSeries<T>, net: &FolnerNet, orders: &[u32]) -> Result<SzegoReport> {
    let emp = empirical_moments(y, net, orders)?;
    let exact = spectral_moments(y, orders)?;
    let norm = coefficient_norm_bound(y)?;
    let m = y.block_size() as f64;
    let mut rows = Vec::new();
    for (set, em) in net.sets().iter().zip(&emp) {
        let defect = boundary_defect(y, set)?;
        for ((&k, e), x) in orders.iter().zip(&em.values).zip(&exact) {
            let abs_error = e.max_abs_diff(x).to_f64_lossy();
            let bound = if k <= 1 { 0.0 } else { (k - 1) as f64 * norm.powi(k as i32 - 1) * defect / set.len() as f64 };
            rows.push(SzegoRow {
                window: set.len(),
                k,
                empirical: e.trace().re.to_f64_lossy() / m,
                exact: x.trace().re.to_f64_lossy() / m,
                abs_error,
                bound,
            });
        }
    }
    let fitted_constants = orders
        .iter()
        .map(|&k| {
            let c = rows.iter().filter(|r| r.k == k).fold(0.0f64, |c, r| c.max(r.abs_error * r.window as f64));
            (k, c)
        })
        .collect();
    Ok(SzegoReport { rows, fitted_constants })
}

/// The compression `x ↦ p_Γ X p_Γ` and the embedding `e_{rc} ↦ |Γ|⁻¹ λ_r λ_{c⁻¹}` for a
/// finite window `Γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressionEmbedding {
    group: GroupModel,
    window: Vec<Element>,
}

pub fn compression_embedding_pair(group: &GroupModel, window: &[Element]) -> Result<CompressionEmbedding> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    for w in window {
        group.check(w)?;
    }
    let distinct: BTreeSet<_> = window.iter().collect();
    if distinct.len() != window.len() {
        return Err(Error::InvalidInput("window elements must be distinct".into()));
    }
    Ok(CompressionEmbedding { group: *group, window: window.to_vec() })
}

impl CompressionEmbedding {
    pub fn window(&self) -> &[Element] {
        &self.window
    }

    pub fn compress<T: Real>(&self, x: &FourierSeries<T>) -> Result<CMatrix<T>> {
        if x.group() != &self.group {
            return Err(Error::InvalidInput("element lives on a different group".into()));
        }
        truncate(x, &self.window)
    }

    /// Embedding of an `|Γ|m × |Γ|m` block matrix.
    pub fn embed<T: Real>(&self, a: &CMatrix<T>, block: usize) -> Result<FourierSeries<T>> {
        let n = self.window.len();
        if block == 0 || a.nrows() != n * block || a.ncols() != n * block {
            return Err(Error::Dimension("matrix does not match the window".into()));
        }
        let scale = cr(T::one() / T::lit(n as f64));
        let mut coeffs: BTreeMap<Element, DMatrix<Complex<T>>> = BTreeMap::new();
        for (i, r) in self.window.iter().enumerate() {
            for (j, c) in self.window.iter().enumerate() {
                let blk = a.inner().view((i * block, j * block), (block, block)).into_owned() * scale;
                coeffs
                    .entry(self.group.quotient(r, c))
                    .and_modify(|s| *s += &blk)
                    .or_insert(blk);
            }
        }
        FourierSeries::block(self.group, block, coeffs.into_iter().collect())
    }

    /// Coefficient `c` with `ψφ(λ_γ) = c λ_γ`: `|Γ ∩ γ⁻¹Γ| / |Γ|`.
    pub fn roundtrip_coefficient<T: Real>(&self, gamma: &Element) -> Result<T> {
        let x = FourierSeries::<T>::lambda(self.group, *gamma)?;
        let back = self.embed(&self.compress(&x)?, 1)?;
        Ok(back.scalar_coeff(gamma).re)
    }
}

/// `‖X diag(μ^{1/p})‖_{S^p}`, with `X` the matrix of `x` on `spectrum · supp μ` × `supp μ`.
pub fn reiter_embedding_norm<T: Real>(x: &FourierSeries<T>, mu: &ReiterMean<T>, p: f64) -> Result<T> {
    if !(p >= 1.0) || p.is_infinite() {
        return Err(Error::InvalidExponent(format!("embedding exponent must lie in [1, ∞), got {p}")));
    }
    let g = x.group();
    let cols = mu.support();
    let rows: Vec<Element> = x
        .spectrum()
        .iter()
        .flat_map(|s| cols.iter().map(move |c| g.compose(s, c)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if rows.is_empty() {
        return Ok(T::zero());
    }
    let m = x.block_size();
    let mut a = x.realize(&rows, &cols)?.into_inner();
    for (j, c) in cols.iter().enumerate() {
        let w = cr(mu.weight(c).powf(T::lit(1.0 / p)));
        for col in j * m..(j + 1) * m {
            a.column_mut(col).iter_mut().for_each(|z| *z *= w);
        }
    }
    schatten_norm(&CMatrix::wrap(a), &Exponent::p(p)?, Convention::Standard)
}

/// `x = Σ y_γ λ_γ` with `y_{-1} = y_1*` built from a single coefficient `a`.
pub fn hermitian_shift<T: Real>(group: GroupModel, a: &DMatrix<Complex<T>>) -> Result<FourierSeries<T>> {
    let one = group.elem(&[1])?;
    FourierSeries::block(group, a.nrows(), vec![(one, a.clone()), (group.inverse(&one), a.adjoint())])
}

impl<T: Real> EmpiricalMoments<T> {
    pub fn scalar(&self, i: usize) -> Complex<T> {
        self.values.get(i).map_or_else(Complex::zero, |v| v.get(0, 0))
    }
}
