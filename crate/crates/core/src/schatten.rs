//! Dense complex matrices, singular values, Schatten and Schatten-Orlicz norms.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{abs, cr, Real};

/// Dense complex matrix whose entries are all finite.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T: Real> {
    data: DMatrix<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    /// Wraps `data`, rejecting NaN or infinite entries.
    pub fn new(data: DMatrix<Complex<T>>) -> Result<Self> {
        for c in 0..data.ncols() {
            for r in 0..data.nrows() {
                let z = data[(r, c)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: r, col: c });
                }
            }
        }
        Ok(Self { data })
    }

    /// Internal constructor for results of arithmetic on finite matrices.
    pub(crate) fn wrap(data: DMatrix<Complex<T>>) -> Self {
        Self { data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::wrap(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self::wrap(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex<T>) -> Result<Self> {
        Self::new(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from real row slices, e.g. `from_real_rows(&[&[1., 2.], &[3., 4.]])`.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != nc) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_fn(nr, nc, |r, c| cr(T::lit(rows[r][c])))
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != nc) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_fn(nr, nc, |r, c| rows[r][c])
    }

    pub fn diag(values: &[Complex<T>]) -> Self {
        let n = values.len();
        Self::wrap(DMatrix::from_fn(n, n, |r, c| if r == c { values[r] } else { Complex::zero() }))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<Complex<T>> = values.iter().map(|&x| cr(T::lit(x))).collect();
        Self::diag(&v)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[(r, c)]
    }

    pub fn inner(&self) -> &DMatrix<Complex<T>> {
        &self.data
    }

    pub fn into_inner(self) -> DMatrix<Complex<T>> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.data.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self::wrap(self.data.transpose())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.ncols() != other.nrows() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows(),
                self.ncols(),
                other.nrows(),
                other.ncols()
            )));
        }
        Ok(Self::wrap(&self.data * &other.data))
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self::wrap(self.data.component_mul(&other.data)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self::wrap(&self.data + &other.data))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self::wrap(&self.data - &other.data))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::wrap(self.data.map(|z| z * s))
    }

    pub fn max_abs_entry(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &z| m.max(abs(z)))
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt()
    }

    pub fn trace(&self) -> Complex<T> {
        let n = self.nrows().min(self.ncols());
        (0..n).fold(Complex::zero(), |s, i| s + self.data[(i, i)])
    }

    /// Maximum entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(T::zero(), |m, (&a, &b)| m.max(abs(a - b)))
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.nrows() != other.nrows() || self.ncols() != other.ncols() {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.nrows(),
                self.ncols(),
                other.nrows(),
                other.ncols()
            )));
        }
        Ok(())
    }
}

/// Orlicz gauge: continuous, nondecreasing, vanishing only at zero.
#[derive(Clone)]
pub struct Gauge<T: Real> {
    name: String,
    convex: bool,
    f: Arc<dyn Fn(T) -> T + Send + Sync>,
}

impl<T: Real> fmt::Debug for Gauge<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gauge").field("name", &self.name).field("convex", &self.convex).finish()
    }
}

impl<T: Real> Gauge<T> {
    /// Wraps `f` after spot-checking the gauge axioms on a geometric grid.
    pub fn new(name: impl Into<String>, convex: bool, f: impl Fn(T) -> T + Send + Sync + 'static) -> Result<Self> {
        let name = name.into();
        let zero = f(T::zero());
        if zero != T::zero() {
            return Err(Error::InvalidExponent(format!("gauge {name}: psi(0) = {zero} != 0")));
        }
        let mut prev = T::zero();
        for k in -60..=60 {
            let t = T::lit(10f64.powf(k as f64 / 10.0));
            let v = f(t);
            if !v.is_finite() || v <= T::zero() {
                return Err(Error::InvalidExponent(format!("gauge {name}: psi({t}) = {v} must be positive")));
            }
            if v < prev {
                return Err(Error::InvalidExponent(format!("gauge {name} decreases near t = {t}")));
            }
            prev = v;
        }
        Ok(Self { name, convex, f: Arc::new(f) })
    }

    /// `t ↦ t^p`; convex exactly when `p >= 1`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(format!("power gauge needs finite p > 0, got {p}")));
        }
        let pp = T::lit(p);
        Self::new(format!("t^{p}"), p >= 1.0, move |t: T| t.powf(pp))
    }

    #[inline]
    pub fn eval(&self, t: T) -> T {
        (self.f)(t)
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Central-difference derivative, one-sided at the origin.
    pub(crate) fn derivative(&self, t: T) -> T {
        let h = T::lit(1e-6) * t.max(T::lit(1e-8));
        if t > h {
            (self.eval(t + h) - self.eval(t - h)) / (h + h)
        } else {
            (self.eval(t + h) - self.eval(t)) / h
        }
    }
}

/// Schatten exponent `p ∈ (0, ∞]` or an Orlicz gauge.
#[derive(Clone, Debug)]
pub enum Exponent<T: Real> {
    P(T),
    Infinity,
    Orlicz(Gauge<T>),
}

impl<T: Real> Exponent<T> {
    /// `p = f64::INFINITY` maps to [`Exponent::Infinity`].
    pub fn p(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Self::Infinity)
        } else if p > 0.0 && p.is_finite() {
            Ok(Self::P(T::lit(p)))
        } else {
            Err(Error::InvalidExponent(format!("p must lie in (0, inf], got {p}")))
        }
    }

    pub fn infinity() -> Self {
        Self::Infinity
    }

    pub fn orlicz(gauge: Gauge<T>) -> Self {
        Self::Orlicz(gauge)
    }

    /// The numeric exponent, `None` for Orlicz gauges.
    pub fn as_p(&self) -> Option<f64> {
        match self {
            Self::P(p) => Some(p.to_f64_lossy()),
            Self::Infinity => Some(f64::INFINITY),
            Self::Orlicz(_) => None,
        }
    }

    /// Whether the induced (quasi-)norm is positively homogeneous.
    pub fn is_homogeneous(&self) -> bool {
        match self {
            Self::Orlicz(g) => g.is_convex(),
            _ => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::P(p) if !(*p > T::zero() && p.is_finite()) => {
                Err(Error::InvalidExponent(format!("p must be positive, got {p}")))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::P(p) => format!("{p}"),
            Self::Infinity => "inf".into(),
            Self::Orlicz(g) => format!("orlicz({})", g.name()),
        }
    }
}

/// How `(tr|x|^p)` is turned into a size for `p < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Convention {
    /// `(tr|x|^p)^{1/p}`, a p-homogeneous quasi-norm.
    #[default]
    Standard,
    /// `(tr|x|^p)^{1/(1+p)}`, an F-norm.
    FNorm,
}

/// Nonincreasing list of nonnegative singular values.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSpectrum<T: Real> {
    values: Vec<T>,
}

impl<T: Real> SingularSpectrum<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.iter().any(|v| !(*v >= T::zero())) {
            return Err(Error::InvalidInput("singular values must be nonnegative".into()));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput("singular values must be nonincreasing".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn rank(&self) -> usize {
        self.values.iter().filter(|v| **v > T::zero()).count()
    }
}

fn sort_and_clamp<T: Real>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let cut = v.first().copied().unwrap_or_else(T::zero) * T::lit(T::SPECTRUM_CLAMP);
    for s in v.iter_mut() {
        if *s < cut || *s < T::zero() {
            *s = T::zero();
        }
    }
    v
}

pub fn singular_values<T: Real>(a: &CMatrix<T>) -> Result<SingularSpectrum<T>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(SingularSpectrum { values: Vec::new() });
    }
    let svd = a
        .inner()
        .clone()
        .try_svd(false, false, T::default_epsilon(), 0)
        .ok_or(Error::SvdFailure)?;
    Ok(SingularSpectrum { values: sort_and_clamp(svd.singular_values.iter().copied().collect()) })
}

/// Full SVD `A = U diag(s) V*` with clamped singular values (order as returned by the solver).
pub(crate) struct Svd<T: Real> {
    pub u: DMatrix<Complex<T>>,
    pub s: Vec<T>,
    pub v_t: DMatrix<Complex<T>>,
}

pub(crate) fn svd_full<T: Real>(a: &DMatrix<Complex<T>>) -> Result<Svd<T>> {
    let svd = a
        .clone()
        .try_svd(true, true, T::default_epsilon(), 0)
        .ok_or(Error::SvdFailure)?;
    let s: Vec<T> = svd.singular_values.iter().copied().collect();
    let smax = s.iter().fold(T::zero(), |m, &x| m.max(x));
    let cut = smax * T::lit(T::SPECTRUM_CLAMP);
    let s = s.into_iter().map(|x| if x < cut { T::zero() } else { x }).collect();
    Ok(Svd { u: svd.u.ok_or(Error::SvdFailure)?, s, v_t: svd.v_t.ok_or(Error::SvdFailure)? })
}

/// `U diag(f(s_i)) V*`.
pub(crate) fn svd_apply<T: Real>(svd: &Svd<T>, f: impl Fn(T) -> T) -> DMatrix<Complex<T>> {
    let mut u = svd.u.clone();
    for (j, &s) in svd.s.iter().enumerate() {
        let w = f(s);
        u.column_mut(j).scale_mut(w);
    }
    u * &svd.v_t
}

/// Norm of a spectrum under the trace `weight * tr` (`weight = 1` for Schatten classes,
/// `1/|window|` for normalised traces on group algebras).
pub fn spectrum_norm<T: Real>(sv: &[T], e: &Exponent<T>, convention: Convention, weight: T) -> Result<T> {
    e.validate()?;
    let smax = sv.iter().fold(T::zero(), |m, &x| m.max(x));
    if smax == T::zero() {
        return Ok(T::zero());
    }
    match e {
        Exponent::Infinity => Ok(smax),
        Exponent::P(p) => {
            let p = *p;
            if p < T::one() && convention == Convention::FNorm {
                let sum = sv.iter().fold(T::zero(), |s, &x| s + x.powf(p)) * weight;
                return Ok(sum.powf(T::one() / (T::one() + p)));
            }
            let sum = sv.iter().fold(T::zero(), |s, &x| s + (x / smax).powf(p)) * weight;
            Ok(smax * sum.powf(T::one() / p))
        }
        Exponent::Orlicz(g) => orlicz_gauge_norm(sv, g, weight),
    }
}

/// Solves `inf{a > 0 : weight * Σ ψ(σ_i/a) ≤ 1}` (convex gauges) or `≤ a` (nonconvex)
/// by monotone bisection.
fn orlicz_gauge_norm<T: Real>(sv: &[T], g: &Gauge<T>, weight: T) -> Result<T> {
    let smax = sv.iter().fold(T::zero(), |m, &x| m.max(x));
    if smax == T::zero() {
        return Ok(T::zero());
    }
    let feasible = |a: T| {
        let s = sv.iter().fold(T::zero(), |s, &x| s + g.eval(x / a)) * weight;
        if g.is_convex() {
            s <= T::one()
        } else {
            s <= a
        }
    };
    let rank = T::lit(sv.iter().filter(|x| **x > T::zero()).count().max(1) as f64);
    let two = T::lit(2.0);
    let mut hi = smax * rank.max(T::one());
    let mut steps = 0;
    while !feasible(hi) {
        hi *= two;
        steps += 1;
        if steps > 2000 || !hi.is_finite() {
            return Err(Error::InvalidExponent(format!("gauge {} admits no feasible scale", g.name())));
        }
    }
    let mut lo = hi;
    steps = 0;
    while feasible(lo) {
        lo /= two;
        steps += 1;
        if steps > 2000 || lo == T::zero() {
            return Ok(T::zero());
        }
    }
    let tol = T::lit(T::BISECTION_TOL);
    for _ in 0..400 {
        if hi - lo <= tol * hi {
            break;
        }
        let mid = (lo + hi) / two;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub fn schatten_norm<T: Real>(a: &CMatrix<T>, e: &Exponent<T>, convention: Convention) -> Result<T> {
    let sv = singular_values(a)?;
    spectrum_norm(sv.values(), e, convention, T::one())
}

/// `Σ_i ψ(σ_i / a)`.
pub fn orlicz_trace<T: Real>(a: &CMatrix<T>, psi: &Gauge<T>, scale: T) -> Result<T> {
    if !(scale > T::zero()) {
        return Err(Error::InvalidInput(format!("scale must be positive, got {scale}")));
    }
    let sv = singular_values(a)?;
    Ok(sv.values().iter().fold(T::zero(), |s, &x| s + psi.eval(x / scale)))
}

/// Norm of `y` together with its gradient `D` for the real pairing `Re tr(D* dY)`.
///
/// For `P(p)` the gradient is `U diag(σ^{p-1}) V* / ‖y‖^{p-1}` (computed without an SVD
/// for even integer `p`); for `∞` it is the top singular pair; for convex Orlicz gauges it
/// follows from implicit differentiation of the defining equation.
pub fn norm_and_gradient<T: Real>(y: &DMatrix<Complex<T>>, e: &Exponent<T>) -> Result<(T, DMatrix<Complex<T>>)> {
    let (n, mut g) = blocks_norm_and_gradient(std::slice::from_ref(y), e, T::one())?;
    Ok((n, g.pop().expect("one block")))
}

enum BlockFactor<T: Real> {
    Scalar(Complex<T>),
    Svd(Svd<T>),
    Gram { gram: DMatrix<Complex<T>>, power: DMatrix<Complex<T>> },
}

/// Norm of the block-diagonal matrix `diag(blocks)` under the trace `weight · tr`, and the
/// gradient of that norm with respect to each block.
pub(crate) fn blocks_norm_and_gradient<T: Real>(
    blocks: &[DMatrix<Complex<T>>],
    e: &Exponent<T>,
    weight: T,
) -> Result<(T, Vec<DMatrix<Complex<T>>>)> {
    e.validate()?;
    let zero_grads = || blocks.iter().map(|b| DMatrix::zeros(b.nrows(), b.ncols())).collect::<Vec<_>>();
    let scalar = blocks.iter().all(|b| b.nrows() == 1 && b.ncols() == 1);
    let pf = e.as_p();

    if pf == Some(2.0) {
        let sum = blocks.iter().fold(T::zero(), |s, b| s + b.iter().fold(T::zero(), |t, z| t + z.norm_sqr()));
        let n = (sum * weight).sqrt();
        if n == T::zero() {
            return Ok((n, zero_grads()));
        }
        let k = cr(weight / n);
        return Ok((n, blocks.iter().map(|b| b.map(|z| z * k)).collect()));
    }

    // Even exponents: ‖Y‖_p^p = tr((Y*Y)^{p/2}), gradient Y (Y*Y)^{p/2-1} / ‖Y‖^{p-1}.
    let even = pf.filter(|p| (4.0..=16.0).contains(p) && p.fract() == 0.0 && (*p as usize).is_multiple_of(2));
    let factors: Vec<BlockFactor<T>> = if scalar {
        blocks.iter().map(|b| BlockFactor::Scalar(b[(0, 0)])).collect()
    } else if let Some(p) = even {
        let k = p as usize / 2;
        blocks
            .iter()
            .map(|b| {
                let gram = b.adjoint() * b;
                let mut power = gram.clone();
                for _ in 1..k - 1 {
                    power = &power * &gram;
                }
                BlockFactor::Gram { gram, power }
            })
            .collect()
    } else {
        blocks.iter().map(|b| svd_full(b).map(BlockFactor::Svd)).collect::<Result<_>>()?
    };

    if let (Some(p), false) = (even, scalar) {
        let p_t = T::lit(p);
        let mut tr = T::zero();
        for f in &factors {
            if let BlockFactor::Gram { gram, power } = f {
                for i in 0..gram.nrows() {
                    for j in 0..gram.nrows() {
                        tr += (power[(i, j)] * gram[(j, i)]).re;
                    }
                }
            }
        }
        if !(tr > T::zero()) {
            return Ok((T::zero(), zero_grads()));
        }
        let n = (tr * weight).powf(T::one() / p_t);
        let k = cr(weight / n.powf(p_t - T::one()));
        let grads = blocks
            .iter()
            .zip(&factors)
            .map(|(b, f)| match f {
                BlockFactor::Gram { power, .. } => (b * power).map(|z| z * k),
                _ => unreachable!(),
            })
            .collect();
        return Ok((n, grads));
    }

    let mut sv = Vec::new();
    for f in &factors {
        match f {
            BlockFactor::Scalar(z) => sv.push(abs(*z)),
            BlockFactor::Svd(s) => sv.extend_from_slice(&s.s),
            BlockFactor::Gram { .. } => unreachable!(),
        }
    }
    let smax = sv.iter().fold(T::zero(), |m, &x| m.max(x));
    if smax == T::zero() {
        return Ok((T::zero(), zero_grads()));
    }
    // Gradient = U diag(h(σ)) V* blockwise for a scalar profile h.
    let apply = |h: &dyn Fn(T) -> T| -> Vec<DMatrix<Complex<T>>> {
        factors
            .iter()
            .map(|f| match f {
                BlockFactor::Scalar(z) => {
                    let a = abs(*z);
                    let v = if a > T::zero() { *z * cr(h(a) / a) } else { Complex::zero() };
                    DMatrix::from_element(1, 1, v)
                }
                BlockFactor::Svd(s) => svd_apply(s, h),
                BlockFactor::Gram { .. } => unreachable!(),
            })
            .collect()
    };
    match e {
        Exponent::Infinity => {
            // Subgradient: top singular pair of the first block attaining σ_max.
            let mut out = zero_grads();
            for (i, f) in factors.iter().enumerate() {
                match f {
                    BlockFactor::Scalar(z) if abs(*z) == smax => {
                        out[i][(0, 0)] = *z / cr(smax);
                        return Ok((smax, out));
                    }
                    BlockFactor::Svd(s) => {
                        if let Some(j) = s.s.iter().position(|&x| x == smax) {
                            out[i] = s.u.column(j) * s.v_t.row(j);
                            return Ok((smax, out));
                        }
                    }
                    _ => {}
                }
            }
            Ok((smax, out))
        }
        Exponent::P(p) => {
            let p = *p;
            let n = spectrum_norm(&sv, e, Convention::Standard, weight)?;
            let scale = weight / n.powf(p - T::one());
            let grads = apply(&|s: T| if s > T::zero() { s.powf(p - T::one()) * scale } else { T::zero() });
            Ok((n, grads))
        }
        Exponent::Orlicz(g) => {
            if !g.is_convex() {
                return Err(Error::InvalidExponent("gradient requires a convex gauge".into()));
            }
            let a = orlicz_gauge_norm(&sv, g, weight)?;
            let denom = sv.iter().fold(T::zero(), |s, &x| s + g.derivative(x / a) * x);
            if !(denom > T::zero()) {
                return Ok((a, zero_grads()));
            }
            Ok((a, apply(&|s: T| a * g.derivative(s / a) / denom)))
        }
    }
}

/// `U diag(σ^{q-1}) V*`: the duality map sending the unit sphere of `S^q` onto that of its dual.
///
/// The map is homogeneous, so the result is returned up to a positive factor (singular values
/// are rescaled by `σ_max` first to keep large `q` finite).
pub(crate) fn duality_map<T: Real>(z: &DMatrix<Complex<T>>, q: T) -> Result<DMatrix<Complex<T>>> {
    let svd = svd_full(z)?;
    let smax = svd.s.iter().fold(T::zero(), |m, &x| m.max(x));
    if smax == T::zero() {
        return Ok(DMatrix::zeros(z.nrows(), z.ncols()));
    }
    Ok(svd_apply(&svd, |s| if s > T::zero() { (s / smax).powf(q - T::one()) } else { T::zero() }))
}

/// Norm of the diagonal matrix `diag(values)` under `weight · tr` and its gradient.
pub(crate) fn scalar_norm_and_gradient<T: Real>(
    values: &[Complex<T>],
    e: &Exponent<T>,
    weight: T,
) -> Result<(T, Vec<Complex<T>>)> {
    let sv: Vec<T> = values.iter().map(|z| abs(*z)).collect();
    let smax = sv.iter().fold(T::zero(), |m, &x| m.max(x));
    let mut grad = vec![Complex::zero(); values.len()];
    if smax == T::zero() {
        return Ok((T::zero(), grad));
    }
    let profile = |grad: &mut [Complex<T>], h: &dyn Fn(T) -> T| {
        for ((g, z), &s) in grad.iter_mut().zip(values).zip(&sv) {
            if s > T::zero() {
                *g = *z * cr(h(s) / s);
            }
        }
    };
    match e {
        Exponent::Infinity => {
            let i = sv.iter().position(|&x| x == smax).unwrap_or(0);
            grad[i] = values[i] / cr(smax);
            Ok((smax, grad))
        }
        Exponent::P(p) => {
            let p = *p;
            let n = spectrum_norm(&sv, e, Convention::Standard, weight)?;
            let scale = weight / n.powf(p - T::one());
            profile(&mut grad, &|s: T| s.powf(p - T::one()) * scale);
            Ok((n, grad))
        }
        Exponent::Orlicz(g) => {
            if !g.is_convex() {
                return Err(Error::InvalidExponent("gradient requires a convex gauge".into()));
            }
            let a = orlicz_gauge_norm(&sv, g, weight)?;
            let denom = sv.iter().fold(T::zero(), |s, &x| s + g.derivative(x / a) * x);
            if denom > T::zero() {
                profile(&mut grad, &|s: T| a * g.derivative(s / a) / denom);
            }
            Ok((a, grad))
        }
    }
}

/// Smallest eigenvalue of the Hermitian part; nonnegative exactly for positive semidefinite input.
pub fn min_hermitian_eigenvalue<T: Real>(a: &CMatrix<T>) -> Result<T> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension("square matrix required".into()));
    }
    let h = (a.inner() + a.inner().adjoint()).map(|z| z * cr(T::lit(0.5)));
    let eig = h.symmetric_eigenvalues();
    Ok(eig.iter().copied().reduce(|m, x| m.min(x)).unwrap_or_else(T::zero))
}

impl<T: Real> fmt::Display for CMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.nrows() {
            let row: Vec<String> = (0..self.ncols())
                .map(|c| {
                    let z = self.get(r, c);
                    if z.im == T::zero() {
                        format!("{}", z.re)
                    } else {
                        format!("{}{:+}i", z.re, z.im)
                    }
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_matrix, random_unitary, rng_for};

    fn m(rows: &[&[f64]]) -> CMatrix<f64> {
        CMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn singular_value_examples() {
        let s = singular_values(&CMatrix::<f64>::diag_real(&[3.0, 4.0])).unwrap();
        assert_eq!(s.values().len(), 2);
        assert!((s.values()[0] - 4.0).abs() < 1e-14 && (s.values()[1] - 3.0).abs() < 1e-14);
        let s = singular_values(&m(&[&[0.0, 2.0], &[0.0, 0.0]])).unwrap();
        assert!((s.values()[0] - 2.0).abs() < 1e-14 && s.values()[1] == 0.0);
        let s = singular_values(&m(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert!((s.values()[0] - 2.0).abs() < 1e-14 && s.values()[1] == 0.0);
    }

    #[test]
    fn rectangular_spectrum_length() {
        let a = gaussian_matrix::<f64>(3, 7, &mut rng_for(1, 0));
        assert_eq!(singular_values(&a).unwrap().len(), 3);
    }

    #[test]
    fn rejects_non_finite() {
        let d = DMatrix::from_element(1, 1, Complex::new(f64::NAN, 0.0));
        assert!(matches!(CMatrix::new(d), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn norm_examples() {
        let d = CMatrix::<f64>::diag_real(&[3.0, 4.0]);
        let n1 = schatten_norm(&d, &Exponent::p(1.0).unwrap(), Convention::Standard).unwrap();
        assert!((n1 - 7.0).abs() < 1e-13);
        let n4 = schatten_norm(&m(&[&[1.0, 1.0], &[1.0, 1.0]]), &Exponent::p(4.0).unwrap(), Convention::Standard)
            .unwrap();
        assert!((n4 - 2.0).abs() < 1e-13);
        let sq = Exponent::orlicz(Gauge::power(2.0).unwrap());
        let no = schatten_norm(&CMatrix::<f64>::identity(2), &sq, Convention::Standard).unwrap();
        assert!((no - 2f64.sqrt()).abs() < 1e-11);
        let ninf = schatten_norm(&d, &Exponent::Infinity, Convention::Standard).unwrap();
        assert_eq!(ninf, 4.0);
    }

    #[test]
    fn fnorm_convention_for_small_p() {
        let d = CMatrix::<f64>::diag_real(&[1.0, 1.0]);
        let e = Exponent::p(0.5).unwrap();
        let std = schatten_norm(&d, &e, Convention::Standard).unwrap();
        let f = schatten_norm(&d, &e, Convention::FNorm).unwrap();
        assert!((std - 4.0).abs() < 1e-12);
        assert!((f - 2f64.powf(1.0 / 1.5)).abs() < 1e-12);
    }

    #[test]
    fn orlicz_trace_examples() {
        let id = Gauge::<f64>::new("t", true, |t| t).unwrap();
        let sq = Gauge::<f64>::power(2.0).unwrap();
        assert!((orlicz_trace(&CMatrix::diag_real(&[2.0]), &id, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((orlicz_trace(&CMatrix::diag_real(&[3.0, 4.0]), &sq, 1.0).unwrap() - 25.0).abs() < 1e-12);
        assert_eq!(orlicz_trace(&CMatrix::zeros(3, 2), &sq, 0.7).unwrap(), 0.0);
        assert!(orlicz_trace(&CMatrix::zeros(3, 2), &sq, 0.0).is_err());
    }

    #[test]
    fn orlicz_trace_monotone_in_scale() {
        let a = gaussian_matrix::<f64>(4, 4, &mut rng_for(2, 0));
        let g = Gauge::new("t^2 log(1+t)", true, |t: f64| t * t * (1.0 + t).ln()).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let v = orlicz_trace(&a, &g, 0.1 * k as f64).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn invalid_exponents() {
        assert!(Exponent::<f64>::p(0.0).is_err());
        assert!(Exponent::<f64>::p(-1.0).is_err());
        assert!(Exponent::<f64>::p(f64::NAN).is_err());
        assert!(Gauge::<f64>::new("neg", true, |t| -t).is_err());
        assert!(Gauge::<f64>::new("offset", true, |t| t + 1.0).is_err());
        assert!(Gauge::<f64>::new("dec", false, |t: f64| if t > 0.0 { 1.0 / (1.0 + t) } else { 0.0 }).is_err());
    }

    #[test]
    fn nonconvex_orlicz_fixed_point() {
        // inf{a : Σ ψ(σ/a) ≤ a} with ψ(t) = sqrt(t) on diag(1): sqrt(1/a) = a ⇒ a = 1.
        let g = Gauge::<f64>::new("sqrt", false, |t: f64| t.sqrt()).unwrap();
        let v = schatten_norm(&CMatrix::diag_real(&[1.0]), &Exponent::Orlicz(g), Convention::Standard).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rng_for(3, 0);
        let y = gaussian_matrix::<f64>(3, 4, &mut rng);
        let dir = gaussian_matrix::<f64>(3, 4, &mut rng);
        for e in [
            Exponent::p(1.5).unwrap(),
            Exponent::p(3.0).unwrap(),
            Exponent::p(4.0).unwrap(),
            Exponent::p(6.0).unwrap(),
            Exponent::Orlicz(Gauge::power(2.5).unwrap()),
        ] {
            let (n, g) = norm_and_gradient(y.inner(), &e).unwrap();
            let h = 1e-6;
            let plus = schatten_norm(&y.add(&dir.scale(cr(h))).unwrap(), &e, Convention::Standard).unwrap();
            let minus = schatten_norm(&y.sub(&dir.scale(cr(h))).unwrap(), &e, Convention::Standard).unwrap();
            let fd = (plus - minus) / (2.0 * h);
            let an: f64 = g.iter().zip(dir.inner().iter()).map(|(a, b)| (a.conj() * b).re).sum();
            let direct = schatten_norm(&y, &e, Convention::Standard).unwrap();
            assert!((n - direct).abs() < 1e-9 * direct, "{}", e.label());
            assert!((fd - an).abs() < 1e-5 * fd.abs().max(1.0), "{}: fd {fd} vs {an}", e.label());
        }
    }

    #[test]
    fn block_gradient_matches_dense() {
        let mut rng = rng_for(5, 0);
        let b1 = gaussian_matrix::<f64>(2, 2, &mut rng).into_inner();
        let b2 = gaussian_matrix::<f64>(2, 2, &mut rng).into_inner();
        let mut dense = DMatrix::zeros(4, 4);
        dense.view_mut((0, 0), (2, 2)).copy_from(&b1);
        dense.view_mut((2, 2), (2, 2)).copy_from(&b2);
        for e in [Exponent::p(1.0).unwrap(), Exponent::p(3.0).unwrap(), Exponent::p(4.0).unwrap(), Exponent::Infinity] {
            let (n, g) = blocks_norm_and_gradient(&[b1.clone(), b2.clone()], &e, 1.0).unwrap();
            let (nd, gd) = norm_and_gradient(&dense, &e).unwrap();
            assert!((n - nd).abs() < 1e-12);
            assert!((&g[0] - gd.view((0, 0), (2, 2))).norm() < 1e-10, "{}", e.label());
            assert!((&g[1] - gd.view((2, 2), (2, 2))).norm() < 1e-10, "{}", e.label());
        }
        let scalars = [DMatrix::from_element(1, 1, Complex::new(3.0, 4.0)), DMatrix::from_element(1, 1, Complex::new(0.0, 1.0))];
        let (n, g) = blocks_norm_and_gradient(&scalars, &Exponent::p(3.0).unwrap(), 0.5).unwrap();
        assert!((n - (0.5f64 * 126.0).powf(1.0 / 3.0)).abs() < 1e-12);
        let expect = 0.5 * 25.0 / n.powi(2) * 0.6;
        assert!((g[0][(0, 0)].re - expect).abs() < 1e-12);
    }

    #[test]
    fn unitary_invariance_small() {
        let mut rng = rng_for(4, 0);
        let a = gaussian_matrix::<f64>(5, 5, &mut rng);
        let u = random_unitary::<f64>(5, &mut rng);
        let v = random_unitary::<f64>(5, &mut rng);
        let b = u.matmul(&a).unwrap().matmul(&v).unwrap();
        for p in [0.5, 1.0, 3.0, f64::INFINITY] {
            let e = Exponent::p(p).unwrap();
            let x = schatten_norm(&a, &e, Convention::Standard).unwrap();
            let y = schatten_norm(&b, &e, Convention::Standard).unwrap();
            assert!((x - y).abs() < 1e-10 * x.max(1.0));
        }
    }

    #[test]
    fn psd_test() {
        let a = CMatrix::<f64>::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        assert!((min_hermitian_eigenvalue(&a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn f32_path() {
        let d = CMatrix::<f32>::diag_real(&[3.0, 4.0]);
        let n = schatten_norm(&d, &Exponent::p(2.0).unwrap(), Convention::Standard).unwrap();
        assert!((n - 5.0).abs() < 1e-5);
    }
}
