//! Multiplier norm estimation: closed forms where they exist, an exhaustive oracle for tiny
//! supports, and multi-start ascent lower bounds otherwise.

mod ascent;
mod oracle;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupalg::{lattice_quadrature_nodes, lp_group_norm, Element, FourierSeries, GroupKind, GroupWindow};
use crate::multiplier::{amplify, schur_apply, toeplitz_transfer, FourierSymbol, SchurSymbol, Support};
use crate::random::{complex_gaussian, fnv1a, rng_for};
use crate::scalar::{abs, cis, cr, Real};
use crate::schatten::{min_hermitian_eigenvalue, schatten_norm, svd_apply, svd_full, CMatrix, Convention, Exponent};

use ascent::{climb, rank_one_trace_ascent, CharacterParam, Climb, MatrixParam, Param, Problem, Ratio, Unimodular, WindowParam};

pub use oracle::brute_oracle_norm;

/// Search parameters for the ascent engine.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AscentOptions {
    /// Random starts in addition to the deterministic ones.
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when the relative gain per step falls below this.
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { restarts: 20, max_iter: 5000, rel_tol: 1e-10, seed: 0 }
    }
}

/// How a [`NormEstimate`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Empty support, single entry, or a line-shaped support.
    Trivial,
    ConstantSymbol,
    /// `p = 2`: the multiplier is diagonal in an orthonormal basis.
    HilbertSchmidt,
    /// Positive semidefinite symbol at `p ∈ {1, ∞}`: the maximal diagonal entry.
    PositiveSymbol,
    /// Full-spectrum multiplier on ℤ_N at `p ∈ {1, ∞}`: ℓ¹ norm of the convolution kernel.
    Convolution,
    Ascent,
    /// `p ∈ {1, ∞}` on a full rectangle: alternating search over rank-one trace-class extreme points.
    RankOneDual,
    BruteOracle,
    SignEnumeration,
    UnimodularAscent,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Trivial => "trivial",
            Self::ConstantSymbol => "constant_symbol",
            Self::HilbertSchmidt => "hilbert_schmidt",
            Self::PositiveSymbol => "positive_symbol",
            Self::Convolution => "convolution",
            Self::Ascent => "ascent",
            Self::RankOneDual => "rank_one_dual",
            Self::BruteOracle => "brute_oracle",
            Self::SignEnumeration => "sign_enumeration",
            Self::UnimodularAscent => "unimodular_ascent",
        }
    }
}

/// Input attaining [`NormEstimate::lower`].
#[derive(Clone, Debug, PartialEq)]
pub enum Witness<T: Real> {
    Matrix(CMatrix<T>),
    Series(FourierSeries<T>),
    /// Sign pattern together with the input on which it is evaluated.
    Pattern { signs: SchurSymbol<T>, input: CMatrix<T> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormEstimate<T: Real> {
    pub lower: T,
    pub upper: Option<T>,
    pub witness: Witness<T>,
    pub method: Method,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl<T: Real> NormEstimate<T> {
    fn exact(value: T, witness: Witness<T>, method: Method, seed: u64) -> Self {
        Self { lower: value, upper: Some(value), witness, method, iterations: 0, restarts: 0, seed }
    }

    pub fn is_exact(&self) -> bool {
        self.upper == Some(self.lower)
    }

    pub fn witness_matrix(&self) -> Option<&CMatrix<T>> {
        match &self.witness {
            Witness::Matrix(m) => Some(m),
            Witness::Pattern { input, .. } => Some(input),
            Witness::Series(_) => None,
        }
    }

    pub fn to_json(&self) -> EstimateJson {
        EstimateJson {
            lower: self.lower.to_f64_lossy(),
            upper: self.upper.map(|u| u.to_f64_lossy()),
            method: self.method,
            restarts: self.restarts,
            iterations: self.iterations,
            seed: self.seed,
        }
    }
}

/// Serialized estimate; an unknown upper bound is written as the string `"unknown"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateJson {
    pub lower: f64,
    #[serde(with = "upper_repr")]
    pub upper: Option<f64>,
    pub method: Method,
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

mod upper_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_str("unknown"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(Some(x)),
            Repr::Text(t) if t == "unknown" => Ok(None),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"unknown\", got {t}"))),
        }
    }
}

fn check_exponent<T: Real>(e: &Exponent<T>) -> Result<()> {
    e.validate()?;
    if !e.is_homogeneous() {
        return Err(Error::InvalidExponent("multiplier norms need a homogeneous (convex) gauge".into()));
    }
    Ok(())
}

/// `‖ρ∘X‖ / ‖X‖` (zero for `X = 0`).
pub fn schur_ratio<T: Real>(rho: &SchurSymbol<T>, x: &CMatrix<T>, e: &Exponent<T>) -> Result<T> {
    let y = schur_apply(rho, x)?;
    let nx = schatten_norm(x, e, Convention::Standard)?;
    if nx == T::zero() {
        return Ok(T::zero());
    }
    Ok(schatten_norm(&y, e, Convention::Standard)? / nx)
}

/// `‖M_φ x‖ / ‖x‖` in `L^e(τ)` (zero for `x = 0`).
pub fn fourier_ratio<T: Real>(
    phi: &FourierSymbol<T>,
    x: &FourierSeries<T>,
    e: &Exponent<T>,
    window: &GroupWindow,
) -> Result<T> {
    let y = crate::multiplier::fourier_apply(phi, x)?;
    let nx = lp_group_norm(x, e, window)?;
    if nx == T::zero() {
        return Ok(T::zero());
    }
    Ok(lp_group_norm(&y, e, window)? / nx)
}

fn symbol_hash<T: Real>(rho: &SchurSymbol<T>) -> u64 {
    let mut bytes = Vec::with_capacity(16 + rho.support().len() * 32);
    bytes.extend_from_slice(&(rho.nrows() as u64).to_le_bytes());
    bytes.extend_from_slice(&(rho.ncols() as u64).to_le_bytes());
    for &(r, c) in rho.support().pairs() {
        let z = rho.value(r, c).unwrap_or_else(Complex::zero);
        bytes.extend_from_slice(&(r as u64).to_le_bytes());
        bytes.extend_from_slice(&(c as u64).to_le_bytes());
        bytes.extend_from_slice(&z.re.to_f64_lossy().to_bits().to_le_bytes());
        bytes.extend_from_slice(&z.im.to_f64_lossy().to_bits().to_le_bytes());
    }
    fnv1a(&bytes)
}

fn elementary<T: Real>(rows: usize, cols: usize, r: usize, c: usize) -> CMatrix<T> {
    let mut m = DMatrix::zeros(rows, cols);
    m[(r, c)] = Complex::new(T::one(), T::zero());
    CMatrix::wrap(m)
}

fn argmax_pair<T: Real>(rho: &SchurSymbol<T>) -> (usize, usize) {
    let mut best = rho.support().pairs()[0];
    let mut m = T::zero();
    for &(r, c) in rho.support().pairs() {
        let a = abs(rho.value(r, c).unwrap_or_else(Complex::zero));
        if a > m {
            m = a;
            best = (r, c);
        }
    }
    best
}

/// Interpolated factorisation bound `‖ρ‖_∞^{2/p} γ^{1-2/p}` (with `p ↦ p'` below 2), where
/// `γ = min(max row ℓ² norm, max column ℓ² norm)` bounds the `S^∞` multiplier norm.
pub fn factorization_upper_bound<T: Real>(rho: &SchurSymbol<T>, e: &Exponent<T>) -> Option<T> {
    let p = e.as_p()?;
    if p < 1.0 {
        return None;
    }
    let mut rows = vec![T::zero(); rho.nrows()];
    let mut cols = vec![T::zero(); rho.ncols()];
    for &(r, c) in rho.support().pairs() {
        let a = rho.value(r, c).unwrap_or_else(Complex::zero).norm_sqr();
        rows[r] += a;
        cols[c] += a;
    }
    let fold = |v: &[T]| v.iter().fold(T::zero(), |m, &x| m.max(x)).sqrt();
    let gamma = fold(&rows).min(fold(&cols));
    let m = rho.max_abs();
    let q = if p.is_infinite() { f64::INFINITY } else if p >= 2.0 { p } else { p / (p - 1.0) };
    let theta = if q.is_infinite() { 1.0 } else { 1.0 - 2.0 / q };
    Some(m.powf(T::lit(1.0 - theta)) * gamma.powf(T::lit(theta)))
}

/// Active rows and columns of a support, and the support pairs in compact coordinates.
struct Compact {
    rows: Vec<usize>,
    cols: Vec<usize>,
    param: MatrixParam,
}

impl Compact {
    fn new(s: &Support) -> Self {
        let rows = s.active_rows();
        let cols = s.active_cols();
        let rmap: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let cmap: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let positions = s.pairs().iter().map(|(r, c)| (rmap[r], cmap[c])).collect();
        Self { param: MatrixParam { rows: rows.len(), cols: cols.len(), positions }, rows, cols }
    }

    fn params_of<T: Real>(&self, s: &Support, x: &CMatrix<T>) -> Vec<Complex<T>> {
        s.pairs().iter().map(|&(r, c)| x.get(r, c)).collect()
    }

    fn expand<T: Real>(&self, s: &Support, v: &[Complex<T>]) -> CMatrix<T> {
        let mut m = DMatrix::zeros(s.nrows(), s.ncols());
        for (&(r, c), &z) in s.pairs().iter().zip(v) {
            m[(r, c)] = z;
        }
        CMatrix::wrap(m)
    }
}

fn random_vector<T: Real>(len: usize, seed: u64, stream: u64) -> Vec<Complex<T>> {
    let mut rng = rng_for(seed, stream);
    (0..len).map(|_| complex_gaussian(&mut rng)).collect()
}

/// Best result over starts; ties keep the earliest start.
fn best_of<T: Real>(results: Vec<Climb<T>>) -> (Climb<T>, usize) {
    let total = results.iter().map(|c| c.iterations).sum();
    let mut best: Option<Climb<T>> = None;
    for c in results {
        if best.as_ref().is_none_or(|b| c.value > b.value) {
            best = Some(c);
        }
    }
    (best.expect("at least one start"), total)
}

fn is_positive_symbol<T: Real>(rho: &SchurSymbol<T>) -> Result<bool> {
    if rho.nrows() != rho.ncols() || !rho.support().is_full() {
        return Ok(false);
    }
    let m = rho.to_matrix();
    let scale = rho.max_abs().max(T::default_epsilon());
    let herm = m.adjoint().max_abs_diff(&m) <= T::lit(1e-12) * scale;
    Ok(herm && min_hermitian_eigenvalue(&m)? >= -T::lit(1e-12) * scale)
}

/// Norm of the relative Schur multiplier `ρ` on `S^e_I`.
pub fn schur_multiplier_norm<T: Real>(rho: &SchurSymbol<T>, e: &Exponent<T>, opts: &AscentOptions) -> Result<NormEstimate<T>> {
    schur_multiplier_norm_warm(rho, e, opts, &[])
}

/// As [`schur_multiplier_norm`], additionally starting the ascent from each matrix in `warm`
/// (truncated to the support).
pub fn schur_multiplier_norm_warm<T: Real>(
    rho: &SchurSymbol<T>,
    e: &Exponent<T>,
    opts: &AscentOptions,
    warm: &[CMatrix<T>],
) -> Result<NormEstimate<T>> {
    check_exponent(e)?;
    for w in warm {
        if w.nrows() != rho.nrows() || w.ncols() != rho.ncols() {
            return Err(Error::Dimension("warm start does not match the symbol".into()));
        }
    }
    let (nr, nc) = (rho.nrows(), rho.ncols());
    let support = rho.support();
    if support.is_empty() {
        return Ok(NormEstimate::exact(T::zero(), Witness::Matrix(CMatrix::zeros(nr, nc)), Method::Trivial, opts.seed));
    }
    let (qr, qc) = argmax_pair(rho);
    let elem = elementary(nr, nc, qr, qc);
    let m = rho.max_abs();
    let p = e.as_p();

    if let Some(c) = rho.is_constant() {
        return Ok(NormEstimate::exact(abs(c), Witness::Matrix(elem), Method::ConstantSymbol, opts.seed));
    }
    if p == Some(2.0) {
        return Ok(NormEstimate::exact(m, Witness::Matrix(elem), Method::HilbertSchmidt, opts.seed));
    }
    if support.active_rows().len() == 1 || support.active_cols().len() == 1 {
        // A single row or column has one singular value, its ℓ² norm.
        return Ok(NormEstimate::exact(m, Witness::Matrix(elem), Method::Trivial, opts.seed));
    }
    if matches!(p, Some(x) if x == 1.0 || x.is_infinite()) && is_positive_symbol(rho)? {
        let (i, d) = (0..nr)
            .map(|i| (i, rho.value(i, i).map_or(T::zero(), |z| z.re)))
            .fold((0, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        let w = elementary(nr, nc, i, i);
        return Ok(NormEstimate::exact(d, Witness::Matrix(w), Method::PositiveSymbol, opts.seed));
    }

    let compact = Compact::new(support);
    let symbol: Vec<Complex<T>> = support.pairs().iter().map(|&(r, c)| rho.value(r, c).expect("on support")).collect();
    let seed = opts.seed ^ symbol_hash(rho);
    let rel_tol = T::lit(opts.rel_tol);
    let full = compact.param.positions.len() == compact.rows.len() * compact.cols.len();
    let dual_route = full && matches!(p, Some(x) if x == 1.0 || x.is_infinite());

    let mut starts: Vec<Vec<Complex<T>>> = vec![compact.params_of(support, &elem)];
    starts.extend(warm.iter().map(|w| compact.params_of(support, w)));
    let n_fixed = starts.len();
    let d = compact.param.positions.len();
    starts.extend((0..opts.restarts).map(|r| random_vector(d, seed, r as u64)));

    let prob = Ratio { param: &compact.param, symbol: &symbol };
    let results: Vec<Climb<T>> = if dual_route {
        let infinite = p.is_some_and(f64::is_infinite);
        let dense_rho = compact.param.build(&symbol);
        let dual_rho = if infinite { dense_rho.map(|z| z.conj()) } else { dense_rho };
        let (cr_, cc_) = (compact.rows.len(), compact.cols.len());
        starts
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                if i >= 1 && i < n_fixed {
                    return climb(&prob, e, s.clone(), opts.max_iter, rel_tol);
                }
                let (u0, v0) = if i == 0 {
                    let pos = compact.param.positions[support.pairs().iter().position(|&q| q == (qr, qc)).unwrap()];
                    let mut u = vec![Complex::zero(); cr_];
                    let mut v = vec![Complex::zero(); cc_];
                    u[pos.0] = cr(T::one());
                    v[pos.1] = cr(T::one());
                    (u, v)
                } else {
                    (random_vector(cr_, seed, 2 * i as u64 + 1_000_003), random_vector(cc_, seed, 2 * i as u64 + 1_000_004))
                };
                let (_, u, v, it) = rank_one_trace_ascent(&dual_rho, u0, v0, opts.max_iter, rel_tol)?;
                let x = if infinite {
                    let k = DMatrix::from_fn(cr_, cc_, |a, b| u[a] * dual_rho[(a, b)] * v[b].conj());
                    let svd = svd_full(&k)?;
                    svd_apply(&svd, |s| if s > T::zero() { T::one() } else { T::zero() })
                } else {
                    DMatrix::from_fn(cr_, cc_, |a, b| u[a] * v[b].conj())
                };
                let point = compact.param.extract(&x);
                let value = prob.value(&point, e)?;
                Ok(Climb { value, point, iterations: it })
            })
            .collect::<Result<_>>()?
    } else {
        starts.into_par_iter().map(|s| climb(&prob, e, s, opts.max_iter, rel_tol)).collect::<Result<_>>()?
    };
    let iterations = results.iter().map(|c| c.iterations).sum();
    // Exact re-evaluation decides between starts.
    let scored: Vec<(T, CMatrix<T>)> = results
        .into_par_iter()
        .map(|c| {
            let w = compact.expand(support, &c.point);
            schur_ratio(rho, &w, e).map(|v| (v, w))
        })
        .collect::<Result<_>>()?;
    let (lower, witness) = scored
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one start");
    Ok(NormEstimate {
        lower,
        upper: factorization_upper_bound(rho, e),
        witness: Witness::Matrix(witness),
        method: if dual_route { Method::RankOneDual } else { Method::Ascent },
        iterations,
        restarts: opts.restarts,
        seed: opts.seed,
    })
}

/// Moves an amplified witness from layout `r·m_from + a` to `r·m_to + a` (`m_from ≤ m_to`).
pub fn embed_amplified<T: Real>(x: &CMatrix<T>, m_from: usize, m_to: usize) -> Result<CMatrix<T>> {
    if m_from == 0 || m_from > m_to || !x.nrows().is_multiple_of(m_from) || !x.ncols().is_multiple_of(m_from) {
        return Err(Error::Dimension("invalid amplification embedding".into()));
    }
    let (nr, nc) = (x.nrows() / m_from, x.ncols() / m_from);
    let mut out = DMatrix::zeros(nr * m_to, nc * m_to);
    for r in 0..nr {
        for a in 0..m_from {
            for c in 0..nc {
                for b in 0..m_from {
                    out[(r * m_to + a, c * m_to + b)] = x.get(r * m_from + a, c * m_from + b);
                }
            }
        }
    }
    Ok(CMatrix::wrap(out))
}

/// Norm of `Id_{S^e_m} ⊗ M_ρ`, warm-started from the scalar witness so that the result never
/// falls below the `m = 1` estimate.
pub fn amplified_norm<T: Real>(
    rho: &SchurSymbol<T>,
    e: &Exponent<T>,
    m: usize,
    opts: &AscentOptions,
) -> Result<NormEstimate<T>> {
    Ok(amplified_norm_chain(rho, e, &[m], opts)?.pop().expect("one order"))
}

/// Amplified norms for increasing orders, each run warm-started from the previous witness.
pub fn amplified_norm_chain<T: Real>(
    rho: &SchurSymbol<T>,
    e: &Exponent<T>,
    orders: &[usize],
    opts: &AscentOptions,
) -> Result<Vec<NormEstimate<T>>> {
    if orders.contains(&0) || orders.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput("amplification orders must be positive and nondecreasing".into()));
    }
    let mut prev = schur_multiplier_norm(rho, e, opts)?;
    let mut prev_m = 1;
    let mut out = Vec::with_capacity(orders.len());
    for &m in orders {
        let est = if m == 1 {
            prev.clone()
        } else {
            let amp = amplify(rho, m)?;
            let warm = match prev.witness_matrix() {
                Some(w) => vec![embed_amplified(w, prev_m, m)?],
                None => vec![],
            };
            schur_multiplier_norm_warm(&amp, e, opts, &warm)?
        };
        prev = est.clone();
        prev_m = m;
        out.push(est);
    }
    Ok(out)
}

/// Where the unconditional constant searches over sign patterns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    /// Enumerate `±1` patterns (up to row/column sign flips).
    RealSigns,
    /// Ascend jointly over unimodular patterns and inputs.
    Unimodular,
}

/// Largest support handled by [`SignMode::RealSigns`].
pub const SIGN_ENUMERATION_LIMIT: usize = 16;

/// `min(|R_I|, |C_I|)^{|1/2 - 1/p|}`, an upper bound for the unconditional constant of `I`
/// in `S^p`, `1 ≤ p ≤ ∞`.
pub fn unconditional_upper_bound(support: &Support, p: f64) -> Option<f64> {
    if !(p >= 1.0) {
        return None;
    }
    let k = support.active_rows().len().min(support.active_cols().len()).max(1) as f64;
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    Some(k.powf((0.5 - inv).abs()))
}

/// Row/column sign flips act on ±1 patterns; fixing the signs on a spanning forest of the
/// bipartite support graph leaves one representative per orbit.
fn free_edges(support: &Support) -> Vec<usize> {
    let nr = support.nrows();
    let mut parent: Vec<usize> = (0..nr + support.ncols()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut free = Vec::new();
    for (k, &(r, c)) in support.pairs().iter().enumerate() {
        let (a, b) = (find(&mut parent, r), find(&mut parent, nr + c));
        if a == b {
            free.push(k);
        } else {
            parent[a] = b;
        }
    }
    free
}

/// Fourier-type phase pattern `e^{2πi·jk/n}` on compact coordinates.
fn fourier_phases<T: Real>(param: &MatrixParam) -> Vec<Complex<T>> {
    let n = param.rows.max(param.cols).max(1);
    param
        .positions
        .iter()
        .map(|&(j, k)| cis(T::lit(2.0 * PI * ((j * k) % n) as f64 / n as f64)))
        .collect()
}

/// `sup_ε ‖M_ε‖` over sign patterns `ε` on `I`.
pub fn unconditional_constant<T: Real>(
    support: &Support,
    e: &Exponent<T>,
    mode: SignMode,
    opts: &AscentOptions,
) -> Result<NormEstimate<T>> {
    check_exponent(e)?;
    let (nr, nc) = (support.nrows(), support.ncols());
    let ones = SchurSymbol::constant(support.clone(), cr(T::one()));
    let upper = e.as_p().and_then(|p| unconditional_upper_bound(support, p)).map(T::lit);
    if support.is_empty() {
        return Ok(NormEstimate::exact(
            T::zero(),
            Witness::Pattern { signs: ones, input: CMatrix::zeros(nr, nc) },
            Method::Trivial,
            opts.seed,
        ));
    }
    let (r0, c0) = support.pairs()[0];
    if support.active_rows().len() == 1 || support.active_cols().len() == 1 || e.as_p() == Some(2.0) {
        let method = if e.as_p() == Some(2.0) { Method::HilbertSchmidt } else { Method::Trivial };
        let input = elementary(nr, nc, r0, c0);
        return Ok(NormEstimate::exact(T::one(), Witness::Pattern { signs: ones, input }, method, opts.seed));
    }
    match mode {
        SignMode::RealSigns => {
            if support.len() > SIGN_ENUMERATION_LIMIT {
                return Err(Error::SupportTooLarge { size: support.len(), limit: SIGN_ENUMERATION_LIMIT });
            }
            let free = free_edges(support);
            let inner = AscentOptions { restarts: opts.restarts.min(8), ..*opts };
            let results: Vec<(SchurSymbol<T>, NormEstimate<T>)> = (0u32..1 << free.len())
                .into_par_iter()
                .map(|mask| {
                    let mut signs = vec![cr(T::one()); support.len()];
                    for (bit, &k) in free.iter().enumerate() {
                        if mask >> bit & 1 == 1 {
                            signs[k] = cr(-T::one());
                        }
                    }
                    let entries: Vec<_> = support.pairs().iter().copied().zip(signs).collect();
                    let sym = SchurSymbol::new(nr, nc, &entries)?;
                    let est = schur_multiplier_norm(&sym, e, &inner)?;
                    Ok((sym, est))
                })
                .collect::<Result<_>>()?;
            let iterations = results.iter().map(|r| r.1.iterations).sum();
            let mut best = results[0].clone();
            for r in results.into_iter().skip(1) {
                if r.1.lower > best.1.lower {
                    best = r;
                }
            }
            let input = best.1.witness_matrix().cloned().unwrap_or_else(|| CMatrix::zeros(nr, nc));
            Ok(NormEstimate {
                lower: schur_ratio(&best.0, &input, e)?,
                upper,
                witness: Witness::Pattern { signs: best.0, input },
                method: Method::SignEnumeration,
                iterations,
                restarts: opts.restarts,
                seed: opts.seed,
            })
        }
        SignMode::Unimodular => {
            let compact = Compact::new(support);
            let d = support.len();
            let prob = Unimodular { param: &compact.param, _marker: std::marker::PhantomData };
            let seed = opts.seed ^ fnv1a(format!("{nr}x{nc}:{:?}", support.pairs()).as_bytes());
            let phases = fourier_phases::<T>(&compact.param);
            let one = vec![cr(T::one()); d];
            let conj: Vec<_> = phases.iter().map(|z| z.conj()).collect();
            let mut starts = vec![[one.clone(), phases.clone()].concat(), [phases.clone(), conj].concat()];
            starts.extend((0..opts.restarts).map(|r| {
                let mut v = random_vector::<T>(2 * d, seed, r as u64);
                for z in v[d..].iter_mut() {
                    *z = cis(z.im.atan2(z.re));
                }
                v
            }));
            let rel_tol = T::lit(opts.rel_tol);
            let results: Vec<Climb<T>> =
                starts.into_par_iter().map(|s| climb(&prob, e, s, opts.max_iter, rel_tol)).collect::<Result<_>>()?;
            let (best, iterations) = best_of(results);
            let (x, eps) = best.point.split_at(d);
            let entries: Vec<_> = support.pairs().iter().copied().zip(eps.iter().copied()).collect();
            let signs = SchurSymbol::new(nr, nc, &entries)?;
            let input = compact.expand(support, x);
            // Polish the input for the winning pattern with the plain ascent.
            let polished = schur_multiplier_norm_warm(&signs, e, &AscentOptions { restarts: 2, ..*opts }, std::slice::from_ref(&input))?;
            let (lower, input) = match polished.witness_matrix() {
                Some(w) if polished.lower > schur_ratio(&signs, &input, e)? => (polished.lower, w.clone()),
                _ => (schur_ratio(&signs, &input, e)?, input),
            };
            Ok(NormEstimate {
                lower,
                upper,
                witness: Witness::Pattern { signs, input },
                method: Method::UnimodularAscent,
                iterations: iterations + polished.iterations,
                restarts: opts.restarts,
                seed: opts.seed,
            })
        }
    }
}

/// Norm of the relative Fourier multiplier `φ` on `L^e(τ)`, either exactly on the group
/// (`GroupWindow::Full`) or on compressions to a finite window.
pub fn fourier_multiplier_norm<T: Real>(
    phi: &FourierSymbol<T>,
    e: &Exponent<T>,
    window: &GroupWindow,
    opts: &AscentOptions,
) -> Result<NormEstimate<T>> {
    fourier_multiplier_norm_warm(phi, e, window, opts, &[])
}

pub fn fourier_multiplier_norm_warm<T: Real>(
    phi: &FourierSymbol<T>,
    e: &Exponent<T>,
    window: &GroupWindow,
    opts: &AscentOptions,
    warm: &[FourierSeries<T>],
) -> Result<NormEstimate<T>> {
    check_exponent(e)?;
    let group = *phi.group();
    // Parameters: elements of Λ that are visible in the window.
    let (domain, param): (Vec<Element>, Box<dyn Param<T>>) = match window {
        GroupWindow::Set(w) => {
            if w.is_empty() {
                return Err(Error::EmptyWindow);
            }
            let index: BTreeMap<Element, usize> = phi.domain().into_iter().enumerate().map(|(i, g)| (g, i)).collect();
            let mut pos = vec![Vec::new(); index.len()];
            for (r, a) in w.iter().enumerate() {
                for (c, b) in w.iter().enumerate() {
                    if let Some(&k) = index.get(&group.quotient(a, b)) {
                        pos[k].push((r, c));
                    }
                }
            }
            let (domain, positions): (Vec<_>, Vec<_>) =
                phi.domain().into_iter().zip(pos).filter(|(_, p)| !p.is_empty()).unzip();
            (domain, Box::new(WindowParam { size: w.len(), positions }))
        }
        GroupWindow::Full => {
            let domain = phi.domain();
            let (nodes, dim, complete) = match group.kind() {
                GroupKind::Cyclic { n } => (n as usize, 1, domain.len() as u64 == n),
                GroupKind::Lattice { dim, .. } => {
                    let deg = domain.iter().flat_map(|g| g.coords().iter().map(|c| c.abs())).max().unwrap_or(0);
                    (lattice_quadrature_nodes(2 * deg, e.as_p().unwrap_or(2.0), dim), dim, false)
                }
            };
            let grid = character_grid(nodes, dim);
            let mut table = Vec::with_capacity(grid.len() * domain.len());
            for theta in &grid {
                for g in &domain {
                    let ph: f64 = g.coords().iter().zip(theta).map(|(&k, &t)| k as f64 * t).sum();
                    table.push(cis(T::lit(ph)));
                }
            }
            let param = CharacterParam { table, nodes: grid.len(), dim: domain.len(), complete };
            (domain, Box::new(param))
        }
    };
    let lambda = |g: Element| FourierSeries::lambda(group, g);
    if domain.is_empty() {
        let w = Witness::Series(FourierSeries::zero(group, 1));
        return Ok(NormEstimate::exact(T::zero(), w, Method::Trivial, opts.seed));
    }
    let symbol: Vec<Complex<T>> = domain.iter().map(|g| phi.value(g).expect("in domain")).collect();
    let (imax, m) = symbol.iter().enumerate().fold((0, T::zero()), |acc, (i, z)| {
        if abs(*z) > acc.1 {
            (i, abs(*z))
        } else {
            acc
        }
    });
    if symbol.iter().all(|z| *z == symbol[0]) {
        let w = Witness::Series(lambda(domain[0])?);
        return Ok(NormEstimate::exact(abs(symbol[0]), w, Method::ConstantSymbol, opts.seed));
    }
    if e.as_p() == Some(2.0) {
        let w = Witness::Series(lambda(domain[imax])?);
        return Ok(NormEstimate::exact(m, w, Method::HilbertSchmidt, opts.seed));
    }
    if let (GroupKind::Cyclic { n }, GroupWindow::Full, Some(p)) = (group.kind(), window, e.as_p()) {
        if domain.len() as u64 == n && (p == 1.0 || p.is_infinite()) {
            return convolution_norm(phi, &domain, n as usize, p.is_infinite(), opts.seed);
        }
    }

    let seed = opts.seed ^ fnv1a(format!("{:?}", phi.to_json()).as_bytes());
    let mut starts: Vec<Vec<Complex<T>>> = Vec::new();
    let mut first = vec![Complex::zero(); domain.len()];
    first[imax] = cr(T::one());
    starts.push(first);
    for w in warm {
        for g in w.spectrum() {
            if !domain.contains(&g) {
                return Err(Error::SpectrumEscape(g.to_string()));
            }
        }
        starts.push(domain.iter().map(|g| w.scalar_coeff(g)).collect());
    }
    starts.extend((0..opts.restarts).map(|r| random_vector(domain.len(), seed, r as u64)));
    let param_ref: &dyn Param<T> = param.as_ref();
    let prob = Ratio { param: &param_ref, symbol: &symbol };
    let rel_tol = T::lit(opts.rel_tol);
    let results: Vec<Climb<T>> =
        starts.into_par_iter().map(|s| climb(&prob, e, s, opts.max_iter, rel_tol)).collect::<Result<_>>()?;
    let iterations = results.iter().map(|c| c.iterations).sum();
    let scored: Vec<(T, FourierSeries<T>)> = results
        .into_par_iter()
        .map(|c| {
            let terms: Vec<_> = domain.iter().copied().zip(c.point.iter().copied()).collect();
            let x = FourierSeries::scalar(group, &terms)?;
            fourier_ratio(phi, &x, e, window).map(|v| (v, x))
        })
        .collect::<Result<_>>()?;
    let (lower, x) = scored
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one start");
    Ok(NormEstimate {
        lower,
        upper: None,
        witness: Witness::Series(x),
        method: Method::Ascent,
        iterations,
        restarts: opts.restarts,
        seed: opts.seed,
    })
}

impl<T: Real> Param<T> for &dyn Param<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn norm_grad(&self, v: &[Complex<T>], e: &Exponent<T>) -> Result<(T, Vec<Complex<T>>)> {
        (**self).norm_grad(v, e)
    }

    fn dual_map(&self, z: &[Complex<T>], q: T) -> Option<Result<Vec<Complex<T>>>> {
        (**self).dual_map(z, q)
    }
}

fn character_grid(nodes: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|pt: Vec<f64>| {
                (0..nodes).map(move |k| {
                    let mut q = pt.clone();
                    q.push(2.0 * PI * k as f64 / nodes as f64);
                    q
                })
            })
            .collect();
    }
    out
}

/// Full-spectrum multipliers on ℤ_N are convolutions on the dual group; on `L^1` and `L^∞`
/// their norm is the ℓ¹ norm of the kernel `K_j = (1/N) Σ_γ φ_γ e^{iγθ_j}`.
fn convolution_norm<T: Real>(
    phi: &FourierSymbol<T>,
    domain: &[Element],
    n: usize,
    infinite: bool,
    seed: u64,
) -> Result<NormEstimate<T>> {
    let theta = |j: usize| 2.0 * PI * j as f64 / n as f64;
    let nt = T::lit(n as f64);
    let kernel: Vec<Complex<T>> = (0..n)
        .map(|j| {
            domain.iter().fold(Complex::<T>::zero(), |s, g| {
                s + phi.value(g).expect("in domain") * cis(T::lit(g.value() as f64 * theta(j)))
            }) / cr(nt)
        })
        .collect();
    let value = kernel.iter().fold(T::zero(), |s, k| s + abs(*k));
    let group = *phi.group();
    let coeffs: Vec<(Element, Complex<T>)> = if infinite {
        // f(θ_j) = phase of conj(K_{-j}); x_γ = (1/N) Σ_j f(θ_j) e^{-iγθ_j}.
        let f: Vec<Complex<T>> = (0..n)
            .map(|j| {
                let k = kernel[(n - j) % n].conj();
                let a = abs(k);
                if a > T::zero() {
                    k / cr(a)
                } else {
                    cr(T::one())
                }
            })
            .collect();
        domain
            .iter()
            .map(|g| {
                let c = (0..n).fold(Complex::<T>::zero(), |s, j| s + f[j] * cis(T::lit(-(g.value() as f64) * theta(j))));
                (*g, c / cr(nt))
            })
            .collect()
    } else {
        domain.iter().map(|g| (*g, cr(T::one()))).collect()
    };
    let x = FourierSeries::scalar(group, &coeffs)?;
    Ok(NormEstimate::exact(value, Witness::Series(x), Method::Convolution, seed))
}

/// Both sides of the transfer inequality `‖M_φ‖ ≤ ‖M_φ̌‖` on a finite cyclic group.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferReport<T: Real> {
    pub fourier: NormEstimate<T>,
    pub schur: NormEstimate<T>,
    pub amplified: Option<NormEstimate<T>>,
    /// `fourier.lower ≤ schur.lower + tol`.
    pub holds: bool,
    /// At `p = 2`: both sides equal `max |φ|` to `1e-10`.
    pub hilbert_schmidt_equal: Option<bool>,
}

/// Runs both estimates; the Schur side is warm-started from the circulant of the Fourier
/// witness, which it contains isometrically up to the trace normalisation.
pub fn transfer_inequality_check<T: Real>(
    phi: &FourierSymbol<T>,
    e: &Exponent<T>,
    opts: &AscentOptions,
    amplification: Option<usize>,
    tol: T,
) -> Result<TransferReport<T>> {
    let group = *phi.group();
    if !group.is_finite() {
        return Err(Error::InvalidInput("the exact transfer check needs a finite cyclic group".into()));
    }
    let els = group.elements();
    let fourier = fourier_multiplier_norm(phi, e, &GroupWindow::Full, opts)?;
    let sym = toeplitz_transfer(phi, &els)?;
    let warm = match &fourier.witness {
        Witness::Series(x) => vec![x.realize(&els, &els)?],
        _ => vec![],
    };
    let schur = schur_multiplier_norm_warm(&sym, e, opts, &warm)?;
    let amplified = match amplification {
        Some(m) if m > 1 => {
            let w = schur.witness_matrix().map(|w| embed_amplified(w, 1, m)).transpose()?;
            Some(schur_multiplier_norm_warm(&amplify(&sym, m)?, e, opts, w.as_slice())?)
        }
        _ => None,
    };
    let holds = fourier.lower <= schur.lower + tol;
    let hilbert_schmidt_equal = (e.as_p() == Some(2.0)).then(|| {
        let m = phi.max_abs();
        let t = T::lit(1e-10);
        (fourier.lower - m).abs() <= t && (schur.lower - m).abs() <= t
    });
    Ok(TransferReport { fourier, schur, amplified, holds, hilbert_schmidt_equal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupalg::GroupModel;
    use crate::scalar::c;

    fn opts() -> AscentOptions {
        AscentOptions { restarts: 6, ..Default::default() }
    }

    #[test]
    fn constant_symbol_is_exact() {
        let rho = SchurSymbol::<f64>::constant(Support::new(3, 3, [(0, 0), (1, 2), (2, 1)]).unwrap(), c(0.0, -2.0));
        for p in [0.5, 1.0, 3.0, f64::INFINITY] {
            let est = schur_multiplier_norm(&rho, &Exponent::p(p).unwrap(), &opts()).unwrap();
            assert_eq!(est.lower, 2.0);
            assert_eq!(est.upper, Some(2.0));
        }
    }

    #[test]
    fn phase_pattern_at_infinity() {
        // [[z̄, w], [w̄, z]] with z = 2, w = 1 is positive definite; norm = max diagonal = 2.
        let rho = SchurSymbol::<f64>::dense(&CMatrix::from_real_rows(&[&[2., 1.], &[1., 2.]]).unwrap());
        let est = schur_multiplier_norm(&rho, &Exponent::Infinity, &opts()).unwrap();
        assert_eq!(est.method, Method::PositiveSymbol);
        assert_eq!(est.lower, 2.0);
        // The same value through the rank-one dual search on a non-Hermitian rotation.
        let rot = SchurSymbol::<f64>::new(2, 2, &[((0, 0), c(2., 0.)), ((0, 1), c(1., 0.)), ((1, 0), c(0., 1.)), ((1, 1), c(0., 2.))]).unwrap();
        let est = schur_multiplier_norm(&rot, &Exponent::Infinity, &opts()).unwrap();
        assert_eq!(est.method, Method::RankOneDual);
        assert!((est.lower - 2.0).abs() < 1e-9, "{}", est.lower);
    }

    #[test]
    fn fourier_pattern_on_two_by_two() {
        let rho = SchurSymbol::<f64>::dense(&CMatrix::from_real_rows(&[&[1., 1.], &[1., -1.]]).unwrap());
        let est = schur_multiplier_norm(&rho, &Exponent::p(4.0).unwrap(), &opts()).unwrap();
        let target = 2f64.powf(0.25);
        assert!((est.lower - target).abs() < 1e-6, "{}", est.lower);
        assert!(est.upper.unwrap() >= est.lower - 1e-12);
    }

    #[test]
    fn witness_reproduces_lower() {
        let mut rng = rng_for(3, 3);
        let m = crate::random::gaussian_matrix::<f64>(4, 3, &mut rng);
        let rho = SchurSymbol::dense(&m);
        for p in [1.0, 1.5, 3.0, f64::INFINITY] {
            let e = Exponent::p(p).unwrap();
            let est = schur_multiplier_norm(&rho, &e, &opts()).unwrap();
            let w = est.witness_matrix().unwrap();
            assert!((schur_ratio(&rho, w, &e).unwrap() - est.lower).abs() <= 1e-8);
            assert!(est.lower >= rho.max_abs() - 1e-12, "p={p}: {} < {}", est.lower, rho.max_abs());
            assert!(est.lower <= est.upper.unwrap() + 1e-9);
        }
    }

    #[test]
    fn amplification_examples() {
        let h = SchurSymbol::<f64>::full_fn(3, 3, |i, j| cr(if i >= j { 1.0 } else { -1.0 })).unwrap();
        let e = Exponent::p(4.0).unwrap();
        let chain = amplified_norm_chain(&h, &e, &[1, 2], &opts()).unwrap();
        assert!(chain[1].lower >= chain[0].lower - 1e-12);
        assert!(chain[1].lower <= 1.0 + 2f64.sqrt() + 1e-6);
        let one = SchurSymbol::<f64>::constant(Support::full(2, 2), cr(1.0));
        assert_eq!(amplified_norm(&one, &e, 3, &opts()).unwrap().lower, 1.0);
    }

    #[test]
    fn unconditional_examples() {
        let e = Exponent::<f64>::p(4.0).unwrap();
        let single = Support::new(2, 2, [(1, 0)]).unwrap();
        assert_eq!(unconditional_constant(&single, &e, SignMode::Unimodular, &opts()).unwrap().lower, 1.0);
        let row = Support::new(1, 3, [(0, 0), (0, 1), (0, 2)]).unwrap();
        assert_eq!(unconditional_constant(&row, &e, SignMode::RealSigns, &opts()).unwrap().lower, 1.0);
        let full = Support::full(2, 2);
        let est = unconditional_constant(&full, &e, SignMode::Unimodular, &opts()).unwrap();
        let target = 2f64.powf(0.25);
        assert!((est.lower - target).abs() < 1e-2, "{}", est.lower);
        assert!(est.lower <= target + 1e-6);
        let real = unconditional_constant(&full, &e, SignMode::RealSigns, &opts()).unwrap();
        assert!((real.lower - target).abs() < 1e-6, "{}", real.lower);
    }

    #[test]
    fn convolution_closed_form_matches_ascent() {
        let g = GroupModel::cyclic(6).unwrap();
        let phi = FourierSymbol::<f64>::from_fn(g, &g.elements(), |k| c((k.value() as f64).cos(), 0.3 * k.value() as f64)).unwrap();
        for p in [1.0, f64::INFINITY] {
            let e = Exponent::p(p).unwrap();
            let est = fourier_multiplier_norm(&phi, &e, &GroupWindow::Full, &opts()).unwrap();
            assert_eq!(est.method, Method::Convolution);
            let Witness::Series(x) = &est.witness else { panic!() };
            let r = fourier_ratio(&phi, x, &e, &GroupWindow::Full).unwrap();
            assert!((r - est.lower).abs() < 1e-10, "p={p}: {r} vs {}", est.lower);
            // Ascent at nearby exponents cannot beat the exact value by more than interpolation allows.
            let near = fourier_multiplier_norm(&phi, &Exponent::p(if p == 1.0 { 1.01 } else { 100.0 }).unwrap(), &GroupWindow::Full, &opts()).unwrap();
            assert!(near.lower <= est.lower * 1.05);
        }
    }

    #[test]
    fn fourier_examples() {
        let g = GroupModel::cyclic(8).unwrap();
        let one = FourierSymbol::<f64>::indicator(g, &g.elements()).unwrap();
        let e = Exponent::p(3.0).unwrap();
        assert_eq!(fourier_multiplier_norm(&one, &e, &GroupWindow::Full, &opts()).unwrap().lower, 1.0);
        let phi = FourierSymbol::<f64>::from_fn(g, &g.elements(), |k| c(k.value() as f64, 1.0)).unwrap();
        let est = fourier_multiplier_norm(&phi, &Exponent::p(2.0).unwrap(), &GroupWindow::Full, &opts()).unwrap();
        assert!((est.lower - phi.max_abs()).abs() < 1e-12);
    }

    #[test]
    fn transfer_small() {
        let g = GroupModel::cyclic(8).unwrap();
        let sgn = FourierSymbol::<f64>::from_fn(g, &g.elements(), |k| cr(if k.value() < 4 { 1.0 } else { -1.0 })).unwrap();
        for p in [1.0, 2.0, 4.0] {
            let rep = transfer_inequality_check(&sgn, &Exponent::p(p).unwrap(), &opts(), None, 1e-6).unwrap();
            assert!(rep.holds, "p={p}: {} vs {}", rep.fourier.lower, rep.schur.lower);
            if p == 2.0 {
                assert_eq!(rep.hilbert_schmidt_equal, Some(true));
            }
        }
    }

    #[test]
    fn free_edge_count() {
        assert_eq!(free_edges(&Support::full(2, 2)).len(), 1);
        assert_eq!(free_edges(&Support::full(4, 4)).len(), 9);
        assert_eq!(free_edges(&Support::new(3, 3, [(0, 0), (1, 1), (2, 2)]).unwrap()).len(), 0);
    }

    #[test]
    fn estimate_json() {
        let rho = SchurSymbol::<f64>::constant(Support::full(1, 1), cr(1.0));
        let est = schur_multiplier_norm(&rho, &Exponent::p(3.0).unwrap(), &opts()).unwrap();
        let s = serde_json::to_string(&est.to_json()).unwrap();
        assert_eq!(s, r#"{"lower":1.0,"upper":1.0,"method":"constant_symbol","restarts":0,"iterations":0,"seed":0}"#);
        let mut j = est.to_json();
        j.upper = None;
        let s = serde_json::to_string(&j).unwrap();
        assert!(s.contains(r#""upper":"unknown""#));
        assert_eq!(serde_json::from_str::<EstimateJson>(&s).unwrap(), j);
    }

    #[test]
    fn rejects_nonconvex_gauge() {
        let g = crate::schatten::Gauge::<f64>::new("sqrt", false, |t: f64| t.sqrt()).unwrap();
        let rho = SchurSymbol::<f64>::constant(Support::full(2, 2), cr(1.0));
        assert!(schur_multiplier_norm(&rho, &Exponent::Orlicz(g), &opts()).is_err());
    }
}
