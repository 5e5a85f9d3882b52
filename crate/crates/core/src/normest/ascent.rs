//! Local maximisation of norm ratios `‖A(ρ∘v)‖ / ‖A v‖` over a linear parametrisation `A`.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;

use crate::error::Result;
use crate::scalar::{abs, cr, Real};
use crate::schatten::{
    blocks_norm_and_gradient, duality_map, scalar_norm_and_gradient, svd_full, Exponent,
};

type Cx<T> = Complex<T>;

/// Linear map from a parameter vector to an operator whose norm is measured.
pub(crate) trait Param<T: Real>: Sync {
    fn dim(&self) -> usize;

    /// `‖A v‖` and its gradient with respect to `v`.
    fn norm_grad(&self, v: &[Cx<T>], e: &Exponent<T>) -> Result<(T, Vec<Cx<T>>)>;

    fn norm(&self, v: &[Cx<T>], e: &Exponent<T>) -> Result<T> {
        Ok(self.norm_grad(v, e)?.0)
    }

    /// Parameters of `J_q(A z)` when the image of `A` is closed under the duality map.
    fn dual_map(&self, _z: &[Cx<T>], _q: T) -> Option<Result<Vec<Cx<T>>>> {
        None
    }
}

/// Entries of a `rows × cols` matrix at the listed positions.
pub(crate) struct MatrixParam {
    pub rows: usize,
    pub cols: usize,
    pub positions: Vec<(usize, usize)>,
}

impl MatrixParam {
    pub fn build<T: Real>(&self, v: &[Cx<T>]) -> DMatrix<Cx<T>> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (&(r, c), &z) in self.positions.iter().zip(v) {
            m[(r, c)] = z;
        }
        m
    }

    pub fn extract<T: Real>(&self, m: &DMatrix<Cx<T>>) -> Vec<Cx<T>> {
        self.positions.iter().map(|&(r, c)| m[(r, c)]).collect()
    }

    fn is_full(&self) -> bool {
        self.positions.len() == self.rows * self.cols
    }
}

impl<T: Real> Param<T> for MatrixParam {
    fn dim(&self) -> usize {
        self.positions.len()
    }

    fn norm_grad(&self, v: &[Cx<T>], e: &Exponent<T>) -> Result<(T, Vec<Cx<T>>)> {
        let m = self.build(v);
        let (n, g) = blocks_norm_and_gradient(std::slice::from_ref(&m), e, T::one())?;
        Ok((n, self.extract(&g[0])))
    }

    fn dual_map(&self, z: &[Cx<T>], q: T) -> Option<Result<Vec<Cx<T>>>> {
        if !self.is_full() {
            return None;
        }
        Some(duality_map(&self.build(z), q).map(|m| self.extract(&m)))
    }
}

/// Scalar Fourier coefficients evaluated on a grid of characters:
/// `(A v)_k = Σ_γ v_γ χ_k(γ)` with normalised trace `1/K`.
pub(crate) struct CharacterParam<T: Real> {
    /// `table[k * dim + j] = χ_k(γ_j)`.
    pub table: Vec<Cx<T>>,
    pub nodes: usize,
    pub dim: usize,
    /// The grid is the full dual of a finite group and the parameters are all of its elements.
    pub complete: bool,
}

impl<T: Real> CharacterParam<T> {
    pub fn values(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        (0..self.nodes)
            .map(|k| {
                let row = &self.table[k * self.dim..(k + 1) * self.dim];
                row.iter().zip(v).fold(Cx::zero(), |s, (a, b)| s + a * b)
            })
            .collect()
    }

    fn pull_back(&self, g: &[Cx<T>]) -> Vec<Cx<T>> {
        let mut out = vec![Cx::zero(); self.dim];
        for (k, gk) in g.iter().enumerate() {
            if gk.is_zero() {
                continue;
            }
            let row = &self.table[k * self.dim..(k + 1) * self.dim];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * gk;
            }
        }
        out
    }

    fn weight(&self) -> T {
        T::one() / T::lit(self.nodes as f64)
    }
}

impl<T: Real> Param<T> for CharacterParam<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn norm_grad(&self, v: &[Cx<T>], e: &Exponent<T>) -> Result<(T, Vec<Cx<T>>)> {
        let f = self.values(v);
        let (n, g) = scalar_norm_and_gradient(&f, e, self.weight())?;
        Ok((n, self.pull_back(&g)))
    }

    fn dual_map(&self, z: &[Cx<T>], q: T) -> Option<Result<Vec<Cx<T>>>> {
        if !self.complete {
            return None;
        }
        let f = self.values(z);
        let smax = f.iter().fold(T::zero(), |m, w| m.max(abs(*w)));
        let j: Vec<Cx<T>> = f
            .iter()
            .map(|w| {
                let a = abs(*w);
                if a > T::zero() && smax > T::zero() {
                    *w * cr((a / smax).powf(q - T::one()) / a)
                } else {
                    Cx::zero()
                }
            })
            .collect();
        let w = self.weight();
        Some(Ok(self.pull_back(&j).into_iter().map(|x| x * cr(w)).collect()))
    }
}

/// `Σ_γ v_γ λ_γ` compressed to a finite window, trace normalised by the window size.
pub(crate) struct WindowParam {
    pub size: usize,
    /// Matrix positions `(r, c)` with `r c⁻¹ = γ_j`, per parameter `j`.
    pub positions: Vec<Vec<(usize, usize)>>,
}

impl<T: Real> Param<T> for WindowParam {
    fn dim(&self) -> usize {
        self.positions.len()
    }

    fn norm_grad(&self, v: &[Cx<T>], e: &Exponent<T>) -> Result<(T, Vec<Cx<T>>)> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for (pos, &z) in self.positions.iter().zip(v) {
            for &(r, c) in pos {
                m[(r, c)] = z;
            }
        }
        let w = T::one() / T::lit(self.size as f64);
        let (n, g) = blocks_norm_and_gradient(std::slice::from_ref(&m), e, w)?;
        let grad = self
            .positions
            .iter()
            .map(|pos| pos.iter().fold(Cx::zero(), |s, &(r, c)| s + g[0][(r, c)]))
            .collect();
        Ok((n, grad))
    }
}

/// Objective with an ascent direction and a retraction onto the constraint set.
pub(crate) trait Problem<T: Real>: Sync {
    fn eval(&self, v: &[Cx<T>], e: &Exponent<T>) -> Result<(T, Vec<Cx<T>>)>;
    fn value(&self, v: &[Cx<T>], e: &Exponent<T>) -> Result<T>;
    /// Retracts `v` onto the constraint set; returns `false` for degenerate points.
    fn project(&self, v: &mut [Cx<T>], e: &Exponent<T>) -> Result<bool>;
    fn power_step(&self, _v: &[Cx<T>], _e: &Exponent<T>) -> Option<Result<Vec<Cx<T>>>> {
        None
    }
}

/// `‖A(ρ∘v)‖ / ‖A v‖`.
pub(crate) struct Ratio<'a, T: Real, P: Param<T>> {
    pub param: &'a P,
    pub symbol: &'a [Cx<T>],
}

impl<T: Real, P: Param<T>> Ratio<'_, T, P> {
    fn apply(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        v.iter().zip(self.symbol).map(|(a, b)| a * b).collect()
    }
}

impl<T: Real, P: Param<T>> Problem<T> for Ratio<'_, T, P> {
    fn eval(&self, v: &[Cx<T>], e: &Exponent<T>) -> Result<(T, Vec<Cx<T>>)> {
        let (ni, gi) = self.param.norm_grad(v, e)?;
        if ni == T::zero() {
            return Ok((T::zero(), vec![Cx::zero(); v.len()]));
        }
        let (no, go) = self.param.norm_grad(&self.apply(v), e)?;
        let f = no / ni;
        let grad = go
            .iter()
            .zip(self.symbol)
            .zip(&gi)
            .map(|((g, s), h)| (g * s.conj() - h * cr(f)) / cr(ni))
            .collect();
        Ok((f, grad))
    }

    fn value(&self, v: &[Cx<T>], e: &Exponent<T>) -> Result<T> {
        let ni = self.param.norm(v, e)?;
        if ni == T::zero() {
            return Ok(T::zero());
        }
        Ok(self.param.norm(&self.apply(v), e)? / ni)
    }

    fn project(&self, v: &mut [Cx<T>], e: &Exponent<T>) -> Result<bool> {
        let n = self.param.norm(v, e)?;
        if !(n > T::zero()) || !n.is_finite() {
            return Ok(false);
        }
        for z in v.iter_mut() {
            *z /= cr(n);
        }
        Ok(true)
    }

    /// `v ↦ J_{p'}(ρ̄ ∘ ∇‖A(ρ∘v)‖)`, monotone for `1 < p < ∞`.
    fn power_step(&self, v: &[Cx<T>], e: &Exponent<T>) -> Option<Result<Vec<Cx<T>>>> {
        let p = match e {
            Exponent::P(p) if *p > T::one() => *p,
            _ => return None,
        };
        let q = p / (p - T::one());
        let go = match self.param.norm_grad(&self.apply(v), e) {
            Ok((_, g)) => g,
            Err(err) => return Some(Err(err)),
        };
        let z: Vec<Cx<T>> = go.iter().zip(self.symbol).map(|(g, s)| g * s.conj()).collect();
        self.param.dual_map(&z, q)
    }
}

/// `sup_ε ‖A(ε∘x)‖ / ‖A x‖` jointly over inputs `x` and unimodular `ε`; the parameter vector
/// is `x` followed by `ε`.
pub(crate) struct Unimodular<'a, T: Real, P: Param<T>> {
    pub param: &'a P,
    pub _marker: std::marker::PhantomData<T>,
}

impl<T: Real, P: Param<T>> Unimodular<'_, T, P> {
    fn split<'b>(&self, v: &'b [Cx<T>]) -> (&'b [Cx<T>], &'b [Cx<T>]) {
        v.split_at(self.param.dim())
    }
}

impl<T: Real, P: Param<T>> Problem<T> for Unimodular<'_, T, P> {
    fn eval(&self, v: &[Cx<T>], e: &Exponent<T>) -> Result<(T, Vec<Cx<T>>)> {
        let (x, eps) = self.split(v);
        let (ni, gi) = self.param.norm_grad(x, e)?;
        if ni == T::zero() {
            return Ok((T::zero(), vec![Cx::zero(); v.len()]));
        }
        let y: Vec<Cx<T>> = x.iter().zip(eps).map(|(a, b)| a * b).collect();
        let (no, go) = self.param.norm_grad(&y, e)?;
        let f = no / ni;
        let mut grad: Vec<Cx<T>> = go
            .iter()
            .zip(eps)
            .zip(&gi)
            .map(|((g, s), h)| (g * s.conj() - h * cr(f)) / cr(ni))
            .collect();
        for ((g, xq), s) in go.iter().zip(x).zip(eps) {
            let raw = g * xq.conj() / cr(ni);
            let radial = (raw * s.conj()).re;
            grad.push(raw - s * cr(radial));
        }
        Ok((f, grad))
    }

    fn value(&self, v: &[Cx<T>], e: &Exponent<T>) -> Result<T> {
        let (x, eps) = self.split(v);
        let ni = self.param.norm(x, e)?;
        if ni == T::zero() {
            return Ok(T::zero());
        }
        let y: Vec<Cx<T>> = x.iter().zip(eps).map(|(a, b)| a * b).collect();
        Ok(self.param.norm(&y, e)? / ni)
    }

    fn project(&self, v: &mut [Cx<T>], e: &Exponent<T>) -> Result<bool> {
        let d = self.param.dim();
        let n = self.param.norm(&v[..d], e)?;
        if !(n > T::zero()) || !n.is_finite() {
            return Ok(false);
        }
        for z in v[..d].iter_mut() {
            *z /= cr(n);
        }
        for z in v[d..].iter_mut() {
            let a = abs(*z);
            *z = if a > T::zero() { *z / cr(a) } else { Cx::new(T::one(), T::zero()) };
        }
        Ok(true)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Climb<T: Real> {
    pub value: T,
    pub point: Vec<Cx<T>>,
    pub iterations: usize,
}

fn real_dot<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + (x.conj() * y).re)
}

fn norm2<T: Real>(a: &[Cx<T>]) -> T {
    real_dot(a, a).sqrt()
}

/// Monotone power iteration; stops when the relative gain drops below `rel_tol`.
fn power_iteration<T: Real>(
    prob: &dyn Problem<T>,
    e: &Exponent<T>,
    start: Vec<Cx<T>>,
    max_iter: usize,
    rel_tol: T,
) -> Result<Option<Climb<T>>> {
    let mut x = start;
    if !prob.project(&mut x, e)? {
        return Ok(None);
    }
    let mut f = prob.value(&x, e)?;
    let mut it = 0;
    while it < max_iter {
        let next = match prob.power_step(&x, e) {
            None => return Ok(None),
            Some(r) => r?,
        };
        it += 1;
        let mut y = next;
        if !prob.project(&mut y, e)? {
            break;
        }
        let fy = prob.value(&y, e)?;
        if !(fy > f) {
            break;
        }
        let gain = (fy - f) / f.max(T::default_epsilon());
        x = y;
        f = fy;
        if gain < rel_tol {
            break;
        }
    }
    Ok(Some(Climb { value: f, point: x, iterations: it }))
}

/// Projected gradient ascent with Barzilai–Borwein trial steps and monotone backtracking.
pub(crate) fn gradient_ascent<T: Real>(
    prob: &dyn Problem<T>,
    e: &Exponent<T>,
    start: Vec<Cx<T>>,
    max_iter: usize,
    rel_tol: T,
) -> Result<Climb<T>> {
    let mut x = start;
    if !prob.project(&mut x, e)? {
        return Ok(Climb { value: T::zero(), point: x, iterations: 0 });
    }
    let (mut f, mut g) = prob.eval(&x, e)?;
    let tiny = T::lit(1e-300_f64.max(f64::MIN_POSITIVE));
    let gnorm = norm2(&g);
    let mut t = if gnorm > tiny { T::lit(0.1) * norm2(&x) / gnorm } else { T::one() };
    let mut quiet = 0;
    let mut it = 0;
    while it < max_iter {
        if !(norm2(&g) > tiny) {
            break;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let mut y: Vec<Cx<T>> = x.iter().zip(&g).map(|(a, b)| a + b * cr(t)).collect();
            if prob.project(&mut y, e)? {
                let (fy, gy) = prob.eval(&y, e)?;
                if fy > f {
                    accepted = Some((y, fy, gy));
                    break;
                }
            }
            t *= T::lit(0.5);
            if !(t > tiny) {
                break;
            }
        }
        it += 1;
        let Some((y, fy, gy)) = accepted else { break };
        let s: Vec<Cx<T>> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let dg: Vec<Cx<T>> = gy.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = real_dot(&s, &dg);
        let ss = real_dot(&s, &s);
        t = if sy < T::zero() { ss / (-sy) } else { t * T::lit(2.0) };
        let xn = norm2(&y);
        let cap = T::lit(1e6) * xn / norm2(&gy).max(tiny);
        t = t.min(cap).max(tiny);
        let gain = (fy - f) / f.max(tiny);
        x = y;
        f = fy;
        g = gy;
        if gain < rel_tol {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    Ok(Climb { value: f, point: x, iterations: it })
}

/// Local maximisation at `e`: power iteration where available, gradient polish, and
/// continuation through finite exponents for `p = 1` and `p = ∞`.
pub(crate) fn climb<T: Real>(
    prob: &dyn Problem<T>,
    e: &Exponent<T>,
    start: Vec<Cx<T>>,
    max_iter: usize,
    rel_tol: T,
) -> Result<Climb<T>> {
    let surrogates: &[f64] = match e.as_p() {
        Some(p) if p == 1.0 => &[1.5, 1.2, 1.1, 1.05, 1.02, 1.01],
        Some(p) if p == f64::INFINITY => &[4.0, 8.0, 16.0, 32.0, 64.0, 128.0],
        _ => &[],
    };
    if surrogates.is_empty() {
        return climb_smooth(prob, e, start, max_iter, rel_tol);
    }
    let mut x = start;
    let mut best = {
        let mut y = x.clone();
        let v = if prob.project(&mut y, e)? { prob.value(&y, e)? } else { T::zero() };
        Climb { value: v, point: y, iterations: 0 }
    };
    let mut iterations = 0;
    let stage_iter = (max_iter / (surrogates.len() + 1)).max(10);
    for &s in surrogates {
        let es = Exponent::P(T::lit(s));
        let c = climb_smooth(prob, &es, x, stage_iter, rel_tol)?;
        iterations += c.iterations;
        let mut y = c.point.clone();
        if prob.project(&mut y, e)? {
            let v = prob.value(&y, e)?;
            if v > best.value {
                best = Climb { value: v, point: y, iterations: 0 };
            }
        }
        x = c.point;
    }
    let polish = gradient_ascent(prob, e, best.point.clone(), stage_iter, rel_tol)?;
    iterations += polish.iterations;
    if polish.value > best.value {
        best = polish;
    }
    best.iterations = iterations;
    Ok(best)
}

fn climb_smooth<T: Real>(
    prob: &dyn Problem<T>,
    e: &Exponent<T>,
    start: Vec<Cx<T>>,
    max_iter: usize,
    rel_tol: T,
) -> Result<Climb<T>> {
    let mut iterations = 0;
    let mut x = start;
    if let Some(c) = power_iteration(prob, e, x.clone(), max_iter, rel_tol)? {
        iterations += c.iterations;
        x = c.point;
    }
    let mut c = gradient_ascent(prob, e, x, max_iter.saturating_sub(iterations).max(10), rel_tol)?;
    c.iterations += iterations;
    Ok(c)
}

/// Alternating maximisation of `‖ρ∘(u v*)‖_1` over unit vectors `u`, `v`: the norm of
/// `M_ρ` on `S^1` is attained on rank-one contractions.
pub(crate) fn rank_one_trace_ascent<T: Real>(
    rho: &DMatrix<Cx<T>>,
    mut u: Vec<Cx<T>>,
    mut v: Vec<Cx<T>>,
    max_iter: usize,
    rel_tol: T,
) -> Result<(T, Vec<Cx<T>>, Vec<Cx<T>>, usize)> {
    let (nr, nc) = (rho.nrows(), rho.ncols());
    let unit = |w: &mut Vec<Cx<T>>| {
        let n = norm2(w);
        if n > T::zero() {
            for z in w.iter_mut() {
                *z /= cr(n);
            }
        }
    };
    unit(&mut u);
    unit(&mut v);
    let form = |u: &[Cx<T>], v: &[Cx<T>]| DMatrix::from_fn(nr, nc, |i, j| u[i] * rho[(i, j)] * v[j].conj());
    let trace_norm = |m: &DMatrix<Cx<T>>| -> Result<(T, DMatrix<Cx<T>>)> {
        let svd = svd_full(m)?;
        let n = svd.s.iter().fold(T::zero(), |s, &x| s + x);
        let w = crate::schatten::svd_apply(&svd, |s| if s > T::zero() { T::one() } else { T::zero() });
        Ok((n, w))
    };
    let (mut f, mut w) = trace_norm(&form(&u, &v))?;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        // Re tr(W* (u ∘ ρ ∘ v̄)) is linear in u and in v̄ separately.
        let a: Vec<Cx<T>> = (0..nr)
            .map(|i| (0..nc).fold(Cx::zero(), |s, j| s + w[(i, j)].conj() * rho[(i, j)] * v[j].conj()))
            .collect();
        let mut u2: Vec<Cx<T>> = a.iter().map(|z| z.conj()).collect();
        unit(&mut u2);
        if norm2(&u2) == T::zero() {
            break;
        }
        let b: Vec<Cx<T>> = (0..nc)
            .map(|j| (0..nr).fold(Cx::zero(), |s, i| s + w[(i, j)].conj() * u2[i] * rho[(i, j)]))
            .collect();
        let mut v2 = b;
        unit(&mut v2);
        if norm2(&v2) == T::zero() {
            break;
        }
        let (f2, w2) = trace_norm(&form(&u2, &v2))?;
        if !(f2 > f) {
            break;
        }
        let gain = (f2 - f) / f.max(T::default_epsilon());
        u = u2;
        v = v2;
        f = f2;
        w = w2;
        if gain < rel_tol {
            break;
        }
    }
    Ok((f, u, v, it))
}
