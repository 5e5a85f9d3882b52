//! Discrete group models (ℤ_N and ℤ^d), their left regular representation, Fourier series
//! with matrix coefficients, normalised-trace norms, and Følner/Reiter data.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{abs, cis, Real};
use crate::schatten::{spectrum_norm, CMatrix, Convention, Exponent};

/// Largest lattice dimension supported by [`Element`].
pub const MAX_DIM: usize = 4;

/// Group element: a residue for ℤ_N, an integer vector for ℤ^d.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    dim: u8,
    coords: [i64; MAX_DIM],
}

impl Element {
    pub fn scalar(k: i64) -> Self {
        let mut coords = [0; MAX_DIM];
        coords[0] = k;
        Self { dim: 1, coords }
    }

    pub fn vector(v: &[i64]) -> Result<Self> {
        if v.is_empty() || v.len() > MAX_DIM {
            return Err(Error::InvalidInput(format!("element dimension must be in 1..={MAX_DIM}")));
        }
        let mut coords = [0; MAX_DIM];
        coords[..v.len()].copy_from_slice(v);
        Ok(Self { dim: v.len() as u8, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim()]
    }

    /// First coordinate; the whole element in dimension one.
    pub fn value(&self) -> i64 {
        self.coords[0]
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim == 1 {
            write!(f, "{}", self.coords[0])
        } else {
            let parts: Vec<String> = self.coords().iter().map(|c| c.to_string()).collect();
            write!(f, "({})", parts.join(","))
        }
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.dim == 1 {
            s.serialize_i64(self.coords[0])
        } else {
            self.coords().serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Scalar(i64),
            Vector(Vec<i64>),
        }
        match Repr::deserialize(d)? {
            Repr::Scalar(k) => Ok(Element::scalar(k)),
            Repr::Vector(v) => Element::vector(&v).map_err(serde::de::Error::custom),
        }
    }
}

/// Which concrete group a [`GroupModel`] realises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupKind {
    /// ℤ_N.
    Cyclic { n: u64 },
    /// ℤ^d, enumerated through the box `{-radius..radius}^d`.
    Lattice { dim: usize, radius: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupModel {
    kind: GroupKind,
}

impl GroupModel {
    pub fn cyclic(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("cyclic group order must be positive".into()));
        }
        Ok(Self { kind: GroupKind::Cyclic { n } })
    }

    /// ℤ enumerated through `{-radius..radius}`.
    pub fn integers(radius: i64) -> Self {
        Self { kind: GroupKind::Lattice { dim: 1, radius: radius.max(0) } }
    }

    pub fn lattice(dim: usize, radius: i64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidInput(format!("lattice dimension must be in 1..={MAX_DIM}")));
        }
        Ok(Self { kind: GroupKind::Lattice { dim, radius: radius.max(0) } })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            GroupKind::Cyclic { .. } => 1,
            GroupKind::Lattice { dim, .. } => dim,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, GroupKind::Cyclic { .. })
    }

    /// Canonical element from integer coordinates (reduced mod N for cyclic groups).
    pub fn elem(&self, v: &[i64]) -> Result<Element> {
        if v.len() != self.dim() {
            return Err(Error::NotInGroup(format!("{v:?} has dimension {} (group has {})", v.len(), self.dim())));
        }
        match self.kind {
            GroupKind::Cyclic { n } => Ok(Element::scalar(v[0].rem_euclid(n as i64))),
            GroupKind::Lattice { .. } => Element::vector(v),
        }
    }

    /// Canonical one-dimensional element; panics on multi-dimensional groups.
    pub fn el(&self, k: i64) -> Element {
        self.elem(&[k]).expect("one-dimensional group")
    }

    pub fn identity(&self) -> Element {
        Element { dim: self.dim() as u8, coords: [0; MAX_DIM] }
    }

    pub fn contains(&self, g: &Element) -> bool {
        match self.kind {
            GroupKind::Cyclic { n } => g.dim == 1 && (0..n as i64).contains(&g.coords[0]),
            GroupKind::Lattice { dim, .. } => g.dim() == dim,
        }
    }

    pub fn check(&self, g: &Element) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(Error::NotInGroup(format!("{g} in {:?}", self.kind)))
        }
    }

    pub fn compose(&self, a: &Element, b: &Element) -> Element {
        let mut out = *a;
        for i in 0..a.dim() {
            out.coords[i] = a.coords[i] + b.coords[i];
        }
        self.reduce(out)
    }

    pub fn inverse(&self, a: &Element) -> Element {
        let mut out = *a;
        for i in 0..a.dim() {
            out.coords[i] = -a.coords[i];
        }
        self.reduce(out)
    }

    /// `a b⁻¹`.
    pub fn quotient(&self, a: &Element, b: &Element) -> Element {
        self.compose(a, &self.inverse(b))
    }

    fn reduce(&self, mut g: Element) -> Element {
        if let GroupKind::Cyclic { n } = self.kind {
            g.coords[0] = g.coords[0].rem_euclid(n as i64);
        }
        g
    }

    /// All of ℤ_N, or the enumeration box of a lattice model.
    pub fn elements(&self) -> Vec<Element> {
        match self.kind {
            GroupKind::Cyclic { n } => (0..n as i64).map(Element::scalar).collect(),
            GroupKind::Lattice { dim, radius } => lattice_box(dim, radius),
        }
    }

    /// Identity and inverse laws exactly, associativity on a sample of triples.
    pub fn check_axioms(&self) -> Result<()> {
        let els = self.elements();
        let e = self.identity();
        for g in &els {
            if self.compose(&e, g) != *g || self.compose(g, &e) != *g {
                return Err(Error::InvalidInput(format!("identity law fails at {g}")));
            }
            if self.compose(g, &self.inverse(g)) != e {
                return Err(Error::InvalidInput(format!("inverse law fails at {g}")));
            }
        }
        let step = (els.len() / 7).max(1);
        for a in els.iter().step_by(step) {
            for b in els.iter().step_by(step) {
                for c in els.iter().step_by(step) {
                    if self.compose(&self.compose(a, b), c) != self.compose(a, &self.compose(b, c)) {
                        return Err(Error::InvalidInput(format!("associativity fails at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Symmetric interval `{-r..r}` in ℤ (or the box of radius `r` in ℤ^d).
    pub fn ball(&self, r: i64) -> Vec<Element> {
        match self.kind {
            GroupKind::Cyclic { n } => {
                let set: BTreeSet<Element> = (-r..=r).map(|k| Element::scalar(k.rem_euclid(n as i64))).collect();
                set.into_iter().collect()
            }
            GroupKind::Lattice { dim, .. } => lattice_box(dim, r),
        }
    }

    /// `{a..=b}` along the first axis (dimension one only).
    pub fn interval(&self, a: i64, b: i64) -> Vec<Element> {
        (a..=b).map(|k| self.el(k)).collect()
    }
}

fn lattice_box(dim: usize, r: i64) -> Vec<Element> {
    let side: Vec<i64> = (-r..=r).collect();
    let mut out = vec![Element { dim: dim as u8, coords: [0; MAX_DIM] }];
    for axis in 0..dim {
        let mut next = Vec::with_capacity(out.len() * side.len());
        for g in &out {
            for &k in &side {
                let mut h = *g;
                h.coords[axis] = k;
                next.push(h);
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// `λ_γ` compressed to `window × window`: entry `(r, c)` is 1 iff `r = γc`.
pub fn regular_representation<T: Real>(g: &GroupModel, gamma: &Element, window: &[Element]) -> Result<CMatrix<T>> {
    g.check(gamma)?;
    for w in window {
        g.check(w)?;
    }
    let n = window.len();
    let index: BTreeMap<Element, usize> = window.iter().enumerate().map(|(i, w)| (*w, i)).collect();
    let mut m = DMatrix::zeros(n, n);
    for (c, col) in window.iter().enumerate() {
        if let Some(&r) = index.get(&g.compose(gamma, col)) {
            m[(r, c)] = Complex::new(T::one(), T::zero());
        }
    }
    Ok(CMatrix::wrap(m))
}

/// Finite Fourier series `Σ_γ x_γ ⊗ λ_γ` with `m × m` matrix coefficients (`m = 1` is the scalar case).
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries<T: Real> {
    group: GroupModel,
    block: usize,
    coeffs: BTreeMap<Element, DMatrix<Complex<T>>>,
}

impl<T: Real> FourierSeries<T> {
    pub fn zero(group: GroupModel, block: usize) -> Self {
        Self { group, block: block.max(1), coeffs: BTreeMap::new() }
    }

    /// Scalar series from `(γ, x_γ)` pairs; repeated elements are summed.
    pub fn scalar(group: GroupModel, terms: &[(Element, Complex<T>)]) -> Result<Self> {
        let mut out = Self::zero(group, 1);
        for (g, z) in terms {
            out.add_term(*g, DMatrix::from_element(1, 1, *z))?;
        }
        Ok(out)
    }

    /// `λ_γ`.
    pub fn lambda(group: GroupModel, gamma: Element) -> Result<Self> {
        Self::scalar(group, &[(gamma, Complex::new(T::one(), T::zero()))])
    }

    pub fn block(group: GroupModel, block: usize, terms: Vec<(Element, DMatrix<Complex<T>>)>) -> Result<Self> {
        if block == 0 {
            return Err(Error::Dimension("block size must be positive".into()));
        }
        let mut out = Self::zero(group, block);
        for (g, a) in terms {
            out.add_term(g, a)?;
        }
        Ok(out)
    }

    pub fn add_term(&mut self, gamma: Element, a: DMatrix<Complex<T>>) -> Result<()> {
        self.group.check(&gamma)?;
        if a.nrows() != self.block || a.ncols() != self.block {
            return Err(Error::Dimension(format!("coefficient must be {0}x{0}", self.block)));
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coefficient at {gamma}")));
        }
        let entry = self.coeffs.entry(gamma).or_insert_with(|| DMatrix::zeros(a.nrows(), a.ncols()));
        *entry += a;
        if entry.iter().all(|z| z.is_zero()) {
            self.coeffs.remove(&gamma);
        }
        Ok(())
    }

    pub fn group(&self) -> &GroupModel {
        &self.group
    }

    pub fn block_size(&self) -> usize {
        self.block
    }

    /// Elements carrying a nonzero coefficient.
    pub fn spectrum(&self) -> Vec<Element> {
        self.coeffs.keys().copied().collect()
    }

    pub fn coeffs(&self) -> &BTreeMap<Element, DMatrix<Complex<T>>> {
        &self.coeffs
    }

    pub fn coeff(&self, g: &Element) -> Option<&DMatrix<Complex<T>>> {
        self.coeffs.get(g)
    }

    /// Scalar coefficient (zero off the spectrum); block series return the (0,0) entry.
    pub fn scalar_coeff(&self, g: &Element) -> Complex<T> {
        self.coeffs.get(g).map_or_else(Complex::zero, |a| a[(0, 0)])
    }

    /// `(Σ_γ ‖x_γ‖_2²)^{1/2}`.
    pub fn l2_coeff_norm(&self) -> T {
        self.coeffs.values().fold(T::zero(), |s, a| s + a.iter().fold(T::zero(), |t, z| t + z.norm_sqr())).sqrt()
    }

    /// Block matrix `(x_{r c⁻¹})_{r ∈ rows, c ∈ cols}`.
    pub fn realize(&self, rows: &[Element], cols: &[Element]) -> Result<CMatrix<T>> {
        let m = self.block;
        let mut out = DMatrix::zeros(rows.len() * m, cols.len() * m);
        for (i, r) in rows.iter().enumerate() {
            self.group.check(r)?;
            for (j, c) in cols.iter().enumerate() {
                if let Some(a) = self.coeffs.get(&self.group.quotient(r, c)) {
                    out.view_mut((i * m, j * m), (m, m)).copy_from(a);
                }
            }
        }
        Ok(CMatrix::wrap(out))
    }

    /// `x*`: coefficients `(x_{γ⁻¹})*`.
    pub fn adjoint(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(g, a)| (self.group.inverse(g), a.adjoint())).collect();
        Self { group: self.group, block: self.block, coeffs }
    }

    pub fn is_selfadjoint(&self, tol: T) -> bool {
        let adj = self.adjoint();
        let keys: BTreeSet<Element> = self.coeffs.keys().chain(adj.coeffs.keys()).copied().collect();
        let zero = DMatrix::zeros(self.block, self.block);
        keys.iter().all(|g| {
            let a = self.coeffs.get(g).unwrap_or(&zero);
            let b = adj.coeffs.get(g).unwrap_or(&zero);
            a.iter().zip(b.iter()).all(|(x, y)| abs(*x - *y) <= tol)
        })
    }

    /// Left translate `λ_δ x`: coefficient at `δγ` is `x_γ`.
    pub fn translate(&self, delta: &Element) -> Result<Self> {
        self.group.check(delta)?;
        let coeffs = self.coeffs.iter().map(|(g, a)| (self.group.compose(delta, g), a.clone())).collect();
        Ok(Self { group: self.group, block: self.block, coeffs })
    }

    /// Value of the symbol at the character `θ` (abelian groups): `Σ_γ x_γ e^{i⟨γ,θ⟩}`.
    pub(crate) fn character_value(&self, theta: &[f64]) -> DMatrix<Complex<T>> {
        let mut out = DMatrix::zeros(self.block, self.block);
        for (g, a) in &self.coeffs {
            let phase: f64 = g.coords().iter().zip(theta).map(|(&k, &t)| k as f64 * t).sum();
            out += a * cis(T::lit(phase));
        }
        out
    }
}

/// Where a group norm is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupWindow {
    /// Exact `L^p(τ)` norm (exact for ℤ_N; character quadrature on ℤ^d).
    Full,
    /// Compression to a finite window with trace normalised by its size.
    Set(Vec<Element>),
}

/// Number of quadrature nodes per axis used for [`GroupWindow::Full`] on lattices.
///
/// `|f|^p` is a trigonometric polynomial of degree `p·deg` for even `p`, so the rule is exact
/// there; other exponents are approximated with a generous oversampling factor.
pub fn lattice_quadrature_nodes(max_degree: i64, p_hint: f64, dim: usize) -> usize {
    let q = if p_hint.is_finite() { p_hint.max(2.0) } else { 8.0 };
    let min_nodes = (q * max_degree as f64).ceil() as usize + 1;
    let floor = match dim {
        1 => 512,
        2 => 64,
        _ => 16,
    };
    min_nodes.max(floor)
}

fn character_grid(nodes: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(out.len() * nodes);
        for pt in &out {
            for k in 0..nodes {
                let mut p = pt.clone();
                p.push(2.0 * PI * k as f64 / nodes as f64);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Singular values of `x` with the weight that turns `Σ` into the normalised trace `tr ⊗ τ`.
pub(crate) fn group_spectrum<T: Real>(x: &FourierSeries<T>, p_hint: f64, window: &GroupWindow) -> Result<(Vec<T>, T)> {
    match window {
        GroupWindow::Set(w) => {
            if w.is_empty() {
                return Err(Error::EmptyWindow);
            }
            let mat = x.realize(w, w)?;
            let sv = crate::schatten::singular_values(&mat)?;
            Ok((sv.values().to_vec(), T::one() / T::lit(w.len() as f64)))
        }
        GroupWindow::Full => {
            let (nodes, dim) = match x.group.kind() {
                GroupKind::Cyclic { n } => (n as usize, 1),
                GroupKind::Lattice { dim, .. } => {
                    let deg = x.coeffs.keys().flat_map(|g| g.coords().iter().map(|c| c.abs())).max().unwrap_or(0);
                    (lattice_quadrature_nodes(2 * deg, p_hint, dim), dim)
                }
            };
            let grid = character_grid(nodes, dim);
            let mut all = Vec::with_capacity(grid.len() * x.block);
            for theta in &grid {
                let f = x.character_value(theta);
                if x.block == 1 {
                    all.push(abs(f[(0, 0)]));
                } else {
                    let sv = f.try_svd(false, false, T::default_epsilon(), 0).ok_or(Error::SvdFailure)?;
                    all.extend(sv.singular_values.iter().copied());
                }
            }
            let n = T::lit(grid.len() as f64);
            Ok((all, T::one() / n))
        }
    }
}

/// `‖x‖_{L^e(tr ⊗ τ)}`, exact on ℤ_N for `window = Full`, a compression estimate otherwise.
pub fn lp_group_norm<T: Real>(x: &FourierSeries<T>, e: &Exponent<T>, window: &GroupWindow) -> Result<T> {
    let (mut sv, weight) = group_spectrum(x, e.as_p().unwrap_or(2.0), window)?;
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    spectrum_norm(&sv, e, Convention::Standard, weight)
}

/// Increasing family of finite sets with small translation defect.
#[derive(Clone, Debug, PartialEq)]
pub struct FolnerNet {
    group: GroupModel,
    sets: Vec<Vec<Element>>,
}

impl FolnerNet {
    pub fn new(group: GroupModel, sets: Vec<Vec<Element>>) -> Result<Self> {
        for s in &sets {
            if s.is_empty() {
                return Err(Error::EmptyWindow);
            }
            for g in s {
                group.check(g)?;
            }
        }
        Ok(Self { group, sets })
    }

    pub fn group(&self) -> &GroupModel {
        &self.group
    }

    pub fn sets(&self) -> &[Vec<Element>] {
        &self.sets
    }

    /// `|γΓ Δ Γ| / |Γ|` for every set of the net.
    pub fn translation_defects(&self, gamma: &Element) -> Vec<f64> {
        self.sets.iter().map(|s| translation_defect(&self.group, s, gamma)).collect()
    }
}

/// `|γΓ Δ Γ| / |Γ|`.
pub fn translation_defect(g: &GroupModel, set: &[Element], gamma: &Element) -> f64 {
    let a: BTreeSet<Element> = set.iter().copied().collect();
    let b: BTreeSet<Element> = set.iter().map(|s| g.compose(gamma, s)).collect();
    a.symmetric_difference(&b).count() as f64 / a.len().max(1) as f64
}

/// Intervals/boxes of radii 1, 2, 4, … on lattices; nested initial segments of sizes
/// `⌈kN/count⌉` on ℤ_N.
pub fn folner_intervals(g: &GroupModel, count: usize) -> FolnerNet {
    let sets = match g.kind() {
        GroupKind::Cyclic { n } => (1..=count)
            .map(|k| {
                let size = ((k as u64 * n).div_ceil(count as u64)).max(1);
                (0..size as i64).map(Element::scalar).collect()
            })
            .collect(),
        GroupKind::Lattice { dim, .. } => (0..count).map(|i| lattice_box(dim, 1i64 << i)).collect(),
    };
    FolnerNet { group: *g, sets }
}

/// Finitely supported probability weights on a group.
#[derive(Clone, Debug, PartialEq)]
pub struct ReiterMean<T: Real> {
    weights: BTreeMap<Element, T>,
}

impl<T: Real> ReiterMean<T> {
    pub fn new(weights: BTreeMap<Element, T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyWindow);
        }
        if weights.values().any(|w| !(*w > T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidInput("Reiter weights must be positive".into()));
        }
        let total = weights.values().fold(T::zero(), |s, &w| s + w);
        let tol = if T::lit(1e-12) > T::default_epsilon() { 1e-12 } else { 1e-5 };
        if (total - T::one()).abs() > T::lit(tol) * T::lit(weights.len() as f64).max(T::one()) {
            return Err(Error::InvalidInput(format!("Reiter weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(elements: &[Element]) -> Result<Self> {
        let set: BTreeSet<Element> = elements.iter().copied().collect();
        if set.is_empty() {
            return Err(Error::EmptyWindow);
        }
        let w = T::one() / T::lit(set.len() as f64);
        Ok(Self { weights: set.into_iter().map(|g| (g, w)).collect() })
    }

    pub fn weight(&self, g: &Element) -> T {
        self.weights.get(g).copied().unwrap_or_else(T::zero)
    }

    pub fn weights(&self) -> &BTreeMap<Element, T> {
        &self.weights
    }

    pub fn support(&self) -> Vec<Element> {
        self.weights.keys().copied().collect()
    }
}

/// `Σ_β |μ(γ⁻¹β) − μ(β)|`.
pub fn reiter_defect<T: Real>(g: &GroupModel, mu: &ReiterMean<T>, gamma: &Element) -> Result<T> {
    g.check(gamma)?;
    let mut betas: BTreeSet<Element> = mu.weights.keys().copied().collect();
    betas.extend(mu.weights.keys().map(|b| g.compose(gamma, b)));
    let inv = g.inverse(gamma);
    Ok(betas
        .iter()
        .fold(T::zero(), |s, b| s + (mu.weight(&g.compose(&inv, b)) - mu.weight(b)).abs()))
}
