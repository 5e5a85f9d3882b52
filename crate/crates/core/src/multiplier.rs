//! Schur and Fourier multipliers, the Toeplitz and grid transfers, amplification, and
//! symbols coming from atomic measures.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupalg::{lp_group_norm, Element, FourierSeries, GroupKind, GroupModel, GroupWindow};
use crate::scalar::{abs, cis, Real};
use crate::schatten::{CMatrix, Exponent};

/// Finite pattern `I ⊆ R × C` with `R = 0..rows`, `C = 0..cols`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Support {
    rows: usize,
    cols: usize,
    pairs: Vec<(usize, usize)>,
    mask: Vec<bool>,
}

impl Support {
    pub fn new(rows: usize, cols: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut mask = vec![false; rows * cols];
        let mut list = Vec::new();
        for (r, c) in pairs {
            if r >= rows || c >= cols {
                return Err(Error::Dimension(format!("pair ({r}, {c}) outside {rows}x{cols}")));
            }
            if mask[r * cols + c] {
                return Err(Error::InvalidInput(format!("duplicate support pair ({r}, {c})")));
            }
            mask[r * cols + c] = true;
            list.push((r, c));
        }
        list.sort_unstable();
        Ok(Self { rows, cols, pairs: list, mask })
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        let pairs = (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).collect();
        Self { rows, cols, pairs, mask: vec![true; rows * cols] }
    }

    #[inline]
    pub fn contains(&self, r: usize, c: usize) -> bool {
        r < self.rows && c < self.cols && self.mask[r * self.cols + c]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_full(&self) -> bool {
        self.pairs.len() == self.rows * self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.cols, self.rows, self.pairs.iter().map(|&(r, c)| (c, r))).expect("transpose of a valid support")
    }

    /// Rows that carry at least one pair.
    pub fn active_rows(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.0).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn active_cols(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.1).collect::<BTreeSet<_>>().into_iter().collect()
    }
}

/// Symbol `(ρ_q)_{q ∈ I}` of a relative Schur multiplier.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurSymbol<T: Real> {
    support: Support,
    values: DMatrix<Complex<T>>,
}

impl<T: Real> SchurSymbol<T> {
    /// Symbol from `((r, c), ρ_rc)` entries; the pairs form the support.
    pub fn new(rows: usize, cols: usize, entries: &[((usize, usize), Complex<T>)]) -> Result<Self> {
        let support = Support::new(rows, cols, entries.iter().map(|e| e.0))?;
        let mut values = DMatrix::zeros(rows, cols);
        for &((r, c), z) in entries {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
            values[(r, c)] = z;
        }
        Ok(Self { support, values })
    }

    pub fn on_support(support: Support, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Result<Self> {
        let mut values = DMatrix::zeros(support.nrows(), support.ncols());
        for &(r, c) in support.pairs() {
            let z = f(r, c);
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
            values[(r, c)] = z;
        }
        Ok(Self { support, values })
    }

    /// Full-support symbol from a dense matrix.
    pub fn dense(m: &CMatrix<T>) -> Self {
        Self { support: Support::full(m.nrows(), m.ncols()), values: m.inner().clone() }
    }

    pub fn full_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex<T>) -> Result<Self> {
        Self::on_support(Support::full(rows, cols), f)
    }

    pub fn constant(support: Support, z: Complex<T>) -> Self {
        Self::on_support(support, |_, _| z).expect("finite constant")
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn nrows(&self) -> usize {
        self.support.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.support.ncols()
    }

    pub fn value(&self, r: usize, c: usize) -> Option<Complex<T>> {
        self.support.contains(r, c).then(|| self.values[(r, c)])
    }

    /// Dense matrix of values, zero off the support.
    pub fn to_matrix(&self) -> CMatrix<T> {
        CMatrix::wrap(self.values.clone())
    }

    pub fn max_abs(&self) -> T {
        self.support.pairs().iter().fold(T::zero(), |m, &(r, c)| m.max(abs(self.values[(r, c)])))
    }

    pub fn transpose(&self) -> Self {
        Self { support: self.support.transpose(), values: self.values.transpose() }
    }

    pub fn conj(&self) -> Self {
        Self { support: self.support.clone(), values: self.values.map(|z| z.conj()) }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { support: self.support.clone(), values: self.values.map(|z| z * s) }
    }

    /// Restriction to a smaller pattern.
    pub fn restrict(&self, support: &Support) -> Result<Self> {
        if support.nrows() != self.nrows() || support.ncols() != self.ncols() {
            return Err(Error::Dimension("restriction must use the same universes".into()));
        }
        for &(r, c) in support.pairs() {
            if !self.support.contains(r, c) {
                return Err(Error::OffSupport { row: r, col: c });
            }
        }
        Self::on_support(support.clone(), |r, c| self.values[(r, c)])
    }

    /// Whether all values on the support are equal.
    pub fn is_constant(&self) -> Option<Complex<T>> {
        let first = self.support.pairs().first().map(|&(r, c)| self.values[(r, c)])?;
        self.support.pairs().iter().all(|&(r, c)| self.values[(r, c)] == first).then_some(first)
    }

    pub fn to_json(&self) -> SchurSymbolJson {
        SchurSymbolJson {
            rows: self.nrows(),
            cols: self.ncols(),
            entries: self
                .support
                .pairs()
                .iter()
                .map(|&(r, c)| {
                    let z = self.values[(r, c)];
                    (r, c, z.re.to_f64_lossy(), z.im.to_f64_lossy())
                })
                .collect(),
        }
    }

    pub fn from_json(j: &SchurSymbolJson) -> Result<Self> {
        let entries: Vec<_> =
            j.entries.iter().map(|&(r, c, re, im)| ((r, c), Complex::new(T::lit(re), T::lit(im)))).collect();
        Self::new(j.rows, j.cols, &entries)
    }
}

/// Serialized form `{rows, cols, entries: [[r, c, re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchurSymbolJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64, f64)>,
}

/// `ρ ∘ A`; `A` must vanish off the support of `ρ`.
pub fn schur_apply<T: Real>(rho: &SchurSymbol<T>, a: &CMatrix<T>) -> Result<CMatrix<T>> {
    check_shape(rho, a)?;
    for c in 0..a.ncols() {
        for r in 0..a.nrows() {
            if !rho.support.contains(r, c) && !a.get(r, c).is_zero() {
                return Err(Error::OffSupport { row: r, col: c });
            }
        }
    }
    Ok(CMatrix::wrap(rho.values.component_mul(a.inner())))
}

/// `ρ ∘ P_I(A)`: entries off the support are zeroed instead of rejected.
pub fn schur_apply_truncating<T: Real>(rho: &SchurSymbol<T>, a: &CMatrix<T>) -> Result<CMatrix<T>> {
    check_shape(rho, a)?;
    Ok(CMatrix::wrap(rho.values.component_mul(a.inner())))
}

fn check_shape<T: Real>(rho: &SchurSymbol<T>, a: &CMatrix<T>) -> Result<()> {
    if a.nrows() != rho.nrows() || a.ncols() != rho.ncols() {
        return Err(Error::Dimension(format!(
            "symbol is {}x{}, matrix is {}x{}",
            rho.nrows(),
            rho.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// Symbol `(φ_γ)_{γ ∈ Λ}` of a relative Fourier multiplier.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSymbol<T: Real> {
    group: GroupModel,
    values: BTreeMap<Element, Complex<T>>,
}

impl<T: Real> FourierSymbol<T> {
    pub fn new(group: GroupModel, values: BTreeMap<Element, Complex<T>>) -> Result<Self> {
        for (g, z) in &values {
            group.check(g)?;
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite symbol value at {g}")));
            }
        }
        Ok(Self { group, values })
    }

    pub fn from_fn(group: GroupModel, domain: &[Element], mut f: impl FnMut(&Element) -> Complex<T>) -> Result<Self> {
        Self::new(group, domain.iter().map(|g| (*g, f(g))).collect())
    }

    /// `φ ≡ 1` on `domain`.
    pub fn indicator(group: GroupModel, domain: &[Element]) -> Result<Self> {
        Self::from_fn(group, domain, |_| Complex::new(T::one(), T::zero()))
    }

    pub fn group(&self) -> &GroupModel {
        &self.group
    }

    pub fn domain(&self) -> Vec<Element> {
        self.values.keys().copied().collect()
    }

    pub fn values(&self) -> &BTreeMap<Element, Complex<T>> {
        &self.values
    }

    pub fn value(&self, g: &Element) -> Option<Complex<T>> {
        self.values.get(g).copied()
    }

    pub fn max_abs(&self) -> T {
        self.values.values().fold(T::zero(), |m, &z| m.max(abs(z)))
    }

    pub fn to_json(&self) -> FourierSymbolJson {
        FourierSymbolJson {
            group: self.group,
            entries: self.values.iter().map(|(g, z)| (*g, z.re.to_f64_lossy(), z.im.to_f64_lossy())).collect(),
        }
    }

    pub fn from_json(j: &FourierSymbolJson) -> Result<Self> {
        let mut values = BTreeMap::new();
        for &(g, re, im) in &j.entries {
            let g = j.group.elem(g.coords())?;
            if values.insert(g, Complex::new(T::lit(re), T::lit(im))).is_some() {
                return Err(Error::InvalidInput(format!("duplicate symbol entry at {g}")));
            }
        }
        Self::new(j.group, values)
    }
}

/// Serialized form `{group, entries: [[γ, re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierSymbolJson {
    pub group: GroupModel,
    pub entries: Vec<(Element, f64, f64)>,
}

/// `Σ φ_γ x_γ λ_γ`; the spectrum of `x` must lie in the domain of `φ`.
pub fn fourier_apply<T: Real>(phi: &FourierSymbol<T>, x: &FourierSeries<T>) -> Result<FourierSeries<T>> {
    let mut out = FourierSeries::zero(*x.group(), x.block_size());
    for (g, a) in x.coeffs() {
        let z = phi.value(g).ok_or_else(|| Error::SpectrumEscape(g.to_string()))?;
        out.add_term(*g, a * z)?;
    }
    Ok(out)
}

/// `φ̌(r, c) = φ(r c⁻¹)` on `{(r, c) ∈ window² : r c⁻¹ ∈ Λ}`.
pub fn toeplitz_transfer<T: Real>(phi: &FourierSymbol<T>, window: &[Element]) -> Result<SchurSymbol<T>> {
    grid_transfer_with(phi, window, window, |g, r, c| g.quotient(r, c))
}

/// `φ̆(i, j) = φ(r_i c_j)` on `{(i, j) : r_i c_j ∈ Λ}`.
pub fn grid_transfer<T: Real>(phi: &FourierSymbol<T>, rows: &[Element], cols: &[Element]) -> Result<SchurSymbol<T>> {
    grid_transfer_with(phi, rows, cols, |g, r, c| g.compose(r, c))
}

fn grid_transfer_with<T: Real>(
    phi: &FourierSymbol<T>,
    rows: &[Element],
    cols: &[Element],
    op: impl Fn(&GroupModel, &Element, &Element) -> Element,
) -> Result<SchurSymbol<T>> {
    let g = phi.group();
    for e in rows.iter().chain(cols) {
        g.check(e)?;
    }
    let mut entries = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        for (j, c) in cols.iter().enumerate() {
            if let Some(z) = phi.value(&op(g, r, c)) {
                entries.push(((i, j), z));
            }
        }
    }
    SchurSymbol::new(rows.len(), cols.len(), &entries)
}

/// `ρ ⊗ J_m` on `(m·rows) × (m·cols)`: index `r·m + a` carries row `r` of `ρ`, so the
/// symbol is constant on each `m × m` block.
pub fn amplify<T: Real>(rho: &SchurSymbol<T>, m: usize) -> Result<SchurSymbol<T>> {
    if m == 0 {
        return Err(Error::InvalidInput("amplification order must be positive".into()));
    }
    let pairs = rho
        .support
        .pairs()
        .iter()
        .flat_map(|&(r, c)| (0..m).flat_map(move |a| (0..m).map(move |b| (r * m + a, c * m + b))));
    let support = Support::new(rho.nrows() * m, rho.ncols() * m, pairs)?;
    SchurSymbol::on_support(support, |i, j| rho.values[(i / m, j / m)])
}

/// Places `blocks[a]` on the index pairs `(r·m + a, c·m + a)`: the block-diagonal
/// `diag(A_1, …, A_m)` in the layout used by [`amplify`].
pub fn embed_block_diagonal<T: Real>(blocks: &[CMatrix<T>]) -> Result<CMatrix<T>> {
    let m = blocks.len();
    let (nr, nc) = blocks.first().map_or((0, 0), |b| (b.nrows(), b.ncols()));
    if blocks.iter().any(|b| b.nrows() != nr || b.ncols() != nc) {
        return Err(Error::Dimension("blocks must share a shape".into()));
    }
    let mut out = DMatrix::zeros(nr * m, nc * m);
    for (a, b) in blocks.iter().enumerate() {
        for r in 0..nr {
            for c in 0..nc {
                out[(r * m + a, c * m + a)] = b.get(r, c);
            }
        }
    }
    Ok(CMatrix::wrap(out))
}

/// Inverse of [`embed_block_diagonal`] for block `a`.
pub fn extract_block<T: Real>(x: &CMatrix<T>, m: usize, a: usize) -> Result<CMatrix<T>> {
    if m == 0 || a >= m || !x.nrows().is_multiple_of(m) || !x.ncols().is_multiple_of(m) {
        return Err(Error::Dimension("matrix is not an m-fold amplification".into()));
    }
    CMatrix::from_fn(x.nrows() / m, x.ncols() / m, |r, c| x.get(r * m + a, c * m + a))
}

/// `Σ_g a_g δ_{θ_g}` on the circle.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure<T: Real> {
    atoms: Vec<(T, Complex<T>)>,
}

impl<T: Real> AtomicMeasure<T> {
    pub fn new(atoms: Vec<(T, Complex<T>)>) -> Result<Self> {
        let two_pi = T::two_pi();
        for (i, (a, _)) in atoms.iter().enumerate() {
            for (b, _) in &atoms[..i] {
                let d = rem_euclid(*a - *b, two_pi);
                let d = d.min(two_pi - d);
                if d < T::lit(1e-12) {
                    return Err(Error::InvalidInput(format!("atoms at {a} and {b} coincide mod 2π")));
                }
            }
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(T, Complex<T>)] {
        &self.atoms
    }
}

fn rem_euclid<T: Real>(x: T, m: T) -> T {
    x - m * (x / m).floor()
}

/// `φ_k = Σ_g a_g e^{−i k θ_g}` for `k ∈ Λ`.
///
/// On ℤ_N every location must be a multiple of `2π/N`, so that the symbol is well defined
/// modulo `N`.
pub fn atomic_symbol<T: Real>(mu: &AtomicMeasure<T>, group: &GroupModel, domain: &[Element]) -> Result<FourierSymbol<T>> {
    match group.kind() {
        GroupKind::Cyclic { n } => {
            for (theta, _) in &mu.atoms {
                let t = theta.to_f64_lossy() * n as f64 / (2.0 * std::f64::consts::PI);
                if (t - t.round()).abs() > 1e-9 {
                    return Err(Error::InvalidInput(format!("atom at {theta} is not a multiple of 2π/{n}")));
                }
            }
        }
        GroupKind::Lattice { dim, .. } if dim != 1 => {
            return Err(Error::InvalidInput("atomic symbols are defined on ℤ and ℤ_N only".into()));
        }
        GroupKind::Lattice { .. } => {}
    }
    FourierSymbol::from_fn(*group, domain, |g| {
        let k = T::lit(g.value() as f64);
        mu.atoms.iter().fold(Complex::zero(), |s, &(theta, a)| s + a * cis(-k * theta))
    })
}

/// `Σ_g |a_g|^p`.
pub fn atomic_lp_mass<T: Real>(mu: &AtomicMeasure<T>, p: T) -> Result<T> {
    if !(p > T::zero() && p <= T::one()) {
        return Err(Error::InvalidExponent(format!("atomic mass needs 0 < p <= 1, got {p}")));
    }
    Ok(mu.atoms.iter().fold(T::zero(), |s, &(_, a)| s + abs(a).powf(p)))
}

/// `‖(Id ⊗ M_φ) x‖ / ‖x‖` in `L^e(tr ⊗ τ)`, with `φ` the symbol of `μ` on the spectrum of `x`.
///
/// Only cyclic groups are accepted, where both norms are exact.
pub fn atomic_action_ratio<T: Real>(mu: &AtomicMeasure<T>, x: &FourierSeries<T>, e: &Exponent<T>) -> Result<T> {
    if !x.group().is_finite() {
        return Err(Error::InvalidInput("atomic action ratios need a cyclic group".into()));
    }
    let phi = atomic_symbol(mu, x.group(), &x.spectrum())?;
    let y = fourier_apply(&phi, x)?;
    let den = lp_group_norm(x, e, &GroupWindow::Full)?;
    if den == T::zero() {
        return Err(Error::InvalidInput("test element vanishes".into()));
    }
    Ok(lp_group_norm(&y, e, &GroupWindow::Full)? / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c, cr};

    #[test]
    fn schur_apply_examples() {
        let one = SchurSymbol::<f64>::constant(Support::full(2, 3), c(1., 0.));
        let a = CMatrix::from_real_rows(&[&[1., 2., 3.], &[4., 5., 6.]]).unwrap();
        assert_eq!(schur_apply(&one, &a).unwrap(), a);
        let two = SchurSymbol::<f64>::new(1, 1, &[((0, 0), c(2., 0.))]).unwrap();
        let out = schur_apply(&two, &CMatrix::from_real_rows(&[&[3.]]).unwrap()).unwrap();
        assert_eq!(out.get(0, 0), c(6., 0.));
        let upper = SchurSymbol::<f64>::new(2, 2, &[((0, 0), c(1., 0.)), ((0, 1), c(1., 0.)), ((1, 1), c(1., 0.))])
            .unwrap();
        let a = CMatrix::from_real_rows(&[&[1., 2.], &[3., 4.]]).unwrap();
        assert_eq!(schur_apply(&upper, &a), Err(Error::OffSupport { row: 1, col: 0 }));
        let t = schur_apply_truncating(&upper, &a).unwrap();
        assert_eq!(t.get(1, 0), c(0., 0.));
    }

    #[test]
    fn fourier_apply_examples() {
        let g = GroupModel::integers(8);
        let dom = g.interval(-1, 1);
        let sgn = FourierSymbol::<f64>::from_fn(g, &dom, |k| cr(if k.value() >= 0 { 1.0 } else { -1.0 })).unwrap();
        let x = FourierSeries::scalar(g, &[(g.el(-1), c(1., 0.)), (g.el(0), c(1., 0.)), (g.el(1), c(1., 0.))])
            .unwrap();
        let y = fourier_apply(&sgn, &x).unwrap();
        assert_eq!(y.scalar_coeff(&g.el(-1)), c(-1., 0.));
        assert_eq!(y.scalar_coeff(&g.el(0)), c(1., 0.));
        let ind = FourierSymbol::<f64>::indicator(g, &dom).unwrap();
        assert_eq!(fourier_apply(&ind, &x).unwrap(), x);
        let narrow = FourierSymbol::<f64>::indicator(g, &[g.el(0)]).unwrap();
        assert!(matches!(fourier_apply(&narrow, &x), Err(Error::SpectrumEscape(_))));
    }

    #[test]
    fn toeplitz_examples() {
        let g = GroupModel::integers(8);
        let phi = FourierSymbol::<f64>::indicator(g, &[g.el(0)]).unwrap();
        let t = toeplitz_transfer(&phi, &g.interval(0, 2)).unwrap();
        assert_eq!(t.support().pairs(), &[(0, 0), (1, 1), (2, 2)]);

        let n = 5;
        let dom = g.interval(-(n - 1), n - 1);
        let sgn = FourierSymbol::<f64>::from_fn(g, &dom, |k| cr(if k.value() >= 0 { 1.0 } else { -1.0 })).unwrap();
        let h = toeplitz_transfer(&sgn, &g.interval(1, n)).unwrap();
        for i in 0..n as usize {
            for j in 0..n as usize {
                let expect = if i >= j { 1.0 } else { -1.0 };
                assert_eq!(h.value(i, j), Some(cr(expect)));
            }
        }

        let c4 = GroupModel::cyclic(4).unwrap();
        let phi = FourierSymbol::<f64>::from_fn(c4, &c4.elements(), |k| c(k.value() as f64, 1.0)).unwrap();
        let t = toeplitz_transfer(&phi, &c4.elements()).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                assert_eq!(t.value(r, col).unwrap().re, ((r as i64 - col as i64).rem_euclid(4)) as f64);
            }
        }
    }

    #[test]
    fn grid_examples() {
        let g = GroupModel::integers(8);
        let phi = FourierSymbol::<f64>::from_fn(g, &[g.el(0)], |_| c(0.5, 0.5)).unwrap();
        let s = grid_transfer(&phi, &[g.el(0)], &[g.el(0)]).unwrap();
        assert_eq!(s.value(0, 0), Some(c(0.5, 0.5)));

        let rows = [g.el(0), g.el(1), g.el(2)];
        let cols = [g.el(0), g.el(3), g.el(6)];
        let mut sums = BTreeSet::new();
        let mut upper = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            for (j, cc) in cols.iter().enumerate() {
                let s = g.compose(r, cc);
                assert!(sums.insert(s));
                if j >= i {
                    upper.push(s);
                }
            }
        }
        let phi = FourierSymbol::<f64>::indicator(g, &upper).unwrap();
        let s = grid_transfer(&phi, &rows, &cols).unwrap();
        let expect: Vec<(usize, usize)> = (0..3).flat_map(|i| (i..3).map(move |j| (i, j))).collect();
        assert_eq!(s.support().pairs(), expect.as_slice());

        let phi = FourierSymbol::<f64>::indicator(g, &[g.el(1)]).unwrap();
        assert!(grid_transfer(&phi, &[g.el(0)], &[g.el(0)]).unwrap().support().is_empty());
    }

    #[test]
    fn amplify_examples() {
        let rho = SchurSymbol::<f64>::new(2, 2, &[((0, 0), c(1., 0.)), ((1, 0), c(-2., 1.))]).unwrap();
        assert_eq!(amplify(&rho, 1).unwrap(), rho);
        let w = SchurSymbol::<f64>::new(1, 1, &[((0, 0), c(3., -1.))]).unwrap();
        let a = amplify(&w, 2).unwrap();
        assert!(a.support().is_full());
        assert_eq!(a.is_constant(), Some(c(3., -1.)));
        let h = SchurSymbol::<f64>::full_fn(2, 2, |i, j| cr(if i >= j { 1.0 } else { -1.0 })).unwrap();
        let a = amplify(&h, 2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a.value(i, j), h.value(i / 2, j / 2));
            }
        }
    }

    #[test]
    fn amplification_acts_blockwise() {
        let mut rng = crate::random::rng_for(11, 0);
        let rho = SchurSymbol::dense(&crate::random::gaussian_matrix::<f64>(3, 2, &mut rng));
        let blocks: Vec<_> = (0..3).map(|_| crate::random::gaussian_matrix::<f64>(3, 2, &mut rng)).collect();
        let x = embed_block_diagonal(&blocks).unwrap();
        let y = schur_apply(&amplify(&rho, 3).unwrap(), &x).unwrap();
        for (a, b) in blocks.iter().enumerate() {
            let got = extract_block(&y, 3, a).unwrap();
            assert!(got.max_abs_diff(&schur_apply(&rho, b).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn atomic_examples() {
        let g = GroupModel::integers(16);
        let dom = g.interval(-5, 5);
        let mu = AtomicMeasure::new(vec![(0.0, c(1., 0.))]).unwrap();
        let phi = atomic_symbol(&mu, &g, &dom).unwrap();
        assert!(phi.values().values().all(|z| (*z - c(1., 0.)).norm() < 1e-15));
        let mu = AtomicMeasure::<f64>::new(vec![(0.7, c(1., 0.))]).unwrap();
        let phi = atomic_symbol(&mu, &g, &dom).unwrap();
        assert!(phi.values().values().all(|z| (z.norm() - 1.0).abs() < 1e-14));
        let mu = AtomicMeasure::new(vec![(0.0, c(0.5, 0.)), (std::f64::consts::PI, c(0.5, 0.))]).unwrap();
        let phi = atomic_symbol(&mu, &g, &dom).unwrap();
        for (k, z) in phi.values() {
            let expect = (1.0 + (-1f64).powi(k.value() as i32)) / 2.0;
            assert!((z - c(expect, 0.)).norm() < 1e-14);
        }
        assert!(AtomicMeasure::new(vec![(0.0, c(1., 0.)), (2.0 * std::f64::consts::PI, c(1., 0.))]).is_err());
        let c5 = GroupModel::cyclic(5).unwrap();
        assert!(atomic_symbol(&AtomicMeasure::new(vec![(0.3, c(1., 0.))]).unwrap(), &c5, &c5.elements()).is_err());
    }

    #[test]
    fn atomic_mass_examples() {
        let one = AtomicMeasure::<f64>::new(vec![(1.0, c(1., 0.))]).unwrap();
        assert!((atomic_lp_mass(&one, 0.3).unwrap() - 1.0).abs() < 1e-15);
        let two = AtomicMeasure::new(vec![(0.0, c(0.5, 0.)), (1.0, c(0.5, 0.))]).unwrap();
        assert!((atomic_lp_mass(&two, 0.5).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(atomic_lp_mass(&AtomicMeasure::<f64>::new(vec![]).unwrap(), 0.5).unwrap(), 0.0);
        assert!(atomic_lp_mass(&one, 1.5).is_err());
    }

    #[test]
    fn json_round_trip() {
        let rho = SchurSymbol::<f64>::new(2, 3, &[((0, 2), c(1., -2.)), ((1, 0), c(0.5, 0.))]).unwrap();
        let s = serde_json::to_string(&rho.to_json()).unwrap();
        assert_eq!(s, r#"{"rows":2,"cols":3,"entries":[[0,2,1.0,-2.0],[1,0,0.5,0.0]]}"#);
        let back = SchurSymbol::<f64>::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, rho);
        let g = GroupModel::cyclic(4).unwrap();
        let phi = FourierSymbol::<f64>::from_fn(g, &g.elements(), |k| c(k.value() as f64, 0.)).unwrap();
        let s = serde_json::to_string(&phi.to_json()).unwrap();
        let back = FourierSymbol::<f64>::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, phi);
    }

    #[test]
    fn support_rejects_duplicates() {
        assert!(Support::new(2, 2, [(0, 0), (0, 0)]).is_err());
        assert!(Support::new(2, 2, [(2, 0)]).is_err());
    }

    #[test]
    fn atomic_action_examples() {
        use crate::random::{gaussian_series, rng_for};
        let g = GroupModel::cyclic(8).unwrap();
        let mut rng = rng_for(3, 0);
        let x = gaussian_series::<f64>(g, &g.elements(), 2, &mut rng).unwrap();
        let half = Exponent::p(0.5).unwrap();
        let quarter_turn = std::f64::consts::FRAC_PI_2;
        let one = AtomicMeasure::new(vec![(quarter_turn, c(0., 1.))]).unwrap();
        assert!((atomic_action_ratio(&one, &x, &half).unwrap() - 1.0).abs() < 1e-12);
        let two = AtomicMeasure::new(vec![(0.0, c(0.25, 0.)), (quarter_turn, c(0.25, 0.))]).unwrap();
        assert!((atomic_lp_mass(&two, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(atomic_action_ratio(&two, &x, &half).unwrap() <= 1.0 + 1e-12);
        let z = GroupModel::integers(4);
        let y = FourierSeries::<f64>::lambda(z, z.el(1)).unwrap();
        assert!(atomic_action_ratio(&one, &y, &half).is_err());
    }
}
