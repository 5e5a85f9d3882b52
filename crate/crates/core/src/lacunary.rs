//! Combinatorial gadgets: product-distinct grid selection, transfer lower bounds for
//! unconditional constants, and skipped block sums of approximating multiplier sequences.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupalg::{Element, FourierSeries, GroupKind, GroupModel};
use crate::multiplier::{fourier_apply, grid_transfer, FourierSymbol, SchurSymbol, Support};
use crate::normest::{schur_multiplier_norm, schur_ratio, unconditional_constant, AscentOptions, NormEstimate, SignMode, Witness};
use crate::scalar::cr;
use crate::schatten::Exponent;

/// Rows `r_1..r_n` and columns `c_1..c_n` whose `n²` products are pairwise distinct.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumsetSelection {
    pub group: GroupModel,
    pub rows: Vec<Element>,
    pub cols: Vec<Element>,
    /// Column candidates examined by the greedy pass.
    pub inspected: usize,
}

impl SumsetSelection {
    pub fn products(&self) -> Vec<Element> {
        self.rows.iter().flat_map(|r| self.cols.iter().map(move |c| self.group.compose(r, c))).collect()
    }

    /// Exhaustive pairwise comparison of the products.
    pub fn verify(&self) -> bool {
        let p = self.products();
        (0..p.len()).all(|i| (i + 1..p.len()).all(|j| p[i] != p[j]))
    }
}

/// Takes the first `n` distinct rows, then scans `cols` keeping each candidate whose products
/// with the rows avoid all products chosen so far.
///
/// Each kept column excludes at most `n(n-1) + 1` later candidates, so when `cols` has at
/// least `n³` distinct entries the scan succeeds within the first `n³` of them.
pub fn greedy_sumset_select(group: &GroupModel, rows: &[Element], cols: &[Element], n: usize) -> Result<SumsetSelection> {
    if n == 0 {
        return Err(Error::InvalidInput("selection size must be positive".into()));
    }
    let mut r_sel: Vec<Element> = Vec::with_capacity(n);
    for r in rows {
        group.check(r)?;
        if !r_sel.contains(r) {
            r_sel.push(*r);
            if r_sel.len() == n {
                break;
            }
        }
    }
    if r_sel.len() < n {
        return Err(Error::Exhausted(format!("only {} distinct rows available, {n} needed", r_sel.len())));
    }
    let mut taken: BTreeSet<Element> = BTreeSet::new();
    let mut c_sel = Vec::with_capacity(n);
    let mut inspected = 0;
    for c in cols {
        if c_sel.len() == n {
            break;
        }
        group.check(c)?;
        inspected += 1;
        let prods: Vec<Element> = r_sel.iter().map(|r| group.compose(r, c)).collect();
        if prods.iter().any(|p| taken.contains(p)) {
            continue;
        }
        taken.extend(prods);
        c_sel.push(*c);
    }
    if c_sel.len() < n {
        return Err(Error::Exhausted(format!("column stream exhausted after {inspected} candidates")));
    }
    let sel = SumsetSelection { group: *group, rows: r_sel, cols: c_sel, inspected };
    debug_assert!(sel.verify());
    Ok(sel)
}

/// `n^{|1/2 - 1/p|}`.
pub fn grid_analytic_bound(n: usize, p: f64) -> f64 {
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    (n as f64).powf((0.5 - inv).abs())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SumsetBound {
    pub n: usize,
    pub p: f64,
    pub analytic: f64,
    /// Unimodular pattern search on the full `n × n` grid.
    pub grid: NormEstimate<f64>,
    /// The winning pattern moved to the group by `φ(r_i c_j) = ε_ij`.
    pub symbol: FourierSymbol<f64>,
    /// Ratio of the grid transfer of `symbol` on the grid witness.
    pub transferred: f64,
}

/// Worst unimodular pattern on the grid, transferred to a Fourier symbol on the products.
pub fn sumset_lower_bound(sel: &SumsetSelection, p: f64, opts: &AscentOptions) -> Result<SumsetBound> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(format!("grid bound needs p ≥ 1, got {p}")));
    }
    let n = sel.rows.len();
    let e = Exponent::p(p)?;
    let grid = unconditional_constant(&Support::full(n, n), &e, SignMode::Unimodular, opts)?;
    let (signs, input) = match &grid.witness {
        Witness::Pattern { signs, input } => (signs.clone(), input.clone()),
        _ => unreachable!("unconditional constants carry a pattern witness"),
    };
    let mut values = std::collections::BTreeMap::new();
    for (i, r) in sel.rows.iter().enumerate() {
        for (j, c) in sel.cols.iter().enumerate() {
            values.insert(sel.group.compose(r, c), signs.value(i, j).unwrap_or_else(|| cr(1.0)));
        }
    }
    let symbol = FourierSymbol::new(sel.group, values)?;
    let back = grid_transfer(&symbol, &sel.rows, &sel.cols)?;
    let transferred = schur_ratio(&back, &input, &e)?;
    Ok(SumsetBound { n, p, analytic: grid_analytic_bound(n, p), grid, symbol, transferred })
}

/// Shipped approximating sequences `(T_k)` of Fourier multipliers converging pointwise to 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    /// `σ_k(j) = max(0, 1 - |j|/(k+1))` on ℤ.
    Fejer,
    /// Indicator of `{|j| ≤ k}`; on ℤ_N it is `1` from `k = ⌊N/2⌋` on.
    Truncation,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximatingSequence {
    pub group: GroupModel,
    pub kind: SequenceKind,
}

impl ApproximatingSequence {
    pub fn fejer(group: GroupModel) -> Result<Self> {
        match group.kind() {
            GroupKind::Lattice { dim: 1, .. } => Ok(Self { group, kind: SequenceKind::Fejer }),
            _ => Err(Error::InvalidInput("Fejér means are shipped for ℤ only".into())),
        }
    }

    pub fn truncation(group: GroupModel) -> Result<Self> {
        if group.dim() != 1 {
            return Err(Error::InvalidInput("truncations are shipped for ℤ and ℤ_N only".into()));
        }
        Ok(Self { group, kind: SequenceKind::Truncation })
    }

    /// `|γ|` on ℤ, cyclic distance to 0 on ℤ_N.
    fn dist(&self, g: &Element) -> u64 {
        let v = g.value();
        match self.group.kind() {
            GroupKind::Cyclic { n } => {
                let v = v.rem_euclid(n as i64) as u64;
                v.min(n - v)
            }
            GroupKind::Lattice { .. } => v.unsigned_abs(),
        }
    }

    /// Last index, if the sequence is finite.
    pub fn last_index(&self) -> Option<u64> {
        match (self.kind, self.group.kind()) {
            (SequenceKind::Truncation, GroupKind::Cyclic { n }) => Some(n / 2),
            _ => None,
        }
    }

    pub fn value(&self, k: u64, g: &Element) -> f64 {
        let d = self.dist(g);
        match self.kind {
            SequenceKind::Fejer if d > k => 0.0,
            SequenceKind::Fejer => 1.0 - d as f64 / (k as f64 + 1.0),
            SequenceKind::Truncation => f64::from(d <= k),
        }
    }

    /// `T_k` is supported in `{|j| ≤ k}`.
    pub fn support_radius(&self, k: u64) -> u64 {
        k
    }

    /// `T_k` restricted to a finite domain.
    pub fn symbol_on(&self, k: u64, domain: &[Element]) -> Result<FourierSymbol<f64>> {
        FourierSymbol::from_fn(self.group, domain, |g| cr(self.value(k, g)))
    }

    /// Smallest `k ≥ from` with `|T_k(γ) - 1| < δ` on all of `set`.
    fn first_close(&self, from: u64, set: &[Element], delta: f64) -> Result<u64> {
        let m = set.iter().map(|g| self.dist(g)).max().unwrap_or(0);
        if self.kind == SequenceKind::Fejer && m as f64 / delta > 2f64.powi(52) {
            return Err(Error::Exhausted(format!("Fejér index beyond 2^52 needed (|γ| up to {m}, δ = {delta})")));
        }
        let mut k = match self.kind {
            SequenceKind::Fejer => from.max(((m as f64 / delta).floor() as u64).saturating_sub(2)),
            SequenceKind::Truncation => from.max(m),
        };
        // Guard against rounding in the closed form.
        for _ in 0..64 {
            if let Some(last) = self.last_index() {
                if k > last {
                    return Err(Error::Exhausted("approximating sequence ends before converging".into()));
                }
            }
            if set.iter().all(|g| (self.value(k, g) - 1.0).abs() < delta) {
                return Ok(k);
            }
            k += 1;
        }
        Err(Error::Exhausted("approximating sequence does not converge on the requested set".into()))
    }
}

/// Candidate source for rows or columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementStream {
    List(Vec<Element>),
    /// `0, 1, 2, …`, searched in closed form.
    Naturals,
}

impl ElementStream {
    /// First element after position `after` whose products with every element of `others`
    /// lie outside `{|j| ≤ radius}`; returns it with its position.
    fn next_outside(
        &self,
        seq: &ApproximatingSequence,
        after: Option<u64>,
        others: &[Element],
        radius: u64,
    ) -> Result<(u64, Element)> {
        let g = &seq.group;
        let ok = |c: &Element| others.iter().all(|o| seq.dist(&g.compose(o, c)) > radius);
        match self {
            Self::List(v) => {
                let start = after.map_or(0, |a| a as usize + 1);
                v.iter()
                    .enumerate()
                    .skip(start)
                    .find(|(_, c)| ok(c))
                    .map(|(i, c)| (i as u64, *c))
                    .ok_or_else(|| Error::Exhausted("element stream exhausted".into()))
            }
            Self::Naturals => {
                let start = after.map_or(0, |a| a + 1);
                let min_other = others.iter().map(|o| o.value()).min().unwrap_or(0);
                let mut v = if others.is_empty() { start } else { start.max((radius as i64 + 1 - min_other).max(0) as u64) };
                for _ in 0..1024 {
                    let c = g.elem(&[i64::try_from(v).map_err(|_| Error::Exhausted("element overflow".into()))?])?;
                    if c.value() as u64 == v && ok(&c) {
                        return Ok((v, c));
                    }
                    v += 1;
                }
                Err(Error::Exhausted("no admissible natural element (group too small)".into()))
            }
        }
    }
}

/// Result of the skipped-block construction
/// `U_n = T_{l_1} + (T_{l_2} - T_{k_2}) + … + (T_{l_n} - T_{k_n})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedBlocks {
    /// `l_1, k_2, l_2, …, k_n, l_n` (strictly increasing).
    pub indices: Vec<u64>,
    pub rows: Vec<Element>,
    pub cols: Vec<Element>,
    /// `|U_n(r_i c_j) - 1|` for `i ≤ j`, `|U_n(r_i c_j)|` for `j < i`.
    pub residuals: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub delta: f64,
    pub attempts: usize,
    /// Conditions rechecked (two per grid entry: pointwise and through the multiplier).
    pub checks: usize,
    pub passed: bool,
}

impl SkippedBlocks {
    /// Coefficient of `U_n` at `γ`.
    pub fn value(&self, seq: &ApproximatingSequence, g: &Element) -> f64 {
        block_value(seq, &self.indices, g)
    }
}

fn block_value(seq: &ApproximatingSequence, indices: &[u64], g: &Element) -> f64 {
    let mut u = seq.value(indices[0], g);
    for pair in indices[1..].chunks(2) {
        u += seq.value(pair[1], g) - seq.value(pair[0], g);
    }
    u
}

/// Builds `U_n` together with rows and columns on which it acts, up to `ε`, as the triangular
/// truncation: `U_n(r_i c_j) ≈ 1` for `i ≤ j` and `≈ 0` for `j < i`.
///
/// Every step uses the tolerance `δ = ε/4`; if the final recheck fails the construction is
/// repeated with `δ` halved.
pub fn skipped_block_sums(
    seq: &ApproximatingSequence,
    rows: &ElementStream,
    cols: &ElementStream,
    n: usize,
    epsilon: f64,
) -> Result<SkippedBlocks> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput("ε must lie in (0, 1)".into()));
    }
    let mut delta = epsilon / 4.0;
    for attempt in 1..=12 {
        let mut out = build_blocks(seq, rows, cols, n, delta)?;
        out.epsilon = epsilon;
        out.attempts = attempt;
        recheck(seq, &mut out)?;
        if out.passed {
            return Ok(out);
        }
        delta /= 2.0;
    }
    Err(Error::Exhausted("recheck failed for every tolerance in the schedule".into()))
}

fn build_blocks(
    seq: &ApproximatingSequence,
    row_stream: &ElementStream,
    col_stream: &ElementStream,
    n: usize,
    delta: f64,
) -> Result<SkippedBlocks> {
    let g = seq.group;
    let prods = |rs: &[Element], cs: &[Element]| -> Vec<Element> {
        rs.iter().flat_map(|r| cs.iter().map(move |c| g.compose(r, c))).collect()
    };
    // Step 1: the first row and column, and l_1.
    let (mut rpos, r1) = row_stream.next_outside(seq, None, &[], 0)?;
    let (mut cpos, c1) = col_stream.next_outside(seq, None, &[], 0)?;
    let mut rows = vec![r1];
    let mut cols = vec![c1];
    let mut indices = vec![seq.first_close(0, &prods(&rows, &cols), delta)?];
    for _ in 1..n {
        let radius = seq.support_radius(*indices.last().expect("nonempty"));
        // New row: U_m vanishes on its products with the old columns.
        let (rp, r) = row_stream.next_outside(seq, Some(rpos), &cols, radius)?;
        rpos = rp;
        rows.push(r);
        // k: T_k ≈ 1 on every product seen so far, so T_l - T_k leaves them almost unchanged.
        let k = seq.first_close(indices.last().expect("nonempty") + 1, &prods(&rows, &cols), delta)?;
        // New column: all its products lie outside the supports of U_m and T_k.
        let (cp, c) = col_stream.next_outside(seq, Some(cpos), &rows, seq.support_radius(k).max(radius))?;
        cpos = cp;
        cols.push(c);
        // l: T_l ≈ 1 on all products, so the new column is ≈ 1 on every row.
        let l = seq.first_close(k + 1, &prods(&rows, &cols), delta)?;
        indices.push(k);
        indices.push(l);
    }
    Ok(SkippedBlocks {
        indices,
        rows,
        cols,
        residuals: vec![],
        epsilon: 0.0,
        delta,
        attempts: 0,
        checks: 0,
        passed: false,
    })
}

/// Recomputes every grid condition pointwise and by applying the assembled multiplier.
fn recheck(seq: &ApproximatingSequence, out: &mut SkippedBlocks) -> Result<()> {
    let g = seq.group;
    let n = out.rows.len();
    let domain: Vec<Element> = out
        .rows
        .iter()
        .flat_map(|r| out.cols.iter().map(move |c| g.compose(r, c)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut values = std::collections::BTreeMap::new();
    for d in &domain {
        values.insert(*d, cr(block_value(seq, &out.indices, d)));
    }
    let u = FourierSymbol::new(g, values)?;
    let mut residuals = vec![vec![0.0; n]; n];
    let mut passed = out.indices.windows(2).all(|w| w[0] < w[1]);
    let mut checks = 0;
    for i in 0..n {
        for j in 0..n {
            let gamma = g.compose(&out.rows[i], &out.cols[j]);
            let target = if i <= j { 1.0 } else { 0.0 };
            let pointwise = (block_value(seq, &out.indices, &gamma) - target).abs();
            let image = fourier_apply(&u, &FourierSeries::lambda(g, gamma)?)?;
            let through = (image.scalar_coeff(&gamma) - cr(target)).norm();
            residuals[i][j] = pointwise.max(through);
            passed &= pointwise < out.epsilon;
            passed &= through < out.epsilon;
            checks += 2;
        }
    }
    out.residuals = residuals;
    out.checks = checks;
    out.passed = passed;
    Ok(())
}

/// Grid transfer of a skipped block sum compared with the triangular truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub n: usize,
    pub p: f64,
    pub epsilon: f64,
    pub indices: Vec<u64>,
    /// `max_ij |ρ_ij - τ_ij|` between the transferred symbol and the truncation `τ = [i ≤ j]`.
    pub max_deviation: f64,
    /// `ε n²`, a bound for the multiplier norm of `ρ - τ`.
    pub distance_bound: f64,
    pub truncation_lower: f64,
    pub transferred_lower: f64,
    /// `csc(π/p)`.
    pub target: f64,
}

/// Exhibits the `n × n` triangular truncation inside a block sum of truncation multipliers on a
/// large cyclic group and estimates both multiplier norms on `S^p`.
pub fn riesz_obstruction_demo(n: usize, p: f64, epsilon: f64, opts: &AscentOptions) -> Result<ObstructionReport> {
    if !(p > 1.0) || p.is_infinite() {
        return Err(Error::InvalidExponent(format!("p must lie in (1, ∞), got {p}")));
    }
    let group = GroupModel::cyclic(1u64 << 62)?;
    let seq = ApproximatingSequence::truncation(group)?;
    let blocks = skipped_block_sums(&seq, &ElementStream::Naturals, &ElementStream::Naturals, n, epsilon)?;
    let rho = SchurSymbol::full_fn(n, n, |i, j| cr(blocks.value(&seq, &group.compose(&blocks.rows[i], &blocks.cols[j]))))?;
    let tau = SchurSymbol::full_fn(n, n, |i, j| cr(if i <= j { 1.0 } else { 0.0 }))?;
    let max_deviation = rho.to_matrix().max_abs_diff(&tau.to_matrix());
    let e = Exponent::p(p)?;
    let truncation_lower = schur_multiplier_norm(&tau, &e, opts)?.lower;
    let transferred_lower = schur_multiplier_norm(&rho, &e, opts)?.lower;
    Ok(ObstructionReport {
        n,
        p,
        epsilon,
        indices: blocks.indices,
        max_deviation,
        distance_bound: epsilon * (n * n) as f64,
        truncation_lower,
        transferred_lower,
        target: 1.0 / (PI / p).sin(),
    })
}
