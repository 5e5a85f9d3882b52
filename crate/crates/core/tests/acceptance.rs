//! Exit criteria of the laboratory, one PASS/FAIL line each. Runs as a plain binary
//! (`harness = false`) and exits nonzero when any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex;

use multlab::classical::{cotlar_recursion, riesz_l4_formula, ClassicalSymbol};
use multlab::extension::{extension_min_eigenvalue, ratio_family_spec};
use multlab::groupalg::{lp_group_norm, FolnerNet, FourierSeries, GroupModel, GroupWindow, ReiterMean};
use multlab::multiplier::{atomic_action_ratio, SchurSymbol, Support};
use multlab::random::{gaussian_series, gaussian_symbol, random_atomic_measure, rng_for};
use multlab::schatten::Exponent;
use multlab::szego::{empirical_moments, hermitian_shift, szego_convergence_report};
use multlab::{
    brute_oracle_norm, convergence_scan, extend_rank_one, random_rank_one_spec, reiter_embedding_norm,
    skipped_block_sums, transfer_inequality_check, unconditional_constant, verify_certificate, ApproximatingSequence,
    AscentOptions, ElementStream, SignMode,
};

type Outcome = Result<(bool, String), multlab::Error>;

const FIVE_MINUTES: Duration = Duration::from_secs(300);

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn hilbert_s4() -> Outcome {
    let opts = AscentOptions::default();
    let start = Instant::now();
    let rows = convergence_scan(ClassicalSymbol::Hilbert, 4.0, &[4, 8, 16, 32], &opts)?;
    let took = start.elapsed();
    let lower = rows.last().expect("nonempty scan").lower;
    let ceiling = 1.0 + 2f64.sqrt();
    let at_two = convergence_scan(ClassicalSymbol::Hilbert, 2.0, &[4, 8, 16, 32], &opts)?;
    let two_ok = at_two.iter().all(|r| r.lower == 1.0);
    let ok = lower >= 2.2 && lower <= ceiling + 1e-6 && took <= FIVE_MINUTES && two_ok;
    Ok((ok, format!("n=32 lower {lower:.6} (need >= 2.2, <= {ceiling:.6}), p=2 exact: {two_ok}, {}", secs(took))))
}

fn riesz_s4() -> Outcome {
    let opts = AscentOptions::default();
    let start = Instant::now();
    let rows = convergence_scan(ClassicalSymbol::Riesz, 4.0, &[4, 8, 16, 32], &opts)?;
    let took = start.elapsed();
    let lower = rows.last().expect("nonempty scan").lower;
    let ceiling = riesz_l4_formula();
    let ok = lower >= 1.30 && lower <= ceiling + 1e-6 && took <= FIVE_MINUTES;
    Ok((ok, format!("n=32 lower {lower:.6} (need >= 1.30, <= {ceiling:.6}), {}", secs(took))))
}

fn cotlar() -> Outcome {
    let mut worst = 0.0f64;
    for k in 1..=20 {
        let u = cotlar_recursion::<f64>(k)?;
        let trig = 1.0 / (PI / 2f64.powi(k as i32 + 1)).tan();
        worst = worst.max((u - trig).abs() / trig);
    }
    Ok((worst <= 1e-12, format!("max relative error {worst:.2e} over k <= 20")))
}

/// Closed walks of length `k` on ℤ with steps ±1, by dynamic programming over positions.
fn closed_walks(k: usize) -> f64 {
    let mut counts = vec![0.0f64; 2 * k + 1];
    counts[k] = 1.0;
    for _ in 0..k {
        let mut next = vec![0.0; 2 * k + 1];
        for i in 0..counts.len() {
            if i > 0 {
                next[i - 1] += counts[i];
            }
            if i + 1 < counts.len() {
                next[i + 1] += counts[i];
            }
        }
        counts = next;
    }
    counts[k]
}

fn szego_moments() -> Outcome {
    let n = 256usize;
    let g = GroupModel::integers(n as i64);
    let one = DMatrix::from_element(1, 1, Complex::new(1.0, 0.0));
    let y = hermitian_shift::<f64>(g, &one)?;
    let net = FolnerNet::new(g, vec![g.interval(0, n as i64 - 1)])?;
    let orders = [1u32, 2, 4, 6];
    let emp = empirical_moments(&y, &net, &orders)?;
    let mut ok = true;
    let mut notes = Vec::new();
    for (i, &k) in orders.iter().enumerate() {
        let exact = closed_walks(k as usize);
        let err = (emp[0].scalar(i).re - exact).abs();
        let pass = if k == 1 { err == 0.0 } else { err <= 2.0 * k as f64 / n as f64 };
        ok &= pass;
        notes.push(format!("k={k} exact {exact} err {err:.4}{}", if pass { "" } else { " (over)" }));
    }
    // Block coefficient e_12: fit C on the smaller windows, then test the largest one.
    let mut a = DMatrix::zeros(2, 2);
    a[(0, 1)] = Complex::new(1.0, 0.0);
    let yb = hermitian_shift::<f64>(g, &a)?;
    let sizes = [16i64, 64, 256];
    let net = FolnerNet::new(g, sizes.iter().map(|&m| g.interval(0, m - 1)).collect())?;
    let rep = szego_convergence_report(&yb, &net, &orders)?;
    for &k in &orders {
        let rows: Vec<_> = rep.rows.iter().filter(|r| r.k == k).collect();
        let c = rows[..2].iter().fold(0.0f64, |c, r| c.max(r.abs_error * r.window as f64));
        let last = rows[2];
        ok &= c.is_finite() && last.abs_error <= c / last.window as f64 + 1e-12;
    }
    ok &= rep.constants_finite();
    notes.push(format!("block C = {:?}", rep.fitted_constants.iter().map(|(k, c)| (*k, *c)).collect::<Vec<_>>()));
    Ok((ok, notes.join(", ")))
}

fn rank_one_extension() -> Outcome {
    let mut failures = 0usize;
    let mut worst_excess = f64::NEG_INFINITY;
    for i in 0..200u64 {
        let spec = random_rank_one_spec(&mut rng_for(0, i), 6, 10)?;
        let cert = extend_rank_one(&spec)?;
        let rep = verify_certificate(&cert, 100, 1 + i)?;
        worst_excess = worst_excess.max(rep.ceiling_excess);
        let ok = rep.structural.support_deviation <= 1e-12
            && rep.structural.max_correction_norm <= 1.0 + 1e-12
            && rep.ceiling_excess <= 1e-8
            && rep.restriction_lower >= rep.bound - 1e-6;
        failures += usize::from(!ok);
    }
    let mut family_ok = true;
    let mut min_eig = f64::INFINITY;
    for n in 1..=12usize {
        // Increasing integers, so a_r · (1/a_c) is exact and the bound is exactly 1.
        let a: Vec<f64> = (1..=n).map(|j| (3 * j + n % 4) as f64).collect();
        let cert = extend_rank_one(&ratio_family_spec(&a)?)?;
        let e = extension_min_eigenvalue(&cert)?;
        min_eig = min_eig.min(e);
        family_ok &= e >= -1e-12 && cert.bound == 1.0;
    }
    Ok((
        failures == 0 && family_ok,
        format!("{failures}/200 random specs failed, worst ceiling excess {worst_excess:.2e}, ratio family min eigenvalue {min_eig:.3e}"),
    ))
}

fn transfer_inequality() -> Outcome {
    let opts = AscentOptions::default();
    let mut violations = 0usize;
    let mut hs_misses = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for n in [8u64, 16] {
        let g = GroupModel::cyclic(n)?;
        let els = g.elements();
        for p in [1.0, 2.0, 4.0] {
            let e = Exponent::p(p)?;
            for i in 0..50u64 {
                let phi = gaussian_symbol::<f64>(g, &els, &mut rng_for(7, n << 32 | (p as u64) << 20 | i))?;
                let rep = transfer_inequality_check(&phi, &e, &opts, None, 1e-6)?;
                worst = worst.max(rep.fourier.lower - rep.schur.lower);
                violations += usize::from(rep.fourier.lower > rep.schur.lower + 1e-6);
                if p == 2.0 {
                    let m = phi.max_abs();
                    let equal = (rep.fourier.lower - m).abs() <= 1e-10 && (rep.schur.lower - m).abs() <= 1e-10;
                    hs_misses += usize::from(!equal);
                }
            }
        }
    }
    Ok((
        violations == 0 && hs_misses == 0,
        format!("{violations} violations in 200, worst fourier - schur {worst:.2e}, {hs_misses} p=2 mismatches in 100"),
    ))
}

/// Best grid-oracle ratio over real sign patterns with the first entry fixed to +1.
fn sign_oracle(support: &Support, e: &Exponent<f64>, resolution: usize) -> Result<f64, multlab::Error> {
    let pairs = support.pairs();
    let mut best = 0.0f64;
    for mask in 0..1usize << (pairs.len() - 1) {
        let entries: Vec<_> = pairs
            .iter()
            .enumerate()
            .map(|(k, &rc)| (rc, Complex::new(if k > 0 && mask >> (k - 1) & 1 == 1 { -1.0 } else { 1.0 }, 0.0)))
            .collect();
        let rho = SchurSymbol::new(support.nrows(), support.ncols(), &entries)?;
        best = best.max(brute_oracle_norm(&rho, e, resolution)?.0);
    }
    Ok(best)
}

fn unconditional() -> Outcome {
    let opts = AscentOptions::default();
    let e = Exponent::<f64>::p(4.0)?;
    let target = 2f64.powf(0.25);
    let est = unconditional_constant(&Support::full(2, 2), &e, SignMode::Unimodular, &opts)?;
    let full_ok = (est.lower - target).abs() <= 1e-2 && est.lower <= target + 1e-6;
    let cells: Vec<(usize, usize)> = (0..2).flat_map(|r| (0..2).map(move |c| (r, c))).collect();
    let mut worst = 0.0f64;
    for mask in 1u32..16 {
        if mask.count_ones() > 3 {
            continue;
        }
        let pairs: Vec<_> = cells.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &rc)| rc).collect();
        let support = Support::new(2, 2, pairs)?;
        let asc = unconditional_constant(&support, &e, SignMode::RealSigns, &opts)?.lower;
        let oracle = sign_oracle(&support, &e, 8)?;
        worst = worst.max((asc - oracle).abs());
    }
    let oracle_ok = worst <= 1e-6;
    Ok((
        full_ok && oracle_ok,
        format!("2x2 unimodular {:.8} (target {target:.8}), max oracle disagreement {worst:.2e}", est.lower),
    ))
}

fn atomic_contractivity() -> Outcome {
    let p = 0.5;
    let e = Exponent::p(p)?;
    let g = GroupModel::cyclic(16)?;
    let els = g.elements();
    let (mut single, mut pair) = (0.0f64, 0.0f64);
    for t in 0..500u64 {
        let mut rng = rng_for(11, t);
        let x = gaussian_series::<f64>(g, &els, 2, &mut rng)?;
        let one = random_atomic_measure(16, 1, p, &mut rng)?;
        let two = random_atomic_measure(16, 2, p, &mut rng)?;
        single = single.max((atomic_action_ratio(&one, &x, &e)? - 1.0).abs());
        pair = pair.max(atomic_action_ratio(&two, &x, &e)?);
    }
    Ok((
        single <= 1e-10 && pair <= 1.0 + 1e-10,
        format!("single-atom deviation {single:.2e}, worst two-atom ratio {pair:.6}"),
    ))
}

fn skipped_blocks() -> Outcome {
    let start = Instant::now();
    let seq = ApproximatingSequence::fejer(GroupModel::integers(0))?;
    let sb = skipped_block_sums(&seq, &ElementStream::Naturals, &ElementStream::Naturals, 3, 0.1)?;
    let took = start.elapsed();
    // Independent recheck of the 9 grid entries against the triangular pattern.
    let g = seq.group;
    let mut recheck = true;
    for (i, r) in sb.rows.iter().enumerate() {
        for (j, c) in sb.cols.iter().enumerate() {
            let u = sb.value(&seq, &g.compose(r, c));
            let want = if i <= j { 1.0 } else { 0.0 };
            recheck &= (u - want).abs() <= 0.1;
        }
    }
    let ok = sb.passed && sb.checks == 18 && recheck && took <= Duration::from_secs(60);
    Ok((ok, format!("indices {:?}, {} rechecks, {}", sb.indices, sb.checks, secs(took))))
}

fn reiter_embedding() -> Outcome {
    let radius = 3i64;
    let g = GroupModel::integers(radius + 256);
    let shift = FourierSeries::<f64>::lambda(g, g.el(1))?;
    let mut unit_dev = 0.0f64;
    for n in [1i64, 2, 7, 16, 100, 256] {
        let mu = ReiterMean::uniform(&g.interval(0, n - 1))?;
        for p in [1.0, 2.0, 4.0] {
            unit_dev = unit_dev.max((reiter_embedding_norm(&shift, &mu, p)? - 1.0).abs());
        }
    }
    let spectrum = g.interval(-radius, radius);
    let mu = ReiterMean::uniform(&g.interval(0, 255))?;
    let mut gaps = Vec::new();
    for (i, p) in [1.0, 2.0, 4.0].into_iter().enumerate() {
        let x = gaussian_series::<f64>(g, &spectrum, 1, &mut rng_for(5, i as u64))?;
        let target = lp_group_norm(&x, &Exponent::p(p)?, &GroupWindow::Full)?;
        gaps.push((target - reiter_embedding_norm(&x, &mu, p)?).abs());
    }
    let ok = unit_dev <= 1e-12 && gaps.iter().all(|&d| d < 0.05);
    Ok((ok, format!("unit deviation {unit_dev:.2e}, gaps at 256 for p=1,2,4: {gaps:.4?}")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("hilbert transform on S^4", hilbert_s4),
        ("triangular projection on S^4", riesz_s4),
        ("cotangent recursion", cotlar),
        ("toeplitz moments", szego_moments),
        ("rank-one extension", rank_one_extension),
        ("transfer inequality", transfer_inequality),
        ("unconditional constant", unconditional),
        ("atomic contractivity below p = 1", atomic_contractivity),
        ("skipped block sums", skipped_blocks),
        ("reiter embedding", reiter_embedding),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!("criterion {:>2} {name}: {} ({detail})", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
