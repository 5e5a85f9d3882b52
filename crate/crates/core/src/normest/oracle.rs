//! Exhaustive grid search for supports with at most four entries.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::multiplier::SchurSymbol;
use crate::scalar::{cis, cr, Real};
use crate::schatten::{CMatrix, Exponent};

use super::schur_ratio;

/// Largest support accepted by [`brute_oracle_norm`].
pub const ORACLE_LIMIT: usize = 4;

/// Maximises `‖ρ∘X‖ / ‖X‖` over inputs whose entries lie on the polar grid
/// `(j/r)·e^{2πik/r}`, `0 ≤ j, k ≤ r`.
///
/// By homogeneity one entry can be fixed to `1`; every other entry ranges over the grid
/// with modulus at most one. The result is a lower bound that converges to the norm as the
/// resolution grows. Returns the value and the maximising input.
pub fn brute_oracle_norm<T: Real>(
    rho: &SchurSymbol<T>,
    e: &Exponent<T>,
    resolution: usize,
) -> Result<(T, CMatrix<T>)> {
    let pairs = rho.support().pairs().to_vec();
    let d = pairs.len();
    if d > ORACLE_LIMIT {
        return Err(Error::SupportTooLarge { size: d, limit: ORACLE_LIMIT });
    }
    if resolution == 0 {
        return Err(Error::InvalidInput("resolution must be positive".into()));
    }
    let (nr, nc) = (rho.nrows(), rho.ncols());
    if d == 0 {
        return Ok((T::zero(), CMatrix::zeros(nr, nc)));
    }
    let r = resolution;
    let mut grid: Vec<Complex<T>> = vec![Complex::new(T::zero(), T::zero())];
    for j in 1..=r {
        for k in 0..r {
            let m = T::lit(j as f64 / r as f64);
            grid.push(cis(T::lit(2.0 * std::f64::consts::PI * k as f64 / r as f64)) * cr(m));
        }
    }
    let g = grid.len();
    let free = d - 1;
    let per_anchor = g.pow(free as u32);
    let build = |anchor: usize, mut idx: usize| {
        let mut x = nalgebra::DMatrix::zeros(nr, nc);
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if k == anchor {
                x[(a, b)] = cr(T::one());
            } else {
                x[(a, b)] = grid[idx % g];
                idx /= g;
            }
        }
        CMatrix::wrap(x)
    };
    let best = (0..d * per_anchor)
        .into_par_iter()
        .map(|t| {
            let x = build(t / per_anchor, t % per_anchor);
            schur_ratio(rho, &x, e).map(|v| (v, t))
        })
        .try_reduce(|| (T::zero(), 0), |a, b| Ok(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a }))?;
    Ok((best.0, build(best.1 / per_anchor, best.1 % per_anchor)))
}
