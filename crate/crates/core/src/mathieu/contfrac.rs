//! Continued-fraction characteristic values.
//!
//! Eliminating every coefficient except a central one turns the recurrence
//! into a scalar equation `F(a) = 0` with
//!
//! ```text
//! F(a) = (d_c - a) - e_{c-1}^2 U_{c-1}(a) - e_c^2 T_{c+1}(a),
//! T_j = 1 / (d_j - a - e_j^2 T_{j+1}),   U_j = 1 / (d_j - a - e_{j-1}^2 U_{j-1}).
//! ```
//!
//! `F` decreases strictly between its poles. The negative pivots of the same
//! elimination count the eigenvalues below `a`, so the root of the target
//! rank is bracketed by bisection on that count and refined by Newton steps.

use crate::error::{Error, Result};

use super::recurrence::Recurrence;

const MAX_ITER: usize = 400;

/// `F(a)`, `dF/da` and the number of eigenvalues below `a`, eliminating towards `c`.
fn eval(rec: &Recurrence, q: f64, a: f64, c: i64) -> (f64, f64, usize) {
    let depth = 30 + 2 * ((a.abs() + 4.0 * q.abs()).sqrt().ceil() as i64);
    let mut below = 0;
    let (mut t, mut dt) = (0.0_f64, 0.0_f64);
    for j in (c + 1..=c + depth).rev() {
        let e2 = rec.off(j, q).powi(2);
        let p = rec.diag(j, q) - a - e2 * t;
        below += usize::from(p < 0.0);
        t = 1.0 / p;
        dt = t * t * (1.0 + e2 * dt);
    }
    let e_up = rec.off(c, q).powi(2);
    let (mut u, mut du) = (0.0_f64, 0.0_f64);
    let bottom = rec.lowest_index().map_or(c - depth, |lo| lo.max(c - depth));
    for j in bottom..c {
        let e2 = if j > bottom { rec.off(j - 1, q).powi(2) } else { 0.0 };
        let p = rec.diag(j, q) - a - e2 * u;
        below += usize::from(p < 0.0);
        u = 1.0 / p;
        du = u * u * (1.0 + e2 * du);
    }
    let e_down = if c > bottom { rec.off(c - 1, q).powi(2) } else { 0.0 };
    let f = rec.diag(c, q) - a - e_down * u - e_up * t;
    let df = -1.0 - e_down * du - e_up * dt;
    below += usize::from(f < 0.0);
    (f, df, below)
}

/// Index whose diagonal lies closest to `a`.
fn central_index(rec: &Recurrence, q: f64, a: f64) -> i64 {
    let reach = 4 + 2 * (a.abs().sqrt().ceil() as i64);
    let t = rec.target();
    let lo = rec.lowest_index().map_or(t - reach, |l| l.max(t - reach));
    (lo..=t + reach)
        .min_by(|&i, &j| {
            let di = (rec.diag(i, q) - a).abs();
            let dj = (rec.diag(j, q) - a).abs();
            di.total_cmp(&dj)
        })
        .unwrap_or(t)
}

/// Characteristic value: the eigenvalue whose rank matches that of `nu^2` at `q = 0`.
pub(crate) fn characteristic_value(rec: &Recurrence, q: f64) -> Result<f64> {
    let centre = rec.diag(rec.target(), 0.0);
    if q == 0.0 {
        return Ok(centre);
    }
    let (wlo, whi) = rec.window(0);
    let rank = rec.rank_in(wlo, whi);
    let count = |a: f64| eval(rec, q, a, central_index(rec, q, a)).2;

    let mut width = 1.0 + 2.0 * q.abs();
    let (mut lo, mut hi) = (centre - width, centre + width);
    for _ in 0..200 {
        let lo_ok = count(lo) <= rank;
        let hi_ok = count(hi) > rank;
        if lo_ok && hi_ok {
            break;
        }
        width *= 2.0;
        if !lo_ok {
            lo = centre - width;
        }
        if !hi_ok {
            hi = centre + width;
        }
    }
    if count(lo) > rank || count(hi) <= rank {
        return Err(Error::NonConvergence { cutoff: 0, last: lo, previous: hi });
    }

    // Newton on `F`, safeguarded by the count bracket.
    let mut x = 0.5 * (lo + hi);
    let mut last_step = hi - lo;
    for _ in 0..MAX_ITER {
        let (f, df, below) = eval(rec, q, x, central_index(rec, q, x));
        if below <= rank {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / df;
        let tol = 4.0 * f64::EPSILON * x.abs().max(1.0);
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let mut next = if newton.is_finite() && newton > lo && newton < hi && 2.0 * (newton - x).abs() < last_step {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= tol {
            // A converged Newton iterate may belong to a neighbouring root.
            if count(next - 4.0 * tol) <= rank && count(next + 4.0 * tol) > rank {
                return Ok(next);
            }
            next = 0.5 * (lo + hi);
        }
        last_step = (next - x).abs();
        x = next;
    }
    Ok(x)
}

