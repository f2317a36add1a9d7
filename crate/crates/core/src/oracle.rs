//! Reference evaluations of the lattice operations straight from their
//! defining suprema, by enumeration over a grid. These never touch the
//! entrywise formulas in [`crate::lattice`], so the two routes can be
//! compared against each other.

use crate::operator::{LinearOperator, MatrixOperator};

/// `(S v T) e_j = sup { S g + T h : g, h >= 0, g + h = e_j }` evaluated
/// pointwise over the one-parameter family `g = t e_j`, `t` on a grid of
/// `steps + 1` points in `[0, 1]`.
pub fn join_column(s: &MatrixOperator, t: &MatrixOperator, j: usize, steps: usize) -> Vec<f64> {
    decomposition_extreme(s, t, j, steps, f64::max, f64::NEG_INFINITY)
}

/// The infimum counterpart of [`join_column`].
pub fn meet_column(s: &MatrixOperator, t: &MatrixOperator, j: usize, steps: usize) -> Vec<f64> {
    decomposition_extreme(s, t, j, steps, f64::min, f64::INFINITY)
}

fn decomposition_extreme(
    s: &MatrixOperator,
    t: &MatrixOperator,
    j: usize,
    steps: usize,
    pick: fn(f64, f64) -> f64,
    init: f64,
) -> Vec<f64> {
    let n = s.dim();
    let mut out = vec![init; n];
    for k in 0..=steps {
        let tau = k as f64 / steps as f64;
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n];
        g[j] = tau;
        h[j] = 1.0 - tau;
        let sg = s.apply_coefficients(&g);
        let th = t.apply_coefficients(&h);
        for i in 0..n {
            out[i] = pick(out[i], sg[i] + th[i]);
        }
    }
    out
}

/// `|S| f = sup { |S g| : |g| <= f }` for `f >= 0`, with each `g_j` ranging
/// over `steps + 1` grid points of `[-f_j, f_j]`. Cost is
/// `(steps + 1)^dim`, so keep the dimension small.
pub fn modulus_apply(s: &MatrixOperator, f: &[f64], steps: usize) -> Vec<f64> {
    let n = s.dim();
    let points = steps + 1;
    let total = points.pow(n as u32);
    let mut out = vec![0.0_f64; n];
    let mut g = vec![0.0; n];
    for code in 0..total {
        let mut c = code;
        for j in 0..n {
            let k = c % points;
            c /= points;
            g[j] = -f[j] + 2.0 * f[j] * (k as f64 / steps as f64);
        }
        let sg = s.apply_coefficients(&g);
        for i in 0..n {
            out[i] = out[i].max(sg[i].abs());
        }
    }
    out
}

/// Largest absolute deviation between the entrywise join/meet of `s` and
/// `t` and the decomposition suprema, over all columns.
pub fn join_meet_deviation(
    s: &MatrixOperator,
    t: &MatrixOperator,
    join: &MatrixOperator,
    meet: &MatrixOperator,
    steps: usize,
) -> f64 {
    let n = s.dim();
    let mut worst = 0.0_f64;
    for j in 0..n {
        let jo = join_column(s, t, j, steps);
        let me = meet_column(s, t, j, steps);
        for i in 0..n {
            worst = worst
                .max((jo[i] - join.get(i, j)).abs())
                .max((me[i] - meet.get(i, j)).abs());
        }
    }
    worst
}
