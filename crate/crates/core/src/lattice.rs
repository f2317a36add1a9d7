//! Lattice operations on discretized operators and the band projection onto
//! the centre.
//!
//! On a finite atomic model every operator is regular and the defining
//! suprema reduce columnwise to entrywise formulas: `|S| = (|s_ij|)`,
//! `S v T = (max(s_ij, t_ij))`, `S ^ T = (min(s_ij, t_ij))`. The centre is
//! the set of diagonal matrices and its disjoint complement is the set of
//! matrices with zero diagonal.

use std::sync::Arc;

use crate::error::Result;
use crate::lpspace::{Profile, StepFunction};
use crate::measure::MeasureSpace;
use crate::operator::{
    opnorm_estimate, LinearOperator, LowRankOperator, MatrixOperator, MultiplicationOperator,
};

pub fn modulus(s: &MatrixOperator) -> MatrixOperator {
    s.map(f64::abs)
}

pub fn join(s: &MatrixOperator, t: &MatrixOperator) -> Result<MatrixOperator> {
    s.zip_with(t, f64::max)
}

pub fn meet(s: &MatrixOperator, t: &MatrixOperator) -> Result<MatrixOperator> {
    s.zip_with(t, f64::min)
}

/// `||S||_r = || |S| ||`; exact at `p = 1`, a lower bound otherwise.
pub fn regular_norm(s: &MatrixOperator, p: f64) -> Result<f64> {
    opnorm_estimate(&modulus(s), p)
}

/// `S = P S + (S - P S)` with `P S` in the centre and the rest disjoint
/// from it.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularDecomposition {
    pub centre_part: MultiplicationOperator,
    pub disjoint_part: MatrixOperator,
}

impl RegularDecomposition {
    pub fn recombine(&self) -> MatrixOperator {
        self.disjoint_part
            .plus_diagonal(self.centre_part.u_values())
            .expect("parts share one space")
    }
}

/// Band projection onto the centre: the diagonal, as a multiplication
/// operator, plus the zero-diagonal remainder.
pub fn centre_project(s: &MatrixOperator) -> RegularDecomposition {
    let centre_part = MultiplicationOperator::new(Arc::clone(s.space()), s.diagonal())
        .expect("diagonal length equals dimension");
    RegularDecomposition {
        centre_part,
        disjoint_part: s.without_diagonal(),
    }
}

/// Norm of the centre part of the rank-one operator `(integral eta f) g`
/// discretized on `(a, b)` at each requested level.
///
/// The value at level `L` is `max_i |g_i eta_i mu(C_i)|`, which tends to 0:
/// no nonzero multiplication operator sits below a rank-one kernel on a
/// diffuse space.
pub fn centre_decay_under_refinement(
    eta: &Profile,
    g: &Profile,
    interval: (f64, f64),
    levels: &[u32],
) -> Result<Vec<f64>> {
    levels
        .iter()
        .map(|&level| {
            let space = Arc::new(MeasureSpace::interval(interval.0, interval.1, level)?);
            let eta_l = StepFunction::from_parts(space.clone(), &[], Some(eta))?;
            let g_l = StepFunction::from_parts(space.clone(), &[], Some(g))?;
            let mut k = LowRankOperator::new(space);
            k.push(&eta_l, &g_l)?;
            Ok(k.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs())))
        })
        .collect()
}
