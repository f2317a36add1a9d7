//! Essential norm of a multiplication operator and the certificates that
//! bracket it.
//!
//! The formula is `max(sup |u| on the diffuse part, limsup |u(B_n)|)`. The
//! infimum over compact perturbations is never searched; instead the two
//! inequalities are certified separately:
//!
//! * upper bounds by explicit truncation perturbations `K = -M_u (I - Q_n)`;
//! * lower bounds by pinching (`||M_u + K|| >= ||M_u + D_K||`) on atoms and
//!   by normalized-indicator witnesses on the diffuse part.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lpspace::{
    check_exponent, normalized_indicator, weighted_norm, Profile, StepFunction,
};
use crate::measure::{limsup_abs, MeasureSpace, TailDescriptor};
use crate::operator::{
    opnorm_p1, opnorm_p1_with_column, projections, LinearOperator, LowRankOperator,
    MatrixOperator, MultiplicationOperator,
};
use crate::rng::{seeded, uniform_vec};

/// `u` on a discretized space: stored atom values with a tail rule, and
/// cell values on the diffuse part.
#[derive(Debug, Clone, PartialEq)]
pub struct EssNormProblem {
    space: Arc<MeasureSpace>,
    u_atoms: Vec<f64>,
    u_tail: TailDescriptor,
    u_diffuse: Option<Vec<f64>>,
}

impl EssNormProblem {
    pub fn new(
        space: Arc<MeasureSpace>,
        u_atoms: Vec<f64>,
        u_tail: TailDescriptor,
        u_diffuse: Option<Vec<f64>>,
    ) -> Result<Self> {
        if u_atoms.len() != space.num_atoms() {
            return Err(Error::DimensionMismatch {
                expected: space.num_atoms(),
                actual: u_atoms.len(),
            });
        }
        match (&u_diffuse, space.diffuse()) {
            (Some(v), Some(_)) if v.len() != space.num_cells() => {
                return Err(Error::DimensionMismatch {
                    expected: space.num_cells(),
                    actual: v.len(),
                })
            }
            (Some(_), None) => return Err(Error::PurelyAtomic),
            _ => {}
        }
        let u_diffuse = match (u_diffuse, space.diffuse()) {
            (None, Some(_)) => Some(vec![0.0; space.num_cells()]),
            (v, _) => v,
        };
        Ok(EssNormProblem {
            space,
            u_atoms,
            u_tail,
            u_diffuse,
        })
    }

    /// Atom values follow `tail` from index 1; diffuse values are cell
    /// averages of `profile`.
    pub fn from_rules(
        space: Arc<MeasureSpace>,
        tail: TailDescriptor,
        profile: Option<&Profile>,
    ) -> Result<Self> {
        let atoms = (1..=space.num_atoms()).map(|n| tail.value(n)).collect();
        let diffuse = match profile {
            Some(p) => Some(p.cell_averages(&space)?),
            None => None,
        };
        Self::new(space, atoms, tail, diffuse)
    }

    /// Purely atomic problem on unit masses with `u_n` from `tail`.
    pub fn atomic(n: usize, tail: TailDescriptor) -> Self {
        Self::from_rules(Arc::new(MeasureSpace::unit_atoms(n)), tail, None)
            .expect("atomic layout is consistent")
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    pub fn u_atoms(&self) -> &[f64] {
        &self.u_atoms
    }

    pub fn u_tail(&self) -> &TailDescriptor {
        &self.u_tail
    }

    pub fn u_diffuse(&self) -> Option<&[f64]> {
        self.u_diffuse.as_deref()
    }

    /// `u` as a step function over all coordinates.
    pub fn u(&self) -> StepFunction {
        let mut c = self.u_atoms.clone();
        if let Some(d) = &self.u_diffuse {
            c.extend_from_slice(d);
        }
        StepFunction::new(Arc::clone(&self.space), c).expect("layout checked at construction")
    }

    pub fn multiplication(&self) -> MultiplicationOperator {
        crate::operator::mult_op(&self.u())
    }
}

/// `max(||u|_{diffuse}||_inf, limsup |u(B_n)|)`.
pub fn essential_norm(problem: &EssNormProblem) -> f64 {
    let diffuse = problem
        .u_diffuse
        .as_ref()
        .map_or(0.0, |d| d.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    diffuse.max(limsup_abs(&problem.u_tail, &problem.u_atoms))
}

/// `D_K`: the multiplication operator with `d_n = K[n][n]`, so that
/// `P_n K P_n = d_n P_n`.
pub fn diagonal_compactification(k: &dyn LinearOperator) -> MultiplicationOperator {
    MultiplicationOperator::new(Arc::clone(k.space()), k.diagonal())
        .expect("diagonal length equals dimension")
}

/// How a lower-bound certificate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// Best of `f_n` and `f_n - f_m` over nested superlevel sets; the ratio
    /// is evaluated on `M_u + K` itself.
    WitnessPair,
    /// Norm of `M_u + D_K`, attained at a normalized atom indicator; the
    /// ratio is evaluated on the pinched operator `M_u + D_K`.
    PinchingDiagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundCertificate {
    pub bound: f64,
    /// Unit vector in the weighted norm.
    pub witness: StepFunction,
    pub construction: Construction,
    pub p: f64,
}

/// `||(M_u + K) g||_p / ||g||_p`.
fn perturbed_ratio(u: &[f64], k: &dyn LinearOperator, g: &[f64], p: f64) -> f64 {
    let space = k.space();
    let kg = k.apply_coefficients(g);
    let image: Vec<f64> = kg
        .iter()
        .zip(u.iter().zip(g))
        .map(|(kv, (uv, gv))| uv * gv + kv)
        .collect();
    weighted_norm(space, &image, p) / weighted_norm(space, g, p)
}

impl LowerBoundCertificate {
    /// Re-evaluates the certified ratio from the stored witness.
    pub fn reproduce(&self, u: &StepFunction, k: &dyn LinearOperator) -> f64 {
        let g = self.witness.coefficients();
        match self.construction {
            Construction::WitnessPair => perturbed_ratio(u.coefficients(), k, g, self.p),
            Construction::PinchingDiagonal => {
                let d = diagonal_compactification(k);
                let zero = MultiplicationOperator::new(Arc::clone(k.space()), vec![0.0; g.len()])
                    .expect("same layout");
                let shifted: Vec<f64> = u
                    .coefficients()
                    .iter()
                    .zip(d.u_values())
                    .map(|(a, b)| a + b)
                    .collect();
                perturbed_ratio(&shifted, &zero, g, self.p)
            }
        }
    }
}

/// Certified `||M_u + K|| >= ||M_u + D_K||` at `p = 1` via the full
/// diagonal pinch.
pub fn pinching_lower_bound(
    u: &StepFunction,
    k: &MatrixOperator,
    p: f64,
) -> Result<LowerBoundCertificate> {
    check_exponent(p)?;
    if p != 1.0 {
        return Err(Error::Precondition(format!(
            "pinching certificates need exact norms and therefore p = 1 (got p = {p})"
        )));
    }
    crate::lpspace::same_space(u.space(), k.space())?;
    if k.dim() == 0 {
        return Err(Error::EmptyIndexSet);
    }
    let d = diagonal_compactification(k);
    let pinched = mult_plus(u, &d)?;
    let (bound, column) = opnorm_p1_with_column(&pinched);
    let witness = normalized_indicator(u.space(), &[column], 1.0)?;
    Ok(LowerBoundCertificate {
        bound,
        witness,
        construction: Construction::PinchingDiagonal,
        p,
    })
}

fn mult_plus(u: &StepFunction, d: &MultiplicationOperator) -> Result<MatrixOperator> {
    Ok(crate::operator::mult_op(u).add(d)?.to_matrix())
}

/// Nested witness sets inside the `eps`-superlevel set of `|u|`, as indices
/// into `cell_values`.
///
/// Cells with `|u| >= max|u| - eps` are ranked by `|u|` (descending, ties by
/// position). `A_1` is the top `2^k` of them for the largest `2^k` not
/// exceeding their count; each later set keeps the top half of the previous
/// one, down to a single cell. Masses therefore halve exactly.
pub fn witness_sets(cell_values: &[f64], eps: f64) -> Result<Vec<Vec<usize>>> {
    let sup = cell_values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if !(eps > 0.0 && eps < sup) {
        return Err(Error::InvalidEpsilon { eps, sup });
    }
    let threshold = sup - eps;
    let mut ranked: Vec<usize> = (0..cell_values.len())
        .filter(|&i| cell_values[i].abs() >= threshold)
        .collect();
    if ranked.is_empty() {
        return Err(Error::Precondition("superlevel set is empty".into()));
    }
    ranked.sort_by(|&i, &j| {
        cell_values[j]
            .abs()
            .total_cmp(&cell_values[i].abs())
            .then(i.cmp(&j))
    });
    let mut size = 1usize << (usize::BITS - 1 - ranked.len().leading_zeros());
    let mut sets = Vec::new();
    while size >= 1 {
        let mut set = ranked[..size].to_vec();
        set.sort_unstable();
        sets.push(set);
        size /= 2;
    }
    Ok(sets)
}

/// Lower bound for `||M_u + K||_p` from the witnesses `f_n` and `f_n - f_m`
/// built on [`witness_sets`] of the diffuse part of `u`.
pub fn witness_lower_bound(
    problem: &EssNormProblem,
    k: &dyn LinearOperator,
    eps: f64,
    p: f64,
) -> Result<LowerBoundCertificate> {
    check_exponent(p)?;
    crate::lpspace::same_space(problem.space(), k.space())?;
    let cells = problem.u_diffuse().ok_or(Error::PurelyAtomic)?;
    let offset = problem.space().num_atoms();
    let sets = witness_sets(cells, eps)?;
    let space = problem.space();
    let indicators = sets
        .iter()
        .map(|set| {
            let global: Vec<usize> = set.iter().map(|i| i + offset).collect();
            normalized_indicator(space, &global, p).map(StepFunction::into_coefficients)
        })
        .collect::<Result<Vec<_>>>()?;

    let u = problem.u();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |g: Vec<f64>| {
        let r = perturbed_ratio(u.coefficients(), k, &g, p);
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, g));
        }
    };
    for (n, f_n) in indicators.iter().enumerate() {
        consider(f_n.clone());
        for f_m in &indicators[n + 1..] {
            consider(f_n.iter().zip(f_m).map(|(a, b)| a - b).collect());
        }
    }
    let (bound, g) = best.expect("at least one witness set");
    let norm = weighted_norm(space, &g, p);
    let witness = StepFunction::new(Arc::clone(space), g.iter().map(|v| v / norm).collect())?;
    Ok(LowerBoundCertificate {
        bound,
        witness,
        construction: Construction::WitnessPair,
        p,
    })
}

/// `(||Q_n K||_1)` for `n = 0..=n_max` on the stored coordinates.
pub fn qn_decay_profile(k: &MatrixOperator, n_max: usize) -> Result<Vec<f64>> {
    let space = Arc::clone(k.space());
    if n_max > space.dimension() {
        return Err(Error::IndexOutOfRange {
            index: n_max,
            dim: space.dimension(),
        });
    }
    (0..=n_max)
        .map(|n| {
            let (_, q) = projections(&space, n)?;
            Ok(opnorm_p1(&q.left_mul(k)))
        })
        .collect()
}

/// Rank-one operator `K f = (integral eta f) g` on an infinite atomic space,
/// stored as finite prefixes plus closed-form tail data: the `l_1` mass of
/// `g` beyond the prefix and the sup of `|eta|` beyond the prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedRankOne {
    space: Arc<MeasureSpace>,
    g: Vec<f64>,
    eta: Vec<f64>,
    g_tail_mass: f64,
    eta_tail_sup: f64,
}

impl TruncatedRankOne {
    pub fn new(
        g: &StepFunction,
        eta: &StepFunction,
        g_tail_mass: f64,
        eta_tail_sup: f64,
    ) -> Result<Self> {
        crate::lpspace::same_space(g.space(), eta.space())?;
        if !g.space().is_purely_atomic() {
            return Err(Error::DiffusePresent);
        }
        if !(g_tail_mass >= 0.0 && eta_tail_sup >= 0.0) {
            return Err(Error::Precondition("tail data must be non-negative".into()));
        }
        Ok(TruncatedRankOne {
            space: Arc::clone(g.space()),
            g: g.coefficients().to_vec(),
            eta: eta.coefficients().to_vec(),
            g_tail_mass,
            eta_tail_sup,
        })
    }

    /// The stored `N x N` block.
    pub fn to_matrix(&self) -> MatrixOperator {
        let g = StepFunction::new(Arc::clone(&self.space), self.g.clone()).expect("layout");
        let eta = StepFunction::new(Arc::clone(&self.space), self.eta.clone()).expect("layout");
        crate::operator::rank_one_diffuse(&eta, &g).expect("same space")
    }

    /// `||Q_n K||_1 = ||Q_n g||_1 * ||eta||_inf` on the full sequence space,
    /// for `n = 0..=n_max` with `n_max` at most the stored length.
    pub fn qn_decay_profile(&self, n_max: usize) -> Result<Vec<f64>> {
        let len = self.g.len();
        if n_max > len {
            return Err(Error::IndexOutOfRange {
                index: n_max,
                dim: len,
            });
        }
        let eta_sup = self
            .eta
            .iter()
            .fold(self.eta_tail_sup, |m, v| m.max(v.abs()));
        // suffix masses summed from the far end, tail first
        let mut suffix = vec![0.0; len + 1];
        suffix[len] = self.g_tail_mass;
        for i in (0..len).rev() {
            suffix[i] = suffix[i + 1] + self.g[i].abs() * self.space.mass(i);
        }
        Ok((0..=n_max).map(|n| suffix[n] * eta_sup).collect())
    }
}

/// `g_n = first * ratio^(n-1)` for `n = 1..=count`, together with the
/// closed-form `l_1` mass of the remaining terms on unit masses.
pub fn geometric_sequence(first: f64, ratio: f64, count: usize) -> Result<(Vec<f64>, f64)> {
    if !(ratio.abs() < 1.0) {
        return Err(Error::Precondition(format!(
            "geometric ratio {ratio} must satisfy |ratio| < 1"
        )));
    }
    let values = (0..count).map(|i| first * ratio.powi(i as i32)).collect();
    let tail = (first * ratio.powi(count as i32)).abs() / (1.0 - ratio.abs());
    Ok((values, tail))
}

/// The `(k+1)`-th largest `|u_i|`, or 0 when `k >= u.len()`.
///
/// Equals `min max_i |u_i + d_i|` over diagonal perturbations `d` supported
/// on at most `k` coordinates.
pub fn best_diagonal_rank_k(u_values: &[f64], k: usize) -> f64 {
    if k >= u_values.len() {
        return 0.0;
    }
    let mut abs: Vec<f64> = u_values.iter().map(|v| v.abs()).collect();
    abs.sort_by(|a, b| b.total_cmp(a));
    abs[k]
}

/// `K = -M_u (I - Q_n)`: cancels `u` on the first `n` atoms.
pub fn truncation_perturbation(u: &StepFunction, n: usize) -> Result<MatrixOperator> {
    let space = Arc::clone(u.space());
    if n > space.dimension() {
        return Err(Error::IndexOutOfRange {
            index: n,
            dim: space.dimension(),
        });
    }
    let d: Vec<f64> = u
        .coefficients()
        .iter()
        .enumerate()
        .map(|(i, v)| if i < n { -v } else { 0.0 })
        .collect();
    MatrixOperator::zeros(space).plus_diagonal(&d)
}

/// Upper certificate for the essential norm of an atomic problem:
/// `||M_u + K||_1` for the truncation perturbation at `n`, taking the tail
/// beyond the stored atoms into account.
pub fn truncation_upper_bound(problem: &EssNormProblem, n: usize) -> Result<f64> {
    if !problem.space().is_purely_atomic() {
        return Err(Error::DiffusePresent);
    }
    let u = problem.u();
    let k = truncation_perturbation(&u, n)?;
    let stored = opnorm_p1(&k.plus_diagonal(u.coefficients())?);
    let tail = match problem.u_tail() {
        TailDescriptor::FinitelySupported => 0.0,
        t => t.sup_abs_after(problem.space().num_atoms()),
    };
    Ok(stored.max(tail))
}

/// A kernel `k(x, y) = sum_r g_r(x) eta_r(y)` on the diffuse interval,
/// discretized per level by cell averaging of each factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionKernel {
    /// `(eta_r, g_r)` pairs.
    pub terms: Vec<(Profile, Profile)>,
}

impl FunctionKernel {
    pub fn rank_one(eta: Profile, g: Profile) -> Self {
        FunctionKernel {
            terms: vec![(eta, g)],
        }
    }

    /// `rank` terms whose factors are step profiles with `pieces` values
    /// uniform on `[-1, 1]`, drawn from `seed`.
    pub fn random_step(rank: usize, pieces: usize, seed: u64) -> Self {
        let mut rng = seeded(seed);
        let terms = (0..rank)
            .map(|_| {
                let eta = Profile::Step {
                    values: uniform_vec(&mut rng, pieces),
                };
                let g = Profile::Step {
                    values: uniform_vec(&mut rng, pieces),
                };
                (eta, g)
            })
            .collect();
        FunctionKernel { terms }
    }

    pub fn discretize(&self, space: &Arc<MeasureSpace>) -> Result<LowRankOperator> {
        let atoms = vec![0.0; space.num_atoms()];
        let mut k = LowRankOperator::new(Arc::clone(space));
        for (eta, g) in &self.terms {
            let eta = StepFunction::from_parts(Arc::clone(space), &atoms, Some(eta))?;
            let g = StepFunction::from_parts(Arc::clone(space), &atoms, Some(g))?;
            k.push(&eta, &g)?;
        }
        Ok(k)
    }
}
