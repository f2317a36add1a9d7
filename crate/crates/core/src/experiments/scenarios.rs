use std::sync::Arc;

use rayon::prelude::*;

use super::config::{ConfigError, ExperimentConfig, Factor, PerturbationSpec, Scenario};
use crate::error::Error;
use crate::essnorm::{
    best_diagonal_rank_k, essential_norm, geometric_sequence, pinching_lower_bound,
    qn_decay_profile, truncation_upper_bound, witness_lower_bound, EssNormProblem,
    FunctionKernel, TruncatedRankOne,
};
use crate::lattice::{centre_decay_under_refinement, join, meet, modulus};
use crate::lpspace::{Profile, StepFunction};
use crate::measure::{build_space, MeasureSpace, TailDescriptor};
use crate::operator::{
    mult_op, opnorm_p1, pinch, singleton_blocks, LinearOperator, LowRankOperator, MatrixOperator,
};
use crate::oracle;
use crate::rng::{self, seeded, trial_seed};

/// One sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub param: u64,
    pub computed: f64,
    pub certified: Option<f64>,
    pub formula: Option<f64>,
    /// `|computed - formula|` whenever a formula value exists.
    pub residual: Option<f64>,
}

impl Row {
    pub fn new(param: u64, computed: f64, certified: Option<f64>, formula: Option<f64>) -> Self {
        Row {
            param,
            computed,
            certified,
            formula,
            residual: formula.map(|f| (computed - f).abs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssertionOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl AssertionOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        AssertionOutcome {
            name: name.to_string(),
            passed,
            detail,
        }
    }

    fn violations(name: &str, count: usize, of: usize) -> Self {
        Self::new(name, count == 0, format!("{count} violations in {of} checks"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub rows: Vec<Row>,
    pub assertions: Vec<AssertionOutcome>,
}

impl ScenarioResult {
    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// Process exit status for a completed run.
    pub fn exit_code(&self) -> u8 {
        if self.all_passed() {
            0
        } else {
            EXIT_ASSERTION_FAILURE
        }
    }

    pub fn column(&self, f: impl Fn(&Row) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

/// Exit status when a run completes but an assertion fails.
pub const EXIT_ASSERTION_FAILURE: u8 = 1;
/// Exit status for configuration and precondition errors.
pub const EXIT_CONFIG_ERROR: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration at {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Compute(#[from] Error),
}

/// Validates `config` and runs its scenario. Deterministic given the seed;
/// rows come back ordered by the sweep parameter.
pub fn run_scenario(config: &ExperimentConfig) -> Result<ScenarioResult, RunError> {
    config.validate()?;
    let (rows, assertions) = match config.scenario {
        Scenario::AtomicLimsup => atomic_limsup(config)?,
        Scenario::DiffuseWitness => diffuse_witness(config)?,
        Scenario::PinchingSuite => pinching_suite(config)?,
        Scenario::RankoneCentreDecay => centre_decay(config)?,
        Scenario::QnDecay => qn_decay(config)?,
        Scenario::LatticeOracle => lattice_oracle(config)?,
    };
    Ok(ScenarioResult {
        scenario: config.scenario,
        rows,
        assertions,
    })
}

type Outcome = (Vec<Row>, Vec<AssertionOutcome>);

fn atom_values(config: &ExperimentConfig, count: usize) -> Vec<f64> {
    let spec = &config.u.atoms;
    (0..count)
        .map(|i| spec.values.get(i).copied().unwrap_or_else(|| spec.tail.value(i + 1)))
        .collect()
}

fn atomic_limsup(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let space = config.space.build()?;
    let values = atom_values(config, space.num_atoms());
    let problem = EssNormProblem::new(space, values.clone(), config.u.atoms.tail, None)?;
    let formula = essential_norm(&problem);
    let sweep = config.sweep.expect("validated");
    let rows = sweep
        .values()
        .map(|k| {
            let computed = best_diagonal_rank_k(&values, k as usize);
            let certified = truncation_upper_bound(&problem, k as usize)?;
            Ok(Row::new(k as u64, computed, Some(certified), Some(formula)))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let non_increasing = rows.windows(2).filter(|w| w[1].computed > w[0].computed).count();
    let below_cert = rows
        .iter()
        .filter(|r| r.computed > r.certified.unwrap())
        .count();
    let formula_below = rows.iter().filter(|r| formula > r.certified.unwrap()).count();
    let assertions = vec![
        AssertionOutcome::violations(
            "best_rank_k_non_increasing",
            non_increasing,
            rows.len().saturating_sub(1),
        ),
        AssertionOutcome::violations("truncation_bound_dominates_best_rank_k", below_cert, rows.len()),
        AssertionOutcome::violations("formula_below_truncation_bound", formula_below, rows.len()),
    ];
    Ok((rows, assertions))
}

fn diffuse_kernel(config: &ExperimentConfig) -> Option<FunctionKernel> {
    match &config.perturbation {
        PerturbationSpec::RankOne {
            eta: Some(eta),
            g: Some(g),
            ..
        } => Some(FunctionKernel::rank_one(
            eta.as_profile().expect("validated"),
            g.as_profile().expect("validated"),
        )),
        PerturbationSpec::RankOne {
            rank, pieces, seed, ..
        } => Some(FunctionKernel::random_step(
            *rank,
            *pieces,
            seed.expect("validated"),
        )),
        _ => None,
    }
}

fn diffuse_witness(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let base = config.space.build()?;
    let d = *base.diffuse().expect("validated");
    let profile = config.u.diffuse.clone().expect("validated");
    let eps = config.epsilon.expect("validated");
    let kernel = diffuse_kernel(config);
    let formula = profile.sup_abs(d.a, d.b).max(config.u.atoms.tail.limsup_abs());
    let levels: Vec<u32> = config.sweep.expect("validated").values().collect();

    let per_level = levels
        .par_iter()
        .map(|&level| -> Result<(Row, bool, bool), Error> {
            let space = Arc::new(base.at_level(level)?);
            let values = atom_values(config, space.num_atoms());
            let problem = EssNormProblem::new(
                space.clone(),
                values,
                config.u.atoms.tail,
                Some(profile.cell_averages(&space)?),
            )?;
            let k = match &kernel {
                Some(kernel) => kernel.discretize(&space)?,
                None => LowRankOperator::new(space.clone()),
            };
            let cert = witness_lower_bound(&problem, &k, eps, config.p)?;
            let again = cert.reproduce(&problem.u(), &k);
            let reproduces = (again - cert.bound).abs() <= 1e-12 * cert.bound.abs().max(1.0);
            let cell_sup = problem
                .u_diffuse()
                .unwrap()
                .iter()
                .fold(0.0_f64, |m, v| m.max(v.abs()));
            let floor_ok = kernel.is_some() || cert.bound >= cell_sup - eps;
            Ok((
                Row::new(level as u64, cert.bound, Some(again), Some(formula)),
                reproduces,
                floor_ok,
            ))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let n = per_level.len();
    let bad_repro = per_level.iter().filter(|r| !r.1).count();
    let bad_floor = per_level.iter().filter(|r| !r.2).count();
    let rows: Vec<Row> = per_level.into_iter().map(|r| r.0).collect();
    let mut assertions = vec![AssertionOutcome::violations(
        "certificate_reproduces",
        bad_repro,
        n,
    )];
    if kernel.is_none() {
        assertions.push(AssertionOutcome::violations(
            "unperturbed_bound_at_least_sup_minus_eps",
            bad_floor,
            n,
        ));
    }
    Ok((rows, assertions))
}

/// Partition of `0..n` into two blocks by fair coin flips.
pub fn random_two_blocks(rng: &mut rng::LabRng, n: usize) -> Vec<Vec<usize>> {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for i in 0..n {
        if rng::coin(rng) {
            a.push(i)
        } else {
            b.push(i)
        }
    }
    [a, b].into_iter().filter(|blk| !blk.is_empty()).collect()
}

#[derive(Default)]
struct PinchCounts {
    diag: usize,
    two_block: usize,
    dk: usize,
    diag_equality: usize,
    repro: usize,
}

fn pinching_suite(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let n = config.dimension.expect("validated");
    let trials: Vec<u64> = (0..config.trials as u64).collect();
    let results = trials
        .par_iter()
        .map(|&t| -> Result<(Row, PinchCounts), Error> {
            let mut rng = seeded(trial_seed(config.seed, t));
            let masses = rng::random_masses(&mut rng, n, 0.125, 2.0);
            let space = Arc::new(build_space(&masses, TailDescriptor::FinitelySupported, None, 0)?);
            let a = rng::random_matrix(&mut rng, space.clone());
            let blocks = random_two_blocks(&mut rng, n);
            let u = StepFunction::new(space.clone(), rng::uniform_vec(&mut rng, n))?;
            let k = rng::random_matrix(&mut rng, space.clone());

            let mut c = PinchCounts::default();
            let norm_a = opnorm_p1(&a);
            if opnorm_p1(&pinch(&a, &singleton_blocks(n))?) > norm_a {
                c.diag += 1;
            }
            if opnorm_p1(&pinch(&a, &blocks)?) > norm_a {
                c.two_block += 1;
            }
            let full = opnorm_p1(&mult_op(&u).to_matrix().add(&k)?);
            let cert = pinching_lower_bound(&u, &k, 1.0)?;
            if full < cert.bound {
                c.dk += 1;
            }
            let again = cert.reproduce(&u, &k);
            if (again - cert.bound).abs() > 1e-12 * cert.bound.max(1.0) {
                c.repro += 1;
            }
            let kd = MatrixOperator::zeros(space.clone()).plus_diagonal(&k.diagonal())?;
            let full_d = opnorm_p1(&mult_op(&u).to_matrix().add(&kd)?);
            if full_d != pinching_lower_bound(&u, &kd, 1.0)?.bound {
                c.diag_equality += 1;
            }
            Ok((Row::new(t, full, Some(cert.bound), None), c))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let total = results.len();
    let sum = |f: fn(&PinchCounts) -> usize| results.iter().map(|r| f(&r.1)).sum::<usize>();
    let assertions = vec![
        AssertionOutcome::violations("diagonal_pinch_contractive", sum(|c| c.diag), total),
        AssertionOutcome::violations("two_block_pinch_contractive", sum(|c| c.two_block), total),
        AssertionOutcome::violations("perturbed_norm_dominates_d_k", sum(|c| c.dk), total),
        AssertionOutcome::violations(
            "equality_for_diagonal_perturbation",
            sum(|c| c.diag_equality),
            total,
        ),
        AssertionOutcome::violations("certificate_reproduces", sum(|c| c.repro), total),
    ];
    Ok((results.into_iter().map(|r| r.0).collect(), assertions))
}

fn centre_decay(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let d = config.space.diffuse.expect("validated");
    let (eta, g) = match &config.perturbation {
        PerturbationSpec::RankOne {
            eta: Some(eta),
            g: Some(g),
            ..
        } => (
            eta.as_profile().expect("validated"),
            g.as_profile().expect("validated"),
        ),
        _ => (Profile::Constant { value: 1.0 }, Profile::Constant { value: 1.0 }),
    };
    let levels: Vec<u32> = config.sweep.expect("validated").values().collect();
    let values = centre_decay_under_refinement(&eta, &g, (d.a, d.b), &levels)?;
    let amplitude = eta.sup_abs(d.a, d.b) * g.sup_abs(d.a, d.b);
    let closed_form = match (&eta, &g) {
        (Profile::Constant { value: e }, Profile::Constant { value: gv }) => Some((e * gv).abs()),
        _ => None,
    };
    let rows: Vec<Row> = levels
        .iter()
        .zip(&values)
        .map(|(&level, &v)| {
            let cell = (d.b - d.a) / (1u64 << level) as f64;
            Row::new(
                level as u64,
                v,
                Some(amplitude * cell),
                closed_form.map(|c| c * cell),
            )
        })
        .collect();
    let over = rows
        .iter()
        .filter(|r| r.computed > r.certified.unwrap() * (1.0 + 1e-12))
        .count();
    let mut assertions = vec![AssertionOutcome::violations(
        "centre_norm_within_envelope",
        over,
        rows.len(),
    )];
    if closed_form.is_some() {
        let inexact = rows.iter().filter(|r| r.residual != Some(0.0)).count();
        assertions.push(AssertionOutcome::violations(
            "closed_form_exact",
            inexact,
            rows.len(),
        ));
    }
    Ok((rows, assertions))
}

/// Stored values, `l_1` tail mass, and tail sup of an atomic factor.
fn atomic_factor(f: &Factor, n: usize) -> Result<(Vec<f64>, f64, f64), Error> {
    match f {
        Factor::Constant { value } => Ok((
            vec![*value; n],
            if *value == 0.0 { 0.0 } else { f64::INFINITY },
            value.abs(),
        )),
        Factor::Geometric { first, ratio } => {
            let (values, tail) = geometric_sequence(*first, *ratio, n)?;
            Ok((values, tail, (first * ratio.powi(n as i32)).abs()))
        }
        Factor::Values { values } => Ok((values.clone(), 0.0, 0.0)),
        _ => Err(Error::Precondition("factor must be atomic".into())),
    }
}

/// Atom count up to which the stored-block profile is cross-checked.
const QN_DENSE_LIMIT: usize = 256;

fn qn_decay(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let space: Arc<MeasureSpace> = config.space.build()?;
    let n = space.num_atoms();
    let PerturbationSpec::RankOne {
        eta: Some(eta),
        g: Some(g),
        ..
    } = &config.perturbation
    else {
        unreachable!("validated")
    };
    let (g_vals, g_tail, _) = atomic_factor(g, n)?;
    let (eta_vals, _, eta_tail_sup) = atomic_factor(eta, n)?;
    let g_fn = StepFunction::new(space.clone(), g_vals)?;
    let eta_fn = StepFunction::new(space.clone(), eta_vals)?;
    let k = TruncatedRankOne::new(&g_fn, &eta_fn, g_tail, eta_tail_sup)?;
    let sweep = config.sweep.expect("validated");
    let full = k.qn_decay_profile(sweep.to as usize)?;
    let stored = if n <= QN_DENSE_LIMIT {
        Some(qn_decay_profile(&k.to_matrix(), sweep.to as usize)?)
    } else {
        None
    };
    let eta_sup = eta_fn.sup_abs().max(eta_tail_sup);
    let formula = |m: usize| match g {
        Factor::Geometric { first, ratio } => {
            Some(first.abs() * ratio.abs().powi(m as i32) / (1.0 - ratio.abs()) * eta_sup)
        }
        _ => None,
    };
    let rows: Vec<Row> = sweep
        .values()
        .map(|m| {
            let m = m as usize;
            Row::new(
                m as u64,
                full[m],
                stored.as_ref().map(|s| s[m]),
                formula(m),
            )
        })
        .collect();
    let tail_ok = rows
        .iter()
        .filter(|r| matches!(r.certified, Some(c) if r.computed < c - 1e-12 * c.abs().max(1.0)))
        .count();
    let mut assertions = vec![AssertionOutcome::violations(
        "tail_profile_dominates_stored_block",
        tail_ok,
        rows.len(),
    )];
    if matches!(g, Factor::Geometric { .. }) {
        let off = rows
            .iter()
            .filter(|r| r.residual.unwrap() > 1e-12 * r.formula.unwrap().abs().max(f64::MIN_POSITIVE))
            .count();
        assertions.push(AssertionOutcome::violations(
            "geometric_closed_form",
            off,
            rows.len(),
        ));
    }
    if g_tail == 0.0 && sweep.to as usize == n {
        let last = rows.last().map_or(0.0, |r| r.computed);
        assertions.push(AssertionOutcome::new(
            "vanishes_at_full_truncation",
            last == 0.0,
            format!("||Q_N K|| = {last}"),
        ));
    }
    Ok((rows, assertions))
}

/// Grid resolution for the modulus oracle.
pub const MODULUS_GRID_STEPS: usize = 20;
/// Grid resolution for the join/meet decomposition oracle.
pub const DECOMPOSITION_GRID_STEPS: usize = 16;

fn lattice_oracle(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let n = config.dimension.expect("validated");
    let trials: Vec<u64> = (0..config.trials as u64).collect();
    let results = trials
        .par_iter()
        .map(|&t| -> Result<(Row, f64, f64, bool), Error> {
            let mut rng = seeded(trial_seed(config.seed, t));
            let space = Arc::new(MeasureSpace::unit_atoms(n));
            let s = rng::random_matrix(&mut rng, space.clone());
            let tm = rng::random_matrix(&mut rng, space.clone());
            let jm = oracle::join_meet_deviation(
                &s,
                &tm,
                &join(&s, &tm)?,
                &meet(&s, &tm)?,
                DECOMPOSITION_GRID_STEPS,
            );

            let small = Arc::new(MeasureSpace::unit_atoms(3));
            let s3 = rng::random_matrix(&mut rng, small.clone());
            let f: Vec<f64> = rng::uniform_vec(&mut rng, 3).iter().map(|v| v.abs()).collect();
            let via_oracle = oracle::modulus_apply(&s3, &f, MODULUS_GRID_STEPS);
            let via_lattice = modulus(&s3).apply_coefficients(&f);
            let md = via_oracle
                .iter()
                .zip(&via_lattice)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));

            let id = MatrixOperator::identity(space.clone());
            let disjoint_zero = meet(&modulus(&s.without_diagonal()), &id)?
                .entries()
                .iter()
                .all(|&v| v == 0.0);
            let diagonal_nonzero = s.has_zero_diagonal()
                || meet(&modulus(&s), &id)?.entries().iter().any(|&v| v != 0.0);
            Ok((
                Row::new(t, jm, Some(md), Some(0.0)),
                jm,
                md,
                disjoint_zero && diagonal_nonzero,
            ))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let total = results.len();
    let worst_jm = results.iter().fold(0.0_f64, |m, r| m.max(r.1));
    let worst_md = results.iter().fold(0.0_f64, |m, r| m.max(r.2));
    let criterion_fail = results.iter().filter(|r| !r.3).count();
    let assertions = vec![
        AssertionOutcome::new(
            "join_meet_match_decomposition_oracle",
            worst_jm <= 1e-9,
            format!("max deviation {worst_jm:e} over {total} pairs (tolerance 1e-9)"),
        ),
        AssertionOutcome::new(
            "modulus_matches_grid_oracle",
            worst_md <= 1e-6,
            format!("max deviation {worst_md:e} over {total} instances (tolerance 1e-6)"),
        ),
        AssertionOutcome::violations("disjointness_iff_zero_diagonal", criterion_fail, total),
    ];
    Ok((results.into_iter().map(|r| r.0).collect(), assertions))
}
