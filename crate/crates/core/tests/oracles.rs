//! Library routines checked against brute-force references written here.

use std::sync::Arc;

use essnorm_lab::essnorm::{best_diagonal_rank_k, essential_norm, witness_lower_bound};
use essnorm_lab::measure::build_space;
use essnorm_lab::operator::{opnorm_estimate, opnorm_p1};
use essnorm_lab::rng::{random_masses, random_matrix, seeded, uniform_vec};
use essnorm_lab::{
    EssNormProblem, LinearOperator, LowRankOperator, MatrixOperator, MeasureSpace, Profile,
    TailDescriptor,
};

fn atoms(masses: &[f64]) -> Arc<MeasureSpace> {
    Arc::new(build_space(masses, TailDescriptor::FinitelySupported, None, 0).unwrap())
}

fn mat(space: Arc<MeasureSpace>, rows: &[&[f64]]) -> MatrixOperator {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    MatrixOperator::from_rows(space, &rows).unwrap()
}

fn weighted_p_norm(x: &[f64], masses: &[f64], p: f64) -> f64 {
    x.iter()
        .zip(masses)
        .map(|(v, m)| v.abs().powf(p) * m)
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Ratio over the extreme points `e_j / mu_j` of the weighted `L_1` ball.
fn p1_by_extreme_points(a: &MatrixOperator, masses: &[f64]) -> f64 {
    let n = masses.len();
    (0..n)
        .map(|j| {
            let mut x = vec![0.0; n];
            x[j] = 1.0 / masses[j];
            weighted_p_norm(&a.apply_coefficients(&x), masses, 1.0)
        })
        .fold(0.0, f64::max)
}

#[test]
fn p1_norm_matches_extreme_point_enumeration() {
    let mut rng = seeded(5);
    for _ in 0..200 {
        let masses = random_masses(&mut rng, 5, 0.1, 3.0);
        let a = random_matrix(&mut rng, atoms(&masses));
        let exact = opnorm_p1(&a);
        let brute = p1_by_extreme_points(&a, &masses);
        assert!((exact - brute).abs() <= 1e-12 * brute.max(1.0), "{exact} vs {brute}");
    }
}

#[test]
fn p1_norm_known_value() {
    let a = mat(Arc::new(MeasureSpace::unit_atoms(2)), &[&[1.0, -2.0], &[3.0, 4.0]]);
    assert_eq!(opnorm_p1(&a), 6.0);
}

#[test]
fn p1_norm_dominates_random_ratios() {
    let mut rng = seeded(6);
    let masses = random_masses(&mut rng, 6, 0.2, 2.0);
    let a = random_matrix(&mut rng, atoms(&masses));
    let exact = opnorm_p1(&a);
    for _ in 0..2000 {
        let x = uniform_vec(&mut rng, 6);
        let r = weighted_p_norm(&a.apply_coefficients(&x), &masses, 1.0)
            / weighted_p_norm(&x, &masses, 1.0);
        assert!(r <= exact * (1.0 + 1e-12));
    }
}

/// Largest singular value of a 2x2 matrix, from the eigenvalues of `A^T A`.
fn sigma_max_2x2(a: [[f64; 2]; 2]) -> f64 {
    let [[p, q], [r, s]] = a;
    let t = p * p + q * q + r * r + s * s;
    let d = p * s - q * r;
    ((t + (t * t - 4.0 * d * d).max(0.0).sqrt()) / 2.0).sqrt()
}

#[test]
fn p2_estimate_matches_singular_value() {
    let mut rng = seeded(7);
    let space = Arc::new(MeasureSpace::unit_atoms(2));
    for _ in 0..200 {
        let v = uniform_vec(&mut rng, 4);
        let a = mat(space.clone(), &[&[v[0], v[1]], &[v[2], v[3]]]);
        let sigma = sigma_max_2x2([[v[0], v[1]], [v[2], v[3]]]);
        let est = opnorm_estimate(&a, 2.0).unwrap();
        assert!(est <= sigma * (1.0 + 1e-12), "estimate {est} above {sigma}");
        assert!(est >= sigma * (1.0 - 1e-6), "estimate {est} far below {sigma}");
    }
    let swap = mat(space, &[&[0.0, 1.0], &[1.0, 0.0]]);
    assert!((opnorm_estimate(&swap, 2.0).unwrap() - 1.0).abs() < 1e-12);
}

/// Riesz-Thorin bound `||A||_p <= ||A||_1^(1/p) ||A||_inf^(1 - 1/p)` on
/// unweighted `l_p`.
fn riesz_thorin(a: &MatrixOperator, p: f64) -> f64 {
    let n = a.dim();
    let col = (0..n)
        .map(|j| (0..n).map(|i| a.get(i, j).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let row = (0..n)
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    col.powf(1.0 / p) * row.powf(1.0 - 1.0 / p)
}

#[test]
fn p_estimate_is_sandwiched() {
    let mut rng = seeded(8);
    let space = Arc::new(MeasureSpace::unit_atoms(4));
    for &p in &[1.5, 2.0, 3.0, 5.0] {
        for _ in 0..100 {
            let a = random_matrix(&mut rng, space.clone());
            let est = opnorm_estimate(&a, p).unwrap();
            assert!(est <= riesz_thorin(&a, p) * (1.0 + 1e-12));
            let best_column = (0..4)
                .map(|j| {
                    let col: Vec<f64> = (0..4).map(|i| a.get(i, j)).collect();
                    weighted_p_norm(&col, &[1.0; 4], p)
                })
                .fold(0.0, f64::max);
            assert!(est >= best_column);
        }
    }
}

/// `min max_i |u_i + d_i|` over `d` supported on `k` coordinates: cancel
/// `u` on a subset, enumerated exhaustively.
fn best_rank_k_by_subsets(u: &[f64], k: usize) -> f64 {
    let n = u.len();
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize <= k)
        .map(|mask| {
            (0..n)
                .filter(|i| mask & (1 << i) == 0)
                .map(|i| u[i].abs())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn best_rank_k_matches_subset_enumeration() {
    let mut rng = seeded(9);
    for _ in 0..50 {
        let u = uniform_vec(&mut rng, 8);
        for k in 0..=8 {
            assert_eq!(best_diagonal_rank_k(&u, k), best_rank_k_by_subsets(&u, k));
        }
    }
}

#[test]
fn essential_norm_of_harmonic_sequence() {
    let p = EssNormProblem::atomic(200, TailDescriptor::HarmonicLimit { c: 1.0, alpha: 1.0 });
    assert_eq!(essential_norm(&p), 1.0);
    let alt = EssNormProblem::atomic(10, TailDescriptor::Alternating { c1: 0.5, c2: -2.0 });
    assert_eq!(essential_norm(&alt), 2.0);
}

#[test]
fn unperturbed_witness_bound_on_identity_profile() {
    // u(x) = x at level 8: the top cell average is 1 - 1/512.
    let space = Arc::new(MeasureSpace::interval(0.0, 1.0, 8).unwrap());
    let problem = EssNormProblem::from_rules(
        space.clone(),
        TailDescriptor::FinitelySupported,
        Some(&Profile::identity()),
    )
    .unwrap();
    let k = LowRankOperator::new(space);
    let cert = witness_lower_bound(&problem, &k, 0.1, 1.0).unwrap();
    assert_eq!(cert.bound, 1.0 - 1.0 / 512.0);
}
