use std::sync::Arc;

use proptest::prelude::*;

use essnorm_lab::lattice::{centre_project, join, meet, modulus, regular_norm};
use essnorm_lab::lpspace::{from_standard, lp_norm, norm_p, to_standard};
use essnorm_lab::measure::{build_space, refine};
use essnorm_lab::operator::{opnorm_estimate, opnorm_p1, pinch, singleton_blocks};
use essnorm_lab::{
    mult_op, LinearOperator, MatrixOperator, MeasureSpace, StepFunction, TailDescriptor,
};

fn atoms(masses: &[f64]) -> Arc<MeasureSpace> {
    Arc::new(build_space(masses, TailDescriptor::FinitelySupported, None, 0).unwrap())
}

/// `(masses, row-major entries)` for an `n x n` operator, `n` in `2..=6`.
fn operator() -> impl Strategy<Value = MatrixOperator> {
    (2usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(0.1f64..3.0, n),
            prop::collection::vec(-1.0f64..1.0, n * n),
        )
            .prop_map(|(m, e)| MatrixOperator::from_flat(atoms(&m), e).unwrap())
    })
}

fn operator_pair() -> impl Strategy<Value = (MatrixOperator, MatrixOperator)> {
    (2usize..=5).prop_flat_map(|n| {
        (
            prop::collection::vec(0.1f64..3.0, n),
            prop::collection::vec(-1.0f64..1.0, n * n),
            prop::collection::vec(-1.0f64..1.0, n * n),
        )
            .prop_map(|(m, a, b)| {
                let s = atoms(&m);
                (
                    MatrixOperator::from_flat(s.clone(), a).unwrap(),
                    MatrixOperator::from_flat(s, b).unwrap(),
                )
            })
    })
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0), 1.0f64..6.0]
}

/// Random partition of `0..n` from one label per index.
fn blocks_from_labels(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for label in 0..labels.len() {
        let b: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        if !b.is_empty() {
            blocks.push(b);
        }
    }
    blocks
}

proptest! {
    #[test]
    fn pinching_is_contractive(a in operator(), seed in any::<u64>()) {
        let n = a.dim();
        let labels: Vec<usize> = (0..n).map(|i| (seed >> (2 * i)) as usize % n).collect();
        let norm = opnorm_p1(&a);
        prop_assert!(opnorm_p1(&pinch(&a, &blocks_from_labels(&labels)).unwrap()) <= norm);
        prop_assert!(opnorm_p1(&pinch(&a, &singleton_blocks(n)).unwrap()) <= norm);
    }

    #[test]
    fn estimate_dominates_diagonal(a in operator(), p in exponent()) {
        let est = opnorm_estimate(&a, p).unwrap();
        let d = a.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        prop_assert!(d <= est, "max |diag| {} > estimate {}", d, est);
    }

    #[test]
    fn estimate_dominates_indicator_ratios(a in operator(), p in exponent()) {
        let est = opnorm_estimate(&a, p).unwrap();
        let space = a.space().clone();
        for j in 0..a.dim() {
            let mut x = vec![0.0; a.dim()];
            x[j] = 1.0;
            let f = StepFunction::new(space.clone(), x).unwrap();
            let r = norm_p(&a.apply(&f).unwrap(), p).unwrap() / norm_p(&f, p).unwrap();
            prop_assert!(r <= est * (1.0 + 1e-12));
        }
    }

    #[test]
    fn p1_estimate_is_exact(a in operator()) {
        prop_assert_eq!(opnorm_estimate(&a, 1.0).unwrap(), opnorm_p1(&a));
    }

    #[test]
    fn centre_projection_properties(a in operator(), b in -2.0f64..2.0) {
        let d = centre_project(&a);
        prop_assert_eq!(d.recombine(), a.clone());
        prop_assert!(d.centre_part.norm() <= opnorm_p1(&a));
        // idempotent
        let again = centre_project(&d.centre_part.to_matrix());
        prop_assert_eq!(&again.centre_part, &d.centre_part);
        prop_assert!(again.disjoint_part.entries().iter().all(|&v| v == 0.0));
        // homogeneous
        let scaled = centre_project(&a.scale(b));
        for (x, y) in scaled.centre_part.u_values().iter().zip(d.centre_part.u_values()) {
            prop_assert_eq!(*x, b * y);
        }
    }

    #[test]
    fn centre_projection_is_additive((s, t) in operator_pair()) {
        let sum = centre_project(&s.add(&t).unwrap()).centre_part;
        let parts = centre_project(&s).centre_part.add(&centre_project(&t).centre_part).unwrap();
        prop_assert_eq!(sum, parts);
    }

    #[test]
    fn regular_norm_dominates_norm(a in operator(), p in exponent()) {
        prop_assert!(regular_norm(&a, 1.0).unwrap() >= opnorm_p1(&a));
        // |S| e_j >= |S e_j| pointwise, and the estimate seeds every indicator
        let reg = regular_norm(&a, p).unwrap();
        let space = a.space().clone();
        for j in 0..a.dim() {
            let mut x = vec![0.0; a.dim()];
            x[j] = 1.0;
            let f = StepFunction::new(space.clone(), x).unwrap();
            let r = norm_p(&a.apply(&f).unwrap(), p).unwrap() / norm_p(&f, p).unwrap();
            prop_assert!(r <= reg * (1.0 + 1e-12));
        }
    }

    #[test]
    fn lattice_identities((s, t) in operator_pair()) {
        let j = join(&s, &t).unwrap();
        let m = meet(&s, &t).unwrap();
        prop_assert_eq!(j.add(&m).unwrap(), s.add(&t).unwrap());
        prop_assert_eq!(modulus(&s), join(&s, &s.scale(-1.0)).unwrap());
    }

    #[test]
    fn disjoint_from_centre_iff_zero_diagonal(a in operator()) {
        let id = MatrixOperator::identity(a.space().clone());
        let zero_meet = meet(&modulus(&a), &id).unwrap().entries().iter().all(|&v| v == 0.0);
        prop_assert_eq!(zero_meet, a.has_zero_diagonal());
        let off = a.without_diagonal();
        prop_assert!(meet(&modulus(&off), &id).unwrap().entries().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn multiplication_norm_is_sup(m in prop::collection::vec(0.1f64..3.0, 1..8), seed in any::<u64>(), p in exponent()) {
        let space = atoms(&m);
        let mut rng = essnorm_lab::rng::seeded(seed);
        let u = StepFunction::new(space, essnorm_lab::rng::uniform_vec(&mut rng, m.len())).unwrap();
        let op = mult_op(&u);
        prop_assert_eq!(op.norm(), u.sup_abs());
        let exact = opnorm_p1(&op.to_matrix());
        prop_assert!((exact - u.sup_abs()).abs() <= 1e-15 * u.sup_abs().max(1.0));
        let est = opnorm_estimate(&op.to_matrix(), p).unwrap();
        prop_assert!((est - u.sup_abs()).abs() <= 1e-12 * u.sup_abs().max(1.0));
    }

    #[test]
    fn refinement_preserves_mass(
        masses in prop::collection::vec(0.1f64..3.0, 0..4),
        a in -2.0f64..0.0,
        width in 0.5f64..3.0,
        level in 0u32..8,
    ) {
        let s = build_space(&masses, TailDescriptor::FinitelySupported, Some((a, a + width)), level).unwrap();
        let r = refine(&s).unwrap();
        prop_assert_eq!(r.num_cells(), 2 * s.num_cells());
        prop_assert_eq!(r.num_atoms(), s.num_atoms());
        prop_assert_eq!(r.atom_masses(), s.atom_masses());
        prop_assert_eq!(r.diffuse_mass(), s.diffuse_mass());
        let cells_total: f64 = r.diffuse_range().map(|i| r.mass(i)).sum();
        prop_assert!((cells_total - width).abs() <= 1e-12 * width);
        for k in s.diffuse_range() {
            let child = 2 * (k - s.num_atoms()) + r.num_atoms();
            prop_assert_eq!(r.mass(child) * 2.0, s.mass(k));
        }
    }

    #[test]
    fn standard_coordinates_are_isometric(m in prop::collection::vec(0.1f64..3.0, 1..8), seed in any::<u64>(), p in exponent()) {
        let space = atoms(&m);
        let mut rng = essnorm_lab::rng::seeded(seed);
        let f = StepFunction::new(space.clone(), essnorm_lab::rng::uniform_vec(&mut rng, m.len())).unwrap();
        let c = to_standard(&f, p).unwrap();
        let back = from_standard(&c, &space, p).unwrap();
        let n = norm_p(&f, p).unwrap();
        prop_assert!((lp_norm(&c, p) - n).abs() <= 1e-12 * n.max(1.0));
        for (x, y) in back.coefficients().iter().zip(f.coefficients()) {
            prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn triangle_inequality(m in prop::collection::vec(0.1f64..3.0, 1..8), seed in any::<u64>(), p in exponent()) {
        let space = atoms(&m);
        let mut rng = essnorm_lab::rng::seeded(seed);
        let f = StepFunction::new(space.clone(), essnorm_lab::rng::uniform_vec(&mut rng, m.len())).unwrap();
        let g = StepFunction::new(space, essnorm_lab::rng::uniform_vec(&mut rng, m.len())).unwrap();
        let lhs = norm_p(&f.add(&g).unwrap(), p).unwrap();
        let rhs = norm_p(&f, p).unwrap() + norm_p(&g, p).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }
}
