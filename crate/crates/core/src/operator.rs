//! Dense operators in indicator coordinates.
//!
//! A [`MatrixOperator`] acts on the coefficient vector of a step function:
//! `(Af)_i = sum_j A[i][j] f_j`. The measure only enters through norms and
//! through the rank-one constructors, which integrate against `mu`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lpspace::{check_exponent, lp_norm, mass_root, same_space, StepFunction};
use crate::measure::MeasureSpace;

/// Iteration cap for the dual-ascent norm estimator.
pub const ESTIMATE_MAX_ITER: usize = 100;
/// Early-exit threshold on the relative change of successive ratios.
pub const ESTIMATE_REL_TOL: f64 = 1e-12;

/// Anything that maps coefficient vectors on a fixed space.
pub trait LinearOperator {
    fn space(&self) -> &Arc<MeasureSpace>;

    fn apply_coefficients(&self, x: &[f64]) -> Vec<f64>;

    /// `(A e_i)_i` for every coordinate.
    fn diagonal(&self) -> Vec<f64>;

    fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        same_space(self.space(), f.space())?;
        StepFunction::new(Arc::clone(self.space()), self.apply_coefficients(f.coefficients()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOperator {
    dim: usize,
    entries: Vec<f64>,
    space: Arc<MeasureSpace>,
}

impl MatrixOperator {
    pub fn zeros(space: Arc<MeasureSpace>) -> Self {
        let dim = space.dimension();
        MatrixOperator {
            dim,
            entries: vec![0.0; dim * dim],
            space,
        }
    }

    pub fn identity(space: Arc<MeasureSpace>) -> Self {
        Self::diagonal_from(space.clone(), &vec![1.0; space.dimension()])
    }

    fn diagonal_from(space: Arc<MeasureSpace>, d: &[f64]) -> Self {
        let mut out = Self::zeros(space);
        for (i, &v) in d.iter().enumerate() {
            out.entries[i * out.dim + i] = v;
        }
        out
    }

    /// Row-major entries.
    pub fn from_flat(space: Arc<MeasureSpace>, entries: Vec<f64>) -> Result<Self> {
        let dim = space.dimension();
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Ok(MatrixOperator {
            dim,
            entries,
            space,
        })
    }

    pub fn from_rows(space: Arc<MeasureSpace>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = space.dimension();
        if rows.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: rows.len(),
            });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Ok(MatrixOperator {
            dim,
            entries,
            space,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.dim + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        MatrixOperator {
            dim: self.dim,
            entries: self.entries.iter().map(|&v| f(v)).collect(),
            space: Arc::clone(&self.space),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        same_space(&self.space, &other.space)?;
        Ok(MatrixOperator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            space: Arc::clone(&self.space),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    /// `self * other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        same_space(&self.space, &other.space)?;
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Ok(MatrixOperator {
            dim: n,
            entries: out,
            space: Arc::clone(&self.space),
        })
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.entries[i * n + j];
            }
        }
        MatrixOperator {
            dim: n,
            entries: out,
            space: Arc::clone(&self.space),
        }
    }

    /// `self + diag(d)`.
    pub fn plus_diagonal(&self, d: &[f64]) -> Result<Self> {
        if d.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: d.len(),
            });
        }
        let mut out = self.clone();
        for (i, &v) in d.iter().enumerate() {
            out.entries[i * self.dim + i] += v;
        }
        Ok(out)
    }

    /// Copy with the diagonal set to zero.
    pub fn without_diagonal(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.entries[i * self.dim + i] = 0.0;
        }
        out
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j) == 0.0))
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.dim).all(|i| self.get(i, i) == 0.0)
    }
}

impl LinearOperator for MatrixOperator {
    fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    fn apply_coefficients(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "operand length must match the operator");
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(0.0, |acc, (a, v)| acc + a * v)
            })
            .collect()
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }
}

/// `M_u f = u f`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicationOperator {
    u_values: Vec<f64>,
    space: Arc<MeasureSpace>,
}

pub fn mult_op(u: &StepFunction) -> MultiplicationOperator {
    MultiplicationOperator {
        u_values: u.coefficients().to_vec(),
        space: Arc::clone(u.space()),
    }
}

impl MultiplicationOperator {
    pub fn new(space: Arc<MeasureSpace>, u_values: Vec<f64>) -> Result<Self> {
        if u_values.len() != space.dimension() {
            return Err(Error::DimensionMismatch {
                expected: space.dimension(),
                actual: u_values.len(),
            });
        }
        Ok(MultiplicationOperator { u_values, space })
    }

    pub fn u_values(&self) -> &[f64] {
        &self.u_values
    }

    pub fn to_matrix(&self) -> MatrixOperator {
        MatrixOperator::diagonal_from(Arc::clone(&self.space), &self.u_values)
    }

    /// `||M_u|| = max |u_i|` for every `p` and every choice of masses.
    pub fn norm(&self) -> f64 {
        self.u_values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_space(&self.space, &other.space)?;
        Ok(MultiplicationOperator {
            u_values: self
                .u_values
                .iter()
                .zip(&other.u_values)
                .map(|(a, b)| a + b)
                .collect(),
            space: Arc::clone(&self.space),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.u_values.iter().all(|&v| v == 0.0)
    }
}

impl LinearOperator for MultiplicationOperator {
    fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    fn apply_coefficients(&self, x: &[f64]) -> Vec<f64> {
        self.u_values.iter().zip(x).map(|(u, v)| u * v).collect()
    }

    fn diagonal(&self) -> Vec<f64> {
        self.u_values.clone()
    }
}

/// `K f = sum_r (integral eta_r f dmu) g_r`, stored by its factors so that
/// fine discretizations never materialize a dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankOperator {
    space: Arc<MeasureSpace>,
    /// `(g_r, eta_r)` pairs.
    terms: Vec<(Vec<f64>, Vec<f64>)>,
}

impl LowRankOperator {
    pub fn new(space: Arc<MeasureSpace>) -> Self {
        LowRankOperator {
            space,
            terms: Vec::new(),
        }
    }

    pub fn push(&mut self, eta: &StepFunction, g: &StepFunction) -> Result<()> {
        same_space(&self.space, eta.space())?;
        same_space(&self.space, g.space())?;
        self.terms
            .push((g.coefficients().to_vec(), eta.coefficients().to_vec()));
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    pub fn to_matrix(&self) -> MatrixOperator {
        let n = self.space.dimension();
        let mut out = MatrixOperator::zeros(Arc::clone(&self.space));
        for (g, eta) in &self.terms {
            for i in 0..n {
                for j in 0..n {
                    out.entries[i * n + j] += g[i] * eta[j] * self.space.mass(j);
                }
            }
        }
        out
    }
}

impl LinearOperator for LowRankOperator {
    fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    fn apply_coefficients(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (g, eta) in &self.terms {
            let pairing = eta
                .iter()
                .zip(x)
                .enumerate()
                .fold(0.0, |acc, (j, (e, v))| acc + e * v * self.space.mass(j));
            for (o, gi) in out.iter_mut().zip(g) {
                *o += pairing * gi;
            }
        }
        out
    }

    fn diagonal(&self) -> Vec<f64> {
        let n = self.space.dimension();
        (0..n)
            .map(|i| {
                self.terms
                    .iter()
                    .fold(0.0, |acc, (g, eta)| acc + g[i] * eta[i] * self.space.mass(i))
            })
            .collect()
    }
}

/// `K f = (integral eta f dmu) g`; entries `K[i][j] = g_i eta_j mu_j`.
pub fn rank_one_diffuse(eta: &StepFunction, g: &StepFunction) -> Result<MatrixOperator> {
    same_space(eta.space(), g.space())?;
    let space = Arc::clone(g.space());
    let n = space.dimension();
    let mut entries = Vec::with_capacity(n * n);
    for &gi in g.coefficients() {
        for (j, &ej) in eta.coefficients().iter().enumerate() {
            entries.push(gi * ej * space.mass(j));
        }
    }
    MatrixOperator::from_flat(space, entries)
}

/// `K f = (sum_{k != j} f_k eta_k mu_k) 1_{B_j}` on a purely atomic space.
/// Only row `j` is nonzero and its diagonal entry vanishes.
pub fn rank_one_atomic_offdiag(j: usize, eta: &StepFunction) -> Result<MatrixOperator> {
    let space = Arc::clone(eta.space());
    if !space.is_purely_atomic() {
        return Err(Error::DiffusePresent);
    }
    space.check_index(j)?;
    let mut k = MatrixOperator::zeros(space);
    for (col, &e) in eta.coefficients().iter().enumerate() {
        if col != j {
            let v = e * k.space.mass(col);
            k.set(j, col, v);
        }
    }
    Ok(k)
}

/// Exact operator norm on weighted `L_1`, with the first column attaining it.
pub fn opnorm_p1_with_column(a: &MatrixOperator) -> (f64, usize) {
    let n = a.dim;
    let mut best = (0.0, 0);
    for j in 0..n {
        let mut col = 0.0;
        for i in 0..n {
            col += a.get(i, j).abs() * a.space.mass(i);
        }
        let q = col / a.space.mass(j);
        if q > best.0 {
            best = (q, j);
        }
    }
    best
}

/// Exact `L_1 -> L_1` norm: `max_j (sum_i |A_ij| mu_i) / mu_j`.
pub fn opnorm_p1(a: &MatrixOperator) -> f64 {
    opnorm_p1_with_column(a).0
}

/// Result of the dual-ascent estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    /// `||A x||_p / ||x||_p` for the best iterate.
    pub value: f64,
    /// Best iterate in weighted (indicator) coordinates.
    pub argmax: Vec<f64>,
}

/// Certified lower bound for `||A||_{p -> p}`.
///
/// Exact at `p = 1`. Otherwise runs the `p`-norm power method from every
/// normalized indicator and from the constant function, keeping the best
/// ratio seen, so the value is never below `max_j ||A e_j||_p / ||e_j||_p`.
pub fn opnorm_estimate(a: &MatrixOperator, p: f64) -> Result<f64> {
    Ok(opnorm_estimate_with_witness(a, p)?.value)
}

pub fn opnorm_estimate_with_witness(a: &MatrixOperator, p: f64) -> Result<NormEstimate> {
    check_exponent(p)?;
    let n = a.dim;
    if p == 1.0 {
        let (value, j) = opnorm_p1_with_column(a);
        let mut argmax = vec![0.0; n];
        if n > 0 {
            argmax[j] = 1.0 / a.space.mass(j);
        }
        return Ok(NormEstimate { value, argmax });
    }
    if n == 0 {
        return Ok(NormEstimate {
            value: 0.0,
            argmax: Vec::new(),
        });
    }
    // Standard-coordinate matrix W A W^-1 with W = diag(mu^(1/p)); the
    // diagonal is copied verbatim since mu_j / mu_j = 1.
    let mut standard = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let aij = a.get(i, j);
            standard[i * n + j] = if i == j {
                aij
            } else {
                aij * mass_root(a.space.mass(i) / a.space.mass(j), p)
            };
        }
    }
    let q = p / (p - 1.0);

    let mut seeds: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    seeds.push(vec![1.0; n]);

    let mut best_value = -1.0;
    let mut best_x = Vec::new();
    for seed in seeds {
        let (value, x) = power_iterate(&standard, n, seed, p, q);
        if value > best_value {
            best_value = value;
            best_x = x;
        }
    }
    let argmax = best_x
        .iter()
        .enumerate()
        .map(|(i, v)| v / mass_root(a.space.mass(i), p))
        .collect();
    Ok(NormEstimate {
        value: best_value,
        argmax,
    })
}

fn matvec(m: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| m[i * n..(i + 1) * n].iter().zip(x).fold(0.0, |acc, (a, v)| acc + a * v))
        .collect()
}

fn matvec_t(m: &[f64], n: usize, y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for i in 0..n {
        let yi = y[i];
        if yi == 0.0 {
            continue;
        }
        for j in 0..n {
            out[j] += m[i * n + j] * yi;
        }
    }
    out
}

/// `v_i = sign(y_i) (|y_i| / ||y||_r)^(r-1)`, the norming functional of `y`.
fn dual_vector(y: &[f64], r: f64) -> Vec<f64> {
    let norm = lp_norm(y, r);
    y.iter()
        .map(|&v| v.signum() * (v.abs() / norm).powf(r - 1.0))
        .map(|v| if v.is_nan() { 0.0 } else { v })
        .collect()
}

fn power_iterate(m: &[f64], n: usize, seed: Vec<f64>, p: f64, q: f64) -> (f64, Vec<f64>) {
    let mut x = seed;
    let mut best = (-1.0, x.clone());
    let mut previous: Option<f64> = None;
    for _ in 0..ESTIMATE_MAX_ITER {
        let xn = lp_norm(&x, p);
        if xn == 0.0 {
            break;
        }
        let y = matvec(m, n, &x);
        let yn = lp_norm(&y, p);
        let ratio = yn / xn;
        if ratio > best.0 {
            best = (ratio, x.clone());
        }
        if yn == 0.0 {
            break;
        }
        if let Some(prev) = previous {
            if (ratio - prev).abs() <= ESTIMATE_REL_TOL * prev.abs() {
                break;
            }
        }
        previous = Some(ratio);
        let z = matvec_t(m, n, &dual_vector(&y, p));
        if lp_norm(&z, q) == 0.0 {
            break;
        }
        x = dual_vector(&z, q);
    }
    best
}

/// `sum_b P_b A P_b` over the blocks of a partition of the coordinates.
pub fn pinch(a: &MatrixOperator, blocks: &[Vec<usize>]) -> Result<MatrixOperator> {
    let n = a.dim;
    let mut block_of = vec![usize::MAX; n];
    for (b, block) in blocks.iter().enumerate() {
        for &i in block {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, dim: n });
            }
            if block_of[i] != usize::MAX {
                return Err(Error::DuplicateIndex(i));
            }
            block_of[i] = b;
        }
    }
    if let Some(missing) = block_of.iter().position(|&b| b == usize::MAX) {
        return Err(Error::UncoveredIndex(missing));
    }
    let mut out = a.clone();
    for i in 0..n {
        for j in 0..n {
            if block_of[i] != block_of[j] {
                out.entries[i * n + j] = 0.0;
            }
        }
    }
    Ok(out)
}

/// The partition into singletons (the full diagonal pinch).
pub fn singleton_blocks(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| vec![i]).collect()
}

/// A coordinate projection `f -> 1_S f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    mask: Vec<bool>,
}

impl Projection {
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mask)
            .map(|(&v, &keep)| if keep { v } else { 0.0 })
            .collect()
    }

    pub fn to_matrix(&self, space: Arc<MeasureSpace>) -> Result<MatrixOperator> {
        if self.mask.len() != space.dimension() {
            return Err(Error::DimensionMismatch {
                expected: space.dimension(),
                actual: self.mask.len(),
            });
        }
        let d: Vec<f64> = self.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Ok(MatrixOperator::diagonal_from(space, &d))
    }

    /// `P A`: rows outside the mask are zeroed.
    pub fn left_mul(&self, a: &MatrixOperator) -> MatrixOperator {
        let mut out = a.clone();
        for (i, &keep) in self.mask.iter().enumerate() {
            if !keep {
                out.entries[i * a.dim..(i + 1) * a.dim].fill(0.0);
            }
        }
        out
    }

    /// `A P`: columns outside the mask are zeroed.
    pub fn right_mul(&self, a: &MatrixOperator) -> MatrixOperator {
        let mut out = a.clone();
        for i in 0..a.dim {
            for (j, &keep) in self.mask.iter().enumerate() {
                if !keep {
                    out.entries[i * a.dim + j] = 0.0;
                }
            }
        }
        out
    }
}

/// `P_1, ..., P_n` onto the first `n` coordinates and `Q_n = I - sum P_j`.
pub fn projections(space: &MeasureSpace, n: usize) -> Result<(Vec<Projection>, Projection)> {
    let dim = space.dimension();
    if n > dim {
        return Err(Error::IndexOutOfRange { index: n, dim });
    }
    let ps = (0..n)
        .map(|j| Projection {
            mask: (0..dim).map(|i| i == j).collect(),
        })
        .collect();
    let q = Projection {
        mask: (0..dim).map(|i| i >= n).collect(),
    };
    Ok((ps, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{build_space, TailDescriptor};

    fn atoms(m: &[f64]) -> Arc<MeasureSpace> {
        Arc::new(build_space(m, TailDescriptor::FinitelySupported, None, 0).unwrap())
    }

    fn mat(space: &Arc<MeasureSpace>, rows: &[&[f64]]) -> MatrixOperator {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        MatrixOperator::from_rows(space.clone(), &rows).unwrap()
    }

    #[test]
    fn multiplication_examples() {
        let s = atoms(&[1.0, 1.0]);
        let u = StepFunction::new(s.clone(), vec![3.0, -5.0]).unwrap();
        let m = mult_op(&u);
        let one = StepFunction::constant(s.clone(), 1.0);
        assert_eq!(m.apply(&one).unwrap().coefficients(), &[3.0, -5.0]);
        assert_eq!(m.norm(), 5.0);
        assert_eq!(opnorm_p1(&m.to_matrix()), 5.0);

        let zero = mult_op(&StepFunction::zeros(s.clone()));
        assert_eq!(zero.to_matrix(), MatrixOperator::zeros(s.clone()));
        let id = mult_op(&StepFunction::constant(s.clone(), 1.0));
        assert_eq!(id.to_matrix(), MatrixOperator::identity(s));
    }

    #[test]
    fn rank_one_diffuse_examples() {
        let l0 = Arc::new(MeasureSpace::interval(0.0, 1.0, 0).unwrap());
        let one0 = StepFunction::constant(l0, 1.0);
        assert_eq!(rank_one_diffuse(&one0, &one0).unwrap().entries(), &[1.0]);

        let l1 = Arc::new(MeasureSpace::interval(0.0, 1.0, 1).unwrap());
        let one1 = StepFunction::constant(l1.clone(), 1.0);
        let k = rank_one_diffuse(&one1, &one1).unwrap();
        assert!(k.entries().iter().all(|&v| v == 0.5));

        let zero = StepFunction::zeros(l1.clone());
        assert_eq!(rank_one_diffuse(&zero, &one1).unwrap(), MatrixOperator::zeros(l1));
    }

    #[test]
    fn rank_one_offdiag_examples() {
        let s = atoms(&[1.0, 1.0]);
        let k = rank_one_atomic_offdiag(0, &StepFunction::constant(s.clone(), 1.0)).unwrap();
        assert_eq!(k.to_rows(), vec![vec![0.0, 1.0], vec![0.0, 0.0]]);

        let s3 = atoms(&[1.0, 1.0, 2.0]);
        let k3 = rank_one_atomic_offdiag(1, &StepFunction::constant(s3.clone(), 1.0)).unwrap();
        assert_eq!(k3.row(1), &[1.0, 0.0, 2.0]);
        assert!(k3.row(0).iter().chain(k3.row(2)).all(|&v| v == 0.0));

        let z = rank_one_atomic_offdiag(2, &StepFunction::zeros(s3.clone())).unwrap();
        assert_eq!(z, MatrixOperator::zeros(s3));
    }

    #[test]
    fn rank_one_offdiag_needs_atoms() {
        let mixed = Arc::new(
            build_space(&[1.0], TailDescriptor::FinitelySupported, Some((0.0, 1.0)), 1).unwrap(),
        );
        let eta = StepFunction::constant(mixed, 1.0);
        assert_eq!(rank_one_atomic_offdiag(0, &eta), Err(Error::DiffusePresent));
        let s = atoms(&[1.0]);
        assert!(rank_one_atomic_offdiag(1, &StepFunction::constant(s, 1.0)).is_err());
    }

    #[test]
    fn opnorm_p1_examples() {
        let s = atoms(&[1.0, 1.0]);
        assert_eq!(opnorm_p1(&mat(&s, &[&[1.0, -2.0], &[3.0, 4.0]])), 6.0);
        let w = atoms(&[0.3, 2.0, 0.125]);
        assert_eq!(opnorm_p1(&MatrixOperator::identity(w)), 1.0);
    }

    #[test]
    fn opnorm_p1_uses_weights() {
        // column 0 of [[0,0],[1,0]] maps e_0/mu_0 to (mu_1/mu_0) e_1/mu_1
        let s = atoms(&[0.5, 2.0]);
        let a = mat(&s, &[&[0.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(opnorm_p1(&a), 4.0);
    }

    #[test]
    fn estimator_examples() {
        let s = atoms(&[1.0, 1.0]);
        let d = mat(&s, &[&[3.0, 0.0], &[0.0, -5.0]]);
        assert_eq!(opnorm_estimate(&d, 2.0).unwrap(), 5.0);
        let swap = mat(&s, &[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!((opnorm_estimate(&swap, 2.0).unwrap() - 1.0).abs() < 1e-15);
        let a = mat(&s, &[&[1.0, -2.0], &[3.0, 4.0]]);
        assert_eq!(opnorm_estimate(&a, 1.0).unwrap(), opnorm_p1(&a));
        assert_eq!(opnorm_estimate(&a, 0.9), Err(Error::InvalidExponent(0.9)));
    }

    #[test]
    fn estimator_matches_spectral_norm_at_two() {
        // ||[[1,2],[3,4]]||_2 = sqrt(15 + sqrt(221))
        let s = atoms(&[1.0, 1.0]);
        let a = mat(&s, &[&[1.0, 2.0], &[3.0, 4.0]]);
        let exact = (15.0 + 221f64.sqrt()).sqrt();
        let est = opnorm_estimate(&a, 2.0).unwrap();
        assert!(est <= exact * (1.0 + 1e-14));
        assert!(est >= exact * (1.0 - 1e-10));
    }

    #[test]
    fn pinch_examples() {
        let s = atoms(&[1.0, 1.0]);
        let a = mat(&s, &[&[1.0, 2.0], &[3.0, 4.0]]);
        let d = pinch(&a, &[vec![0], vec![1]]).unwrap();
        assert_eq!(d.to_rows(), vec![vec![1.0, 0.0], vec![0.0, 4.0]]);
        assert_eq!(pinch(&a, &[vec![0, 1]]).unwrap(), a);

        let s3 = atoms(&[1.0; 3]);
        let b = MatrixOperator::from_flat(s3, (1..=9).map(f64::from).collect()).unwrap();
        let p = pinch(&b, &[vec![0, 1], vec![2]]).unwrap();
        assert_eq!(
            p.to_rows(),
            vec![vec![1.0, 2.0, 0.0], vec![4.0, 5.0, 0.0], vec![0.0, 0.0, 9.0]]
        );
    }

    #[test]
    fn pinch_errors() {
        let s = atoms(&[1.0, 1.0]);
        let a = MatrixOperator::identity(s);
        assert!(matches!(pinch(&a, &[vec![0, 2]]), Err(Error::IndexOutOfRange { .. })));
        assert_eq!(pinch(&a, &[vec![0, 1], vec![1]]), Err(Error::DuplicateIndex(1)));
        assert_eq!(pinch(&a, &[vec![0]]), Err(Error::UncoveredIndex(1)));
    }

    #[test]
    fn projection_examples() {
        let s = atoms(&[1.0, 1.0]);
        let (ps, q) = projections(&s, 2).unwrap();
        assert!(q.mask().iter().all(|&b| !b));
        assert_eq!(ps[0].apply(&[5.0, 7.0]), vec![5.0, 0.0]);
        let (none, q0) = projections(&s, 0).unwrap();
        assert!(none.is_empty());
        assert_eq!(q0.to_matrix(s.clone()).unwrap(), MatrixOperator::identity(s.clone()));
        assert!(projections(&s, 3).is_err());
    }

    #[test]
    fn projections_sum_to_identity() {
        let s = atoms(&[1.0, 0.5, 0.25, 2.0]);
        for n in 0..=4 {
            let (ps, q) = projections(&s, n).unwrap();
            let mut total = q.to_matrix(s.clone()).unwrap();
            for p in &ps {
                total = total.add(&p.to_matrix(s.clone()).unwrap()).unwrap();
            }
            assert_eq!(total, MatrixOperator::identity(s.clone()));
        }
    }

    #[test]
    fn low_rank_matches_dense() {
        let s = Arc::new(
            build_space(&[0.5], TailDescriptor::FinitelySupported, Some((0.0, 2.0)), 2).unwrap(),
        );
        let eta = StepFunction::new(s.clone(), vec![1.0, -2.0, 0.5, 3.0, 0.0]).unwrap();
        let g = StepFunction::new(s.clone(), vec![0.25, 1.0, -1.0, 2.0, 4.0]).unwrap();
        let mut k = LowRankOperator::new(s.clone());
        k.push(&eta, &g).unwrap();
        k.push(&g, &eta).unwrap();
        let dense = rank_one_diffuse(&eta, &g)
            .unwrap()
            .add(&rank_one_diffuse(&g, &eta).unwrap())
            .unwrap();
        assert_eq!(k.to_matrix(), dense);
        let x = [1.0, 2.0, 3.0, -1.0, 0.5];
        let (a, b) = (k.apply_coefficients(&x), dense.apply_coefficients(&x));
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
        assert_eq!(k.diagonal(), dense.diagonal());
    }

    #[test]
    fn compose_and_transpose() {
        let s = atoms(&[1.0, 1.0]);
        let a = mat(&s, &[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = mat(&s, &[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(a.compose(&b).unwrap().to_rows(), vec![vec![2.0, 1.0], vec![4.0, 3.0]]);
        assert_eq!(a.transpose().transpose(), a);
    }
}
