//! Step functions on a [`MeasureSpace`] and their weighted `L_p` norms.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::MeasureSpace;

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// Unweighted `p`-norm, computed as `m * (sum (|v_i|/m)^p)^(1/p)` with
/// `m = max |v_i|`. The scaling guarantees the result is never below
/// `max |v_i|` in floating point.
pub fn lp_norm(values: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        return values.iter().fold(0.0, |acc, v| acc + v.abs());
    }
    let m = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s = values.iter().fold(0.0, |acc, v| {
        let r = v.abs() / m;
        acc + if p == 2.0 { r * r } else { r.powf(p) }
    });
    let root = if p == 2.0 { s.sqrt() } else { s.powf(1.0 / p) };
    m * root.max(1.0)
}

/// `mu^(1/p)`, exact at `p = 1`.
#[inline]
pub(crate) fn mass_root(mu: f64, p: f64) -> f64 {
    if p == 1.0 {
        mu
    } else if p == 2.0 {
        mu.sqrt()
    } else {
        mu.powf(1.0 / p)
    }
}

/// A function that is constant on every atom and every diffuse cell.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    coefficients: Vec<f64>,
    space: Arc<MeasureSpace>,
}

impl StepFunction {
    pub fn new(space: Arc<MeasureSpace>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != space.dimension() {
            return Err(Error::DimensionMismatch {
                expected: space.dimension(),
                actual: coefficients.len(),
            });
        }
        Ok(StepFunction {
            coefficients,
            space,
        })
    }

    pub fn zeros(space: Arc<MeasureSpace>) -> Self {
        let n = space.dimension();
        StepFunction {
            coefficients: vec![0.0; n],
            space,
        }
    }

    pub fn constant(space: Arc<MeasureSpace>, value: f64) -> Self {
        let n = space.dimension();
        StepFunction {
            coefficients: vec![value; n],
            space,
        }
    }

    /// Atom values taken from `atoms` and diffuse values from cell averages
    /// of `profile`. Missing pieces are zero.
    pub fn from_parts(
        space: Arc<MeasureSpace>,
        atoms: &[f64],
        profile: Option<&Profile>,
    ) -> Result<Self> {
        if atoms.len() != space.num_atoms() {
            return Err(Error::DimensionMismatch {
                expected: space.num_atoms(),
                actual: atoms.len(),
            });
        }
        let mut coefficients = atoms.to_vec();
        match (space.diffuse(), profile) {
            (Some(_), Some(profile)) => coefficients.extend(profile.cell_averages(&space)?),
            (Some(_), None) => coefficients.extend(std::iter::repeat_n(0.0, space.num_cells())),
            (None, Some(_)) => return Err(Error::PurelyAtomic),
            (None, None) => {}
        }
        Ok(StepFunction {
            coefficients,
            space,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn sup_abs(&self) -> f64 {
        self.coefficients.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `integral f dmu`.
    pub fn integral(&self) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .fold(0.0, |acc, (i, v)| acc + v * self.space.mass(i))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        StepFunction {
            coefficients: self.coefficients.iter().map(|&v| f(v)).collect(),
            space: Arc::clone(&self.space),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        same_space(&self.space, &other.space)?;
        Ok(StepFunction {
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
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

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }
}

pub(crate) fn same_space(a: &Arc<MeasureSpace>, b: &Arc<MeasureSpace>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

/// Weighted norm `(sum |f_i|^p mu_i)^(1/p)` of raw coefficients.
pub(crate) fn weighted_norm(space: &MeasureSpace, coefficients: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        // fixed left-to-right order
        return coefficients
            .iter()
            .enumerate()
            .fold(0.0, |acc, (i, v)| acc + v.abs() * space.mass(i));
    }
    let standard: Vec<f64> = coefficients
        .iter()
        .enumerate()
        .map(|(i, v)| v * mass_root(space.mass(i), p))
        .collect();
    lp_norm(&standard, p)
}

pub fn norm_p(f: &StepFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(weighted_norm(&f.space, &f.coefficients, p))
}

/// `1_A / mu(A)^(1/p)`, the unit-norm indicator of the coordinates in
/// `index_set`.
pub fn normalized_indicator(
    space: &Arc<MeasureSpace>,
    index_set: &[usize],
    p: f64,
) -> Result<StepFunction> {
    check_exponent(p)?;
    if index_set.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let mut seen = HashSet::with_capacity(index_set.len());
    let mut total = 0.0;
    for &i in index_set {
        space.check_index(i)?;
        if !seen.insert(i) {
            return Err(Error::DuplicateIndex(i));
        }
        total += space.mass(i);
    }
    let height = 1.0 / mass_root(total, p);
    let mut coefficients = vec![0.0; space.dimension()];
    for &i in index_set {
        coefficients[i] = height;
    }
    Ok(StepFunction {
        coefficients,
        space: Arc::clone(space),
    })
}

/// Isometry onto unweighted `l_p`: `f_i -> f_i * mu_i^(1/p)`.
pub fn to_standard(f: &StepFunction, p: f64) -> Result<Vec<f64>> {
    check_exponent(p)?;
    Ok(f.coefficients
        .iter()
        .enumerate()
        .map(|(i, v)| v * mass_root(f.space.mass(i), p))
        .collect())
}

pub fn from_standard(c: &[f64], space: &Arc<MeasureSpace>, p: f64) -> Result<StepFunction> {
    check_exponent(p)?;
    let coefficients = c
        .iter()
        .enumerate()
        .map(|(i, v)| v / mass_root(space.mass(i), p))
        .collect();
    StepFunction::new(Arc::clone(space), coefficients)
}

/// A function on the diffuse interval, sampled per cell by averaging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant { value: f64 },
    /// `sum_k coefficients[k] * x^k` in the absolute coordinate `x`.
    Polynomial { coefficients: Vec<f64> },
    /// Piecewise constant on `values.len()` equal pieces of the interval.
    Step { values: Vec<f64> },
}

impl Profile {
    /// The identity `u(x) = x`.
    pub fn identity() -> Self {
        Profile::Polynomial {
            coefficients: vec![0.0, 1.0],
        }
    }

    fn eval_poly(coefficients: &[f64], x: f64) -> f64 {
        coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn antiderivative(coefficients: &[f64], x: f64) -> f64 {
        coefficients
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, c)| acc * x + c / (k + 1) as f64)
            * x
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Profile::Step { values } if values.is_empty() => Err(Error::Precondition(
                "step profile needs at least one value".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Average of the profile over `[lo, hi]` within the interval `(a, b)`.
    pub fn average(&self, a: f64, b: f64, lo: f64, hi: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Polynomial { coefficients } => {
                (Self::antiderivative(coefficients, hi) - Self::antiderivative(coefficients, lo))
                    / (hi - lo)
            }
            Profile::Step { values } => {
                let n = values.len();
                let width = (b - a) / n as f64;
                let piece = |x: f64| (((x - a) / width).floor().max(0.0) as usize).min(n - 1);
                let (first, last) = (piece(lo), piece(hi));
                // a cell ending exactly on a breakpoint does not touch the next piece
                let last = if last > first && a + width * last as f64 >= hi {
                    last - 1
                } else {
                    last
                };
                if first == last {
                    return values[first];
                }
                let mut acc = 0.0;
                for (k, v) in values.iter().enumerate().take(last + 1).skip(first) {
                    let plo = a + width * k as f64;
                    let phi = if k + 1 == n { b } else { a + width * (k + 1) as f64 };
                    acc += v * (phi.min(hi) - plo.max(lo));
                }
                acc / (hi - lo)
            }
        }
    }

    /// Cell averages over the diffuse cells of `space`.
    pub fn cell_averages(&self, space: &MeasureSpace) -> Result<Vec<f64>> {
        self.validate()?;
        let d = space.diffuse().ok_or(Error::PurelyAtomic)?;
        Ok((0..d.num_cells())
            .map(|k| {
                let (lo, hi) = d.cell_bounds(k);
                self.average(d.a, d.b, lo, hi)
            })
            .collect())
    }

    /// `sup |profile|` over `[a, b]`.
    pub fn sup_abs(&self, a: f64, b: f64) -> f64 {
        match self {
            Profile::Constant { value } => value.abs(),
            Profile::Step { values } => values.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            Profile::Polynomial { coefficients } => {
                let mut candidates = vec![a, b];
                let deriv: Vec<f64> = coefficients
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, c)| k as f64 * c)
                    .collect();
                match deriv.len() {
                    0 | 1 => {}
                    2 => {
                        if deriv[1] != 0.0 {
                            candidates.push(-deriv[0] / deriv[1]);
                        }
                    }
                    3 => {
                        let (c0, c1, c2) = (deriv[0], deriv[1], deriv[2]);
                        if c2 == 0.0 {
                            if c1 != 0.0 {
                                candidates.push(-c0 / c1);
                            }
                        } else {
                            let disc = c1 * c1 - 4.0 * c2 * c0;
                            if disc >= 0.0 {
                                let r = disc.sqrt();
                                candidates.push((-c1 + r) / (2.0 * c2));
                                candidates.push((-c1 - r) / (2.0 * c2));
                            }
                        }
                    }
                    _ => {
                        // higher degree: dense sampling
                        let n = 1 << 16;
                        candidates.extend((0..=n).map(|k| a + (b - a) * k as f64 / n as f64));
                    }
                }
                candidates
                    .into_iter()
                    .filter(|x| *x >= a && *x <= b)
                    .map(|x| Self::eval_poly(coefficients, x).abs())
                    .fold(0.0, f64::max)
            }
        }
    }
}
