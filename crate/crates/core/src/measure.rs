//! Discretized measure spaces: a finite list of atoms followed by a
//! bounded interval split into `2^level` equal dyadic cells.
//!
//! Coordinates are laid out atoms first, then diffuse cells in increasing
//! order of position. Cell masses are `(b - a) * 2^-level`, which is exact
//! in binary floating point whenever `b - a` is, so refinement preserves
//! the total diffuse mass bit for bit.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dyadic level (2^30 cells).
pub const MAX_LEVEL: u32 = 30;

/// Closed-form description of an atom sequence beyond its stored prefix.
///
/// Only the data needed for `limsup |u_n|` is retained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailDescriptor {
    /// Eventually zero.
    #[default]
    FinitelySupported,
    /// `|u_n| -> |c|`; generated values are the constant `c`.
    ConstantLimit { c: f64 },
    /// `u_n = c + alpha / n`.
    HarmonicLimit { c: f64, alpha: f64 },
    /// `u_n` alternates `c1, c2, c1, ...` starting at `n = 1`.
    Alternating { c1: f64, c2: f64 },
}

impl TailDescriptor {
    /// `limsup_{n -> inf} |u_n|` in closed form.
    pub fn limsup_abs(&self) -> f64 {
        match *self {
            TailDescriptor::FinitelySupported => 0.0,
            TailDescriptor::ConstantLimit { c } => c.abs(),
            TailDescriptor::HarmonicLimit { c, .. } => c.abs(),
            TailDescriptor::Alternating { c1, c2 } => c1.abs().max(c2.abs()),
        }
    }

    /// The value `u_n` prescribed by the rule, with `n` starting at 1.
    ///
    /// `FinitelySupported` carries no values and yields 0.
    pub fn value(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        match *self {
            TailDescriptor::FinitelySupported => 0.0,
            TailDescriptor::ConstantLimit { c } => c,
            TailDescriptor::HarmonicLimit { c, alpha } => c + alpha / n as f64,
            TailDescriptor::Alternating { c1, c2 } => {
                if n % 2 == 1 {
                    c1
                } else {
                    c2
                }
            }
        }
    }

    /// `sup_{n > after} |u_n|` over the part of the rule past index `after`.
    pub fn sup_abs_after(&self, after: usize) -> f64 {
        match *self {
            TailDescriptor::HarmonicLimit { c, .. } => {
                // c + alpha/n is monotone in n and |.| is convex, so the sup
                // sits at the first index or in the limit.
                self.value(after + 1).abs().max(c.abs())
            }
            _ => self.limsup_abs(),
        }
    }
}

/// `limsup |u_n|` of the full sequence whose first values are `stored` and
/// whose remainder follows `tail`. A finite prefix never affects a limsup.
pub fn limsup_abs(tail: &TailDescriptor, _stored: &[f64]) -> f64 {
    tail.limsup_abs()
}

/// The diffuse component: the interval `(a, b)` split into `2^level` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusePart {
    pub a: f64,
    pub b: f64,
    pub level: u32,
}

impl DiffusePart {
    pub fn num_cells(&self) -> usize {
        1usize << self.level
    }

    pub fn cell_mass(&self) -> f64 {
        (self.b - self.a) / (1u64 << self.level) as f64
    }

    /// Endpoints of cell `k` (0-based, left to right).
    pub fn cell_bounds(&self, k: usize) -> (f64, f64) {
        let n = self.num_cells() as f64;
        let width = self.b - self.a;
        (
            self.a + width * (k as f64 / n),
            self.a + width * ((k + 1) as f64 / n),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    atom_masses: Vec<f64>,
    atom_tail: TailDescriptor,
    diffuse: Option<DiffusePart>,
}

/// Builds a space from atom masses, the atom tail rule, and an optional
/// diffuse interval split into `2^diffuse_level` cells.
pub fn build_space(
    atom_masses: &[f64],
    atom_tail: TailDescriptor,
    diffuse_interval: Option<(f64, f64)>,
    diffuse_level: u32,
) -> Result<MeasureSpace> {
    for (index, &mass) in atom_masses.iter().enumerate() {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::NonPositiveMass { index, mass });
        }
    }
    let diffuse = match diffuse_interval {
        None => None,
        Some((a, b)) => {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::EmptyInterval { a, b });
            }
            if diffuse_level > MAX_LEVEL {
                return Err(Error::LevelTooLarge(diffuse_level));
            }
            Some(DiffusePart {
                a,
                b,
                level: diffuse_level,
            })
        }
    };
    Ok(MeasureSpace {
        atom_masses: atom_masses.to_vec(),
        atom_tail,
        diffuse,
    })
}

/// One dyadic refinement step: every diffuse cell is split in two.
pub fn refine(space: &MeasureSpace) -> Result<MeasureSpace> {
    space.refined()
}

impl MeasureSpace {
    /// `n` atoms of unit mass and no diffuse part.
    pub fn unit_atoms(n: usize) -> Self {
        MeasureSpace {
            atom_masses: vec![1.0; n],
            atom_tail: TailDescriptor::FinitelySupported,
            diffuse: None,
        }
    }

    /// The interval `(a, b)` at the given level, without atoms.
    pub fn interval(a: f64, b: f64, level: u32) -> Result<Self> {
        build_space(&[], TailDescriptor::FinitelySupported, Some((a, b)), level)
    }

    pub fn atom_masses(&self) -> &[f64] {
        &self.atom_masses
    }

    pub fn atom_tail(&self) -> &TailDescriptor {
        &self.atom_tail
    }

    pub fn diffuse(&self) -> Option<&DiffusePart> {
        self.diffuse.as_ref()
    }

    pub fn num_atoms(&self) -> usize {
        self.atom_masses.len()
    }

    pub fn num_cells(&self) -> usize {
        self.diffuse.map_or(0, |d| d.num_cells())
    }

    pub fn dimension(&self) -> usize {
        self.num_atoms() + self.num_cells()
    }

    pub fn level(&self) -> Option<u32> {
        self.diffuse.map(|d| d.level)
    }

    pub fn is_purely_atomic(&self) -> bool {
        self.diffuse.is_none()
    }

    pub fn atom_range(&self) -> Range<usize> {
        0..self.num_atoms()
    }

    pub fn diffuse_range(&self) -> Range<usize> {
        self.num_atoms()..self.dimension()
    }

    /// Mass of coordinate `i`.
    #[inline]
    pub fn mass(&self, i: usize) -> f64 {
        if i < self.atom_masses.len() {
            self.atom_masses[i]
        } else {
            self.diffuse
                .as_ref()
                .expect("coordinate beyond the atoms of a purely atomic space")
                .cell_mass()
        }
    }

    /// Masses of all coordinates in layout order.
    pub fn masses(&self) -> Vec<f64> {
        let mut out = self.atom_masses.clone();
        if let Some(d) = &self.diffuse {
            out.extend(std::iter::repeat_n(d.cell_mass(), d.num_cells()));
        }
        out
    }

    pub fn diffuse_mass(&self) -> f64 {
        self.diffuse.map_or(0.0, |d| d.b - d.a)
    }

    pub fn refined(&self) -> Result<Self> {
        let d = self.diffuse.ok_or(Error::PurelyAtomic)?;
        if d.level >= MAX_LEVEL {
            return Err(Error::LevelTooLarge(d.level + 1));
        }
        Ok(MeasureSpace {
            atom_masses: self.atom_masses.clone(),
            atom_tail: self.atom_tail,
            diffuse: Some(DiffusePart {
                level: d.level + 1,
                ..d
            }),
        })
    }

    /// The same space with its diffuse part at `level`.
    pub fn at_level(&self, level: u32) -> Result<Self> {
        let d = self.diffuse.ok_or(Error::PurelyAtomic)?;
        if level > MAX_LEVEL {
            return Err(Error::LevelTooLarge(level));
        }
        Ok(MeasureSpace {
            atom_masses: self.atom_masses.clone(),
            atom_tail: self.atom_tail,
            diffuse: Some(DiffusePart { level, ..d }),
        })
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.dimension() {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.dimension(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_only() {
        let s = build_space(&[1.0, 0.5, 0.25], TailDescriptor::FinitelySupported, None, 0).unwrap();
        assert_eq!(s.dimension(), 3);
        assert!(s.is_purely_atomic());
        assert_eq!(s.masses(), vec![1.0, 0.5, 0.25]);
    }

    #[test]
    fn interval_level_three() {
        let s = MeasureSpace::interval(0.0, 1.0, 3).unwrap();
        assert_eq!(s.dimension(), 8);
        assert!(s.masses().iter().all(|&m| m == 0.125));
    }

    #[test]
    fn mixed_level_zero() {
        let s = build_space(&[1.0], TailDescriptor::FinitelySupported, Some((0.0, 1.0)), 0).unwrap();
        assert_eq!(s.dimension(), 2);
        assert_eq!(s.masses(), vec![1.0, 1.0]);
    }

    #[test]
    fn rejects_bad_masses_and_intervals() {
        let t = TailDescriptor::FinitelySupported;
        assert_eq!(
            build_space(&[1.0, 0.0], t, None, 0),
            Err(Error::NonPositiveMass { index: 1, mass: 0.0 })
        );
        assert!(matches!(
            build_space(&[-1.0], t, None, 0),
            Err(Error::NonPositiveMass { .. })
        ));
        assert!(matches!(
            build_space(&[], t, Some((1.0, 0.0)), 0),
            Err(Error::EmptyInterval { .. })
        ));
        assert!(matches!(
            build_space(&[], t, Some((0.5, 0.5)), 0),
            Err(Error::EmptyInterval { .. })
        ));
    }

    #[test]
    fn refinement_halves_cells() {
        let s = MeasureSpace::interval(0.0, 1.0, 0).unwrap();
        let s1 = refine(&s).unwrap();
        assert_eq!(s1.level(), Some(1));
        assert_eq!(s1.masses(), vec![0.5, 0.5]);
        let s3 = refine(&refine(&s1).unwrap()).unwrap();
        assert_eq!(s3.level(), Some(3));
        assert!(s3.masses().iter().all(|&m| m == 0.125));
    }

    #[test]
    fn refinement_keeps_atoms_and_total_mass() {
        let s = build_space(&[0.3, 0.7], TailDescriptor::FinitelySupported, Some((-1.0, 2.0)), 2)
            .unwrap();
        let mut cur = s.clone();
        for k in 1..=6 {
            cur = cur.refined().unwrap();
            assert_eq!(cur.atom_masses(), s.atom_masses());
            assert_eq!(cur.dimension(), 2 + (1 << (2 + k)));
            let total: f64 = cur.diffuse_range().map(|i| cur.mass(i)).sum();
            assert_eq!(total, 3.0);
        }
    }

    #[test]
    fn atoms_cannot_be_refined() {
        assert_eq!(refine(&MeasureSpace::unit_atoms(4)), Err(Error::PurelyAtomic));
    }

    #[test]
    fn limsup_closed_forms() {
        let h = TailDescriptor::HarmonicLimit { c: 1.0, alpha: 1.0 };
        assert_eq!(limsup_abs(&h, &[2.0, 1.5]), 1.0);
        assert_eq!(limsup_abs(&TailDescriptor::FinitelySupported, &[5.0, 4.0, 3.0]), 0.0);
        let alt = TailDescriptor::Alternating { c1: 2.0, c2: -3.0 };
        assert_eq!(limsup_abs(&alt, &[]), 3.0);
        assert_eq!(limsup_abs(&TailDescriptor::ConstantLimit { c: -0.5 }, &[9.0]), 0.5);
    }

    #[test]
    fn tail_values() {
        let h = TailDescriptor::HarmonicLimit { c: 1.0, alpha: 1.0 };
        assert_eq!(h.value(1), 2.0);
        assert_eq!(h.value(4), 1.25);
        assert_eq!(h.sup_abs_after(100), 1.0 + 1.0 / 101.0);
        let alt = TailDescriptor::Alternating { c1: 2.0, c2: -3.0 };
        assert_eq!((alt.value(1), alt.value(2), alt.value(3)), (2.0, -3.0, 2.0));
    }

    #[test]
    fn cell_bounds_tile_the_interval() {
        let d = MeasureSpace::interval(0.0, 1.0, 4).unwrap();
        let part = d.diffuse().unwrap();
        assert_eq!(part.cell_bounds(0), (0.0, 0.0625));
        assert_eq!(part.cell_bounds(15).1, 1.0);
    }
}
