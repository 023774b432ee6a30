//! Phase-space points and rectangular sampling domains.

use nalgebra::DVector;

use crate::error::{CoreError, Result};

/// A point of the even-dimensional phase space `R^{2n}`.
///
/// Construction checks that the dimension is even, nonzero and that every
/// coordinate is finite; the interior of the crate can then assume both.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    coords: DVector<f64>,
}

impl PhasePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || !coords.len().is_multiple_of(2) {
            return Err(CoreError::Dimension(format!(
                "phase space dimension must be even and nonzero, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::NumericalDomain {
                point: coords,
                context: "phase point has non-finite coordinates".into(),
            });
        }
        Ok(Self { coords: DVector::from_vec(coords) })
    }

    /// Skips validation; callers must guarantee even length and finiteness.
    pub(crate) fn from_dvector_unchecked(coords: DVector<f64>) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.coords.as_slice().to_vec()
    }

    /// Copy with one coordinate shifted; used by difference stencils.
    pub fn shifted(&self, i: usize, delta: f64) -> Self {
        let mut coords = self.coords.clone();
        coords[i] += delta;
        Self { coords }
    }
}

impl std::ops::Index<usize> for PhasePoint {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

/// Axis-aligned box used to sample random points and to watch trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    bounds: Vec<(f64, f64)>,
}

impl DomainBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() || !bounds.len().is_multiple_of(2) {
            return Err(CoreError::Dimension(format!(
                "domain box dimension must be even and nonzero, got {}",
                bounds.len()
            )));
        }
        for (i, (lo, hi)) in bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(CoreError::Config(format!(
                    "domain bound {} must satisfy lo < hi with finite endpoints, got [{}, {}]",
                    i, lo, hi
                )));
            }
        }
        Ok(Self { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, x: &PhasePoint) -> bool {
        x.dim() == self.dim()
            && self
                .bounds
                .iter()
                .zip(x.as_slice())
                .all(|((lo, hi), c)| *lo <= *c && *c <= *hi)
    }

    pub fn center(&self) -> PhasePoint {
        PhasePoint::from_dvector_unchecked(DVector::from_iterator(
            self.dim(),
            self.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)),
        ))
    }

    /// Maps unit-interval samples to a point of the box. The caller provides
    /// one `u in [0,1]` per coordinate, typically from a seeded generator.
    pub fn lerp(&self, unit: &[f64]) -> Result<PhasePoint> {
        if unit.len() != self.dim() {
            return Err(CoreError::Dimension(format!(
                "expected {} unit samples, got {}",
                self.dim(),
                unit.len()
            )));
        }
        PhasePoint::new(
            self.bounds
                .iter()
                .zip(unit)
                .map(|((lo, hi), u)| lo + (hi - lo) * u)
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_dimension() {
        assert!(PhasePoint::new(vec![1.0, 2.0, 3.0]).is_err());
        assert!(PhasePoint::new(vec![]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(PhasePoint::new(vec![0.0, f64::NAN]).is_err());
        assert!(PhasePoint::new(vec![f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn box_membership_and_center() {
        let b = DomainBox::new(vec![(0.0, 1.0), (-2.0, 2.0)]).unwrap();
        assert!(b.contains(&PhasePoint::new(vec![0.5, 0.0]).unwrap()));
        assert!(!b.contains(&PhasePoint::new(vec![1.5, 0.0]).unwrap()));
        assert_eq!(b.center().as_slice(), &[0.5, 0.0]);
    }

    #[test]
    fn box_rejects_inverted_bounds() {
        assert!(DomainBox::new(vec![(1.0, 0.0), (0.0, 1.0)]).is_err());
    }
}
