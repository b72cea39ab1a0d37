//! Normalized amplitude vectors with a space tag.

use crate::error::{CoreError, Result};
use crate::space::Space;
use crate::{tol, C64};
use nalgebra::DVector;

/// A pure state: normalized complex amplitudes over a tagged basis.
#[derive(Debug, Clone)]
pub struct QuantumState {
    space: Space,
    amplitudes: DVector<C64>,
}

impl QuantumState {
    /// Wrap an amplitude vector, requiring unit norm within tolerance.
    pub fn new(space: Space, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(CoreError::invalid(format!(
                "amplitude vector length {} does not match dimension {}",
                amplitudes.len(),
                space.dim()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol::NORM_PRESERVATION {
            return Err(CoreError::invalid(format!(
                "state norm {norm} deviates from 1 beyond tolerance"
            )));
        }
        Ok(QuantumState { space, amplitudes })
    }

    /// Wrap and normalize an arbitrary nonzero vector.
    pub fn normalized(space: Space, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(CoreError::invalid("cannot normalize the zero vector"));
        }
        QuantumState::new(space, amplitudes / C64::new(norm, 0.0))
    }

    /// Computational basis state |index>.
    pub fn basis_state(space: Space, index: usize) -> Result<Self> {
        let dim = space.dim();
        if index >= dim {
            return Err(CoreError::IndexOutOfRange {
                what: "basis state",
                index,
                bound: dim,
            });
        }
        let mut v = DVector::from_element(dim, C64::new(0.0, 0.0));
        v[index] = C64::new(1.0, 0.0);
        Ok(QuantumState {
            space,
            amplitudes: v,
        })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Inner product <self|other>.
    pub fn overlap(&self, other: &QuantumState) -> Result<C64> {
        if self.space != other.space {
            return Err(CoreError::SpaceMismatch {
                expected: self.space,
                found: other.space,
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// |<self|other>|^2.
    pub fn fidelity(&self, other: &QuantumState) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    /// Probability of basis outcome `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// Expectation value of a Hermitian operator.
    pub fn expectation(&self, op: &super::Operator) -> Result<f64> {
        if self.space != op.space() {
            return Err(CoreError::SpaceMismatch {
                expected: self.space,
                found: op.space(),
            });
        }
        let hv = op.apply_vec(&self.amplitudes);
        Ok(self.amplitudes.dotc(&hv).re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_state_is_unit() {
        let s = QuantumState::basis_state(Space::Logical(2), 3).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert_eq!(s.probability(3), 1.0);
    }

    #[test]
    fn out_of_range_basis_errors() {
        let err = QuantumState::basis_state(Space::Logical(1), 2).unwrap_err();
        assert!(matches!(err, CoreError::IndexOutOfRange { .. }));
    }

    #[test]
    fn norm_check_enforced() {
        let v = DVector::from_vec(vec![C64::new(2.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(QuantumState::new(Space::Logical(1), v.clone()).is_err());
        let s = QuantumState::normalized(Space::Logical(1), v).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }
}
