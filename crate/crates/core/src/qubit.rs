//! Two-level states in single-rail or dual-rail photonic encodings.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::FockState;

/// Leakage outside the dual-rail subspace tolerated when extracting a qubit.
pub const DUAL_RAIL_LEAKAGE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    /// `{|0>, |1>}` on one mode.
    SingleRail,
    /// `{|01>, |10>}` on two modes: component 0 has the photon in the second mode.
    DualRail,
}

impl Basis {
    pub fn name(self) -> &'static str {
        match self {
            Basis::SingleRail => "single-rail",
            Basis::DualRail => "dual-rail",
        }
    }
}

/// Amplitude pair `(a0, a1)` with an encoding tag. Not necessarily normalized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Qubit {
    pub a0: C64,
    pub a1: C64,
    pub basis: Basis,
}

impl Qubit {
    pub fn new(a0: C64, a1: C64, basis: Basis) -> Self {
        Self { a0, a1, basis }
    }

    pub fn single_rail(a0: C64, a1: C64) -> Self {
        Self::new(a0, a1, Basis::SingleRail)
    }

    pub fn dual_rail(a0: C64, a1: C64) -> Self {
        Self::new(a0, a1, Basis::DualRail)
    }

    /// Real-amplitude convenience constructor, normalized.
    pub fn from_real(a0: f64, a1: f64, basis: Basis) -> Result<Self> {
        Self::new(C64::new(a0, 0.0), C64::new(a1, 0.0), basis).normalized()
    }

    /// `sqrt(1 - a1_abs^2) |0> + a1_abs |1>`.
    pub fn with_a1_abs(a1_abs: f64, basis: Basis) -> Result<Self> {
        if !(0.0..=1.0).contains(&a1_abs) {
            return Err(Error::InvalidParameter(format!("|a1| = {a1_abs} outside [0, 1]")));
        }
        Ok(Self::new(
            C64::new((1.0 - a1_abs * a1_abs).max(0.0).sqrt(), 0.0),
            C64::new(a1_abs, 0.0),
            basis,
        ))
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        [self.a0, self.a1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self::new(self.a0 / n, self.a1 / n, self.basis))
    }

    pub fn with_basis(&self, basis: Basis) -> Self {
        Self::new(self.a0, self.a1, basis)
    }

    pub fn require(&self, basis: Basis) -> Result<()> {
        if self.basis != basis {
            return Err(Error::WrongBasis {
                expected: basis.name(),
                found: self.basis.name(),
            });
        }
        Ok(())
    }

    /// `<self|other>` ignoring basis tags.
    pub fn inner(&self, other: &Qubit) -> C64 {
        self.a0.conj() * other.a0 + self.a1.conj() * other.a1
    }

    /// `|<a|b>|^2 / (|a|^2 |b|^2)`; insensitive to global phase and scale.
    pub fn fidelity(&self, other: &Qubit) -> f64 {
        let d = self.norm_sqr() * other.norm_sqr();
        if d == 0.0 {
            return 0.0;
        }
        (self.inner(other).norm_sqr() / d).min(1.0)
    }

    /// `arg(a1 / a0)`; `None` when either amplitude vanishes.
    pub fn relative_phase(&self) -> Option<f64> {
        if self.a0.norm() == 0.0 || self.a1.norm() == 0.0 {
            return None;
        }
        Some((self.a1 / self.a0).arg())
    }

    /// Photonic embedding: one mode (cutoff 1) or two modes `a0|01> + a1|10>`.
    pub fn to_fock(&self) -> FockState {
        match self.basis {
            Basis::SingleRail => FockState::single_mode(&[self.a0, self.a1]),
            Basis::DualRail => FockState::from_amplitudes(
                vec![1, 1],
                [(vec![0, 1], self.a0), (vec![1, 0], self.a1)],
            )
            .expect("dual-rail occupations fit cutoff 1"),
        }
    }

    /// Reads the dual-rail qubit carried by a normalized two-mode state.
    pub fn from_dual_rail_state(state: &FockState) -> Result<Self> {
        if state.mode_count() != 2 {
            return Err(Error::ShapeMismatch {
                left: state.mode_count(),
                right: 2,
            });
        }
        let a0 = state.amplitude(&[0, 1]);
        let a1 = state.amplitude(&[1, 0]);
        let leak = state.norm_sqr() - a0.norm_sqr() - a1.norm_sqr();
        if leak > DUAL_RAIL_LEAKAGE * state.norm_sqr() {
            return Err(Error::NotDualRail(0, 1));
        }
        Self::dual_rail(a0, a1).normalized()
    }

    /// Reads the single-rail qubit carried by a one-mode state.
    pub fn from_single_rail_state(state: &FockState) -> Result<Self> {
        if state.mode_count() != 1 {
            return Err(Error::ShapeMismatch {
                left: state.mode_count(),
                right: 1,
            });
        }
        let a0 = state.amplitude(&[0]);
        let a1 = state.amplitude(&[1]);
        let leak = state.norm_sqr() - a0.norm_sqr() - a1.norm_sqr();
        if leak > DUAL_RAIL_LEAKAGE * state.norm_sqr() {
            return Err(Error::InvalidParameter(format!(
                "single-rail state leaks {leak:e} outside {{|0>, |1>}}"
            )));
        }
        Self::single_rail(a0, a1).normalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fidelity_ignores_global_phase() {
        let q = Qubit::single_rail(C64::new(0.6, 0.0), C64::new(0.0, 0.8));
        let phase = C64::from_polar(1.0, 1.234);
        let p = Qubit::single_rail(q.a0 * phase, q.a1 * phase);
        assert_abs_diff_eq!(q.fidelity(&p), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn dual_rail_round_trip() {
        let q = Qubit::dual_rail(C64::new(0.6, 0.0), C64::new(0.0, -0.8));
        let back = Qubit::from_dual_rail_state(&q.to_fock()).unwrap();
        assert_abs_diff_eq!(back.fidelity(&q), 1.0, epsilon = 1e-15);
        assert_eq!(q.to_fock().amplitude(&[0, 1]), q.a0);
    }

    #[test]
    fn leakage_is_rejected() {
        let s = FockState::basis(vec![1, 1], &[1, 1]).unwrap();
        assert_eq!(Qubit::from_dual_rail_state(&s), Err(Error::NotDualRail(0, 1)));
    }

    #[test]
    fn basis_check() {
        let q = Qubit::with_a1_abs(0.3, Basis::SingleRail).unwrap();
        assert!(q.require(Basis::DualRail).is_err());
        assert_abs_diff_eq!(q.norm_sqr(), 1.0, epsilon = 1e-15);
        assert!(Qubit::with_a1_abs(1.5, Basis::SingleRail).is_err());
    }
}
