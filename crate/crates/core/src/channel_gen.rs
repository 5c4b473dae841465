//! Heralded preparation of the hybrid channel from an even cat state, a
//! coherent ancilla and the two-photon state `(|0101> + |1010>)/√2`.
//!
//! Mode layout (0-based): 0 cat, 1 coherent ancilla, 2 and 3 the channel's
//! dual rail, 4 and 5 the heralding modes. The cat mixes with mode 4 and the
//! ancilla `|-β1>` with mode 5 on beam splitters of equal transmittance.

use num_complex::Complex64 as C64;

use crate::displaced::{self, coeff, displacement_factor, scs_norm};
use crate::error::{Error, Result};
use crate::fock::{tensor, FockState, Parity, Projector};
use crate::optics::{apply_beam_splitter, apply_dual_rail_gate, BeamSplitter, DualRailGate};
use crate::protocol::{alpha_from_beta, build_channel};

/// Herald patterns with at most this many photons per heralding mode are
/// post-processed into corrected channels.
pub const PROCESSED_HERALD_MAX: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerationConfig {
    pub beta: f64,
    pub beta1: f64,
    pub t: f64,
    pub cutoff: usize,
    pub alpha: f64,
    pub alpha1: f64,
}

impl GenerationConfig {
    pub fn new(beta: f64, beta1: f64, t: f64, cutoff: usize) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParameter(format!("transmittance {t} outside (0, 1)")));
        }
        for (name, v) in [("beta", beta), ("beta1", beta1)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            beta,
            beta1,
            t,
            cutoff,
            alpha: alpha_from_beta(beta, t),
            alpha1: alpha_from_beta(beta1, t),
        })
    }

    /// Equal displacements `α = α1` from a target `α` and transmittance.
    pub fn balanced(alpha: f64, t: f64, cutoff: usize) -> Result<Self> {
        let beta = crate::protocol::beta_from_alpha(alpha, t)?;
        Self::new(beta, beta, t, cutoff)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeraldedChannel {
    /// Photon counts on the two heralding modes.
    pub herald: (usize, usize),
    pub probability: f64,
    /// Corrected state on (cat, ancilla, rail 0, rail 1).
    pub state: FockState,
    /// Fidelity of the (cat, rail 0, rail 1) reduction with the target channel.
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationReport {
    pub config: GenerationConfig,
    /// Corrected channels for the low herald patterns.
    pub heralds: Vec<HeraldedChannel>,
    /// Probability of every herald pattern, in lexicographic order.
    pub distribution: Vec<((usize, usize), f64)>,
}

impl GenerationReport {
    pub fn herald(&self, n5: usize, n6: usize) -> Option<&HeraldedChannel> {
        self.heralds.iter().find(|h| h.herald == (n5, n6))
    }

    pub fn probability(&self, n5: usize, n6: usize) -> f64 {
        self.distribution
            .iter()
            .find(|(h, _)| *h == (n5, n6))
            .map_or(0.0, |(_, p)| *p)
    }

    pub fn total_probability(&self) -> f64 {
        self.distribution.iter().map(|(_, p)| p).sum()
    }

    /// Probability carried by heralds with at most one photon per mode.
    pub fn low_order_probability(&self) -> f64 {
        self.distribution
            .iter()
            .filter(|((a, b), _)| *a <= 1 && *b <= 1)
            .map(|(_, p)| p)
            .sum()
    }
}

/// `(|0101> + |1010>)/√2` on four modes.
pub fn two_photon_resource() -> FockState {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    FockState::from_amplitudes(vec![1, 1, 1, 1], [(vec![0, 1, 0, 1], h), (vec![1, 0, 1, 0], h)])
        .expect("occupations fit cutoff 1")
}

/// The full six-mode state after both beam splitters, before any herald.
pub fn generation_circuit(cfg: &GenerationConfig) -> Result<FockState> {
    let cat = displaced::scs_state(Parity::Even, cfg.beta, cfg.cutoff)?;
    let ancilla = displaced::coherent_state(C64::new(-cfg.beta1, 0.0), cfg.cutoff)?;
    let input = tensor(&tensor(&cat, &ancilla), &two_photon_resource());
    let s = apply_beam_splitter(&input, &BeamSplitter::new(cfg.t, 0, 4)?)?;
    apply_beam_splitter(&s, &BeamSplitter::new(cfg.t, 1, 5)?)
}

/// Runs the circuit, heralds on modes 4 and 5, applies `H` then `Z^{n5}` to
/// the dual rail and scores the result against the target channel.
pub fn generate_channel(cfg: &GenerationConfig) -> Result<GenerationReport> {
    let out = generation_circuit(cfg)?;
    let target = build_channel(cfg.beta, cfg.cutoff)?.state;
    let distribution: Vec<((usize, usize), f64)> = out
        .marginal_distribution(&[4, 5])?
        .into_iter()
        .map(|(k, p)| ((k[0], k[1]), p))
        .collect();
    let mut heralds = Vec::new();
    for n5 in 0..=PROCESSED_HERALD_MAX {
        for n6 in 0..=PROCESSED_HERALD_MAX {
            let res = out.project(&[(4, Projector::Number(n5)), (5, Projector::Number(n6))])?;
            let Some(post) = res.post_state else {
                continue;
            };
            let h = apply_dual_rail_gate(&post, 2, 3, &DualRailGate::hadamard())?;
            let corrected = apply_dual_rail_gate(&h, 2, 3, &DualRailGate::z_power(n5 as u32))?;
            let fidelity = corrected.subsystem_fidelity(&target, &[0, 2, 3])?;
            heralds.push(HeraldedChannel {
                herald: (n5, n6),
                probability: res.probability,
                state: corrected,
                fidelity,
            });
        }
    }
    Ok(GenerationReport {
        config: *cfg,
        heralds,
        distribution,
    })
}

/// The limiting five-mode state on (cat, rail 0, rail 1, herald 5, herald 6):
/// `N_+ F² Σ_nm |Ψ_nm>|nm>` with
/// `|Ψ_nm> = |0,-β>|φ+_nm> + (-1)^n |0,β>|φ-_nm>` and
/// `|φ±_nm> = (c_0n(α)c_1m(α)|01> ± c_1n(α)c_0m(α)|10>)/√2`.
pub fn ideal_generation_state(beta: f64, alpha: f64, cutoff: usize) -> Result<FockState> {
    let a = C64::new(alpha, 0.0);
    let f2 = displacement_factor(a).powi(2);
    let pref = scs_norm(Parity::Even, beta) * f2 / std::f64::consts::SQRT_2;
    let minus = displaced::coherent_state(C64::new(-beta, 0.0), cutoff)?;
    let plus = displaced::coherent_state(C64::new(beta, 0.0), cutoff)?;
    let mut out = FockState::zero(vec![cutoff, 1, 1, cutoff, cutoff]);
    for n in 0..=cutoff {
        for m in 0..=cutoff {
            let x = coeff(0, n, a) * coeff(1, m, a) * pref;
            let y = coeff(1, n, a) * coeff(0, m, a) * pref;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for (branch, s, rail) in [(&minus, 1.0, 1.0), (&plus, sign, -1.0)] {
                for (occ, amp) in branch.iter() {
                    let k = occ[0];
                    out.add_amp(vec![k as u16, 0, 1, n as u16, m as u16], amp * x * s);
                    out.add_amp(vec![k as u16, 1, 0, n as u16, m as u16], amp * y * s * rail);
                }
            }
        }
    }
    out.prune();
    out.normalized()
}

/// Fidelity of the exact circuit's (cat, rails, heralds) reduction with
/// [`ideal_generation_state`].
pub fn circuit_vs_ideal(cfg: &GenerationConfig) -> Result<f64> {
    let out = generation_circuit(cfg)?;
    let ideal = ideal_generation_state(cfg.beta, cfg.alpha, cfg.cutoff)?;
    out.subsystem_fidelity(&ideal, &[0, 2, 3, 4, 5])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn resource_is_normalized() {
        assert_abs_diff_eq!(two_photon_resource().norm_sqr(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn herald_distribution_is_complete() {
        let cfg = GenerationConfig::balanced(0.03, 0.99f64.sqrt(), 24).unwrap();
        let r = generate_channel(&cfg).unwrap();
        assert_abs_diff_eq!(r.total_probability(), 1.0, epsilon = 1e-9);
        assert!(r.low_order_probability() >= 0.99);
        for h in &r.heralds {
            assert!((0.0..=1.0).contains(&h.fidelity));
        }
    }

    #[test]
    fn double_click_gives_the_channel() {
        let cfg = GenerationConfig::balanced(0.03, 0.99f64.sqrt(), 24).unwrap();
        let r = generate_channel(&cfg).unwrap();
        assert!(r.herald(1, 1).unwrap().fidelity > 0.9999);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(GenerationConfig::new(0.3, 0.3, 1.0, 24).is_err());
        assert!(GenerationConfig::new(-0.3, 0.3, 0.9, 24).is_err());
    }
}
