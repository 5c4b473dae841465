//! Teleportation of a single-rail qubit through the hybrid channel
//! `(|0,-β>|01> + |0,β>|10>)/√2`.
//!
//! Mode layout of every four-mode state in this module: index 0 is Alice's
//! coherent mode, index 1 the qubit mode, indices 2 and 3 Bob's dual rail.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::displaced::{self, coeff, displacement_factor, modulation_factor, scs_norm};
use crate::error::{Error, Result};
use crate::fock::{checked_probability, tensor, FockState, Parity, Projector};
use crate::optics::{apply_beam_splitter, dual_rail_apply, BeamSplitter, DualRailGate};
use crate::qubit::{Basis, Qubit};

/// Default number of photon-count outcomes enumerated per measured mode.
pub const DEFAULT_N_MAX: usize = 12;

/// Number of terms used when a series is summed "to convergence".
const SERIES_TERMS: usize = 160;

/// `α = β sqrt(1 - t²)`.
pub fn alpha_from_beta(beta: f64, t: f64) -> f64 {
    beta * (1.0 - t * t).sqrt()
}

/// `β = α / sqrt(1 - t²)`.
pub fn beta_from_alpha(alpha: f64, t: f64) -> Result<f64> {
    let r2 = 1.0 - t * t;
    if !(r2 > 0.0) {
        return Err(Error::InvalidParameter(format!("transmittance {t} leaves no reflectance")));
    }
    Ok(alpha / r2.sqrt())
}

/// The shared resource on modes (Alice coherent, Bob rail 0, Bob rail 1).
#[derive(Clone, Debug, PartialEq)]
pub struct HybridChannel {
    pub beta: f64,
    pub cutoff: usize,
    pub state: FockState,
}

impl HybridChannel {
    /// `<0,-β|0,β> = exp(-2β²)`, read off the constructed coherent components.
    pub fn coherent_overlap(&self) -> Result<C64> {
        let minus = displaced::coherent_state(C64::new(-self.beta, 0.0), self.cutoff)?;
        let plus = displaced::coherent_state(C64::new(self.beta, 0.0), self.cutoff)?;
        crate::fock::inner(&minus, &plus)
    }

    /// Entanglement entropy (bits) between Alice's mode and Bob's photon.
    pub fn entanglement_entropy_bits(&self) -> Result<f64> {
        Ok(self.state.reduced_density(&[1, 2])?.entropy_bits())
    }
}

pub fn build_channel(beta: f64, cutoff: usize) -> Result<HybridChannel> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("channel amplitude must be positive, got {beta}")));
    }
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let minus = displaced::coherent_state(C64::new(-beta, 0.0), cutoff)?;
    let plus = displaced::coherent_state(C64::new(beta, 0.0), cutoff)?;
    let rail0 = Qubit::dual_rail(C64::new(1.0, 0.0), C64::new(0.0, 0.0)).to_fock();
    let rail1 = Qubit::dual_rail(C64::new(0.0, 0.0), C64::new(1.0, 0.0)).to_fock();
    let state = tensor(&minus, &rail0)
        .scaled(h)
        .add(&tensor(&plus, &rail1).scaled(h))?
        .normalized()?;
    Ok(HybridChannel { beta, cutoff, state })
}

/// `Σ_m F (a0 c_0m(α) + a1 c_1m(α)) |m>`, i.e. `D(α)(a0|0> + a1|1>)`.
fn displaced_qubit(qubit: &Qubit, alpha: C64, cutoff: usize) -> FockState {
    let f = displacement_factor(alpha);
    let amps: Vec<C64> = (0..=cutoff)
        .map(|m| (qubit.a0 * coeff(0, m, alpha) + qubit.a1 * coeff(1, m, alpha)) * f)
        .collect();
    FockState::single_mode(&amps)
}

fn require_unit(qubit: &Qubit) -> Result<()> {
    if (qubit.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "qubit must be normalized, |a0|^2 + |a1|^2 = {}",
            qubit.norm_sqr()
        )));
    }
    Ok(())
}

/// `Ω|φ> = (|0,-β>|01> D(α)|φ> + |0,β>|10> D(-α)|φ>)/√2` as a four-mode state.
pub fn omega_apply(qubit: &Qubit, alpha: f64, beta: f64, cutoff: usize) -> Result<FockState> {
    qubit.require(Basis::SingleRail)?;
    require_unit(qubit)?;
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let a = C64::new(alpha, 0.0);
    let minus = displaced::coherent_state(C64::new(-beta, 0.0), cutoff)?;
    let plus = displaced::coherent_state(C64::new(beta, 0.0), cutoff)?;
    let rail0 = Qubit::dual_rail(C64::new(1.0, 0.0), C64::new(0.0, 0.0)).to_fock();
    let rail1 = Qubit::dual_rail(C64::new(0.0, 0.0), C64::new(1.0, 0.0)).to_fock();
    let first = tensor(&tensor(&minus, &displaced_qubit(qubit, a, cutoff)), &rail0);
    let second = tensor(&tensor(&plus, &displaced_qubit(qubit, -a, cutoff)), &rail1);
    first.scaled(h).add(&second.scaled(h))
}

/// Exact beam-splitter mixing of Alice's coherent mode with the qubit mode.
pub fn alice_mix_exact(channel: &HybridChannel, qubit: &Qubit, t: f64) -> Result<FockState> {
    qubit.require(Basis::SingleRail)?;
    require_unit(qubit)?;
    // tensor gives (m1, m3, m4, m2); reorder to (m1, m2, m3, m4).
    let joint = tensor(&channel.state, &qubit.to_fock()).permute_modes(&[0, 3, 1, 2])?;
    apply_beam_splitter(&joint, &BeamSplitter::new(t, 0, 1)?)
}

/// Closed-form fidelity between the exact mixing output and `Ω|φ>`.
///
/// The channel amplitude enters only through `β²(1 - 1/t)²`, rewritten with
/// `β = α/sqrt(1 - t²)` as `α²(1 - t)/((1 + t)t²)` so that `t = 1` is regular.
pub fn approximation_fidelity(alpha: f64, t: f64, qubit: &Qubit) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!("transmittance {t} outside (0, 1]")));
    }
    let q = qubit.normalized()?;
    let a = C64::new(alpha, 0.0);
    let f2 = displacement_factor(a).powi(2);
    let mut s_minus = 0.0;
    let mut s_plus = 0.0;
    let mut tm = 1.0;
    for m in 0..SERIES_TERMS {
        let fm_minus = q.a0 * coeff(0, m, -a) + q.a1 * coeff(1, m, -a);
        let fm_plus = q.a0 * coeff(0, m, a) + q.a1 * coeff(1, m, a);
        s_minus += tm * fm_minus.norm_sqr();
        s_plus += tm * fm_plus.norm_sqr();
        tm *= t;
    }
    let exponent = alpha * alpha * (1.0 - t) / ((1.0 + t) * t * t);
    let fid = f2 * f2 * (-exponent).exp() / 4.0 * (s_minus + s_plus).powi(2);
    Ok(fid.clamp(0.0, 1.0))
}

/// How Alice reads out her two modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasurementModel {
    /// Photon-number parity on the coherent mode, number resolution on the qubit mode.
    IdealParity,
    /// Number resolution on both modes.
    FockBasis,
    /// On/off detectors on both modes.
    ApdPair,
}

impl FromStr for MeasurementModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal-parity" | "ideal" | "ideal-parity-pnrd" => Ok(Self::IdealParity),
            "fock-basis" | "fock" => Ok(Self::FockBasis),
            "apd-pair" | "apd" => Ok(Self::ApdPair),
            _ => Err(Error::UnknownModel(s.to_string())),
        }
    }
}

impl fmt::Display for MeasurementModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::IdealParity => "ideal-parity",
            Self::FockBasis => "fock-basis",
            Self::ApdPair => "apd-pair",
        })
    }
}

/// One of Alice's measurement results and Bob's conditional photon.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeRecord {
    /// Parity bit of the coherent-mode result (click bit under the APD model).
    pub j: u8,
    /// Photons counted in the qubit mode (1 stands for "click" under the APD model).
    pub n: usize,
    /// Photons counted in the coherent mode, when the model resolves them.
    pub mode1_count: Option<usize>,
    pub probability: f64,
    /// `(j, par(n))`
    pub message_bits: (u8, u8),
    /// Bob's dual-rail photon before correction (dominant eigenvector when mixed).
    pub bob_state: Qubit,
    /// `tr ρ_B²` of Bob's conditional photon.
    pub bob_purity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub model: MeasurementModel,
    pub outcomes: Vec<OutcomeRecord>,
    /// Probability not covered by the enumerated outcomes.
    pub residual: f64,
}

impl Measurement {
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    pub fn find(&self, j: u8, n: usize) -> Option<&OutcomeRecord> {
        self.outcomes.iter().find(|o| o.j == j && o.n == n && o.mode1_count.is_none_or(|k| k % 2 == j as usize))
    }
}

/// Bob's dual-rail photon (last two modes of `state`) as a dominant
/// eigenvector and purity.
pub fn bob_qubit(state: &FockState) -> Result<(Qubit, f64)> {
    let m = state.mode_count();
    if m < 2 {
        return Err(Error::ShapeMismatch { left: m, right: 2 });
    }
    let rho = state.reduced_density(&[m - 2, m - 1])?;
    let idx = [[0usize, 1usize], [1, 0]];
    let leak = 1.0 - rho.element(&idx[0], &idx[0]).re - rho.element(&idx[1], &idx[1]).re;
    if leak > 1e-9 {
        return Err(Error::NotDualRail(m - 2, m - 1));
    }
    let block = DMatrix::from_fn(2, 2, |r, c| rho.element(&idx[r], &idx[c]));
    let purity = (&block * &block).trace().re;
    let eig = block.symmetric_eigen();
    let top = (0..2)
        .max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .unwrap_or(0);
    let v = eig.eigenvectors.column(top);
    // Fix the global phase so the first nonzero component is real and positive.
    let pivot = if v[0].norm() > 1e-300 { v[0] } else { v[1] };
    let phase = pivot.conj() / pivot.norm();
    Ok((Qubit::dual_rail(v[0] * phase, v[1] * phase).normalized()?, purity))
}

fn record(
    state: &FockState,
    measured: &[(usize, Projector)],
    j: u8,
    n: usize,
    mode1_count: Option<usize>,
) -> Result<Option<OutcomeRecord>> {
    let res = state.project(measured)?;
    let Some(post) = res.post_state else {
        return Ok(None);
    };
    let (bob_state, bob_purity) = bob_qubit(&post)?;
    Ok(Some(OutcomeRecord {
        j,
        n,
        mode1_count,
        probability: res.probability,
        message_bits: (j, (n % 2) as u8),
        bob_state,
        bob_purity,
    }))
}

/// Enumerates Alice's outcomes on a post-mixing four-mode state.
pub fn alice_measure(state: &FockState, model: MeasurementModel, n_max: usize) -> Result<Measurement> {
    if state.mode_count() != 4 {
        return Err(Error::ShapeMismatch {
            left: state.mode_count(),
            right: 4,
        });
    }
    let mut outcomes = Vec::new();
    match model {
        MeasurementModel::IdealParity => {
            for (j, parity) in [(0u8, Projector::ParityEven), (1, Projector::ParityOdd)] {
                for n in 0..=n_max {
                    if let Some(r) = record(state, &[(0, parity), (1, Projector::Number(n))], j, n, None)? {
                        outcomes.push(r);
                    }
                }
            }
        }
        MeasurementModel::FockBasis => {
            for k in 0..=n_max {
                for n in 0..=n_max {
                    let measured = [(0, Projector::Number(k)), (1, Projector::Number(n))];
                    if let Some(r) = record(state, &measured, (k % 2) as u8, n, Some(k))? {
                        outcomes.push(r);
                    }
                }
            }
        }
        MeasurementModel::ApdPair => {
            for (j, p1) in [(0u8, Projector::ApdOff), (1, Projector::ApdOn)] {
                for (n, p2) in [(0usize, Projector::ApdOff), (1, Projector::ApdOn)] {
                    if let Some(r) = record(state, &[(0, p1), (1, p2)], j, n, None)? {
                        outcomes.push(r);
                    }
                }
            }
        }
    }
    let total: f64 = outcomes.iter().map(|o| o.probability).sum();
    Ok(Measurement {
        model,
        outcomes,
        residual: 1.0 - total,
    })
}

/// `H Z^{j + par(n)}` applied to Bob's photon.
pub fn bob_correct(record: &OutcomeRecord) -> Result<Qubit> {
    let z = DualRailGate::z_power(record.j as u32 + (record.n % 2) as u32);
    let h = DualRailGate::hadamard();
    dual_rail_apply(&dual_rail_apply(&record.bob_state, &z)?, &h)
}

/// `N_n (a0, A_n a1)` in the dual-rail basis: the corrected state for outcome `n`.
pub fn modulated_target(qubit: &Qubit, n: usize, alpha: f64) -> Result<Qubit> {
    let a_n = modulation_factor(n, C64::new(alpha, 0.0))?;
    Qubit::dual_rail(qubit.a0, a_n * qubit.a1).normalized()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistributionKind {
    /// Unmodulated input.
    Direct,
    /// Input pre-modulated by `A_0^{-1}`.
    Am0,
    /// Input pre-modulated by `A_1^{-1}`.
    Am1,
}

impl DistributionKind {
    pub fn mod_index(mod_index: usize) -> Result<Self> {
        match mod_index {
            0 => Ok(Self::Am0),
            1 => Ok(Self::Am1),
            k => Err(Error::InvalidParameter(format!("modulation index must be 0 or 1, got {k}"))),
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Direct => "direct",
            Self::Am0 => "am0",
            Self::Am1 => "am1",
        })
    }
}

/// A labelled distribution over the photon count `n` of the qubit mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityReport {
    pub kind: DistributionKind,
    pub alpha: f64,
    pub a1_abs: f64,
    /// `values[n] = P_n`
    pub values: Vec<f64>,
    /// `1 - Σ_n P_n` over the listed outcomes.
    pub residual: f64,
}

impl ProbabilityReport {
    pub fn get(&self, n: usize) -> f64 {
        self.values.get(n).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Photon-count probabilities `|F c_0n|²` and `|F c_1n|²` of `D(α)|0>` and `D(α)|1>`.
pub fn poisson_pair(n: usize, alpha: f64) -> (f64, f64) {
    let a = C64::new(alpha, 0.0);
    let f2 = displacement_factor(a).powi(2);
    (f2 * coeff(0, n, a).norm_sqr(), f2 * coeff(1, n, a).norm_sqr())
}

/// `P_n` for a qubit whose populations are `w0 = |b0|²`, `w1 = |b1|²`.
fn mixture_report(kind: DistributionKind, alpha: f64, a1_abs: f64, w0: f64, w1: f64, n_max: usize) -> Result<ProbabilityReport> {
    let values = (0..=n_max)
        .map(|n| {
            let (p0, p1) = poisson_pair(n, alpha);
            checked_probability(w0 * p0 + w1 * p1)
        })
        .collect::<Result<Vec<f64>>>()?;
    let residual = 1.0 - values.iter().sum::<f64>();
    Ok(ProbabilityReport {
        kind,
        alpha,
        a1_abs,
        values,
        residual,
    })
}

fn check_a1(a1_abs: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&a1_abs) {
        return Err(Error::InvalidParameter(format!("|a1| = {a1_abs} outside [0, 1]")));
    }
    Ok(())
}

/// `P_n(α) = e^{-|α|²} |α|^{2n}/n! · (1 + (|A_n|² - 1)|a1|²)`, evaluated as the
/// population-weighted mixture of the `|0>` and `|1>` count distributions.
pub fn direct_success_probs(alpha: f64, a1_abs: f64, n_max: usize) -> Result<ProbabilityReport> {
    check_a1(a1_abs)?;
    let w1 = a1_abs * a1_abs;
    mixture_report(DistributionKind::Direct, alpha, a1_abs, 1.0 - w1, w1, n_max)
}

/// `N^{(in)}_k (a0, a1 / A_k)`.
pub fn prepare_am_qubit(qubit: &Qubit, mod_index: usize, alpha: f64) -> Result<Qubit> {
    DistributionKind::mod_index(mod_index)?;
    let a_k = modulation_factor(mod_index, C64::new(alpha, 0.0))?;
    if a_k.norm() == 0.0 {
        return Err(Error::VanishingModulation { n: mod_index, alpha });
    }
    Qubit::new(qubit.a0, qubit.a1 / a_k, qubit.basis).normalized()
}

/// `P_nk` for an input pre-modulated with `A_k^{-1}`.
pub fn am_success_probs(mod_index: usize, alpha: f64, a1_abs: f64, n_max: usize) -> Result<ProbabilityReport> {
    check_a1(a1_abs)?;
    let kind = DistributionKind::mod_index(mod_index)?;
    let a_k = modulation_factor(mod_index, C64::new(alpha, 0.0))?;
    if a_k.norm() == 0.0 {
        return Err(Error::VanishingModulation { n: mod_index, alpha });
    }
    let x1 = a1_abs * a1_abs;
    let x1m = x1 / a_k.norm_sqr();
    let d = (1.0 - x1) + x1m;
    mixture_report(kind, alpha, a1_abs, (1.0 - x1) / d, x1m / d, n_max)
}

/// Closed-form probability of parity bit `j` and count `n` under the ideal model:
/// `P_n · (1 ± e^{-2β²})/2`.
pub fn ideal_joint_probability(j: u8, n: usize, alpha: f64, beta: f64, qubit: &Qubit) -> f64 {
    let w1 = qubit.a1.norm_sqr() / qubit.norm_sqr();
    let (p0, p1) = poisson_pair(n, alpha);
    let parity = if j == 0 { Parity::Even } else { Parity::Odd };
    let weight = 1.0 / (4.0 * scs_norm(parity, beta).powi(2));
    weight * ((1.0 - w1) * p0 + w1 * p1)
}

/// Closed-form probability of `k` photons in the coherent mode and `n` in the
/// qubit mode under the number-resolving model.
pub fn fock_joint_probability(k: usize, n: usize, alpha: f64, beta: f64, qubit: &Qubit) -> f64 {
    let w1 = qubit.a1.norm_sqr() / qubit.norm_sqr();
    let (p0, p1) = poisson_pair(n, alpha);
    let (pk, _) = poisson_pair(k, beta);
    pk * ((1.0 - w1) * p0 + w1 * p1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn balanced() -> Qubit {
        Qubit::from_real(1.0, 1.0, Basis::SingleRail).unwrap()
    }

    #[test]
    fn parameter_chain() {
        let beta = beta_from_alpha(0.03, 0.99f64.sqrt()).unwrap();
        assert_abs_diff_eq!(beta, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(alpha_from_beta(0.3, 0.99f64.sqrt()), 0.03, epsilon = 1e-12);
        assert!(beta_from_alpha(0.1, 1.0).is_err());
    }

    #[test]
    fn channel_structure() {
        let ch = build_channel(0.3, 24).unwrap();
        assert_abs_diff_eq!(ch.state.norm_sqr(), 1.0, epsilon = 1e-12);
        for (occ, _) in ch.state.iter() {
            assert_eq!(occ[1] + occ[2], 1);
        }
        assert_abs_diff_eq!(ch.coherent_overlap().unwrap().re, (-0.18f64).exp(), epsilon = 1e-10);
        assert!(build_channel(0.0, 24).is_err());
    }

    #[test]
    fn fidelity_is_one_without_reflection() {
        for &alpha in &[0.05, 0.3, 0.6] {
            assert_abs_diff_eq!(approximation_fidelity(alpha, 1.0, &balanced()).unwrap(), 1.0, epsilon = 1e-12);
        }
        let f = approximation_fidelity(0.03, 0.99f64.sqrt(), &balanced()).unwrap();
        assert!(f >= 0.99, "{f}");
    }

    #[test]
    fn direct_probabilities_for_vacuum_qubit() {
        let r = direct_success_probs(0.03, 0.0, 30).unwrap();
        let e = (-0.0009f64).exp();
        assert_abs_diff_eq!(r.get(0), e, epsilon = 1e-15);
        assert_abs_diff_eq!(r.get(1), e * 0.0009, epsilon = 1e-15);
        assert!(r.residual.abs() < 1e-9);
    }

    #[test]
    fn direct_matches_printed_formula() {
        for &(alpha, a1) in &[(0.1, 0.3), (0.4, 0.9), (0.2, 1.0)] {
            let r = direct_success_probs(alpha, a1, 10).unwrap();
            for n in 0..=10 {
                let a_n: f64 = (n as f64 - alpha * alpha) / alpha;
                let p = (-alpha * alpha).exp() * alpha.powi(2 * n as i32) / displaced::factorial(n)
                    * (1.0 + (a_n * a_n - 1.0) * a1 * a1);
                assert_abs_diff_eq!(r.get(n), p, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn am_probabilities_for_vacuum_qubit() {
        let r = am_success_probs(0, 0.2, 0.0, 30).unwrap();
        assert_abs_diff_eq!(r.get(0), (-0.04f64).exp(), epsilon = 1e-15);
        assert!(am_success_probs(2, 0.2, 0.0, 30).is_err());
        assert!(prepare_am_qubit(&balanced(), 1, 1.0).is_err());
    }

    #[test]
    fn am_preparation_leaves_vacuum_alone() {
        let q = Qubit::single_rail(re(1.0), re(0.0));
        assert_eq!(prepare_am_qubit(&q, 0, 0.3).unwrap(), q);
    }

    #[test]
    fn ideal_pipeline_recovers_modulated_qubit() {
        let q = Qubit::single_rail(re(0.6), C64::new(0.0, 0.8));
        let (alpha, beta) = (0.2, 0.5);
        let state = omega_apply(&q, alpha, beta, 24).unwrap();
        let m = alice_measure(&state, MeasurementModel::IdealParity, 8).unwrap();
        assert!(m.residual.abs() < 1e-9);
        for rec in &m.outcomes {
            let p = ideal_joint_probability(rec.j, rec.n, alpha, beta, &q);
            assert_abs_diff_eq!(rec.probability, p, epsilon = 1e-12);
            if rec.probability > 1e-12 {
                let fixed = bob_correct(rec).unwrap();
                let target = modulated_target(&q, rec.n, alpha).unwrap();
                assert_abs_diff_eq!(fixed.fidelity(&target), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn model_names() {
        assert_eq!("apd-pair".parse::<MeasurementModel>(), Ok(MeasurementModel::ApdPair));
        assert!(matches!("homodyne".parse::<MeasurementModel>(), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn ideal_joint_probabilities_sum_to_direct() {
        let q = balanced();
        for n in 0..4 {
            let s = ideal_joint_probability(0, n, 0.2, 0.5, &q) + ideal_joint_probability(1, n, 0.2, 0.5, &q);
            assert_abs_diff_eq!(s, direct_success_probs(0.2, q.a1.norm(), 4).unwrap().get(n), epsilon = 1e-15);
        }
    }
}
