//! Linear-optical operations on [`FockState`]s.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::displaced::{self, factorial};
use crate::error::{Error, Result};
use crate::fock::{tensor, FockState, Key};
use crate::qubit::{Basis, Qubit};

/// Photons of headroom required above the occupied support before displacing.
pub const DISPLACEMENT_MARGIN: usize = 10;

/// Tail weight below which high occupations do not count as occupied support.
pub const SUPPORT_WEIGHT: f64 = 1e-20;

/// Largest ancilla cutoff tried when fitting a coherent ancilla.
pub const MAX_ANCILLA_CUTOFF: usize = 120;

/// Two-mode beam splitter acting on creation operators as
/// `a_i† → t a_i† − r a_j†`, `a_j† → r a_i† + t a_j†`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitter {
    pub t: f64,
    pub r: f64,
    pub i: usize,
    pub j: usize,
}

impl BeamSplitter {
    pub fn new(t: f64, i: usize, j: usize) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidParameter(format!("transmittance {t} outside (0, 1]")));
        }
        if i == j {
            return Err(Error::InvalidParameter(format!("beam splitter needs two distinct modes, got {i} twice")));
        }
        Ok(Self {
            t,
            r: (1.0 - t * t).sqrt(),
            i,
            j,
        })
    }

    pub fn balanced(i: usize, j: usize) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self { t: h, r: h, i, j }
    }

    /// The inverse unitary (`r → −r`).
    pub fn inverse(&self) -> Self {
        Self { r: -self.r, ..*self }
    }

    /// Output weights of `|p, q>` as `(u, amplitude)` pairs for `|u, p+q-u>`.
    fn block(&self, p: usize, q: usize) -> Vec<(usize, f64)> {
        let total = p + q;
        let mut out = vec![0.0; total + 1];
        let norm = (factorial(p) * factorial(q)).sqrt();
        for a in 0..=p {
            let ca = binom(p, a) * self.t.powi(a as i32) * (-self.r).powi((p - a) as i32);
            for b in 0..=q {
                let cb = binom(q, b) * self.r.powi(b as i32) * self.t.powi((q - b) as i32);
                out[a + b] += ca * cb;
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(u, c)| (u, c * (factorial(u) * factorial(total - u)).sqrt() / norm))
            .filter(|&(_, c)| c != 0.0)
            .collect()
    }
}

fn binom(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Exact beam-splitter unitary. Both modes' cutoffs grow to hold the largest
/// occupied total photon number, so no amplitude is lost to truncation.
pub fn apply_beam_splitter(state: &FockState, bs: &BeamSplitter) -> Result<FockState> {
    let m = state.mode_count();
    for mode in [bs.i, bs.j] {
        if mode >= m {
            return Err(Error::ModeOutOfRange { mode, mode_count: m });
        }
    }
    if bs.i == bs.j {
        return Err(Error::InvalidParameter("beam splitter modes coincide".into()));
    }
    let support = state
        .raw()
        .map(|(k, _)| (k[bs.i] + k[bs.j]) as usize)
        .max()
        .unwrap_or(0);
    let mut cutoffs = state.cutoffs().to_vec();
    let c = cutoffs[bs.i].max(cutoffs[bs.j]).max(support);
    cutoffs[bs.i] = c;
    cutoffs[bs.j] = c;

    let mut blocks: HashMap<(u16, u16), Vec<(usize, f64)>> = HashMap::new();
    let mut out = FockState::zero(cutoffs);
    for (k, &amp) in state.raw() {
        let (p, q) = (k[bs.i], k[bs.j]);
        let block = blocks
            .entry((p, q))
            .or_insert_with(|| bs.block(p as usize, q as usize));
        let total = (p + q) as usize;
        for &(u, w) in block.iter() {
            let mut key: Key = k.clone();
            key[bs.i] = u as u16;
            key[bs.j] = (total - u) as u16;
            out.add_amp(key, amp * w);
        }
    }
    out.prune();
    Ok(out)
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|c| a.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm1 > 0.25 {
        squarings = (norm1 / 0.25).log2().ceil() as u32;
    }
    let scaled = a * C64::new(0.5f64.powi(squarings as i32), 0.0);
    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..=20 {
        term = &term * &scaled * C64::new(1.0 / k as f64, 0.0);
        result += &term;
        if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Truncated `exp(α a† − α* a)` on `|0>..|cutoff>`.
pub fn displacement_matrix(alpha: C64, cutoff: usize) -> DMatrix<C64> {
    let dim = cutoff + 1;
    let mut g = DMatrix::<C64>::zeros(dim, dim);
    for n in 1..dim {
        let s = (n as f64).sqrt();
        g[(n, n - 1)] = alpha * s;
        g[(n - 1, n)] = -alpha.conj() * s;
    }
    expm(&g)
}

/// `D(α)` on one mode; requires [`DISPLACEMENT_MARGIN`] photons of headroom.
pub fn apply_displacement(state: &FockState, mode: usize, alpha: C64) -> Result<FockState> {
    if mode >= state.mode_count() {
        return Err(Error::ModeOutOfRange {
            mode,
            mode_count: state.mode_count(),
        });
    }
    let cutoff = state.cutoffs()[mode];
    let support = state.occupied_support(mode, SUPPORT_WEIGHT);
    if cutoff < support + DISPLACEMENT_MARGIN {
        return Err(Error::InsufficientCutoff {
            mode,
            cutoff,
            support,
            margin: DISPLACEMENT_MARGIN,
        });
    }
    if alpha == C64::new(0.0, 0.0) {
        return Ok(state.clone());
    }
    let d = displacement_matrix(alpha, cutoff);
    let mut out = FockState::zero(state.cutoffs().to_vec());
    for (k, &amp) in state.raw() {
        let l = k[mode] as usize;
        for n in 0..=cutoff {
            let w = d[(n, l)];
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            let mut key = k.clone();
            key[mode] = n as u16;
            out.add_amp(key, amp * w);
        }
    }
    out.prune();
    Ok(out)
}

/// Smallest cutoff at which the coherent state `|β>` loses at most the tail limit.
pub fn coherent_cutoff(beta: C64) -> Result<usize> {
    let mut kept = 0.0;
    let f2 = (-beta.norm_sqr()).exp();
    let mut term = f2;
    for n in 0..=MAX_ANCILLA_CUTOFF {
        if n > 0 {
            term *= beta.norm_sqr() / n as f64;
        }
        kept += term;
        if 1.0 - kept <= displaced::TAIL_LIMIT * 0.1 {
            return Ok(n.max(1));
        }
    }
    Err(Error::InvalidParameter(format!(
        "coherent ancilla |{beta}> needs more than {MAX_ANCILLA_CUTOFF} photons"
    )))
}

/// Approximate displacement by mixing `mode` with a coherent ancilla `|γ/r>`
/// on a beam splitter of transmittance `t`. Returns the joint state with the
/// ancilla appended as the last mode.
pub fn htbs_displace(state: &FockState, mode: usize, gamma: C64, t: f64) -> Result<FockState> {
    if mode >= state.mode_count() {
        return Err(Error::ModeOutOfRange {
            mode,
            mode_count: state.mode_count(),
        });
    }
    let bs = BeamSplitter::new(t, mode, state.mode_count())?;
    let beta = if gamma == C64::new(0.0, 0.0) {
        C64::new(0.0, 0.0)
    } else if bs.r == 0.0 {
        return Err(Error::InvalidParameter("ideal transmittance cannot displace by a nonzero amount".into()));
    } else {
        gamma / bs.r
    };
    let ancilla = displaced::coherent_state(beta, coherent_cutoff(beta)?)?;
    apply_beam_splitter(&tensor(state, &ancilla), &bs)
}

/// Fidelity of the system modes after [`htbs_displace`] with the ideal `D(γ)` image.
pub fn htbs_fidelity(state: &FockState, mode: usize, gamma: C64, t: f64) -> Result<f64> {
    let joint = htbs_displace(state, mode, gamma, t)?;
    let support = state.max_occupation(mode);
    let padded = state.with_cutoff(
        mode,
        state.cutoffs()[mode].max(support + DISPLACEMENT_MARGIN + coherent_cutoff(gamma)?),
    )?;
    let ideal = apply_displacement(&padded, mode, gamma)?.normalized()?;
    let keep: Vec<usize> = (0..state.mode_count()).collect();
    joint.subsystem_fidelity(&ideal, &keep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    Hadamard,
    PauliZ,
    ZPower(u32),
    Identity,
}

/// 2×2 unitary acting on the dual-rail amplitude vector `(a0, a1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualRailGate {
    pub kind: GateKind,
    pub matrix: [[C64; 2]; 2],
}

impl DualRailGate {
    pub fn hadamard() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            kind: GateKind::Hadamard,
            matrix: [[h, h], [h, -h]],
        }
    }

    pub fn pauli_z() -> Self {
        Self::z_power(1)
    }

    pub fn identity() -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        Self {
            kind: GateKind::Identity,
            matrix: [[o, z], [z, o]],
        }
    }

    /// `Z^k`; only the parity of `k` matters.
    pub fn z_power(k: u32) -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let s = if k.is_multiple_of(2) { o } else { -o };
        Self {
            kind: if k == 1 { GateKind::PauliZ } else { GateKind::ZPower(k) },
            matrix: [[o, z], [z, s]],
        }
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &DualRailGate) -> DualRailGate {
        let (a, b) = (self.matrix, first.matrix);
        let mut m = [[C64::new(0.0, 0.0); 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        DualRailGate {
            kind: self.kind,
            matrix: m,
        }
    }

    fn apply(&self, a0: C64, a1: C64) -> (C64, C64) {
        let m = self.matrix;
        (m[0][0] * a0 + m[0][1] * a1, m[1][0] * a0 + m[1][1] * a1)
    }

    /// Largest entry of `U†U − I`.
    pub fn unitarity_error(&self) -> f64 {
        let m = self.matrix;
        let mut err: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let v = m[0][r].conj() * m[0][c] + m[1][r].conj() * m[1][c];
                let target = if r == c { 1.0 } else { 0.0 };
                err = err.max((v - C64::new(target, 0.0)).norm());
            }
        }
        err
    }
}

pub fn dual_rail_apply(qubit: &Qubit, gate: &DualRailGate) -> Result<Qubit> {
    qubit.require(Basis::DualRail)?;
    let (a0, a1) = gate.apply(qubit.a0, qubit.a1);
    Ok(Qubit::dual_rail(a0, a1))
}

/// Applies a dual-rail gate to modes `(p, q)` of a multimode state whose
/// `(p, q)` support is the single-photon subspace; component 0 is `|0_p 1_q>`.
pub fn apply_dual_rail_gate(state: &FockState, p: usize, q: usize, gate: &DualRailGate) -> Result<FockState> {
    let m = state.mode_count();
    for mode in [p, q] {
        if mode >= m {
            return Err(Error::ModeOutOfRange { mode, mode_count: m });
        }
    }
    let mut cutoffs = state.cutoffs().to_vec();
    cutoffs[p] = cutoffs[p].max(1);
    cutoffs[q] = cutoffs[q].max(1);
    let mut out = FockState::zero(cutoffs);
    let zero = C64::new(0.0, 0.0);
    for (k, &amp) in state.raw() {
        let (a0, a1) = match (k[p], k[q]) {
            (0, 1) => (amp, zero),
            (1, 0) => (zero, amp),
            _ => return Err(Error::NotDualRail(p, q)),
        };
        let (b0, b1) = gate.apply(a0, a1);
        let mut k0 = k.clone();
        k0[p] = 0;
        k0[q] = 1;
        let mut k1 = k.clone();
        k1[p] = 1;
        k1[q] = 0;
        out.add_amp(k0, b0);
        out.add_amp(k1, b1);
    }
    out.prune();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{inner, state_fidelity};
    use approx::assert_abs_diff_eq;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn expm_matches_nalgebra() {
        let mut g = DMatrix::<C64>::zeros(30, 30);
        for n in 1..30 {
            let s = (n as f64).sqrt();
            g[(n, n - 1)] = C64::new(0.8, 0.3) * s;
            g[(n - 1, n)] = -C64::new(0.8, -0.3) * s;
        }
        let diff = (expm(&g) - g.exp()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff:e}");
    }

    #[test]
    fn identity_at_full_transmission() {
        let s = displaced::coherent_state(re(0.3), 24).unwrap();
        let s = tensor(&s, &FockState::basis(vec![2], &[1]).unwrap());
        let out = apply_beam_splitter(&s, &BeamSplitter::new(1.0, 0, 1).unwrap()).unwrap();
        assert_abs_diff_eq!(state_fidelity(&s, &out).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn coherent_inputs_follow_convention() {
        let (x, y, t) = (re(0.3), re(-0.2), 0.8);
        let bs = BeamSplitter::new(t, 0, 1).unwrap();
        let input = tensor(
            &displaced::coherent_state(x, 24).unwrap(),
            &displaced::coherent_state(y, 24).unwrap(),
        );
        let out = apply_beam_splitter(&input, &bs).unwrap();
        let expect = tensor(
            &displaced::coherent_state(x * t + y * bs.r, 24).unwrap(),
            &displaced::coherent_state(y * t - x * bs.r, 24).unwrap(),
        );
        assert!(state_fidelity(&out, &expect).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn single_photon_transmits_with_t() {
        let bs = BeamSplitter::new(0.6, 0, 1).unwrap();
        let out = apply_beam_splitter(&FockState::basis(vec![1, 1], &[1, 0]).unwrap(), &bs).unwrap();
        assert_abs_diff_eq!(out.amplitude(&[1, 0]).re, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitude(&[0, 1]).re, -0.8, epsilon = 1e-15);
    }

    #[test]
    fn inverse_restores() {
        let s = FockState::from_amplitudes(
            vec![3, 3],
            [(vec![1, 2], C64::new(0.6, 0.1)), (vec![3, 0], C64::new(0.0, -0.7)), (vec![0, 0], re(0.2))],
        )
        .unwrap()
        .normalized()
        .unwrap();
        let bs = BeamSplitter::new(0.37, 1, 0).unwrap();
        let back = apply_beam_splitter(&apply_beam_splitter(&s, &bs).unwrap(), &bs.inverse()).unwrap();
        assert_abs_diff_eq!(inner(&s, &back).unwrap().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn displacement_of_vacuum_is_coherent() {
        let vac = FockState::vacuum(vec![40]);
        let d = apply_displacement(&vac, 0, re(0.3)).unwrap();
        let c = displaced::coherent_state(re(0.3), 40).unwrap();
        assert!((1.0 - inner(&c, &d).unwrap().re).abs() < 1e-9);
        assert!(matches!(
            apply_displacement(&FockState::vacuum(vec![5]), 0, re(0.1)),
            Err(Error::InsufficientCutoff { .. })
        ));
    }

    #[test]
    fn displacement_round_trip() {
        let one = FockState::basis(vec![30], &[1]).unwrap();
        let there = apply_displacement(&one, 0, re(0.4)).unwrap();
        let back = apply_displacement(&there, 0, re(-0.4)).unwrap();
        assert!((1.0 - inner(&one, &back).unwrap().norm()).abs() < 1e-9);
    }

    #[test]
    fn htbs_on_vacuum_is_exact_and_trivial_at_zero_gamma() {
        let vac = FockState::vacuum(vec![24]);
        assert!(htbs_fidelity(&vac, 0, re(0.03), 0.995).unwrap() >= 0.999);
        let one = FockState::basis(vec![24], &[1]).unwrap();
        assert_abs_diff_eq!(htbs_fidelity(&one, 0, re(0.0), 0.9).unwrap(), 0.81, epsilon = 1e-12);
        assert_abs_diff_eq!(htbs_fidelity(&one, 0, re(0.0), 1.0).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gates() {
        let h = DualRailGate::hadamard();
        let hh = h.compose(&h);
        assert!(hh.unitarity_error() < 1e-15);
        assert_abs_diff_eq!((hh.matrix[0][0] - re(1.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hh.matrix[0][1].norm(), 0.0, epsilon = 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q = Qubit::dual_rail(re(s), re(s));
        let z = dual_rail_apply(&q, &DualRailGate::pauli_z()).unwrap();
        assert_eq!(z.a1, re(-s));
        assert!(dual_rail_apply(&q.with_basis(Basis::SingleRail), &h).is_err());
    }

    #[test]
    fn gate_on_embedded_modes() {
        let q = Qubit::dual_rail(re(0.6), C64::new(0.0, 0.8));
        let s = tensor(&FockState::vacuum(vec![2]), &q.to_fock());
        let h = DualRailGate::hadamard();
        let out = apply_dual_rail_gate(&s, 1, 2, &h).unwrap();
        let expect = dual_rail_apply(&q, &h).unwrap();
        assert_eq!(out.amplitude(&[0, 0, 1]), expect.a0);
        assert_eq!(out.amplitude(&[0, 1, 0]), expect.a1);
        assert!(apply_dual_rail_gate(&FockState::vacuum(vec![1, 1]), 0, 1, &h).is_err());
    }
}
