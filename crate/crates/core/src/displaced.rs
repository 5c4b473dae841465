//! Displaced number states `D(α)|l>`, cat states and the modulation factors
//! that the teleportation outcomes imprint on a qubit.
//!
//! Matrix elements are written `<n|D(α)|l> = F c_ln(α)` with
//! `F = exp(-|α|²/2)` and
//!
//! ```text
//! c_ln(α) = α^(n-l) / sqrt(l! n!) · Σ_k (-1)^k C(l,k) |α|^(2k) · n(n-1)…(n-l+k+1)
//! ```
//!
//! where the falling product has `l - k` factors.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{FockState, Parity};

/// Largest neglected probability a truncated constructor accepts.
pub const TAIL_LIMIT: f64 = 1e-10;

/// Default per-mode cutoff for amplitudes up to 0.6.
pub const DEFAULT_CUTOFF: usize = 24;

const FACTORIAL_MAX: usize = 170;

fn factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![1.0; FACTORIAL_MAX + 1];
        for n in 1..=FACTORIAL_MAX {
            t[n] = t[n - 1] * n as f64;
        }
        t
    })
}

fn ln_factorial(n: usize) -> f64 {
    if n <= FACTORIAL_MAX {
        factorials()[n].ln()
    } else {
        factorials()[FACTORIAL_MAX].ln() + ((FACTORIAL_MAX + 1)..=n).map(|k| (k as f64).ln()).sum::<f64>()
    }
}

/// `n!` as a float; infinite beyond 170.
pub fn factorial(n: usize) -> f64 {
    factorials().get(n).copied().unwrap_or(f64::INFINITY)
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `sqrt(n!) / m!` without overflowing for large `n`.
fn sqrt_fact_over_fact(n: usize, m: usize) -> f64 {
    if n <= FACTORIAL_MAX {
        factorial(n).sqrt() / factorial(m)
    } else {
        (0.5 * ln_factorial(n) - ln_factorial(m)).exp()
    }
}

/// `F = exp(-|α|²/2)`.
pub fn displacement_factor(alpha: C64) -> f64 {
    (-0.5 * alpha.norm_sqr()).exp()
}

/// `c_ln(α)`, so that `<n|D(α)|l> = F c_ln(α)`.
pub fn coeff(l: usize, n: usize, alpha: C64) -> C64 {
    let a2 = alpha.norm_sqr();
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..=l {
        // The falling product n(n-1)…(n-l+k+1) vanishes unless n ≥ l - k.
        if n + k < l {
            continue;
        }
        // α^(n-l)|α|^(2k), kept finite at α = 0 when n < l.
        let power = if n >= l {
            alpha.powu((n - l) as u32) * a2.powi(k as i32)
        } else {
            alpha.conj().powu((l - n) as u32) * a2.powi((k + n - l) as i32)
        };
        // n!/(n-l+k)! / sqrt(l! n!) = sqrt(n!)/(n-l+k)! / sqrt(l!)
        let magnitude = binomial(l, k) * sqrt_fact_over_fact(n, n + k - l) / factorial(l).sqrt();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += power * (sign * magnitude);
    }
    sum
}

/// A single displaced-number-state matrix element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixElement {
    pub l: usize,
    pub n: usize,
    pub alpha: C64,
    pub value: C64,
}

impl MatrixElement {
    pub fn new(l: usize, n: usize, alpha: C64) -> Self {
        Self {
            l,
            n,
            alpha,
            value: coeff(l, n, alpha),
        }
    }

    /// Full matrix element `<n|D(α)|l>` including the factor `F`.
    pub fn amplitude(&self) -> C64 {
        self.value * displacement_factor(self.alpha)
    }
}

fn truncated_state(amps: Vec<C64>, cutoff: usize) -> Result<FockState> {
    let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let tail = (1.0 - kept).max(0.0);
    if tail > TAIL_LIMIT {
        return Err(Error::TailWeight {
            tail,
            limit: TAIL_LIMIT,
            cutoff,
        });
    }
    FockState::single_mode(&amps).normalized()
}

/// `D(α)|l>` expanded over `|0>..|cutoff>`.
pub fn displaced_number_state(l: usize, alpha: C64, cutoff: usize) -> Result<FockState> {
    let f = displacement_factor(alpha);
    let amps = (0..=cutoff).map(|n| coeff(l, n, alpha) * f).collect();
    truncated_state(amps, cutoff)
}

/// Coherent state `|0, α>`.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<FockState> {
    displaced_number_state(0, alpha, cutoff)
}

/// `N_+ = (2(1 + e^{-2β²}))^{-1/2}` or `N_- = (2(1 - e^{-2β²}))^{-1/2}`.
pub fn scs_norm(parity: Parity, beta: f64) -> f64 {
    let x = -2.0 * beta * beta;
    match parity {
        Parity::Even => (2.0 * (1.0 + x.exp())).powf(-0.5),
        Parity::Odd => (-2.0 * x.exp_m1()).powf(-0.5),
    }
}

/// Amplitudes of `N_±(|0,-β> ± |0,β>)` on `|0>..|cutoff>`, untruncated-normalized.
pub fn scs_amplitudes(parity: Parity, beta: f64, cutoff: usize) -> Vec<C64> {
    let norm = scs_norm(parity, beta);
    let f = (-0.5 * beta * beta).exp();
    (0..=cutoff)
        .map(|n| {
            if Parity::of(n) != parity {
                return C64::new(0.0, 0.0);
            }
            let c = beta.powi(n as i32) / factorial(n).sqrt();
            // (-1)^n ± 1 is 2 for even n in the even cat and -2 for odd n in the odd cat.
            let sign = if parity == Parity::Even { 2.0 } else { -2.0 };
            C64::new(sign * norm * f * c, 0.0)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScsSpec {
    pub parity: Parity,
    pub beta: f64,
    pub norm: f64,
}

impl ScsSpec {
    pub fn new(parity: Parity, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("cat amplitude must be positive, got {beta}")));
        }
        Ok(Self {
            parity,
            beta,
            norm: scs_norm(parity, beta),
        })
    }

    pub fn state(&self, cutoff: usize) -> Result<FockState> {
        truncated_state(scs_amplitudes(self.parity, self.beta, cutoff), cutoff)
    }
}

/// Even or odd cat state over `|0>..|cutoff>`.
pub fn scs_state(parity: Parity, beta: f64, cutoff: usize) -> Result<FockState> {
    ScsSpec::new(parity, beta)?.state(cutoff)
}

/// Photon-number distribution of a cat state; zero for the wrong parity.
pub fn scs_distribution(parity: Parity, n: usize, beta: f64) -> f64 {
    if Parity::of(n) != parity {
        return 0.0;
    }
    let b2 = beta * beta;
    let norm = scs_norm(parity, beta);
    4.0 * norm * norm * (-b2).exp() * (ln_pow(b2, n) - ln_factorial(n)).exp()
}

fn ln_pow(x: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * x.ln()
    }
}

/// `A_n = (n - |α|²)/α`.
pub fn modulation_factor(n: usize, alpha: C64) -> Result<C64> {
    if alpha.norm() == 0.0 {
        return Err(Error::ZeroAlpha);
    }
    Ok((n as f64 - alpha.norm_sqr()) / alpha)
}

/// `(1 + (|k|² - 1)|a1|²)^{-1/2}`, the norm of `(a0, k a1)` for a unit qubit.
pub fn modulated_norm(k: C64, a1_abs: f64) -> f64 {
    (1.0 + (k.norm_sqr() - 1.0) * a1_abs * a1_abs).powf(-0.5)
}

/// The modulation bookkeeping attached to photon-count outcome `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModulationFactors {
    pub n: usize,
    pub alpha: C64,
    /// `A_n`
    pub a_n: C64,
    /// `N_n`
    pub norm: f64,
    /// `g_n = F α^n / (2 N_n sqrt(n!))`
    pub g_n: C64,
}

impl ModulationFactors {
    pub fn new(n: usize, alpha: C64, a1_abs: f64) -> Result<Self> {
        let a_n = modulation_factor(n, alpha)?;
        let norm = modulated_norm(a_n, a1_abs);
        let g_n = alpha.powu(n as u32) * displacement_factor(alpha) / (2.0 * norm * factorial(n).sqrt());
        Ok(Self {
            n,
            alpha,
            a_n,
            norm,
            g_n,
        })
    }
}
