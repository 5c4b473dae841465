//! Sweep drivers behind the command-line front end. Each driver returns a
//! [`Table`] in deterministic grid order; formatting to CSV happens in the CLI.

use num_complex::Complex64 as C64;

use crate::channel_gen::{generate_channel, GenerationConfig};
use crate::demod::{coherent_success_prob, swap_success_prob, Method, SuccessComparison};
use crate::error::{Error, Result};
use crate::protocol::{
    alice_measure, am_success_probs, approximation_fidelity, bob_correct, direct_success_probs, omega_apply,
    prepare_am_qubit, MeasurementModel, ProbabilityReport, DEFAULT_N_MAX,
};
use crate::qubit::{Basis, Qubit};

pub const DEFAULT_PRECISION: usize = 12;
pub const MAX_ALPHA: f64 = 0.8;
pub const MIN_T: f64 = 0.5;
/// Allowed deviation of a complete distribution from unit total.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Closed-form vs ensemble disagreement above this is flagged.
pub const RHO_B_TOLERANCE: f64 = 1e-2;
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-12;
pub const RECOVERED_ORTHOGONALITY: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub alpha_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub a1_grid: Vec<f64>,
    pub beta: f64,
    pub cutoff: usize,
    pub output_path: String,
    pub precision: usize,
    pub n_max: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            alpha_grid: vec![0.03],
            t_grid: vec![0.99f64.sqrt()],
            a1_grid: grid(0.0, 1.0, 21),
            beta: 0.3,
            cutoff: crate::displaced::DEFAULT_CUTOFF,
            output_path: "-".to_string(),
            precision: DEFAULT_PRECISION,
            n_max: DEFAULT_N_MAX,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        for (name, g) in [("alpha", &self.alpha_grid), ("t", &self.t_grid), ("a1", &self.a1_grid)] {
            if g.is_empty() {
                return bad(format!("{name} grid is empty"));
            }
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(0.0..=MAX_ALPHA).contains(*a)) {
            return bad(format!("alpha {a} outside [0, {MAX_ALPHA}]"));
        }
        if let Some(t) = self.t_grid.iter().find(|t| !(**t > MIN_T && **t <= 1.0)) {
            return bad(format!("t {t} outside ({MIN_T}, 1]"));
        }
        if let Some(a) = self.a1_grid.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return bad(format!("a1 {a} outside [0, 1]"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta {} must be positive", self.beta));
        }
        if self.cutoff < 2 {
            return bad(format!("cutoff {} too small", self.cutoff));
        }
        if !(1..=17).contains(&self.precision) {
            return bad(format!("precision {} outside 1..=17", self.precision));
        }
        Ok(())
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Rounds to `digits` significant digits and prints the shortest decimal that
/// round-trips the rounded value. Magnitudes outside `[1e-4, 1e15)` use
/// exponent notation.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{:.*e}", digits.max(1) - 1, x).parse().unwrap_or(x);
    if (1e-4..1e15).contains(&rounded.abs()) {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Value {
    pub fn render(&self, precision: usize) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Real(x) => format_significant(*x, precision),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
            Value::Empty => String::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    /// Tolerance breaches; a nonempty list means the run failed validation.
    pub violations: Vec<String>,
    /// Informational remarks, such as skipped grid points.
    pub notes: Vec<String>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn rendered(&self, precision: usize) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|v| v.render(precision)).collect())
            .collect()
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

/// The balanced qubit with a quarter-turn relative phase, `(1, i)/√2`.
pub fn surface_qubit() -> Qubit {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Qubit::single_rail(C64::new(h, 0.0), C64::new(0.0, h))
}

/// Rows `(alpha, t, fid)` of the approximation fidelity.
pub fn fidelity_surface(cfg: &SweepConfig) -> Result<Table> {
    cfg.validate()?;
    let q = surface_qubit();
    let mut table = Table::new(&["alpha", "t", "fid"]);
    for &alpha in &cfg.alpha_grid {
        for &t in &cfg.t_grid {
            let fid = approximation_fidelity(alpha, t, &q)?;
            table.rows.push(vec![Value::Real(alpha), Value::Real(t), Value::Real(fid)]);
        }
    }
    Ok(table)
}

fn probability_rows(table: &mut Table, report: &ProbabilityReport) {
    for (n, p) in report.values.iter().enumerate() {
        table.rows.push(vec![
            Value::Real(report.alpha),
            Value::Real(report.a1_abs),
            Value::Int(n as i64),
            Value::Real(*p),
        ]);
    }
    if report.residual.abs() > SUM_TOLERANCE {
        table.violations.push(format!(
            "{:?} at alpha={} a1={}: probabilities miss unit total by {:e}",
            report.kind, report.alpha, report.a1_abs, report.residual
        ));
    }
}

/// Rows `(alpha, a1_abs, n, p)` for an unmodulated input.
pub fn direct_probs(cfg: &SweepConfig) -> Result<Table> {
    cfg.validate()?;
    let mut table = Table::new(&["alpha", "a1_abs", "n", "p"]);
    for &alpha in &cfg.alpha_grid {
        for &a1 in &cfg.a1_grid {
            probability_rows(&mut table, &direct_success_probs(alpha, a1, cfg.n_max)?);
        }
    }
    Ok(table)
}

/// Rows `(alpha, a1_abs, n, p)` for an input pre-modulated with `A_k^{-1}`.
pub fn am_probs(cfg: &SweepConfig, mod_index: usize) -> Result<Table> {
    cfg.validate()?;
    let mut table = Table::new(&["alpha", "a1_abs", "n", "p"]);
    for &alpha in &cfg.alpha_grid {
        for &a1 in &cfg.a1_grid {
            probability_rows(&mut table, &am_success_probs(mod_index, alpha, a1, cfg.n_max)?);
        }
    }
    Ok(table)
}

pub fn demod_comparison(method: Method, which: usize, alpha: f64, a1_abs: f64) -> Result<SuccessComparison> {
    match method {
        Method::Coherent => coherent_success_prob(which, alpha, a1_abs),
        Method::Swap => swap_success_prob(which, alpha, a1_abs),
    }
}

/// Rows `(alpha, a1_abs, which, p_closed_form, p_oracle, abs_diff, flagged)`.
/// Grid points where the coherent displacement has no root are noted and skipped.
pub fn demod_table(cfg: &SweepConfig, method: Method) -> Result<Table> {
    cfg.validate()?;
    let mut table = Table::new(&["alpha", "a1_abs", "which", "p_closed_form", "p_oracle", "abs_diff", "flagged"]);
    for &alpha in &cfg.alpha_grid {
        for which in 0..2 {
            for &a1 in &cfg.a1_grid {
                let cmp = match demod_comparison(method, which, alpha, a1) {
                    Ok(c) => c,
                    Err(e @ Error::NoRoot { .. }) => {
                        table.notes.push(format!("{method} which={which} alpha={alpha}: {e}"));
                        break;
                    }
                    Err(e) => return Err(e),
                };
                if cmp.flagged {
                    table.violations.push(format!(
                        "{method} which={which} alpha={alpha} a1={a1}: closed form {} vs oracle {}",
                        cmp.closed_form, cmp.oracle
                    ));
                }
                table.rows.push(vec![
                    Value::Real(alpha),
                    Value::Real(a1),
                    Value::Int(which as i64),
                    Value::Real(cmp.closed_form),
                    Value::Real(cmp.oracle),
                    Value::Real(cmp.abs_diff),
                    Value::Bool(cmp.flagged),
                ]);
            }
        }
    }
    Ok(table)
}

/// Bob's dual-rail state averaged over all of Alice's results, beside the
/// printed closed form for its coherence.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoBReport {
    pub alpha: f64,
    pub beta: f64,
    pub qubit: Qubit,
    /// `(<01|ρ|01>, <10|ρ|10>)`.
    pub diagonal: (f64, f64),
    /// `<01|ρ|10>` from the ensemble.
    pub offdiag: C64,
    pub offdiag_magnitude: f64,
    pub trace: f64,
    /// The closed form taken literally, with `(1 - 4|a1|²)|a1|²`.
    pub closed_form_offdiag: C64,
    /// The closed form with `(1 - 4|α|²)|a1|²` in place of `(1 - 4|a1|²)|a1|²`.
    pub amended_offdiag: C64,
    /// `|offdiag - closed_form_offdiag|`.
    pub discrepancy: f64,
    pub amended_discrepancy: f64,
    pub flagged: bool,
}

fn rho_b_closed_form(alpha: f64, beta: f64, q: &Qubit, quartic: f64) -> C64 {
    let a = C64::new(alpha, 0.0);
    let w1 = q.a1.norm_sqr();
    let pref = (-2.0 * alpha * alpha).exp() * (-2.0 * beta * beta).exp() / 2.0;
    let bracket = q.a0.norm_sqr() + (1.0 - 4.0 * quartic) * w1 - 2.0 * a.conj() * q.a0.conj() * q.a1
        + 2.0 * a * q.a0 * q.a1.conj();
    bracket * pref
}

/// Tracing out Alice's modes equals averaging over a complete set of her
/// results, so the ensemble state is the reduction of `Ω|φ>` to Bob's rails.
pub fn rho_b(alpha: f64, beta: f64, qubit: &Qubit, cutoff: usize) -> Result<RhoBReport> {
    let q = qubit.normalized()?.with_basis(Basis::SingleRail);
    let state = omega_apply(&q, alpha, beta, cutoff)?;
    let rho = state.reduced_density(&[2, 3])?;
    let offdiag = rho.element(&[0, 1], &[1, 0]);
    let closed = rho_b_closed_form(alpha, beta, &q, q.a1.norm_sqr());
    let amended = rho_b_closed_form(alpha, beta, &q, alpha * alpha);
    let discrepancy = (offdiag - closed).norm();
    Ok(RhoBReport {
        alpha,
        beta,
        qubit: q,
        diagonal: (rho.element(&[0, 1], &[0, 1]).re, rho.element(&[1, 0], &[1, 0]).re),
        offdiag,
        offdiag_magnitude: offdiag.norm(),
        trace: rho.trace().re,
        closed_form_offdiag: closed,
        amended_offdiag: amended,
        discrepancy,
        amended_discrepancy: (offdiag - amended).norm(),
        flagged: discrepancy > RHO_B_TOLERANCE,
    })
}

pub fn rho_b_table(report: &RhoBReport) -> Table {
    let mut table = Table::new(&[
        "alpha",
        "beta",
        "rho_01_01",
        "rho_10_10",
        "trace",
        "offdiag_re",
        "offdiag_im",
        "offdiag_abs",
        "closed_form_re",
        "closed_form_im",
        "discrepancy",
        "amended_re",
        "amended_im",
        "amended_discrepancy",
        "flagged",
    ]);
    let r = report;
    table.rows.push(vec![
        Value::Real(r.alpha),
        Value::Real(r.beta),
        Value::Real(r.diagonal.0),
        Value::Real(r.diagonal.1),
        Value::Real(r.trace),
        Value::Real(r.offdiag.re),
        Value::Real(r.offdiag.im),
        Value::Real(r.offdiag_magnitude),
        Value::Real(r.closed_form_offdiag.re),
        Value::Real(r.closed_form_offdiag.im),
        Value::Real(r.discrepancy),
        Value::Real(r.amended_offdiag.re),
        Value::Real(r.amended_offdiag.im),
        Value::Real(r.amended_discrepancy),
        Value::Bool(r.flagged),
    ]);
    if (r.trace - 1.0).abs() > 1e-10 {
        table.violations.push(format!("trace of Bob's state is {}", r.trace));
    }
    if r.flagged {
        table.notes.push(format!(
            "closed-form coherence {} differs from the ensemble value {} by {:e}",
            r.closed_form_offdiag, r.offdiag, r.discrepancy
        ));
    }
    table
}

/// One qubit's run through modulation, teleportation and correction.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalLeg {
    pub input: Qubit,
    pub mod_index: usize,
    /// Probability that Alice's count equals `mod_index`, from the circuit.
    pub success_oracle: f64,
    /// The same probability from the modulated distribution.
    pub success_closed_form: f64,
    /// Bob's corrected qubit on the success outcome.
    pub recovered: Qubit,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalReport {
    pub alpha: f64,
    pub legs: [OrthogonalLeg; 2],
    /// `|<recovered_1|recovered_2>|`.
    pub recovered_overlap: f64,
}

impl OrthogonalReport {
    pub fn orthogonality_preserved(&self) -> bool {
        self.recovered_overlap < RECOVERED_ORTHOGONALITY
    }
}

/// `(a1*, -a0*)`, orthogonal to `(a0, a1)`.
pub fn orthogonal_partner(q: &Qubit) -> Qubit {
    Qubit::new(q.a1.conj(), -q.a0.conj(), q.basis)
}

fn orthogonal_leg(input: &Qubit, mod_index: usize, alpha: f64, beta: f64, cutoff: usize) -> Result<OrthogonalLeg> {
    let am = prepare_am_qubit(input, mod_index, alpha)?;
    let state = omega_apply(&am, alpha, beta, cutoff)?;
    let m = alice_measure(&state, MeasurementModel::IdealParity, mod_index)?;
    let target = input.with_basis(Basis::DualRail);
    let mut success = 0.0;
    let mut recovered = None;
    let mut fidelity: f64 = 1.0;
    for rec in m.outcomes.iter().filter(|r| r.n == mod_index) {
        let bob = bob_correct(rec)?;
        success += rec.probability;
        fidelity = fidelity.min(bob.fidelity(&target));
        recovered.get_or_insert(bob);
    }
    let closed = am_success_probs(mod_index, alpha, input.a1.norm(), mod_index)?.get(mod_index);
    Ok(OrthogonalLeg {
        input: *input,
        mod_index,
        success_oracle: success,
        success_closed_form: closed,
        recovered: recovered.ok_or(Error::ZeroNorm)?,
        fidelity,
    })
}

/// Teleports an orthogonal pair, each with its own modulation index.
pub fn orthogonal_scenario(
    alpha: f64,
    pair: (Qubit, Qubit),
    mods: (usize, usize),
    beta: f64,
    cutoff: usize,
) -> Result<OrthogonalReport> {
    let p1 = pair.0.normalized()?.with_basis(Basis::SingleRail);
    let p2 = pair.1.normalized()?.with_basis(Basis::SingleRail);
    let overlap = p1.inner(&p2).norm();
    if overlap > ORTHOGONALITY_TOLERANCE {
        return Err(Error::NotOrthogonal(overlap));
    }
    let l1 = orthogonal_leg(&p1, mods.0, alpha, beta, cutoff)?;
    let l2 = orthogonal_leg(&p2, mods.1, alpha, beta, cutoff)?;
    let recovered_overlap = l1.recovered.inner(&l2.recovered).norm();
    Ok(OrthogonalReport {
        alpha,
        legs: [l1, l2],
        recovered_overlap,
    })
}

pub fn orthogonal_table(report: &OrthogonalReport) -> Table {
    let mut table = Table::new(&[
        "qubit",
        "a0_re",
        "a0_im",
        "a1_re",
        "a1_im",
        "mod",
        "p_oracle",
        "p_closed_form",
        "fidelity",
        "recovered_overlap",
    ]);
    for (i, leg) in report.legs.iter().enumerate() {
        table.rows.push(vec![
            Value::Int(i as i64 + 1),
            Value::Real(leg.input.a0.re),
            Value::Real(leg.input.a0.im),
            Value::Real(leg.input.a1.re),
            Value::Real(leg.input.a1.im),
            Value::Int(leg.mod_index as i64),
            Value::Real(leg.success_oracle),
            Value::Real(leg.success_closed_form),
            Value::Real(leg.fidelity),
            Value::Real(report.recovered_overlap),
        ]);
        if (leg.success_oracle - leg.success_closed_form).abs() > SUM_TOLERANCE {
            table.violations.push(format!(
                "qubit {}: circuit success {} vs closed form {}",
                i + 1,
                leg.success_oracle,
                leg.success_closed_form
            ));
        }
    }
    if !report.orthogonality_preserved() {
        table
            .violations
            .push(format!("recovered qubits overlap by {:e}", report.recovered_overlap));
    }
    table
}

/// Rows `(n5, n6, probability, fidelity)`; fidelity is blank for heralds that
/// are not post-processed.
pub fn channel_gen_table(cfg: &GenerationConfig) -> Result<Table> {
    let report = generate_channel(cfg)?;
    let mut table = Table::new(&["n5", "n6", "probability", "fidelity"]);
    for &((a, b), p) in &report.distribution {
        let fid = report.herald(a, b).map_or(Value::Empty, |h| Value::Real(h.fidelity));
        table.rows.push(vec![Value::Int(a as i64), Value::Int(b as i64), Value::Real(p), fid]);
    }
    let residual = report.total_probability() - 1.0;
    if residual.abs() > SUM_TOLERANCE {
        table
            .violations
            .push(format!("herald probabilities miss unit total by {residual:e}"));
    }
    Ok(table)
}
