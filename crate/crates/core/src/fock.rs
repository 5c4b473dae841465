//! Truncated multimode Fock space.
//!
//! States are stored sparsely as a map from occupation tuples to complex
//! amplitudes. Every mode carries an inclusive photon-number cutoff; the
//! cutoffs bound the basis but amplitudes outside the support are simply
//! absent. Dense matrices only appear in [`DensityOperator`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::displaced;
use crate::error::{Error, Result};

/// Amplitudes smaller than this in magnitude are dropped after products.
pub const PRUNE_THRESHOLD: f64 = 1e-20;

/// Projections with probability below this carry no post-measurement state.
pub const UNDERFLOW_THRESHOLD: f64 = 1e-15;

/// Rounding slack allowed on a raw probability before it is rejected.
pub const PROBABILITY_SLACK: f64 = 1e-10;

pub(crate) type Key = Vec<u16>;

fn key_of(occ: &[usize]) -> Key {
    occ.iter().map(|&n| n as u16).collect()
}

/// Rejects probabilities outside `[-slack, 1 + slack]`, then clamps to `[0, 1]`.
pub fn checked_probability(p: f64) -> Result<f64> {
    if !p.is_finite() || !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Pure state over `M` truncated bosonic modes.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    cutoffs: Vec<usize>,
    amps: BTreeMap<Key, C64>,
}

impl FockState {
    /// The zero vector; a starting point for building superpositions.
    pub fn zero(cutoffs: Vec<usize>) -> Self {
        Self {
            cutoffs,
            amps: BTreeMap::new(),
        }
    }

    pub fn vacuum(cutoffs: Vec<usize>) -> Self {
        let mut s = Self::zero(cutoffs);
        let m = s.cutoffs.len();
        s.amps.insert(vec![0; m], C64::new(1.0, 0.0));
        s
    }

    /// The number state `|n_1, ..., n_M>`.
    pub fn basis(cutoffs: Vec<usize>, occupation: &[usize]) -> Result<Self> {
        Self::from_amplitudes(cutoffs, [(occupation.to_vec(), C64::new(1.0, 0.0))])
    }

    /// Builds a state from (occupation, amplitude) pairs; repeated occupations add.
    pub fn from_amplitudes<I>(cutoffs: Vec<usize>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, C64)>,
    {
        let mut s = Self::zero(cutoffs);
        for (occ, amp) in entries {
            s.check_occupation(&occ)?;
            s.add_amp(key_of(&occ), amp);
        }
        Ok(s)
    }

    /// Single-mode state with amplitudes indexed by photon number.
    pub fn single_mode(amplitudes: &[C64]) -> Self {
        assert!(!amplitudes.is_empty(), "single-mode state needs at least one amplitude");
        let mut s = Self::zero(vec![amplitudes.len() - 1]);
        for (n, &a) in amplitudes.iter().enumerate() {
            s.add_amp(vec![n as u16], a);
        }
        s
    }

    pub(crate) fn add_amp(&mut self, key: Key, amp: C64) {
        if amp == C64::new(0.0, 0.0) {
            return;
        }
        *self.amps.entry(key).or_insert(C64::new(0.0, 0.0)) += amp;
    }

    pub(crate) fn prune(&mut self) {
        self.amps.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    fn check_occupation(&self, occ: &[usize]) -> Result<()> {
        if occ.len() != self.cutoffs.len() {
            return Err(Error::ShapeMismatch {
                left: occ.len(),
                right: self.cutoffs.len(),
            });
        }
        for (mode, (&n, &c)) in occ.iter().zip(&self.cutoffs).enumerate() {
            if n > c {
                return Err(Error::OccupationOutOfRange {
                    mode,
                    occupation: n,
                    cutoff: c,
                });
            }
        }
        Ok(())
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.mode_count() {
            return Err(Error::ModeOutOfRange {
                mode,
                mode_count: self.mode_count(),
            });
        }
        Ok(())
    }

    pub fn mode_count(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    /// Number of stored (nonzero) amplitudes.
    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, occupation: &[usize]) -> C64 {
        self.amps
            .get(&key_of(occupation))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Iterates over `(occupation, amplitude)` in lexicographic occupation order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, C64)> + '_ {
        self.amps
            .iter()
            .map(|(k, &a)| (k.iter().map(|&n| n as usize).collect(), a))
    }

    pub(crate) fn raw(&self) -> impl Iterator<Item = (&Key, &C64)> + '_ {
        self.amps.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            cutoffs: self.cutoffs.clone(),
            amps: self.amps.iter().map(|(k, &a)| (k.clone(), a * factor)).collect(),
        }
    }

    /// Superposition `self + other`; cutoffs become the per-mode maximum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.mode_count() != other.mode_count() {
            return Err(Error::ShapeMismatch {
                left: self.mode_count(),
                right: other.mode_count(),
            });
        }
        let cutoffs = self
            .cutoffs
            .iter()
            .zip(&other.cutoffs)
            .map(|(&a, &b)| a.max(b))
            .collect();
        let mut s = Self {
            cutoffs,
            amps: self.amps.clone(),
        };
        for (k, &a) in &other.amps {
            s.add_amp(k.clone(), a);
        }
        Ok(s)
    }

    /// Highest occupied photon number in `mode` (0 for an empty state).
    pub fn max_occupation(&self, mode: usize) -> usize {
        self.amps
            .keys()
            .map(|k| k[mode] as usize)
            .max()
            .unwrap_or(0)
    }

    /// Joint photon-count distribution of `modes`, keyed by their occupations.
    pub fn marginal_distribution(&self, modes: &[usize]) -> Result<BTreeMap<Vec<usize>, f64>> {
        for &m in modes {
            self.check_mode(m)?;
        }
        let total = self.norm_sqr();
        if total == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut out: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (k, a) in &self.amps {
            let key = modes.iter().map(|&m| k[m] as usize).collect();
            *out.entry(key).or_insert(0.0) += a.norm_sqr() / total;
        }
        Ok(out)
    }

    /// Highest occupation `n` of `mode` such that the weight on occupations
    /// `>= n` still exceeds `weight`.
    pub fn occupied_support(&self, mode: usize, weight: f64) -> usize {
        let mut dist = vec![0.0; self.cutoffs[mode] + 1];
        for (k, a) in &self.amps {
            dist[k[mode] as usize] += a.norm_sqr();
        }
        let mut tail = 0.0;
        for n in (0..dist.len()).rev() {
            tail += dist[n];
            if tail > weight {
                return n;
            }
        }
        0
    }

    /// Raises (or lowers) the cutoff of one mode. Lowering below the support fails.
    pub fn with_cutoff(&self, mode: usize, cutoff: usize) -> Result<Self> {
        self.check_mode(mode)?;
        let support = self.max_occupation(mode);
        if support > cutoff {
            return Err(Error::OccupationOutOfRange {
                mode,
                occupation: support,
                cutoff,
            });
        }
        let mut s = self.clone();
        s.cutoffs[mode] = cutoff;
        Ok(s)
    }

    /// Reorders modes: mode `k` of the result is mode `order[k]` of `self`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<Self> {
        let m = self.mode_count();
        let mut seen = vec![false; m];
        if order.len() != m {
            return Err(Error::ShapeMismatch {
                left: order.len(),
                right: m,
            });
        }
        for &o in order {
            self.check_mode(o)?;
            if std::mem::replace(&mut seen[o], true) {
                return Err(Error::InvalidParameter(format!("mode {o} repeated in permutation")));
            }
        }
        Ok(Self {
            cutoffs: order.iter().map(|&o| self.cutoffs[o]).collect(),
            amps: self
                .amps
                .iter()
                .map(|(k, &a)| (order.iter().map(|&o| k[o]).collect(), a))
                .collect(),
        })
    }

    /// Photon-number distribution of one mode, indexed `0..=cutoff`.
    pub fn photon_distribution(&self, mode: usize) -> Result<Vec<f64>> {
        self.check_mode(mode)?;
        let mut p = vec![0.0; self.cutoffs[mode] + 1];
        for (k, a) in &self.amps {
            p[k[mode] as usize] += a.norm_sqr();
        }
        Ok(p)
    }

    /// Projects the listed modes and renormalizes.
    ///
    /// Modes measured with rank-one projectors (number states, APD-off, cat
    /// states) are removed from the post-measurement state; modes measured
    /// with coarse projectors (APD-on, photon-number parity) are kept.
    pub fn project(&self, measured: &[(usize, Projector)]) -> Result<ProjectionResult> {
        let total = self.norm_sqr();
        if total == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut seen = vec![false; self.mode_count()];
        for &(mode, _) in measured {
            self.check_mode(mode)?;
            if std::mem::replace(&mut seen[mode], true) {
                return Err(Error::InvalidParameter(format!("mode {mode} projected twice")));
            }
        }

        // Diagonal coarse projectors first: they only filter the support.
        let mut state = self.clone();
        state.amps.retain(|k, _| {
            measured.iter().all(|(mode, p)| match p.diagonal_test() {
                Some(test) => test(k[*mode] as usize),
                None => true,
            })
        });

        // Rank-one projectors contract their mode away, highest index first.
        let mut rank_one: Vec<(usize, Vec<C64>)> = Vec::new();
        for (mode, p) in measured {
            if let Some(v) = p.vector(self.cutoffs[*mode]) {
                rank_one.push((*mode, v));
            }
        }
        rank_one.sort_by_key(|r| std::cmp::Reverse(r.0));
        for (mode, v) in rank_one {
            state = state.contract(mode, &v);
        }

        let raw = state.norm_sqr() / total;
        let probability = checked_probability(raw)?;
        if probability < UNDERFLOW_THRESHOLD {
            return Ok(ProjectionResult {
                probability,
                post_state: None,
                underflow: true,
            });
        }
        Ok(ProjectionResult {
            probability,
            post_state: Some(state.normalized()?),
            underflow: false,
        })
    }

    /// `<v|_mode ⊗ I`, removing `mode`.
    fn contract(&self, mode: usize, v: &[C64]) -> Self {
        let mut cutoffs = self.cutoffs.clone();
        cutoffs.remove(mode);
        let mut out = Self::zero(cutoffs);
        for (k, &a) in &self.amps {
            let n = k[mode] as usize;
            if n >= v.len() {
                continue;
            }
            let mut rest = k.clone();
            rest.remove(mode);
            out.add_amp(rest, v[n].conj() * a);
        }
        out
    }

    /// Groups amplitudes by the occupation of the traced modes.
    fn split_by_traced(&self, keep: &[usize]) -> Result<BTreeMap<Key, Vec<(Key, C64)>>> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let mut mask = vec![false; self.mode_count()];
        for &m in keep {
            self.check_mode(m)?;
            if std::mem::replace(&mut mask[m], true) {
                return Err(Error::InvalidParameter(format!("mode {m} kept twice")));
            }
        }
        let mut groups: BTreeMap<Key, Vec<(Key, C64)>> = BTreeMap::new();
        for (k, &a) in &self.amps {
            let kept: Key = keep.iter().map(|&m| k[m]).collect();
            let traced: Key = (0..k.len()).filter(|&m| !mask[m]).map(|m| k[m]).collect();
            groups.entry(traced).or_default().push((kept, a));
        }
        Ok(groups)
    }

    /// Reduced density operator on `keep` (in the listed order), normalized by the state norm.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityOperator> {
        let groups = self.split_by_traced(keep)?;
        let cutoffs: Vec<usize> = keep.iter().map(|&m| self.cutoffs[m]).collect();
        let dim = dense_dim(&cutoffs);
        let total = self.norm_sqr();
        if total == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut matrix = DMatrix::<C64>::zeros(dim, dim);
        for entries in groups.values() {
            for (ki, ai) in entries {
                let i = dense_index(ki, &cutoffs);
                for (kj, aj) in entries {
                    let j = dense_index(kj, &cutoffs);
                    matrix[(i, j)] += ai * aj.conj() / total;
                }
            }
        }
        Ok(DensityOperator { cutoffs, matrix })
    }

    /// `<target| rho_keep |target>` for the reduced state on `keep`, without
    /// materializing the dense reduced operator.
    pub fn subsystem_fidelity(&self, target: &FockState, keep: &[usize]) -> Result<f64> {
        if target.mode_count() != keep.len() {
            return Err(Error::ShapeMismatch {
                left: target.mode_count(),
                right: keep.len(),
            });
        }
        let groups = self.split_by_traced(keep)?;
        let total = self.norm_sqr() * target.norm_sqr();
        if total == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut f = 0.0;
        for entries in groups.values() {
            let overlap: C64 = entries
                .iter()
                .filter_map(|(k, a)| target.amps.get(k).map(|t| t.conj() * a))
                .sum();
            f += overlap.norm_sqr();
        }
        Ok(f / total)
    }

    pub fn density(&self) -> Result<DensityOperator> {
        let all: Vec<usize> = (0..self.mode_count()).collect();
        self.reduced_density(&all)
    }
}

/// `a ⊗ b`; the modes of `b` follow those of `a`.
pub fn tensor(a: &FockState, b: &FockState) -> FockState {
    let mut cutoffs = a.cutoffs.clone();
    cutoffs.extend_from_slice(&b.cutoffs);
    let mut out = FockState::zero(cutoffs);
    for (ka, &xa) in &a.amps {
        for (kb, &xb) in &b.amps {
            let amp = xa * xb;
            if amp.norm() < PRUNE_THRESHOLD {
                continue;
            }
            let mut k = ka.clone();
            k.extend_from_slice(kb);
            out.amps.insert(k, amp);
        }
    }
    out
}

/// `<a|b>`, conjugate-linear in `a`. Only the mode counts must agree; cutoffs
/// merely bound each sparse support.
pub fn inner(a: &FockState, b: &FockState) -> Result<C64> {
    if a.mode_count() != b.mode_count() {
        return Err(Error::ShapeMismatch {
            left: a.mode_count(),
            right: b.mode_count(),
        });
    }
    let (small, large, flip) = if a.amps.len() <= b.amps.len() {
        (a, b, false)
    } else {
        (b, a, true)
    };
    let mut acc = C64::new(0.0, 0.0);
    for (k, &x) in &small.amps {
        if let Some(&y) = large.amps.get(k) {
            acc += if flip { y.conj() * x } else { x.conj() * y };
        }
    }
    Ok(acc)
}

/// `|<a|b>|^2` for normalized states.
pub fn state_fidelity(a: &FockState, b: &FockState) -> Result<f64> {
    let f = inner(a, b)?.norm_sqr();
    Ok(f.min(1.0))
}

/// Named single-mode measurement projectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Projector {
    /// `|n><n|`
    Number(usize),
    /// On/off detector, no click: `|0><0|`.
    ApdOff,
    /// On/off detector, click: `I - |0><0|`.
    ApdOn,
    /// Even cat state `N+(|-β> + |β>)`.
    ScsEven { beta: f64 },
    /// Odd cat state `N-(|-β> - |β>)`.
    ScsOdd { beta: f64 },
    /// Even photon-number parity.
    ParityEven,
    /// Odd photon-number parity.
    ParityOdd,
}

impl Projector {
    pub fn is_rank_one(&self) -> bool {
        matches!(
            self,
            Projector::Number(_) | Projector::ApdOff | Projector::ScsEven { .. } | Projector::ScsOdd { .. }
        )
    }

    fn diagonal_test(&self) -> Option<fn(usize) -> bool> {
        match self {
            Projector::ApdOn => Some(|n| n > 0),
            Projector::ParityEven => Some(|n| n % 2 == 0),
            Projector::ParityOdd => Some(|n| n % 2 == 1),
            _ => None,
        }
    }

    fn vector(&self, cutoff: usize) -> Option<Vec<C64>> {
        let basis = |n: usize| {
            let mut v = vec![C64::new(0.0, 0.0); cutoff.max(n) + 1];
            v[n] = C64::new(1.0, 0.0);
            v
        };
        match *self {
            Projector::Number(n) => Some(basis(n)),
            Projector::ApdOff => Some(basis(0)),
            Projector::ScsEven { beta } => Some(displaced::scs_amplitudes(Parity::Even, beta, cutoff)),
            Projector::ScsOdd { beta } => Some(displaced::scs_amplitudes(Parity::Odd, beta, cutoff)),
            _ => None,
        }
    }
}

impl FromStr for Projector {
    type Err = Error;

    /// Accepts `n:3`, `apd-off`, `apd-on`, `scs-even:0.3`, `scs-odd:0.3`,
    /// `parity-even`, `parity-odd`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownProjector(s.to_string());
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| a.ok_or_else(bad)?.parse::<f64>().map_err(|_| bad());
        match name {
            "n" | "number" => {
                let n = arg.ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?;
                Ok(Projector::Number(n))
            }
            "apd-off" if arg.is_none() => Ok(Projector::ApdOff),
            "apd-on" if arg.is_none() => Ok(Projector::ApdOn),
            "parity-even" if arg.is_none() => Ok(Projector::ParityEven),
            "parity-odd" if arg.is_none() => Ok(Projector::ParityOdd),
            "scs-even" => Ok(Projector::ScsEven { beta: num(arg)? }),
            "scs-odd" => Ok(Projector::ScsOdd { beta: num(arg)? }),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult {
    pub probability: f64,
    /// Normalized post-measurement state; `None` when the outcome underflowed.
    pub post_state: Option<FockState>,
    pub underflow: bool,
}

fn dense_dim(cutoffs: &[usize]) -> usize {
    cutoffs.iter().map(|c| c + 1).product()
}

fn dense_index(occ: &[u16], cutoffs: &[usize]) -> usize {
    occ.iter()
        .zip(cutoffs)
        .fold(0, |acc, (&n, &c)| acc * (c + 1) + n as usize)
}

fn dense_occupation(mut index: usize, cutoffs: &[usize]) -> Vec<usize> {
    let mut occ = vec![0; cutoffs.len()];
    for (slot, &c) in occ.iter_mut().zip(cutoffs).rev() {
        *slot = index % (c + 1);
        index /= c + 1;
    }
    occ
}

/// Dense operator on a truncated occupation basis (mode 0 most significant).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    cutoffs: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    pub fn new(cutoffs: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = dense_dim(&cutoffs);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::ShapeMismatch {
                left: matrix.nrows(),
                right: dim,
            });
        }
        Ok(Self { cutoffs, matrix })
    }

    pub fn from_pure(state: &FockState) -> Result<Self> {
        state.density()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn element(&self, row: &[usize], col: &[usize]) -> C64 {
        let r = dense_index(&key_of(row), &self.cutoffs);
        let c = dense_index(&key_of(col), &self.cutoffs);
        self.matrix[(r, c)]
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Von Neumann entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .filter(|&l| l > 1e-300)
            .map(|l| -l * l.log2())
            .sum()
    }

    /// `<psi| rho |psi>`.
    pub fn expectation(&self, state: &FockState) -> Result<C64> {
        if state.mode_count() != self.cutoffs.len() {
            return Err(Error::ShapeMismatch {
                left: state.mode_count(),
                right: self.cutoffs.len(),
            });
        }
        let entries: Vec<(usize, C64)> = state
            .raw()
            .filter(|(k, _)| k.iter().zip(&self.cutoffs).all(|(&n, &c)| (n as usize) <= c))
            .map(|(k, &a)| (dense_index(k, &self.cutoffs), a))
            .collect();
        let mut acc = C64::new(0.0, 0.0);
        for &(i, ai) in &entries {
            for &(j, aj) in &entries {
                acc += ai.conj() * self.matrix[(i, j)] * aj;
            }
        }
        Ok(acc)
    }

    /// Checks Hermiticity, unit trace and positivity at the stated tolerances.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(Error::InvalidParameter(format!("non-Hermitian by {herm:e}")));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidParameter(format!("trace {tr} differs from 1")));
        }
        if let Some(&low) = self.eigenvalues().first() {
            if low < -1e-10 {
                return Err(Error::InvalidParameter(format!("negative eigenvalue {low:e}")));
            }
        }
        Ok(())
    }
}

/// Traces out every mode not in `keep`; kept modes appear in the listed order.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let m = rho.cutoffs.len();
    let mut mask = vec![false; m];
    for &k in keep {
        if k >= m {
            return Err(Error::ModeOutOfRange { mode: k, mode_count: m });
        }
        if std::mem::replace(&mut mask[k], true) {
            return Err(Error::InvalidParameter(format!("mode {k} kept twice")));
        }
    }
    let traced: Vec<usize> = (0..m).filter(|&i| !mask[i]).collect();
    let keep_cut: Vec<usize> = keep.iter().map(|&i| rho.cutoffs[i]).collect();
    let trace_cut: Vec<usize> = traced.iter().map(|&i| rho.cutoffs[i]).collect();
    let dk = dense_dim(&keep_cut);
    let dt = dense_dim(&trace_cut);

    let full_index = |kept: &[usize], tr: &[usize]| {
        let mut occ = vec![0u16; m];
        for (&mode, &n) in keep.iter().zip(kept) {
            occ[mode] = n as u16;
        }
        for (&mode, &n) in traced.iter().zip(tr) {
            occ[mode] = n as u16;
        }
        dense_index(&occ, &rho.cutoffs)
    };

    let mut out = DMatrix::<C64>::zeros(dk, dk);
    for i in 0..dk {
        let oi = dense_occupation(i, &keep_cut);
        for j in 0..dk {
            let oj = dense_occupation(j, &keep_cut);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dt {
                let ot = dense_occupation(t, &trace_cut);
                acc += rho.matrix[(full_index(&oi, &ot), full_index(&oj, &ot))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityOperator {
        cutoffs: keep_cut,
        matrix: out,
    })
}
