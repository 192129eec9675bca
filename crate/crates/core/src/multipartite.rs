//! Collective passivization of `N` identical copies and catalysed
//! (assisted) passivization.
//!
//! Product-basis sequences `(k_1, ..., k_N)` are encoded as integers in base
//! `n` with the first factor most significant, matching the Kronecker order.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{bandwidth, CMatrix, HermitianOperator};
use crate::speed_limits::tau_qsl;
use crate::system::{canonical_passivizing, discrepancy, Permutation, SystemSpec};
use crate::tol;

/// Brute-force counting is limited to this many sequences.
pub const DELTA_N_MAX_SEQUENCES: u64 = 10_000_000;
/// Largest product dimension for which the collective Hamiltonian is built.
pub const COLLECTIVE_MAX_DIM: usize = 4096;

/// `N` copies of a system with a non-degenerate observable, optionally with
/// a catalyst of dimension `n_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveSpec {
    base: SystemSpec,
    copies: usize,
    catalyst_dim: Option<usize>,
}

impl CollectiveSpec {
    pub fn new(base: SystemSpec, copies: usize, catalyst_dim: Option<usize>) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidArgument("copy count N must be at least 1".into()));
        }
        if catalyst_dim == Some(0) {
            return Err(Error::InvalidArgument("catalyst dimension must be at least 1".into()));
        }
        if base.a_groups().len() != base.n() {
            return Err(Error::DegenerateSpectrum);
        }
        Ok(Self {
            base,
            copies,
            catalyst_dim,
        })
    }

    pub fn base(&self) -> &SystemSpec {
        &self.base
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn catalyst_dim(&self) -> Option<usize> {
        self.catalyst_dim
    }

    fn sequence_count(&self) -> Option<u64> {
        (self.base.n() as u64).checked_pow(self.copies as u32)
    }
}

fn digits(mut s: usize, n: usize, copies: usize, out: &mut [usize]) {
    for i in (0..copies).rev() {
        out[i] = s % n;
        s /= n;
    }
}

/// Compares `prod p[k_i]` with `prod p[sigma(k_i)]` in log space.
fn products_differ(log_p: &[f64], sigma: &Permutation, seq: &[usize]) -> bool {
    let (mut l1, mut l2) = (0.0, 0.0);
    let (mut z1, mut z2) = (false, false);
    for &k in seq {
        let (x, y) = (log_p[k], log_p[sigma.image(k)]);
        if x == f64::NEG_INFINITY {
            z1 = true;
        } else {
            l1 += x;
        }
        if y == f64::NEG_INFINITY {
            z2 = true;
        } else {
            l2 += y;
        }
    }
    match (z1, z2) {
        (true, true) => false,
        (false, false) => (l1 - l2).abs() > tol::PROD * l1.abs().max(1.0),
        _ => true,
    }
}

fn differing_sequences(cspec: &CollectiveSpec, sigma: &Permutation) -> Result<Vec<usize>> {
    let total = cspec
        .sequence_count()
        .filter(|&t| t <= DELTA_N_MAX_SEQUENCES)
        .ok_or_else(|| {
            Error::TooLarge(format!(
                "n^N exceeds {DELTA_N_MAX_SEQUENCES}; use the closed forms"
            ))
        })? as usize;
    let n = cspec.base.n();
    let copies = cspec.copies;
    let log_p: Vec<f64> = cspec.base.p().iter().map(|p| p.ln()).collect();
    Ok((0..total)
        .into_par_iter()
        .filter(|&s| {
            let mut seq = vec![0; copies];
            digits(s, n, copies, &mut seq);
            products_differ(&log_p, sigma, &seq)
        })
        .collect())
}

/// Number of sequences whose probability changes under the canonical
/// passivizing permutation, counted by brute force.
pub fn delta_n(cspec: &CollectiveSpec) -> Result<u64> {
    let sigma = canonical_passivizing(&cspec.base);
    Ok(differing_sequences(cspec, &sigma)?.len() as u64)
}

/// Maximally active families with a closed-form `delta_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormKind {
    QubitPure,
    QubitMixed,
    QutritRank2,
    QutritFull,
}

impl FromStr for ClosedFormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qubit_pure" => Ok(Self::QubitPure),
            "qubit_mixed" => Ok(Self::QubitMixed),
            "qutrit_rank2" => Ok(Self::QutritRank2),
            "qutrit_full" => Ok(Self::QutritFull),
            other => Err(Error::InvalidArgument(format!("unknown closed form {other:?}"))),
        }
    }
}

impl ClosedFormKind {
    pub fn local_dim(&self) -> usize {
        match self {
            Self::QubitPure | Self::QubitMixed => 2,
            Self::QutritRank2 | Self::QutritFull => 3,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::QubitPure => "qubit_pure",
            Self::QubitMixed => "qubit_mixed",
            Self::QutritRank2 => "qutrit_rank2",
            Self::QutritFull => "qutrit_full",
        }
    }
}

fn binomial(n: u32, k: u32) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Closed forms of `delta_N`. Valid for `1 <= N <= 80`.
pub fn delta_n_closed(kind: ClosedFormKind, copies: u32) -> u128 {
    let n = copies;
    match kind {
        ClosedFormKind::QubitPure => 2,
        ClosedFormKind::QubitMixed => {
            let central = if n.is_multiple_of(2) { binomial(n, n / 2) } else { 0 };
            (1u128 << n) - central
        }
        ClosedFormKind::QutritRank2 => 2 * ((1u128 << n) - 1),
        ClosedFormKind::QutritFull => {
            let trinomials: u128 = (0..=n / 2)
                .map(|k| binomial(n, k) * binomial(n - k, k))
                .sum();
            3u128.pow(n) - trinomials
        }
    }
}

/// `(pi / 2 omega) sqrt(delta_N / (N n^{N-1}))`.
pub fn tau_cqsl_from_delta(delta_n: f64, n: usize, copies: usize, omega: f64) -> f64 {
    let budget = copies as f64 * (n as f64).powi(copies as i32 - 1);
    PI / (2.0 * omega) * (delta_n / budget).sqrt()
}

/// Collective speed limit, with `delta_N` counted by brute force.
pub fn tau_cqsl(cspec: &CollectiveSpec) -> Result<f64> {
    let d = delta_n(cspec)?;
    Ok(tau_cqsl_from_delta(
        d as f64,
        cspec.base.n(),
        cspec.copies,
        cspec.base.omega(),
    ))
}

/// `tau_pas / tau_cpas` for the closed-form families.
pub fn advantage_ratio_closed(kind: ClosedFormKind, copies: u32) -> f64 {
    let n = copies as f64;
    let delta = delta_n_closed(kind, copies) as f64;
    match kind {
        ClosedFormKind::QubitPure => (n * 2f64.powi(copies as i32 - 1)).sqrt(),
        ClosedFormKind::QubitMixed => (n * 2f64.powi(copies as i32) / delta).sqrt(),
        ClosedFormKind::QutritRank2 => {
            (n * 3f64.powi(copies as i32 - 1) / (2f64.powi(copies as i32) - 1.0)).sqrt()
        }
        ClosedFormKind::QutritFull => (2.0 * n * 3f64.powi(copies as i32 - 1) / delta).sqrt(),
    }
}

/// `tau_pas / tau_cqsl` for a spec whose passivizing permutation is an
/// involution, so that both times are attained.
pub fn advantage_ratio(cspec: &CollectiveSpec) -> Result<f64> {
    let sigma = canonical_passivizing(&cspec.base);
    if !sigma.is_involution() {
        return Err(Error::NotAnInvolution);
    }
    let cqsl = tau_cqsl(cspec)?;
    if cqsl == 0.0 {
        return Err(Error::AlreadyPassive);
    }
    Ok(tau_qsl(&cspec.base) / cqsl)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    Qubit,
    Qutrit,
}

impl FromStr for FigureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qubit" => Ok(Self::Qubit),
            "qutrit" => Ok(Self::Qutrit),
            other => Err(Error::InvalidArgument(format!("unknown figure {other:?}"))),
        }
    }
}

/// Advantage ratio against `N = 1..=max_n`: mixed qubits or full-rank qutrits.
pub fn figure_series(which: FigureKind, max_n: u32) -> Vec<(u32, f64)> {
    let kind = match which {
        FigureKind::Qubit => ClosedFormKind::QubitMixed,
        FigureKind::Qutrit => ClosedFormKind::QutritFull,
    };
    (1..=max_n)
        .map(|n| (n, advantage_ratio_closed(kind, n)))
        .collect()
}

/// CSV with header `N,ratio`.
pub fn figure_csv(series: &[(u32, f64)]) -> String {
    let mut out = String::from("N,ratio\n");
    for (n, r) in series {
        out.push_str(&format!("{n},{r:.12e}\n"));
    }
    out
}

/// The diagonal of `rho^{otimes N}` for a diagonal `rho`.
pub fn tensor_power_diagonal(p: &[f64], copies: usize) -> Vec<f64> {
    let n = p.len();
    let total = n.pow(copies as u32);
    let mut seq = vec![0; copies];
    (0..total)
        .map(|s| {
            digits(s, n, copies, &mut seq);
            seq.iter().map(|&k| p[k]).product()
        })
        .collect()
}

/// Couples every sequence whose probability changes with its image under
/// `sigma^{otimes N}`. The coupling `pi / (2 tau_cqsl)` saturates the
/// collective budget `omega^2 N n^{N-1}` and rotates each pair in `tau_cqsl`.
pub fn collective_hamiltonian(cspec: &CollectiveSpec, sigma: &Permutation) -> Result<HermitianOperator> {
    if !sigma.is_involution() {
        return Err(Error::NotAnInvolution);
    }
    let n = cspec.base.n();
    if sigma.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sigma.n(),
        });
    }
    let dim = cspec
        .sequence_count()
        .filter(|&d| d <= COLLECTIVE_MAX_DIM as u64)
        .ok_or_else(|| Error::TooLarge(format!("product dimension exceeds {COLLECTIVE_MAX_DIM}")))?
        as usize;
    let differing = differing_sequences(cspec, sigma)?;
    if differing.is_empty() {
        return Err(Error::AlreadyPassive);
    }
    let cqsl = tau_cqsl_from_delta(differing.len() as f64, n, cspec.copies, cspec.base.omega());
    let g = Complex64::new(PI / (2.0 * cqsl), 0.0);
    let copies = cspec.copies;
    let mut seq = vec![0; copies];
    let mut m = CMatrix::zeros(dim, dim);
    for s in differing {
        digits(s, n, copies, &mut seq);
        let t = seq.iter().fold(0, |acc, &k| acc * n + sigma.image(k));
        m[(s, t)] = g;
        m[(t, s)] = g;
    }
    Ok(HermitianOperator::new_unchecked(m))
}

/// The `N`-copy problem as a single system with observable `sum_i A_i`:
/// eigenvalues `a_{k_1} + ... + a_{k_N}` sorted ascending (stable in the
/// sequence order) with the matching product probabilities.
pub fn global_spec(base: &SystemSpec, copies: usize) -> Result<SystemSpec> {
    let n = base.n();
    let total = n
        .checked_pow(copies as u32)
        .filter(|&t| t <= COLLECTIVE_MAX_DIM)
        .ok_or_else(|| Error::TooLarge(format!("product dimension exceeds {COLLECTIVE_MAX_DIM}")))?;
    let mut seq = vec![0; copies];
    let sums: Vec<f64> = (0..total)
        .map(|s| {
            digits(s, n, copies, &mut seq);
            seq.iter().map(|&k| base.a()[k]).sum()
        })
        .collect();
    let probs = tensor_power_diagonal(base.p(), copies);
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&i, &j| sums[i].total_cmp(&sums[j]));
    SystemSpec::new(
        order.iter().map(|&s| sums[s]).collect(),
        order.iter().map(|&s| probs[s]).collect(),
        base.omega() * (copies as f64 * (n as f64).powi(copies as i32 - 1)).sqrt(),
    )
}

/// `(tau_aqsl, tau_pas / sqrt(n_c))` for a catalyst of dimension `n_c`.
pub fn assisted_bounds(spec: &SystemSpec, n_c: usize, tau_pas: f64) -> Result<(f64, f64)> {
    if n_c == 0 {
        return Err(Error::InvalidArgument("catalyst dimension must be at least 1".into()));
    }
    let root = (n_c as f64).sqrt();
    let aqsl = PI / (2.0 * spec.omega()) * (discrepancy(spec) as f64 / n_c as f64).sqrt();
    Ok((aqsl, tau_pas / root))
}

/// `sqrt(n_c) H_s ⊗ |psi><psi|` with `psi` the `psi_index`-th catalyst basis vector.
pub fn assisted_hamiltonian(
    h_s: &HermitianOperator,
    omega: f64,
    n_c: usize,
    psi_index: usize,
) -> Result<HermitianOperator> {
    if psi_index >= n_c {
        return Err(Error::InvalidArgument(format!(
            "catalyst index {psi_index} outside 0..{n_c}"
        )));
    }
    let mut psi = vec![Complex64::new(0.0, 0.0); n_c];
    psi[psi_index] = Complex64::new(1.0, 0.0);
    assisted_hamiltonian_with_state(h_s, omega, &psi)
}

/// As [`assisted_hamiltonian`] for an arbitrary (normalized here) catalyst state.
pub fn assisted_hamiltonian_with_state(
    h_s: &HermitianOperator,
    omega: f64,
    psi: &[Complex64],
) -> Result<HermitianOperator> {
    let budget = omega * omega;
    let got = bandwidth(h_s);
    if (got - budget).abs() > tol::NUM * budget {
        return Err(Error::BandwidthMismatch {
            expected: budget,
            got,
        });
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if psi.is_empty() || norm == 0.0 {
        return Err(Error::InvalidArgument("catalyst state is zero".into()));
    }
    let n_c = psi.len();
    let projector = CMatrix::from_fn(n_c, n_c, |r, c| psi[r] * psi[c].conj() / (norm * norm));
    let m = h_s.matrix().kronecker(&projector).scale((n_c as f64).sqrt());
    Ok(HermitianOperator::new_unchecked(m))
}

/// System and catalyst as one spec: observable `A ⊗ 1`, state `rho ⊗ rho_c`.
pub fn catalysed_spec(spec: &SystemSpec, catalyst_p: &[f64]) -> Result<SystemSpec> {
    let catalyst = SystemSpec::new(vec![0.0; catalyst_p.len()], catalyst_p.to_vec(), 1.0)?;
    let mut a = Vec::new();
    let mut p = Vec::new();
    for (ai, pi) in spec.a().iter().zip(spec.p()) {
        for q in catalyst.p() {
            a.push(*ai);
            p.push(pi * q);
        }
    }
    SystemSpec::new(a, p, spec.omega())
}
