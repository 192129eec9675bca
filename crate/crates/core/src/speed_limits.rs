//! Time bounds, exact passivization times and time-optimal Hamiltonians.
//!
//! All times are in units of `1/omega` scaled by the spec's `omega`.
//! [`bound_report`] collects the speed limit, the best cycle-length upper
//! bound and, where one of the exact methods applies, the passivization time.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{principal_log, CMatrix, HermitianOperator, UnitaryOperator};
use crate::oracle::{minimize_isotropy_distance, numeric_min_distance, IsotropyProblem};
use crate::system::{
    bivalent_involution, canonical_passivizing, cycle_decomposition, cycle_division, discrepancy,
    enumerate_passivizing_permutations, is_passivizing, reduced_involution, Permutation,
    SystemSpec, N_ENUM_MAX,
};

/// Restarts used for numerically evaluated flag blocks.
pub const FLAG_RESTARTS: usize = 32;
const FLAG_SEED: u64 = 0x5eed;

/// `pi sqrt(delta) / (2 omega)`.
pub fn tau_qsl(spec: &SystemSpec) -> f64 {
    PI * (discrepancy(spec) as f64).sqrt() / (2.0 * spec.omega())
}

/// `pi / (sqrt(3) omega) * sqrt(n - sum_j 1/l_j)` for the cycle lengths of `sigma`.
pub fn tau_from_cycles(sigma: &Permutation, omega: f64) -> f64 {
    PI / (3f64.sqrt() * omega) * cycle_decomposition(sigma).length_deficit().sqrt()
}

/// Exact passivization time for spectra without degeneracies.
pub fn tau_pas_nondegenerate(spec: &SystemSpec) -> Result<f64> {
    if !spec.is_nondegenerate() {
        return Err(Error::DegenerateSpectrum);
    }
    Ok(tau_from_cycles(&canonical_passivizing(spec), spec.omega()))
}

/// Cycle-length upper bound for a passivizing `sigma`. With `divide`, the
/// bound is minimized over the cycle-division closure of `sigma`; the
/// permutation attaining it is returned alongside.
pub fn tau_upper_from_permutation(
    sigma: &Permutation,
    spec: &SystemSpec,
    divide: bool,
) -> Result<(f64, Permutation)> {
    if !is_passivizing(sigma, spec) {
        return Err(Error::NotPassivizing);
    }
    let candidates = if divide {
        cycle_division(sigma, spec)?
    } else {
        vec![sigma.clone()]
    };
    Ok(best_upper(&candidates, spec.omega()))
}

fn best_upper(candidates: &[Permutation], omega: f64) -> (f64, Permutation) {
    candidates
        .iter()
        .map(|s| (tau_from_cycles(s, omega), s))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(t, s)| (t, s.clone()))
        .expect("nonempty candidate set")
}

/// Passivizing permutations considered for bounds: the full set when it can
/// be enumerated, otherwise the canonical permutation and its divisions.
pub fn candidate_permutations(spec: &SystemSpec) -> Result<Vec<Permutation>> {
    if spec.n() <= N_ENUM_MAX {
        enumerate_passivizing_permutations(spec)
    } else {
        cycle_division(&canonical_passivizing(spec), spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactMethod {
    Nondegenerate,
    Involution,
    Decomposition,
    Oracle,
}

impl ExactMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExactMethod::Nondegenerate => "nondegenerate",
            ExactMethod::Involution => "involution",
            ExactMethod::Decomposition => "decomposition",
            ExactMethod::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBound {
    pub time: f64,
    pub permutation: Permutation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactTime {
    pub time: f64,
    pub method: ExactMethod,
    /// Set when the value comes from a numerical minimization.
    pub numerical: bool,
    /// Set when the value relies on the hybrid isotropy construction.
    pub experimental: bool,
}

/// Speed limit, best upper bound and, when available, the exact time.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub tau_qsl: f64,
    pub tau_upper: UpperBound,
    pub tau_exact: Option<ExactTime>,
    pub discrepancy: usize,
    pub warnings: Vec<String>,
}

/// Oracle fallback settings for [`bound_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    pub restarts: usize,
    pub seed: u64,
}

pub fn bound_report(spec: &SystemSpec, oracle: Option<OracleOptions>) -> Result<BoundReport> {
    let delta = discrepancy(spec);
    let qsl = tau_qsl(spec);
    let candidates = candidate_permutations(spec)?;
    let (upper, upper_sigma) = best_upper(&candidates, spec.omega());
    let mut warnings = Vec::new();
    if spec.n() > N_ENUM_MAX {
        warnings.push(format!(
            "n = {} exceeds {N_ENUM_MAX}; upper bound uses the canonical permutation and its cycle divisions only",
            spec.n()
        ));
    }

    let exact = if delta == 0 || candidates.iter().any(Permutation::is_involution) {
        Some(ExactTime {
            time: qsl,
            method: ExactMethod::Involution,
            numerical: false,
            experimental: false,
        })
    } else if spec.is_nondegenerate() {
        Some(ExactTime {
            time: tau_pas_nondegenerate(spec)?,
            method: ExactMethod::Nondegenerate,
            numerical: false,
            experimental: false,
        })
    } else {
        match best_decomposition(spec, &candidates) {
            Some(d) => Some(ExactTime {
                time: d.time,
                method: ExactMethod::Decomposition,
                numerical: d.numerical,
                experimental: d.experimental,
            }),
            None => match oracle {
                Some(opts) if spec.n() <= crate::oracle::ORACLE_MAX_DIM => {
                    match numeric_min_distance(spec, opts.restarts, opts.seed) {
                        Ok(r) => Some(ExactTime {
                            time: r.best_distance / spec.omega(),
                            method: ExactMethod::Oracle,
                            numerical: true,
                            experimental: false,
                        }),
                        Err(e) => {
                            warnings.push(format!("oracle failed: {e}"));
                            None
                        }
                    }
                }
                _ => {
                    warnings.push(
                        "no exact method applies; the passivization time lies between tau_qsl and tau_upper"
                            .into(),
                    );
                    None
                }
            },
        }
    };
    if let Some(e) = &exact {
        if e.experimental {
            warnings.push("exact time uses the experimental hybrid isotropy construction".into());
        }
    }

    Ok(BoundReport {
        tau_qsl: qsl,
        tau_upper: UpperBound {
            time: upper,
            permutation: upper_sigma,
        },
        tau_exact: exact,
        discrepancy: delta,
        warnings,
    })
}

fn best_decomposition(spec: &SystemSpec, candidates: &[Permutation]) -> Option<DistanceReport> {
    candidates
        .iter()
        .filter_map(|s| distance_to_passivizing_set(spec, s, None).ok())
        .min_by(|a, b| a.distance.total_cmp(&b.distance))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianMethod {
    Involution,
    Nondegenerate,
    MaximallyActive,
}

impl std::str::FromStr for HamiltonianMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "involution" => Ok(Self::Involution),
            "nondegenerate" => Ok(Self::Nondegenerate),
            "maximally_active" | "maximally-active" => Ok(Self::MaximallyActive),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

/// A time-optimal Hamiltonian with the time it needs and the permutation it realizes.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeOptimal {
    pub hamiltonian: HermitianOperator,
    pub time: f64,
    pub permutation: Permutation,
}

fn precondition(method: &str, reason: &str) -> Error {
    Error::MethodPreconditionFailed {
        method: method.into(),
        reason: reason.into(),
    }
}

fn find_passivizing_involution(spec: &SystemSpec) -> Option<Permutation> {
    if spec.a_groups().len() == 2 {
        return bivalent_involution(spec).ok();
    }
    candidate_permutations(spec)
        .ok()?
        .into_iter()
        .find(Permutation::is_involution)
}

/// Couples each reduced transposition `(k1 k2)` with strength `omega/sqrt(2m)`.
fn involution_hamiltonian(pairs: &[(usize, usize)], n: usize, omega: f64) -> HermitianOperator {
    let g = Complex64::new(omega / (2.0 * pairs.len() as f64).sqrt(), 0.0);
    let mut m = CMatrix::zeros(n, n);
    for &(k1, k2) in pairs {
        m[(k2, k1)] = g;
        m[(k1, k2)] = g;
    }
    HermitianOperator::new_unchecked(m)
}

fn transpositions(sigma: &Permutation) -> Vec<(usize, usize)> {
    (0..sigma.n())
        .filter_map(|k| {
            let j = sigma.image(k);
            (k < j).then_some((k, j))
        })
        .collect()
}

pub fn build_time_optimal_hamiltonian(
    spec: &SystemSpec,
    method: HamiltonianMethod,
) -> Result<TimeOptimal> {
    let n = spec.n();
    let omega = spec.omega();
    match method {
        HamiltonianMethod::Involution => {
            let sigma = find_passivizing_involution(spec)
                .ok_or_else(|| precondition("involution", "no passivizing involution exists"))?;
            let reduced = reduced_involution(&sigma, spec)?;
            let pairs = transpositions(&reduced);
            if pairs.is_empty() {
                return Err(Error::AlreadyPassive);
            }
            Ok(TimeOptimal {
                hamiltonian: involution_hamiltonian(&pairs, n, omega),
                time: tau_qsl(spec),
                permutation: reduced,
            })
        }
        HamiltonianMethod::MaximallyActive => {
            if !spec.is_maximally_active() {
                return Err(precondition(
                    "maximally_active",
                    "p is not nondecreasing along the observable spectrum",
                ));
            }
            let delta = discrepancy(spec);
            if delta == 0 {
                return Err(Error::AlreadyPassive);
            }
            let pairs: Vec<(usize, usize)> = (0..delta / 2).map(|k| (k, n - 1 - k)).collect();
            let mut images: Vec<usize> = (0..n).collect();
            for &(k1, k2) in &pairs {
                images.swap(k1, k2);
            }
            Ok(TimeOptimal {
                hamiltonian: involution_hamiltonian(&pairs, n, omega),
                time: tau_qsl(spec),
                permutation: Permutation::new(images)?,
            })
        }
        HamiltonianMethod::Nondegenerate => {
            if !spec.is_nondegenerate() {
                return Err(precondition("nondegenerate", "spectra are degenerate"));
            }
            let sigma = canonical_passivizing(spec);
            let cycles = cycle_decomposition(&sigma);
            let deficit = cycles.length_deficit();
            if deficit == 0.0 {
                return Err(Error::AlreadyPassive);
            }
            let scale = omega * (3.0 / deficit).sqrt();
            let mut m = CMatrix::zeros(n, n);
            for cycle in cycles.nontrivial() {
                let l = cycle.len();
                // P_c restricted to the cycle's support, in the order of `cycle`.
                let mut pc = CMatrix::zeros(l, l);
                for (x, &k) in cycle.iter().enumerate() {
                    let y = cycle.iter().position(|&j| j == sigma.image(k)).unwrap();
                    pc[(x, y)] = Complex64::new(1.0, 0.0);
                }
                let log = principal_log(&UnitaryOperator::new_unchecked(pc));
                let parity = if l % 2 == 0 { 1.0 / l as f64 } else { 0.0 };
                for (x, &kx) in cycle.iter().enumerate() {
                    for (y, &ky) in cycle.iter().enumerate() {
                        let mut v = log.entries()[(x, y)] * Complex64::new(0.0, 1.0 / PI);
                        if x == y {
                            v += parity;
                        }
                        m[(kx, ky)] = v * scale;
                    }
                }
            }
            Ok(TimeOptimal {
                hamiltonian: HermitianOperator::new_unchecked(m),
                time: tau_from_cycles(&sigma, omega),
                permutation: sigma,
            })
        }
    }
}

/// Which isotropy group a block's geometry is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSide {
    /// Every state eigenspace lies inside an observable eigenspace.
    Observable,
    /// Every observable eigenspace lies inside a state eigenspace.
    RhoSide,
    /// Each state eigenspace lies inside, or is a sum of, observable
    /// eigenspaces. Experimental.
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    /// A single eigenspace: the quotient is a point.
    Trivial,
    FubiniStudy,
    Grassmann,
    Flag,
    GeneralizedFlag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    /// Sorted 0-based indices.
    pub indices: Vec<usize>,
    pub side: BlockSide,
    pub kind: BlockKind,
    /// The eigenspace partition that defines the quotient, as index sets.
    pub eigenspaces: Vec<Vec<usize>>,
    /// `sigma` restricted to the block, on local labels `0..indices.len()`.
    pub sigma: Permutation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionPlan {
    pub blocks: Vec<Block>,
}

/// Finest grouping of `sigma`'s cycles such that every degeneracy group
/// lies in one block.
pub fn default_grouping(sigma: &Permutation, spec: &SystemSpec) -> Vec<Vec<usize>> {
    let n = spec.n();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    fn union(parent: &mut [usize], x: usize, y: usize) {
        let (rx, ry) = (find(parent, x), find(parent, y));
        if rx != ry {
            parent[rx.max(ry)] = rx.min(ry);
        }
    }
    for k in 0..n {
        union(&mut parent, k, sigma.image(k));
    }
    for r in spec.a_groups() {
        for k in r.clone() {
            union(&mut parent, r.start, k);
        }
    }
    for class in spec.p_classes() {
        for &k in class {
            union(&mut parent, class[0], k);
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut root_block = vec![usize::MAX; n];
    for k in 0..n {
        let r = find(&mut parent, k);
        if root_block[r] == usize::MAX {
            root_block[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[root_block[r]].push(k);
    }
    blocks
}

fn validate_grouping(sigma: &Permutation, spec: &SystemSpec, grouping: &[Vec<usize>]) -> Result<()> {
    let n = spec.n();
    let mut block_of = vec![usize::MAX; n];
    for (b, block) in grouping.iter().enumerate() {
        for &k in block {
            if k >= n {
                return Err(Error::InvalidGrouping(format!("index {} out of range", k + 1)));
            }
            if block_of[k] != usize::MAX {
                return Err(Error::InvalidGrouping(format!("index {} in two blocks", k + 1)));
            }
            block_of[k] = b;
        }
    }
    if let Some(k) = block_of.iter().position(|&b| b == usize::MAX) {
        return Err(Error::InvalidGrouping(format!("index {} not covered", k + 1)));
    }
    for k in 0..n {
        if block_of[sigma.image(k)] != block_of[k] {
            return Err(Error::InvalidGrouping(format!(
                "block of {} is not invariant under the permutation",
                k + 1
            )));
        }
    }
    for r in spec.a_groups() {
        if r.clone().any(|k| block_of[k] != block_of[r.start]) {
            return Err(Error::InvalidGrouping(format!(
                "observable eigenspace {:?} split across blocks",
                r.clone().map(|k| k + 1).collect::<Vec<_>>()
            )));
        }
    }
    for class in spec.p_classes() {
        if class.iter().any(|&k| block_of[k] != block_of[class[0]]) {
            return Err(Error::InvalidGrouping(format!(
                "state eigenspace {:?} split across blocks",
                class.iter().map(|k| k + 1).collect::<Vec<_>>()
            )));
        }
    }
    Ok(())
}

/// Splits the problem into `sigma`-invariant blocks and classifies the
/// geometry of each. `grouping` overrides [`default_grouping`].
pub fn decompose_invariant_subspaces(
    sigma: &Permutation,
    spec: &SystemSpec,
    grouping: Option<&[Vec<usize>]>,
) -> Result<DecompositionPlan> {
    if !is_passivizing(sigma, spec) {
        return Err(Error::NotPassivizing);
    }
    let grouping: Vec<Vec<usize>> = match grouping {
        Some(g) => {
            validate_grouping(sigma, spec, g)?;
            g.iter()
                .map(|b| {
                    let mut b = b.clone();
                    b.sort_unstable();
                    b
                })
                .collect()
        }
        None => default_grouping(sigma, spec),
    };
    let blocks = grouping
        .into_iter()
        .map(|indices| classify_block(sigma, spec, indices))
        .collect::<Result<Vec<_>>>()?;
    Ok(DecompositionPlan { blocks })
}

fn classify_block(sigma: &Permutation, spec: &SystemSpec, indices: Vec<usize>) -> Result<Block> {
    let local = |k: usize| indices.binary_search(&k).expect("block is sigma-invariant");
    let a_groups: Vec<Vec<usize>> = spec
        .a_groups()
        .iter()
        .filter(|r| indices.contains(&r.start))
        .map(|r| r.clone().map(local).collect())
        .collect();
    let p_classes: Vec<Vec<usize>> = spec
        .p_classes()
        .iter()
        .filter(|c| indices.contains(&c[0]))
        .map(|c| c.iter().map(|&k| local(k)).collect())
        .collect();
    let m = indices.len();
    let mut a_of = vec![0; m];
    for (g, group) in a_groups.iter().enumerate() {
        for &k in group {
            a_of[k] = g;
        }
    }
    let mut p_of = vec![0; m];
    for (q, class) in p_classes.iter().enumerate() {
        for &k in class {
            p_of[k] = q;
        }
    }
    let p_in_a = p_classes
        .iter()
        .all(|c| c.iter().all(|&k| a_of[k] == a_of[c[0]]));
    let a_in_p = a_groups
        .iter()
        .all(|g| g.iter().all(|&k| p_of[k] == p_of[g[0]]));
    // Hybrid: each state eigenspace is inside one observable eigenspace or
    // is a union of whole observable eigenspaces.
    let hybrid = p_classes.iter().all(|c| {
        c.iter().all(|&k| a_of[k] == a_of[c[0]])
            || c.iter()
                .all(|&k| a_groups[a_of[k]].iter().all(|&j| p_of[j] == p_of[k]))
    });
    let (side, eigenspaces) = if p_in_a {
        (BlockSide::Observable, a_groups)
    } else if a_in_p {
        (BlockSide::RhoSide, p_classes)
    } else if hybrid {
        (BlockSide::Hybrid, join_partition(&a_groups, &p_of, p_classes.len()))
    } else {
        return Err(Error::NestingViolation {
            block: indices.iter().map(|k| k + 1).collect(),
        });
    };

    let images: Vec<usize> = indices.iter().map(|&k| local(sigma.image(k))).collect();
    let sigma_local = Permutation::new(images)?;
    let kind = if eigenspaces.len() == 1 {
        BlockKind::Trivial
    } else if eigenspaces.iter().all(|e| e.len() == 1) {
        BlockKind::Flag
    } else if eigenspaces.len() == 2 && eigenspaces.iter().any(|e| e.len() == 1) {
        BlockKind::FubiniStudy
    } else if eigenspaces.len() == 2 {
        BlockKind::Grassmann
    } else {
        BlockKind::GeneralizedFlag
    };
    Ok(Block {
        indices,
        side,
        kind,
        eigenspaces,
        sigma: sigma_local,
    })
}

/// Connected components of the union of the two partitions.
fn join_partition(a_groups: &[Vec<usize>], p_of: &[usize], n_classes: usize) -> Vec<Vec<usize>> {
    let mut class_component = vec![usize::MAX; n_classes];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for group in a_groups {
        let existing = group
            .iter()
            .find_map(|&k| (class_component[p_of[k]] != usize::MAX).then(|| class_component[p_of[k]]));
        let c = existing.unwrap_or_else(|| {
            components.push(Vec::new());
            components.len() - 1
        });
        for &k in group {
            class_component[p_of[k]] = c;
            components[c].push(k);
        }
    }
    for c in &mut components {
        c.sort_unstable();
    }
    components
}

/// Distance from the identity class to the class of the block permutation.
pub fn block_distance(block: &Block) -> Result<f64> {
    let sigma = &block.sigma;
    match block.kind {
        BlockKind::Trivial => Ok(0.0),
        BlockKind::Flag => Ok((PI * PI / 3.0 * cycle_decomposition(sigma).flag_weight()).sqrt()),
        BlockKind::FubiniStudy => {
            let point = block
                .eigenspaces
                .iter()
                .find(|e| e.len() == 1)
                .ok_or(Error::UnclassifiedBlock)?[0];
            Ok(if sigma.image(point) == point {
                0.0
            } else {
                PI / 2f64.sqrt()
            })
        }
        BlockKind::Grassmann => {
            let first = &block.eigenspaces[0];
            let crossing = first
                .iter()
                .filter(|&&k| !first.contains(&sigma.image(k)))
                .count();
            Ok(PI * (2.0 * crossing as f64).sqrt() / 2.0)
        }
        BlockKind::GeneralizedFlag => Ok(generalized_flag_distance(block)?.0),
    }
}

/// Numerical flag distance: min over the block isotropy group of
/// `||Log(P_sigma U)||`. Returns the value and whether the search converged.
fn generalized_flag_distance(block: &Block) -> Result<(f64, bool)> {
    let problem = IsotropyProblem {
        n: block.indices.len(),
        left_groups: Vec::new(),
        right_groups: block.eigenspaces.clone(),
        sigmas: vec![block.sigma.clone()],
    };
    let r = minimize_isotropy_distance(&problem, FLAG_RESTARTS, FLAG_SEED)?;
    if !r.converged {
        return Err(Error::NoConvergence {
            best: r.best_distance,
            spread: r.spread,
        });
    }
    Ok((r.best_distance, r.converged))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub plan: DecompositionPlan,
    pub block_distances: Vec<f64>,
    /// `dist(1, passivizing set)`.
    pub distance: f64,
    /// `distance / omega`.
    pub time: f64,
    pub numerical: bool,
    pub experimental: bool,
}

/// `sqrt(sum_j dist_j^2)` over the blocks of the decomposition, and the
/// corresponding passivization time.
pub fn distance_to_passivizing_set(
    spec: &SystemSpec,
    sigma: &Permutation,
    grouping: Option<&[Vec<usize>]>,
) -> Result<DistanceReport> {
    let plan = decompose_invariant_subspaces(sigma, spec, grouping)?;
    let block_distances = plan
        .blocks
        .iter()
        .map(block_distance)
        .collect::<Result<Vec<_>>>()?;
    let distance = block_distances.iter().map(|d| d * d).sum::<f64>().sqrt();
    let numerical = plan
        .blocks
        .iter()
        .any(|b| b.kind == BlockKind::GeneralizedFlag);
    let experimental = plan.blocks.iter().any(|b| b.side == BlockSide::Hybrid);
    Ok(DistanceReport {
        plan,
        block_distances,
        distance,
        time: distance / spec.omega(),
        numerical,
        experimental,
    })
}
