//! Problem instances and the permutation machinery built on them.
//!
//! A [`SystemSpec`] fixes the spectrum `a` of the observable (ascending) and
//! the spectrum `p` of the initial state, both diagonal in the same basis.
//! Permutations act on basis labels with the convention
//! `P_sigma = sum_k |k><sigma(k)|`, so that `P_sigma diag(p) P_sigma^dagger`
//! has `p[sigma(k)]` at position `k`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    commutator, max_abs, CMatrix, DensityOperator, HermitianOperator, UnitaryOperator,
};
use crate::tol;

/// Full enumeration of passivizing permutations is limited to this dimension.
pub const N_ENUM_MAX: usize = 10;

fn default_omega() -> f64 {
    1.0
}

/// Unchecked wire format of a [`SystemSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecInput {
    pub a: Vec<f64>,
    pub p: Vec<f64>,
    #[serde(default = "default_omega")]
    pub omega: f64,
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecInput", into = "SpecInput")]
pub struct SystemSpec {
    a: Vec<f64>,
    p: Vec<f64>,
    omega: f64,
    a_groups: Vec<Range<usize>>,
    a_group_of: Vec<usize>,
    // p-degeneracy classes, ordered by decreasing probability.
    p_classes: Vec<Vec<usize>>,
    p_class_of: Vec<usize>,
}

impl TryFrom<SpecInput> for SystemSpec {
    type Error = Error;

    fn try_from(input: SpecInput) -> Result<Self> {
        SystemSpec::new(input.a, input.p, input.omega)
    }
}

impl From<SystemSpec> for SpecInput {
    fn from(spec: SystemSpec) -> Self {
        SpecInput {
            a: spec.a,
            p: spec.p,
            omega: spec.omega,
        }
    }
}

fn degeneracy_tolerance(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = if values.is_empty() { 0.0 } else { hi - lo };
    tol::DEG * range.max(1.0)
}

/// Checks the invariants of a problem instance and caches its degeneracy groups.
pub fn validate_spec(input: SpecInput) -> Result<SystemSpec> {
    SystemSpec::try_from(input)
}

impl SystemSpec {
    pub fn new(a: Vec<f64>, p: Vec<f64>, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidBandwidth(omega));
        }
        if a.is_empty() {
            return Err(Error::InvalidArgument("empty spectrum".into()));
        }
        if a.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: p.len(),
            });
        }
        if let Some(k) = a.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("a[{k}] is not finite")));
        }
        for k in 1..a.len() {
            if a[k] < a[k - 1] {
                return Err(Error::UnsortedObservable {
                    index: k,
                    value: a[k],
                    prev: k - 1,
                    prev_value: a[k - 1],
                });
            }
        }
        let mut p = p;
        for (k, x) in p.iter_mut().enumerate() {
            if !x.is_finite() || *x < -tol::PSD || *x > 1.0 + tol::PSD {
                return Err(Error::NotAProbabilityVector {
                    reason: format!("p[{k}] = {x} is outside [0, 1]"),
                });
            }
            *x = x.clamp(0.0, 1.0);
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > tol::TRACE {
            return Err(Error::NotAProbabilityVector {
                reason: format!("entries sum to {sum}"),
            });
        }

        let n = a.len();
        let a_tol = degeneracy_tolerance(&a);
        let mut a_groups = Vec::new();
        let mut start = 0;
        for k in 1..=n {
            if k == n || a[k] - a[k - 1] > a_tol {
                a_groups.push(start..k);
                start = k;
            }
        }
        let mut a_group_of = vec![0; n];
        for (g, r) in a_groups.iter().enumerate() {
            for k in r.clone() {
                a_group_of[k] = g;
            }
        }

        let p_tol = degeneracy_tolerance(&p);
        let order = descending_order(&p);
        let mut p_classes: Vec<Vec<usize>> = Vec::new();
        for (pos, &k) in order.iter().enumerate() {
            if pos > 0 && p[order[pos - 1]] - p[k] <= p_tol {
                p_classes.last_mut().unwrap().push(k);
            } else {
                p_classes.push(vec![k]);
            }
        }
        let mut p_class_of = vec![0; n];
        for (q, class) in p_classes.iter_mut().enumerate() {
            class.sort_unstable();
            for &k in class.iter() {
                p_class_of[k] = q;
            }
        }

        Ok(Self {
            a,
            p,
            omega,
            a_groups,
            a_group_of,
            p_classes,
            p_class_of,
        })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(self.a.clone(), self.p.clone(), omega)
    }

    /// Index ranges of equal observable eigenvalues.
    pub fn a_groups(&self) -> &[Range<usize>] {
        &self.a_groups
    }

    pub fn a_group_of(&self, k: usize) -> usize {
        self.a_group_of[k]
    }

    /// Index sets of equal probabilities, largest probability first.
    pub fn p_classes(&self) -> &[Vec<usize>] {
        &self.p_classes
    }

    pub fn p_class_of(&self, k: usize) -> usize {
        self.p_class_of[k]
    }

    /// True when both spectra are free of degeneracies.
    pub fn is_nondegenerate(&self) -> bool {
        self.a_groups.len() == self.n() && self.p_classes.len() == self.n()
    }

    /// True when `p` is nondecreasing along the ascending observable spectrum.
    pub fn is_maximally_active(&self) -> bool {
        (1..self.n()).all(|k| self.p_class_of[k] <= self.p_class_of[k - 1])
    }

    /// `diag(a)`.
    pub fn observable(&self) -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&self.a)
    }

    /// `diag(p)`.
    pub fn initial_state(&self) -> DensityOperator {
        DensityOperator::new_unchecked(HermitianOperator::from_real_diagonal(&self.p).into_matrix())
    }

    /// `target[g][q]`: how many entries of p-class `q` a passive state places
    /// in observable eigenspace `g`.
    pub(crate) fn target_counts(&self) -> Vec<Vec<usize>> {
        let order = descending_order(&self.p);
        let mut counts = vec![vec![0; self.p_classes.len()]; self.a_groups.len()];
        for (g, r) in self.a_groups.iter().enumerate() {
            for pos in r.clone() {
                counts[g][self.p_class_of[order[pos]]] += 1;
            }
        }
        counts
    }

    /// Class counts per observable eigenspace for the state `diag(p o sigma)`.
    pub(crate) fn counts_of(&self, sigma: &Permutation) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0; self.p_classes.len()]; self.a_groups.len()];
        for k in 0..self.n() {
            counts[self.a_group_of[k]][self.p_class_of[sigma.images[k]]] += 1;
        }
        counts
    }
}

/// Indices sorted by decreasing value, ties kept in index order.
pub(crate) fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    order
}

/// A permutation of `0..n`, `sigma(k) = images[k]`.
///
/// Displayed in 1-based cycle notation, where `(k1 k2 ...)` means
/// `sigma(k1) = k2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// From 0-based images.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &j in &images {
            if j >= n {
                return Err(Error::InvalidPermutation {
                    n,
                    reason: format!("image {} out of range", j + 1),
                });
            }
            if seen[j] {
                return Err(Error::InvalidPermutation {
                    n,
                    reason: format!("image {} repeated", j + 1),
                });
            }
            seen[j] = true;
        }
        Ok(Self { images })
    }

    /// From 1-based images.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::InvalidPermutation {
                n: images.len(),
                reason: "labels are 1-based".into(),
            });
        }
        Self::new(images.iter().map(|j| j - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    /// From 1-based cycles, e.g. `[[1, 3, 2], [4, 5]]`; unlisted points are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<Option<usize>> = vec![None; n];
        for cycle in cycles {
            for (i, &k) in cycle.iter().enumerate() {
                let next = cycle[(i + 1) % cycle.len()];
                if k == 0 || k > n || next == 0 || next > n {
                    return Err(Error::InvalidPermutation {
                        n,
                        reason: format!("label outside 1..{n} in cycle {cycle:?}"),
                    });
                }
                if images[k - 1].is_some() {
                    return Err(Error::InvalidPermutation {
                        n,
                        reason: format!("label {k} appears twice"),
                    });
                }
                images[k - 1] = Some(next - 1);
            }
        }
        Self::new(
            images
                .into_iter()
                .enumerate()
                .map(|(k, j)| j.unwrap_or(k))
                .collect(),
        )
    }

    /// Parses 1-based cycle notation such as `"(1 3 2)(4 5)"`; commas are allowed
    /// as separators and `"()"` is the identity.
    pub fn parse_cycles(n: usize, text: &str) -> Result<Self> {
        let bad = |reason: String| Error::InvalidPermutation { n, reason };
        let mut cycles = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body_start = rest
                .strip_prefix('(')
                .ok_or_else(|| bad(format!("expected '(' in {text:?}")))?;
            let close = body_start
                .find(')')
                .ok_or_else(|| bad(format!("unbalanced parentheses in {text:?}")))?;
            let body = &body_start[..close];
            let labels = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().map_err(|e| bad(format!("{s:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if !labels.is_empty() {
                cycles.push(labels);
            }
            rest = body_start[close + 1..].trim_start();
        }
        Self::from_cycles(n, &cycles)
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, k: usize) -> usize {
        self.images[k]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn images_one_based(&self) -> Vec<usize> {
        self.images.iter().map(|j| j + 1).collect()
    }

    /// `self o other`: `k -> self(other(k))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.n()];
        for (k, &j) in self.images.iter().enumerate() {
            images[j] = k;
        }
        Permutation { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(k, &j)| k == j)
    }

    pub fn is_involution(&self) -> bool {
        is_involution(self)
    }

    pub fn cycles(&self) -> CycleDecomposition {
        cycle_decomposition(self)
    }

    /// `sum_k a_k p_{sigma(k)}`.
    pub fn expectation(&self, spec: &SystemSpec) -> f64 {
        spec.a
            .iter()
            .zip(&self.images)
            .map(|(a, &j)| a * spec.p[j])
            .sum()
    }

    /// The permuted probability vector `p o sigma`.
    pub fn permuted(&self, values: &[f64]) -> Vec<f64> {
        self.images.iter().map(|&j| values[j]).collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.cycles().fmt(f)
    }
}

/// Disjoint cycles of a permutation, 0-based, in canonical form: each cycle
/// starts at its smallest element and cycles are sorted by that element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleDecomposition {
    pub cycles: Vec<Vec<usize>>,
}

impl CycleDecomposition {
    pub fn lengths(&self) -> Vec<usize> {
        self.cycles.iter().map(Vec::len).collect()
    }

    /// Cycles of length at least two.
    pub fn nontrivial(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.cycles.iter().filter(|c| c.len() > 1)
    }

    /// `n - sum_j 1/l_j`.
    pub fn length_deficit(&self) -> f64 {
        self.flag_weight()
    }

    /// `sum_j (l_j^2 - 1)/l_j`.
    pub fn flag_weight(&self) -> f64 {
        self.cycles
            .iter()
            .map(|c| {
                let l = c.len() as f64;
                (l * l - 1.0) / l
            })
            .sum()
    }
}

impl fmt::Display for CycleDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cycle in &self.cycles {
            write!(f, "(")?;
            for (i, k) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", k + 1)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

pub fn cycle_decomposition(sigma: &Permutation) -> CycleDecomposition {
    let n = sigma.n();
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            cycle.push(k);
            k = sigma.images[k];
        }
        cycles.push(cycle);
    }
    CycleDecomposition { cycles }
}

pub fn is_involution(sigma: &Permutation) -> bool {
    sigma
        .images
        .iter()
        .enumerate()
        .all(|(k, &j)| sigma.images[j] == k)
}

/// Passive energy: the minimum of `tr(rho A)` over states isospectral to `diag(p)`.
pub fn min_expectation(spec: &SystemSpec) -> f64 {
    let order = descending_order(&spec.p);
    spec.a.iter().zip(order).map(|(a, k)| a * spec.p[k]).sum()
}

/// True when `diag(p o sigma)` is passive.
pub fn is_passivizing(sigma: &Permutation, spec: &SystemSpec) -> bool {
    sigma.n() == spec.n() && spec.counts_of(sigma) == spec.target_counts()
}

fn ensure_passivizing(sigma: &Permutation, spec: &SystemSpec) -> Result<()> {
    if sigma.n() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            got: sigma.n(),
        });
    }
    if !is_passivizing(sigma, spec) {
        return Err(Error::NotPassivizing);
    }
    Ok(())
}

/// The canonical passivizing permutation: `sigma(k)` is the index of the
/// k-th largest probability (ties by index).
pub fn canonical_passivizing(spec: &SystemSpec) -> Permutation {
    Permutation {
        images: descending_order(&spec.p),
    }
}

/// Passivity test for a state isospectral to `diag(p)`: it must commute with
/// `diag(a)` and attain the passive energy.
pub fn is_passive(rho: &DensityOperator, spec: &SystemSpec) -> Result<bool> {
    if rho.dim() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            got: rho.dim(),
        });
    }
    let spectrum = rho.spectrum();
    let mut p_sorted = spec.p.clone();
    p_sorted.sort_by(f64::total_cmp);
    let deviation = spectrum
        .iter()
        .zip(&p_sorted)
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
    if deviation > tol::NUM {
        return Err(Error::SpectrumMismatch { deviation });
    }
    let (comm, excess) = passivity_defects(rho, spec);
    Ok(comm <= tol::NUM && excess.abs() <= tol::NUM)
}

/// `(max |[rho, A]|, tr(rho A) - passive energy)`.
pub fn passivity_defects(rho: &DensityOperator, spec: &SystemSpec) -> (f64, f64) {
    let a = spec.observable();
    let comm = max_abs(&commutator(rho.matrix(), a.matrix()));
    let excess = rho.expectation(&a) - min_expectation(spec);
    (comm, excess)
}

/// All passivizing permutations in lexicographic order of their images.
pub fn enumerate_passivizing_permutations(spec: &SystemSpec) -> Result<Vec<Permutation>> {
    let n = spec.n();
    if n > N_ENUM_MAX {
        return Err(Error::DimensionTooLargeForEnumeration { n, max: N_ENUM_MAX });
    }
    let mut remaining = spec.target_counts();
    let mut used = vec![false; n];
    let mut images = Vec::with_capacity(n);
    let mut out = Vec::new();
    enumerate_rec(spec, &mut remaining, &mut used, &mut images, &mut out);
    Ok(out)
}

fn enumerate_rec(
    spec: &SystemSpec,
    remaining: &mut [Vec<usize>],
    used: &mut [bool],
    images: &mut Vec<usize>,
    out: &mut Vec<Permutation>,
) {
    let k = images.len();
    if k == spec.n() {
        out.push(Permutation {
            images: images.clone(),
        });
        return;
    }
    let g = spec.a_group_of[k];
    for j in 0..spec.n() {
        let q = spec.p_class_of[j];
        if used[j] || remaining[g][q] == 0 {
            continue;
        }
        used[j] = true;
        remaining[g][q] -= 1;
        images.push(j);
        enumerate_rec(spec, remaining, used, images, out);
        images.pop();
        remaining[g][q] += 1;
        used[j] = false;
    }
}

/// Discrepancy: the number of probabilities that sit in the wrong observable
/// eigenspace, summed over eigenspaces.
pub fn discrepancy(spec: &SystemSpec) -> usize {
    let target = spec.target_counts();
    let have = spec.counts_of(&Permutation::identity(spec.n()));
    have.iter()
        .zip(&target)
        .map(|(h, t)| {
            h.iter()
                .zip(t)
                .map(|(&x, &y)| x.saturating_sub(y))
                .sum::<usize>()
        })
        .sum()
}

/// Drops transpositions that act within one degeneracy group and orders the
/// rest so the partial products lower the energy step by step.
///
/// Returns 0-based pairs `(k1, k2)` with `k1 < k2`.
pub fn reduce_and_order_involution(
    sigma: &Permutation,
    spec: &SystemSpec,
) -> Result<Vec<(usize, usize)>> {
    if !is_involution(sigma) {
        return Err(Error::NotAnInvolution);
    }
    ensure_passivizing(sigma, spec)?;
    let mut kept: Vec<(usize, usize)> = (0..sigma.n())
        .filter_map(|k| {
            let j = sigma.images[k];
            (k < j).then_some((k, j))
        })
        .filter(|&(k1, k2)| {
            spec.a_group_of[k1] != spec.a_group_of[k2]
                && spec.p_class_of[k1] != spec.p_class_of[k2]
        })
        .collect();
    // Increasing pairs (p_k1 < p_k2) first.
    kept.sort_by_key(|&(k1, k2)| (spec.p[k1] > spec.p[k2], k1));
    Ok(kept)
}

/// The permutation obtained from `sigma` by removing trivial transpositions,
/// as in [`reduce_and_order_involution`].
pub fn reduced_involution(sigma: &Permutation, spec: &SystemSpec) -> Result<Permutation> {
    let pairs = reduce_and_order_involution(sigma, spec)?;
    let mut images: Vec<usize> = (0..sigma.n()).collect();
    for (k1, k2) in pairs {
        images.swap(k1, k2);
    }
    Ok(Permutation { images })
}

/// Closure of `sigma` under cycle division.
///
/// A cycle `(k_1 ... k_l)` is split at positions `i < j` when `k_i` and `k_j`
/// share an observable eigenvalue, or when their successors `k_{i+1}` and
/// `k_{j+1}` share a probability. The split exchanges the images of `k_i` and
/// `k_j`, giving `(k_1 .. k_i k_{j+1} .. k_l)(k_{i+1} .. k_j)`. Every
/// permutation in the result is passivizing; the result is sorted.
pub fn cycle_division(sigma: &Permutation, spec: &SystemSpec) -> Result<Vec<Permutation>> {
    ensure_passivizing(sigma, spec)?;
    let mut seen: BTreeSet<Permutation> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(sigma.clone());
    queue.push_back(sigma.clone());
    while let Some(current) = queue.pop_front() {
        for cycle in current.cycles().cycles {
            let l = cycle.len();
            for i in 0..l {
                for j in i + 1..l {
                    let (ki, kj) = (cycle[i], cycle[j]);
                    let (si, sj) = (cycle[(i + 1) % l], cycle[(j + 1) % l]);
                    let same_a = spec.a_group_of[ki] == spec.a_group_of[kj];
                    let same_p = spec.p_class_of[si] == spec.p_class_of[sj];
                    if !(same_a || same_p) {
                        continue;
                    }
                    let mut images = current.images.clone();
                    images.swap(ki, kj);
                    let next = Permutation { images };
                    if is_passivizing(&next, spec) && seen.insert(next.clone()) {
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// `P_sigma = sum_k |k><sigma(k)|`.
pub fn permutation_operator(sigma: &Permutation) -> UnitaryOperator {
    let n = sigma.n();
    let mut m = CMatrix::zeros(n, n);
    for (k, &j) in sigma.images.iter().enumerate() {
        m[(k, j)] = Complex64::new(1.0, 0.0);
    }
    UnitaryOperator::new_unchecked(m)
}

/// For an observable with two distinct eigenvalues: the involution that swaps
/// the misplaced probabilities of the lower eigenspace with those of the upper
/// one, smallest with largest.
pub fn bivalent_involution(spec: &SystemSpec) -> Result<Permutation> {
    let groups = spec.a_groups.len();
    if groups != 2 {
        return Err(Error::NotBivalent { groups });
    }
    let target = spec.target_counts();
    let have = spec.counts_of(&Permutation::identity(spec.n()));
    let errant = |g: usize| -> Vec<usize> {
        let mut out = Vec::new();
        for (q, class) in spec.p_classes.iter().enumerate() {
            let excess = have[g][q].saturating_sub(target[g][q]);
            out.extend(
                class
                    .iter()
                    .copied()
                    .filter(|&k| spec.a_group_of[k] == g)
                    .take(excess),
            );
        }
        out
    };
    let mut lower = errant(0);
    let mut upper = errant(1);
    lower.sort_by(|&i, &j| spec.p[i].total_cmp(&spec.p[j]).then(i.cmp(&j)));
    upper.sort_by(|&i, &j| spec.p[j].total_cmp(&spec.p[i]).then(i.cmp(&j)));
    let mut images: Vec<usize> = (0..spec.n()).collect();
    for (&k1, &k2) in lower.iter().zip(&upper) {
        images.swap(k1, k2);
    }
    Ok(Permutation { images })
}
