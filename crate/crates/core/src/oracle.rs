//! Numerical ground truth.
//!
//! The passivizing unitaries form the double coset `U_A P_sigma U_rho`, with
//! `U_A` and `U_rho` the unitary commutants of the observable and the initial
//! state. [`numeric_min_distance`] minimizes `||Log(U P_sigma V)||` over that
//! set by multistart coordinate pattern search. The remaining functions check
//! finished constructions: bandwidth saturation, passivity of the final
//! state, projector annihilation and trajectory lengths.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{
    basis_projector, bandwidth, evolve_constant, expm_hermitian_matrix, log_norm, max_abs,
    CMatrix, HermitianOperator, UnitaryOperator,
};
use crate::speed_limits::tau_qsl;
use crate::system::{
    discrepancy, enumerate_passivizing_permutations, is_passive, permutation_operator,
    Permutation, SystemSpec,
};
use crate::tol;

/// Largest dimension accepted by [`numeric_min_distance`].
pub const ORACLE_MAX_DIM: usize = 6;

const INITIAL_STEP: f64 = 0.5;
const MIN_STEP: f64 = 1e-8;
const MAX_EVALS: usize = 400_000;
const SPREAD_TOL: f64 = 1e-5;
const REPRODUCE_TOL: f64 = 1e-7;
const MIN_GAIN: f64 = 1e-13;

/// Hermitian basis of the commutant of a block-diagonal structure: for each
/// index group of size `d`, the `d^2` elementary diagonal, symmetric and
/// antisymmetric generators on that group.
pub fn commutant_generators(n: usize, groups: &[Vec<usize>]) -> Vec<CMatrix> {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::new();
    for group in groups {
        for (x, &j) in group.iter().enumerate() {
            let mut g = CMatrix::zeros(n, n);
            g[(j, j)] = one;
            out.push(g);
            for &k in &group[x + 1..] {
                let mut s = CMatrix::zeros(n, n);
                s[(j, k)] = one;
                s[(k, j)] = one;
                out.push(s);
                let mut t = CMatrix::zeros(n, n);
                t[(j, k)] = -i;
                t[(k, j)] = i;
                out.push(t);
            }
        }
    }
    out
}

/// Minimization of `||Log(e^{iX} P_sigma e^{iY})||` with `X` and `Y` in the
/// spans of two commutants.
#[derive(Debug, Clone)]
pub struct IsotropyProblem {
    pub n: usize,
    pub left_groups: Vec<Vec<usize>>,
    pub right_groups: Vec<Vec<usize>>,
    /// Starting permutations; restarts cycle through them.
    pub sigmas: Vec<Permutation>,
}

/// Outcome of a multistart minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_distance: f64,
    pub best_unitary: UnitaryOperator,
    pub best_permutation: Permutation,
    pub restarts_used: usize,
    pub converged: bool,
    /// Max minus min of the final restart values.
    pub spread: f64,
    pub restart_values: Vec<f64>,
}

struct Objective {
    left: Vec<Vec<usize>>,
    right: Vec<Vec<usize>>,
    n: usize,
}

fn parameter_count(groups: &[Vec<usize>]) -> usize {
    groups.iter().map(|g| g.len() * g.len()).sum()
}

impl Objective {
    /// `e^{iX}` with `X = sum_r x_r G_r`, assembled group by group in the
    /// generator order of [`commutant_generators`].
    fn exp_i(&self, groups: &[Vec<usize>], x: &[f64]) -> CMatrix {
        let mut u = CMatrix::identity(self.n, self.n);
        let mut offset = 0;
        for group in groups {
            let d = group.len();
            let coords = &x[offset..offset + d * d];
            offset += d * d;
            if d == 1 {
                u[(group[0], group[0])] = Complex64::from_polar(1.0, coords[0]);
                continue;
            }
            let mut m = CMatrix::zeros(d, d);
            let mut c = coords.iter();
            for a in 0..d {
                m[(a, a)] = Complex64::new(*c.next().unwrap(), 0.0);
                for b in a + 1..d {
                    let sym = *c.next().unwrap();
                    let anti = *c.next().unwrap();
                    m[(a, b)] = Complex64::new(sym, -anti);
                    m[(b, a)] = Complex64::new(sym, anti);
                }
            }
            let block = expm_hermitian_matrix(&m, -1.0);
            for (a, &ka) in group.iter().enumerate() {
                for (b, &kb) in group.iter().enumerate() {
                    u[(ka, kb)] = block[(a, b)];
                }
            }
        }
        u
    }

    fn dim(&self) -> usize {
        parameter_count(&self.left) + parameter_count(&self.right)
    }

    fn unitary(&self, p: &CMatrix, x: &[f64]) -> CMatrix {
        let (xl, xr) = x.split_at(parameter_count(&self.left));
        self.exp_i(&self.left, xl) * p * self.exp_i(&self.right, xr)
    }

    fn value(&self, p: &CMatrix, x: &[f64]) -> f64 {
        log_norm(&UnitaryOperator::new_unchecked(self.unitary(p, x)))
    }
}

fn pattern_search(objective: &Objective, p: &CMatrix, mut x: Vec<f64>) -> (f64, Vec<f64>) {
    let mut best = objective.value(p, &x);
    let mut step = INITIAL_STEP;
    let mut evals = 1;
    while step >= MIN_STEP && evals < MAX_EVALS {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let old = x[i];
                x[i] = old + dir * step;
                let v = objective.value(p, &x);
                evals += 1;
                // Rounding-level gains along flat directions do not count.
                if v < best - MIN_GAIN {
                    best = v;
                    improved = true;
                    break;
                }
                x[i] = old;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, x)
}

/// Runs the multistart search; never fails, convergence is reported in the result.
pub fn minimize_isotropy_distance(
    problem: &IsotropyProblem,
    restarts: usize,
    seed: u64,
) -> Result<OracleResult> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    if problem.sigmas.is_empty() {
        return Err(Error::InvalidArgument("no starting permutation".into()));
    }
    let objective = Objective {
        left: problem.left_groups.clone(),
        right: problem.right_groups.clone(),
        n: problem.n,
    };
    let dim = objective.dim();
    let operators: Vec<CMatrix> = problem
        .sigmas
        .iter()
        .map(|s| permutation_operator(s).into_matrix())
        .collect();

    let runs: Vec<(f64, Vec<f64>, usize)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            let x0: Vec<f64> = (0..dim)
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect();
            let which = r % operators.len();
            let (value, x) = pattern_search(&objective, &operators[which], x0);
            (value, x, which)
        })
        .collect();

    let (best_index, _) = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.0.total_cmp(&b.0).then(i.cmp(j)))
        .expect("at least one restart");
    let values: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let best = values[best_index];
    let worst = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = worst - best;
    let reproduced = values.iter().filter(|&&v| v - best <= REPRODUCE_TOL).count();
    let converged = spread <= SPREAD_TOL || reproduced >= 3.min(restarts);
    let (_, x, which) = &runs[best_index];
    Ok(OracleResult {
        best_distance: best,
        best_unitary: UnitaryOperator::new_unchecked(objective.unitary(&operators[*which], x)),
        best_permutation: problem.sigmas[*which].clone(),
        restarts_used: restarts,
        converged,
        spread,
        restart_values: values,
    })
}

/// Numerical `dist(1, passivizing set)` for a problem instance with `n <= 6`.
///
/// The passive case returns zero without searching.
pub fn numeric_min_distance(spec: &SystemSpec, restarts: usize, seed: u64) -> Result<OracleResult> {
    let n = spec.n();
    if n > ORACLE_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            n,
            max: ORACLE_MAX_DIM,
        });
    }
    let sigmas = enumerate_passivizing_permutations(spec)?;
    if discrepancy(spec) == 0 {
        return Ok(OracleResult {
            best_distance: 0.0,
            best_unitary: UnitaryOperator::identity(n),
            best_permutation: Permutation::identity(n),
            restarts_used: 0,
            converged: true,
            spread: 0.0,
            restart_values: Vec::new(),
        });
    }
    let problem = IsotropyProblem {
        n,
        left_groups: spec.a_groups().iter().map(|r| r.clone().collect()).collect(),
        right_groups: spec.p_classes().to_vec(),
        sigmas,
    };
    let result = minimize_isotropy_distance(&problem, restarts, seed)?;
    if !result.converged {
        return Err(Error::NoConvergence {
            best: result.best_distance,
            spread: result.spread,
        });
    }
    Ok(result)
}

/// Per-check outcome of [`verify_passivization_run`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub bandwidth: f64,
    pub bandwidth_ok: bool,
    pub commutator: f64,
    pub energy_excess: f64,
    pub passive_ok: bool,
    pub tau_qsl: f64,
    pub time_ok: bool,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.bandwidth_ok && self.passive_ok && self.time_ok
    }
}

/// Checks that `H` saturates the bandwidth budget, that running it for `T`
/// passivizes the initial state, and that `T` respects the speed limit.
pub fn verify_passivization_run(h: &HermitianOperator, spec: &SystemSpec, time: f64) -> RunReport {
    let budget = spec.omega() * spec.omega();
    let bw = bandwidth(h);
    let rho = evolve_constant(h, &spec.initial_state(), time);
    let (commutator, energy_excess) = crate::system::passivity_defects(&rho, spec);
    let passive_ok = h.dim() == spec.n() && is_passive(&rho, spec).unwrap_or(false);
    let qsl = tau_qsl(spec);
    RunReport {
        bandwidth: bw,
        bandwidth_ok: (bw - budget).abs() <= tol::NUM * budget,
        commutator,
        energy_excess,
        passive_ok,
        tau_qsl: qsl,
        time_ok: time >= qsl - tol::NUM,
    }
}

/// Per-check outcome of [`verify_optimality_properties`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityReport {
    /// Largest entry of `Pi H Pi` over observable eigenprojectors.
    pub observable_blocks: f64,
    /// Largest entry of `Pi H Pi` over state eigenprojectors.
    pub state_blocks: f64,
    pub trace: f64,
}

impl OptimalityReport {
    pub fn passed(&self) -> bool {
        self.observable_blocks <= tol::NUM && self.state_blocks <= tol::NUM && self.trace.abs() <= tol::NUM
    }
}

fn max_compression(h: &CMatrix, groups: &[Vec<usize>]) -> f64 {
    let n = h.nrows();
    groups
        .iter()
        .map(|g| {
            let p = basis_projector(n, g);
            max_abs(&(&p * h * &p))
        })
        .fold(0.0, f64::max)
}

/// `Pi H Pi = 0` for every eigenprojector of the observable and the state,
/// and `tr H = 0`.
pub fn verify_optimality_properties(h: &HermitianOperator, spec: &SystemSpec) -> OptimalityReport {
    let a_groups: Vec<Vec<usize>> = spec.a_groups().iter().map(|r| r.clone().collect()).collect();
    OptimalityReport {
        observable_blocks: max_compression(h.matrix(), &a_groups),
        state_blocks: max_compression(h.matrix(), spec.p_classes()),
        trace: h.trace(),
    }
}

/// Constancy of `tr H(t)^2` over sample times, as a max deviation from the first sample.
pub fn bandwidth_variation<F>(generator: F, times: &[f64]) -> f64
where
    F: Fn(f64) -> CMatrix,
{
    let values: Vec<f64> = times
        .iter()
        .map(|&t| generator(t).iter().map(|z| z.norm_sqr()).sum())
        .collect();
    match values.first() {
        Some(&first) => values.iter().map(|v| (v - first).abs()).fold(0.0, f64::max),
        None => 0.0,
    }
}

/// Length of the trajectory of each basis vector, `T <k|H^2|k>^{1/2}`.
pub fn trajectory_lengths(h: &HermitianOperator, time: f64) -> Vec<f64> {
    let h2 = h.matrix() * h.matrix();
    (0..h.dim())
        .map(|k| time * h2[(k, k)].re.max(0.0).sqrt())
        .collect()
}
