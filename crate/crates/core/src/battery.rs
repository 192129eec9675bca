//! Quantum batteries: ergotropy, discharge power bounds, smooth cyclic
//! discharge potentials and fluctuations of the transferred energy.
//!
//! The internal Hamiltonian `H = diag(eps)` plays the role of the observable,
//! so every battery is also a [`SystemSpec`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multipartite::{tau_cqsl, CollectiveSpec};
use crate::operator::{
    bandwidth, expm_hermitian_matrix, expm_skew, hs_norm, von_neumann_evolve, CMatrix,
    DensityOperator, HermitianOperator, UnitaryOperator,
};
use crate::speed_limits::{bound_report, tau_pas_nondegenerate, tau_qsl};
use crate::system::{
    discrepancy, enumerate_passivizing_permutations, is_passive, min_expectation,
    permutation_operator, SystemSpec,
};
use crate::tol;

#[derive(Debug, Clone, Deserialize)]
struct BatteryInput {
    eps: Vec<f64>,
    p: Vec<f64>,
    #[serde(default = "one")]
    omega: f64,
}

fn one() -> f64 {
    1.0
}

/// Internal energies `eps` (nondecreasing), populations `p` and the
/// bandwidth budget `omega` of the discharging potential.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(try_from = "BatteryInput")]
pub struct BatterySpec {
    eps: Vec<f64>,
    p: Vec<f64>,
    omega: f64,
    #[serde(skip)]
    system: SystemSpec,
}

impl TryFrom<BatteryInput> for BatterySpec {
    type Error = Error;

    fn try_from(input: BatteryInput) -> Result<Self> {
        BatterySpec::new(input.eps, input.p, input.omega)
    }
}

impl BatterySpec {
    pub fn new(eps: Vec<f64>, p: Vec<f64>, omega: f64) -> Result<Self> {
        let system = SystemSpec::new(eps, p, omega)?;
        Ok(Self {
            eps: system.a().to_vec(),
            p: system.p().to_vec(),
            omega,
            system,
        })
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n(&self) -> usize {
        self.eps.len()
    }

    /// The battery as a passivization problem with observable `H`.
    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn internal_hamiltonian(&self) -> HermitianOperator {
        self.system.observable()
    }
}

/// `W = E_H(rho_i) - E_H(rho_p)`.
pub fn ergotropy(bspec: &BatterySpec) -> f64 {
    let e: f64 = bspec.eps.iter().zip(&bspec.p).map(|(e, p)| e * p).sum();
    (e - min_expectation(&bspec.system)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerScenario {
    Generic,
    MaximallyActive,
    Nondegenerate,
    Assisted { n_c: usize },
    Collective { copies: usize },
}

/// Which time bounds the power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeKind {
    /// The exact passivization time.
    Exact,
    /// Only the speed limit is known; the bound is valid but may not be tight.
    QslOnly,
    /// Assisted speed limit.
    AssistedQsl,
    /// Collective speed limit.
    CollectiveQsl,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerBound {
    pub power: f64,
    pub ergotropy: f64,
    pub tau: f64,
    pub tau_kind: TimeKind,
    /// Upper bound on the collective over parallel power ratio.
    pub advantage: Option<f64>,
}

/// Exact passivization time when one is known, else the speed limit.
fn best_single_time(spec: &SystemSpec) -> Result<(f64, TimeKind)> {
    let report = bound_report(spec, None)?;
    Ok(match report.tau_exact {
        Some(exact) if !exact.numerical => (exact.time, TimeKind::Exact),
        _ => (report.tau_qsl, TimeKind::QslOnly),
    })
}

/// Upper bound on the average power of a complete discharge.
pub fn power_upper_bound(bspec: &BatterySpec, scenario: PowerScenario) -> Result<PowerBound> {
    let spec = &bspec.system;
    let w = ergotropy(bspec);
    if discrepancy(spec) == 0 {
        return Err(Error::AlreadyPassive);
    }
    let bound = |tau: f64, kind: TimeKind, work: f64| PowerBound {
        power: work / tau,
        ergotropy: work,
        tau,
        tau_kind: kind,
        advantage: None,
    };
    match scenario {
        PowerScenario::Generic => {
            let (tau, kind) = best_single_time(spec)?;
            Ok(bound(tau, kind, w))
        }
        PowerScenario::MaximallyActive => {
            if !spec.is_maximally_active() {
                return Err(Error::MethodPreconditionFailed {
                    method: "maximally_active".into(),
                    reason: "battery state is not maximally active".into(),
                });
            }
            Ok(bound(tau_qsl(spec), TimeKind::Exact, w))
        }
        PowerScenario::Nondegenerate => Ok(bound(tau_pas_nondegenerate(spec)?, TimeKind::Exact, w)),
        PowerScenario::Assisted { n_c } => {
            if n_c == 0 {
                return Err(Error::InvalidArgument("catalyst dimension must be at least 1".into()));
            }
            let tau = tau_qsl(spec) / (n_c as f64).sqrt();
            Ok(bound(tau, TimeKind::AssistedQsl, w))
        }
        PowerScenario::Collective { copies } => {
            let cspec = CollectiveSpec::new(spec.clone(), copies, None)?;
            let tau = tau_cqsl(&cspec)?;
            let (tau_pas, kind) = best_single_time(spec)?;
            let mut b = bound(tau, TimeKind::CollectiveQsl, copies as f64 * w);
            // With only the speed limit the single-battery time is a lower
            // bound, so the ratio is reported only for exact times.
            b.advantage = (kind == TimeKind::Exact).then(|| tau_pas / tau);
            Ok(b)
        }
    }
}

/// `S(x) = 6x^5 - 15x^4 + 10x^3`, clamped to `[0, 1]`.
fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

/// `int_0^x S`, clamped to `[0, 1]`.
fn smoothstep_integral(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x.powi(4) * (x * (x - 3.0) + 2.5)
}

/// The smooth discharge of a battery: `V(t) = u'(t) e^{-itH} V_I e^{itH}`
/// on `[0, tau_pas + eps]`, where `u' = h S(t/r)` ramps up, holds at `h`
/// and ramps down symmetrically.
#[derive(Debug, Clone, PartialEq)]
pub struct DischargeSchedule {
    h: HermitianOperator,
    v_i: HermitianOperator,
    tau_pas: f64,
    ramp: f64,
    rise: f64,
    height: f64,
}

impl DischargeSchedule {
    pub fn duration(&self) -> f64 {
        self.tau_pas + self.ramp
    }

    pub fn ramp(&self) -> f64 {
        self.ramp
    }

    pub fn tau_pas(&self) -> f64 {
        self.tau_pas
    }

    pub fn internal_hamiltonian(&self) -> &HermitianOperator {
        &self.h
    }

    pub fn interaction_potential(&self) -> &HermitianOperator {
        &self.v_i
    }

    /// `u'(t)`, in `[0, 1]`, zero outside `(0, duration)`.
    pub fn u_prime(&self, t: f64) -> f64 {
        let d = self.duration();
        if t <= 0.0 || t >= d {
            return 0.0;
        }
        self.height * smoothstep(t / self.rise).min(smoothstep((d - t) / self.rise))
    }

    /// `u(t)`: `0` before the process and `tau_pas` after it.
    pub fn u(&self, t: f64) -> f64 {
        let d = self.duration();
        let (r, h) = (self.rise, self.height);
        if t <= 0.0 {
            0.0
        } else if t <= r {
            h * r * smoothstep_integral(t / r)
        } else if t < d - r {
            h * (r / 2.0 + (t - r))
        } else if t < d {
            self.tau_pas - h * r * smoothstep_integral((d - t) / r)
        } else {
            self.tau_pas
        }
    }

    /// The lab-frame potential `V(t)`.
    pub fn potential(&self, t: f64) -> HermitianOperator {
        let s = self.u_prime(t);
        if s == 0.0 {
            return HermitianOperator::zeros(self.h.dim());
        }
        // H is diagonal, so the rotation only multiplies entries by phases.
        let e = self.h.matrix().diagonal();
        let m = CMatrix::from_fn(self.h.dim(), self.h.dim(), |j, k| {
            self.v_i.matrix()[(j, k)] * Complex64::from_polar(s, -t * (e[j].re - e[k].re))
        });
        HermitianOperator::new_unchecked(m)
    }

    /// The interaction-picture potential `V_I(t) = e^{itH} V(t) e^{-itH}`.
    pub fn interaction_picture(&self, t: f64) -> HermitianOperator {
        let rot = expm_hermitian_matrix(self.h.matrix(), t);
        let v = self.potential(t);
        HermitianOperator::new_unchecked(rot.adjoint() * v.matrix() * rot)
    }

    /// Midpoint steps that keep the propagation error of the final state
    /// well below the passivity tolerance.
    pub fn recommended_steps(&self) -> usize {
        let e = self.h.matrix().diagonal();
        let range = e.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
            - e.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let omega = bandwidth(&self.v_i).sqrt().max(f64::MIN_POSITIVE);
        (5000.0 * omega * self.duration() * (1.0 + range / omega)).ceil().max(1000.0) as usize
    }

    /// Total generator `H + V(t)`.
    pub fn generator(&self, t: f64) -> CMatrix {
        self.h.matrix() + self.potential(t).matrix()
    }

    /// Closed-form propagator over the whole process:
    /// `e^{-i D H} e^{-i tau_pas V_I}`.
    pub fn implemented_unitary(&self) -> UnitaryOperator {
        expm_skew(&self.h, self.duration()).compose(&expm_skew(&self.v_i, self.tau_pas))
    }

    /// Propagates `rho0` under `H + V(t)` over the whole process.
    pub fn evolve(&self, rho0: &DensityOperator, steps: usize) -> Result<DensityOperator> {
        von_neumann_evolve(|t| self.generator(t), rho0, self.duration(), steps)
    }

    /// Propagates `rho0` under `V_I(t)` over the whole process.
    pub fn evolve_interaction(&self, rho0: &DensityOperator, steps: usize) -> Result<DensityOperator> {
        von_neumann_evolve(
            |t| self.interaction_picture(t).into_matrix(),
            rho0,
            self.duration(),
            steps,
        )
    }
}

/// Smooth cyclic discharge that implements `V_I` for `tau_pas` within a
/// total duration `tau_pas + eps_ramp`.
pub fn smooth_discharge_schedule(
    bspec: &BatterySpec,
    v_i: &HermitianOperator,
    tau_pas: f64,
    eps_ramp: f64,
) -> Result<DischargeSchedule> {
    if !(eps_ramp > 0.0 && eps_ramp.is_finite()) {
        return Err(Error::InvalidArgument(format!("ramp must be positive, got {eps_ramp}")));
    }
    if !(tau_pas >= 0.0 && tau_pas.is_finite()) {
        return Err(Error::NegativeTime(tau_pas));
    }
    if v_i.dim() != bspec.n() {
        return Err(Error::DimensionMismatch {
            expected: bspec.n(),
            got: v_i.dim(),
        });
    }
    let budget = bspec.omega * bspec.omega;
    let got = bandwidth(v_i);
    if (got - budget).abs() > tol::NUM * budget {
        return Err(Error::BandwidthMismatch {
            expected: budget,
            got,
        });
    }
    let d = tau_pas + eps_ramp;
    let (rise, height) = if eps_ramp <= tau_pas {
        (eps_ramp, 1.0)
    } else {
        (d / 2.0, 2.0 * tau_pas / d)
    };
    Ok(DischargeSchedule {
        h: bspec.internal_hamiltonian(),
        v_i: v_i.clone(),
        tau_pas,
        ramp: eps_ramp,
        rise,
        height,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionPictureReport {
    /// Largest `|tr(V_I(t)^2) - tr(V(t)^2)|` over the samples.
    pub bandwidth_deviation: f64,
    /// Largest sampled `tr(V(t)^2)`.
    pub max_bandwidth: f64,
    pub lab_final_passive: bool,
    pub interaction_final_passive: bool,
    pub passed: bool,
}

/// Checks that the interaction picture preserves the bandwidth at `samples`
/// times and that both frames end in a passive state (or both do not).
pub fn interaction_picture_check(
    schedule: &DischargeSchedule,
    bspec: &BatterySpec,
    samples: usize,
    steps: usize,
) -> Result<InteractionPictureReport> {
    let d = schedule.duration();
    let mut deviation: f64 = 0.0;
    let mut max_bw: f64 = 0.0;
    for j in 0..samples.max(1) {
        let t = d * (j as f64 + 0.5) / samples.max(1) as f64;
        let lab = bandwidth(&schedule.potential(t));
        let int = bandwidth(&schedule.interaction_picture(t));
        deviation = deviation.max((lab - int).abs());
        max_bw = max_bw.max(lab);
    }
    let rho0 = bspec.system.initial_state();
    let lab = is_passive(&schedule.evolve(&rho0, steps)?, &bspec.system)?;
    let int = is_passive(&schedule.evolve_interaction(&rho0, steps)?, &bspec.system)?;
    let budget = bspec.omega * bspec.omega;
    Ok(InteractionPictureReport {
        bandwidth_deviation: deviation,
        max_bandwidth: max_bw,
        lab_final_passive: lab,
        interaction_final_passive: int,
        passed: deviation <= tol::NUM * budget.max(1.0) && lab && int,
    })
}

/// Transition probabilities `p(l, k) = tr(Pi_l U Pi_k rho Pi_k U^dagger)`
/// between energy levels, indexed `[l][k]`, with the distinct energies.
pub fn transition_probabilities(u: &UnitaryOperator, bspec: &BatterySpec) -> (Vec<f64>, Vec<Vec<f64>>) {
    let groups = bspec.system.a_groups();
    let energies: Vec<f64> = groups.iter().map(|g| bspec.eps[g.start]).collect();
    let m = u.matrix();
    let probs = groups
        .iter()
        .map(|gl| {
            groups
                .iter()
                .map(|gk| {
                    gk.clone()
                        .map(|k| bspec.p[k] * gl.clone().map(|l| m[(l, k)].norm_sqr()).sum::<f64>())
                        .sum()
                })
                .collect()
        })
        .collect();
    (energies, probs)
}

/// `Delta^2 W` from the transition probabilities.
pub fn variance_direct(u: &UnitaryOperator, bspec: &BatterySpec) -> f64 {
    let (e, probs) = transition_probabilities(u, bspec);
    let w = ergotropy(bspec);
    let mut s = 0.0;
    for (l, row) in probs.iter().enumerate() {
        for (k, p) in row.iter().enumerate() {
            s += (e[k] - e[l]).powi(2) * p;
        }
    }
    s - w * w
}

/// `Delta^2 W` from variances and the cross term `tr(U^dagger H U H rho)`.
pub fn variance_closed(u: &UnitaryOperator, bspec: &BatterySpec) -> f64 {
    let h = bspec.internal_hamiltonian();
    let h2 = HermitianOperator::new_unchecked(h.matrix() * h.matrix());
    let rho_i = bspec.system.initial_state();
    let rho_p = rho_i.conjugated(u);
    let var = |rho: &DensityOperator| rho.expectation(&h2) - rho.expectation(&h).powi(2);
    let (ei, ep) = (rho_i.expectation(&h), rho_p.expectation(&h));
    let cross: Complex64 = (u.matrix().adjoint() * h.matrix() * u.matrix() * h.matrix() * rho_i.matrix()).trace();
    var(&rho_i) + var(&rho_p) + 2.0 * ei * ep - 2.0 * cross.re
}

/// Variance of the transferred energy for a passivizing `U`, computed both
/// ways; the two must agree.
pub fn energy_transfer_variance(u: &UnitaryOperator, bspec: &BatterySpec) -> Result<f64> {
    if u.dim() != bspec.n() {
        return Err(Error::DimensionMismatch {
            expected: bspec.n(),
            got: u.dim(),
        });
    }
    let rho_p = bspec.system.initial_state().conjugated(u);
    if !is_passive(&rho_p, &bspec.system)? {
        return Err(Error::NotPassivizing);
    }
    let direct = variance_direct(u, bspec);
    let closed = variance_closed(u, bspec);
    let scale = bspec.eps.iter().fold(0.0f64, |m, e| m.max(e.abs())).powi(2).max(1.0);
    if (direct - closed).abs() > tol::NUM * scale {
        return Err(Error::FormulaMismatch { direct, closed });
    }
    Ok(direct)
}

/// Smallest and largest variance over the passivizing permutation operators.
pub fn variance_range(bspec: &BatterySpec) -> Result<(f64, f64)> {
    let perms = enumerate_passivizing_permutations(&bspec.system)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for sigma in &perms {
        let v = energy_transfer_variance(&permutation_operator(sigma), bspec)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// The general passivizing unitary of a qutrit with strict energies and
/// populations `p_1 = p_2 < p_3`, parametrized by `a` in `[0, 1]` and the
/// phases `[alpha, beta, gamma, theta]`.
pub fn qutrit_passivizing_family(a: f64, phases: [f64; 4], bspec: &BatterySpec) -> Result<UnitaryOperator> {
    if bspec.n() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: bspec.n(),
        });
    }
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::InvalidArgument(format!("a must lie in [0, 1], got {a}")));
    }
    let (e, p) = (&bspec.eps, &bspec.p);
    let degenerate_gap = (p[0] - p[1]).abs();
    if degenerate_gap > tol::NUM || p[2] <= p[1] + tol::NUM {
        return Err(Error::SpectrumMismatch {
            deviation: degenerate_gap.max(p[1] - p[2]),
        });
    }
    if e[1] - e[0] <= tol::DEG || e[2] - e[1] <= tol::DEG {
        return Err(Error::SpectrumMismatch {
            deviation: (e[1] - e[0]).min(e[2] - e[1]),
        });
    }
    let [alpha, beta, gamma, theta] = phases;
    let ph = |x: f64| Complex64::from_polar(1.0, x);
    let (s, c) = (a.sqrt(), (1.0 - a).sqrt());
    let z = Complex64::new(0.0, 0.0);
    let m = CMatrix::from_row_slice(
        3,
        3,
        &[
            z,
            z,
            ph(alpha),
            ph(beta) * s,
            ph(beta + theta) * c,
            z,
            ph(gamma) * c,
            -ph(gamma + theta) * s,
            z,
        ],
    );
    Ok(UnitaryOperator::new_unchecked(m))
}

/// Distance of `rho` from commuting with the internal Hamiltonian.
pub fn coherence(rho: &DensityOperator, bspec: &BatterySpec) -> f64 {
    let h = bspec.internal_hamiltonian();
    hs_norm(&(h.matrix() * rho.matrix() - rho.matrix() * h.matrix()))
}
