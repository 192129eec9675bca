//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use passivize::battery::{
    energy_transfer_variance, qutrit_passivizing_family, smooth_discharge_schedule, variance_closed,
    variance_direct, BatterySpec,
};
use passivize::multipartite::{
    assisted_hamiltonian, catalysed_spec, collective_hamiltonian, delta_n, delta_n_closed,
    figure_series, global_spec, tau_cqsl, tensor_power_diagonal, ClosedFormKind, CollectiveSpec,
    FigureKind,
};
use passivize::operator::{evolve_constant, max_abs};
use passivize::oracle::numeric_min_distance;
use passivize::random::{
    random_degenerate_spec, random_hermitian, random_passivizing_unitary, random_probabilities,
    random_strict_spec, random_unitary,
};
use passivize::speed_limits::{
    bound_report, build_time_optimal_hamiltonian, distance_to_passivizing_set, tau_pas_nondegenerate,
    tau_qsl, tau_upper_from_permutation, HamiltonianMethod,
};
use passivize::system::{canonical_passivizing, discrepancy, is_passive};
use passivize::{
    bandwidth, expm_skew, von_neumann_evolve, CMatrix, DensityOperator, HermitianOperator,
    Permutation, SystemSpec,
};

type Outcome = Result<String, String>;

fn spec(a: &[f64], p: &[f64]) -> SystemSpec {
    SystemSpec::new(a.to_vec(), p.to_vec(), 1.0).unwrap()
}

fn normalized(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn eight_level_spec(p1: f64) -> SystemSpec {
    spec(
        &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 6.0, 7.0],
        &normalized(&[p1, 6.0, 8.0, 4.0, 5.0, 2.0, 1.0, 3.0]),
    )
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn rel_check(name: &str, got: f64, expected: f64, tol: f64) -> Result<(), String> {
    check((got - expected).abs() <= tol * expected.abs(), || {
        format!("{name}: got {got:.15}, expected {expected:.15}")
    })
}

fn reference_values() -> Outcome {
    let tol = 1e-10;
    let qutrit = spec(&[0.0, 1.0, 2.0], &[0.3, 0.2, 0.5]);
    rel_check("qutrit 3-cycle", tau_pas_nondegenerate(&qutrit).map_err(|e| e.to_string())?, PI * 8f64.sqrt() / 3.0, tol)?;

    let e8 = eight_level_spec(6.0);
    let report = bound_report(&e8, None).map_err(|e| e.to_string())?;
    rel_check("eight-level qsl", report.tau_qsl, PI * 6f64.sqrt() / 2.0, tol)?;
    let exact = report.tau_exact.ok_or("eight-level: no exact time")?;
    rel_check("eight-level pas", exact.time, PI * 6f64.sqrt() / 2.0, tol)?;
    let perm = |t: &str| Permutation::parse_cycles(8, t).unwrap();
    let (t1, _) = tau_upper_from_permutation(&perm("(1 3 2)(4 5)(6 8 7)"), &e8, false).map_err(|e| e.to_string())?;
    rel_check("eight-level upper (3,2,3)", t1, PI * 41f64.sqrt() / 18f64.sqrt(), tol)?;
    let (t2, _) = tau_upper_from_permutation(&perm("(1 3)(4 5)(6 8 7)"), &e8, false).map_err(|e| e.to_string())?;
    rel_check("eight-level upper (2,2,3)", t2, PI * 17f64.sqrt() / 3.0, tol)?;

    let variant = eight_level_spec(7.0);
    let d = distance_to_passivizing_set(&variant, &perm("(1 3 2)(4 5)(6 8 7)"), None).map_err(|e| e.to_string())?;
    rel_check("variant distance", d.distance, PI * 17f64.sqrt() / 3.0, tol)?;

    let a = [1.0, 2.0, 2.0, 2.0, 2.0, 3.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 8.0, 8.0];
    let w = [4.0, 3.0, 2.0, 1.0, 10.0, 5.0, 9.0, 14.0, 7.0, 8.0, 6.0, 13.0, 12.0, 11.0];
    let big = spec(&a, &normalized(&w));
    let sigma = Permutation::parse_cycles(14, "(6 7 10)(2 12 3 14)(4 13)(5)(1 8 9 11)").unwrap();
    let d = distance_to_passivizing_set(&big, &sigma, None).map_err(|e| e.to_string())?;
    rel_check("14-dim distance", d.distance, PI * 13f64.sqrt() / 2.0, tol)?;

    let pair = spec(&[1.0, 2.0, 5.0], &[0.2, 0.3, 0.5]);
    let c = CollectiveSpec::new(pair.clone(), 2, None).map_err(|e| e.to_string())?;
    rel_check("qutrit pair cqsl", tau_cqsl(&c).map_err(|e| e.to_string())?, PI / 2.0, tol)?;
    let global = global_spec(&pair, 2).map_err(|e| e.to_string())?;
    check(discrepancy(&global) == 8, || "qutrit pair global discrepancy".into())?;
    rel_check("qutrit pair global", tau_qsl(&global), PI / 3f64.sqrt(), tol)?;
    Ok("9 closed-form values within 1e-10".into())
}

fn delta_tables() -> Outcome {
    let start = Instant::now();
    let cases: [(ClosedFormKind, Vec<f64>, Vec<f64>, u32); 4] = [
        (ClosedFormKind::QubitMixed, vec![0.0, 1.0], vec![0.35, 0.65], 12),
        (ClosedFormKind::QubitPure, vec![0.0, 1.0], vec![0.0, 1.0], 12),
        (ClosedFormKind::QutritFull, vec![1.0, 2.0, 5.0], vec![0.2, 0.3, 0.5], 10),
        (ClosedFormKind::QutritRank2, vec![0.0, 1.0, 3.0], vec![0.0, 0.3, 0.7], 10),
    ];
    let mut count = 0;
    for (kind, a, p, max_n) in cases {
        let base = spec(&a, &p);
        for n in 1..=max_n {
            let c = CollectiveSpec::new(base.clone(), n as usize, None).map_err(|e| e.to_string())?;
            let brute = delta_n(&c).map_err(|e| e.to_string())? as u128;
            let closed = delta_n_closed(kind, n);
            check(brute == closed, || format!("{} N={n}: brute {brute}, closed {closed}", kind.as_str()))?;
            count += 1;
        }
    }
    let c = CollectiveSpec::new(spec(&[1.0, 2.0, 5.0], &[0.2, 0.3, 0.5]), 2, None).unwrap();
    check(delta_n(&c).unwrap() == 6, || "qutrit N=2 must give 6".into())?;
    let elapsed = start.elapsed().as_secs_f64();
    check(elapsed < 10.0, || format!("took {elapsed:.1} s"))?;
    Ok(format!("{count} table entries agree ({elapsed:.2} s)"))
}

fn oracle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let mut worst: f64 = 0.0;
    let mut floor_gap: f64 = f64::INFINITY;
    let mut tested = 0;
    while tested < 50 {
        let n = 2 + tested % 4;
        let s = random_strict_spec(n, &mut rng);
        if discrepancy(&s) == 0 {
            continue;
        }
        let seed = rng.random();
        let r = numeric_min_distance(&s, 8, seed).map_err(|e| format!("{s:?}: {e}"))?;
        let exact = tau_pas_nondegenerate(&s).unwrap() * s.omega();
        worst = worst.max((r.best_distance - exact).abs());
        floor_gap = floor_gap.min(r.best_distance - tau_qsl(&s) * s.omega());
        tested += 1;
    }
    check(worst <= 1e-5, || format!("max deviation {worst:e}"))?;
    check(floor_gap >= -1e-6, || format!("undercuts speed limit by {:e}", -floor_gap))?;
    Ok(format!("50 specs, max deviation {worst:.1e}, min margin over qsl {floor_gap:.1e}"))
}

/// Largest `|Pi H Pi|` over the level sets of `values`.
fn projector_annihilation(h: &HermitianOperator, values: &[f64]) -> f64 {
    let m = h.matrix();
    let mut worst: f64 = 0.0;
    for i in 0..values.len() {
        for j in 0..values.len() {
            if (values[i] - values[j]).abs() <= 1e-12 {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

fn constructed_hamiltonians() -> Outcome {
    let mut lines = Vec::new();
    let single = [
        ("involution", eight_level_spec(6.0), HamiltonianMethod::Involution),
        (
            "maximally active",
            spec(&[0.0, 1.0, 2.0, 3.0, 4.0], &normalized(&[1.0, 2.0, 3.0, 4.0, 5.0])),
            HamiltonianMethod::MaximallyActive,
        ),
        (
            "nondegenerate",
            spec(&[0.0, 0.5, 1.1, 2.0, 2.4, 3.7], &normalized(&[3.0, 1.0, 6.0, 2.0, 5.0, 4.0])),
            HamiltonianMethod::Nondegenerate,
        ),
    ];
    for (name, s, method) in single {
        let t = build_time_optimal_hamiltonian(&s, method).map_err(|e| format!("{name}: {e}"))?;
        let h = &t.hamiltonian;
        rel_check(&format!("{name} bandwidth"), bandwidth(h), 1.0, 1e-10)?;
        let ann = projector_annihilation(h, s.a()).max(projector_annihilation(h, s.p()));
        check(ann <= 1e-10, || format!("{name}: projector annihilation {ann:e}"))?;
        let rho = evolve_constant(h, &s.initial_state(), t.time);
        check(is_passive(&rho, &s).unwrap(), || format!("{name}: final state not passive"))?;
        lines.push(name);
    }

    // Assisted: maximally active system with a 4-dimensional catalyst.
    let active = spec(&[0.0, 1.0, 2.0, 3.0], &[0.1, 0.2, 0.3, 0.4]);
    let t = build_time_optimal_hamiltonian(&active, HamiltonianMethod::MaximallyActive).unwrap();
    let n_c = 4;
    let h = assisted_hamiltonian(&t.hamiltonian, 1.0, n_c, 0).map_err(|e| e.to_string())?;
    rel_check("assisted bandwidth", bandwidth(&h), n_c as f64, 1e-10)?;
    let joint = catalysed_spec(&active, &[1.0, 0.0, 0.0, 0.0]).unwrap();
    let ann = projector_annihilation(&h, joint.a()).max(projector_annihilation(&h, joint.p()));
    check(ann <= 1e-10, || format!("assisted: projector annihilation {ann:e}"))?;
    let out = evolve_constant(&h, &joint.initial_state(), tau_qsl(&active) / (n_c as f64).sqrt());
    let target_p = canonical_passivizing(&active).permuted(active.p());
    let target = catalysed_spec(&spec(active.a(), &target_p), &[1.0, 0.0, 0.0, 0.0]).unwrap();
    let err = max_abs(&(out.matrix() - target.initial_state().matrix()));
    check(err <= 1e-8, || format!("assisted: final state off by {err:e}"))?;
    lines.push("assisted");

    // Collective: mixed qubits (N = 3) and the qutrit pair.
    for (base, copies) in [
        (spec(&[0.0, 1.0], &[0.3, 0.7]), 3usize),
        (spec(&[1.0, 2.0, 5.0], &[0.2, 0.3, 0.5]), 2),
    ] {
        let c = CollectiveSpec::new(base.clone(), copies, None).unwrap();
        let sigma = canonical_passivizing(&base);
        let h = collective_hamiltonian(&c, &sigma).map_err(|e| e.to_string())?;
        let n = base.n();
        let budget = copies as f64 * (n as f64).powi(copies as i32 - 1);
        rel_check("collective bandwidth", bandwidth(&h), budget, 1e-10)?;
        let dim = n.pow(copies as u32);
        let sums: Vec<f64> = (0..dim)
            .map(|s| {
                let mut x = s;
                let mut total = 0.0;
                for _ in 0..copies {
                    total += base.a()[x % n];
                    x /= n;
                }
                total
            })
            .collect();
        let probs = tensor_power_diagonal(base.p(), copies);
        let ann = projector_annihilation(&h, &sums).max(projector_annihilation(&h, &probs));
        check(ann <= 1e-10, || format!("collective: projector annihilation {ann:e}"))?;
        let rho = DensityOperator::from_diagonal(&probs).unwrap();
        let out = evolve_constant(&h, &rho, tau_cqsl(&c).unwrap());
        let target = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            dim,
            tensor_power_diagonal(&sigma.permuted(base.p()), copies)
                .into_iter()
                .map(|x| Complex64::new(x, 0.0)),
        ));
        let err = max_abs(&(out.matrix() - target));
        check(err <= 1e-8, || format!("collective: final state off by {err:e}"))?;
        lines.push("collective");
    }
    Ok(format!("{} constructions verified", lines.len()))
}

fn evolution_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xe401);
    let mut spectrum_dev: f64 = 0.0;
    let mut shot_dev: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=6);
        let p = random_probabilities(n, &mut rng);
        let u = random_unitary(n, &mut rng);
        let rho0 = DensityOperator::new(u.matrix() * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            p.iter().map(|&x| Complex64::new(x, 0.0)),
        )) * u.matrix().adjoint())
        .map_err(|e| e.to_string())?;
        let h0 = random_hermitian(n, &mut rng);
        let h1 = random_hermitian(n, &mut rng);
        let time = rng.random_range(0.1..3.0);
        let steps = rng.random_range(1..200);
        let driven = von_neumann_evolve(
            |t| h0.matrix() + h1.matrix().scale((2.0 * t).sin()),
            &rho0,
            time,
            steps,
        )
        .map_err(|e| e.to_string())?;
        let before = rho0.spectrum();
        let after = driven.spectrum();
        for (x, y) in before.iter().zip(&after) {
            spectrum_dev = spectrum_dev.max((x - y).abs());
        }
        let stepped = von_neumann_evolve(|_| h0.matrix().clone(), &rho0, time, steps).unwrap();
        let shot = rho0.conjugated(&expm_skew(&h0, time));
        shot_dev = shot_dev.max(max_abs(&(stepped.matrix() - shot.matrix())));
    }
    check(spectrum_dev <= 1e-12, || format!("spectrum drift {spectrum_dev:e}"))?;
    check(shot_dev <= 1e-9, || format!("stepped vs single-shot {shot_dev:e}"))?;
    Ok(format!("100 cases, spectrum drift {spectrum_dev:.1e}, stepping error {shot_dev:.1e}"))
}

fn random_battery<R: Rng>(rng: &mut R) -> BatterySpec {
    let n = rng.random_range(2..=4);
    let s = if rng.random_bool(0.5) {
        random_strict_spec(n, rng)
    } else {
        random_degenerate_spec(n, 3, rng)
    };
    BatterySpec::new(s.a().to_vec(), s.p().to_vec(), 1.0).unwrap()
}

fn variance_sweep(seed: u64) -> Result<Vec<f64>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(1000);
    for _ in 0..1000 {
        let b = random_battery(&mut rng);
        let u = random_passivizing_unitary(b.system(), &mut rng);
        let direct = variance_direct(&u, &b);
        let closed = variance_closed(&u, &b);
        check((direct - closed).abs() <= 1e-9, || format!("{direct} vs {closed} for {b:?}"))?;
        values.push(direct);
    }
    Ok(values)
}

fn variance_consistency() -> Outcome {
    variance_sweep(0x0a11)?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x16);
    let mut worst_spread: f64 = 0.0;
    for _ in 0..5 {
        let s = random_strict_spec(rng.random_range(3..=4), &mut rng);
        let b = BatterySpec::new(s.a().to_vec(), s.p().to_vec(), 1.0).unwrap();
        let values: Vec<f64> = (0..100)
            .map(|_| energy_transfer_variance(&random_passivizing_unitary(&s, &mut rng), &b).unwrap())
            .collect();
        let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - values.iter().cloned().fold(f64::INFINITY, f64::min);
        worst_spread = worst_spread.max(spread);
    }
    check(worst_spread < 1e-9, || format!("non-degenerate spread {worst_spread:e}"))?;

    let b = BatterySpec::new(vec![0.0, 0.7, 1.5], vec![0.2, 0.2, 0.6], 1.0).unwrap();
    let phase_values: Vec<f64> = (0..50)
        .map(|_| {
            let phases = [0; 4].map(|_| rng.random_range(-PI..PI));
            let u = qutrit_passivizing_family(0.37, phases, &b).unwrap();
            energy_transfer_variance(&u, &b).unwrap()
        })
        .collect();
    let phase_spread = phase_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - phase_values.iter().cloned().fold(f64::INFINITY, f64::min);
    check(phase_spread < 1e-9, || format!("phase spread {phase_spread:e}"))?;
    let grid: Vec<f64> = (0..=10)
        .map(|j| {
            let u = qutrit_passivizing_family(j as f64 / 10.0, [0.0; 4], &b).unwrap();
            energy_transfer_variance(&u, &b).unwrap()
        })
        .collect();
    check(grid.windows(2).all(|w| w[1] < w[0]), || format!("not decreasing: {grid:?}"))?;
    Ok(format!(
        "1000 pairs agree, invariance spread {worst_spread:.1e}, phase spread {phase_spread:.1e}"
    ))
}

fn discharge_tightness() -> Outcome {
    let b = BatterySpec::new(vec![0.0, 1.0, 2.0], vec![0.3, 0.2, 0.5], 1.0).unwrap();
    let t = build_time_optimal_hamiltonian(b.system(), HamiltonianMethod::Nondegenerate).unwrap();
    let omega2 = b.omega() * b.omega();
    for eps in [0.5, 0.1, 0.02] {
        let s = smooth_discharge_schedule(&b, &t.hamiltonian, t.time, eps).map_err(|e| e.to_string())?;
        rel_check("duration overhead", s.duration() - t.time, eps, 1e-12)?;
        for j in 0..=1000 {
            let time = s.duration() * j as f64 / 1000.0;
            let bw = bandwidth(&s.potential(time));
            check(bw <= omega2 * (1.0 + 1e-12), || format!("eps {eps}: tr V^2 = {bw} at t = {time}"))?;
        }
        let rho = s.evolve(&b.system().initial_state(), s.recommended_steps()).map_err(|e| e.to_string())?;
        check(is_passive(&rho, b.system()).unwrap(), || format!("eps {eps}: final state not passive"))?;
    }
    Ok("eps in {0.5, 0.1, 0.02} end passive".into())
}

fn figure_data() -> Outcome {
    let qubit = figure_series(FigureKind::Qubit, 13);
    for k in 1..=6 {
        let (even, odd) = (qubit[2 * k - 1].1, qubit[2 * k].1);
        check(even > odd, || format!("ratio({}) = {even} <= ratio({}) = {odd}", 2 * k, 2 * k + 1))?;
    }
    let qutrit = figure_series(FigureKind::Qutrit, 12);
    check(qutrit.windows(2).all(|w| w[1].1 > w[0].1), || "qutrit series not increasing".into())?;
    Ok("qubit fluctuation and qutrit monotonicity hold".into())
}

fn determinism() -> Outcome {
    let s = spec(&[0.0, 1.0, 2.0, 3.0], &[0.25, 0.1, 0.4, 0.25]);
    let a = numeric_min_distance(&s, 4, 7).map_err(|e| e.to_string())?;
    let b = numeric_min_distance(&s, 4, 7).map_err(|e| e.to_string())?;
    check(a == b, || "oracle differs between identical seeds".into())?;
    check(variance_sweep(0x0a11)? == variance_sweep(0x0a11)?, || "variance sweep differs".into())?;
    let mut r1 = ChaCha8Rng::seed_from_u64(5);
    let mut r2 = ChaCha8Rng::seed_from_u64(5);
    check(random_strict_spec(5, &mut r1) == random_strict_spec(5, &mut r2), || "random specs differ".into())?;
    Ok("seeded suites reproduce bit for bit".into())
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("reference values", reference_values),
        ("delta_N tables", delta_tables),
        ("oracle agreement", oracle_agreement),
        ("constructed Hamiltonians", constructed_hamiltonians),
        ("evolution invariants", evolution_invariants),
        ("variance consistency", variance_consistency),
        ("discharge tightness", discharge_tightness),
        ("figure data", figure_data),
        ("deterministic property suites", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{secs:.2} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} [{secs:.2} s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
