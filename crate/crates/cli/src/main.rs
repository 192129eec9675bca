mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use passivize::battery::{ergotropy, power_upper_bound, variance_range, PowerScenario, TimeKind};
use passivize::multipartite::{
    advantage_ratio, advantage_ratio_closed, assisted_bounds, delta_n, delta_n_closed,
    figure_series, tau_cqsl_from_delta, ClosedFormKind, FigureKind,
};
use passivize::operator::default_steps;
use passivize::oracle::numeric_min_distance;
use passivize::speed_limits::{
    bound_report, build_time_optimal_hamiltonian, ExactMethod, HamiltonianMethod, OracleOptions,
};
use passivize::system::{canonical_passivizing, passivity_defects, N_ENUM_MAX};
use passivize::{bandwidth, von_neumann_evolve, BatterySpec, CollectiveSpec, Error, SystemSpec};

use report::{matrix, num, nums, Format, Provenance, Report, Table, ENERGY, NONE, POWER, TIME};

const SEED_ENV: &str = "PASSIVIZE_SEED";

#[derive(Parser, Debug)]
#[command(name = "passivize", version, about = "Passivization times, speed limits and battery bounds")]
struct Cli {
    /// Output format: json, text or csv (csv only for tabular results).
    #[arg(long, global = true)]
    format: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Speed limit, upper bound and exact passivization time.
    Bounds {
        spec: PathBuf,
        /// Fall back to the numerical oracle (n <= 6) when no closed form applies.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time-optimal Hamiltonian as a matrix of [re, im] pairs.
    Hamiltonian {
        spec: PathBuf,
        /// involution, nondegenerate or maximally_active
        #[arg(long)]
        method: String,
    },
    /// Propagates the initial state under a time-optimal Hamiltonian.
    Evolve {
        spec: PathBuf,
        #[arg(long)]
        time: f64,
        #[arg(long)]
        steps: Option<usize>,
        /// Defaults to the construction that fits the spec.
        #[arg(long)]
        method: Option<String>,
    },
    /// Collective passivization of N copies.
    Collective {
        spec: PathBuf,
        #[arg(short = 'N', long = "copies")]
        copies: usize,
        /// qubit_pure, qubit_mixed, qutrit_rank2 or qutrit_full
        #[arg(long)]
        closed_form: Option<String>,
    },
    /// Assisted passivization with an n_c-dimensional catalyst.
    Assisted {
        spec: PathBuf,
        #[arg(long)]
        nc: usize,
    },
    /// Ergotropy, power bound and variance range of a battery.
    Battery { spec: PathBuf },
    /// Numerical minimum distance to the passivizing set.
    Oracle {
        spec: PathBuf,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Advantage-ratio series for mixed qubits or full-rank qutrits.
    Figures {
        #[arg(long)]
        which: String,
        #[arg(long, default_value_t = 14)]
        max_n: u32,
    },
}

/// Validation failures exit with 2, computation failures with 3.
#[derive(Debug)]
enum Failure {
    Validation(String),
    Computation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Computation(e.to_string())
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn invalid(message: impl Into<String>) -> Failure {
    Failure::Validation(message.into())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let raw: Value = serde_json::from_str(&text)
        .map_err(|e| invalid(format!("{} is not valid JSON: {e}", path.display())))?;
    serde_json::from_value(raw).map_err(|e| invalid(format!("invalid spec {}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Outcome<SystemSpec> {
    read_json(path)
}

fn spec_echo(spec: &SystemSpec) -> Value {
    json!({ "a": nums(spec.a()), "p": nums(spec.p()), "omega": num(spec.omega()) })
}

fn effective_seed(seed: u64) -> Outcome<u64> {
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| invalid(format!("{SEED_ENV} must be an unsigned integer, got {text:?}"))),
        Err(_) => Ok(seed),
    }
}

fn bounds(path: &Path, oracle: bool, restarts: usize, seed: u64) -> Outcome<Report> {
    let spec = load_spec(path)?;
    let seed = effective_seed(seed)?;
    let mut input = json!({ "spec": spec_echo(&spec) });
    if oracle {
        input["oracle"] = json!({ "restarts": restarts, "seed": seed });
    }
    let mut r = Report::new("bounds", input);
    let options = oracle.then_some(OracleOptions { restarts, seed });
    let b = bound_report(&spec, options)?;
    let qsl_is_exact = b
        .tau_exact
        .as_ref()
        .is_some_and(|e| !e.numerical && (e.time - b.tau_qsl).abs() <= 1e-12 * b.tau_qsl.max(1.0));
    r.add("tau_qsl", num(b.tau_qsl), TIME, if qsl_is_exact { Provenance::Exact } else { Provenance::Qsl });
    r.add("tau_upper", num(b.tau_upper.time), TIME, Provenance::UpperBound);
    match &b.tau_exact {
        Some(e) => {
            let provenance = if e.numerical { Provenance::NumericalOracle } else { Provenance::Exact };
            r.add("tau_exact", num(e.time), TIME, provenance);
            r.add("tau_exact_method", json!(e.method.as_str()), NONE, provenance);
            if e.experimental {
                r.warn("exact time relies on the experimental hybrid isotropy construction");
            }
            if e.method == ExactMethod::Oracle {
                r.warn("exact time is a numerical minimum");
            }
        }
        None => {
            r.add("tau_exact", Value::Null, TIME, Provenance::Exact);
            r.warn("no exact passivization time is available for this spec");
        }
    }
    r.add("upper_bound_permutation", json!(b.tau_upper.permutation.to_string()), NONE, Provenance::UpperBound);
    r.add("discrepancy", json!(b.discrepancy), NONE, Provenance::Exact);
    for w in b.warnings {
        r.warn(w);
    }
    Ok(r)
}

fn parse_method(text: &str) -> Outcome<HamiltonianMethod> {
    text.parse().map_err(Failure::from)
}

fn hamiltonian(path: &Path, method: &str) -> Outcome<Report> {
    let spec = load_spec(path)?;
    let m = parse_method(method)?;
    let mut r = Report::new("hamiltonian", json!({ "spec": spec_echo(&spec), "method": method }));
    let t = build_time_optimal_hamiltonian(&spec, m)?;
    r.add("hamiltonian", matrix(t.hamiltonian.matrix()), "ω", Provenance::Exact);
    r.add("time", num(t.time), TIME, Provenance::Exact);
    r.add("permutation", json!(t.permutation.to_string()), NONE, Provenance::Exact);
    r.add("bandwidth", num(bandwidth(&t.hamiltonian)), "ω²", Provenance::Exact);
    Ok(r)
}

fn default_method(spec: &SystemSpec) -> HamiltonianMethod {
    if spec.is_nondegenerate() {
        HamiltonianMethod::Nondegenerate
    } else if spec.is_maximally_active() {
        HamiltonianMethod::MaximallyActive
    } else {
        HamiltonianMethod::Involution
    }
}

fn evolve(path: &Path, time: f64, steps: Option<usize>, method: Option<&str>) -> Outcome<Report> {
    let spec = load_spec(path)?;
    let m = match method {
        Some(text) => parse_method(text)?,
        None => default_method(&spec),
    };
    let steps = steps.unwrap_or_else(|| default_steps(spec.omega(), time));
    let mut input = json!({ "spec": spec_echo(&spec), "time": num(time), "steps": steps });
    if let Some(text) = method {
        input["method"] = json!(text);
    }
    let mut r = Report::new("evolve", input);
    let t = build_time_optimal_hamiltonian(&spec, m)?;
    let h = t.hamiltonian.matrix().clone();
    let rho = von_neumann_evolve(|_| h.clone(), &spec.initial_state(), time, steps)?;
    let (commutator, excess) = passivity_defects(&rho, &spec);
    let passive = passivize::system::is_passive(&rho, &spec)?;
    r.add("final_diagonal", nums(&rho.diagonal()), NONE, Provenance::Exact);
    r.add("passive", json!(passive), NONE, Provenance::Exact);
    r.add("commutator_norm", num(commutator), NONE, Provenance::Exact);
    r.add("energy_excess", num(excess), "a", Provenance::Exact);
    r.add("optimal_time", num(t.time), TIME, Provenance::Exact);
    if time + 1e-12 < t.time {
        r.warn("time is shorter than the passivization time of the construction");
    }
    Ok(r)
}

fn collective(path: &Path, copies: usize, closed_form: Option<&str>) -> Outcome<Report> {
    let spec = load_spec(path)?;
    let mut input = json!({ "spec": spec_echo(&spec), "N": copies });
    if let Some(kind) = closed_form {
        input["closed_form"] = json!(kind);
    }
    let mut r = Report::new("collective", input);
    let cspec = CollectiveSpec::new(spec.clone(), copies, None)?;
    let (delta, ratio) = match closed_form {
        Some(text) => {
            let kind: ClosedFormKind = text.parse()?;
            if kind.local_dim() != spec.n() {
                return Err(invalid(format!(
                    "closed form {text} needs local dimension {}, spec has {}",
                    kind.local_dim(),
                    spec.n()
                )));
            }
            let copies32 = u32::try_from(copies).ok().filter(|&c| c <= 80).ok_or_else(|| invalid("closed forms cover N <= 80"))?;
            (delta_n_closed(kind, copies32), Some(advantage_ratio_closed(kind, copies32)))
        }
        None => {
            let d = u128::from(delta_n(&cspec)?);
            let ratio = match advantage_ratio(&cspec) {
                Ok(x) => Some(x),
                Err(Error::NotAnInvolution) => {
                    r.warn("passivizing permutation is not an involution; advantage ratio not attained");
                    None
                }
                Err(e) => return Err(e.into()),
            };
            (d, ratio)
        }
    };
    let cqsl = tau_cqsl_from_delta(delta as f64, spec.n(), copies, spec.omega());
    let delta_value = u64::try_from(delta).map_or_else(|_| num(delta as f64), |d| json!(d));
    r.add("delta_n", delta_value, NONE, Provenance::Exact);
    let sigma_is_involution = canonical_passivizing(&spec).is_involution();
    r.add("tau_cqsl", num(cqsl), TIME, if sigma_is_involution { Provenance::Exact } else { Provenance::Qsl });
    if let Some(x) = ratio {
        r.add("advantage_ratio", num(x), NONE, Provenance::Exact);
    }
    Ok(r)
}

fn assisted(path: &Path, nc: usize) -> Outcome<Report> {
    let spec = load_spec(path)?;
    let mut r = Report::new("assisted", json!({ "spec": spec_echo(&spec), "nc": nc }));
    let b = bound_report(&spec, None)?;
    let (tau_pas, exact) = match &b.tau_exact {
        Some(e) => (e.time, true),
        None => (b.tau_upper.time, false),
    };
    let (aqsl, upper) = assisted_bounds(&spec, nc, tau_pas)?;
    let attained = exact && (tau_pas - b.tau_qsl).abs() <= 1e-12 * tau_pas.max(1.0);
    r.add("tau_aqsl", num(aqsl), TIME, if attained { Provenance::Exact } else { Provenance::Qsl });
    r.add("tau_upper", num(upper), TIME, Provenance::UpperBound);
    if !exact {
        r.warn("single-system passivization time unknown; upper bound uses the best permutation bound");
    }
    Ok(r)
}

fn battery(path: &Path) -> Outcome<Report> {
    let b: BatterySpec = read_json(path)?;
    let echo = json!({ "eps": nums(b.eps()), "p": nums(b.p()), "omega": num(b.omega()) });
    let mut r = Report::new("battery", json!({ "spec": echo }));
    let w = ergotropy(&b);
    r.add("ergotropy", num(w), ENERGY, Provenance::Exact);
    match power_upper_bound(&b, PowerScenario::Generic) {
        Ok(p) => {
            let provenance = match p.tau_kind {
                TimeKind::Exact => Provenance::Exact,
                _ => Provenance::Qsl,
            };
            r.add("tau_pas", num(p.tau), TIME, provenance);
            r.add("power_bound", num(p.power), POWER, provenance);
            if provenance == Provenance::Qsl {
                r.warn("only the speed limit is known; the power bound may not be tight");
            }
        }
        Err(Error::AlreadyPassive) => {
            r.add("tau_pas", num(0.0), TIME, Provenance::Exact);
            r.add("power_bound", num(0.0), POWER, Provenance::Exact);
            r.warn("battery is passive; no energy can be extracted");
        }
        Err(e) => return Err(e.into()),
    }
    if b.n() <= N_ENUM_MAX {
        let (lo, hi) = variance_range(&b)?;
        r.add("variance_range", nums(&[lo, hi]), "energy²", Provenance::Exact);
    } else {
        r.warn(format!("variance range needs enumeration, limited to n <= {N_ENUM_MAX}"));
    }
    Ok(r)
}

fn oracle(path: &Path, restarts: usize, seed: u64) -> Outcome<Report> {
    let spec = load_spec(path)?;
    let seed = effective_seed(seed)?;
    if restarts == 0 {
        return Err(invalid("restarts must be positive"));
    }
    let mut r = Report::new(
        "oracle",
        json!({ "spec": spec_echo(&spec), "restarts": restarts, "seed": seed }),
    );
    let o = numeric_min_distance(&spec, restarts, seed)?;
    r.add("distance", num(o.best_distance), NONE, Provenance::NumericalOracle);
    r.add("tau_pas", num(o.best_distance / spec.omega()), TIME, Provenance::NumericalOracle);
    r.add("permutation", json!(o.best_permutation.to_string()), NONE, Provenance::NumericalOracle);
    r.add("spread", num(o.spread), NONE, Provenance::NumericalOracle);
    r.add("converged", json!(o.converged), NONE, Provenance::NumericalOracle);
    Ok(r)
}

fn figures(which: &str, max_n: u32) -> Outcome<Report> {
    let kind: FigureKind = which.parse()?;
    if max_n == 0 || max_n > 80 {
        return Err(invalid("max-n must lie in 1..=80"));
    }
    let mut r = Report::new("figures", json!({ "which": which, "max_n": max_n }));
    let series = figure_series(kind, max_n);
    let rows: Vec<Value> = series.iter().map(|&(n, x)| json!([n, num(x)])).collect();
    r.add("series", Value::Array(rows), NONE, Provenance::Exact);
    r.table = Some(Table {
        header: vec!["N".into(), "ratio".into()],
        rows: series
            .iter()
            .map(|&(n, x)| vec![n.to_string(), report::round12(x).to_string()])
            .collect(),
    });
    Ok(r)
}

fn run(cli: &Cli) -> Outcome<(Report, Format)> {
    let default = match cli.command {
        Command::Figures { .. } => Format::Csv,
        _ => Format::Json,
    };
    let format = match &cli.format {
        Some(text) => text.parse::<Format>().map_err(|e| invalid(e.0))?,
        None => default,
    };
    let report = match &cli.command {
        Command::Bounds { spec, oracle, restarts, seed } => bounds(spec, *oracle, *restarts, *seed)?,
        Command::Hamiltonian { spec, method } => hamiltonian(spec, method)?,
        Command::Evolve { spec, time, steps, method } => evolve(spec, *time, *steps, method.as_deref())?,
        Command::Collective { spec, copies, closed_form } => collective(spec, *copies, closed_form.as_deref())?,
        Command::Assisted { spec, nc } => assisted(spec, *nc)?,
        Command::Battery { spec } => battery(spec)?,
        Command::Oracle { spec, restarts, seed } => oracle(spec, *restarts, *seed)?,
        Command::Figures { which, max_n } => figures(which, *max_n)?,
    };
    Ok((report, format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|(report, format)| report.emit(format).map_err(|e| invalid(e.0)));
    match outcome {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Validation(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Computation(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}
