//! `fqw` command-line front end. Every subcommand prints one JSON document
//! (or CSV for `count`), floats as shortest round-trip decimal strings and
//! rationals as "a/b".

use clap::{Parser, Subcommand, ValueEnum};
use fqw::bvp::{compute_zg, genus_switch, simple_walk_f00, simple_walk_f10};
use fqw::cra::{chi_roots, cra_constants, lambda_max, mean_cri, simulate_cri, slope_and_fluctuation, DEFAULT_DEPTH, DEFAULT_ORDER};
use fqw::enumeration::{count_series, verify_cgf_equation};
use fqw::group::{group_order, nature_report, DEFAULT_CAP, DEFAULT_TRIALS};
use fqw::kernel::{build_kernel, genus};
use fqw::par::{self, Exec};
use fqw::quad::QuadratureSpec;
use fqw::queueing::{
    ergodicity_flags, jsq_branch_points, simulate_ctmc, AlternatingParams, CoupledParams, Functional, JsqParams, QueueModel,
    SimConfig,
};
use fqw::stepset::{enumerate_models, parse_stepset};
use fqw::{FqwError, Mode, WeightedStepSet, DEFAULT_SEED};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "fqw", version, about = "Quarter-plane walks, queueing kernels and splitting-tree CRA")]
struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the primary output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The census of 79 models with their group orders.
    Models {
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Group order, genus profile and nature of a step set.
    Classify {
        spec: String,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Series F00, F10 (axis) and F11 (total) as CSV.
    Count {
        spec: String,
        #[arg(long)]
        n: usize,
    },
    /// Largest coefficient of the functional-equation residual.
    VerifyFe {
        spec: String,
        #[arg(long)]
        n: usize,
    },
    /// Simple-walk integral at z in (0, 1/4).
    Integral {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long)]
        z: f64,
        #[arg(long, default_value_t = 1e-13)]
        abs_tol: f64,
    },
    /// Dominant singularity and the genus on either side of it.
    Zg { spec: String },
    /// Ergodicity and simulated stationary functionals of a queueing model.
    Queue {
        #[arg(value_enum)]
        model: ModelKind,
        params: PathBuf,
        #[arg(long, default_value_t = 200_000)]
        events: u64,
        #[arg(long, default_value_t = 8)]
        replicas: usize,
    },
    /// Mean collision resolution interval and its threshold.
    Cra {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        p: f64,
        /// Largest n listed in `alpha` and the CSV.
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long, default_value_t = 10_000)]
        replicas: usize,
        /// CSV of (n, alpha_n, simulated_mean, std_err).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Which {
    #[value(name = "F00")]
    F00,
    #[value(name = "F10")]
    F10,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelKind {
    Coupled,
    Jsq,
    Alternating,
}

enum CliError {
    Fqw(FqwError),
    Io(String),
    Usage(String),
}

impl From<FqwError> for CliError {
    fn from(e: FqwError) -> Self {
        CliError::Fqw(e)
    }
}

impl CliError {
    fn report(&self) -> (u8, Value) {
        match self {
            CliError::Fqw(e) => (e.exit_code() as u8, json!({"error": e.kind(), "message": e.to_string()})),
            CliError::Io(m) => (2, json!({"error": "io", "message": m})),
            CliError::Usage(m) => (2, json!({"error": "usage", "message": m})),
        }
    }
}

type Res<T> = std::result::Result<T, CliError>;

/// Floats become decimal strings; integers and everything else stay.
fn stringify_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if !n.is_i64() && !n.is_u64() => Value::String(n.as_f64().map_or_else(|| n.to_string(), |f| f.to_string())),
        Value::Array(a) => Value::Array(a.into_iter().map(stringify_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, stringify_floats(v))).collect()),
        other => other,
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn write_text(text: &str, out: Option<&Path>) -> Res<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit(v: Value, out: Option<&Path>) -> Res<()> {
    let mut s = serde_json::to_string_pretty(&stringify_floats(v)).expect("valid json");
    s.push('\n');
    write_text(&s, out)
}

fn mode_name(ws: &WeightedStepSet) -> &'static str {
    match ws.mode() {
        Mode::Counting => "counting",
        Mode::Probabilistic => "probabilistic",
    }
}

fn models(cap: usize, seed: u64) -> Res<Value> {
    let ms = enumerate_models();
    let orders = fqw::group::census_group_orders(&ms, cap, seed, Exec::default())?;
    let mut hist: BTreeMap<String, usize> = BTreeMap::new();
    let list: Vec<Value> = ms
        .iter()
        .zip(&orders)
        .map(|(m, o)| {
            *hist.entry(o.to_string()).or_default() += 1;
            json!({
                "id": m.id,
                "steps": m.representative.to_spec(),
                "symmetric_twin": m.symmetric_twin.as_ref().map(|t| t.to_spec()),
                "group_order": o,
            })
        })
        .collect();
    Ok(json!({"seed": seed, "cap": cap, "count": ms.len(), "histogram": hist, "models": list}))
}

fn genus_profile(ws: &WeightedStepSet) -> Res<Value> {
    if ws.mode() == Mode::Probabilistic {
        return Ok(match genus(&build_kernel(ws, None)?) {
            Ok(g) => json!({"kernel": g}),
            Err(e) => json!({"kernel": {"error": e.kind(), "message": e.to_string()}}),
        });
    }
    let zg = compute_zg(ws)?;
    Ok(match genus_switch(ws, zg.z_g, 1e-4) {
        Ok(sw) => json!({"z_g": zg.z_g, "below_z_g": sw.below, "at_z_g": sw.at, "certified_by": sw.certified_by}),
        Err(e) => json!({"z_g": zg.z_g, "at_z_g": {"error": e.kind(), "message": e.to_string()}}),
    })
}

fn classify(spec: &str, cap: usize, seed: u64) -> Res<Value> {
    let ws = parse_stepset(spec)?;
    let rep = group_order(&ws, cap, DEFAULT_TRIALS, seed)?;
    Ok(json!({
        "seed": seed,
        "steps": ws.to_spec(),
        "mode": mode_name(&ws),
        "group_order": rep.order,
        "cap": cap,
        "genus": genus_profile(&ws)?,
        "nature": nature_report(&ws, &rep),
    }))
}

fn count_csv(spec: &str, n: usize) -> Res<String> {
    let ws = parse_stepset(spec)?;
    let s = count_series(&ws, n, Exec::default())?;
    let mut out = String::from("k,f00,f10_axis,f11_total\n");
    for k in 0..=n {
        out.push_str(&format!(
            "{k},{},{},{}\n",
            s.f00.coefficients[k], s.f10_axis.coefficients[k], s.f11_total.coefficients[k]
        ));
    }
    Ok(out)
}

fn verify_fe(spec: &str, n: usize, seed: u64) -> Res<Value> {
    let ws = parse_stepset(spec)?;
    let r = verify_cgf_equation(&ws, n)?;
    Ok(json!({"seed": seed, "steps": ws.to_spec(), "n": n, "residual": r.to_string(), "exact": true}))
}

fn integral(which: Which, z: f64, abs_tol: f64, seed: u64) -> Res<Value> {
    let q = QuadratureSpec {
        abs_tol,
        ..QuadratureSpec::default()
    };
    let (name, v) = match which {
        Which::F00 => ("F00", simple_walk_f00(z, &q)?),
        Which::F10 => ("F10", simple_walk_f10(z, &q)?),
    };
    Ok(json!({"seed": seed, "which": name, "z": z, "value": v, "abs_tol": abs_tol}))
}

fn zg(spec: &str, seed: u64) -> Res<Value> {
    let ws = parse_stepset(spec)?;
    let r = compute_zg(&ws)?;
    let switch = match genus_switch(&ws, r.z_g, 1e-4) {
        Ok(sw) => to_value(&sw),
        Err(e) => json!({"error": e.kind(), "message": e.to_string()}),
    };
    Ok(json!({
        "seed": seed,
        "steps": ws.to_spec(),
        "z_g": r.z_g,
        "growth_rate": 1.0 / r.z_g,
        "bracket": [r.bracket.0, r.bracket.1],
        "merged_pair": [r.merged_pair.0, r.merged_pair.1],
        "flagged": r.flagged,
        "genus_switch": switch,
    }))
}

fn read_model(kind: ModelKind, path: &Path) -> Res<QueueModel> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| CliError::Fqw(FqwError::Parse(format!("{}: {e}", path.display())));
    Ok(match kind {
        ModelKind::Coupled => {
            let p: CoupledParams = serde_json::from_str(&text).map_err(bad)?;
            p.validate()?;
            QueueModel::Coupled(p)
        }
        ModelKind::Jsq => QueueModel::Jsq(serde_json::from_str::<JsqParams>(&text).map_err(bad)?),
        ModelKind::Alternating => QueueModel::Alternating(serde_json::from_str::<AlternatingParams>(&text).map_err(bad)?),
    })
}

fn queue(kind: ModelKind, path: &Path, events: u64, replicas: usize, seed: u64) -> Res<Value> {
    let model = read_model(kind, path)?;
    let ergodic = model.is_ergodic()?;
    let mut out = json!({"seed": seed, "model": model.name(), "params": to_value(&model), "ergodic": ergodic});
    match &model {
        QueueModel::Coupled(p) => out["flags"] = to_value(&ergodicity_flags(&p.ergodicity_model()?)?),
        QueueModel::Jsq(p) => out["branch_points"] = to_value(&jsq_branch_points(&p.alpha, &p.beta, &p.lambda)?),
        QueueModel::Alternating(_) => {}
    }
    if ergodic {
        let fs = [
            ("prob_empty", Functional::ProbEmpty),
            ("mean_total", Functional::MeanTotal),
            ("prob_first_longer", Functional::ProbFirstLonger),
            ("prob_second_longer", Functional::ProbSecondLonger),
        ];
        let cfg = SimConfig { events, replicas, seed };
        let fns: Vec<Functional> = fs.iter().map(|(_, f)| *f).collect();
        let est = simulate_ctmc(&model, &cfg, &fns, Exec::default())?;
        let map: serde_json::Map<String, Value> = fs.iter().zip(&est).map(|((k, _), e)| (k.to_string(), to_value(e))).collect();
        out["simulation"] = json!({"events": events, "replicas": replicas, "estimates": map});
    }
    Ok(out)
}

struct CraRun {
    json: Value,
    csv: String,
}

fn cra(lambda: f64, p: f64, n_max: usize, replicas: usize, seed: u64) -> Res<CraRun> {
    if n_max > DEFAULT_ORDER {
        return Err(CliError::Usage(format!("--n-max is at most {DEFAULT_ORDER}")));
    }
    let lmax = lambda_max(p, 1e-7)?;
    let c = cra_constants(lambda, p, DEFAULT_DEPTH, DEFAULT_ORDER)?;
    let alpha: Vec<f64> = (0..=n_max).map(|n| mean_cri(n, &c)).collect::<fqw::Result<_>>()?;
    let fl = slope_and_fluctuation((50, 400), &c, 5, Exec::default())?;
    let chi = chi_roots(p, 0.5, 5)?;
    let mut csv = String::from("n,alpha_n,simulated_mean,std_err\n");
    for (n, a) in alpha.iter().enumerate() {
        let s = simulate_cri(n as u64, lambda, p, replicas, seed.wrapping_add(n as u64), Exec::default())?;
        csv.push_str(&format!("{n},{a},{},{}\n", s.estimate.value, s.estimate.std_error));
    }
    let json = json!({
        "seed": seed,
        "lambda": lambda,
        "p": p,
        "lambda_max": lmax,
        "K": c.k,
        "D": c.d,
        "alpha": alpha,
        "slope": fl.slope,
        "chi": chi.roots.iter().map(|(k, r)| json!({"k": k, "re": r.re, "im": r.im})).collect::<Vec<_>>(),
    });
    Ok(CraRun { json, csv })
}

fn run(cli: Cli) -> Res<()> {
    let out = cli.output.as_deref();
    let seed = cli.seed;
    match cli.cmd {
        Command::Models { cap } => emit(models(cap, seed)?, out),
        Command::Classify { spec, cap } => emit(classify(&spec, cap, seed)?, out),
        Command::Count { spec, n } => write_text(&count_csv(&spec, n)?, out),
        Command::VerifyFe { spec, n } => emit(verify_fe(&spec, n, seed)?, out),
        Command::Integral { which, z, abs_tol } => emit(integral(which, z, abs_tol, seed)?, out),
        Command::Zg { spec } => emit(zg(&spec, seed)?, out),
        Command::Queue {
            model,
            params,
            events,
            replicas,
        } => emit(queue(model, &params, events, replicas, seed)?, out),
        Command::Cra {
            lambda,
            p,
            n_max,
            replicas,
            csv,
        } => {
            let r = cra(lambda, p, n_max, replicas, seed)?;
            if let Some(path) = csv {
                write_text(&r.csv, Some(&path))?;
            }
            emit(r.json, out)
        }
    }
}

fn threads_from_env() -> Res<()> {
    if let Ok(v) = std::env::var("FQW_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Usage(format!("FQW_THREADS must be a positive integer, got '{v}'")))?;
        par::init_threads(n);
    }
    Ok(())
}

fn fail(e: CliError) -> ExitCode {
    let (code, v) = e.report();
    eprintln!("{v}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return fail(CliError::Usage(first.to_string()));
        }
    };
    if let Err(e) = threads_from_env() {
        return fail(e);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
