mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use spherent::covering::{
    cover_ball_grid, cover_face_grid, covering_number_oracle, lift_sphere_cover, oracle_covering, packing_set,
    verify_covering, Covering, OracleMode, Target, MAX_CENTERS,
};
use spherent::entropy::{entropy_series, estimates_to_csv, fit_upper, Body, EntropyOptions, RegimeConstants};
use spherent::geometry::{run_suite, FaceChart, SuiteKind};
use spherent::norms::{fundamental_function, fundamental_function_closed_form, NormSpec, OrliczSpec, WeightSpec};

use config::{exponent, int_list, load_file, merge, norm_from, number, parse_json, Failure, Outcome};

#[derive(Parser)]
#[command(name = "spherent", version, about = "Sphere coverings and entropy-number experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize, Deserialize, Default)]
struct Global {
    /// JSON file with the same keys as the flags; flags win.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Seed for every sampler.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

fn text_value(s: &str) -> Result<Value, String> {
    Ok(Value::String(s.to_string()))
}

#[derive(Subcommand)]
enum Command {
    /// Entropy-number bounds over a range of k, with a decay-rate fit.
    Rates(RatesArgs),
    /// Build a covering and write it as JSON and CSV.
    Cover(CoverArgs),
    /// Check a serialized covering by sampling.
    Verify(VerifyArgs),
    /// Covering or packing numbers of tiny discretized bodies.
    Oracle(OracleArgs),
    /// Fundamental-function table.
    Lambda(LambdaArgs),
    /// Sampled Lipschitz and monotonicity suites for the shift map.
    Props(PropsArgs),
}

#[derive(Args, Serialize, Deserialize, Default)]
struct RatesArgs {
    /// Norm as JSON, e.g. '{"family":"lp","p":0.5,"dim":3}'.
    #[arg(long, value_parser = parse_json)]
    norm: Option<Value>,
    /// sphere or ball.
    #[arg(long)]
    body: Option<String>,
    /// Reference exponent q of l_q (number or inf).
    #[arg(long, value_parser = text_value)]
    q: Option<Value>,
    /// k values: 6..24, 3,5,8 or 7.
    #[arg(long, value_parser = text_value)]
    k: Option<Value>,
    /// Verification samples per covering.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    max_centers: Option<usize>,
    /// Skip packing lower bounds.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    no_lower: Option<bool>,
    /// Envelope constants c_small,c_mid,c_large.
    #[arg(long)]
    constants: Option<String>,
    /// csv or json (default: by output extension, else csv).
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Serialize, Deserialize, Default)]
struct CoverArgs {
    #[arg(long, value_parser = parse_json)]
    norm: Option<Value>,
    /// Grid half-pitch; a fraction like 1/8 is accepted.
    #[arg(long, value_parser = text_value)]
    eps: Option<Value>,
    /// sphere (lifted, radius 2 eps), ball (radius eps) or face.
    #[arg(long)]
    body: Option<String>,
    /// Face chart ordinal for body=face.
    #[arg(long)]
    chart: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default)]
struct VerifyArgs {
    /// Covering JSON file.
    #[arg(long)]
    cover: Option<PathBuf>,
    /// Norm of the target body.
    #[arg(long, value_parser = parse_json)]
    norm: Option<Value>,
    #[arg(long)]
    body: Option<String>,
    #[arg(long)]
    chart: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default)]
struct OracleArgs {
    /// Dimension, used when no norm is given (target l_inf ball).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_parser = parse_json)]
    norm: Option<Value>,
    /// ball or sphere.
    #[arg(long)]
    body: Option<String>,
    #[arg(long, value_parser = text_value)]
    eps: Option<Value>,
    /// linf, or an exponent q >= 1 for l_q.
    #[arg(long)]
    metric: Option<String>,
    /// Grid nodes per axis.
    #[arg(long)]
    res: Option<usize>,
    /// exact, greedy or packing.
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Args, Serialize, Deserialize, Default)]
struct LambdaArgs {
    #[arg(long, value_parser = parse_json)]
    norm: Option<Value>,
    /// Largest k (default: the dimension).
    #[arg(long)]
    kmax: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default)]
struct PropsArgs {
    /// Norm to test; default is the built-in suite of six norms.
    #[arg(long, value_parser = parse_json)]
    norm: Option<Value>,
    /// Dimensions, e.g. 2..6.
    #[arg(long, value_parser = text_value)]
    dims: Option<Value>,
    /// Pairs per face chart.
    #[arg(long)]
    pairs: Option<usize>,
    /// lipschitz, monotonicity or both.
    #[arg(long)]
    kind: Option<String>,
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(value_text).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

fn required<'a>(v: &'a Option<Value>, what: &str) -> Outcome<&'a Value> {
    v.as_ref().ok_or_else(|| Failure::validation(format!("missing --{what}")))
}

fn emit(out: Option<&Path>, text: &str) -> Outcome<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::validation(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn body_of(s: Option<&str>, default: Body) -> Outcome<Body> {
    match s {
        None => Ok(default),
        Some("sphere") => Ok(Body::Sphere),
        Some("ball") => Ok(Body::Ball),
        Some(o) => Err(Failure::validation(format!("body must be sphere or ball, got {o:?}"))),
    }
}

fn target_of(spec: NormSpec, body: Option<&str>, chart: Option<usize>) -> Outcome<Target> {
    if body == Some("face") {
        let d = spec.dim();
        let charts = d << d;
        let c = match chart {
            Some(o) if o < charts => FaceChart::from_ordinal(d, o),
            Some(o) => return Err(Failure::validation(format!("chart must be below {charts}, got {o}"))),
            None => FaceChart::positive(d, d - 1)?,
        };
        return Ok(Target::Face(spec, c));
    }
    Ok(body_of(body, Body::Sphere)?.target(&spec))
}

fn rates(a: RatesArgs, g: &Global) -> Outcome<()> {
    let spec = norm_from(a.norm.as_ref(), "--norm")?;
    let body = body_of(a.body.as_deref(), Body::Sphere)?;
    let q = match &a.q {
        Some(v) => exponent(&value_text(v))?,
        None => spherent::norms::Exponent::INFINITY,
    };
    let ks = int_list(&value_text(required(&a.k, "k")?))?;
    if ks.is_empty() || ks.contains(&0) {
        return Err(Failure::validation("k values must be at least 1"));
    }
    let constants = match &a.constants {
        Some(s) => {
            let v: Vec<f64> = s.split(',').map(number).collect::<Outcome<_>>()?;
            let [c_small, c_mid, c_large] = v[..] else {
                return Err(Failure::validation("--constants takes three numbers"));
            };
            RegimeConstants { c_small, c_mid, c_large }
        }
        None => RegimeConstants::default(),
    };
    let opts = EntropyOptions {
        samples: a.samples.unwrap_or(100_000),
        seed: g.seed.unwrap_or(0),
        max_centers: a.max_centers.unwrap_or(MAX_CENTERS),
        skip_lower: a.no_lower.unwrap_or(false),
    };
    if opts.samples == 0 {
        return Err(Failure::validation("--samples must be positive"));
    }
    let series = entropy_series(&spec, body, q, &ks, &constants, &opts)?;
    let fit = if ks.len() >= 4 { fit_upper(&series).ok() } else { None };
    if let Some(f) = &fit {
        eprintln!("slope {:.4} over k in [{}, {}], rms {:.3e}", f.slope, f.k_range[0], f.k_range[1], f.residual);
    }
    let json_out = match a.format.as_deref() {
        Some("json") => true,
        Some("csv") => false,
        Some(o) => return Err(Failure::validation(format!("format must be csv or json, got {o:?}"))),
        None => g.out.as_ref().and_then(|p| p.extension()).is_some_and(|e| e == "json"),
    };
    let text = if json_out {
        to_json(&json!({ "estimates": series, "fit": fit }))
    } else {
        estimates_to_csv(&series, fit.as_ref())
    };
    emit(g.out.as_deref(), &text)
}

fn cover(a: CoverArgs, g: &Global) -> Outcome<()> {
    let spec = norm_from(a.norm.as_ref(), "--norm")?;
    let eps = number(&value_text(required(&a.eps, "eps")?))?;
    let c = match target_of(spec.clone(), a.body.as_deref(), a.chart)? {
        Target::Sphere(_) => lift_sphere_cover(&spec, eps)?,
        Target::Ball(_) => cover_ball_grid(&spec, eps)?,
        Target::Face(_, chart) => cover_face_grid(&spec, &chart, eps)?,
    };
    eprintln!("{} centers, radius {}", c.len(), c.radius());
    match &g.out {
        Some(p) => {
            let (json_path, csv_path) = if p.extension().is_some_and(|e| e == "csv") {
                (p.with_extension("json"), p.clone())
            } else {
                (p.clone(), p.with_extension("csv"))
            };
            emit(Some(&json_path), &to_json(&c))?;
            emit(Some(&csv_path), &c.to_csv())
        }
        None => emit(None, &to_json(&c)),
    }
}

fn verify(a: VerifyArgs, g: &Global) -> Outcome<()> {
    let path = a.cover.as_ref().ok_or_else(|| Failure::validation("missing --cover"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::validation(format!("cannot read {}: {e}", path.display())))?;
    let c: Covering = serde_json::from_str(&text).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    let spec = norm_from(a.norm.as_ref(), "--norm")?;
    let target = target_of(spec, a.body.as_deref(), a.chart)?;
    let report = verify_covering(&c, &target, a.samples.unwrap_or(100_000), g.seed.unwrap_or(0))?;
    emit(g.out.as_deref(), &to_json(&report))?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::certification(match report.max_gap {
            Some(gap) => format!("max gap {gap} exceeds radius {}", report.radius),
            None => "the covering has no centers".to_string(),
        }))
    }
}

fn oracle(a: OracleArgs, g: &Global) -> Outcome<()> {
    let spec = match (&a.norm, a.d) {
        (Some(v), _) => norm_from(Some(v), "--norm")?,
        (None, Some(d)) => NormSpec::linf(d),
        (None, None) => return Err(Failure::validation("give --d or --norm")),
    };
    if let (Some(d), true) = (a.d, a.norm.is_some()) {
        if d != spec.dim() {
            return Err(Failure::validation(format!("--d {d} disagrees with the norm dimension {}", spec.dim())));
        }
    }
    let d = spec.dim();
    let target = body_of(a.body.as_deref(), Body::Ball)?.target(&spec);
    let eps = number(&value_text(required(&a.eps, "eps")?))?;
    let metric = match a.metric.as_deref().unwrap_or("linf") {
        "linf" | "inf" => NormSpec::linf(d),
        other => {
            let q = exponent(other.trim_start_matches('l'))?;
            NormSpec::lp(q.value(), d)?
        }
    };
    let res = a.res.unwrap_or(64);
    let (count, centers) = match a.mode.as_deref().unwrap_or("exact") {
        "packing" => {
            let pts = packing_set(&target, &metric, eps, res)?;
            (pts.len(), pts.into_iter().map(|p| p.into_vec()).collect::<Vec<_>>())
        }
        m @ ("exact" | "greedy") => {
            let mode = if m == "exact" { OracleMode::Exact } else { OracleMode::Greedy };
            if g.out.is_some() {
                let c = oracle_covering(&target, &metric, eps, res, mode)?;
                (c.len(), c.centers().map(|c| c.to_vec()).collect())
            } else {
                (covering_number_oracle(&target, &metric, eps, res, mode)?, Vec::new())
            }
        }
        o => return Err(Failure::validation(format!("mode must be exact, greedy or packing, got {o:?}"))),
    };
    println!("{count}");
    if let Some(p) = &g.out {
        emit(
            Some(p),
            &to_json(&json!({
                "count": count,
                "eps": eps,
                "resolution": res,
                "metric": metric,
                "target": target,
                "points": centers,
            })),
        )?;
    }
    Ok(())
}

fn lambda(a: LambdaArgs, g: &Global) -> Outcome<()> {
    let spec = norm_from(a.norm.as_ref(), "--norm")?;
    let kmax = a.kmax.unwrap_or(spec.dim());
    if kmax == 0 || kmax > spec.dim() {
        return Err(Failure::validation(format!("--kmax must lie in 1..={}", spec.dim())));
    }
    let mut s = String::from("k,lambda,closed_form\n");
    for k in 1..=kmax {
        let v = fundamental_function(&spec, k)?;
        let c = fundamental_function_closed_form(&spec, k).map(|c| c.to_string()).unwrap_or_default();
        s += &format!("{k},{v},{c}\n");
    }
    emit(g.out.as_deref(), &s)
}

fn builtin_suite(d: usize) -> Outcome<Vec<NormSpec>> {
    Ok(vec![
        NormSpec::lp(0.5, d)?,
        NormSpec::lp(1.0, d)?,
        NormSpec::lp(2.0, d)?,
        NormSpec::linf(d),
        NormSpec::lorentz(1.0, WeightSpec::Power(-0.5), d)?,
        NormSpec::orlicz(OrliczSpec::PowerLog { p: 2.0, alpha: 1.0 }, d)?,
    ])
}

fn props(a: PropsArgs, g: &Global) -> Outcome<()> {
    let base = match &a.norm {
        Some(v) => Some(norm_from(Some(v), "--norm")?),
        None => None,
    };
    let dims: Vec<usize> = match (&a.dims, &base) {
        (Some(v), _) => int_list(&value_text(v))?.into_iter().map(|d| d as usize).collect(),
        (None, Some(s)) => vec![s.dim()],
        (None, None) => (2..=6).collect(),
    };
    let kinds = match a.kind.as_deref().unwrap_or("both") {
        "lipschitz" => vec![SuiteKind::Lipschitz],
        "monotonicity" => vec![SuiteKind::Monotonicity],
        "both" => vec![SuiteKind::Lipschitz, SuiteKind::Monotonicity],
        o => return Err(Failure::validation(format!("kind must be lipschitz, monotonicity or both, got {o:?}"))),
    };
    let pairs = a.pairs.unwrap_or(10_000);
    let seed = g.seed.unwrap_or(0);
    let mut reports = Vec::new();
    for d in dims {
        let specs = match &base {
            Some(s) => vec![s.with_dim(d)?],
            None => builtin_suite(d)?,
        };
        for spec in &specs {
            for kind in &kinds {
                reports.push(run_suite(*kind, spec, pairs, seed)?);
            }
        }
    }
    emit(g.out.as_deref(), &to_json(&reports))?;
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(Failure::certification(format!("{failed} of {} suites had violations", reports.len())));
    }
    eprintln!("{} suites, no violations", reports.len());
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    let file = load_file(cli.global.config.as_deref())?;
    let mut global = merge(&cli.global, &file)?;
    global.config = cli.global.config.clone();
    if let Some(t) = global.threads {
        if t == 0 {
            return Err(Failure::validation("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::validation(e.to_string()))?;
    }
    if let Some(c) = file.get("command").and_then(Value::as_str) {
        let given = match &cli.command {
            Command::Rates(_) => "rates",
            Command::Cover(_) => "cover",
            Command::Verify(_) => "verify",
            Command::Oracle(_) => "oracle",
            Command::Lambda(_) => "lambda",
            Command::Props(_) => "props",
        };
        if c != given {
            return Err(Failure::validation(format!("config is for {c:?}, command is {given:?}")));
        }
    }
    match cli.command {
        Command::Rates(a) => rates(merge(&a, &file)?, &global),
        Command::Cover(a) => cover(merge(&a, &file)?, &global),
        Command::Verify(a) => verify(merge(&a, &file)?, &global),
        Command::Oracle(a) => oracle(merge(&a, &file)?, &global),
        Command::Lambda(a) => lambda(merge(&a, &file)?, &global),
        Command::Props(a) => props(merge(&a, &file)?, &global),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(config::EXIT_VALIDATION as u8),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
