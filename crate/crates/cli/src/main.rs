use cbitcl::measure::EsscherSpec;
use cbitcl::moments::lee_beta;
use cbitcl::pricing::DEFAULT_DAMPING;
use cbitcl::*;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cbitcl", version, about = "CBI-time-changed Lévy processes: pricing, simulation and moment diagnostics")]
struct Cli {
    /// Master seed for simulation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of simulated paths.
    #[arg(long, global = true, default_value_t = 10_000)]
    paths: usize,
    /// Simulation time step.
    #[arg(long, global = true, default_value_t = 1.0 / 256.0)]
    step: f64,
    /// Contour shift of the pricing integral, in (-1, 0).
    #[arg(long, global = true, default_value_t = DEFAULT_DAMPING, allow_negative_numbers = true)]
    damping: f64,
    /// Accuracy target of the pricing quadrature.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "CBITCL_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ModelSource {
    /// Model file (TOML).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Built-in model: alpha-cir, tempered-cgmy, black-scholes, heston.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct Tilt {
    /// Weight of `X - X0` in the log-price.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    zeta: f64,
    /// Weight of `Z` in the log-price.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    lambda: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Euler,
    Lamperti,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmallJumpArg {
    DiffusionApprox,
    CompensateOnly,
}

#[derive(Subcommand)]
enum Command {
    /// European call prices on `S = exp(lambda Z + zeta (X - X0) - K)`.
    Price {
        #[command(flatten)]
        source: ModelSource,
        /// Strikes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        strike: Vec<f64>,
        #[arg(long, allow_negative_numbers = true)]
        maturity: f64,
        #[command(flatten)]
        tilt: Tilt,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Simulated paths of `(X, Y, Z)` as CSV.
    Simulate {
        #[command(flatten)]
        source: ModelSource,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        /// Small-jump cutoff.
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "diffusion-approx")]
        small_jumps: SmallJumpArg,
        #[arg(long, value_enum, default_value = "euler")]
        method: Method,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Explosion time of `E[exp(u1 X + u2 Y + u3 Z)]` and related diagnostics.
    Moments {
        #[command(flatten)]
        source: ModelSource,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        u1: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        u2: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        u3: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Model parameters under the Esscher-type measure with weights `(zeta, lambda)`.
    TransformMeasure {
        #[command(flatten)]
        source: ModelSource,
        #[arg(long, allow_negative_numbers = true)]
        zeta: f64,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Implied-variance wing slopes and, optionally, the smile on a log-strike grid (CSV).
    Wings {
        #[command(flatten)]
        source: ModelSource,
        #[arg(long, allow_negative_numbers = true)]
        maturity: f64,
        #[command(flatten)]
        tilt: Tilt,
        /// Largest |log-strike| of the smile grid; no grid when omitted.
        #[arg(long)]
        k_max: Option<f64>,
        #[arg(long, default_value_t = 21)]
        k_points: usize,
        /// Write the smile grid as CSV instead of JSON.
        #[arg(long)]
        csv: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Joint transform `E[exp(w1 X_T + w2 Y_T + w3 Z_T)]`; arguments as `re` or `re,im`.
    CharFn {
        #[command(flatten)]
        source: ModelSource,
        #[arg(long, allow_negative_numbers = true)]
        maturity: f64,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        w1: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        w2: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        w3: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Errors surfaced to the user with their exit code.
struct Failure {
    kind: ErrorKind,
    message: String,
}

impl From<CbitclError> for Failure {
    fn from(e: CbitclError) -> Self {
        Failure { kind: e.kind(), message: e.to_string() }
    }
}

fn config_err(message: impl Into<String>) -> Failure {
    Failure { kind: ErrorKind::Config, message: message.into() }
}

type Res<T> = std::result::Result<T, Failure>;

fn load(src: &ModelSource) -> Res<CbitclModel> {
    match (&src.model, &src.preset) {
        (Some(p), _) => Ok(load_model(p)?),
        (None, Some(name)) => presets::by_name(name)
            .ok_or_else(|| config_err(format!("unknown preset `{name}`; available: {}", presets::NAMES.join(", ")))),
        (None, None) => Err(config_err("one of --model or --preset is required")),
    }
}

/// JSON number, with non-finite values spelled out since JSON has no literal for them.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn cnum(z: Complex64) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

fn header(model: &CbitclModel) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("model_hash".into(), json!(model_hash(model)));
    m.insert("model".into(), json!(model_to_toml(model)));
    m
}

fn emit(output: &Option<PathBuf>, text: &str) -> Res<()> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| config_err(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| config_err(e.to_string()))
        }
    }
}

fn emit_json(output: &Option<PathBuf>, v: Value) -> Res<()> {
    let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
    s.push('\n');
    emit(output, &s)
}

fn parse_complex(s: &str) -> Res<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let p = |t: &str| t.parse::<f64>().map_err(|_| config_err(format!("cannot parse `{s}` as `re` or `re,im`")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(p(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(p(re)?, p(im)?)),
        _ => Err(config_err(format!("cannot parse `{s}` as `re` or `re,im`"))),
    }
}

fn pricing_config(cli: &Cli) -> PricingConfig {
    PricingConfig { tol: cli.tol, ..PricingConfig::default() }
}

fn run(cli: &Cli) -> Res<()> {
    match &cli.command {
        Command::Price { source, strike, maturity, tilt, output } => {
            let model = load(source)?;
            let spec = LogPriceSpec::new(model, tilt.zeta, tilt.lambda)?;
            let cfg = pricing_config(cli);
            let mut rows = Vec::new();
            for &k in strike {
                let r = price_call(&spec, *maturity, k, cli.damping, &cfg)?;
                let iv = implied_vol(r.price, k, *maturity).ok();
                rows.push(json!({
                    "strike": num(k),
                    "price": num(r.price),
                    "implied_vol": iv.map_or(Value::Null, num),
                    "panels": r.panels,
                    "err_estimate": num(r.err_estimate),
                }));
            }
            let mut out = header(&model);
            out.insert("maturity".into(), num(*maturity));
            out.insert("zeta".into(), num(tilt.zeta));
            out.insert("lambda".into(), num(tilt.lambda));
            out.insert("damping".into(), num(cli.damping));
            out.insert("results".into(), Value::Array(rows));
            emit_json(output, Value::Object(out))
        }
        Command::Simulate { source, horizon, epsilon, small_jumps, method, output } => {
            let model = load(source)?;
            let cfg = SimConfig {
                horizon: *horizon,
                step: cli.step,
                n_paths: cli.paths,
                seed: cli.seed,
                epsilon: *epsilon,
                small_jumps: match small_jumps {
                    SmallJumpArg::DiffusionApprox => SmallJumps::DiffusionApprox,
                    SmallJumpArg::CompensateOnly => SmallJumps::CompensateOnly,
                },
            };
            let paths = match method {
                Method::Euler => simulate_paths(&model, &cfg)?,
                Method::Lamperti => simulate_lamperti(&model, &cfg)?,
            };
            let mut echo = vec![
                format!("model_hash = {}", model_hash(&model)),
                format!("method = {}", match method { Method::Euler => "euler", Method::Lamperti => "lamperti" }),
            ];
            echo.extend(model_to_toml(&model).lines().filter(|l| !l.is_empty()).map(|l| format!("model: {l}")));
            let mut buf = Vec::new();
            paths.write_csv(&mut buf, &echo).map_err(|e| config_err(e.to_string()))?;
            emit(output, &String::from_utf8(buf).expect("csv is utf-8"))
        }
        Command::Moments { source, u1, u2, u3, output } => {
            let model = load(source)?;
            let d = model.domain_info();
            if !d.contains_x(*u1) {
                return Err(CbitclError::Domain(format!("u1 = {u1} is outside D_X")).into());
            }
            if !d.contains_z(*u3) {
                return Err(CbitclError::Domain(format!("u3 = {u3} is outside D_Z")).into());
            }
            let lt = lifetime(&model, *u1, *u2, *u3)?;
            let asym = match xi_asymptotic(&model, *u3) {
                Ok(a) => json!({ "xi": num(a.xi), "psi_xi": num(a.psi_xi) }),
                Err(e) => json!({ "unavailable": e.to_string() }),
            };
            let mut out = header(&model);
            out.insert("u".into(), json!([num(*u1), num(*u2), num(*u3)]));
            out.insert("lifetime".into(), num(lt.value));
            out.insert("classification".into(), json!(format!("{:?}", lt.classification)));
            out.insert("chi".into(), num(lt.chi));
            out.insert("moment_domain_full".into(), json!(moment_domain_full(&model, *u2, *u3)?));
            out.insert(
                "domain".into(),
                json!({
                    "x_upper": num(d.x_upper),
                    "psi": num(d.psi),
                    "phi": num(d.phi),
                    "z_lower": num(d.z_lower),
                    "z_upper": num(d.z_upper),
                }),
            );
            out.insert("asymptotic".into(), asym);
            emit_json(output, Value::Object(out))
        }
        Command::TransformMeasure { source, zeta, lambda, output } => {
            let model = load(source)?;
            let spec = EsscherSpec::new(&model, *zeta, *lambda)?;
            let t = esscher_transform(&model, &spec)?;
            let k = spec.constants(&model)?;
            let text = format!(
                "# source_hash = {}\n# zeta = {zeta:?}\n# lambda = {lambda:?}\n# compensator: K_t = t * {:?} + Y_t * {:?}\n# model_hash = {}\n{}",
                model_hash(&model),
                k.psi_zeta,
                k.c,
                model_hash(&t),
                model_to_toml(&t)
            );
            emit(output, &text)
        }
        Command::Wings { source, maturity, tilt, k_max, k_points, csv, output } => {
            let model = load(source)?;
            let spec = LogPriceSpec::new(model, tilt.zeta, tilt.lambda)?;
            let (left, right) = wing_slopes(&model, tilt.zeta, tilt.lambda, *maturity)?;
            let mut rows = Vec::new();
            if let Some(km) = k_max {
                if *k_points < 2 || !(*km > 0.0) {
                    return Err(config_err("the smile grid needs --k-max > 0 and --k-points >= 2"));
                }
                let cfg = pricing_config(cli);
                for i in 0..*k_points {
                    let k = -km + 2.0 * km * i as f64 / (*k_points - 1) as f64;
                    let r = price_call(&spec, *maturity, k.exp(), cli.damping, &cfg)?;
                    let iv = implied_vol(r.price, k.exp(), *maturity).ok();
                    rows.push((k, r.price, iv));
                }
            }
            if *csv {
                let mut s = format!("# model_hash = {}\n# left_slope = {left:?}\n# right_slope = {right:?}\nk,price,implied_vol,variance_over_abs_k\n", model_hash(&model));
                for (k, p, iv) in &rows {
                    let (ivs, ratio) = match iv {
                        Some(v) if *k != 0.0 => (format!("{v:?}"), format!("{:?}", v * v * maturity / k.abs())),
                        Some(v) => (format!("{v:?}"), String::new()),
                        None => (String::new(), String::new()),
                    };
                    s.push_str(&format!("{k:?},{p:?},{ivs},{ratio}\n"));
                }
                return emit(output, &s);
            }
            let mut out = header(&model);
            out.insert("maturity".into(), num(*maturity));
            out.insert("left_slope".into(), num(left));
            out.insert("right_slope".into(), num(right));
            out.insert("left_beta".into(), num(left * maturity));
            out.insert("right_beta".into(), num(right * maturity));
            out.insert("max_beta".into(), num(lee_beta(0.0)));
            out.insert(
                "smile".into(),
                Value::Array(
                    rows.iter()
                        .map(|(k, p, iv)| json!({ "k": num(*k), "price": num(*p), "implied_vol": iv.map_or(Value::Null, num) }))
                        .collect(),
                ),
            );
            emit_json(output, Value::Object(out))
        }
        Command::CharFn { source, maturity, w1, w2, w3, output } => {
            let model = load(source)?;
            let (a, b, c) = (parse_complex(w1)?, parse_complex(w2)?, parse_complex(w3)?);
            let v = char_fn_joint(&model, *maturity, a, b, c, &SolverConfig::default())?;
            let mut out = header(&model);
            out.insert("maturity".into(), num(*maturity));
            out.insert("w".into(), json!([cnum(a), cnum(b), cnum(c)]));
            out.insert("value".into(), cnum(v));
            emit_json(output, Value::Object(out))
        }
    }
}

fn prefix(kind: ErrorKind) -> (&'static str, u8) {
    match kind {
        ErrorKind::Domain => ("E-DOMAIN", 1),
        ErrorKind::Config => ("E-CONFIG", 1),
        ErrorKind::Numeric => ("E-NUMERIC", 2),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprint!("E-CONFIG: {}", e.render());
            return ExitCode::from(1);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("E-CONFIG: cannot configure {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, status) = prefix(f.kind);
            eprintln!("{code}: {}", f.message);
            ExitCode::from(status)
        }
    }
}
