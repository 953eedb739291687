//! `decteam`: batch front end for team decision problems.
//!
//! Exit status: 0 on success, 1 when an analysis fails (for example an
//! absolute-continuity failure during reduction), 2 when the command line
//! or an input file is invalid. Reports are JSON on standard output (or
//! `--out`); diagnostics go to standard error.

mod commands;
mod locate;
mod problem;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::{Failure, GalleryParams, Init, MeasureSource};
use decteam::gallery::QuadSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use report::Context;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Thread count for the solvers' internal parallelism.
const THREADS_ENV: &str = "DECTEAM_THREADS";

#[derive(Parser)]
#[command(name = "decteam", version, about = "Sequential decentralized stochastic teams on finite spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Seed for every random choice a command makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a problem file.
    Validate { file: PathBuf },
    /// Classify the information structure.
    Classify { file: PathBuf },
    /// Static reduction with an equivalence check on seeded profiles.
    Reduce {
        file: PathBuf,
        /// `uniform`, or a JSON file with one reference per decision maker.
        #[arg(long, default_value = "uniform")]
        reference: String,
    },
    /// Optimal or person-by-person optimal team policies.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Starting profile for `pbp`: `first`, `random` or a JSON file.
        #[arg(long, default_value = "first")]
        init: String,
        /// Largest number of profiles an enumeration may visit.
        #[arg(long, default_value_t = decteam::tolerances::DEFAULT_CAP)]
        cap: u128,
        #[arg(long, default_value_t = 100)]
        max_sweeps: usize,
    },
    /// Meet/join convexity certificate or a non-convexity witness.
    CertifyConvexity {
        file: PathBuf,
        /// JSON profile files paired with their mirror images in the search.
        #[arg(long = "profile")]
        profiles: Vec<PathBuf>,
        /// Exhaustive pair search when the profile count is at most this.
        #[arg(long, default_value_t = 2_000)]
        exhaustive_cap: u128,
    },
    /// Strategic measures.
    Strategic {
        #[command(subcommand)]
        op: StrategicOp,
    },
    /// Named constructions.
    Gallery {
        /// witsenhausen, signaling, square-wave, example1 or decoupled.
        name: String,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        /// Square-wave index.
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Action grid step of example1.
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Decoupled example with the coupling perturbation.
        #[arg(long)]
        coupled: bool,
        #[arg(long, default_value_t = QuadSpec::default().x_nodes)]
        x_nodes: usize,
        #[arg(long, default_value_t = QuadSpec::default().w_nodes)]
        w_nodes: usize,
        #[arg(long, default_value_t = QuadSpec::default().grid_points)]
        grid_points: usize,
        /// Extra analysis, e.g. `affine-vs-quantizer`, `staircase`,
        /// `equivalence`, `certify`, `optimum`.
        #[arg(long)]
        check: Option<String>,
        /// Also write the finite problem as a problem file.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Brute,
    Pbp,
    MixtureLp,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Brute => "brute",
            Method::Pbp => "pbp",
            Method::MixtureLp => "mixture-lp",
        }
    }
}

#[derive(Subcommand)]
enum StrategicOp {
    /// Every deterministic profile with its expected cost.
    Enumerate {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        cap: u128,
    },
    /// Membership of a measure in L_A, L_R and (static problems) L_M.
    Check {
        file: PathBuf,
        /// Measure file; without it a measure is induced from a seeded profile.
        #[arg(long)]
        measure: Option<PathBuf>,
        /// Induce from a deterministic rather than a randomized profile.
        #[arg(long)]
        deterministic: bool,
        /// Add mass at a joint index and renormalize: `INDEX:DELTA`.
        #[arg(long)]
        perturb: Option<String>,
    },
    /// Two L_A measures whose midpoint leaves L_R.
    Witness {
        file: PathBuf,
        #[arg(long, default_value_t = decteam::tolerances::DEFAULT_CAP)]
        cap: u128,
    },
}

fn read(path: &Path) -> Result<(String, String), Failure> {
    let name = path.display().to_string();
    std::fs::read_to_string(path)
        .map(|text| (name.clone(), text))
        .map_err(|e| commands::input_error(&name, format!("cannot read: {e}")))
}

fn load(path: &Path) -> Result<(problem::Loaded, String, String), Failure> {
    let (name, text) = read(path)?;
    let loaded = problem::parse(&name, &text).map_err(Failure::Input)?;
    let digest = report::sha256_hex(text.as_bytes());
    Ok((loaded, name, digest))
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let (name, text) = read(path)?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::Input(vec![problem::Diagnostic {
            file: name,
            at: Some((e.line(), e.column())),
            path: String::new(),
            message: e.to_string(),
        }])
    })
}

fn run(cli: Cli) -> Result<Value, Failure> {
    let seed = cli.common.seed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = |command: &str, input: String, digest: String| Context {
        command: command.to_string(),
        input,
        digest,
        seed,
    };
    let (context, result) = match cli.command {
        Command::Validate { file } => {
            let (l, name, digest) = load(&file)?;
            (ctx("validate", name, digest), commands::validate(&l)?)
        }
        Command::Classify { file } => {
            let (l, name, digest) = load(&file)?;
            (ctx("classify", name, digest), commands::classify_report(&l.problem)?)
        }
        Command::Reduce { file, reference } => {
            let (l, name, mut digest) = load(&file)?;
            let refs = if reference == "uniform" {
                None
            } else {
                let (rname, text) = read(Path::new(&reference))?;
                digest = report::sha256_hex(format!("{digest}{}", report::sha256_hex(text.as_bytes())).as_bytes());
                Some(commands::read_references(&l.problem, &rname, &text)?)
            };
            let r = commands::reduce(&l.problem, refs.as_deref(), &mut rng)?;
            (ctx("reduce", name, digest), r)
        }
        Command::Solve {
            file,
            method,
            init,
            cap,
            max_sweeps,
        } => {
            let (l, name, digest) = load(&file)?;
            let init = match init.as_str() {
                "first" => Init::First,
                "random" => Init::Random,
                path => Init::Given(read_json(Path::new(path))?),
            };
            let r = commands::solve(&l.problem, method.name(), cap, init, max_sweeps, &mut rng)?;
            (ctx("solve", name, digest), r)
        }
        Command::CertifyConvexity {
            file,
            profiles,
            exhaustive_cap,
        } => {
            let (l, name, digest) = load(&file)?;
            let mut seeds = Vec::new();
            for path in &profiles {
                let v = read_json(path)?;
                seeds.push(
                    report::profile_from_json(&l.problem, &v)
                        .map_err(|e| commands::input_error(&path.display().to_string(), e))?,
                );
            }
            let r = commands::certify_convexity(&l.problem, seeds, exhaustive_cap)?;
            (ctx("certify-convexity", name, digest), r)
        }
        Command::Strategic { op } => match op {
            StrategicOp::Enumerate { file, cap } => {
                let (l, name, digest) = load(&file)?;
                (ctx("strategic enumerate", name, digest), commands::strategic_enumerate(&l.problem, cap)?)
            }
            StrategicOp::Check {
                file,
                measure,
                deterministic,
                perturb,
            } => {
                let (l, name, digest) = load(&file)?;
                let source = match measure {
                    Some(path) => {
                        let (mname, text) = read(&path)?;
                        MeasureSource::File(commands::read_measure(&l.problem, &mname, &text)?)
                    }
                    None if deterministic => MeasureSource::InduceDeterministic,
                    None => MeasureSource::InduceRandomized,
                };
                let perturb = match perturb {
                    Some(s) => Some(parse_perturb(&s)?),
                    None => None,
                };
                let r = commands::strategic_check(&l.problem, source, perturb, &mut rng)?;
                (ctx("strategic check", name, digest), r)
            }
            StrategicOp::Witness { file, cap } => {
                let (l, name, digest) = load(&file)?;
                (ctx("strategic witness", name, digest), commands::strategic_witness(&l.problem, cap)?)
            }
        },
        Command::Gallery {
            name,
            k,
            sigma,
            n,
            step,
            coupled,
            x_nodes,
            w_nodes,
            grid_points,
            check,
            export,
        } => {
            let params = GalleryParams {
                k,
                sigma,
                n,
                step,
                coupled,
                quad: QuadSpec {
                    x_nodes,
                    w_nodes,
                    grid_points,
                    ..QuadSpec::default()
                },
                check,
            };
            // The parameters are the input; digest their canonical form.
            let canonical = json!({
                "name": name, "k": params.k, "sigma": params.sigma, "n": params.n, "step": params.step,
                "coupled": params.coupled, "quadrature": params.quad, "check": params.check,
            });
            let digest = report::sha256_hex(canonical.to_string().as_bytes());
            let out = commands::gallery(&name, &params, &mut rng)?;
            if let Some(path) = export {
                let file = commands::export_problem(&out)
                    .ok_or_else(|| Failure::Analysis(format!("gallery `{name}` is not a team problem and cannot be exported")))?;
                write_json(&path, &file)?;
            }
            (ctx("gallery", format!("gallery:{name}"), digest), out.result)
        }
    };
    Ok(report::envelope(&context, result))
}

fn parse_perturb(s: &str) -> Result<(usize, f64), Failure> {
    let bad = || commands::input_error("--perturb", format!("expected INDEX:DELTA, got `{s}`"));
    let (i, d) = s.split_once(':').ok_or_else(bad)?;
    Ok((i.parse().map_err(|_| bad())?, d.parse().map_err(|_| bad())?))
}

fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(v).expect("JSON values serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Failure::Analysis(format!("cannot write {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = cli.common.out.clone();
    let Format::Json = cli.common.format;
    match run(cli) {
        Ok(report) => {
            match out {
                Some(path) => {
                    if let Err(Failure::Analysis(msg)) = write_json(&path, &report) {
                        eprintln!("error: {msg}");
                        return ExitCode::from(1);
                    }
                }
                None => println!("{}", serde_json::to_string_pretty(&report).expect("JSON values serialize")),
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Input(diags)) => {
            for d in diags {
                eprintln!("error: {d}");
            }
            ExitCode::from(2)
        }
        Err(Failure::Analysis(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
