//! `relu-certify`: injectivity certificates, bias estimates, inversion and
//! experiments for ReLU layers given as frame files.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use relu_frames::bias::{self, CertifyOptions, Init, PbeOptions, SamplingOptions, SparkPolicy};
use relu_frames::experiments::{self, EvolutionConfig, MaxBiasConfig, TransitionConfig};
use relu_frames::reconstruction::{self, FrameAlgorithmOptions};
use relu_frames::{
    io, linalg, polytope, stability, Bias, BiasEstimate, Domain, Error, Frame, SamplingMode,
    Tolerances,
};

#[derive(Parser, Debug)]
#[command(
    name = "relu-certify",
    version,
    about = "Certify, estimate and invert ReLU layers viewed as frames"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    #[arg(long, global = true)]
    tol_face: Option<f64>,
    #[arg(long, global = true)]
    tol_tie: Option<f64>,
    #[arg(long, global = true)]
    tol_solver: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide injectivity of a layer on a domain.
    Certify(CertifyArgs),
    /// Estimate the maximal bias of a frame on a domain.
    EstimateBias(EstimateArgs),
    /// Invert layer outputs row by row.
    Reconstruct(ReconstructArgs),
    /// Sampled frame bounds of the layer and the radius of its image.
    Bounds(BoundsArgs),
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Sample,
    Pbe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SparkArg {
    Verify,
    Assume,
    General,
}

#[derive(Args, Debug, Clone)]
struct EstimateArgs {
    #[arg(long)]
    frame: PathBuf,
    /// JSON domain or shorthand such as `ball:1.0`, `sphere`, `donut:1:0.5`.
    #[arg(long, default_value = "ball:1")]
    domain: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Pbe)]
    method: MethodArg,
    #[arg(long, default_value_t = 100_000)]
    n_samples: usize,
    #[arg(long, default_value_t = 0.05)]
    correction_factor: f64,
    /// Full-spark handling of the sampling estimate.
    #[arg(long, value_enum, default_value_t = SparkArg::Verify)]
    spark: SparkArg,
    /// Points per facet cap for the polytope cross-check.
    #[arg(long, default_value_t = 100_000)]
    cap_samples: usize,
    /// Also write the bias vector, in the scale of the input frame, as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct CertifyArgs {
    #[command(flatten)]
    estimate: EstimateArgs,
    /// Bias file (CSV column or JSON array) or `const:<value>`.
    #[arg(long)]
    bias: String,
    /// Domain samples searched for a collision when certification fails.
    #[arg(long, default_value_t = 20_000)]
    refute_samples: usize,
}

#[derive(Args, Debug, Clone)]
struct ReconstructArgs {
    #[arg(long)]
    frame: PathBuf,
    #[arg(long)]
    bias: String,
    /// Layer outputs, one row per output vector.
    #[arg(long)]
    outputs: PathBuf,
    /// Use the iterative frame algorithm instead of dual synthesis.
    #[arg(long)]
    iterative: bool,
}

#[derive(Args, Debug, Clone)]
struct BoundsArgs {
    #[arg(long)]
    frame: PathBuf,
    #[arg(long)]
    bias: String,
    #[arg(long, default_value = "ball:1")]
    domain: String,
    #[arg(long, default_value_t = 10_000)]
    n_samples: usize,
}

#[derive(Subcommand, Debug)]
enum Experiment {
    /// Fraction of test points in the maximal domain along the sampling estimate.
    Evolution {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 3.3])]
        q: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 10_000)]
        iterations: usize,
        #[arg(long, default_value_t = 1000)]
        test_points: usize,
    },
    /// Certified share of random biases over a grid of dimensions and sizes.
    Transition {
        #[arg(long, value_delimiter = ',', default_values_t = [6, 8, 10])]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 12)]
        max_redundancy: usize,
        #[arg(long)]
        max_vectors: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        n_samples: usize,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0])]
        variances: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        correction_factor: f64,
        #[arg(long)]
        normalize_frame: bool,
        /// n up to 30, m up to 150, 5e5 samples and all three variances.
        #[arg(long)]
        full_scale: bool,
    },
    /// Distance of the sampling estimate to the tetrahedron's maximal bias.
    Maxbias {
        #[arg(long, default_value_t = 100_000)]
        iterations: usize,
    },
}

/// An error with the process exit code it maps to.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(Exit(code, _)) = cause.downcast_ref::<Exit>() {
            return *code;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Parse { .. }
                | Error::Io(_)
                | Error::Json(_)
                | Error::InvalidFrame(_)
                | Error::InvalidDomain(_)
                | Error::DimensionMismatch { .. }
                | Error::NotAFrame => 2,
                Error::NotOmnidirectional
                | Error::NotFullSpark
                | Error::Unsupported(_)
                | Error::DegenerateHull
                | Error::EnumerationCap { .. }
                | Error::Hypothesis(_) => 3,
                Error::NotInvertible | Error::Diverged(_) => 4,
            };
        }
    }
    4
}

fn tolerances(c: &Common) -> Result<Tolerances> {
    let mut t = Tolerances::default();
    if let Some(v) = c.tol_rank {
        t.rank = v;
    }
    if let Some(v) = c.tol_face {
        t.face = v;
    }
    if let Some(v) = c.tol_tie {
        t.tie = v;
    }
    if let Some(v) = c.tol_solver {
        t.solver = v;
    }
    t.validate()
        .map_err(|m| Exit(1, format!("invalid tolerances: {m}")))?;
    Ok(t)
}

fn load_frame(path: &Path, tol: Tolerances) -> Result<Frame> {
    let f = io::read_frame(path).with_context(|| format!("reading frame {}", path.display()))?;
    Ok(f.with_tolerances(tol))
}

fn load_bias(spec: &str, m: usize) -> Result<Bias> {
    let b = match spec.strip_prefix("const:") {
        Some(v) => {
            let v: f64 = v.trim().parse().map_err(|e| Error::Parse {
                line: None,
                msg: format!("bias '{spec}': {e}"),
            })?;
            Bias::constant(m, v)
        }
        None => io::read_bias(Path::new(spec)).with_context(|| format!("reading bias {spec}"))?,
    };
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: b.len(),
        })
        .context("bias length does not match the frame");
    }
    Ok(b)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Estimate for the unit-norm version of `frame`, which every method
/// works with.
fn run_estimate(
    unit: &Frame,
    domain: &Domain,
    a: &EstimateArgs,
    seed: u64,
) -> Result<BiasEstimate> {
    match a.method {
        MethodArg::Sample => {
            let spark = match a.spark {
                SparkArg::Verify => SparkPolicy::Verify,
                SparkArg::Assume => SparkPolicy::Assume,
                SparkArg::General => SparkPolicy::General,
            };
            let opts = SamplingOptions {
                n_samples: a.n_samples,
                seed,
                init: Init::Auto,
                spark,
                correction_factor: a.correction_factor,
                mode: None,
            };
            bias::sampling_bias_estimate(unit, domain, &opts).map_err(|e| match e {
                Error::NotFullSpark => {
                    anyhow!(e).context("use --spark general for the exact basis search")
                }
                e => anyhow!(e),
            })
        }
        MethodArg::Pbe => {
            let fs = polytope::enumerate_facets(unit).map_err(|e| match e {
                Error::DegenerateHull => Error::NotOmnidirectional,
                e => e,
            })?;
            let opts = PbeOptions {
                cap_samples: a.cap_samples,
                seed,
                ..Default::default()
            };
            Ok(bias::pbe_for_domain(unit, &fs, domain, &opts)?)
        }
    }
}

fn normalized(frame: &Frame) -> (Frame, Vec<f64>) {
    let (unit, norms) = frame.normalized();
    (unit.with_tolerances(*frame.tolerances()), norms)
}

fn cmd_estimate(c: &Common, a: &EstimateArgs) -> Result<()> {
    let frame = load_frame(&a.frame, tolerances(c)?)?;
    let domain = Domain::parse(&a.domain, frame.n())?;
    let (unit, norms) = normalized(&frame);
    let mut est = run_estimate(&unit, &domain, a, c.seed)?;
    if norms.iter().any(|w| *w != 1.0) {
        est.metadata.notes.push(
            "frame rows rescaled to unit norm; multiply by the row norms for the input scale"
                .into(),
        );
    }
    if let Some(p) = &a.csv {
        let scaled = Bias::new(
            est.values
                .values()
                .iter()
                .zip(&norms)
                .map(|(v, w)| v * w)
                .collect(),
        );
        io::write_bias(p, &scaled).with_context(|| format!("writing {}", p.display()))?;
    }
    emit(&c.out, &to_json(&est)?)
}

fn cmd_certify(c: &Common, a: &CertifyArgs) -> Result<()> {
    let frame = load_frame(&a.estimate.frame, tolerances(c)?)?;
    let given = load_bias(&a.bias, frame.m())?;
    let domain = Domain::parse(&a.estimate.domain, frame.n())?;
    let (unit, norms) = normalized(&frame);
    let unit_bias = Bias::new(
        given
            .values()
            .iter()
            .zip(&norms)
            .map(|(g, w)| g / w)
            .collect(),
    );
    let est = run_estimate(&unit, &domain, &a.estimate, c.seed)?;
    let opts = CertifyOptions {
        refute_samples: a.refute_samples,
        seed: c.seed,
    };
    let mut cert = bias::certify_with(&unit, &unit_bias, &est, &opts)?;
    cert.parameters = json!({
        "frame": a.estimate.frame,
        "bias": a.bias,
        "domain": a.estimate.domain,
        "method": format!("{:?}", a.estimate.method).to_lowercase(),
        "n_samples": a.estimate.n_samples,
        "cap_samples": a.estimate.cap_samples,
        "correction_factor": a.estimate.correction_factor,
        "seed": c.seed,
        "row_norms": norms,
    });
    emit(&c.out, &to_json(&cert)?)
}

fn cmd_reconstruct(c: &Common, a: &ReconstructArgs) -> Result<()> {
    let frame = load_frame(&a.frame, tolerances(c)?)?;
    let alpha = load_bias(&a.bias, frame.m())?;
    let outputs =
        io::read_points(&a.outputs).with_context(|| format!("reading {}", a.outputs.display()))?;
    if let Some((k, _)) = outputs
        .iter()
        .enumerate()
        .find(|(_, z)| z.len() != frame.m())
    {
        bail!(Error::Parse {
            line: Some(k + 1),
            msg: format!("output row has the wrong length, expected {}", frame.m())
        });
    }
    let results: Vec<_> = if a.iterative {
        use rayon::prelude::*;
        outputs
            .par_iter()
            .map(|z| {
                reconstruction::relu_frame_algorithm(
                    &frame,
                    &alpha,
                    z,
                    &FrameAlgorithmOptions::default(),
                )
            })
            .collect()
    } else {
        reconstruction::reconstruct_batch(&frame, &alpha, &outputs)
    };
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    if !outputs.is_empty() {
        let mut header: Vec<String> = (1..=frame.n()).map(|i| format!("x{i}")).collect();
        header.extend(["residual".into(), "status".into()]);
        w.write_record(&header)?;
    }
    for r in &results {
        let mut row: Vec<String> = Vec::with_capacity(frame.n() + 2);
        match r {
            Ok(res) => {
                row.extend(res.x.iter().map(|v| io::format_number(*v)));
                row.push(io::format_number(res.residual));
                row.push(if res.ambiguous.is_empty() {
                    "ok".into()
                } else {
                    "ambiguous".into()
                });
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), frame.n() + 1));
                row.push(match e {
                    Error::NotInvertible => "not_invertible".into(),
                    e => format!("error: {e}"),
                });
            }
        }
        w.write_record(&row)?;
    }
    emit(
        &c.out,
        &String::from_utf8(w.into_inner().map_err(|e| anyhow!(e.to_string()))?)?,
    )
}

fn cmd_bounds(c: &Common, a: &BoundsArgs) -> Result<()> {
    let frame = load_frame(&a.frame, tolerances(c)?)?;
    let alpha = load_bias(&a.bias, frame.m())?;
    let domain = Domain::parse(&a.domain, frame.n())?;
    let mode = if domain.is_bounded() {
        SamplingMode::Uniform
    } else {
        SamplingMode::Gaussian
    };
    let pts = domain.sample(a.n_samples, c.seed, mode)?.points;
    let report = stability::relu_frame_bounds(&frame, &alpha, &pts)?;
    let image = if domain.is_bounded() {
        Some(stability::image_ball_radius(&frame, &alpha, &domain, &pts)?)
    } else {
        None
    };
    let fb = frame.bounds()?;
    let out = json!({
        "frame_bounds": fb,
        "relu_bounds": report,
        "image": image,
        "samples": a.n_samples,
        "seed": c.seed,
        "domain": domain,
        "largest_row_norm": frame.norms().into_iter().fold(0.0, f64::max),
        "smallest_row_norm": frame.norms().into_iter().fold(f64::INFINITY, f64::min),
        "origin_output_norm": linalg::norm(&frame.relu(&alpha, &vec![0.0; frame.n()])?),
    });
    emit(&c.out, &to_json(&out)?)
}

fn cmd_experiment(c: &Common, e: &Experiment) -> Result<()> {
    let text = match e {
        Experiment::Evolution {
            n,
            q,
            trials,
            iterations,
            test_points,
        } => {
            let cfg = EvolutionConfig {
                n: *n,
                redundancies: q.clone(),
                trials: *trials,
                iterations: *iterations,
                test_points: *test_points,
                seed: c.seed,
            };
            experiments::evolution(&cfg)?.to_csv()
        }
        Experiment::Transition {
            dims,
            max_redundancy,
            max_vectors,
            n_samples,
            trials,
            variances,
            correction_factor,
            normalize_frame,
            full_scale,
        } => {
            let cfg = if *full_scale {
                TransitionConfig {
                    seed: c.seed,
                    ..TransitionConfig::full_scale()
                }
            } else {
                TransitionConfig {
                    dims: dims.clone(),
                    max_redundancy: *max_redundancy,
                    max_vectors: *max_vectors,
                    n_samples: *n_samples,
                    trials: *trials,
                    variances: variances.clone(),
                    correction_factor: *correction_factor,
                    normalize_frame: *normalize_frame,
                    seed: c.seed,
                }
            };
            experiments::transition(&cfg)?.to_csv()
        }
        Experiment::Maxbias { iterations } => experiments::maxbias(&MaxBiasConfig {
            iterations: *iterations,
            seed: c.seed,
        })?
        .to_csv(),
    };
    emit(&c.out, &text)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("RELU_CERTIFY_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| {
            Exit(
                1,
                format!("RELU_CERTIFY_THREADS must be a positive integer, got '{v}'"),
            )
        })?;
        if n == 0 {
            return Err(Exit(1, "RELU_CERTIFY_THREADS must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!(e))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Certify(a) => cmd_certify(&cli.common, a),
        Command::EstimateBias(a) => cmd_estimate(&cli.common, a),
        Command::Reconstruct(a) => cmd_reconstruct(&cli.common, a),
        Command::Bounds(a) => cmd_bounds(&cli.common, a),
        Command::Experiment(e) => cmd_experiment(&cli.common, e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
