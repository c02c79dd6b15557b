//! Command-line entry point.
//!
//! Every subcommand prints one JSON summary to stdout. With `--out DIR`,
//! artifacts are written under DIR together with `manifest.json`.

use crate::render::{domain_colouring, eigen_scatter, ColourScheme, FunctionSource, RenderSpec, ScatterFormat};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use secular_core::charpoly::{secular_polynomial, ArithmeticMode};
use secular_core::graph::sample_digraph;
use secular_core::harness::experiment_presets;
use secular_core::harness::run_preset;
use secular_core::limit::{phc_sobolev, secular_limit_coefficients, secular_limit_scaled, FieldSampler};
use secular_core::moments::{
    deltak_suite, delta_suite, expected_sq_secular, fkg_suite, tightness_bound_check,
};
use secular_core::series::{gf_partition_check, gf_secular_moments, par_multiset};
use secular_core::spectra::{block_eigenvalues, spectral_summary};
use secular_core::Error;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

/// Worker threads for trials and rendering.
pub const THREADS_ENV: &str = "SECULAR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "secular", version, about = "Sparse random digraphs, secular polynomials and their limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Float,
    Qn,
    Limit,
    Gaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Edges,
    Csv,
    Png,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Suite {
    Subdets,
    Deltak,
    Tightness,
    Gf,
    Par,
    Fkg,
}

#[derive(Debug, clap::Args)]
struct Common {
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a Bernoulli digraph.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "edges")]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Secular polynomial det(I − zA) of a sampled digraph.
    Secular {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[command(flatten)]
        common: Common,
    },
    /// Eigenvalues of a sampled digraph.
    Eig {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Sample a cycle field and expand its limit function.
    Limit {
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Field length L.
        #[arg(long, default_value_t = 20)]
        k: usize,
        /// Number of coefficients N ≤ L.
        #[arg(long, default_value_t = 10)]
        order: usize,
        /// Sobolev index (d > 1).
        #[arg(long, allow_hyphen_values = true)]
        s: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact E|Δ_k|² as a polynomial in p, evaluated at p = d/n.
    Moments {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Expansion of E[F(z_1)⋯F(z_r)].
    Gf {
        /// d as a rational, e.g. 3/2.
        #[arg(long)]
        d: String,
        /// Number of points r.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Total-degree cap.
        #[arg(long, default_value_t = 6)]
        order: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Run a Monte Carlo preset.
    Mc {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Phase portrait as PNG.
    Render {
        #[arg(long, value_enum, default_value = "qn")]
        mode: Mode,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        d: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Field length or Gaussian coefficient count.
        #[arg(long, default_value_t = 60)]
        k: usize,
        /// Resolution in pixels.
        #[arg(long, default_value_t = 256)]
        order: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Exact oracle suites.
    Oracle {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long)]
        d: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

/// An artifact file and its bytes.
struct Artifact {
    name: String,
    bytes: Vec<u8>,
}

struct Outcome {
    summary: Value,
    artifacts: Vec<Artifact>,
    /// False when an oracle or Monte Carlo check failed.
    pass: bool,
}

impl Outcome {
    fn ok(summary: Value) -> Self {
        Outcome { summary, artifacts: Vec::new(), pass: true }
    }
}

fn parse_rational(s: &str) -> secular_core::Result<BigRational> {
    let bad = || Error::Parameter(format!("cannot read {s:?} as a rational"));
    match s.split_once('/') {
        Some((a, b)) => {
            let num: BigInt = a.trim().parse().map_err(|_| bad())?;
            let den: BigInt = b.trim().parse().map_err(|_| bad())?;
            if den == BigInt::from(0) {
                return Err(bad());
            }
            Ok(BigRational::new(num, den))
        }
        None => {
            if let Ok(i) = s.trim().parse::<BigInt>() {
                return Ok(BigRational::from_integer(i));
            }
            let f: f64 = s.trim().parse().map_err(|_| bad())?;
            BigRational::from_float(f).ok_or_else(bad)
        }
    }
}

fn out_dir(common: &Common) -> Option<&Path> {
    common.out.as_deref()
}

fn run(command: &Command) -> secular_core::Result<Outcome> {
    Ok(match command {
        Command::Sample { n, d, seed, format, .. } => {
            let g = sample_digraph(*n, *d, *seed)?;
            let text = match format {
                Format::Json => serde_json::to_string(&json!({
                    "n": n, "edges": g.edges().map(|(i, j)| [i + 1, j + 1]).collect::<Vec<_>>()
                }))
                .expect("json"),
                _ => g.to_edge_list(),
            };
            let ext = if matches!(format, Format::Json) { "json" } else { "txt" };
            Outcome {
                summary: json!({
                    "command": "sample", "n": n, "d": d, "seed": seed,
                    "edges": g.edge_count(), "loops": g.loop_count(), "record": g.record(),
                }),
                artifacts: vec![Artifact { name: format!("digraph.{ext}"), bytes: text.into_bytes() }],
                pass: true,
            }
        }
        Command::Secular { n, d, seed, mode, .. } => {
            let mode = match mode {
                Mode::Float => ArithmeticMode::Float,
                Mode::Exact => ArithmeticMode::Exact,
                other => return Err(Error::Parameter(format!("--mode {other:?} is not an arithmetic mode"))),
            };
            let g = sample_digraph(*n, *d, *seed)?;
            let q = secular_polynomial(&g, mode)?;
            let poly = q.to_json();
            Outcome {
                summary: json!({"command": "secular", "n": n, "d": d, "seed": seed, "polynomial": poly}),
                artifacts: vec![Artifact { name: "secular.json".into(), bytes: poly.to_string().into_bytes() }],
                pass: true,
            }
        }
        Command::Eig { n, d, seed, format, .. } => {
            let g = sample_digraph(*n, *d, *seed)?;
            let spectrum = block_eigenvalues(&g)?;
            let report = spectral_summary(&spectrum, None);
            let (name, bytes) = match format {
                Format::Png => ("eigenvalues.png", eigen_scatter(&spectrum, &[1.0f64.max(*d), d.sqrt()], ScatterFormat::Png)?),
                Format::Csv => ("eigenvalues.csv", eigen_scatter(&spectrum, &[], ScatterFormat::Csv)?),
                other => return Err(Error::Parameter(format!("--format {other:?} is not available for eig"))),
            };
            Outcome {
                summary: json!({
                    "command": "eig", "n": n, "d": d, "seed": seed,
                    "lambda1": [report.lambda1.re, report.lambda1.im],
                    "lambda2_modulus": report.lambda2_modulus,
                    "spectral_radius": report.spectral_radius,
                    "labelled_roots": spectrum.exact_roots().iter().map(|(l, m)| json!({"l": l.l, "j": l.j, "multiplicity": m})).collect::<Vec<_>>(),
                    "zero_multiplicity": spectrum.zero_multiplicity,
                }),
                artifacts: vec![Artifact { name: name.into(), bytes }],
                pass: true,
            }
        }
        Command::Limit { d, seed, k, order, s, .. } => {
            let field = FieldSampler::new(*d, 1e-12, Some(*k))?.sample(*seed);
            let series = if *d < 1.0 || *order <= field.len() {
                secular_limit_coefficients(&field, *order)?
            } else {
                return Err(Error::Parameter(format!("--order {order} exceeds the field length {}", field.len())));
            };
            let sobolev = match s {
                Some(s) => Some(phc_sobolev(&secular_limit_scaled(&field, *order)?, *d, *s, *order)?.norm_sq),
                None => None,
            };
            Outcome {
                summary: json!({
                    "command": "limit", "field": field.to_json(), "coefficients": series.to_json(),
                    "sobolev_norm_sq": sobolev,
                }),
                artifacts: vec![Artifact { name: "field.json".into(), bytes: field.to_json().to_string().into_bytes() }],
                pass: true,
            }
        }
        Command::Moments { n, k, d, .. } => {
            let poly = expected_sq_secular(*n, *k)?;
            let value = d.map(|d| poly.eval_f64(d / *n as f64));
            Outcome::ok(json!({
                "command": "moments", "n": n, "k": k, "coeffs_in_p": poly.coeff_strings(), "value": value,
            }))
        }
        Command::Gf { d, k, order, .. } => {
            let d = parse_rational(d)?;
            let series = gf_secular_moments(&d, *k, *order)?;
            Outcome::ok(json!({"command": "gf", "d": d.to_string(), "r": k, "cap": order, "series": series.to_json()}))
        }
        Command::Mc { preset, trials, seed, n, d, .. } => {
            let mut p = experiment_presets(preset)?;
            if let Some(t) = trials {
                p = p.with_trials(*t);
            }
            if let Some(s) = seed {
                p = p.with_seed(*s);
            }
            if let Some(n) = n {
                p = p.with_n(*n);
            }
            if let Some(d) = d {
                p = p.with_d(*d);
            }
            let run = run_preset(&p)?;
            Outcome {
                summary: json!({"command": "mc", "preset": preset, "plan": p.plan, "reports": run.reports, "pass": run.pass}),
                artifacts: vec![Artifact { name: "reports.jsonl".into(), bytes: run.to_json_lines().into_bytes() }],
                pass: run.pass,
            }
        }
        Command::Render { mode, n, d, seed, k, order, .. } => {
            let (source, half_width, circles) = match mode {
                Mode::Qn => (FunctionSource::SampledQn { n: *n, d: *d, seed: *seed }, 1.0, vec![1.0 / d, 1.0 / d.sqrt()]),
                Mode::Limit => (
                    FunctionSource::LimitF { d: *d, length: *k, seed: *seed },
                    1.0 / d.sqrt(),
                    vec![1.0 / d, 1.0 / d.sqrt()],
                ),
                Mode::Gaussian => (FunctionSource::GaussianLimit { k: *k, seed: *seed }, 1.0, vec![1.0]),
                other => return Err(Error::Parameter(format!("--mode {other:?} is not a render source"))),
            };
            let spec = RenderSpec {
                center: (0.0, 0.0),
                half_width,
                resolution: *order,
                source,
                circles,
                scheme: ColourScheme::default(),
            };
            let png = domain_colouring(&spec)?;
            Outcome {
                summary: json!({"command": "render", "spec": spec, "bytes": png.len()}),
                artifacts: vec![Artifact { name: "render.png".into(), bytes: png }],
                pass: true,
            }
        }
        Command::Oracle { suite, n, d, .. } => {
            let (rows, failures): (Value, usize) = match suite {
                Suite::Subdets => {
                    let r = delta_suite(*n)?;
                    let bad = r.iter().filter(|x| !x.equal).count();
                    (serde_json::to_value(&r).expect("json"), bad)
                }
                Suite::Deltak => {
                    let r = deltak_suite((*n).min(4), *n)?;
                    let bad = r.iter().filter(|x| !x.equal).count();
                    (serde_json::to_value(&r).expect("json"), bad)
                }
                Suite::Tightness => {
                    let d = d.as_deref().map(parse_rational).transpose()?.map_or(2.0, |r| {
                        num_traits::ToPrimitive::to_f64(&r).unwrap_or(f64::NAN)
                    });
                    let r = tightness_bound_check(d, 20, &[10, 100, 1000])?;
                    let bad = r.rows.iter().filter(|x| !x.holds).count();
                    (serde_json::to_value(&r).expect("json"), bad)
                }
                Suite::Gf => {
                    let d = parse_rational(d.as_deref().unwrap_or("3/2"))?;
                    let r = gf_partition_check(&d, 2, (*n as u32).min(8))?;
                    let bad = r.mismatches.len();
                    (serde_json::to_value(&r).expect("json"), bad)
                }
                Suite::Par => {
                    let one = BigRational::from_integer(BigInt::from(1));
                    let bell: Vec<String> = (1..=*n)
                        .map(|r| par_multiset(&vec![1; r], &one, false).map(|(v, _)| v.to_string()))
                        .collect::<secular_core::Result<_>>()?;
                    (json!({"bell": bell}), 0)
                }
                Suite::Fkg => {
                    let p = parse_rational(d.as_deref().unwrap_or("1/2"))?;
                    let r = fkg_suite(*n, 3, &p)?;
                    let bad = r.violations.len();
                    (serde_json::to_value(&r).expect("json"), bad)
                }
            };
            let bytes = serde_json::to_vec(&rows).expect("json");
            Outcome {
                summary: json!({"command": "oracle", "suite": format!("{suite:?}").to_lowercase(), "n": n, "failures": failures, "pass": failures == 0}),
                artifacts: vec![Artifact { name: "oracle.json".into(), bytes }],
                pass: failures == 0,
            }
        }
    })
}

fn common(command: &Command) -> &Common {
    match command {
        Command::Sample { common, .. }
        | Command::Secular { common, .. }
        | Command::Eig { common, .. }
        | Command::Limit { common, .. }
        | Command::Moments { common, .. }
        | Command::Gf { common, .. }
        | Command::Mc { common, .. }
        | Command::Render { common, .. }
        | Command::Oracle { common, .. } => common,
    }
}

fn write_artifacts(dir: &Path, argv: &[String], outcome: &Outcome) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for a in &outcome.artifacts {
        std::fs::write(dir.join(&a.name), &a.bytes)?;
        files.push(json!({"name": a.name, "bytes": a.bytes.len()}));
    }
    std::fs::write(dir.join("summary.json"), serde_json::to_vec_pretty(&outcome.summary)?)?;
    let manifest = json!({"argv": argv, "files": files, "summary": "summary.json", "version": env!("CARGO_PKG_VERSION")});
    std::fs::write(dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only when a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code:
/// 2 for usage and parameter errors, 1 for failed checks or runtime errors, 0 otherwise.
pub fn cli_main(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match run(&cli.command) {
        Ok(outcome) => {
            if let Some(dir) = out_dir(common(&cli.command)) {
                if let Err(e) = write_artifacts(dir, argv, &outcome) {
                    eprintln!("{}", json!({"error": format!("writing {}: {e}", dir.display())}));
                    return 1;
                }
            }
            println!("{}", outcome.summary);
            if outcome.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("{}", json!({"error": e.to_string()}));
            match e {
                Error::Parameter(_) | Error::Domain(_) | Error::Parse(_) => 2,
                _ => 1,
            }
        }
    }
}
