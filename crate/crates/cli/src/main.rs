//! Command line front end: moment analysis, measure reconstruction,
//! POVM operations, deficiency reports, and the one-shot reproduction
//! pipeline.
//!
//! Exit codes: 0 success, 1 verdict mismatch in `reproduce`, 2 usage or
//! input error, 3 numeric failure.

mod config;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use momenta::algebra::FockVector;
use momenta::moment::{
    carleman_test, cramer_test, hamburger_existence, stieltjes_existence, MomentKind,
    MomentSequence,
};
use momenta::operator::{momentum_deficiency, IntervalDomain};
use momenta::povm::{
    compress_povm, consistency_check, family_to_povm, halfline_momentum_measures,
    induced_family_with_closure, masses_csv, naimark_dilate, validate_povm, ConsistentFamily,
    GridPOVM,
};
use momenta::recon::reconstruct_measure;
use momenta::reproduce::{self, ReproduceSettings, Stage};
use momenta::Error;

use config::{OutputKind, RunConfig};

#[derive(Parser)]
#[command(
    name = "momenta",
    version,
    about = "Moment problems, truncated CCR representations and finite-dimensional POVMs"
)]
struct Cli {
    /// JSON run configuration (tolerances, precision, grid policy, output)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_parser = config::parse_output)]
    output: Option<OutputKind>,

    /// Internal precision in decimal digits (>= 16)
    #[arg(long, global = true)]
    precision: Option<u32>,

    /// Tolerance override, e.g. --tol psd=1e-12 (repeatable)
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tolerances: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the built-in reproduction pipeline and check expected verdicts
    Reproduce(ReproduceArgs),
    /// Generate the moment sequence of a deformed state on an observable
    Moments(MomentsArgs),
    /// Existence and determinacy analysis of a moment sequence file
    AnalyzeMoments(AnalyzeArgs),
    /// Deficiency report of the momentum operator on an interval
    Deficiency(DeficiencyArgs),
    /// POVM operations
    #[command(subcommand)]
    Povm(PovmCommand),
}

#[derive(Args)]
struct MomentsArgs {
    /// Observable in symbolic shorthand, e.g. "Q", "Q^4", "A*A", "I",
    /// or an element JSON file path prefixed with @
    #[arg(long)]
    observable: String,
    /// Deforming element (same syntax); defaults to the identity
    #[arg(long, default_value = "I")]
    deformer: String,
    /// Largest moment index K
    #[arg(long, default_value_t = 20)]
    max_index: usize,
    /// Override the automatic exactness truncation (warned when inexact)
    #[arg(long)]
    truncation: Option<usize>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Run a single stage: table, deficiency, povm or quadrature
    #[arg(long)]
    only: Option<String>,
    /// Write the JSON report to this path
    #[arg(long)]
    report: Option<PathBuf>,
    /// Largest moment index for the determinacy table
    #[arg(long, default_value_t = 40)]
    max_index: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// MomentSequence JSON file: {"kind":"hamburger","values":[...]}
    input: PathBuf,
    /// Append an n-point Gauss reconstruction to the report
    #[arg(long, value_name = "N")]
    reconstruct: Option<usize>,
}

#[derive(Args)]
struct DeficiencyArgs {
    /// Interval: "box LO HI", "halfline LO" or "line"
    #[arg(num_args = 1..=3)]
    interval: Vec<String>,
}

#[derive(Subcommand)]
enum PovmCommand {
    /// Check positivity, Hermiticity and normalization
    Validate { povm: PathBuf },
    /// Naimark dilation: isometry, blocks and the compression residual
    Dilate { povm: PathBuf },
    /// Induce the consistent measure family of a POVM on probe vectors
    ToFamily {
        povm: PathBuf,
        /// vectors JSON: `{"vectors":[[[re,im],...],...]}`
        #[arg(long)]
        vectors: PathBuf,
    },
    /// Reconstruct the unique POVM of a consistent family
    FromFamily { family: PathBuf },
    /// Compress a POVM onto the span of an orthonormal set
    Compress {
        povm: PathBuf,
        /// basis JSON: `{"vectors":[[[re,im],...],...]}`
        #[arg(long)]
        basis: PathBuf,
    },
    /// Momentum measures of a half-line window function
    Halfline {
        /// window JSON: {"length":L,"samples":[...]}; defaults to the
        /// built-in window x e^{-x} on [0,32] with 2^14 samples
        #[arg(long)]
        window: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    // die quietly when a downstream pipe closes instead of panicking
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let cfg = match RunConfig::assemble(
        cli.config.as_deref(),
        cli.output,
        cli.precision,
        &cli.tolerances,
    ) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Reproduce(args) => cmd_reproduce(&cfg, &args),
        Command::Moments(args) => cmd_moments(&cfg, &args),
        Command::AnalyzeMoments(args) => cmd_analyze_moments(&cfg, &args),
        Command::Deficiency(args) => cmd_deficiency(&cfg, &args),
        Command::Povm(sub) => cmd_povm(&cfg, sub),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::RankDeficient { .. }
        | Error::NotPositiveSemidefinite { .. }
        | Error::SpanningDeficient { .. }
        | Error::IllConditioned { .. }
        | Error::NumericFailure(_) => 3,
        _ => 2,
    }
}

/// Read a JSON value from a file, or from stdin when the path is `-`
/// (lets subcommand outputs pipe into each other).
fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T, Error> {
    let text = if path.as_os_str() == "-" {
        use std::io::Read;
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::InvalidInput(format!("cannot read stdin: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?
    };
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("malformed JSON in {}: {e}", path.display())))
}

fn cmd_reproduce(cfg: &RunConfig, args: &ReproduceArgs) -> Result<ExitCode, Error> {
    let only: Option<Stage> = match &args.only {
        Some(s) => Some(s.parse()?),
        None => None,
    };
    let settings = ReproduceSettings {
        table_max_index: args.max_index,
        quadrature_points: args.max_index / 2,
        ..ReproduceSettings::default()
    };
    let report = reproduce::run(&cfg.moment_config(), &settings, only)?;
    match cfg.output {
        OutputKind::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
        _ => render::reproduce_report(&report),
    }
    if let Some(path) = &args.report {
        std::fs::write(path, serde_json::to_string_pretty(&report).unwrap())
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
    }
    if report.pass {
        Ok(ExitCode::SUCCESS)
    } else if report.any_numeric_failure() {
        Ok(ExitCode::from(3))
    } else {
        Ok(ExitCode::from(1))
    }
}

/// Parse "Q^4"-style shorthand, or load element JSON from a @-prefixed path.
fn element_arg(s: &str) -> Result<momenta::algebra::NormalOrderedElement, Error> {
    if let Some(path) = s.strip_prefix('@') {
        read_json(std::path::Path::new(path))
    } else {
        momenta::algebra::parse_element(s)
    }
}

fn cmd_moments(cfg: &RunConfig, args: &MomentsArgs) -> Result<ExitCode, Error> {
    use momenta::algebra::{deformed_moment_sequence_at, exactness_truncation};
    let observable = element_arg(&args.observable)?;
    let deformer = element_arg(&args.deformer)?;
    let truncation = args
        .truncation
        .unwrap_or_else(|| exactness_truncation(&observable, &deformer, args.max_index));
    let out = deformed_moment_sequence_at(&observable, &deformer, args.max_index, truncation)?;
    if !out.exact {
        eprintln!(
            "warning: truncation {truncation} is below the exactness level {}; \
             the top moments are those of the cut operator",
            exactness_truncation(&observable, &deformer, args.max_index)
        );
    }
    let ms = out.sequence;
    match cfg.output {
        OutputKind::Json => println!("{}", serde_json::to_string(&ms).unwrap()),
        OutputKind::Csv => {
            println!("n,moment");
            for (n, v) in ms.values().iter().enumerate() {
                println!("{n},{v}");
            }
        }
        OutputKind::Table => {
            for (n, v) in ms.values().iter().enumerate() {
                println!("m_{n:<3} {v:>24.16e}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(serde::Serialize)]
struct AnalysisReport {
    schema: &'static str,
    kind: MomentKind,
    existence: serde_json::Value,
    carleman: Option<momenta::moment::DeterminacyVerdict>,
    cramer: Option<momenta::moment::DeterminacyVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reconstruction: Option<momenta::recon::Reconstruction>,
}

fn cmd_analyze_moments(cfg: &RunConfig, args: &AnalyzeArgs) -> Result<ExitCode, Error> {
    let ms: MomentSequence = read_json(&args.input)?;
    let mcfg = cfg.moment_config();
    let (existence_json, feasible) = match ms.kind() {
        MomentKind::Hamburger => {
            let r = hamburger_existence(&ms, &mcfg)?;
            (serde_json::to_value(&r).unwrap(), r.feasible)
        }
        MomentKind::Stieltjes => {
            let r = stieltjes_existence(&ms, &mcfg)?;
            (serde_json::to_value(&r).unwrap(), r.feasible)
        }
    };
    let (carleman, cramer) = if feasible {
        (Some(carleman_test(&ms, &mcfg)?), Some(cramer_test(&ms, &mcfg)?))
    } else {
        (None, None)
    };
    let reconstruction = match args.reconstruct {
        Some(n) if feasible => Some(reconstruct_measure(&ms, n, &mcfg)?),
        _ => None,
    };
    let report = AnalysisReport {
        schema: "momenta-analysis/v1",
        kind: ms.kind(),
        existence: existence_json,
        carleman,
        cramer,
        reconstruction,
    };
    match cfg.output {
        OutputKind::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
        OutputKind::Csv => {
            if let Some(rec) = &report.reconstruction {
                print!("{}", rec.measure.to_csv());
            } else {
                return Err(Error::InvalidInput(
                    "csv output needs --reconstruct".into(),
                ));
            }
        }
        OutputKind::Table => render::analysis_report(&report),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_deficiency(cfg: &RunConfig, args: &DeficiencyArgs) -> Result<ExitCode, Error> {
    let dom = match args.interval.first().map(String::as_str) {
        Some("box") if args.interval.len() == 3 => IntervalDomain::Bounded {
            lo: parse_f64(&args.interval[1])?,
            hi: parse_f64(&args.interval[2])?,
        },
        Some("halfline") if args.interval.len() == 2 => IntervalDomain::HalfLineRight {
            lo: parse_f64(&args.interval[1])?,
        },
        Some("line") if args.interval.len() == 1 => IntervalDomain::FullLine,
        _ => {
            return Err(Error::InvalidInput(
                "expected: box LO HI | halfline LO | line".into(),
            ))
        }
    };
    let report = momentum_deficiency(&dom)?;
    match cfg.output {
        OutputKind::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
        _ => render::deficiency_report(&report),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(serde::Deserialize)]
struct VectorsFile {
    vectors: Vec<FockVector>,
}

#[derive(serde::Deserialize)]
struct WindowFile {
    length: f64,
    samples: Vec<f64>,
}

fn cmd_povm(cfg: &RunConfig, sub: PovmCommand) -> Result<ExitCode, Error> {
    let tols = &cfg.tolerances;
    match sub {
        PovmCommand::Validate { povm } => {
            let q: GridPOVM = read_json(&povm)?;
            let report = validate_povm(&q, tols)?;
            match cfg.output {
                OutputKind::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
                _ => println!(
                    "ok: {} (worst eigenvalue {:.3e}, sum defect {:.3e}, hermiticity {:.3e})",
                    report.ok, report.worst_eig, report.sum_defect, report.hermiticity_defect
                ),
            }
            Ok(if report.ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        PovmCommand::Dilate { povm } => {
            let q: GridPOVM = read_json(&povm)?;
            let dil = naimark_dilate(&q, tols)?;
            let mut residual = 0.0f64;
            for (i, e) in q.effects().iter().enumerate() {
                let back = dil.compress_block(i);
                residual = residual.max((&back - e).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
            #[derive(serde::Serialize)]
            struct DilationReport {
                schema: &'static str,
                dilated_dim: usize,
                isometry: Vec<Vec<(f64, f64)>>,
                compression_residual: f64,
            }
            let report = DilationReport {
                schema: "momenta-dilation/v1",
                dilated_dim: dil.dilated_dim(),
                isometry: dil
                    .isometry
                    .row_iter()
                    .map(|r| r.iter().map(|z| (z.re, z.im)).collect())
                    .collect(),
                compression_residual: residual,
            };
            match cfg.output {
                OutputKind::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
                _ => {
                    println!(
                        "dilated dimension {} (isometry {}x{})",
                        report.dilated_dim,
                        dil.isometry.nrows(),
                        dil.isometry.ncols()
                    );
                    render::complex_matrix("isometry", &dil.isometry);
                    println!("compression residual {residual:.3e}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        PovmCommand::ToFamily { povm, vectors } => {
            let q: GridPOVM = read_json(&povm)?;
            let v: VectorsFile = read_json(&vectors)?;
            let family = induced_family_with_closure(&q, &v.vectors)?;
            let check = consistency_check(&family, &family.table, tols.reconstruction)?;
            match cfg.output {
                OutputKind::Json => {
                    println!("{}", serde_json::to_string_pretty(&family).unwrap())
                }
                OutputKind::Csv => {
                    for e in &family.entries {
                        println!("# {}", e.label);
                        print!("{}", masses_csv(&family.grid, &e.masses));
                    }
                }
                OutputKind::Table => render::family(&family, &check),
            }
            Ok(ExitCode::SUCCESS)
        }
        PovmCommand::FromFamily { family } => {
            let f: ConsistentFamily = read_json(&family)?;
            let check = consistency_check(&f, &f.table, tols.reconstruction)?;
            if !check.ok {
                return Err(Error::InvalidInput(format!(
                    "family is not consistent (worst defect {:.3e})",
                    check.worst_defect
                )));
            }
            let q = family_to_povm(&f, tols)?;
            let idem = q
                .effects()
                .iter()
                .map(|e| (e * e - e).iter().map(|z| z.norm()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            #[derive(serde::Serialize)]
            struct FromFamilyReport {
                schema: &'static str,
                povm: GridPOVM,
                idempotency_defect: f64,
                /// true when every effect is a projection: the family came
                /// from a projection-valued measure
                idempotent: bool,
            }
            let report = FromFamilyReport {
                schema: "momenta-from-family/v1",
                idempotency_defect: idem,
                idempotent: idem <= 1e-10,
                povm: q,
            };
            match cfg.output {
                OutputKind::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
                _ => {
                    render::povm("reconstructed POVM", &report.povm);
                    println!(
                        "idempotent effects: {} (defect {:.3e})",
                        report.idempotent, report.idempotency_defect
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        PovmCommand::Compress { povm, basis } => {
            let q: GridPOVM = read_json(&povm)?;
            let v: VectorsFile = read_json(&basis)?;
            let basis: Vec<_> = v.vectors.iter().map(|f| f.as_dvector()).collect();
            let compressed = compress_povm(&q, &basis)?;
            match cfg.output {
                OutputKind::Json => {
                    println!("{}", serde_json::to_string_pretty(&compressed).unwrap())
                }
                _ => render::povm("compressed POVM", &compressed),
            }
            Ok(ExitCode::SUCCESS)
        }
        PovmCommand::Halfline { window } => {
            let (length, samples) = match window {
                Some(path) => {
                    let w: WindowFile = read_json(&path)?;
                    (w.length, w.samples)
                }
                None => {
                    let n = 1 << 14;
                    let length = 32.0;
                    let h = length / n as f64;
                    let samples = (0..n)
                        .map(|j| {
                            let x = j as f64 * h;
                            x * (-x).exp()
                        })
                        .collect();
                    (length, samples)
                }
            };
            let grid = cfg.grid.build()?;
            let out = halfline_momentum_measures(&samples, length, &grid)?;
            let h = length / samples.len() as f64;
            let window_norm_sq: f64 = samples.iter().map(|s| s * s).sum::<f64>() * h;
            let plancherel_defect =
                (out.total_mass - window_norm_sq).abs() / window_norm_sq.max(1e-300);
            let first_moment: f64 = grid
                .representatives()
                .iter()
                .zip(&out.masses)
                .map(|(&rep, &m)| rep * m)
                .sum();
            #[derive(serde::Serialize)]
            struct HalflineReport {
                schema: &'static str,
                total_mass: f64,
                plancherel_defect: f64,
                first_moment: f64,
                tail_mass_fraction: f64,
                tail_mass_warning: bool,
                truncation_warning: bool,
                masses: Vec<f64>,
            }
            let report = HalflineReport {
                schema: "momenta-halfline/v1",
                total_mass: out.total_mass,
                plancherel_defect,
                first_moment,
                tail_mass_fraction: out.tail_mass_fraction,
                tail_mass_warning: out.tail_mass_warning,
                truncation_warning: out.truncation_warning,
                masses: out.masses.clone(),
            };
            match cfg.output {
                OutputKind::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
                OutputKind::Csv => print!("{}", masses_csv(&grid, &out.masses)),
                OutputKind::Table => render::halfline(&grid, &report.masses, &|| {
                    println!(
                        "total mass {:.12} (Plancherel defect {:.3e}), first moment {:.3e}",
                        report.total_mass, report.plancherel_defect, report.first_moment
                    );
                    if report.truncation_warning {
                        println!("warning: window has not decayed at the truncation length");
                    }
                    if report.tail_mass_warning {
                        println!(
                            "warning: tail cells carry {:.3e} of the mass; their \
                             representatives are clamped",
                            report.tail_mass_fraction
                        );
                    }
                }),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, Error> {
    s.parse()
        .map_err(|_| Error::InvalidInput(format!("not a number: {s:?}")))
}
