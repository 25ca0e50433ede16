use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use anglebisect::engine::{refine, track_upsilon, AngleMode, InitialShape, RefinementRun, Retention};
use anglebisect::report::{RefinementReport, UpsilonReport};
use anglebisect::svg::{render_generation, SVG_DEPTH_LIMIT};
use anglebisect::symbolic::BaseAngles;
use anglebisect::verify::{run_suite, SuiteConfig};
use anglebisect::{Error, ProcedureKind};

#[derive(Parser)]
#[command(name = "anglebisect", version, about = "Triangle bisection refinement and property checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Refine a triangle and write per-generation statistics.
    Refine(RefineArgs),
    /// Run the property-check suite.
    Verify(VerifyArgs),
    /// Exact angles along the lineage of the smallest initial angle.
    Upsilon(UpsilonArgs),
    /// Cumulative similarity-class counts per generation.
    Classes(ClassesArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ShapeArgs {
    /// Three angles in degrees, e.g. 60,60,60 or 121/2,119/2,60.
    #[arg(long)]
    angles: Option<String>,
    /// Three side lengths.
    #[arg(long)]
    sides: Option<String>,
}

impl ShapeArgs {
    fn shape(&self) -> anglebisect::Result<InitialShape> {
        match (&self.angles, &self.sides) {
            (Some(a), _) => Ok(InitialShape::Angles(BaseAngles::parse(a)?)),
            (_, Some(s)) => Ok(InitialShape::Sides(InitialShape::parse_sides(s)?)),
            _ => unreachable!("clap requires one of the group"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Numeric,
}

#[derive(Clone, Copy, ValueEnum)]
enum RetainArg {
    FullTree,
    Streaming,
}

#[derive(Args)]
struct RefineArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value = "largest-angle")]
    procedure: ProcedureKind,
    #[arg(long, short = 'n')]
    iterations: u32,
    /// Longest side of a triangle given by angles.
    #[arg(long, default_value_t = 1.0, conflicts_with = "sides")]
    scale: f64,
    /// Defaults to exact for angle input and numeric for side input.
    #[arg(long)]
    mode: Option<ModeArg>,
    /// Defaults to full-tree when drawing SVG, streaming otherwise.
    #[arg(long)]
    retain: Option<RetainArg>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Draws the last generation.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 8)]
    depth: u32,
    #[arg(long, default_value_t = 1000)]
    sweep: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "verify-report.json")]
    report: PathBuf,
}

#[derive(Args)]
struct UpsilonArgs {
    #[arg(long)]
    angles: String,
    #[arg(long, default_value_t = 10)]
    depth: u32,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ClassesArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value = "largest-angle")]
    procedure: ProcedureKind,
    #[arg(long, short = 'n')]
    iterations: u32,
    /// First generation included in the count.
    #[arg(long, default_value_t = 0)]
    from: u32,
}

// Stdout writes surface as errors so a closed pipe ends the run quietly.
macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout().lock(), $($arg)*)?
    };
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Refine(args) => cmd_refine(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Upsilon(args) => cmd_upsilon(args),
        Command::Classes(args) => cmd_classes(args),
    };
    match outcome {
        Ok(code) => code,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_geometric() {
        3
    } else if matches!(e, Error::Io(_) | Error::Serialization(_)) {
        1
    } else {
        2
    }
}

fn cmd_refine(args: RefineArgs) -> anglebisect::Result<ExitCode> {
    let mut run = RefinementRun::new(args.shape.shape()?, args.procedure, args.iterations).with_scale(args.scale);
    if let Some(mode) = args.mode {
        run = run.with_mode(match mode {
            ModeArg::Exact => AngleMode::ExactBase,
            ModeArg::Numeric => AngleMode::Numeric,
        });
    }
    let retain = match args.retain {
        Some(RetainArg::FullTree) => Retention::FullTree,
        Some(RetainArg::Streaming) => Retention::Streaming,
        None if args.svg.is_some() => Retention::FullTree,
        None => Retention::Streaming,
    };
    run = run.with_retention(retain);
    if let Some(w) = args.workers {
        run = run.with_workers(w);
    }
    if args.svg.is_some() {
        if retain == Retention::Streaming {
            return Err(Error::InvalidRun("--svg needs --retain full-tree".into()));
        }
        if args.iterations > SVG_DEPTH_LIMIT {
            return Err(Error::DepthLimit {
                depth: args.iterations,
                limit: SVG_DEPTH_LIMIT,
                mode: "svg rendering",
            });
        }
    }

    let result = refine(&run)?;
    let report = RefinementReport::new(&run, &result);
    let mut wrote = false;
    if let Some(path) = &args.json {
        fs::write(path, report.to_json()?)?;
        wrote = true;
    }
    if let Some(path) = &args.csv {
        report.write_csv(fs::File::create(path)?)?;
        wrote = true;
    }
    if let Some(path) = &args.svg {
        fs::write(path, render_generation(&result, args.iterations)?)?;
        wrote = true;
    }
    if !wrote {
        out!("{}", report.to_json()?);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> anglebisect::Result<ExitCode> {
    let report = run_suite(SuiteConfig {
        depth: args.depth,
        sweep_size: args.sweep,
        seed: args.seed,
    })?;
    fs::write(&args.report, report.to_json()?)?;
    for check in &report.checks {
        out!(
            "{} {:<42} population {:>8}  worst margin {:+.3e}  tolerance {:.0e}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.population,
            check.worst_margin,
            check.tolerance
        );
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    out!(
        "{} of {} checks passed; report written to {}",
        report.checks.len() - failed,
        report.checks.len(),
        args.report.display()
    );
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_upsilon(args: UpsilonArgs) -> anglebisect::Result<ExitCode> {
    let base = BaseAngles::parse(&args.angles)?;
    let steps = track_upsilon(&base, args.depth)?;
    let report = UpsilonReport::new(&base, &steps);
    match &args.json {
        Some(path) => fs::write(path, report.to_json()?)?,
        None => {
            for row in &report.steps {
                out!(
                    "{:>3}  theta {:>14}  phi {:>14}  gamma {:>10}  theta = {}",
                    row.n, row.theta_deg, row.phi_deg, row.gamma_deg, row.theta_form
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_classes(args: ClassesArgs) -> anglebisect::Result<ExitCode> {
    if args.from > args.iterations {
        return Err(Error::InvalidRun(format!(
            "--from {} is past the last generation {}",
            args.from, args.iterations
        )));
    }
    let run = RefinementRun::new(args.shape.shape()?, args.procedure, args.iterations);
    let result = refine(&run)?;
    for (n, count) in result.cumulative_classes(args.from).iter().enumerate().skip(args.from as usize) {
        out!("{n} {count}");
    }
    Ok(ExitCode::SUCCESS)
}
