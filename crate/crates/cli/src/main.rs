//! Command-line surface for the exact distance engine.
//!
//! Exit codes: 0 success, 1 verification-suite failures, 2 unreadable or
//! unparsable input documents, 3 validation failures (every violated
//! invariant is itemized), 4 internal defects (a certified optimum failed
//! re-verification, or the two distances disagreed).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dsd::format;
use dsd::lp::LpError;
use dsd::metrics::{self, MetricsError};
use dsd::model::{validate_instance, Instance, SemiMetric, ValidationError};
use dsd::rational::{decimal_approx, format_rational, to_f64_lossy};
use dsd::smoothness;
use dsd::verify::{self, SuiteOptions};

#[derive(Parser)]
#[command(
    name = "dsd",
    version,
    about = "Exact Dobrushin and Steif distances on finite product spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the distance(s) between the two distributions of an instance.
    Distance(DistanceArgs),
    /// Run the randomized exact identity-check suite.
    Verify(VerifyArgs),
    /// Partial Lipschitz table, norm, ball membership and c-transform of a function.
    Transform(TransformArgs),
    /// Generate a random valid instance file.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct DistanceArgs {
    /// Instance document to read.
    #[arg(long)]
    instance: PathBuf,
    /// Which metric to compute.
    #[arg(long, value_enum, default_value_t = Metric::Both)]
    metric: Metric,
    /// Include optimizing witnesses in the output.
    #[arg(long)]
    witness: bool,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    output: Output,
    /// Annotate with a floating-point cross-check of the exact values.
    #[arg(long)]
    float_check: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// First instance seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of seeds to run.
    #[arg(long, default_value_t = 200)]
    count: usize,
    /// Maximum number of sites per instance.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=4))]
    sites: u32,
    /// Fixed site sizes, e.g. `2,3` (overrides --sites).
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u32).range(1..=4))]
    points: Option<Vec<u32>>,
    /// Denominator bound for generated masses and metrics.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=1_000_000))]
    denom: u32,
    /// Resolution of the weight-simplex grid used by the checks.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=64))]
    grid: u32,
}

#[derive(Args)]
struct TransformArgs {
    /// Instance document defining the space (distributions are ignored).
    #[arg(long)]
    instance: PathBuf,
    /// Function document keyed by configuration labels.
    #[arg(long)]
    function: PathBuf,
    /// Site-weight document; induces the weighted cost.
    #[arg(long, conflicts_with = "cost")]
    weights: Option<PathBuf>,
    /// Explicit pair-cost document (may be asymmetric or negative).
    #[arg(long)]
    cost: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    output: Output,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    seed: u64,
    /// Maximum number of sites.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=4))]
    sites: u32,
    /// Fixed site sizes, e.g. `2,3` (overrides --sites).
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u32).range(1..=4))]
    points: Option<Vec<u32>>,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=1_000_000))]
    denom: u32,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    Dobrushin,
    Steif,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Structured,
}

enum Failure {
    /// Exit 1: suite checks failed.
    Checks,
    /// Exit 2: unreadable or unparsable input.
    Parse(String),
    /// Exit 3: validation failures, itemized.
    Validation(Vec<ValidationError>),
    /// Exit 4: internal defect with triage dump.
    Internal(String),
}

impl Failure {
    fn report(&self) -> ExitCode {
        match self {
            Failure::Checks => ExitCode::from(1),
            Failure::Parse(msg) => {
                eprintln!("parse error: {msg}");
                ExitCode::from(2)
            }
            Failure::Validation(errors) => {
                eprintln!("validation failed with {} violation(s):", errors.len());
                for e in errors {
                    eprintln!("  - {e}");
                }
                ExitCode::from(3)
            }
            Failure::Internal(msg) => {
                eprintln!("internal error: {msg}");
                ExitCode::from(4)
            }
        }
    }
}

impl From<MetricsError> for Failure {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::SpaceMismatch => {
                Failure::Validation(vec![ValidationError::ShapeMismatch {
                    detail: "inputs live on different product spaces".into(),
                }])
            }
            MetricsError::Lp(LpError::Certification { reason, dump }) => {
                Failure::Internal(format!("{reason}\n{dump}"))
            }
            other => Failure::Internal(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Distance(args) => cmd_distance(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Transform(args) => cmd_transform(args),
        Command::Generate(args) => cmd_generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => failure.report(),
    }
}

fn read_to_string(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Parse(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = read_to_string(path)?;
    let raw = format::parse_instance(&text).map_err(|e| Failure::Parse(e.to_string()))?;
    validate_instance(&raw).map_err(Failure::Validation)
}

fn cmd_distance(args: DistanceArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let dobrushin = if args.metric != Metric::Steif {
        Some(metrics::dobrushin_distance(&instance.mu, &instance.nu)?)
    } else {
        None
    };
    let steif = if args.metric != Metric::Dobrushin {
        Some(metrics::steif_distance(&instance.mu, &instance.nu)?)
    } else {
        None
    };

    if let (Some(d), Some(s)) = (&dobrushin, &steif) {
        if d.value != s.value {
            // A disagreement contradicts the identity the engine is built
            // around; dump both programs for triage.
            let mut dump = format!(
                "distance values disagree: dobrushin = {}, steif = {}\n",
                format_rational(&d.value),
                format_rational(&s.value)
            );
            if let Ok(p) = metrics::dobrushin_program(&instance.mu, &instance.nu) {
                let _ = write!(dump, "dobrushin program:\n{}", p.dump());
            }
            if let Ok(p) = metrics::steif_program(&instance.mu, &instance.nu) {
                let _ = write!(dump, "steif program:\n{}", p.dump());
            }
            return Err(Failure::Internal(dump));
        }
    }

    match args.output {
        Output::Structured => {
            print!(
                "{}",
                format::render_distance_report(
                    &instance.space,
                    dobrushin.as_ref(),
                    steif.as_ref(),
                    args.witness,
                )
            );
        }
        Output::Text => {
            let space = &instance.space;
            if let Some(d) = &dobrushin {
                println!(
                    "dobrushin = {} (~{})",
                    format_rational(&d.value),
                    decimal_approx(&d.value, format::DECIMAL_DIGITS)
                );
                if args.witness {
                    let weights = d
                        .witness_e
                        .weights()
                        .iter()
                        .enumerate()
                        .map(|(s, w)| format!("{} = {}", space.site(s).name(), format_rational(w)))
                        .collect::<Vec<_>>()
                        .join(", ");
                    println!("  witness weights: {weights}");
                    println!("  witness function:");
                    for (i, v) in d.witness_f.values().iter().enumerate() {
                        println!(
                            "    {} = {}",
                            space.label_of(&space.config_at(i)),
                            format_rational(v)
                        );
                    }
                }
            }
            if let Some(s) = &steif {
                println!(
                    "steif     = {} (~{})",
                    format_rational(&s.value),
                    decimal_approx(&s.value, format::DECIMAL_DIGITS)
                );
                if args.witness {
                    println!("  witness coupling:");
                    for (x, row) in s.witness_plan.plan().iter().enumerate() {
                        for (y, m) in row.iter().enumerate() {
                            if !dsd::rational::is_zero(m) {
                                println!(
                                    "    ({} -> {}) = {}",
                                    space.label_of(&space.config_at(x)),
                                    space.label_of(&space.config_at(y)),
                                    format_rational(m)
                                );
                            }
                        }
                    }
                }
            }
            if let (Some(d), Some(s)) = (&dobrushin, &steif) {
                println!("equal: {}", d.value == s.value);
            }
            if args.float_check {
                if let Some(d) = &dobrushin {
                    println!("float dobrushin ~ {:.12}", to_f64_lossy(&d.value));
                }
                if let Some(s) = &steif {
                    println!("float steif     ~ {:.12}", to_f64_lossy(&s.value));
                }
            }
        }
    }
    Ok(())
}

fn fixed_points(points: Option<Vec<u32>>) -> Result<Option<Vec<usize>>, Failure> {
    match points {
        None => Ok(None),
        Some(p) if (1..=4).contains(&p.len()) => {
            Ok(Some(p.into_iter().map(|n| n as usize).collect()))
        }
        Some(p) => Err(Failure::Parse(format!(
            "--points takes between 1 and 4 site sizes, got {}",
            p.len()
        ))),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let opts = SuiteOptions {
        base_seed: args.seed,
        count: args.count,
        max_sites: args.sites as usize,
        fixed_points: fixed_points(args.points)?,
        denominator_bound: args.denom,
        grid_resolution: args.grid,
        ..SuiteOptions::default()
    };
    let report = verify::run_suite(&opts);
    print!("{}", report.render());
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn cmd_transform(args: TransformArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let space = &instance.space;
    let function_text = read_to_string(&args.function)?;
    let f = format::parse_function(&function_text, space).map_err(Failure::Validation)?;

    let deltas = smoothness::partial_lipschitz_vector(&f);
    let norm = smoothness::dobrushin_norm(&f);

    // The cost the transform runs against: explicit matrix, or induced by
    // site weights, defaulting to uniform weights over the sites.
    let mut membership = None;
    let cost: SemiMetric = if let Some(path) = &args.cost {
        let text = read_to_string(path)?;
        format::parse_cost(&text, space).map_err(Failure::Validation)?
    } else {
        let weights = if let Some(path) = &args.weights {
            let text = read_to_string(path)?;
            format::parse_weights(&text, space).map_err(Failure::Validation)?
        } else {
            let n = space.site_count() as i64;
            dsd::model::SiteWeights::new(vec![
                dsd::rational::ratio(1, n);
                space.site_count()
            ])
            .expect("uniform weights lie in the simplex")
        };
        membership = Some(smoothness::is_weighted_lipschitz(&f, &weights));
        SemiMetric::from_weights(space, &weights)
    };
    let transformed = smoothness::c_transform(&f, &cost);

    match args.output {
        Output::Structured => {
            let mut out = format!("format = {}\n", format::FORMAT_VERSION);
            out.push_str(&format!("norm = \"{}\"\n", format_rational(&norm)));
            if let Some(member) = membership {
                out.push_str(&format!("in_ball = {member}\n"));
            }
            out.push_str("\n[deltas]\n");
            for (s, d) in deltas.iter().enumerate() {
                out.push_str(&format!(
                    "\"{}\" = \"{}\"\n",
                    space.site(s).name(),
                    format_rational(d)
                ));
            }
            out.push_str("\n[transform]\n");
            for (i, v) in transformed.values().iter().enumerate() {
                out.push_str(&format!(
                    "\"{}\" = \"{}\"\n",
                    space.label_of(&space.config_at(i)),
                    format_rational(v)
                ));
            }
            print!("{out}");
        }
        Output::Text => {
            println!("partial Lipschitz constants:");
            for (s, d) in deltas.iter().enumerate() {
                println!("  {} = {}", space.site(s).name(), format_rational(d));
            }
            println!("norm = {}", format_rational(&norm));
            if let Some(member) = membership {
                println!("lipschitz for weights: {member}");
            }
            println!("c-transform:");
            for (i, v) in transformed.values().iter().enumerate() {
                println!(
                    "  {} = {}",
                    space.label_of(&space.config_at(i)),
                    format_rational(v)
                );
            }
            if transformed == f {
                println!("fixed point: the function is 1-Lipschitz for this cost");
            }
        }
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let opts = SuiteOptions {
        base_seed: args.seed,
        max_sites: args.sites as usize,
        fixed_points: fixed_points(args.points)?,
        denominator_bound: args.denom,
        ..SuiteOptions::default()
    };
    let spec = verify::draw_instance_spec(args.seed, &opts);
    let instance = verify::generate_instance(&spec);
    let text = format::render_instance(&instance);
    match &args.out {
        Some(path) => fs::write(path, &text)
            .map_err(|e| Failure::Parse(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}
