//! `oospect`: design-flaw detection for MiniOO sources and facts files.
//!
//! `oospect analyze` builds a design model, evaluates detection strategies
//! over it and reports the suspects with their metric values. `oospect tune`
//! calibrates strategy thresholds against a labeled corpus.
//!
//! Exit codes: 0 success; 1 suspects found and `--fail-on-suspects` given;
//! 2 usage or parse errors (sources, facts, SOD files); 3 model validation
//! errors.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use oospect_core::catalog::{builtin_registry, find_entry, CatalogError};
use oospect_core::frontend::{
    load_facts, model_from_sources, save_facts, FactsError, FrontendError, SourceProgram,
};
use oospect_core::metrics::{compute_table, ALL_METRICS};
use oospect_core::model::DesignModel;
use oospect_core::strategy::{
    evaluate, lint_strategy, parse_strategies, LintWarning, StrategyAst, StrategyError,
    SuspectReport,
};
use oospect_core::tuning::{tune, Grid, LabeledCorpus, TunableStrategy, TuneError};
use oospect_core::EntityKind;

#[derive(Parser)]
#[command(name = "oospect", version, about = "Metric-based design-flaw detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a model, run detection strategies, report suspects.
    Analyze(AnalyzeArgs),
    /// Grid-search strategy thresholds against a labeled corpus.
    Tune(TuneArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// MiniOO source files.
    #[arg(long, value_name = "FILE", num_args = 1.., conflicts_with = "facts", required_unless_present = "facts")]
    src: Vec<PathBuf>,

    /// Facts file produced by --dump-facts or another front end.
    #[arg(long, value_name = "FILE")]
    facts: Option<PathBuf>,

    /// SOD strategy file; repeat for several.
    #[arg(long = "strategy", value_name = "FILE")]
    strategies: Vec<PathBuf>,

    /// Built-in strategy name (GodClass, DataClass, GodMethod) or `all`;
    /// repeat for several.
    #[arg(long = "builtin", value_name = "NAME")]
    builtins: Vec<String>,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Exit with code 1 when any strategy finds suspects.
    #[arg(long)]
    fail_on_suspects: bool,

    /// Save the extracted model as a facts file.
    #[arg(long, value_name = "FILE")]
    dump_facts: Option<PathBuf>,

    /// Print every metric table instead of running strategies.
    #[arg(long)]
    metrics_only: bool,
}

#[derive(Args)]
struct TuneArgs {
    /// Labeled corpus file (JSON).
    #[arg(long, value_name = "FILE")]
    corpus: PathBuf,

    /// SOD file with one strategy template containing $holes.
    #[arg(long, value_name = "FILE")]
    template: PathBuf,

    /// Grid file (JSON) with candidate values per hole.
    #[arg(long, value_name = "FILE")]
    grid: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// An error already annotated with the exit code it maps to.
struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { message: message.into(), code: 2 }
    }

    fn model(message: impl Into<String>) -> Self {
        CliError { message: message.into(), code: 3 }
    }
}

impl From<FrontendError> for CliError {
    fn from(err: FrontendError) -> Self {
        match &err {
            FrontendError::Model { .. } => CliError::model(err.to_string()),
            _ => CliError::usage(err.to_string()),
        }
    }
}

impl From<FactsError> for CliError {
    fn from(err: FactsError) -> Self {
        match &err {
            FactsError::Model { .. } => CliError::model(err.to_string()),
            _ => CliError::usage(err.to_string()),
        }
    }
}

impl From<StrategyError> for CliError {
    fn from(err: StrategyError) -> Self {
        CliError::usage(err.to_string())
    }
}

impl From<CatalogError> for CliError {
    fn from(err: CatalogError) -> Self {
        CliError::usage(err.to_string())
    }
}

impl From<TuneError> for CliError {
    fn from(err: TuneError) -> Self {
        CliError::usage(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => run_analyze(&args),
        Command::Tune(args) => run_tune(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn run_analyze(args: &AnalyzeArgs) -> Result<u8, CliError> {
    let model = match &args.facts {
        Some(path) => load_facts(path)?,
        None => model_from_sources(&SourceProgram::read_files(&args.src)?)?,
    };

    let diagnostics = model.validate();
    if !diagnostics.is_empty() {
        let mut message = String::from("model validation failed:");
        for diagnostic in &diagnostics {
            message.push_str(&format!("\n  {diagnostic}"));
        }
        return Err(CliError::model(message));
    }

    if let Some(path) = &args.dump_facts {
        save_facts(&model, path)?;
    }

    if args.metrics_only {
        let tables: Vec<_> =
            ALL_METRICS.iter().map(|metric| compute_table(&model, *metric)).collect();
        let rendered = match args.format {
            Format::Json => report::json_metrics(&tables),
            Format::Text => report::text_metrics(&tables),
        };
        write_output(args.output.as_deref(), &rendered)?;
        return Ok(0);
    }

    let strategies = collect_strategies(args)?;
    let mut reports: Vec<(SuspectReport, Vec<LintWarning>)> = Vec::new();
    for strategy in &strategies {
        let warnings = lint_strategy(strategy, target_population(&model, strategy.target_kind));
        let report = evaluate(&model, strategy)?;
        reports.push((report, warnings));
    }

    let rendered = match args.format {
        Format::Json => report::json_reports(&reports),
        Format::Text => report::text_reports(&reports),
    };
    write_output(args.output.as_deref(), &rendered)?;

    let any_suspects = reports.iter().any(|(r, _)| !r.suspects.is_empty());
    Ok(if any_suspects && args.fail_on_suspects { 1 } else { 0 })
}

/// Strategies from SOD files first (file order), then the selected
/// builtins, preserving the order given on the command line.
fn collect_strategies(args: &AnalyzeArgs) -> Result<Vec<StrategyAst>, CliError> {
    let mut strategies = Vec::new();
    for path in &args.strategies {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let parsed = parse_strategies(&text)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        strategies.extend(parsed);
    }

    let registry = builtin_registry();
    for name in &args.builtins {
        if name.eq_ignore_ascii_case("all") {
            strategies.extend(
                registry.iter().filter_map(|entry| entry.builtin_strategy.clone()),
            );
            continue;
        }
        let entry = find_entry(&registry, name)
            .ok_or_else(|| CatalogError::UnknownFlaw(name.clone()))?;
        let strategy = entry
            .builtin_strategy
            .as_ref()
            .ok_or_else(|| CatalogError::NoStrategy(entry.flaw_name.to_string()))?;
        strategies.push(strategy.clone());
    }

    if strategies.is_empty() {
        return Err(CliError::usage(
            "no strategies selected: pass --strategy, --builtin, or --metrics-only",
        ));
    }
    Ok(strategies)
}

/// Size of the data set a strategy's filters act on: the non-external
/// entities of its target kind.
fn target_population(model: &DesignModel, kind: EntityKind) -> usize {
    match kind {
        EntityKind::Class => model.classes().filter(|c| !c.is_external).count(),
        EntityKind::Method => model
            .methods()
            .filter(|m| model.class(&m.owner).is_some_and(|c| !c.is_external))
            .count(),
        EntityKind::Attribute => 0,
    }
}

fn run_tune(args: &TuneArgs) -> Result<u8, CliError> {
    let corpus = LabeledCorpus::load(&args.corpus)?;

    let template_text = std::fs::read_to_string(&args.template)
        .map_err(|e| CliError::usage(format!("{}: {e}", args.template.display())))?;
    let mut templates = oospect_core::strategy::parse_templates(&template_text)
        .map_err(|e| CliError::usage(format!("{}: {e}", args.template.display())))?;
    if templates.len() != 1 {
        return Err(CliError::usage(format!(
            "{}: expected exactly one strategy template, found {}",
            args.template.display(),
            templates.len()
        )));
    }
    let template = templates.pop().expect("length checked");

    let grid = Grid::load(&args.grid)?;
    let result = tune(&corpus, &TunableStrategy { template, grid })?;

    for (assignment, score) in &result.table {
        println!("{assignment}  score {score:.4}");
    }
    println!("winner: {}  score {:.4}", result.best, result.score);
    Ok(0)
}

fn write_output(path: Option<&std::path::Path>, rendered: &str) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, rendered)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}
