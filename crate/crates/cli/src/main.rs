use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use infocost::config::ScenarioConfig;
use infocost::plot::{render_svg, PlotSpec};
use infocost::scenarios::{run, ScenarioId};
use infocost::series::SeriesTable;
use infocost::verify::{run_suite, select, suite_names};

/// Information-cost bounds for few-level quantum systems.
#[derive(Debug, Parser)]
#[command(name = "infocost", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write series.csv, report.json and optionally plot.svg.
    Run(RunArgs),
    /// Run acceptance suites and print a pass/fail table.
    Verify {
        /// `all`, a scenario id, or one of identities, multipliers, conservation, degradation.
        #[arg(default_value = "all")]
        suite: String,
        /// Also write the results as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// List scenarios and verify suites.
    List,
    /// Render a series file as a stacked SVG line plot.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario id, used when no config file is given.
    #[arg(conflicts_with = "config", required_unless_present = "config")]
    scenario: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// `key=value` override; bare keys address params, `grid.*` and `output.*` the other sections.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Write plot.svg as well.
    #[arg(long)]
    plot: bool,
}

#[derive(Debug, Args)]
struct PlotArgs {
    series: PathBuf,
    #[arg(long, default_value = "plot.svg")]
    out: PathBuf,
    /// Abscissa column; defaults to the first column.
    #[arg(long)]
    x: Option<String>,
    /// Comma-separated columns for one panel; repeat for more panels.
    #[arg(long = "panel", required = true)]
    panels: Vec<String>,
    #[arg(long, default_value = "")]
    title: String,
}

enum Outcome {
    Pass,
    ChecksFailed,
}

fn load_config(args: &RunArgs) -> Result<ScenarioConfig> {
    let mut config = match (&args.config, &args.scenario) {
        (Some(path), _) => ScenarioConfig::read(path).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(id)) => ScenarioConfig::new(ScenarioId::parse(id)?),
        (None, None) => bail!("either a scenario id or --config is required"),
    };
    config.apply_overrides(args.overrides.iter().map(String::as_str))?;
    if let Some(n) = args.grid_points {
        config.apply_override(&format!("grid.n_points={n}"))?;
    }
    if args.plot {
        config.output.plot = true;
    }
    Ok(config)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_run(args: &RunArgs) -> Result<Outcome> {
    let config = load_config(args)?;
    let mut out = run(&config)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    write(&args.out.join("series.csv"), &out.series.to_csv())?;
    out.report.artifacts.push("series.csv".into());
    if config.output.plot {
        write(&args.out.join("plot.svg"), &render_svg(&out.series, &out.plot)?)?;
        out.report.artifacts.push("plot.svg".into());
    }
    out.report.artifacts.push("report.json".into());
    write(&args.out.join("report.json"), &(out.report.to_json() + "\n"))?;

    let r = &out.report;
    println!("{}: {} ({} rows) -> {}", r.scenario, if r.passed { "pass" } else { "FAIL" }, out.series.len(), args.out.display());
    for c in r.checks.iter().filter(|c| !c.passed) {
        eprintln!("check {} failed: {:e} {} {:e}", c.name, c.value, c.relation, c.threshold);
    }
    if !r.flags.is_empty() {
        println!("flags: {}", r.flags.join(", "));
    }
    Ok(if r.passed { Outcome::Pass } else { Outcome::ChecksFailed })
}

fn cmd_verify(suite: &str, json: Option<&Path>) -> Result<Outcome> {
    select(suite)?;
    let results = run_suite(suite)?;
    println!("{:>2}  {:<30} {:<6} {:>9}", "id", "criterion", "result", "seconds");
    for r in &results {
        println!("{:>2}  {:<30} {:<6} {:>9.3}", r.id, r.name, if r.passed { "pass" } else { "FAIL" }, r.seconds);
        for c in &r.checks {
            let mark = if c.passed { " " } else { "!" };
            println!("    {mark} {:<36} {:>12.4e} {} {:.4e}", c.name, c.value, c.relation, c.threshold);
        }
        if let Some(e) = &r.error {
            println!("    ! error: {e}");
        }
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    if let Some(path) = json {
        write(path, &(serde_json::to_string_pretty(&results)? + "\n"))?;
    }
    Ok(if passed == results.len() { Outcome::Pass } else { Outcome::ChecksFailed })
}

fn cmd_list() {
    println!("scenarios:");
    for id in ScenarioId::ALL {
        println!("  {:<18} {}", id.as_str(), id.description());
    }
    println!("verify suites: {}", suite_names().join(", "));
}

fn cmd_plot(args: &PlotArgs) -> Result<Outcome> {
    let series = SeriesTable::read(&args.series)?;
    let x = match &args.x {
        Some(x) => x.clone(),
        None => series.columns().first().cloned().context("series has no columns")?,
    };
    let panels: Vec<Vec<String>> =
        args.panels.iter().map(|p| p.split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect()).collect();
    let spec = PlotSpec { x, panels, title: args.title.clone() };
    write(&args.out, &render_svg(&series, &spec)?)?;
    println!("wrote {}", args.out.display());
    Ok(Outcome::Pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify { suite, json } => cmd_verify(suite, json.as_deref()),
        Command::List => {
            cmd_list();
            Ok(Outcome::Pass)
        }
        Command::Plot(args) => cmd_plot(args),
    };
    match outcome {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
