use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use starflow::harness::{emit_outputs, load_config, run_experiment, ExperimentConfig, Mode, RunReport};
use starflow::Verdict;

const DEFAULT_OUT: &str = "starflow-out";

#[derive(Parser)]
#[command(version, about = "Mean curvature flow of star-shaped radial graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow on every grid and write diagnostics, snapshots and the report.
    Simulate(RunArgs),
    /// Run the full check suite; the exit code reflects the verdicts.
    Verify(RunArgs),
    /// Residual refinement study on short runs only.
    Convergence(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory [default: config `output_dir`, then $STARFLOW_OUT_DIR, then ./starflow-out]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated ascending grid sizes.
    #[arg(long, value_delimiter = ',')]
    grids: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
}

fn load(args: &RunArgs) -> starflow::Result<ExperimentConfig> {
    let mut config = load_config(&args.config)?;
    if let Some(grids) = &args.grids {
        config = config.with_grids(grids.clone())?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn out_dir(args: &RunArgs, config: &ExperimentConfig) -> Option<PathBuf> {
    args.out
        .clone()
        .or_else(|| config.output_dir.clone())
        .or_else(|| std::env::var_os("STARFLOW_OUT_DIR").map(PathBuf::from))
}

fn print_verdicts(report: &RunReport) {
    for v in &report.verdicts {
        let tag = match v.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "N/A ",
        };
        let margin = v.margin.map_or_else(|| "-".to_string(), |m| format!("{m:.3e}"));
        println!("{tag}  {:<34} margin {margin:>11}  {}", v.id, v.description);
    }
    for e in &report.authoritative().errors {
        eprintln!("error [N={}] {}: {}", report.authoritative().nodes, e.stage, e.message);
    }
}

fn write(report: &RunReport, dir: &Path) -> starflow::Result<()> {
    for path in emit_outputs(report, dir)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn execute(command: &Command) -> starflow::Result<i32> {
    let (args, mode, always_write) = match command {
        Command::Simulate(a) => (a, Mode::Full, true),
        Command::Verify(a) => (a, Mode::Full, false),
        Command::Convergence(a) => (a, Mode::Convergence, false),
    };
    let config = load(args)?;
    let start = Instant::now();
    let report = run_experiment(&config, mode);
    eprintln!(
        "{}: {} grid(s) in {:.2} s",
        report.experiment_id,
        config.grids.len(),
        start.elapsed().as_secs_f64()
    );
    if let Some(b) = report.authoritative().blowup_time() {
        println!("blow-up time (N = {}): {b:.6}", config.finest_grid());
    }
    if mode == Mode::Convergence {
        let t = &report.convergence;
        for (i, n) in t.nodes.iter().enumerate() {
            let show = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"));
            println!(
                "N = {n:>5}  residual_f {:>10}  residual_a {:>10}  identity {:>10}",
                show(t.residual_f[i]),
                show(t.residual_a[i]),
                show(t.identity[i])
            );
        }
        let show = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"));
        println!(
            "fitted orders: residual_f {}  residual_a {}  identity {}",
            show(t.order_f),
            show(t.order_a),
            show(t.order_identity)
        );
    }
    print_verdicts(&report);
    match out_dir(args, &config) {
        Some(dir) => write(&report, &dir)?,
        None if always_write => write(&report, Path::new(DEFAULT_OUT))?,
        None => {}
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
