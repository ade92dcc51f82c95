use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use potc_core::approachability::{
    expected_reward, minimal_approachability_check, mixed_approachability_witness,
    optimal_supports, response_satisfy, val_mixed, val_pure, val_star, DirectionGame,
};
use potc_core::engine::GameMode;
use potc_core::harness::{
    log_checkpoints, parse_seeds, parse_sweep, rates_from_rows, read_csv, run_experiment,
    ExperimentConfig, RunResult, OUT_DIR_ENV,
};
use potc_core::{CalError, Grid, Result};

#[derive(Parser)]
#[command(name = "potc", version, about = "Calibration games on a finite forecast grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one forecaster against one nature over many seeds.
    Simulate(SimulateArgs),
    /// Run every matchup listed in a key = value config file.
    Sweep {
        config: PathBuf,
        /// Output directory; overrides the file and the environment.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Query the direction games behind approachability.
    Approach(ApproachArgs),
    /// Fit power-law rates from a results CSV.
    Rate { csv: PathBuf },
}

#[derive(Args)]
struct SimulateArgs {
    /// I, II or II-bounded.
    #[arg(long)]
    game: String,
    #[arg(long)]
    forecaster: String,
    #[arg(long)]
    nature: String,
    #[arg(long)]
    m: usize,
    /// Last checkpoint; earlier ones are log-spaced from 10.
    #[arg(long, default_value_t = 100_000)]
    max_t: u64,
    /// `a..b` or a comma list.
    #[arg(long, default_value = "0..10")]
    seeds: String,
    /// Output directory (default: $POTC_OUT_DIR, else ./results).
    #[arg(long)]
    out: Option<PathBuf>,
    /// First epoch length of PI-F99.
    #[arg(long, default_value_t = 1000)]
    t0: u64,
    /// Multiplier on the c1 constant of the PI-F99 initialization length.
    #[arg(long, default_value_t = 1.0)]
    kk_scale: f64,
    /// Checkpoints per decade.
    #[arg(long, default_value_t = 4)]
    per_decade: u32,
}

#[derive(Args)]
struct ApproachArgs {
    #[arg(long)]
    m: usize,
    /// Direction as a comma list of m numbers.
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    /// Report on the direction (-1, ..., -1, 1).
    #[arg(long)]
    witness: bool,
    /// Smallest ℓ1 norm forecasts can force against v = 1/m.
    #[arg(long)]
    minimal: bool,
    /// Forecast distribution answering nature's v.
    #[arg(long)]
    response: Option<f64>,
}

fn default_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn print_result(r: &RunResult) {
    let c = &r.config;
    println!(
        "{} {} vs {} m={} seeds={} eps={}",
        c.game,
        c.forecaster,
        c.nature,
        c.m,
        c.seeds.len(),
        r.epsilon
    );
    println!("{:>10} {:>14} {:>14} {:>14}", "T", "mean_ce", "mean_eps_ce", "T*eps_ce");
    for row in &r.aggregate {
        println!(
            "{:>10} {:>14.6e} {:>14.6e} {:>14.6}",
            row.t,
            row.mean_ce,
            row.mean_eps_ce,
            row.t as f64 * row.mean_eps_ce
        );
    }
    println!("eps_ce slope: {}", r.eps_ce_rate);
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut c = ExperimentConfig::new(GameMode::parse(&a.game)?, &a.forecaster, &a.nature, a.m, a.max_t);
    if a.max_t == 0 {
        return Err(CalError::ZeroHorizon);
    }
    c.checkpoints = log_checkpoints(a.max_t, a.per_decade.max(1));
    c.seeds = parse_seeds(&a.seeds)?;
    c.t0 = a.t0;
    c.kk_scale = a.kk_scale;
    c.out = Some(default_out_dir(a.out));
    let r = run_experiment(&c)?;
    print_result(&r);
    Ok(())
}

fn sweep(path: PathBuf, out: Option<PathBuf>) -> Result<()> {
    let text = std::fs::read_to_string(&path)?;
    let mut configs = parse_sweep(&text)?;
    for c in &mut configs {
        if out.is_some() || c.out.is_none() {
            c.out = Some(default_out_dir(out.clone()));
        }
    }
    for c in &configs {
        let r = run_experiment(c)?;
        print_result(&r);
        println!();
    }
    Ok(())
}

fn parse_q(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| CalError::Config(format!("cannot parse direction entry {x:?}")))
        })
        .collect()
}

fn approach(a: ApproachArgs) -> Result<()> {
    let grid = Grid::new(a.m)?;
    let mut out = serde_json::Map::new();
    if let Some(q) = &a.q {
        let game = DirectionGame::new(grid.clone(), parse_q(q)?)?;
        let sol = val_mixed(&game);
        let (x, y) = optimal_supports(&game);
        let one_based: Vec<usize> = x.iter().map(|i| i + 1).collect();
        out.insert(
            "direction".into(),
            serde_json::json!({
                "q": game.q(),
                "val": sol.value,
                "val_star": val_star(&game, &x, &y)?,
                "val_pure": val_pure(&game),
                "forecaster_strategy": sol.forecaster_strategy.weights(),
                "nature_best_responses": sol.nature_best_responses,
                "x_star": one_based,
                "y_star": y,
            }),
        );
    }
    if a.witness {
        let report = mixed_approachability_witness(&grid)?;
        let mut w = serde_json::to_value(&report)?;
        w["x_star"] = serde_json::json!(report.x_star.iter().map(|i| i + 1).collect::<Vec<_>>());
        out.insert("witness".into(), w);
    }
    if a.minimal {
        out.insert("minimal".into(), serde_json::to_value(minimal_approachability_check(&grid))?);
    }
    if let Some(v) = a.response {
        let u = response_satisfy(&grid, v)?;
        let r = expected_reward(&grid, &u, v);
        out.insert(
            "response".into(),
            serde_json::json!({
                "v": v,
                "forecast": u.weights(),
                "expected_reward": r.components(),
                "l1_norm": r.l1_norm(),
                "epsilon": grid.epsilon(),
            }),
        );
    }
    if out.is_empty() {
        return Err(CalError::Config(
            "approach needs at least one of --q, --witness, --minimal, --response".into(),
        ));
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn rate(path: PathBuf) -> Result<()> {
    let rows = read_csv(std::fs::File::open(&path)?)?;
    if rows.is_empty() {
        return Err(CalError::Config(format!("{} has no data rows", path.display())));
    }
    for m in rates_from_rows(&rows) {
        let (game, f, n, mm) = &m.key;
        println!("{game} {f} vs {n} m={mm}: eps_ce slope {}", m.eps_ce_rate);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep { config, out } => sweep(config, out),
        Command::Approach(a) => approach(a),
        Command::Rate { csv } => rate(csv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
