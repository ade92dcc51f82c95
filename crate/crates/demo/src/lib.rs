//! Browser bindings: one seeded run as a rate curve, and direction-game
//! queries. Each call returns a JSON string.

use potc_core::approachability::{
    mixed_approachability_witness, optimal_supports, val_mixed, val_pure, val_star, DirectionGame,
};
use potc_core::engine::GameMode;
use potc_core::harness::{estimate_rate, log_checkpoints, run_seed, ExperimentConfig};
use potc_core::Grid;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Longest run the page may request.
pub const MAX_ROUNDS: u64 = 2_000_000;

/// Runs one seed and returns the checkpoints with `T`, `CE_T`, `ε-CE_T`
/// and `T ε-CE_T`, plus the final per-bin counts and means.
pub fn simulate_json(
    game: &str,
    forecaster: &str,
    nature: &str,
    m: usize,
    max_t: u64,
    seed: u64,
) -> Result<String, String> {
    if max_t == 0 || max_t > MAX_ROUNDS {
        return Err(format!("max_t must lie in 1..={MAX_ROUNDS}"));
    }
    let mut c = ExperimentConfig::new(GameMode::parse(game).map_err(|e| e.to_string())?, forecaster, nature, m, max_t);
    c.checkpoints = log_checkpoints(max_t, 8);
    c.seeds = vec![seed];
    // Desk-scale PI-F99 so its initialization fits a browser-sized run.
    c.kk_scale = 0.1;
    // Sequential on purpose: the browser has no thread pool.
    let records = run_seed(&c, seed).map_err(|e| e.to_string())?;
    let points: Vec<_> = records
        .iter()
        .map(|p| json!({ "t": p.t, "ce": p.ce, "eps_ce": p.eps_ce, "t_eps_ce": p.t as f64 * p.eps_ce }))
        .collect();
    let series: Vec<(f64, f64)> = records.iter().map(|p| (p.t as f64, p.eps_ce)).collect();
    let rate = estimate_rate(&series);
    let last = records.last().ok_or("no checkpoints")?;
    Ok(json!({
        "epsilon": Grid::new(m).map_err(|e| e.to_string())?.epsilon(),
        "points": points,
        "counts": last.counts,
        "means": last.means,
        "slope": rate.slope(),
        "rate": rate.to_string(),
    })
    .to_string())
}

/// Values of the direction game for `q` given as a comma list; an empty
/// list selects the witness direction `(-1, ..., -1, 1)`.
pub fn direction_json(m: usize, q: &str) -> Result<String, String> {
    let grid = Grid::new(m).map_err(|e| e.to_string())?;
    let q: Vec<f64> = if q.trim().is_empty() {
        mixed_approachability_witness(&grid).map_err(|e| e.to_string())?.q
    } else {
        q.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("cannot parse {x:?}")))
            .collect::<Result<_, _>>()?
    };
    let game = DirectionGame::new(grid, q).map_err(|e| e.to_string())?;
    let sol = val_mixed(&game);
    let (x, y) = optimal_supports(&game);
    let vs = val_star(&game, &x, &y).map_err(|e| e.to_string())?;
    Ok(json!({
        "q": game.q(),
        "val": sol.value,
        "val_star": vs,
        "val_pure": val_pure(&game),
        "strategy": sol.forecaster_strategy.weights(),
        "x_star": x.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "y_star": y,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn simulate(
    game: &str,
    forecaster: &str,
    nature: &str,
    m: usize,
    max_t: u32,
    seed: u32,
) -> Result<String, JsError> {
    simulate_json(game, forecaster, nature, m, max_t as u64, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn direction(m: usize, q: &str) -> Result<String, JsError> {
    direction_json(m, q).map_err(|e| JsError::new(&e))
}
