//! Game loops.
//!
//! Round order is fixed: the forecaster moves, nature sees that move and
//! commits its parameter, then the engine realizes the round. In the
//! classical game the engine draws two uniforms per round from the seeded
//! stream, first for the forecast and then for the outcome, so replays with
//! the same seed are bit-identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CalError, Result};
use crate::forecasters::{IntervalForecaster, PointForecaster};
use crate::grid::{CalState, Grid};
use crate::metrics::{ForecastAction, Round, Transcript};
use crate::natures::{GameIIView, GameINature, GameIINature, GameIView};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameMode {
    /// Randomized point forecasts, binary outcomes.
    BinaryI,
    /// Interval forecasts judged at the endpoint nearest a binary outcome.
    BinaryII,
    /// Interval forecasts with outcomes in `[0, 1]`, judged by threshold.
    BoundedII,
}

impl GameMode {
    pub fn label(&self) -> &'static str {
        match self {
            GameMode::BinaryI => "I",
            GameMode::BinaryII => "II",
            GameMode::BoundedII => "II-bounded",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "i" | "1" => Ok(GameMode::BinaryI),
            "II" | "ii" | "2" => Ok(GameMode::BinaryII),
            "II-bounded" | "ii-bounded" | "bounded" => Ok(GameMode::BoundedII),
            other => Err(CalError::Config(format!(
                "unknown game mode {other:?}; expected one of I, II, II-bounded"
            ))),
        }
    }
}

impl std::fmt::Display for GameMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Passed to observers after each round has been applied.
pub struct RoundEvent<'a> {
    /// Rounds played so far, including this one.
    pub t: u64,
    pub round: &'a Round,
    pub state: &'a CalState,
}

fn check_param(v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(CalError::OutOfUnitInterval(v))
    }
}

/// Classical game with an observer called after every round.
pub fn run_game_i<F>(
    forecaster: &mut dyn PointForecaster,
    nature: &mut dyn GameINature,
    grid: &Grid,
    horizon: u64,
    seed: u64,
    mut observer: F,
) -> Result<Transcript>
where
    F: FnMut(&RoundEvent<'_>),
{
    if horizon == 0 {
        return Err(CalError::ZeroHorizon);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transcript = Transcript::with_capacity(grid.clone(), horizon as usize);
    let mut state = CalState::new(grid.clone());
    for _ in 0..horizon {
        let u = forecaster.forecast(&state)?;
        let v = check_param(nature.play_i(&GameIView {
            grid,
            history: &transcript,
            state: &state,
            current: &u,
        }))?;
        let draw_forecast: f64 = rng.gen();
        let draw_outcome: f64 = rng.gen();
        let p = u.sample(draw_forecast);
        let y = if draw_outcome < v { 1.0 } else { 0.0 };
        let round = Round {
            action: ForecastAction::Point(p),
            realized: p,
            nature_param: v,
            outcome: y,
        };
        transcript.push(round)?;
        state.update(p, y)?;
        forecaster.observe(p, y);
        observer(&RoundEvent { t: state.t(), round: &round, state: &state });
    }
    Ok(transcript)
}

pub fn play_game_i(
    forecaster: &mut dyn PointForecaster,
    nature: &mut dyn GameINature,
    grid: &Grid,
    horizon: u64,
    seed: u64,
) -> Result<Transcript> {
    run_game_i(forecaster, nature, grid, horizon, seed, |_| {})
}

/// Interval game, binary (`bounded = false`) or bounded outcomes.
///
/// Binary: the engine draws `y ~ Bernoulli(v)` (one uniform per round) and
/// the judged forecast is the upper endpoint when `y = 1`. Bounded: the
/// outcome is `v` and the lower endpoint `i` is judged when `v <= r_i`.
pub fn run_game_ii<F>(
    forecaster: &mut dyn IntervalForecaster,
    nature: &mut dyn GameIINature,
    grid: &Grid,
    bounded: bool,
    horizon: u64,
    seed: u64,
    mut observer: F,
) -> Result<Transcript>
where
    F: FnMut(&RoundEvent<'_>),
{
    if horizon == 0 {
        return Err(CalError::ZeroHorizon);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transcript = Transcript::with_capacity(grid.clone(), horizon as usize);
    let mut state = CalState::new(grid.clone());
    for _ in 0..horizon {
        let action = forecaster.action(&state)?;
        if action.hi() >= grid.m() {
            return Err(CalError::InvalidInterval { lo: action.lo(), hi: action.hi() });
        }
        let v = check_param(nature.play_ii(&GameIIView {
            grid,
            history: &transcript,
            state: &state,
            action,
        }))?;
        let (outcome, realized) = if bounded {
            let judged = if v <= grid.right(action.lo()) { action.lo() } else { action.hi() };
            (v, judged)
        } else {
            let draw: f64 = rng.gen();
            if draw < v {
                (1.0, action.hi())
            } else {
                (0.0, action.lo())
            }
        };
        let round = Round {
            action: ForecastAction::Interval(action),
            realized,
            nature_param: v,
            outcome,
        };
        transcript.push(round)?;
        state.update(realized, outcome)?;
        forecaster.observe(realized, outcome);
        observer(&RoundEvent { t: state.t(), round: &round, state: &state });
    }
    Ok(transcript)
}

pub fn play_game_ii(
    forecaster: &mut dyn IntervalForecaster,
    nature: &mut dyn GameIINature,
    grid: &Grid,
    horizon: u64,
    seed: u64,
) -> Result<Transcript> {
    run_game_ii(forecaster, nature, grid, false, horizon, seed, |_| {})
}

pub fn play_game_ii_bounded(
    forecaster: &mut dyn IntervalForecaster,
    nature: &mut dyn GameIINature,
    grid: &Grid,
    horizon: u64,
) -> Result<Transcript> {
    run_game_ii(forecaster, nature, grid, true, horizon, 0, |_| {})
}
