//! Strategies for nature.
//!
//! Every nature commits to a parameter `v ∈ [0, 1]` each round. In the
//! binary games the engine then draws `y ~ Bernoulli(v)`; in the bounded
//! interval game `v` itself is the outcome.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forecasters::{IntervalAction, PointForecastDistribution};
use crate::grid::{CalState, Grid};
use crate::metrics::{scaled_calibration_error, Transcript};

/// What nature sees in the classical game: the realized history and the
/// forecaster's current distribution, but not the draw from it.
pub struct GameIView<'a> {
    pub grid: &'a Grid,
    pub history: &'a Transcript,
    pub state: &'a CalState,
    pub current: &'a PointForecastDistribution,
}

/// What nature sees in the interval game: the history and the announced
/// interval for the current round.
pub struct GameIIView<'a> {
    pub grid: &'a Grid,
    pub history: &'a Transcript,
    pub state: &'a CalState,
    pub action: IntervalAction,
}

impl GameIView<'_> {
    /// One-based index of the round being played.
    pub fn round(&self) -> u64 {
        self.state.t() + 1
    }
}

impl GameIIView<'_> {
    pub fn round(&self) -> u64 {
        self.state.t() + 1
    }
}

pub trait GameINature: Send {
    fn name(&self) -> String;
    fn play_i(&mut self, view: &GameIView<'_>) -> f64;
}

pub trait GameIINature: Send {
    fn name(&self) -> String;
    fn play_ii(&mut self, view: &GameIIView<'_>) -> f64;
}

/// Plays the side opposite to the forecast: `v = 1` when the forecast is at
/// most 1/2. Randomized forecasts are judged by their mean.
#[derive(Debug, Clone, Default)]
pub struct Punisher;

impl GameINature for Punisher {
    fn name(&self) -> String {
        "punisher".into()
    }

    fn play_i(&mut self, view: &GameIView<'_>) -> f64 {
        let forecast = match view.current.as_point_mass() {
            Some(i) => view.grid.midpoint(i),
            None => view.current.mean(view.grid),
        };
        punisher_response(forecast)
    }
}

pub fn punisher_response(forecast: f64) -> f64 {
    if forecast <= 0.5 {
        1.0
    } else {
        0.0
    }
}

/// Fixed Bernoulli bias every round.
#[derive(Debug, Clone)]
pub struct BernoulliNature {
    p: f64,
}

impl BernoulliNature {
    pub fn new(p: f64) -> crate::Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(crate::CalError::OutOfUnitInterval(p));
        }
        Ok(Self { p })
    }
}

impl GameINature for BernoulliNature {
    fn name(&self) -> String {
        format!("bernoulli:{}", self.p)
    }

    fn play_i(&mut self, _view: &GameIView<'_>) -> f64 {
        self.p
    }
}

impl GameIINature for BernoulliNature {
    fn name(&self) -> String {
        GameINature::name(self)
    }

    fn play_ii(&mut self, _view: &GameIIView<'_>) -> f64 {
        self.p
    }
}

/// Plays `v = 1/m`, the common endpoint of the first two bins.
#[derive(Debug, Clone, Default)]
pub struct MidpointAdversary;

impl GameINature for MidpointAdversary {
    fn name(&self) -> String {
        "midpoint".into()
    }

    fn play_i(&mut self, view: &GameIView<'_>) -> f64 {
        1.0 / view.grid.m() as f64
    }
}

impl GameIINature for MidpointAdversary {
    fn name(&self) -> String {
        "midpoint".into()
    }

    fn play_ii(&mut self, view: &GameIIView<'_>) -> f64 {
        1.0 / view.grid.m() as f64
    }
}

/// Constant outcome parameter.
#[derive(Debug, Clone)]
pub struct ConstantNature {
    pub value: f64,
}

impl GameINature for ConstantNature {
    fn name(&self) -> String {
        format!("constant:{}", self.value)
    }

    fn play_i(&mut self, _view: &GameIView<'_>) -> f64 {
        self.value
    }
}

impl GameIINature for ConstantNature {
    fn name(&self) -> String {
        GameINature::name(self)
    }

    fn play_ii(&mut self, _view: &GameIIView<'_>) -> f64 {
        self.value
    }
}

/// 0, 1, 0, 1, ...
#[derive(Debug, Clone, Default)]
pub struct Alternating;

impl GameINature for Alternating {
    fn name(&self) -> String {
        "alternating".into()
    }

    fn play_i(&mut self, view: &GameIView<'_>) -> f64 {
        ((view.round() + 1) % 2) as f64
    }
}

impl GameIINature for Alternating {
    fn name(&self) -> String {
        "alternating".into()
    }

    fn play_ii(&mut self, view: &GameIIView<'_>) -> f64 {
        ((view.round() + 1) % 2) as f64
    }
}

/// Independent uniform draws of `v` from the nature's own stream.
#[derive(Debug, Clone)]
pub struct UniformValue {
    rng: ChaCha8Rng,
}

impl UniformValue {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl GameINature for UniformValue {
    fn name(&self) -> String {
        "uniform-v".into()
    }

    fn play_i(&mut self, _view: &GameIView<'_>) -> f64 {
        self.rng.gen::<f64>()
    }
}

impl GameIINature for UniformValue {
    fn name(&self) -> String {
        "uniform-v".into()
    }

    fn play_ii(&mut self, _view: &GameIIView<'_>) -> f64 {
        self.rng.gen::<f64>()
    }
}

/// Bounded-game probe of the threshold: plays `r_lo + δ` and `r_lo - δ` on
/// alternate rounds, where `r_lo` is the right endpoint of the lower bin
/// of the announced interval. With `δ = 0` it sits exactly on the threshold.
#[derive(Debug, Clone)]
pub struct BoundaryProbe {
    pub delta: f64,
}

impl GameIINature for BoundaryProbe {
    fn name(&self) -> String {
        format!("probe:{}", self.delta)
    }

    fn play_ii(&mut self, view: &GameIIView<'_>) -> f64 {
        let r = view.grid.right(view.action.lo());
        let v = if view.round() % 2 == 1 { r + self.delta } else { r - self.delta };
        v.clamp(0.0, 1.0)
    }
}

/// Depth-1 adversary: picks the binary outcome that maximizes the
/// ε-calibration error after this round, ties going to 1.
#[derive(Debug, Clone, Default)]
pub struct Greedy;

/// ε-CE after appending outcome `y` to bin `p`, given `T * CE_T`.
fn eps_ce_after(state: &CalState, scaled: f64, p: usize, y: f64) -> f64 {
    let g = state.grid();
    let b = state.bin(p);
    let gap = b.n as f64 * g.midpoint(p) - b.sum;
    let next = scaled - gap.abs() + (gap + g.midpoint(p) - y).abs();
    (next / (state.t() + 1) as f64 - g.epsilon()).max(0.0)
}

/// Expected next-round ε-CE for outcome `y` when the forecast is drawn from `u`.
pub fn greedy_objective_i(state: &CalState, u: &PointForecastDistribution, y: f64) -> f64 {
    let scaled = scaled_calibration_error(state);
    u.support()
        .map(|p| u.weights()[p] * eps_ce_after(state, scaled, p, y))
        .sum()
}

/// Next-round ε-CE for outcome `y` under the closest-endpoint rule.
pub fn greedy_objective_ii(state: &CalState, action: IntervalAction, y: f64) -> f64 {
    let scaled = scaled_calibration_error(state);
    let p = if y >= 0.5 { action.hi() } else { action.lo() };
    eps_ce_after(state, scaled, p, y)
}

impl GameINature for Greedy {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn play_i(&mut self, view: &GameIView<'_>) -> f64 {
        let one = greedy_objective_i(view.state, view.current, 1.0);
        let zero = greedy_objective_i(view.state, view.current, 0.0);
        if zero > one {
            0.0
        } else {
            1.0
        }
    }
}

impl GameIINature for Greedy {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn play_ii(&mut self, view: &GameIIView<'_>) -> f64 {
        let one = greedy_objective_ii(view.state, view.action, 1.0);
        let zero = greedy_objective_ii(view.state, view.action, 0.0);
        if zero > one {
            0.0
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view_i<'a>(
        grid: &'a Grid,
        history: &'a Transcript,
        state: &'a CalState,
        current: &'a PointForecastDistribution,
    ) -> GameIView<'a> {
        GameIView { grid, history, state, current }
    }

    #[test]
    fn punisher_sides() {
        assert_eq!(punisher_response(0.25), 1.0);
        assert_eq!(punisher_response(0.75), 0.0);
        assert_eq!(punisher_response(0.5), 1.0);
        let g = Grid::new(2).unwrap();
        let tr = Transcript::new(g.clone());
        let s = CalState::new(g.clone());
        let u = PointForecastDistribution::point_mass(2, 1);
        assert_eq!(Punisher.play_i(&view_i(&g, &tr, &s, &u)), 0.0);
    }

    #[test]
    fn midpoint_values() {
        for (m, v) in [(2, 0.5), (5, 0.2)] {
            let g = Grid::new(m).unwrap();
            let tr = Transcript::new(g.clone());
            let s = CalState::new(g.clone());
            let u = PointForecastDistribution::uniform(m);
            assert_eq!(MidpointAdversary.play_i(&view_i(&g, &tr, &s, &u)), v);
        }
    }

    #[test]
    fn bernoulli_range() {
        assert!(BernoulliNature::new(1.2).is_err());
        assert!(BernoulliNature::new(-0.1).is_err());
        assert!(BernoulliNature::new(0.0).is_ok());
    }

    #[test]
    fn greedy_ii_first_round() {
        let g = Grid::new(2).unwrap();
        let s = CalState::new(g.clone());
        let a = IntervalAction::point(0);
        assert_eq!(greedy_objective_ii(&s, a, 1.0), 0.5);
        assert_eq!(greedy_objective_ii(&s, a, 0.0), 0.0);
        let tr = Transcript::new(g.clone());
        let view = GameIIView { grid: &g, history: &tr, state: &s, action: a };
        assert_eq!(Greedy.play_ii(&view), 1.0);
    }

    #[test]
    fn greedy_i_matches_punisher_against_constant_low_bin() {
        let g = Grid::new(2).unwrap();
        let mut s = CalState::new(g.clone());
        let tr = Transcript::new(g.clone());
        let u = PointForecastDistribution::point_mass(2, 0);
        for _ in 0..50 {
            let v = Greedy.play_i(&view_i(&g, &tr, &s, &u));
            assert_eq!(v, 1.0);
            s.update(0, v).unwrap();
        }
    }

    #[test]
    fn probe_brackets_threshold() {
        let g = Grid::new(4).unwrap();
        let mut s = CalState::new(g.clone());
        let tr = Transcript::new(g.clone());
        let a = IntervalAction::new(&g, 1, 2).unwrap();
        let mut probe = BoundaryProbe { delta: 0.01 };
        let v1 = probe.play_ii(&GameIIView { grid: &g, history: &tr, state: &s, action: a });
        s.update(1, 0.5).unwrap();
        let v2 = probe.play_ii(&GameIIView { grid: &g, history: &tr, state: &s, action: a });
        assert!((v1 - 0.51).abs() < 1e-12 && (v2 - 0.49).abs() < 1e-12);
    }
}
