//! Scalar games induced by projecting the calibration reward onto a
//! direction `q`, and the checks built on them.
//!
//! For a direction `q` the forecaster's mixed game is
//!
//! ```text
//! Val(q) = min_{u ∈ Δ} max_{v ∈ [0,1]} Σ_i u_i q_i (M_i - v) - ε ‖q‖∞
//! ```
//!
//! The objective is linear in `v`, so nature's inner maximum is attained at
//! `v ∈ {0, 1}` and the outer problem is a linear program with two
//! constraints over the simplex. Its basic solutions put mass on one bin, or
//! on two bins `i, j` with `q_i q_j < 0` mixed so that `v` drops out, and
//! there are only `O(m^2)` of them, so the LP is solved by enumeration.

use serde::{Deserialize, Serialize};

use crate::error::{CalError, Result};
use crate::forecasters::PointForecastDistribution;
use crate::grid::Grid;
use crate::metrics::RewardVector;

/// Tolerance deciding which basic solutions count as optimal.
pub const OPTIMALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionGame {
    grid: Grid,
    q: Vec<f64>,
}

impl DirectionGame {
    pub fn new(grid: Grid, q: Vec<f64>) -> Result<Self> {
        if q.len() != grid.m() {
            return Err(CalError::DimensionMismatch { got: q.len(), m: grid.m() });
        }
        if q.iter().any(|x| !x.is_finite()) || q.iter().all(|x| *x == 0.0) {
            return Err(CalError::DegenerateDirection);
        }
        Ok(Self { grid, q })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// `ε ‖q‖∞`, the support value of the ε-ball in direction `q`.
    pub fn offset(&self) -> f64 {
        self.grid.epsilon() * self.q.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
    }

    /// `⟨r(M_p, y), q⟩ - ε‖q‖∞` for a pure forecast and a pure outcome.
    pub fn pure_payoff(&self, p: usize, y: f64) -> f64 {
        self.q[p] * (self.grid.midpoint(p) - y) - self.offset()
    }

    /// Mixed objective `Σ_i u_i q_i (M_i - v) - ε‖q‖∞`.
    pub fn objective(&self, u: &[f64], v: f64) -> f64 {
        let inner: f64 = u
            .iter()
            .zip(&self.q)
            .zip(self.grid.midpoints())
            .map(|((ui, qi), mi)| ui * qi * (mi - v))
            .sum();
        inner - self.offset()
    }

    /// Nature's best reply value `max(f(u, 0), f(u, 1))`.
    pub fn worst_case(&self, u: &[f64]) -> f64 {
        self.objective(u, 0.0).max(self.objective(u, 1.0))
    }

    /// Basic solutions of the forecaster's LP.
    fn basic_solutions(&self) -> Vec<Vec<f64>> {
        let m = self.grid.m();
        let mut out = Vec::with_capacity(m + m * m / 2);
        for i in 0..m {
            let mut u = vec![0.0; m];
            u[i] = 1.0;
            out.push(u);
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let (qi, qj) = (self.q[i], self.q[j]);
                if qi * qj < 0.0 {
                    let mut u = vec![0.0; m];
                    u[i] = qj.abs() / (qi.abs() + qj.abs());
                    u[j] = qi.abs() / (qi.abs() + qj.abs());
                    out.push(u);
                }
            }
        }
        out
    }

    /// `max_{v ∈ [0,1]} min_i q_i (M_i - v) - ε‖q‖∞` with its maximizers,
    /// returned as the endpoints of the (interval) set of optimal `v`.
    fn nature_optimum(&self) -> (f64, f64, f64) {
        let m = self.grid.m();
        let h = |v: f64| {
            (0..m)
                .map(|i| self.q[i] * (self.grid.midpoint(i) - v))
                .fold(f64::INFINITY, f64::min)
                - self.offset()
        };
        let mut candidates = vec![0.0, 1.0];
        for i in 0..m {
            for j in (i + 1)..m {
                let (qi, qj) = (self.q[i], self.q[j]);
                if qi != qj {
                    let v = (qi * self.grid.midpoint(i) - qj * self.grid.midpoint(j)) / (qi - qj);
                    if (0.0..=1.0).contains(&v) {
                        candidates.push(v);
                    }
                }
            }
        }
        let values: Vec<f64> = candidates.iter().map(|&v| h(v)).collect();
        let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (&v, &x) in candidates.iter().zip(&values) {
            if x >= best - OPTIMALITY_TOL {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (best, lo, hi)
    }
}

/// Nature's optimal replies to the forecaster's optimal play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NatureResponse {
    Zero,
    One,
    /// Indifferent: every `v ∈ [0, 1]` is a best reply.
    Any,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSolution {
    pub value: f64,
    pub forecaster_strategy: PointForecastDistribution,
    pub nature_best_responses: NatureResponse,
}

fn best_response(game: &DirectionGame, u: &[f64]) -> NatureResponse {
    let (f0, f1) = (game.objective(u, 0.0), game.objective(u, 1.0));
    if (f0 - f1).abs() <= OPTIMALITY_TOL {
        NatureResponse::Any
    } else if f0 > f1 {
        NatureResponse::Zero
    } else {
        NatureResponse::One
    }
}

/// Value and an optimal strategy of the mixed game.
pub fn val_mixed(game: &DirectionGame) -> GameSolution {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for u in game.basic_solutions() {
        let value = game.worst_case(&u);
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, u));
        }
    }
    let (value, u) = best.expect("the simplex has at least one vertex");
    debug_assert!(value <= game.worst_case(halfspace_witness(game).weights()) + 1e-12);
    let nature_best_responses = best_response(game, &u);
    GameSolution {
        value,
        forecaster_strategy: PointForecastDistribution::new(u)
            .expect("basic solutions are distributions"),
        nature_best_responses,
    }
}

/// Value of the game in which both players must play purely.
pub fn val_pure(game: &DirectionGame) -> f64 {
    (0..game.grid.m())
        .map(|p| game.pure_payoff(p, 0.0).max(game.pure_payoff(p, 1.0)))
        .fold(f64::INFINITY, f64::min)
}

/// Pure game restricted to forecasts in `x_star` and outcomes in `y_star`
/// (each outcome given as 0 or 1).
pub fn val_star(game: &DirectionGame, x_star: &[usize], y_star: &[u8]) -> Result<f64> {
    if x_star.is_empty() || y_star.is_empty() {
        return Err(CalError::EmptySupport);
    }
    for &p in x_star {
        game.grid.check_index(p)?;
    }
    if y_star.iter().any(|&y| y > 1) {
        return Err(CalError::Config("outcomes in y_star must be 0 or 1".into()));
    }
    Ok(x_star
        .iter()
        .map(|&p| {
            y_star
                .iter()
                .map(|&y| game.pure_payoff(p, y as f64))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::INFINITY, f64::min))
}

/// Supports of optimal strategies: forecasts used by some optimal `u`, and
/// outcomes used by some optimal mixed strategy of nature.
///
/// Every optimal `u` is a mixture of optimal basic solutions, so the union
/// of their supports is the full `X*`. Nature's optimal mixtures form an
/// interval `[v_lo, v_hi]` of Bernoulli biases; outcome 1 is in `Y*` when
/// `v_hi > 0` and outcome 0 when `v_lo < 1`.
pub fn optimal_supports(game: &DirectionGame) -> (Vec<usize>, Vec<u8>) {
    let candidates = game.basic_solutions();
    let values: Vec<f64> = candidates.iter().map(|u| game.worst_case(u)).collect();
    let best = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut in_x = vec![false; game.grid.m()];
    for (u, &value) in candidates.iter().zip(&values) {
        if value <= best + OPTIMALITY_TOL {
            for (i, &w) in u.iter().enumerate() {
                if w > 0.0 {
                    in_x[i] = true;
                }
            }
        }
    }
    let x_star = (0..game.grid.m()).filter(|&i| in_x[i]).collect();

    let (_, v_lo, v_hi) = game.nature_optimum();
    let mut y_star = Vec::new();
    if v_lo < 1.0 {
        y_star.push(0);
    }
    if v_hi > 0.0 {
        y_star.push(1);
    }
    (x_star, y_star)
}

/// Forecaster play from the case analysis showing `Val(q) <= 0`:
/// (a) a bin with `q_i = 0`; (b) bin 1 when `q_1 > 0`; (c) bin m when
/// `q_m < 0`; (d) otherwise the first sign change `q_j < 0 < q_{j+1}`,
/// mixed with `u_j = |q_{j+1}| / (|q_j| + |q_{j+1}|)` so that nature's
/// choice cancels.
pub fn halfspace_witness(game: &DirectionGame) -> PointForecastDistribution {
    let m = game.grid.m();
    let q = &game.q;
    if let Some(i) = q.iter().position(|&x| x == 0.0) {
        return PointForecastDistribution::point_mass(m, i);
    }
    if q[0] > 0.0 {
        return PointForecastDistribution::point_mass(m, 0);
    }
    if q[m - 1] < 0.0 {
        return PointForecastDistribution::point_mass(m, m - 1);
    }
    let j = (0..m - 1)
        .find(|&j| q[j] < 0.0 && q[j + 1] > 0.0)
        .expect("q_1 < 0 < q_m forces a sign change");
    let w = q[j + 1].abs() / (q[j].abs() + q[j + 1].abs());
    PointForecastDistribution::two_point(m, j, w)
}

/// Expected reward `E_{p~u, y~v} r(p, y)`, coordinate `i` being `u_i (M_i - v)`.
pub fn expected_reward(grid: &Grid, u: &PointForecastDistribution, v: f64) -> RewardVector {
    RewardVector(
        u.weights()
            .iter()
            .zip(grid.midpoints())
            .map(|(ui, mi)| ui * (mi - v))
            .collect(),
    )
}

/// Point mass on the bin containing `v`; its expected reward has ℓ1 norm
/// `|M_j - v| <= ε`.
pub fn response_satisfy(grid: &Grid, v: f64) -> Result<PointForecastDistribution> {
    let j = grid.bin_of(v)?;
    Ok(PointForecastDistribution::point_mass(grid.m(), j))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalCheck {
    /// `min_u Σ_i u_i |M_i - 1/m|`, i.e. `min_i |M_i - 1/m|`.
    pub value: f64,
    pub epsilon: f64,
    /// Whether the value equals ε, so no smaller ball answers `v = 1/m`.
    pub certified: bool,
}

/// Against `v = 1/m` every forecast has expected reward of ℓ1 norm at least
/// ε. The distances are `|2i + 1 - 2| / (2m)` and are evaluated on the
/// integer numerators so the minimum comes out exact.
pub fn minimal_approachability_check(grid: &Grid) -> MinimalCheck {
    let m = grid.m() as i64;
    let numerator = (0..m).map(|i| (2 * i + 1 - 2).abs()).min().expect("m >= 2");
    let value = numerator as f64 / (2 * m) as f64;
    MinimalCheck { value, epsilon: grid.epsilon(), certified: value == grid.epsilon() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedApproachabilityReport {
    pub q: Vec<f64>,
    pub val: f64,
    pub val_star: f64,
    pub val_pure: f64,
    pub x_star: Vec<usize>,
    pub y_star: Vec<u8>,
    pub solution: GameSolution,
    /// `Val(q) = 0` within tolerance while `Val*(q) > 0`.
    pub holds: bool,
}

/// The direction `q = (-1, ..., -1, 1)`, where the mixed game has value 0
/// but restricting both players to the optimal supports gives
/// `min(1 - 2ε, 2ε) > 0`.
pub fn mixed_approachability_witness(grid: &Grid) -> Result<MixedApproachabilityReport> {
    let m = grid.m();
    let mut q = vec![-1.0; m];
    q[m - 1] = 1.0;
    let game = DirectionGame::new(grid.clone(), q.clone())?;
    let solution = val_mixed(&game);
    let (x_star, y_star) = optimal_supports(&game);
    let vs = val_star(&game, &x_star, &y_star)?;
    let vp = val_pure(&game);
    let holds = solution.value.abs() <= OPTIMALITY_TOL && vs > 0.0;
    Ok(MixedApproachabilityReport {
        q,
        val: solution.value,
        val_star: vs,
        val_pure: vp,
        x_star,
        y_star,
        solution,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(q: &[f64]) -> DirectionGame {
        DirectionGame::new(Grid::new(q.len()).unwrap(), q.to_vec()).unwrap()
    }

    #[test]
    fn rejects_degenerate_directions() {
        let g = Grid::new(3).unwrap();
        assert_eq!(DirectionGame::new(g.clone(), vec![0.0; 3]), Err(CalError::DegenerateDirection));
        assert_eq!(
            DirectionGame::new(g.clone(), vec![f64::NAN, 1.0, 0.0]),
            Err(CalError::DegenerateDirection)
        );
        assert!(matches!(
            DirectionGame::new(g, vec![1.0, 2.0]),
            Err(CalError::DimensionMismatch { got: 2, m: 3 })
        ));
    }

    #[test]
    fn witness_direction_m5() {
        let mut q = vec![-1.0; 5];
        q[4] = 1.0;
        let g = game(&q);
        let sol = val_mixed(&g);
        assert!(sol.value.abs() < 1e-12);
        let w = sol.forecaster_strategy.weights();
        assert!((w[3] - 0.5).abs() < 1e-12 && (w[4] - 0.5).abs() < 1e-12);
        assert_eq!(sol.nature_best_responses, NatureResponse::Any);
        assert_eq!(optimal_supports(&g), (vec![3, 4], vec![0, 1]));
        assert!((val_star(&g, &[3, 4], &[0, 1]).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn pure_value_examples() {
        assert!((val_pure(&game(&[-1.0, 1.0])) - 0.5).abs() < 1e-12);
        let e1 = game(&[1.0, 0.0, 0.0]);
        assert!((val_pure(&e1) + e1.grid().epsilon()).abs() < 1e-12);
    }

    #[test]
    fn e1_direction_mixed_value_nonpositive() {
        for m in 2..8 {
            let mut q = vec![0.0; m];
            q[0] = 1.0;
            let sol = val_mixed(&game(&q));
            assert!(sol.value <= 0.0);
        }
    }

    #[test]
    fn star_reduces_to_pure_on_full_support() {
        let g = game(&[0.3, -0.7, 0.2, 0.9]);
        let all: Vec<usize> = (0..4).collect();
        assert_eq!(val_star(&g, &all, &[0, 1]).unwrap(), val_pure(&g));
        assert_eq!(val_star(&g, &[], &[0]), Err(CalError::EmptySupport));
        assert_eq!(val_star(&g, &[0], &[]), Err(CalError::EmptySupport));
    }

    #[test]
    fn witness_cases() {
        let u = halfspace_witness(&game(&[-2.0, 1.0]));
        assert!((u.weights()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((u.weights()[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(halfspace_witness(&game(&[3.0, -1.0])).as_point_mass(), Some(0));
        assert_eq!(halfspace_witness(&game(&[-3.0, -1.0])).as_point_mass(), Some(1));
        assert_eq!(halfspace_witness(&game(&[-3.0, 0.0, 1.0])).as_point_mass(), Some(1));
    }

    #[test]
    fn response_examples() {
        let g = Grid::new(5).unwrap();
        let u = response_satisfy(&g, 0.3).unwrap();
        assert_eq!(u.as_point_mass(), Some(1));
        assert!(expected_reward(&g, &u, 0.3).l1_norm() < 1e-15);
        let u = response_satisfy(&g, 0.39).unwrap();
        assert_eq!(u.as_point_mass(), Some(1));
        assert!((expected_reward(&g, &u, 0.39).l1_norm() - 0.09).abs() < 1e-12);
        assert!(response_satisfy(&g, 1.2).is_err());
    }

    #[test]
    fn minimal_check_small_grids() {
        assert_eq!(minimal_approachability_check(&Grid::new(2).unwrap()).value, 0.25);
        assert_eq!(minimal_approachability_check(&Grid::new(5).unwrap()).value, 0.1);
    }

    #[test]
    fn mixed_witness_m2() {
        let r = mixed_approachability_witness(&Grid::new(2).unwrap()).unwrap();
        assert!(r.holds);
        assert!(r.val.abs() < 1e-12);
        assert!((r.val_star - 0.5).abs() < 1e-12);
    }
}
