//! Calibration-error functionals over game transcripts, and the reward
//! vectors whose average is approached in the ℓ1-ball picture.

use serde::{Deserialize, Serialize};

use crate::error::{CalError, Result};
use crate::forecasters::IntervalAction;
use crate::grid::{CalState, Grid};

/// What the forecaster announced in one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForecastAction {
    /// A single midpoint (possibly sampled from a randomized play).
    Point(usize),
    /// A pair of adjacent midpoints `[M_lo, M_hi]`.
    Interval(IntervalAction),
}

impl ForecastAction {
    /// Bin indices of the interval endpoints; a point is a degenerate interval.
    pub fn endpoints(&self) -> (usize, usize) {
        match *self {
            ForecastAction::Point(i) => (i, i),
            ForecastAction::Interval(a) => (a.lo(), a.hi()),
        }
    }
}

/// One played round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub action: ForecastAction,
    /// Bin of the forecast `p_t` that is judged.
    pub realized: usize,
    /// Parameter nature committed to (Bernoulli bias, or the bounded outcome).
    pub nature_param: f64,
    /// Realized outcome `y_t` (or `v_t` in the bounded game).
    pub outcome: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    grid: Grid,
    rounds: Vec<Round>,
}

impl Transcript {
    pub fn new(grid: Grid) -> Self {
        Self { grid, rounds: Vec::new() }
    }

    pub fn with_capacity(grid: Grid, capacity: usize) -> Self {
        Self { grid, rounds: Vec::with_capacity(capacity) }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn push(&mut self, round: Round) -> Result<()> {
        let m = self.grid.m();
        let (lo, hi) = round.action.endpoints();
        if lo >= m || hi >= m || round.realized >= m {
            return Err(CalError::IndexOutOfRange {
                index: lo.max(hi).max(round.realized),
                m,
            });
        }
        if hi < lo || hi - lo > 1 {
            return Err(CalError::InvalidInterval { lo, hi });
        }
        if !(0.0..=1.0).contains(&round.outcome) {
            return Err(CalError::OutOfUnitInterval(round.outcome));
        }
        self.rounds.push(round);
        Ok(())
    }

    /// The first `t` rounds as a new transcript.
    pub fn prefix(&self, t: usize) -> Transcript {
        Transcript {
            grid: self.grid.clone(),
            rounds: self.rounds[..t.min(self.rounds.len())].to_vec(),
        }
    }

    /// Replays the realized forecasts into per-bin statistics.
    pub fn state(&self) -> CalState {
        let mut s = CalState::new(self.grid.clone());
        for r in &self.rounds {
            s.update(r.realized, r.outcome).expect("transcript rounds are validated on push");
        }
        s
    }
}

/// `CE_T = Σ_i |(1/T) Σ_t 1{p_t = M_i} (M_i - y_t)|`.
pub fn calibration_error(transcript: &Transcript) -> Result<f64> {
    if transcript.is_empty() {
        return Err(CalError::EmptyTranscript);
    }
    let grid = transcript.grid();
    let mut signed = vec![0.0; grid.m()];
    for r in transcript.rounds() {
        signed[r.realized] += grid.midpoint(r.realized) - r.outcome;
    }
    let t = transcript.len() as f64;
    Ok(signed.iter().map(|s| s.abs()).sum::<f64>() / t)
}

/// `max(CE_T - ε, 0)`.
pub fn eps_calibration_error(transcript: &Transcript) -> Result<f64> {
    let ce = calibration_error(transcript)?;
    Ok((ce - transcript.grid().epsilon()).max(0.0))
}

/// Unnormalized calibration error `T * CE_T = Σ_i |N_i M_i - S_i|`, read
/// off running bin statistics.
pub fn scaled_calibration_error(state: &CalState) -> f64 {
    let grid = state.grid();
    state
        .bins()
        .iter()
        .enumerate()
        .map(|(i, b)| (b.n as f64 * grid.midpoint(i) - b.sum).abs())
        .sum()
}

/// `CE_T` from running statistics; 0 before the first round.
pub fn calibration_error_of_state(state: &CalState) -> f64 {
    if state.t() == 0 {
        return 0.0;
    }
    scaled_calibration_error(state) / state.t() as f64
}

/// Interval calibration error: each round is judged at the projection of
/// the outcome onto the announced interval `[M_lo, M_hi]`, contributing the
/// signed gap `proj(y, A) - y` to the bin whose midpoint is that projection.
/// Outcomes strictly inside the interval project onto themselves and
/// contribute nothing.
pub fn interval_calibration_error(transcript: &Transcript) -> Result<f64> {
    if transcript.is_empty() {
        return Err(CalError::EmptyTranscript);
    }
    let grid = transcript.grid();
    let mut signed = vec![0.0; grid.m()];
    for r in transcript.rounds() {
        let (lo, hi) = r.action.endpoints();
        let (a, b) = (grid.midpoint(lo), grid.midpoint(hi));
        let y = r.outcome;
        if y <= a {
            signed[lo] += a - y;
        } else if y >= b {
            signed[hi] += b - y;
        }
    }
    let ce = signed.iter().map(|s| s.abs()).sum::<f64>() / transcript.len() as f64;
    Ok((ce - grid.epsilon()).max(0.0))
}

/// A vector payoff with one coordinate per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardVector(pub Vec<f64>);

impl RewardVector {
    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).sum()
    }
}

/// Single-round reward: coordinate `p_index` equals `M_p - y`, all others 0.
pub fn reward(grid: &Grid, p_index: usize, y: f64) -> Result<RewardVector> {
    grid.check_index(p_index)?;
    if !(0.0..=1.0).contains(&y) {
        return Err(CalError::OutOfUnitInterval(y));
    }
    let mut v = RewardVector::zeros(grid.m());
    v.0[p_index] = grid.midpoint(p_index) - y;
    Ok(v)
}

/// Average reward vector over the transcript.
pub fn avg_reward(transcript: &Transcript) -> Result<RewardVector> {
    if transcript.is_empty() {
        return Err(CalError::EmptyTranscript);
    }
    let grid = transcript.grid();
    let mut acc = RewardVector::zeros(grid.m());
    for r in transcript.rounds() {
        let single = reward(grid, r.realized, r.outcome)?;
        acc.0[r.realized] += single.0[r.realized];
    }
    let t = transcript.len() as f64;
    acc.0.iter_mut().for_each(|x| *x /= t);
    Ok(acc)
}

/// ℓ1 distance from `v` to the ℓ1 ball of radius `eps` around the origin.
pub fn l1_dist_to_ball(v: &RewardVector, eps: f64) -> f64 {
    (v.l1_norm() - eps).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_transcript(m: usize, bins: &[usize], outcomes: &[f64]) -> Transcript {
        let mut tr = Transcript::new(Grid::new(m).unwrap());
        for (&i, &y) in bins.iter().zip(outcomes) {
            tr.push(Round {
                action: ForecastAction::Point(i),
                realized: i,
                nature_param: y,
                outcome: y,
            })
            .unwrap();
        }
        tr
    }

    #[test]
    fn ce_hand_examples() {
        let tr = point_transcript(2, &[0; 4], &[0.0; 4]);
        assert_eq!(calibration_error(&tr).unwrap(), 0.25);
        assert_eq!(eps_calibration_error(&tr).unwrap(), 0.0);

        let tr = point_transcript(2, &[0; 4], &[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(calibration_error(&tr).unwrap(), 0.25);

        let tr = point_transcript(2, &[0; 4], &[1.0; 4]);
        assert_eq!(calibration_error(&tr).unwrap(), 0.75);
        assert_eq!(eps_calibration_error(&tr).unwrap(), 0.5);
    }

    #[test]
    fn empty_transcript_errors() {
        let tr = Transcript::new(Grid::new(3).unwrap());
        assert_eq!(calibration_error(&tr), Err(CalError::EmptyTranscript));
        assert_eq!(eps_calibration_error(&tr), Err(CalError::EmptyTranscript));
        assert_eq!(interval_calibration_error(&tr), Err(CalError::EmptyTranscript));
        assert_eq!(avg_reward(&tr), Err(CalError::EmptyTranscript));
    }

    #[test]
    fn push_validates() {
        let mut tr = Transcript::new(Grid::new(3).unwrap());
        let bad = Round {
            action: ForecastAction::Interval(IntervalAction::new_unchecked(0, 2)),
            realized: 0,
            nature_param: 0.0,
            outcome: 0.0,
        };
        assert!(tr.push(bad).is_err());
        let bad = Round {
            action: ForecastAction::Point(3),
            realized: 3,
            nature_param: 0.0,
            outcome: 0.0,
        };
        assert!(tr.push(bad).is_err());
    }

    #[test]
    fn reward_examples() {
        let g = Grid::new(2).unwrap();
        assert_eq!(reward(&g, 0, 1.0).unwrap().0, vec![-0.75, 0.0]);
        assert_eq!(reward(&g, 1, 0.75).unwrap().0, vec![0.0, 0.0]);
        assert!(reward(&g, 2, 0.0).is_err());
    }

    #[test]
    fn ball_distance_examples() {
        assert_eq!(l1_dist_to_ball(&RewardVector(vec![0.0, 0.0]), 0.25), 0.0);
        let d = l1_dist_to_ball(&RewardVector(vec![0.5, -0.3]), 0.25);
        assert!((d - 0.55).abs() < 1e-15);
    }

    #[test]
    fn interval_error_inside_is_zero() {
        let g = Grid::new(4).unwrap();
        let mut tr = Transcript::new(g.clone());
        for k in 0..10 {
            let i = k % 3;
            let a = IntervalAction::new(&g, i, i + 1).unwrap();
            let v = 0.5 * (g.midpoint(i) + g.midpoint(i + 1));
            tr.push(Round {
                action: ForecastAction::Interval(a),
                realized: i,
                nature_param: v,
                outcome: v,
            })
            .unwrap();
        }
        assert_eq!(interval_calibration_error(&tr).unwrap(), 0.0);
    }

    #[test]
    fn state_replay_matches_scaled_error() {
        let tr = point_transcript(3, &[0, 1, 2, 1, 0], &[1.0, 0.0, 1.0, 1.0, 0.0]);
        let s = tr.state();
        let direct = calibration_error(&tr).unwrap();
        assert!((calibration_error_of_state(&s) - direct).abs() < 1e-15);
    }
}
