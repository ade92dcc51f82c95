//! Forecasting strategies.
//!
//! Interval forecasters ([`IntervalForecaster`]) play the two-choice game,
//! where the forecaster announces one midpoint or two adjacent ones and the
//! endpoint nearest the outcome is judged. Point forecasters
//! ([`PointForecaster`]) play the classical game and return a distribution
//! over midpoints; sampling is left to the engine so strategies stay pure.

use serde::{Deserialize, Serialize};

use crate::error::{CalError, Result};
use crate::grid::{CalState, Grid};

/// Randomized play over the grid midpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointForecastDistribution {
    weights: Vec<f64>,
}

impl PointForecastDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(CalError::InvalidDistribution("no weights".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(CalError::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(CalError::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn point_mass(m: usize, i: usize) -> Self {
        let mut weights = vec![0.0; m];
        weights[i] = 1.0;
        Self { weights }
    }

    /// Probability `w_lo` on bin `i` and `1 - w_lo` on bin `i + 1`.
    pub fn two_point(m: usize, i: usize, w_lo: f64) -> Self {
        let mut weights = vec![0.0; m];
        weights[i] = w_lo;
        weights[i + 1] = 1.0 - w_lo;
        Self { weights }
    }

    pub fn uniform(m: usize) -> Self {
        Self { weights: vec![1.0 / m as f64; m] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Bins carrying positive probability.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, _)| i)
    }

    /// The bin, if all mass sits on one.
    pub fn as_point_mass(&self) -> Option<usize> {
        let mut it = self.support();
        match (it.next(), it.next()) {
            (Some(i), None) => Some(i),
            _ => None,
        }
    }

    /// Expected forecast value.
    pub fn mean(&self, grid: &Grid) -> f64 {
        self.weights
            .iter()
            .zip(grid.midpoints())
            .map(|(w, x)| w * x)
            .sum()
    }

    /// Inverse-CDF sample from a uniform draw `u ∈ [0, 1)`.
    pub fn sample(&self, u: f64) -> usize {
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last = i;
            if u < acc {
                return i;
            }
        }
        last
    }
}

/// Either one midpoint `(i, i)` or two adjacent ones `(i, i + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntervalAction {
    lo: usize,
    hi: usize,
}

impl IntervalAction {
    pub fn new(grid: &Grid, lo: usize, hi: usize) -> Result<Self> {
        if hi >= grid.m() || hi < lo || hi - lo > 1 {
            return Err(CalError::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn point(i: usize) -> Self {
        Self { lo: i, hi: i }
    }

    pub(crate) fn new_unchecked(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

impl std::fmt::Display for IntervalAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.lo + 1, self.hi + 1)
    }
}

/// Which qualifying index to use when several satisfy condition A or B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TieBreak {
    #[default]
    Smallest,
    Largest,
}

impl TieBreak {
    fn find(self, n: usize, pred: impl Fn(usize) -> bool) -> Option<usize> {
        match self {
            TieBreak::Smallest => (0..n).find(|&i| pred(i)),
            TieBreak::Largest => (0..n).rev().find(|&i| pred(i)),
        }
    }
}

/// Where the forecaster stands: a bin whose mean is inside its interval,
/// or an adjacent (excess, deficit) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    A(usize),
    B(usize),
}

/// Finds a bin satisfying condition A, falling back to condition B.
pub fn find_condition(state: &CalState, tie: TieBreak) -> Result<Condition> {
    let m = state.grid().m();
    if let Some(i) = tie.find(m, |i| state.in_interval(i)) {
        return Ok(Condition::A(i));
    }
    tie.find(m - 1, |i| state.excess_deficit_pair(i))
        .map(Condition::B)
        .ok_or(CalError::NoConditionHolds(state.t() as usize))
}

/// POTC-Cal: `(i, i)` for a bin satisfying condition A, else `(i, i + 1)`
/// for an excess/deficit pair. The first round always plays `(1, 1)`.
pub fn potc_cal_next(state: &CalState, tie: TieBreak) -> Result<IntervalAction> {
    if state.t() == 0 {
        return Ok(IntervalAction::point(0));
    }
    Ok(match find_condition(state, tie)? {
        Condition::A(i) => IntervalAction::point(i),
        Condition::B(i) => IntervalAction::new_unchecked(i, i + 1),
    })
}

/// Randomized two-point forecaster. Under condition B at `i` it mixes so
/// that nature's choice drops out of the expected change in the pair's
/// potentials: with `w = N_{i+1} d_{i+1}` and `z = N_i e_i`, bin `i` gets
/// `w / (w + z)` and bin `i + 1` gets `z / (w + z)`.
pub fn foster99_next(state: &CalState, tie: TieBreak) -> Result<PointForecastDistribution> {
    let m = state.grid().m();
    Ok(match find_condition(state, tie)? {
        Condition::A(i) => PointForecastDistribution::point_mass(m, i),
        Condition::B(i) => {
            let (w, z) = foster_pair_weights(state, i);
            if w + z > 0.0 {
                PointForecastDistribution::two_point(m, i, w / (w + z))
            } else {
                PointForecastDistribution::two_point(m, i, 0.5)
            }
        }
    })
}

/// `(N_{i+1} d_{i+1}, N_i e_i)` from counts and sums.
pub fn foster_pair_weights(state: &CalState, i: usize) -> (f64, f64) {
    let g = state.grid();
    let lo = state.bin(i);
    let hi = state.bin(i + 1);
    let w = hi.n as f64 * g.left(i + 1) - hi.sum;
    let z = lo.sum - lo.n as f64 * g.right(i);
    (w, z)
}

/// Default constants for the initialization length `K_k`.
pub const DEFAULT_C1: f64 = 0.85;
pub const DEFAULT_C2: f64 = 0.72;
pub const DEFAULT_C3: f64 = 5.2;

/// Doubling-trick epochs for PI-F99.
///
/// Epoch `k` (zero-based) has length `T_k = 2^k T0`, covers rounds
/// `(T^(k), T^(k+1)]` with `T^(k) = (2^k - 1) T0`, and starts with an
/// initialization phase of `K_k` forecasts on each midpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingSchedule {
    pub t0: u64,
    pub m: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl DoublingSchedule {
    pub fn new(t0: u64, m: usize) -> Self {
        Self { t0, m, c1: DEFAULT_C1, c2: DEFAULT_C2, c3: DEFAULT_C3 }
    }

    /// Multiplies `c1` by `scale`; `K_k` shrinks by `scale^2` before rounding.
    pub fn with_c1_scale(mut self, scale: f64) -> Self {
        self.c1 *= scale;
        self
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / (2.0 * self.m as f64)
    }

    /// `T_k = 2^k T0`.
    pub fn horizon(&self, k: u32) -> u64 {
        self.t0 << k
    }

    /// `T^(k) = (2^k - 1) T0`, the number of rounds before epoch `k` starts.
    pub fn cumulative(&self, k: u32) -> u64 {
        ((1u64 << k) - 1) * self.t0
    }

    /// `K_k = ⌈(c1 ln T_k / ε)^2 (ln ln(T_k / 2) + c2 ln(c3 m T_k^2))⌉`.
    pub fn k_k(&self, k: u32) -> Result<u64> {
        let tk = self.horizon(k);
        let tkf = tk as f64;
        if tkf / 2.0 <= std::f64::consts::E {
            return Err(CalError::HorizonTooSmall(tk));
        }
        let lead = (self.c1 * tkf.ln() / self.epsilon()).powi(2);
        let tail = (tkf / 2.0).ln().ln() + self.c2 * (self.c3 * self.m as f64 * tkf * tkf).ln();
        Ok((lead * tail).ceil() as u64)
    }

    /// Zero-based epoch containing global round `t ≥ 1` and the
    /// within-epoch round `τ = t - T^(k)`.
    pub fn locate(&self, t: u64) -> Result<(u32, u64)> {
        if t == 0 || self.t0 == 0 {
            return Err(CalError::Config(format!(
                "round {t} is not covered by a schedule with T0 = {}",
                self.t0
            )));
        }
        let mut k = 0;
        while t > self.cumulative(k + 1) {
            k += 1;
        }
        Ok((k, t - self.cumulative(k)))
    }
}

/// PI-F99 play at global round `t`, given the statistics gathered since the
/// current epoch began. During initialization the epoch forecasts bin `j`
/// while `τ ∈ ((j-1) K, j K]`; afterwards it follows [`foster99_next`].
pub fn pi_f99_next(
    epoch_state: &CalState,
    schedule: &DoublingSchedule,
    t: u64,
) -> Result<PointForecastDistribution> {
    let (k, tau) = schedule.locate(t)?;
    if epoch_state.t() + 1 != tau {
        return Err(CalError::Config(format!(
            "epoch state holds {} rounds but round {t} is round {tau} of epoch {k}",
            epoch_state.t()
        )));
    }
    let m = epoch_state.grid().m();
    let kk = schedule.k_k(k)?;
    if tau <= m as u64 * kk {
        let j = tau.div_ceil(kk) as usize - 1;
        return Ok(PointForecastDistribution::point_mass(m, j));
    }
    foster99_next(epoch_state, TieBreak::Smallest)
}

/// A strategy for the classical game with randomized point forecasts.
pub trait PointForecaster: Send {
    fn name(&self) -> String;

    /// Play for round `state.t() + 1` given all realized forecasts and
    /// outcomes so far.
    fn forecast(&mut self, state: &CalState) -> Result<PointForecastDistribution>;

    /// Feedback after the round: the sampled bin and the outcome.
    fn observe(&mut self, _realized: usize, _outcome: f64) {}

    /// Whether every play is a point mass.
    fn is_deterministic(&self) -> bool {
        false
    }
}

/// A strategy for the two-choice interval game.
pub trait IntervalForecaster: Send {
    fn name(&self) -> String;
    fn action(&mut self, state: &CalState) -> Result<IntervalAction>;
    fn observe(&mut self, _realized: usize, _outcome: f64) {}
}

#[derive(Debug, Clone, Default)]
pub struct PotcCal {
    pub tie: TieBreak,
}

impl IntervalForecaster for PotcCal {
    fn name(&self) -> String {
        "potc-cal".into()
    }

    fn action(&mut self, state: &CalState) -> Result<IntervalAction> {
        potc_cal_next(state, self.tie)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Foster99 {
    pub tie: TieBreak,
}

impl PointForecaster for Foster99 {
    fn name(&self) -> String {
        "foster99".into()
    }

    fn forecast(&mut self, state: &CalState) -> Result<PointForecastDistribution> {
        foster99_next(state, self.tie)
    }
}

/// PI-F99 with its epoch-local statistics; the history is discarded at
/// every epoch boundary.
#[derive(Debug, Clone)]
pub struct PiF99 {
    schedule: DoublingSchedule,
    epoch: u32,
    local: CalState,
    t: u64,
}

impl PiF99 {
    pub fn new(grid: Grid, schedule: DoublingSchedule) -> Result<Self> {
        if schedule.m != grid.m() {
            return Err(CalError::DimensionMismatch { got: schedule.m, m: grid.m() });
        }
        // Fails early when T0 is too small for K_0.
        schedule.k_k(0)?;
        Ok(Self { schedule, epoch: 0, local: CalState::new(grid), t: 0 })
    }

    pub fn schedule(&self) -> &DoublingSchedule {
        &self.schedule
    }

    pub fn epoch_state(&self) -> &CalState {
        &self.local
    }
}

impl PointForecaster for PiF99 {
    fn name(&self) -> String {
        "pi-f99".into()
    }

    fn forecast(&mut self, _state: &CalState) -> Result<PointForecastDistribution> {
        let t = self.t + 1;
        let (k, _) = self.schedule.locate(t)?;
        if k != self.epoch {
            self.epoch = k;
            self.local = CalState::new(self.local.grid().clone());
        }
        pi_f99_next(&self.local, &self.schedule, t)
    }

    fn observe(&mut self, realized: usize, outcome: f64) {
        self.t += 1;
        self.local
            .update(realized, outcome)
            .expect("engine passes validated bins and outcomes");
    }
}

/// Always forecasts the same midpoint.
#[derive(Debug, Clone)]
pub struct ConstantPoint {
    pub bin: usize,
}

impl PointForecaster for ConstantPoint {
    fn name(&self) -> String {
        format!("constant:{}", self.bin + 1)
    }

    fn forecast(&mut self, state: &CalState) -> Result<PointForecastDistribution> {
        state.grid().check_index(self.bin)?;
        Ok(PointForecastDistribution::point_mass(state.grid().m(), self.bin))
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Uniform over all midpoints every round.
#[derive(Debug, Clone, Default)]
pub struct UniformPoint;

impl PointForecaster for UniformPoint {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn forecast(&mut self, state: &CalState) -> Result<PointForecastDistribution> {
        Ok(PointForecastDistribution::uniform(state.grid().m()))
    }
}
