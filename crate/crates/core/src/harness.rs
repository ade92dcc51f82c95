//! Experiment orchestration: strategy registry, checkpointed runs over many
//! seeds, CSV/JSON persistence and power-law rate fits.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_game_i, run_game_ii, GameMode, RoundEvent};
use crate::error::{CalError, Result};
use crate::forecasters::{
    ConstantPoint, DoublingSchedule, Foster99, IntervalForecaster, PiF99, PointForecaster,
    PotcCal, UniformPoint, DEFAULT_C2, DEFAULT_C3,
};
use crate::grid::{CalState, Grid};
use crate::metrics::calibration_error_of_state;
use crate::natures::{
    Alternating, BernoulliNature, BoundaryProbe, ConstantNature, GameINature, GameIINature,
    Greedy, MidpointAdversary, Punisher, UniformValue,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "POTC_OUT_DIR";

pub const FORECASTER_NAMES: &str = "potc-cal, foster99, pi-f99, constant:<i>, uniform";
pub const NATURE_NAMES: &str =
    "punisher, bernoulli:<p>, midpoint, greedy, constant:<y>, alternating, uniform-v, probe:<delta>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ForecasterSpec {
    PotcCal,
    Foster99,
    PiF99,
    /// Zero-based bin; written one-based in names.
    Constant(usize),
    Uniform,
}

impl ForecasterSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let unknown = || {
            CalError::Config(format!("unknown forecaster {s:?}; valid options: {FORECASTER_NAMES}"))
        };
        match s {
            "potc-cal" => return Ok(Self::PotcCal),
            "foster99" => return Ok(Self::Foster99),
            "pi-f99" => return Ok(Self::PiF99),
            "uniform" => return Ok(Self::Uniform),
            _ => {}
        }
        let arg = s.strip_prefix("constant:").ok_or_else(unknown)?;
        let i: usize = arg.parse().map_err(|_| unknown())?;
        if i == 0 {
            return Err(CalError::Config("constant:<i> takes a one-based bin".into()));
        }
        Ok(Self::Constant(i - 1))
    }

    pub fn name(&self) -> String {
        match self {
            Self::PotcCal => "potc-cal".into(),
            Self::Foster99 => "foster99".into(),
            Self::PiF99 => "pi-f99".into(),
            Self::Constant(i) => format!("constant:{}", i + 1),
            Self::Uniform => "uniform".into(),
        }
    }

    pub fn is_interval(&self) -> bool {
        matches!(self, Self::PotcCal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NatureSpec {
    Punisher,
    Bernoulli(f64),
    Midpoint,
    Greedy,
    Constant(f64),
    Alternating,
    UniformValue,
    Probe(f64),
}

fn parse_unit(arg: &str, what: &str) -> Result<f64> {
    let v: f64 = arg
        .parse()
        .map_err(|_| CalError::Config(format!("{what} expects a number, got {arg:?}")))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(CalError::Config(format!("{what} must lie in [0, 1], got {v}")));
    }
    Ok(v)
}

impl NatureSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "punisher" => return Ok(Self::Punisher),
            "midpoint" => return Ok(Self::Midpoint),
            "greedy" => return Ok(Self::Greedy),
            "alternating" => return Ok(Self::Alternating),
            "uniform-v" => return Ok(Self::UniformValue),
            _ => {}
        }
        if let Some(arg) = s.strip_prefix("bernoulli:") {
            return parse_unit(arg, "bernoulli:<p>").map(Self::Bernoulli);
        }
        if let Some(arg) = s.strip_prefix("constant:") {
            return parse_unit(arg, "constant:<y>").map(Self::Constant);
        }
        if let Some(arg) = s.strip_prefix("probe:") {
            return parse_unit(arg, "probe:<delta>").map(Self::Probe);
        }
        Err(CalError::Config(format!("unknown nature {s:?}; valid options: {NATURE_NAMES}")))
    }

    pub fn name(&self) -> String {
        match self {
            Self::Punisher => "punisher".into(),
            Self::Bernoulli(p) => format!("bernoulli:{p}"),
            Self::Midpoint => "midpoint".into(),
            Self::Greedy => "greedy".into(),
            Self::Constant(y) => format!("constant:{y}"),
            Self::Alternating => "alternating".into(),
            Self::UniformValue => "uniform-v".into(),
            Self::Probe(d) => format!("probe:{d}"),
        }
    }
}

/// Seed for a nature's private stream, kept apart from the engine's.
fn nature_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

pub fn build_point_forecaster(
    spec: &ForecasterSpec,
    grid: &Grid,
    schedule: &DoublingSchedule,
) -> Result<Box<dyn PointForecaster>> {
    Ok(match spec {
        ForecasterSpec::Foster99 => Box::new(Foster99::default()),
        ForecasterSpec::PiF99 => Box::new(PiF99::new(grid.clone(), schedule.clone())?),
        ForecasterSpec::Constant(i) => {
            grid.check_index(*i)?;
            Box::new(ConstantPoint { bin: *i })
        }
        ForecasterSpec::Uniform => Box::new(UniformPoint),
        ForecasterSpec::PotcCal => {
            return Err(CalError::Config(
                "potc-cal plays interval forecasts; use game II or II-bounded".into(),
            ))
        }
    })
}

pub fn build_interval_forecaster(spec: &ForecasterSpec) -> Result<Box<dyn IntervalForecaster>> {
    match spec {
        ForecasterSpec::PotcCal => Ok(Box::new(PotcCal::default())),
        other => Err(CalError::Config(format!(
            "{} plays point forecasts; use game I",
            other.name()
        ))),
    }
}

pub fn build_game_i_nature(spec: &NatureSpec, seed: u64) -> Result<Box<dyn GameINature>> {
    Ok(match spec {
        NatureSpec::Punisher => Box::new(Punisher),
        NatureSpec::Bernoulli(p) => Box::new(BernoulliNature::new(*p)?),
        NatureSpec::Midpoint => Box::new(MidpointAdversary),
        NatureSpec::Greedy => Box::new(Greedy),
        NatureSpec::Constant(y) => Box::new(ConstantNature { value: *y }),
        NatureSpec::Alternating => Box::new(Alternating),
        NatureSpec::UniformValue => Box::new(UniformValue::new(nature_seed(seed))),
        NatureSpec::Probe(_) => {
            return Err(CalError::Config("probe:<delta> needs an interval forecast (game II)".into()))
        }
    })
}

pub fn build_game_ii_nature(spec: &NatureSpec, seed: u64) -> Result<Box<dyn GameIINature>> {
    Ok(match spec {
        NatureSpec::Bernoulli(p) => Box::new(BernoulliNature::new(*p)?),
        NatureSpec::Midpoint => Box::new(MidpointAdversary),
        NatureSpec::Greedy => Box::new(Greedy),
        NatureSpec::Constant(y) => Box::new(ConstantNature { value: *y }),
        NatureSpec::Alternating => Box::new(Alternating),
        NatureSpec::UniformValue => Box::new(UniformValue::new(nature_seed(seed))),
        NatureSpec::Probe(d) => Box::new(BoundaryProbe { delta: *d }),
        NatureSpec::Punisher => {
            return Err(CalError::Config("punisher targets point forecasts (game I)".into()))
        }
    })
}

/// Checkpoints `round(10^(1 + j/per_decade))` up to `max_t`, always ending
/// at `max_t`.
pub fn log_checkpoints(max_t: u64, per_decade: u32) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let mut j = 0;
    loop {
        let t = 10f64.powf(1.0 + j as f64 / per_decade as f64).round() as u64;
        if t >= max_t {
            break;
        }
        if out.last() != Some(&t) {
            out.push(t);
        }
        j += 1;
    }
    out.push(max_t);
    out
}

/// Parses `a..b` (half-open) or a comma-separated list.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    let bad = || CalError::Config(format!("cannot parse seeds {s:?}; use a..b or a,b,c"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if b <= a {
            return Err(bad());
        }
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse::<u64>().map_err(|_| bad()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub game: GameMode,
    pub forecaster: String,
    pub nature: String,
    pub m: usize,
    pub checkpoints: Vec<u64>,
    pub seeds: Vec<u64>,
    pub t0: u64,
    /// Multiplies the `c1` constant of `K_k`.
    pub kk_scale: f64,
    pub c2: f64,
    pub c3: f64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(game: GameMode, forecaster: &str, nature: &str, m: usize, max_t: u64) -> Self {
        Self {
            game,
            forecaster: forecaster.into(),
            nature: nature.into(),
            m,
            checkpoints: log_checkpoints(max_t, 4),
            seeds: vec![0],
            t0: 1000,
            kk_scale: 1.0,
            c2: DEFAULT_C2,
            c3: DEFAULT_C3,
            out: None,
        }
    }

    pub fn schedule(&self) -> DoublingSchedule {
        let mut s = DoublingSchedule::new(self.t0, self.m).with_c1_scale(self.kk_scale);
        s.c2 = self.c2;
        s.c3 = self.c3;
        s
    }

    pub fn horizon(&self) -> u64 {
        self.checkpoints.last().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(ForecasterSpec, NatureSpec)> {
        if self.m < 2 {
            return Err(CalError::GridTooSmall(self.m));
        }
        if self.checkpoints.is_empty()
            || self.checkpoints[0] == 0
            || self.checkpoints.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(CalError::Config("checkpoints must be positive and increasing".into()));
        }
        if self.seeds.is_empty() {
            return Err(CalError::Config("at least one seed is required".into()));
        }
        let f = ForecasterSpec::parse(&self.forecaster)?;
        let n = NatureSpec::parse(&self.nature)?;
        let grid = Grid::new(self.m)?;
        match self.game {
            GameMode::BinaryI => {
                build_point_forecaster(&f, &grid, &self.schedule())?;
                build_game_i_nature(&n, 0)?;
            }
            GameMode::BinaryII | GameMode::BoundedII => {
                build_interval_forecaster(&f)?;
                build_game_ii_nature(&n, 0)?;
            }
        }
        Ok((f, n))
    }

    /// File stem identifying the matchup.
    pub fn stem(&self) -> String {
        let raw = format!("{}_{}_{}_m{}", self.game.label(), self.forecaster, self.nature, self.m);
        raw.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '-' })
            .collect()
    }
}

/// Metrics of one seed's run at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub seed: u64,
    pub t: u64,
    pub ce: f64,
    pub eps_ce: f64,
    pub counts: Vec<u64>,
    pub means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub t: u64,
    pub mean_ce: f64,
    pub mean_eps_ce: f64,
    /// Mean of the unclamped `CE_T - ε`.
    pub mean_ce_minus_eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateEstimate {
    Slope { slope: f64, points: usize, zeros_excluded: usize },
    Undefined { positive_points: usize, zeros_excluded: usize },
}

impl RateEstimate {
    pub fn slope(&self) -> Option<f64> {
        match self {
            RateEstimate::Slope { slope, .. } => Some(*slope),
            RateEstimate::Undefined { .. } => None,
        }
    }
}

impl std::fmt::Display for RateEstimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RateEstimate::Slope { slope, points, zeros_excluded } => {
                write!(f, "{slope:.4} ({points} points, {zeros_excluded} zeros excluded)")
            }
            RateEstimate::Undefined { positive_points, zeros_excluded } => write!(
                f,
                "undefined ({positive_points} positive points, {zeros_excluded} zeros): at or below bound"
            ),
        }
    }
}

/// Least-squares slope of `ln value` against `ln T` over the points with a
/// positive value. Needs at least three such points.
pub fn estimate_rate(series: &[(f64, f64)]) -> RateEstimate {
    let positive: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, v)| *t > 0.0 && *v > 0.0)
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    let zeros_excluded = series.len() - positive.len();
    if positive.len() < 3 {
        return RateEstimate::Undefined { positive_points: positive.len(), zeros_excluded };
    }
    let n = positive.len() as f64;
    let mx = positive.iter().map(|p| p.0).sum::<f64>() / n;
    let my = positive.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = positive.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = positive.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return RateEstimate::Undefined { positive_points: positive.len(), zeros_excluded };
    }
    RateEstimate::Slope { slope: sxy / sxx, points: positive.len(), zeros_excluded }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: ExperimentConfig,
    pub epsilon: f64,
    pub records: Vec<CheckpointRecord>,
    pub aggregate: Vec<AggregateRow>,
    pub eps_ce_rate: RateEstimate,
}

/// Seed-means per checkpoint, summing in record order.
pub fn aggregate(records: &[(u64, f64, f64)], epsilon: f64) -> Vec<AggregateRow> {
    let mut by_t: BTreeMap<u64, (f64, f64, f64, usize)> = BTreeMap::new();
    for &(t, ce, eps_ce) in records {
        let e = by_t.entry(t).or_insert((0.0, 0.0, 0.0, 0));
        e.0 += ce;
        e.1 += eps_ce;
        e.2 += ce - epsilon;
        e.3 += 1;
    }
    by_t.into_iter()
        .map(|(t, (ce, eps, diff, n))| AggregateRow {
            t,
            mean_ce: ce / n as f64,
            mean_eps_ce: eps / n as f64,
            mean_ce_minus_eps: diff / n as f64,
        })
        .collect()
}

fn eps_rate(rows: &[AggregateRow]) -> RateEstimate {
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.t as f64, r.mean_eps_ce)).collect();
    estimate_rate(&series)
}

fn snapshot(seed: u64, state: &CalState) -> CheckpointRecord {
    let ce = calibration_error_of_state(state);
    let m = state.grid().m();
    CheckpointRecord {
        seed,
        t: state.t(),
        ce,
        eps_ce: (ce - state.grid().epsilon()).max(0.0),
        counts: state.bins().iter().map(|b| b.n).collect(),
        means: (0..m).map(|i| state.mean(i)).collect(),
    }
}

/// Plays one seed to the last checkpoint, recording metrics at every
/// checkpoint.
pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<Vec<CheckpointRecord>> {
    let (fspec, nspec) = config.validate()?;
    let grid = Grid::new(config.m)?;
    let horizon = config.horizon();
    let mut records = Vec::with_capacity(config.checkpoints.len());
    let mut next = 0;
    let mut observer = |ev: &RoundEvent<'_>| {
        if next < config.checkpoints.len() && ev.t == config.checkpoints[next] {
            records.push(snapshot(seed, ev.state));
            next += 1;
        }
    };
    match config.game {
        GameMode::BinaryI => {
            let mut f = build_point_forecaster(&fspec, &grid, &config.schedule())?;
            let mut n = build_game_i_nature(&nspec, seed)?;
            run_game_i(f.as_mut(), n.as_mut(), &grid, horizon, seed, &mut observer)?;
        }
        GameMode::BinaryII | GameMode::BoundedII => {
            let bounded = config.game == GameMode::BoundedII;
            let mut f = build_interval_forecaster(&fspec)?;
            let mut n = build_game_ii_nature(&nspec, seed)?;
            run_game_ii(f.as_mut(), n.as_mut(), &grid, bounded, horizon, seed, &mut observer)?;
        }
    }
    Ok(records)
}

/// Runs every seed in parallel and aggregates; writes CSV and JSON when
/// an output directory is configured.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunResult> {
    config.validate()?;
    let per_seed: Vec<Result<Vec<CheckpointRecord>>> =
        config.seeds.par_iter().map(|&s| run_seed(config, s)).collect();
    let mut records = Vec::new();
    for r in per_seed {
        records.extend(r?);
    }
    let epsilon = Grid::new(config.m)?.epsilon();
    let flat: Vec<(u64, f64, f64)> = records.iter().map(|r| (r.t, r.ce, r.eps_ce)).collect();
    let aggregate = aggregate(&flat, epsilon);
    let eps_ce_rate = eps_rate(&aggregate);
    let result = RunResult { config: config.clone(), epsilon, records, aggregate, eps_ce_rate };
    if let Some(dir) = &config.out {
        write_outputs(&result, dir)?;
    }
    Ok(result)
}

pub const CSV_HEADER: [&str; 8] = ["game", "forecaster", "nature", "m", "seed", "T", "ce", "eps_ce"];

/// Writes the per-seed checkpoint rows.
pub fn write_csv<W: std::io::Write>(result: &RunResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    let c = &result.config;
    for r in &result.records {
        w.write_record([
            c.game.label().to_string(),
            c.forecaster.clone(),
            c.nature.clone(),
            c.m.to_string(),
            r.seed.to_string(),
            r.t.to_string(),
            r.ce.to_string(),
            r.eps_ce.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub epsilon: f64,
    pub checkpoints: Vec<AggregateRow>,
    pub eps_ce_rate: RateEstimate,
}

impl RunResult {
    pub fn summary(&self) -> Summary {
        Summary {
            config: self.config.clone(),
            epsilon: self.epsilon,
            checkpoints: self.aggregate.clone(),
            eps_ce_rate: self.eps_ce_rate.clone(),
        }
    }
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`, returning both paths.
pub fn write_outputs(result: &RunResult, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let stem = result.config.stem();
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_csv(result, fs::File::create(&csv_path)?)?;
    fs::write(&json_path, serde_json::to_string_pretty(&result.summary())?)?;
    Ok((csv_path, json_path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub game: String,
    pub forecaster: String,
    pub nature: String,
    pub m: usize,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: u64,
    pub ce: f64,
    pub eps_ce: f64,
}

pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(CalError::Config(format!(
            "unexpected CSV header {:?}; expected {}",
            headers.iter().collect::<Vec<_>>(),
            CSV_HEADER.join(",")
        )));
    }
    r.deserialize().map(|row| row.map_err(CalError::from)).collect()
}

/// Matchup key `(game, forecaster, nature, m)`.
pub type MatchupKey = (String, String, String, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct MatchupRates {
    pub key: MatchupKey,
    pub aggregate: Vec<AggregateRow>,
    pub eps_ce_rate: RateEstimate,
}

/// Groups CSV rows by matchup, averages over seeds and fits rates.
pub fn rates_from_rows(rows: &[CsvRow]) -> Vec<MatchupRates> {
    let mut groups: BTreeMap<MatchupKey, Vec<(u64, f64, f64)>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.game.clone(), r.forecaster.clone(), r.nature.clone(), r.m))
            .or_default()
            .push((r.t, r.ce, r.eps_ce));
    }
    groups
        .into_iter()
        .map(|(key, flat)| {
            let epsilon = 1.0 / (2.0 * key.3 as f64);
            let aggregate = aggregate(&flat, epsilon);
            let eps_ce_rate = eps_rate(&aggregate);
            MatchupRates { key, aggregate, eps_ce_rate }
        })
        .collect()
}

/// Parses a flat `key = value` sweep file. `forecaster`, `nature` and `m`
/// accept comma-separated lists and expand to their cartesian product.
pub fn parse_sweep(text: &str) -> Result<Vec<ExperimentConfig>> {
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CalError::Config(format!("line {}: expected key = value", lineno + 1))
        })?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let known = [
        "game", "forecaster", "nature", "m", "max_t", "checkpoints", "seeds", "t0", "kk_scale",
        "c2", "c3", "out", "per_decade",
    ];
    if let Some(k) = kv.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(CalError::Config(format!("unknown sweep key {k:?}")));
    }
    let need = |k: &str| {
        kv.get(k).cloned().ok_or_else(|| CalError::Config(format!("sweep file is missing {k:?}")))
    };
    let num = |k: &str, v: &str| -> Result<f64> {
        v.parse().map_err(|_| CalError::Config(format!("{k}: cannot parse {v:?}")))
    };
    let game = GameMode::parse(&need("game")?)?;
    let list = |s: String| s.split(',').map(|x| x.trim().to_string()).collect::<Vec<_>>();
    let forecasters = list(need("forecaster")?);
    let natures = list(need("nature")?);
    let ms = list(need("m")?)
        .into_iter()
        .map(|x| x.parse::<usize>().map_err(|_| CalError::Config(format!("m: cannot parse {x:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let checkpoints = match (kv.get("checkpoints"), kv.get("max_t")) {
        (Some(c), _) => list(c.clone())
            .into_iter()
            .map(|x| x.parse::<u64>().map_err(|_| CalError::Config(format!("checkpoints: {x:?}"))))
            .collect::<Result<Vec<_>>>()?,
        (None, Some(t)) => {
            let per_decade = kv.get("per_decade").map(|v| num("per_decade", v)).transpose()?;
            log_checkpoints(num("max_t", t)? as u64, per_decade.unwrap_or(4.0) as u32)
        }
        (None, None) => return Err(CalError::Config("sweep needs max_t or checkpoints".into())),
    };
    let seeds = parse_seeds(kv.get("seeds").map(String::as_str).unwrap_or("0"))?;
    let mut out = Vec::new();
    for f in &forecasters {
        for n in &natures {
            for &m in &ms {
                let mut c = ExperimentConfig::new(game, f, n, m, 10);
                c.checkpoints = checkpoints.clone();
                c.seeds = seeds.clone();
                if let Some(v) = kv.get("t0") {
                    c.t0 = num("t0", v)? as u64;
                }
                if let Some(v) = kv.get("kk_scale") {
                    c.kk_scale = num("kk_scale", v)?;
                }
                if let Some(v) = kv.get("c2") {
                    c.c2 = num("c2", v)?;
                }
                if let Some(v) = kv.get("c3") {
                    c.c3 = num("c3", v)?;
                }
                c.out = kv.get("out").map(PathBuf::from);
                c.validate()?;
                out.push(c);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_of_exact_power_laws() {
        let s: Vec<(f64, f64)> = [10.0, 100.0, 1e3, 1e4].iter().map(|&t| (t, 7.0 / t)).collect();
        assert!((estimate_rate(&s).slope().unwrap() + 1.0).abs() < 1e-9);
        let s: Vec<(f64, f64)> = [10.0f64, 100.0, 1e3].iter().map(|&t| (t, 3.0 / t.sqrt())).collect();
        assert!((estimate_rate(&s).slope().unwrap() + 0.5).abs() < 1e-9);
        let s = vec![(10.0, 0.0), (100.0, 0.0), (1000.0, 0.0)];
        assert_eq!(
            estimate_rate(&s),
            RateEstimate::Undefined { positive_points: 0, zeros_excluded: 3 }
        );
    }

    #[test]
    fn strategy_names_round_trip() {
        for name in ["potc-cal", "foster99", "pi-f99", "constant:3", "uniform"] {
            assert_eq!(ForecasterSpec::parse(name).unwrap().name(), name);
        }
        for name in ["punisher", "bernoulli:0.37", "midpoint", "greedy", "constant:1", "alternating"] {
            assert_eq!(NatureSpec::parse(name).unwrap().name(), name);
        }
    }

    #[test]
    fn unknown_forecaster_names_options() {
        let err = ForecasterSpec::parse("potc-call").unwrap_err().to_string();
        assert!(err.contains("potc-call") && err.contains("potc-cal") && err.contains("foster99"));
        assert!(NatureSpec::parse("bernoulli:1.5").is_err());
        assert!(ForecasterSpec::parse("constant:0").is_err());
    }

    #[test]
    fn incompatible_modes() {
        let c = ExperimentConfig::new(GameMode::BinaryI, "potc-cal", "greedy", 5, 100);
        assert!(matches!(c.validate(), Err(CalError::Config(_))));
        let c = ExperimentConfig::new(GameMode::BinaryII, "foster99", "greedy", 5, 100);
        assert!(c.validate().is_err());
        let c = ExperimentConfig::new(GameMode::BinaryII, "potc-cal", "punisher", 5, 100);
        assert!(c.validate().is_err());
        let c = ExperimentConfig::new(GameMode::BinaryI, "constant:6", "punisher", 5, 100);
        assert!(c.validate().is_err());
    }

    #[test]
    fn checkpoints_are_log_spaced() {
        let c = log_checkpoints(1000, 4);
        assert_eq!(c, vec![10, 18, 32, 56, 100, 178, 316, 562, 1000]);
        assert_eq!(log_checkpoints(5, 4), vec![5]);
    }

    #[test]
    fn seeds_parse() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("4, 9").unwrap(), vec![4, 9]);
        assert!(parse_seeds("3..3").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn sweep_expands_lists() {
        let text = "# demo\ngame = II\nforecaster = potc-cal\nnature = greedy, alternating\nm = 2,5\nmax_t = 1000\nseeds = 0..2\n";
        let cfgs = parse_sweep(text).unwrap();
        assert_eq!(cfgs.len(), 4);
        assert_eq!(cfgs[0].seeds, vec![0, 1]);
        assert!(parse_sweep("game = II\nbogus = 1\n").is_err());
        assert!(parse_sweep("game = II\nforecaster = potc-cal\nnature = greedy\nm = 5\n").is_err());
    }
}
