//! Forecast grid and running per-bin statistics.
//!
//! Bins are zero-based in code: bin `i` covers `[i/m, (i+1)/m)` (the last
//! bin is closed) and has midpoint `(2i+1)/(2m)`. User-facing strings
//! (CLI, strategy names) use one-based bin numbers.

use serde::{Deserialize, Serialize};

use crate::error::{CalError, Result};

/// The uniform 2ε-grid of forecast values with ε = 1/(2m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    m: usize,
    epsilon: f64,
    midpoints: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl Grid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(CalError::GridTooSmall(m));
        }
        let mf = m as f64;
        let midpoints = (0..m).map(|i| (2 * i + 1) as f64 / (2.0 * mf)).collect();
        let left = (0..m).map(|i| i as f64 / mf).collect();
        let right = (0..m).map(|i| (i + 1) as f64 / mf).collect();
        Ok(Self {
            m,
            epsilon: 1.0 / (2.0 * mf),
            midpoints,
            left,
            right,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        self.midpoints[i]
    }

    /// Left endpoint `l_i = i/m`.
    pub fn left(&self, i: usize) -> f64 {
        self.left[i]
    }

    /// Right endpoint `r_i = (i+1)/m`.
    pub fn right(&self, i: usize) -> f64 {
        self.right[i]
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.m {
            Ok(())
        } else {
            Err(CalError::IndexOutOfRange { index: i, m: self.m })
        }
    }

    /// Index of the bin containing `v`. Bins are half-open `[l, r)` except
    /// the last one, which also contains 1.
    pub fn bin_of(&self, v: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&v) {
            return Err(CalError::OutOfUnitInterval(v));
        }
        let guess = ((v * self.m as f64).floor() as usize).min(self.m - 1);
        // floor(v*m) can land one bin off when v sits on an endpoint that
        // is not exactly representable.
        let mut j = guess;
        if j > 0 && v < self.left[j] {
            j -= 1;
        } else if j + 1 < self.m && v >= self.right[j] {
            j += 1;
        }
        Ok(j)
    }
}

/// Count and outcome sum for one bin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BinStats {
    pub n: u64,
    pub sum: f64,
}

impl BinStats {
    /// Running mean, or `default` (the bin midpoint) when the bin is unplayed.
    pub fn mean_or(&self, default: f64) -> f64 {
        if self.n == 0 {
            default
        } else {
            self.sum / self.n as f64
        }
    }
}

/// Per-bin statistics after `t` rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalState {
    grid: Grid,
    bins: Vec<BinStats>,
    t: u64,
}

impl CalState {
    pub fn new(grid: Grid) -> Self {
        let bins = vec![BinStats::default(); grid.m()];
        Self { grid, bins, t: 0 }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bins(&self) -> &[BinStats] {
        &self.bins
    }

    pub fn bin(&self, i: usize) -> BinStats {
        self.bins[i]
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Records `outcome` against bin `i`.
    pub fn update(&mut self, i: usize, outcome: f64) -> Result<()> {
        self.grid.check_index(i)?;
        if !(0.0..=1.0).contains(&outcome) {
            return Err(CalError::OutOfUnitInterval(outcome));
        }
        let b = &mut self.bins[i];
        b.n += 1;
        b.sum += outcome;
        self.t += 1;
        Ok(())
    }

    /// Observed average `p_i`; the midpoint for an unplayed bin.
    pub fn mean(&self, i: usize) -> f64 {
        self.bins[i].mean_or(self.grid.midpoint(i))
    }

    /// `d_i = l_i - p_i`, positive when the bin mean sits left of its interval.
    pub fn deficit(&self, i: usize) -> f64 {
        self.grid.left(i) - self.mean(i)
    }

    /// `e_i = p_i - r_i`, positive when the bin mean sits right of its interval.
    pub fn excess(&self, i: usize) -> f64 {
        self.mean(i) - self.grid.right(i)
    }

    /// Condition A at bin `i`: the mean lies inside `[l_i, r_i]`.
    pub fn in_interval(&self, i: usize) -> bool {
        self.deficit(i) <= 0.0 && self.excess(i) <= 0.0
    }

    /// Condition B at `i`: bin `i` in excess and bin `i + 1` in deficit.
    pub fn excess_deficit_pair(&self, i: usize) -> bool {
        i + 1 < self.grid.m() && self.excess(i) > 0.0 && self.deficit(i + 1) > 0.0
    }

    /// Per-bin potential `N_i * max(d_i, e_i)`, evaluated from the count and
    /// sum without dividing.
    pub fn potential(&self, i: usize) -> f64 {
        let b = self.bins[i];
        if b.n == 0 {
            return 0.0;
        }
        let n = b.n as f64;
        let d = n * self.grid.left(i) - b.sum;
        let e = b.sum - n * self.grid.right(i);
        d.max(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_m2() {
        let g = Grid::new(2).unwrap();
        assert_eq!(g.epsilon(), 0.25);
        assert_eq!(g.midpoints(), &[0.25, 0.75]);
        assert_eq!((g.left(0), g.left(1)), (0.0, 0.5));
        assert_eq!((g.right(0), g.right(1)), (0.5, 1.0));
    }

    #[test]
    fn grid_m5_midpoints() {
        let g = Grid::new(5).unwrap();
        assert_eq!(g.epsilon(), 0.1);
        let expect = [0.1, 0.3, 0.5, 0.7, 0.9];
        for (a, b) in g.midpoints().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_rejects_single_bin() {
        assert_eq!(Grid::new(1), Err(CalError::GridTooSmall(1)));
        assert!(Grid::new(0).is_err());
    }

    #[test]
    fn grid_geometry() {
        for m in 2..60 {
            let g = Grid::new(m).unwrap();
            assert_eq!(g.left(0), 0.0);
            assert_eq!(g.right(m - 1), 1.0);
            for i in 0..m {
                assert!((g.midpoint(i) - 0.5 * (g.left(i) + g.right(i))).abs() < 1e-15);
                assert!((g.right(i) - g.left(i) - 2.0 * g.epsilon()).abs() < 1e-15);
                if i + 1 < m {
                    assert!(g.midpoint(i + 1) > g.midpoint(i));
                    assert!((g.midpoint(i + 1) - g.midpoint(i) - 2.0 * g.epsilon()).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn bin_of_boundaries() {
        let g2 = Grid::new(2).unwrap();
        assert_eq!(g2.bin_of(0.5).unwrap(), 1);
        let g5 = Grid::new(5).unwrap();
        assert_eq!(g5.bin_of(1.0).unwrap(), 4);
        assert_eq!(g5.bin_of(0.0).unwrap(), 0);
        assert!(g5.bin_of(-0.01).is_err());
        assert!(g5.bin_of(1.01).is_err());
        assert!(g5.bin_of(f64::NAN).is_err());
    }

    #[test]
    fn bin_of_matches_endpoints() {
        for m in 2..40 {
            let g = Grid::new(m).unwrap();
            for i in 0..m {
                assert_eq!(g.bin_of(g.left(i)).unwrap(), i, "m={m} i={i}");
                assert_eq!(g.bin_of(g.midpoint(i)).unwrap(), i);
            }
        }
    }

    #[test]
    fn update_means() {
        let mut s = CalState::new(Grid::new(2).unwrap());
        s.update(0, 1.0).unwrap();
        assert_eq!(s.bin(0).n, 1);
        assert_eq!(s.mean(0), 1.0);
        s.update(0, 0.0).unwrap();
        assert_eq!(s.bin(0).n, 2);
        assert_eq!(s.mean(0), 0.5);
        assert_eq!(s.bin(1), BinStats::default());
        assert_eq!(s.t(), 2);
        assert!(s.update(2, 0.0).is_err());
        assert!(s.update(0, 1.5).is_err());
    }

    #[test]
    fn deficit_excess_values() {
        let mut s = CalState::new(Grid::new(2).unwrap());
        assert_eq!((s.deficit(0), s.excess(0)), (-0.25, -0.25));
        assert!(s.in_interval(0));
        s.update(0, 1.0).unwrap();
        assert_eq!(s.deficit(0), -1.0);
        assert_eq!(s.excess(0), 0.5);
        assert_eq!(s.potential(0), 0.5);
    }
}
