//! Geometric time grids and discretized trajectories in the weighted norm.

use nalgebra::DVector;

use crate::error::{Error, Result};

pub const MIN_INTERVALS: usize = 32;
pub const DEFAULT_INTERVALS: usize = 128;
/// `T = DEFAULT_HORIZON_FACTOR / σ`.
pub const DEFAULT_HORIZON_FACTOR: f64 = 14.0;
/// First step `DEFAULT_FIRST_STEP_FACTOR / σ`.
pub const DEFAULT_FIRST_STEP_FACTOR: f64 = 0.01;

/// Nodes `t_j = T (q^j - 1)/(q^N - 1)`, `j = 0..=N` (uniform when `q = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub horizon: f64,
    pub intervals: usize,
    pub ratio: f64,
}

impl GridSpec {
    /// Chooses the ratio so that the first step is `first_step`.
    pub fn geometric(horizon: f64, intervals: usize, first_step: f64) -> Result<Self> {
        if !(horizon > 0.0 && first_step > 0.0) || intervals == 0 {
            return Err(Error::InvalidArgument(
                "grid needs a positive horizon, first step and interval count".into(),
            ));
        }
        let n = intervals as f64;
        if horizon / n <= first_step {
            return Ok(Self {
                horizon,
                intervals,
                ratio: 1.0,
            });
        }
        let first = |q: f64| {
            let l = q.ln();
            horizon * l.exp_m1() / (n * l).exp_m1()
        };
        let mut hi = 2.0;
        while first(hi) >= first_step {
            hi *= 2.0;
        }
        let mut lo = 1.0 + 1e-15;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if first(mid) > first_step {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Self {
            horizon,
            intervals,
            ratio: 0.5 * (lo + hi),
        })
    }

    /// `T = 14/σ`, `N = 128`, first step `0.01/σ`.
    pub fn default_for(sigma: f64) -> Result<Self> {
        Self::with_intervals(sigma, DEFAULT_INTERVALS)
    }

    pub fn with_intervals(sigma: f64, intervals: usize) -> Result<Self> {
        Self::geometric(
            DEFAULT_HORIZON_FACTOR / sigma,
            intervals,
            DEFAULT_FIRST_STEP_FACTOR / sigma,
        )
    }

    /// Doubles the interval count with ratio `√q`; every old node is kept.
    pub fn refined(&self) -> Self {
        Self {
            horizon: self.horizon,
            intervals: 2 * self.intervals,
            ratio: self.ratio.sqrt(),
        }
    }

    /// Stretches the horizon by `factor`, adding nodes so that the first step
    /// stays (nearly) the same.
    pub fn extended(&self, factor: f64) -> Result<Self> {
        let horizon = self.horizon * factor;
        if self.ratio == 1.0 {
            let intervals = (self.intervals as f64 * factor).ceil() as usize;
            return Ok(Self {
                horizon,
                intervals,
                ratio: 1.0,
            });
        }
        let h1 = self.offsets()[1];
        let l = self.ratio.ln();
        let intervals = ((horizon * l.exp_m1() / h1).ln_1p() / l).ceil() as usize;
        Self::geometric(horizon, intervals.max(self.intervals), h1)
    }

    /// Offsets `0 = t_0 < … < t_N = T`.
    pub fn offsets(&self) -> Vec<f64> {
        let n = self.intervals;
        let mut t = Vec::with_capacity(n + 1);
        if self.ratio == 1.0 {
            t.extend((0..=n).map(|j| self.horizon * j as f64 / n as f64));
        } else {
            let l = self.ratio.ln();
            let denom = (n as f64 * l).exp_m1();
            t.extend((0..=n).map(|j| self.horizon * (j as f64 * l).exp_m1() / denom));
        }
        t[n] = self.horizon;
        t
    }

    pub fn max_step(&self) -> f64 {
        self.offsets()
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Signed, increasing node times for a given direction.
    pub fn nodes(&self, direction: Direction) -> Vec<f64> {
        let off = self.offsets();
        match direction {
            Direction::Forward => off,
            Direction::Backward => {
                let mut t: Vec<f64> = off.iter().rev().map(|t| -t).collect();
                t[self.intervals] = 0.0;
                t
            }
        }
    }

    pub fn validate(&self, sigma: f64) -> Result<()> {
        if self.intervals < MIN_INTERVALS {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least {MIN_INTERVALS} intervals, got {}",
                self.intervals
            )));
        }
        if self.horizon * sigma < 10.0 * (1.0 - 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "grid horizon {:.6e} is shorter than 10/sigma = {:.6e}",
                self.horizon,
                10.0 / sigma
            )));
        }
        if !(self.ratio >= 1.0) {
            return Err(Error::InvalidArgument("grid ratio must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `t ∈ [0, T]`, used for stable fibers.
    Forward,
    /// `t ∈ [-T, 0]`, used for unstable fibers.
    Backward,
}

/// A discretized path `(x(t), y(t), z(t))`; nodes are increasing in both
/// directions, so `t = 0` is the first node forward and the last backward.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryGrid {
    pub direction: Direction,
    pub nodes: Vec<f64>,
    pub sigma: f64,
    pub x: Vec<DVector<f64>>,
    pub y: Vec<DVector<f64>>,
    pub z: Vec<DVector<f64>>,
}

impl TrajectoryGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the node at `t = 0`.
    pub fn origin_index(&self) -> usize {
        match self.direction {
            Direction::Forward => 0,
            Direction::Backward => self.nodes.len() - 1,
        }
    }

    /// `max_j e^{σ|t_j|} (|x_j| + |y_j| + |z_j|)`.
    pub fn weighted_norm(&self) -> f64 {
        (0..self.len())
            .map(|j| {
                (self.sigma * self.nodes[j].abs()).exp()
                    * (self.x[j].norm() + self.y[j].norm() + self.z[j].norm())
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let sigma = 0.81;
        let g = GridSpec::default_for(sigma).unwrap();
        let t = g.offsets();
        assert_eq!(t.len(), 129);
        assert_eq!(t[0], 0.0);
        assert!((t[128] - 14.0 / sigma).abs() < 1e-12);
        assert!((t[1] - 0.01 / sigma).abs() < 1e-10);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        g.validate(sigma).unwrap();
    }

    #[test]
    fn refinement_is_nested() {
        let g = GridSpec::default_for(1.0).unwrap();
        let f = g.refined();
        let (a, b) = (g.offsets(), f.offsets());
        for j in 0..a.len() {
            assert!((a[j] - b[2 * j]).abs() < 1e-12 * (1.0 + a[j]));
        }
        assert!(f.max_step() < 0.55 * g.max_step());
    }

    #[test]
    fn extension_keeps_first_step() {
        let g = GridSpec::default_for(1.0).unwrap();
        let e = g.extended(1.25).unwrap();
        assert!((e.horizon - 17.5).abs() < 1e-12);
        assert!(e.intervals > g.intervals);
        let (a, b) = (g.offsets(), e.offsets());
        assert!((a[1] - b[1]).abs() < 1e-10);
    }

    #[test]
    fn backward_nodes_mirror_forward() {
        let g = GridSpec::default_for(1.0).unwrap();
        let b = g.nodes(Direction::Backward);
        assert_eq!(b[b.len() - 1], 0.0);
        assert!((b[0] + 14.0).abs() < 1e-12);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_short_grids() {
        let g = GridSpec::geometric(5.0, 128, 0.01).unwrap();
        assert!(g.validate(1.0).is_err());
        let g = GridSpec::geometric(20.0, 16, 0.01).unwrap();
        assert!(g.validate(1.0).is_err());
    }
}
