//! Run configuration: a TOML file, overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Overrides the registry's reference equilibrium.
    pub equilibrium: Option<Vec<f64>>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub chart: ChartConfig,
    #[serde(default)]
    pub fiber: FiberConfig,
    #[serde(default)]
    pub foliate: FoliateConfig,
    #[serde(default)]
    pub decompose: DecomposeConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub sigma: Option<f64>,
    pub tol_residual: Option<f64>,
    /// Grid intervals `N`.
    pub intervals: Option<usize>,
    /// Grid horizon `T`.
    pub horizon: Option<f64>,
    pub radius: Option<f64>,
    pub max_iters: Option<usize>,
    pub max_extensions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChartConfig {
    /// Random samples for the equilibrium-system check.
    pub samples: usize,
    /// Points per center coordinate in the plotted graph.
    pub plot_points: usize,
    pub rho_0: Option<f64>,
}

impl Default for ChartConfig {
    fn default() -> Self {
        Self {
            samples: 20,
            plot_points: 41,
            rho_0: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberConfig {
    pub kind: Option<String>,
    /// Coordinates in the orthonormal basis of the stable (unstable) subspace.
    pub boundary: Option<Vec<f64>>,
    /// Coordinates in the orthonormal basis of the center subspace.
    pub xi: Option<Vec<f64>>,
}

/// `points` evenly spaced values in `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.min],
            p => (0..p)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (p - 1) as f64)
                .collect(),
        }
    }
}

impl Default for Axis {
    fn default() -> Self {
        Self {
            min: -0.1,
            max: 0.1,
            points: 11,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoliateConfig {
    pub kind: Option<String>,
    /// Values for every boundary coordinate.
    #[serde(default)]
    pub boundary: Axis,
    /// Values for every center coordinate.
    #[serde(default)]
    pub xi: Axis,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeConfig {
    pub u0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub kind: Option<String>,
    /// Flow horizon; defaults to `30/σ`.
    pub horizon: Option<f64>,
    #[serde(default)]
    pub points: Vec<PointConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub boundary: Vec<f64>,
    pub xi: Vec<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks that do not need the problem.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, why: &str| Err(CliError::Config(format!("`{field}` {why}")));
        let s = &self.solver;
        if s.sigma.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
            return bad("solver.sigma", "must be positive");
        }
        if s.tol_residual.is_some_and(|v| !(v > 0.0 && v <= 1e-3)) {
            return bad("solver.tol_residual", "must lie in (0, 1e-3]");
        }
        if s.intervals
            .is_some_and(|v| v < foliation_core::lpsolver::grid::MIN_INTERVALS)
        {
            return bad("solver.intervals", "must be at least 32");
        }
        if s.horizon.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
            return bad("solver.horizon", "must be positive");
        }
        if s.radius.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
            return bad("solver.radius", "must be positive");
        }
        if s.max_iters == Some(0) {
            return bad("solver.max_iters", "must be positive");
        }
        if self
            .chart
            .rho_0
            .is_some_and(|v| !(v > 0.0 && v.is_finite()))
        {
            return bad("chart.rho_0", "must be positive");
        }
        if self
            .verify
            .horizon
            .is_some_and(|v| !(v > 0.0 && v.is_finite()))
        {
            return bad("verify.horizon", "must be positive");
        }
        for (name, axis) in [
            ("foliate.boundary", &self.foliate.boundary),
            ("foliate.xi", &self.foliate.xi),
        ] {
            if !(axis.min.is_finite() && axis.max.is_finite()) || axis.min > axis.max {
                return bad(name, "needs finite min <= max");
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<&str, CliError> {
        self.problem.as_deref().ok_or_else(|| {
            CliError::Config("no problem given (set `problem` or pass --problem)".into())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let cfg = RunConfig::parse(
            r#"
problem = "linear-diag"
seed = 3
params = { stable_rate = 2.0 }

[solver]
intervals = 64
tol_residual = 1e-10

[foliate]
kind = "stable"
boundary = { min = -0.05, max = 0.05, points = 3 }

[[verify.points]]
boundary = [0.1]
xi = [0.0]
"#,
        )
        .unwrap();
        assert_eq!(cfg.problem.as_deref(), Some("linear-diag"));
        assert_eq!(cfg.params["stable_rate"], 2.0);
        assert_eq!(cfg.solver.intervals, Some(64));
        assert_eq!(cfg.foliate.boundary.values(), vec![-0.05, 0.0, 0.05]);
        assert_eq!(cfg.foliate.xi, Axis::default());
        assert_eq!(cfg.verify.points.len(), 1);
    }

    #[test]
    fn unknown_fields_are_reported_with_position() {
        let err =
            RunConfig::parse("problem = \"line-stable\"\n[solver]\nsigmaa = 0.5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sigmaa"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn out_of_range_overrides_are_rejected() {
        assert!(RunConfig::parse("[solver]\nintervals = 8\n").is_err());
        assert!(RunConfig::parse("[solver]\nsigma = -1.0\n").is_err());
        assert!(
            RunConfig::parse("[foliate]\nxi = { min = 1.0, max = 0.0, points = 3 }\n").is_err()
        );
    }

    #[test]
    fn axis_values() {
        let empty = Axis {
            min: 0.0,
            max: 1.0,
            points: 0,
        };
        assert!(empty.values().is_empty());
        let one = Axis {
            min: 0.5,
            max: 1.0,
            points: 1,
        };
        assert_eq!(one.values(), vec![0.5]);
    }
}
