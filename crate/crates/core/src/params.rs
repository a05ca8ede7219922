use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Round-off slack tolerated when `ea2 - ea1^2` dips below zero, for
/// unit-scale features.
pub const VARIANCE_SLACK: f64 = 1e-12;

/// Divisor applied to preference weights in the point-to-center distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceNormalizer {
    /// Divide by the preference constant, consistent with the radius.
    Rho,
    /// Divide by the variance threshold.
    Xi,
}

/// Thresholds and constants shared by every stage of the clusterer.
///
/// Defaults follow the reference parameter table: `N = 200`, `pi = 30`,
/// `mu = 10`, `beta = 0.2`, `xi = 0.002`, 1000 initial points, `eps = 10`
/// and a one-window horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Window length `N` in points.
    pub n_window: usize,
    /// Smoothing factor of the moving averages.
    pub alpha: f64,
    /// Variance threshold below which a dimension is preferred.
    pub xi: f64,
    /// Weight given to preferred dimensions (`rho >> 1`).
    pub rho: f64,
    /// Radius / neighborhood threshold.
    pub eps: f64,
    /// Point-count threshold.
    pub mu: f64,
    /// Maximum projected dimensionality of a core micro-cluster.
    pub pi_dim: usize,
    /// Outlier threshold, a fraction of `mu`.
    pub beta: f64,
    /// Purity horizon in windows.
    pub horizon: usize,
    pub initial_points: usize,
    /// Fading rate of the baseline `2^(-lambda * t / N)` summaries.
    pub lambda: f64,
    /// Fraction of a window above which a micro-cluster counts as a burst.
    pub burst_fraction: f64,
    /// Decay the weight along with the averages when a tuple misses a point.
    pub decay_weight: bool,
    pub distance_normalizer: DistanceNormalizer,
}

impl Default for Params {
    fn default() -> Self {
        Self::with_window(200)
    }
}

impl Params {
    /// Defaults with a different window length; `alpha` follows `2 / (1 + N)`.
    pub fn with_window(n_window: usize) -> Self {
        Params {
            n_window,
            alpha: smoothing_factor(n_window),
            xi: 0.002,
            rho: 1000.0,
            eps: 10.0,
            mu: 10.0,
            pi_dim: 30,
            beta: 0.2,
            horizon: 1,
            initial_points: 1000,
            lambda: 0.2324,
            burst_fraction: 0.9,
            decay_weight: true,
            distance_normalizer: DistanceNormalizer::Rho,
        }
    }

    /// Changes `N` and resets `alpha` to `2 / (1 + N)`.
    pub fn set_window(&mut self, n_window: usize) {
        self.n_window = n_window;
        self.alpha = smoothing_factor(n_window);
    }

    /// Weight threshold that separates core from outlier micro-clusters.
    pub fn outlier_weight(&self) -> f64 {
        self.beta * self.mu
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(name: &'static str, reason: impl Into<String>) -> Result<()> {
            Err(Error::InvalidParam {
                name,
                reason: reason.into(),
            })
        }
        if self.n_window == 0 {
            return bad("N", "must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha", format!("{} is outside (0, 1)", self.alpha));
        }
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return bad("xi", "must be a positive finite number");
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad("rho", "must be a positive finite number");
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad("epsilon", "must be a positive finite number");
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad("mu", "must be positive");
        }
        if self.pi_dim == 0 {
            return bad("pi", "must be positive");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta", format!("{} is outside (0, 1)", self.beta));
        }
        if self.horizon == 0 {
            return bad("H", "must be positive");
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda", "must be a positive finite number");
        }
        if !(self.burst_fraction > 0.0 && self.burst_fraction.is_finite()) {
            return bad("burstFraction", "must be positive");
        }
        Ok(())
    }

    /// Checks the constraints that depend on the stream dimensionality.
    pub fn validate_for_dim(&self, dim: usize) -> Result<()> {
        self.validate()?;
        if dim == 0 {
            return Err(Error::InvalidParam {
                name: "dim",
                reason: "streams must have at least one dimension".into(),
            });
        }
        if self.pi_dim > dim {
            return Err(Error::InvalidParam {
                name: "pi",
                reason: format!("{} exceeds the stream dimensionality {dim}", self.pi_dim),
            });
        }
        Ok(())
    }
}

pub fn smoothing_factor(n_window: usize) -> f64 {
    2.0 / (1.0 + n_window as f64)
}
