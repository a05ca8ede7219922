//! Micro-cluster summaries and the projected-subspace math shared by both
//! summary flavours.
//!
//! Every quantity the clusterer needs (variance, preferred dimensions,
//! projected radius and distance, core/outlier classification) is a function
//! of the first and second weighted moments plus the weight. [`Moments`]
//! carries exactly that view; [`Summary`] is implemented by the
//! moving-average tuple ([`EaTuple`]) and the fading-sum baseline
//! ([`CfTuple`]) so the online engine can run either.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DistanceNormalizer, Params, VARIANCE_SLACK};
use crate::point::{check_dim, Point};

mod cf;
mod ea;

pub use cf::CfTuple;
pub use ea::EaTuple;

/// Identifier of a micro-cluster, unique within one engine.
pub type TupleId = u64;

/// Per-dimension two-valued weights: `rho` on preferred dimensions, 1 elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceVector {
    preferred: Vec<bool>,
    rho: f64,
}

impl PreferenceVector {
    pub fn from_variances(variances: &[f64], params: &Params) -> Self {
        PreferenceVector {
            preferred: variances.iter().map(|&v| v < params.xi).collect(),
            rho: params.rho,
        }
    }

    pub fn all_preferred(dim: usize, rho: f64) -> Self {
        PreferenceVector {
            preferred: vec![true; dim],
            rho,
        }
    }

    pub fn none_preferred(dim: usize, rho: f64) -> Self {
        PreferenceVector {
            preferred: vec![false; dim],
            rho,
        }
    }

    pub fn from_mask(preferred: Vec<bool>, rho: f64) -> Self {
        PreferenceVector { preferred, rho }
    }

    pub fn len(&self) -> usize {
        self.preferred.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preferred.is_empty()
    }

    pub fn is_preferred(&self, j: usize) -> bool {
        self.preferred[j]
    }

    /// `psi_j`, either `rho` or exactly 1.
    pub fn weight(&self, j: usize) -> f64 {
        if self.preferred[j] {
            self.rho
        } else {
            1.0
        }
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.preferred.len()).map(|j| self.weight(j))
    }

    /// Projected dimensionality: the number of preferred dimensions.
    pub fn pdim(&self) -> usize {
        self.preferred.iter().filter(|&&p| p).count()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// `sqrt(sum_j psi_j / norm * (a_j - b_j)^2)`.
pub fn weighted_distance(a: &[f64], b: &[f64], psi: &PreferenceVector, norm: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(j, (x, y))| {
            let d = x - y;
            psi.weight(j) / norm * d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Outcome of the core / outlier predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum McClass {
    Core,
    Outlier,
    Neither,
}

/// Weighted first/second moments and weight of a micro-cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments<'a> {
    pub mean: Cow<'a, [f64]>,
    pub mean_sq: Cow<'a, [f64]>,
    pub weight: f64,
}

impl Moments<'_> {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `mean_sq - mean^2` per dimension, with round-off below zero clamped.
    /// The slack grows with `mean_sq` once it exceeds 1.
    pub fn variance(&self) -> Result<Vec<f64>> {
        self.mean
            .iter()
            .zip(self.mean_sq.iter())
            .enumerate()
            .map(|(dim, (m, s))| {
                let v = s - m * m;
                if v >= 0.0 {
                    Ok(v)
                } else if v > -VARIANCE_SLACK * s.abs().max(1.0) {
                    Ok(0.0)
                } else {
                    Err(Error::NegativeVariance { dim, value: v })
                }
            })
            .collect()
    }

    pub fn preference_vector(&self, params: &Params) -> Result<PreferenceVector> {
        Ok(PreferenceVector::from_variances(&self.variance()?, params))
    }

    pub fn pdim(&self, params: &Params) -> Result<usize> {
        Ok(self.preference_vector(params)?.pdim())
    }

    pub fn projected_radius(&self, params: &Params) -> Result<f64> {
        let var = self.variance()?;
        let psi = PreferenceVector::from_variances(&var, params);
        Ok(radius_from(&var, &psi))
    }

    /// Distance from `p` to the center (the first moment).
    pub fn projected_distance(&self, p: &[f64], params: &Params) -> Result<f64> {
        check_dim(p, self.dim())?;
        let psi = self.preference_vector(params)?;
        Ok(weighted_distance(p, &self.mean, &psi, normalizer(params)))
    }

    pub fn classify(&self, params: &Params) -> Result<McClass> {
        let var = self.variance()?;
        let psi = PreferenceVector::from_variances(&var, params);
        Ok(classify_parts(
            radius_from(&var, &psi),
            psi.pdim(),
            self.weight,
            params,
        ))
    }

    /// Whether the projected-dimensionality gate of the core list admits
    /// this tuple: `pdim <= pi`, or the tuple holds a burst.
    pub fn passes_dim_gate(&self, params: &Params) -> Result<bool> {
        Ok(self.pdim(params)? <= params.pi_dim || is_burst(self.weight, params))
    }
}

fn radius_from(var: &[f64], psi: &PreferenceVector) -> f64 {
    var.iter()
        .enumerate()
        .map(|(j, v)| psi.weight(j) / psi.rho() * v)
        .sum::<f64>()
        .sqrt()
}

fn normalizer(params: &Params) -> f64 {
    match params.distance_normalizer {
        DistanceNormalizer::Rho => params.rho,
        DistanceNormalizer::Xi => params.xi,
    }
}

fn is_burst(weight: f64, params: &Params) -> bool {
    weight / params.n_window as f64 > params.burst_fraction
}

/// Core iff `r < eps`, `w > mu` and (`pdim <= pi` or `w / N > burst`);
/// outlier iff `pdim > pi`, `r < eps` and `w < mu`.
pub fn classify_parts(radius: f64, pdim: usize, weight: f64, params: &Params) -> McClass {
    let tight = radius < params.eps;
    if tight && weight > params.mu && (pdim <= params.pi_dim || is_burst(weight, params)) {
        McClass::Core
    } else if tight && pdim > params.pi_dim && weight < params.mu {
        McClass::Outlier
    } else {
        McClass::Neither
    }
}

/// Common interface of the micro-cluster summaries driven by the engine.
pub trait Summary: Clone + std::fmt::Debug {
    /// A fresh summary holding `p` as its only point.
    fn seeded(id: TupleId, p: &Point, params: &Params) -> Result<Self>;

    fn id(&self) -> TupleId;
    fn dim(&self) -> usize;
    fn weight(&self) -> f64;
    fn created_seq(&self) -> u64;
    fn last_update_seq(&self) -> u64;

    fn moments(&self) -> Moments<'_>;

    /// Moments the summary would have after absorbing `p`, without mutating it.
    fn moments_with(&self, p: &Point, params: &Params) -> Result<Moments<'static>>;

    fn absorb(&mut self, p: &Point, params: &Params) -> Result<()>;

    /// One missed arrival; `now` is the arrival index of the point that went elsewhere.
    fn degrade(&mut self, now: u64, params: &Params);

    /// Number of reals the summary keeps resident.
    fn resident_values(&self, params: &Params) -> usize;

    fn center(&self) -> Cow<'_, [f64]> {
        self.moments().mean
    }

    fn variance(&self) -> Result<Vec<f64>> {
        self.moments().variance()
    }

    fn preference_vector(&self, params: &Params) -> Result<PreferenceVector> {
        self.moments().preference_vector(params)
    }

    fn pdim(&self, params: &Params) -> Result<usize> {
        self.moments().pdim(params)
    }

    fn projected_radius(&self, params: &Params) -> Result<f64> {
        self.moments().projected_radius(params)
    }

    fn projected_distance(&self, p: &[f64], params: &Params) -> Result<f64> {
        self.moments().projected_distance(p, params)
    }

    fn classify(&self, params: &Params) -> Result<McClass> {
        self.moments().classify(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(mean: Vec<f64>, mean_sq: Vec<f64>, weight: f64) -> Moments<'static> {
        Moments {
            mean: Cow::Owned(mean),
            mean_sq: Cow::Owned(mean_sq),
            weight,
        }
    }

    #[test]
    fn variance_of_half() {
        let m = moments(vec![0.5], vec![0.5], 1.0);
        assert_eq!(m.variance().unwrap(), vec![0.25]);
    }

    #[test]
    fn variance_clamps_round_off_and_rejects_real_negatives() {
        let m = moments(vec![0.1], vec![0.01 - 1e-13], 1.0);
        assert_eq!(m.variance().unwrap(), vec![0.0]);
        let m = moments(vec![0.5], vec![0.2], 1.0);
        assert!(matches!(
            m.variance(),
            Err(Error::NegativeVariance { dim: 0, .. })
        ));
        // raw byte counts: mean 1e4, mean_sq 1e8, off by a few ulps
        let m = moments(vec![1e4], vec![1e8 - 3e-8], 1.0);
        assert_eq!(m.variance().unwrap(), vec![0.0]);
        let m = moments(vec![1e4], vec![1e8 - 1e-3], 1.0);
        assert!(m.variance().is_err());
    }

    #[test]
    fn preference_thresholding() {
        let params = Params::default();
        let psi = PreferenceVector::from_variances(&[0.001, 0.5, 0.0019], &params);
        assert_eq!(psi.weights().collect::<Vec<_>>(), vec![1000.0, 1.0, 1000.0]);
        assert_eq!(psi.pdim(), 2);
        // The threshold itself is not preferred.
        let psi = PreferenceVector::from_variances(&[0.002], &params);
        assert_eq!(psi.pdim(), 0);
    }

    #[test]
    fn radius_with_one_preferred_dimension() {
        let params = Params {
            xi: 0.05,
            ..Params::default()
        };
        // variances [0.04, 0.09]: dim 0 preferred, dim 1 not.
        let m = moments(vec![0.0, 0.0], vec![0.04, 0.09], 5.0);
        let r = m.projected_radius(&params).unwrap();
        let expected = (0.04f64 + 0.09 / 1000.0).sqrt();
        assert!((r - expected).abs() < 1e-12);
        assert!((r - 0.20022).abs() < 1e-5);
    }

    #[test]
    fn radius_all_preferred_is_plain_spread() {
        let params = Params::default();
        let m = moments(vec![0.2, 0.3], vec![0.0405, 0.0901], 5.0);
        let r = m.projected_radius(&params).unwrap();
        assert!((r - (0.0005f64 + 0.0001).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn distance_substitution() {
        let params = Params {
            xi: 0.05,
            ..Params::default()
        };
        let m = moments(vec![0.0, 0.0], vec![0.04, 0.09], 5.0);
        let d = m.projected_distance(&[0.3, 0.4], &params).unwrap();
        assert!((d - (0.09f64 + 0.16 / 1000.0).sqrt()).abs() < 1e-12);
        assert!((d - 0.30027).abs() < 1e-5);
    }

    #[test]
    fn distance_normalizers() {
        let m = moments(vec![0.2, 0.7], vec![0.04, 0.49], 3.0);
        for normalizer in [DistanceNormalizer::Rho, DistanceNormalizer::Xi] {
            let params = Params {
                distance_normalizer: normalizer,
                ..Params::default()
            };
            assert_eq!(m.projected_distance(&[0.2, 0.7], &params).unwrap(), 0.0);
        }
        // All dimensions preferred under rho: plain Euclidean distance.
        let params = Params::default();
        let d = m.projected_distance(&[0.5, 0.3], &params).unwrap();
        assert!((d - (0.09f64 + 0.16).sqrt()).abs() < 1e-12);
        // The xi normalizer inflates by rho / xi.
        let params = Params {
            distance_normalizer: DistanceNormalizer::Xi,
            ..Params::default()
        };
        let dx = m.projected_distance(&[0.5, 0.3], &params).unwrap();
        assert!((dx - d * (1000.0f64 / 0.002).sqrt()).abs() < 1e-6);
        assert!(m.projected_distance(&[0.5], &params).is_err());
    }

    #[test]
    fn classify_gates() {
        let params = Params::default();
        // radius 0, w = N, all 35 dims preferred: core only by the burst clause.
        assert_eq!(classify_parts(0.0, 35, 200.0, &params), McClass::Core);
        assert_eq!(classify_parts(0.0, 35, 150.0, &params), McClass::Neither);
        assert_eq!(classify_parts(0.0, 20, 150.0, &params), McClass::Core);
        assert_eq!(classify_parts(0.0, 35, 1.0, &params), McClass::Outlier);
        assert_eq!(classify_parts(10.0, 5, 500.0, &params), McClass::Neither);
        assert_eq!(classify_parts(10.0, 35, 1.0, &params), McClass::Neither);
        // strict inequalities on both thresholds
        assert_eq!(classify_parts(0.0, 5, 10.0, &params), McClass::Neither);
        assert_eq!(classify_parts(0.0, 35, 10.0, &params), McClass::Neither);
        // low pdim and light: neither predicate holds
        assert_eq!(classify_parts(0.0, 5, 1.0, &params), McClass::Neither);
    }
}
