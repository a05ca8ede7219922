//! Single-pass projected clustering for high-dimensional data streams.
//!
//! Windows of points are summarized by micro-clusters whose statistics are
//! exponential moving averages of the points and their squares
//! ([`summary::EaTuple`]), so each micro-cluster costs `2d + 1` values no
//! matter how long the window is. A fading-sum baseline that buffers the last
//! `N` raw points ([`summary::CfTuple`]) plugs into the same engine for
//! comparison.
//!
//! The pipeline has three stages:
//!
//! 1. [`init`] clusters an initial chunk of the stream with a density-based
//!    projected clustering pass and seeds the core micro-clusters.
//! 2. [`engine::Engine`] merges each arriving point into a core or outlier
//!    micro-cluster (or opens a new outlier), degrades the rest, and moves
//!    micro-clusters between the two lists at every window boundary.
//! 3. [`offline::final_clusters`] groups density-connected core
//!    micro-clusters on demand.
//!
//! [`evaluation`] and [`pipeline`] provide purity / memory / latency metrics
//! and the KDD-99 driven runner behind the `projstream` binary.



pub mod config;
pub mod engine;
pub mod error;

pub mod evaluation;
pub mod init;


pub mod kdd;
pub mod offline;
pub mod params;

pub mod pipeline;
pub mod point;
pub mod summary;
pub mod synth;



pub use engine::{Engine, MergeOutcome, MergeTarget};
pub use error::{Error, Result};
pub use params::{DistanceNormalizer, Params};
pub use point::Point;
pub use summary::{CfTuple, EaTuple, McClass, PreferenceVector, Summary};
