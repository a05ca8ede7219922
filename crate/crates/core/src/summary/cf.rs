use std::borrow::Cow;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Moments, Summary, TupleId};
use crate::error::Result;
use crate::params::{Params, VARIANCE_SLACK};
use crate::point::{check_values, Point};

/// A raw point kept in the baseline's ring buffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Buffered {
    pub seq: u64,
    pub values: Vec<f64>,
}

/// Fading-sum baseline micro-cluster.
///
/// Keeps `cf1 = sum f(t - t_i) p_i`, `cf2 = sum f(t - t_i) p_i^2` and
/// `w = sum f(t - t_i)` with `f(dt) = 2^(-lambda * dt / N)`, all expressed at
/// arrival index `as_of`. The last `N` absorbed points are buffered so the
/// oldest contribution can be subtracted exactly when a new point arrives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfTuple {
    pub id: TupleId,
    pub cf1: Vec<f64>,
    pub cf2: Vec<f64>,
    pub w: f64,
    pub as_of: u64,
    pub window: VecDeque<Buffered>,
    pub created_seq: u64,
    pub last_update_seq: u64,
}

/// Whether subtracting evicted points has left sums whose variance falls
/// below the round-off slack. Such a dimension is recomputed from the buffer.
fn drifted(s1: f64, s2: f64, w: f64) -> bool {
    let m = s1 / w;
    let s = s2 / w;
    s - m * m < -VARIANCE_SLACK * s.abs().max(1.0)
}

/// `2^(-lambda * dt / N)`.
pub fn fading(dt: u64, params: &Params) -> f64 {
    (-params.lambda * dt as f64 / params.n_window as f64).exp2()
}

/// Sums recomputed from scratch over a window, plus the sums of absolute
/// contributions used as the scale for drift checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Recomputed {
    pub cf1: Vec<f64>,
    pub cf2: Vec<f64>,
    pub w: f64,
    pub cf1_scale: Vec<f64>,
}

impl CfTuple {
    /// Recomputes `cf1`, `cf2` and `w` at `as_of` from the buffered points.
    pub fn recompute(&self, params: &Params) -> Recomputed {
        let dim = self.cf1.len();
        let mut out = Recomputed {
            cf1: vec![0.0; dim],
            cf2: vec![0.0; dim],
            w: 0.0,
            cf1_scale: vec![0.0; dim],
        };
        for b in &self.window {
            let f = fading(self.as_of - b.seq, params);
            out.w += f;
            for (j, x) in b.values.iter().enumerate() {
                out.cf1[j] += f * x;
                out.cf2[j] += f * x * x;
                out.cf1_scale[j] += f * x.abs();
            }
        }
        out
    }

    /// Largest discrepancy between the incrementally maintained sums and a
    /// recomputation, relative to the magnitude of the contributions (with a
    /// floor of 1 so all-zero columns compare absolutely).
    pub fn max_drift(&self, params: &Params) -> f64 {
        let r = self.recompute(params);
        let rel = |stored: f64, fresh: f64, scale: f64| (stored - fresh).abs() / scale.max(1.0);
        let mut worst = rel(self.w, r.w, r.w);
        for j in 0..self.cf1.len() {
            worst = worst.max(rel(self.cf1[j], r.cf1[j], r.cf1_scale[j]));
            // cf2 terms are non-negative, so the fresh sum is its own scale.
            worst = worst.max(rel(self.cf2[j], r.cf2[j], r.cf2[j]));
        }
        worst
    }

    /// Re-expresses the sums at arrival index `now`.
    fn fade_to(&mut self, now: u64, params: &Params) {
        if now <= self.as_of {
            return;
        }
        let f = fading(now - self.as_of, params);
        for (a, b) in self.cf1.iter_mut().zip(self.cf2.iter_mut()) {
            *a *= f;
            *b *= f;
        }
        self.w *= f;
        self.as_of = now;
    }

    /// Exact faded sums of dimension `j` at `now` over the buffer, optionally
    /// skipping the oldest entry.
    fn exact_dim(&self, j: usize, now: u64, skip_oldest: bool, params: &Params) -> (f64, f64) {
        let skip = usize::from(skip_oldest);
        self.window.iter().skip(skip).fold((0.0, 0.0), |(s1, s2), b| {
            let f = fading(now - b.seq, params);
            let x = b.values[j];
            (s1 + f * x, s2 + f * x * x)
        })
    }

    /// The tuple after inserting `p`, evicting the oldest buffered point when full.
    pub fn updated(&self, p: &Point, params: &Params) -> Result<CfTuple> {
        let mut next = self.clone();
        next.absorb(p, params)?;
        Ok(next)
    }
}

impl Summary for CfTuple {
    fn seeded(id: TupleId, p: &Point, _params: &Params) -> Result<Self> {
        check_values(&p.values, p.dim())?;
        Ok(CfTuple {
            id,
            cf1: p.values.clone(),
            cf2: p.values.iter().map(|v| v * v).collect(),
            w: 1.0,
            as_of: p.seq,
            window: VecDeque::from([Buffered {
                seq: p.seq,
                values: p.values.clone(),
            }]),
            created_seq: p.seq,
            last_update_seq: p.seq,
        })
    }

    fn id(&self) -> TupleId {
        self.id
    }

    fn dim(&self) -> usize {
        self.cf1.len()
    }

    fn weight(&self) -> f64 {
        self.w
    }

    fn created_seq(&self) -> u64 {
        self.created_seq
    }

    fn last_update_seq(&self) -> u64 {
        self.last_update_seq
    }

    fn moments(&self) -> Moments<'_> {
        let inv = 1.0 / self.w;
        Moments {
            mean: Cow::Owned(self.cf1.iter().map(|v| v * inv).collect()),
            mean_sq: Cow::Owned(self.cf2.iter().map(|v| v * inv).collect()),
            weight: self.w,
        }
    }

    fn moments_with(&self, p: &Point, params: &Params) -> Result<Moments<'static>> {
        check_values(&p.values, self.dim())?;
        let now = p.seq.max(self.as_of);
        let f = fading(now - self.as_of, params);
        let evicted = if self.window.len() >= params.n_window {
            self.window.front().map(|b| (b, fading(now - b.seq, params)))
        } else {
            None
        };
        let mut w = self.w * f + 1.0;
        if let Some((_, g)) = evicted {
            w -= g;
        }
        let inv = 1.0 / w;
        let mut mean = Vec::with_capacity(self.dim());
        let mut mean_sq = Vec::with_capacity(self.dim());
        for j in 0..self.dim() {
            let x = p.values[j];
            let mut s1 = self.cf1[j] * f + x;
            let mut s2 = self.cf2[j] * f + x * x;
            if let Some((b, g)) = evicted {
                s1 -= g * b.values[j];
                s2 -= g * b.values[j] * b.values[j];
            }
            if drifted(s1, s2, w) {
                let (e1, e2) = self.exact_dim(j, now, evicted.is_some(), params);
                s1 = e1 + x;
                s2 = e2 + x * x;
            }
            mean.push(s1 * inv);
            mean_sq.push(s2 * inv);
        }
        Ok(Moments {
            mean: Cow::Owned(mean),
            mean_sq: Cow::Owned(mean_sq),
            weight: w,
        })
    }

    fn absorb(&mut self, p: &Point, params: &Params) -> Result<()> {
        check_values(&p.values, self.dim())?;
        let now = p.seq.max(self.as_of);
        self.fade_to(now, params);
        let mut slot = if self.window.len() >= params.n_window {
            let old = self.window.pop_front().expect("window is full");
            let g = fading(now - old.seq, params);
            for (j, x) in old.values.iter().enumerate() {
                self.cf1[j] -= g * x;
                self.cf2[j] -= g * x * x;
            }
            self.w -= g;
            old.values
        } else {
            Vec::with_capacity(self.dim())
        };
        for (j, x) in p.values.iter().enumerate() {
            self.cf1[j] += x;
            self.cf2[j] += x * x;
        }
        self.w += 1.0;
        slot.clear();
        slot.extend_from_slice(&p.values);
        self.window.push_back(Buffered {
            seq: p.seq,
            values: slot,
        });
        for j in 0..self.dim() {
            if drifted(self.cf1[j], self.cf2[j], self.w) {
                (self.cf1[j], self.cf2[j]) = self.exact_dim(j, now, false, params);
            }
        }
        self.last_update_seq = p.seq;
        Ok(())
    }

    fn degrade(&mut self, now: u64, params: &Params) {
        self.fade_to(now, params);
    }

    /// The `2d + 1` sums plus a full `N x d` ring buffer.
    fn resident_values(&self, params: &Params) -> usize {
        2 * self.dim() + 1 + params.n_window * self.dim()
    }
}
