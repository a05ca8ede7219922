use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use super::{Moments, Summary, TupleId};
use crate::error::Result;
use crate::params::Params;
use crate::point::{check_values, Point};

/// Moving-average micro-cluster: `2d + 1` resident values.
///
/// `ea1` and `ea2` are exponentially weighted means of the absorbed points
/// and their squares; `w` counts absorbed points (and decays on misses when
/// [`Params::decay_weight`] is set).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EaTuple {
    pub id: TupleId,
    pub ea1: Vec<f64>,
    pub ea2: Vec<f64>,
    pub w: f64,
    pub created_seq: u64,
    pub last_update_seq: u64,
}

impl EaTuple {
    /// A tuple with explicit statistics, e.g. for tests or restored state.
    pub fn from_parts(id: TupleId, ea1: Vec<f64>, ea2: Vec<f64>, w: f64, seq: u64) -> Self {
        assert_eq!(ea1.len(), ea2.len(), "ea1 and ea2 lengths differ");
        EaTuple {
            id,
            ea1,
            ea2,
            w,
            created_seq: seq,
            last_update_seq: seq,
        }
    }

    /// `ea <- alpha * p + (1 - alpha) * ea`, `w <- w + 1`.
    pub fn updated(&self, p: &Point, params: &Params) -> Result<EaTuple> {
        let mut next = self.clone();
        next.absorb(p, params)?;
        Ok(next)
    }

    /// The tuple after one missed arrival.
    pub fn degraded(&self, params: &Params) -> EaTuple {
        let mut next = self.clone();
        next.decay(params);
        next
    }

    fn decay(&mut self, params: &Params) {
        let keep = 1.0 - params.alpha;
        for (a, b) in self.ea1.iter_mut().zip(self.ea2.iter_mut()) {
            *a *= keep;
            *b *= keep;
        }
        if params.decay_weight {
            self.w *= keep;
        }
    }
}

impl Summary for EaTuple {
    fn seeded(id: TupleId, p: &Point, _params: &Params) -> Result<Self> {
        check_values(&p.values, p.dim())?;
        Ok(EaTuple {
            id,
            ea1: p.values.clone(),
            ea2: p.values.iter().map(|v| v * v).collect(),
            w: 1.0,
            created_seq: p.seq,
            last_update_seq: p.seq,
        })
    }

    fn id(&self) -> TupleId {
        self.id
    }

    fn dim(&self) -> usize {
        self.ea1.len()
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
        Moments {
            mean: Cow::Borrowed(&self.ea1),
            mean_sq: Cow::Borrowed(&self.ea2),
            weight: self.w,
        }
    }

    fn moments_with(&self, p: &Point, params: &Params) -> Result<Moments<'static>> {
        check_values(&p.values, self.dim())?;
        let a = params.alpha;
        let mean = self
            .ea1
            .iter()
            .zip(&p.values)
            .map(|(e, x)| a * x + (1.0 - a) * e)
            .collect();
        let mean_sq = self
            .ea2
            .iter()
            .zip(&p.values)
            .map(|(e, x)| a * x * x + (1.0 - a) * e)
            .collect();
        Ok(Moments {
            mean: Cow::Owned(mean),
            mean_sq: Cow::Owned(mean_sq),
            weight: self.w + 1.0,
        })
    }

    fn absorb(&mut self, p: &Point, params: &Params) -> Result<()> {
        check_values(&p.values, self.dim())?;
        let a = params.alpha;
        for ((e1, e2), x) in self.ea1.iter_mut().zip(self.ea2.iter_mut()).zip(&p.values) {
            *e1 = a * x + (1.0 - a) * *e1;
            *e2 = a * x * x + (1.0 - a) * *e2;
        }
        self.w += 1.0;
        self.last_update_seq = p.seq;
        Ok(())
    }

    fn degrade(&mut self, _now: u64, params: &Params) {
        self.decay(params);
    }

    fn resident_values(&self, _params: &Params) -> usize {
        2 * self.dim() + 1
    }
}
