//! Observation types shared by the estimation modules.

use serde::{Deserialize, Serialize};

use crate::copula::UnitPair;
use crate::error::{Error, Result};

/// One cluster: two observed times, their event indicators and a
/// cluster-level covariate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub y1: f64,
    pub y2: f64,
    pub d1: bool,
    pub d2: bool,
    pub x: f64,
}

impl Observation {
    pub fn new(y1: f64, y2: f64, d1: bool, d2: bool, x: f64) -> Result<Self> {
        for (what, y) in [("y1", y1), ("y2", y2)] {
            if !(y > 0.0 && y.is_finite()) {
                return Err(Error::Domain { what, value: y });
            }
        }
        if !x.is_finite() {
            return Err(Error::Domain {
                what: "covariate",
                value: x,
            });
        }
        Ok(Self { y1, y2, d1, d2, x })
    }

    pub fn time(&self, member: Member) -> f64 {
        match member {
            Member::First => self.y1,
            Member::Second => self.y2,
        }
    }

    pub fn event(&self, member: Member) -> bool {
        match member {
            Member::First => self.d1,
            Member::Second => self.d2,
        }
    }
}

/// Cluster member index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Member {
    First,
    Second,
}

impl Member {
    pub const BOTH: [Member; 2] = [Member::First, Member::Second];

    pub fn index(self) -> usize {
        match self {
            Member::First => 0,
            Member::Second => 1,
        }
    }
}

/// Univariate margin data for member `k`: `(time, event, covariate)`.
pub fn margin_data(data: &[Observation], member: Member) -> Vec<(f64, bool, f64)> {
    data.iter()
        .map(|o| (o.time(member), o.event(member), o.x))
        .collect()
}

/// Observed times transformed through estimated conditional margins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoObservation {
    pub pair: UnitPair,
    pub d1: bool,
    pub d2: bool,
}

impl PseudoObservation {
    pub fn new(u1: f64, u2: f64, d1: bool, d2: bool) -> Self {
        Self {
            pair: UnitPair::new(u1, u2),
            d1,
            d2,
        }
    }

    /// The same observation with the cluster members exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            pair: self.pair.swapped(),
            d1: self.d2,
            d2: self.d1,
        }
    }
}

/// Fraction of member times that are censored.
pub fn censoring_fraction(data: &[Observation]) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let censored: usize = data
        .iter()
        .map(|o| usize::from(!o.d1) + usize::from(!o.d2))
        .sum();
    censored as f64 / (2 * data.len()) as f64
}
