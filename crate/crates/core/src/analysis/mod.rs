//! Closed-form calculators: regime partition, scaling exponents, tail and
//! outage bounds, plus log-log regression of simulated throughput.

mod bounds;
mod fit;

pub use bounds::{
    analytic_outage_bound, chernoff_upper, heavy_tail_mass, theoretical_bounds, BoundSet, PopularityFamily, Scaling,
};
pub use fit::{fit_loglog, fit_scaling, ScalingFit};

use std::fmt;

use crate::error::{Error, Result};
use crate::num::Real;

/// Operating regime of `(alpha - beta, a1 vs a2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `alpha - beta > 1`.
    I,
    /// `alpha - beta = 1`, `a1 > a2`.
    II,
    /// `alpha - beta = 1`, `a1 <= a2`.
    III,
    /// `0 < alpha - beta < 1`.
    IV,
    /// `alpha = beta`, `a1 > a2`.
    V,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::I => "I",
            Regime::II => "II",
            Regime::III => "III",
            Regime::IV => "IV",
            Regime::V => "V",
        };
        f.write_str(s)
    }
}

/// Gaps within this distance of 0 or 1 are treated as exactly on the boundary.
const BOUNDARY_TOL: f64 = 1e-9;

pub fn classify_regime<F: Real>(alpha: F, beta: F, a1: F, a2: F) -> Result<Regime> {
    let gap = (alpha - beta).as_f64();
    if gap < -BOUNDARY_TOL {
        return Err(Error::InvalidConfig(format!(
            "beta exceeds alpha (alpha - beta = {gap})"
        )));
    }
    if (gap - 1.0).abs() <= BOUNDARY_TOL {
        return Ok(if a1 > a2 { Regime::II } else { Regime::III });
    }
    if gap > 1.0 {
        return Ok(Regime::I);
    }
    if gap.abs() <= BOUNDARY_TOL {
        return if a1 > a2 {
            Ok(Regime::V)
        } else {
            Err(Error::TrivialCaching {
                a1: a1.as_f64(),
                a2: a2.as_f64(),
            })
        };
    }
    Ok(Regime::IV)
}
