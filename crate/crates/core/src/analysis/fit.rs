use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::metrics::SimResult;
use crate::num::Real;

/// Least-squares line through `(ln n, ln mean T_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit<F: Real> {
    pub slope: F,
    pub intercept: F,
    pub slope_stderr: F,
    pub r_squared: F,
    /// The fitted `(n, mean T_n)` points.
    pub points: Vec<(u64, F)>,
}

/// OLS fit of `ln t` on `ln n`. Needs at least three points with distinct `n`.
pub fn fit_loglog<F: Real>(points: &[(u64, F)]) -> Result<ScalingFit<F>> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some((n, t)) = points.iter().find(|(n, t)| *n == 0 || !(*t > F::zero())) {
        return Err(Error::Fit(format!("non-positive point (n = {n}, T = {t})")));
    }
    let xs: Vec<F> = points.iter().map(|(n, _)| F::count(*n).ln()).collect();
    let ys: Vec<F> = points.iter().map(|(_, t)| t.ln()).collect();
    let k = F::count(points.len() as u64);
    let mx = xs.iter().copied().sum::<F>() / k;
    let my = ys.iter().copied().sum::<F>() / k;
    let sxx: F = xs.iter().map(|x| (*x - mx) * (*x - mx)).sum();
    if !(sxx > F::zero()) {
        return Err(Error::Fit("all points share the same n".into()));
    }
    let sxy: F = xs.iter().zip(&ys).map(|(x, y)| (*x - mx) * (*y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: F = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = *y - (intercept + slope * *x);
            e * e
        })
        .sum();
    let sst: F = ys.iter().map(|y| (*y - my) * (*y - my)).sum();
    let dof = k - F::lit(2.0);
    let slope_stderr = (ssr / dof / sxx).sqrt();
    let r_squared = if sst > F::zero() {
        F::one() - ssr / sst
    } else {
        F::one()
    };
    Ok(ScalingFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        points: points.to_vec(),
    })
}

/// Groups trials by `n`, averages `T_n` over outage-free trials only, and
/// fits the log-log slope. Fails if any `n` has no outage-free trial.
pub fn fit_scaling<F: Real>(results: &[SimResult<F>]) -> Result<ScalingFit<F>> {
    let mut groups: BTreeMap<u64, Vec<F>> = BTreeMap::new();
    for r in results {
        let g = groups.entry(r.n).or_default();
        if !r.is_outage() {
            g.push(r.throughput);
        }
    }
    let mut points = Vec::with_capacity(groups.len());
    for (n, ts) in groups {
        if ts.is_empty() {
            return Err(Error::Fit(format!("n = {n} has no outage-free trial")));
        }
        let mean = ts.iter().copied().sum::<F>() / F::count(ts.len() as u64);
        points.push((n, mean));
    }
    fit_loglog(&points)
}
