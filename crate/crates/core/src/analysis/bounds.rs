use std::fmt;

use super::{classify_regime, Regime};
use crate::error::{Error, Result};
use crate::model::NetworkConfig;
use crate::num::{compensated_sum, Real};

/// Scaling of `T_n` in `n`, with the `n^eps` slack and log factors dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling<F: Real> {
    /// Throughput is zero whp (outage is unavoidable).
    Zero,
    /// `T_n ~ n^exponent`.
    Power(F),
    /// `T_n = O(1 / log n)`.
    InverseLog,
}

impl<F: Real> Scaling<F> {
    /// Exponent of `n`, treating `1/log n` as exponent 0.
    pub fn exponent(&self) -> Option<F> {
        match self {
            Scaling::Zero => None,
            Scaling::Power(e) => Some(*e),
            Scaling::InverseLog => Some(F::zero()),
        }
    }
}

impl<F: Real> fmt::Display for Scaling<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scaling::Zero => f.write_str("0"),
            Scaling::Power(e) => write!(f, "{e}"),
            Scaling::InverseLog => f.write_str("1/log(n)"),
        }
    }
}

/// Achievable and converse throughput scaling for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSet<F: Real> {
    pub regime: Regime,
    pub multihop_achievable: Scaling<F>,
    pub multihop_converse: Scaling<F>,
    pub singlehop_achievable: Scaling<F>,
    pub singlehop_converse: Scaling<F>,
    /// Exponent of the popularity-truncated scheme, when `gamma > 1 + 1/alpha`.
    pub improved: Option<F>,
}

pub fn theoretical_bounds<F: Real>(cfg: &NetworkConfig<F>, gamma: Option<F>) -> Result<BoundSet<F>> {
    let regime = classify_regime(cfg.alpha, cfg.beta, cfg.a1, cfg.a2)?;
    let gap = cfg.alpha - cfg.beta;
    let half = F::lit(0.5);
    let (mh_a, mh_c, sh_a, sh_c) = match regime {
        Regime::I | Regime::II => (Scaling::Zero, Scaling::Zero, Scaling::Zero, Scaling::Zero),
        Regime::III => (
            Scaling::Power(-half),
            Scaling::Power(-half),
            Scaling::Power(-F::one()),
            Scaling::Power(-F::one()),
        ),
        Regime::IV => (
            Scaling::Power(-gap * half),
            Scaling::Power(-gap * half),
            Scaling::Power(-gap),
            Scaling::Power(-gap),
        ),
        Regime::V => (
            Scaling::Power(F::zero()),
            Scaling::InverseLog,
            Scaling::Power(F::zero()),
            Scaling::InverseLog,
        ),
    };
    let improved = gamma.and_then(|g| {
        (g > F::one() + F::one() / cfg.alpha).then(|| {
            let head = F::one().min(cfg.beta + F::one() - F::one() / (g - F::one()));
            -(F::one() - head) * half
        })
    });
    Ok(BoundSet {
        regime,
        multihop_achievable: mh_a,
        multihop_converse: mh_c,
        singlehop_achievable: sh_a,
        singlehop_converse: sh_c,
        improved,
    })
}

/// Lower-tail bound `P(X <= k) <= exp(-(lp - k)^2 / (2 p l))` for
/// `X ~ Binomial(l, p)` and `k` in `[0, lp]`.
pub fn chernoff_upper<F: Real>(l: u64, p: F, k: u64) -> Result<F> {
    if !(p > F::zero() && p <= F::one()) {
        return Err(Error::InvalidConfig(format!("p must lie in (0, 1] (got {p})")));
    }
    let lf = F::count(l);
    let lp = lf * p;
    let kf = F::count(k);
    // tolerate rounding in l*p, e.g. 10 * 0.3 = 3.0000000000000004
    if kf > lp * (F::one() + F::epsilon() * F::lit(16.0)) {
        return Err(Error::ChernoffDomain {
            k: kf.as_f64(),
            lp: lp.as_f64(),
        });
    }
    let gap = (lp - kf).max(F::zero());
    Ok((-(gap * gap) / (F::lit(2.0) * p * lf)).exp())
}

/// Popularity law used by [`heavy_tail_mass`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PopularityFamily<F: Real> {
    Zipf(F),
    Uniform,
}

/// Mass of the `floor(c1 n^alpha)` most popular files out of
/// `m = round(a1 n^alpha)`.
pub fn heavy_tail_mass<F: Real>(family: PopularityFamily<F>, alpha: F, a1: F, c1: F, n: u64) -> Result<F> {
    if !(c1 > F::zero() && c1 < a1) {
        return Err(Error::InvalidConfig(format!(
            "need 0 < c1 < a1 (got c1 = {c1}, a1 = {a1})"
        )));
    }
    let scale = F::count(n).powf(alpha);
    let m = (a1 * scale).round().to_u64().unwrap_or(1).max(1);
    let head = (c1 * scale).floor().to_u64().unwrap_or(0).min(m);
    Ok(match family {
        PopularityFamily::Uniform => F::count(head) / F::count(m),
        PopularityFamily::Zipf(gamma) => {
            let w = |i: u64| F::count(i).powf(-gamma);
            let head_sum = compensated_sum((1..=head).map(w));
            let tail_sum = compensated_sum((head + 1..=m).map(w));
            head_sum / (head_sum + tail_sum)
        }
    })
}

/// Union-bound lower bound `1 - n ((m - M)/m)^((1 - delta) n a_c)` on the
/// probability that every node finds its file inside its traffic cell,
/// clamped to `[0, 1]`.
pub fn analytic_outage_bound<F: Real>(n: u64, m: u64, cache_size: u64, traffic_area: F, delta: F) -> F {
    if cache_size >= m {
        return F::one();
    }
    let miss = F::count(m - cache_size) / F::count(m);
    let exponent = (F::one() - delta) * F::count(n) * traffic_area;
    let fail = F::count(n) * (exponent * miss.ln()).exp();
    (F::one() - fail).max(F::zero()).min(F::one())
}
