//! Network configuration, derived scaling quantities, popularity and demands.

use rand::Rng;

use crate::analysis::{classify_regime, Regime};
use crate::error::{Error, Result};
use crate::num::{ceil_tolerant, compensated_sum, Real};

/// Scaling parameters of one network instance.
///
/// Library size is `m = a1 * n^alpha`, per-node cache size is
/// `M = a2 * n^beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig<F: Real> {
    pub n: u64,
    pub alpha: F,
    pub beta: F,
    pub a1: F,
    pub a2: F,
    /// Link rate in bits/s/Hz.
    pub w: F,
    /// Protocol-model guard factor.
    pub delta: F,
    /// Margin subtracted from the largest outage-free traffic-cell exponent.
    pub eta_margin: F,
    pub seed: u64,
}

impl<F: Real> NetworkConfig<F> {
    pub fn new(n: u64, alpha: F, beta: F, a1: F, a2: F) -> Self {
        NetworkConfig {
            n,
            alpha,
            beta,
            a1,
            a2,
            w: F::one(),
            delta: F::one(),
            eta_margin: F::lit(0.05),
            seed: 0,
        }
    }

    pub fn with_n(mut self, n: u64) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        let positive = [
            ("alpha", self.alpha),
            ("a1", self.a1),
            ("a2", self.a2),
            ("W", self.w),
            ("delta", self.delta),
            ("eta_margin", self.eta_margin),
        ];
        for (name, v) in positive {
            if !(v > F::zero()) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be finite and > 0 (got {v})")));
            }
        }
        if !(self.beta >= F::zero() && self.beta <= self.alpha) {
            return Err(Error::InvalidConfig(format!(
                "beta must lie in [0, alpha] (got beta = {}, alpha = {})",
                self.beta, self.alpha
            )));
        }
        if self.alpha == self.beta && self.a1 <= self.a2 {
            return Err(Error::TrivialCaching {
                a1: self.a1.as_f64(),
                a2: self.a2.as_f64(),
            });
        }
        Ok(())
    }

    pub fn regime(&self) -> Result<Regime> {
        classify_regime(self.alpha, self.beta, self.a1, self.a2)
    }
}

/// Parameters of the popularity-truncated (improved) placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprovedParams<F: Real> {
    /// Zipf exponent of the demand distribution.
    pub gamma: F,
    pub eps_c: F,
}

/// Quantities derived from a [`NetworkConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales<F: Real> {
    pub n: u64,
    /// Library size `m`.
    pub library_size: u64,
    /// Per-node cache size `M`.
    pub cache_size: u64,
    /// Traffic-cell exponent.
    pub eta: F,
    /// Nominal traffic-cell area `n^-eta`.
    pub traffic_area: F,
    /// Nominal hopping-cell area `2 ln n / n`, capped at the traffic-cell area.
    pub hopping_area: F,
    /// Transmission radius `sqrt(5 * hopping_area)`.
    pub radius: F,
    pub delta: F,
    pub w: F,
    /// Side `K` of the TDMA reuse pattern; `J = K^2`.
    pub reuse_side: u64,
    pub reuse_factor: u64,
    /// Aggregate rate `W / J` available to each hopping cell.
    pub aggregate_rate: F,
    /// Sub-library scale `n2` (improved scheme only).
    pub n2: Option<F>,
    /// `M * round(n2)`, capped at `m` (improved scheme only).
    pub sub_library_size: Option<u64>,
}

/// `2 * ceil((1 + delta) * sqrt(5)) + 1`.
pub fn reuse_side<F: Real>(delta: F) -> u64 {
    let k = ((F::one() + delta) * F::lit(5.0).sqrt()).ceil();
    2 * k.to_u64().expect("finite guard factor") + 1
}

/// Hopping-cell area `2 ln n / n`, never larger than `cap`.
fn hopping_area<F: Real>(n: u64, cap: F) -> F {
    if n <= 1 {
        return cap;
    }
    let nf = F::count(n);
    (F::lit(2.0) * nf.ln() / nf).min(cap)
}

fn round_count<F: Real>(x: F) -> u64 {
    x.round().to_u64().unwrap_or(u64::MAX).max(1)
}

/// Derives library/cache sizes, cell areas, protocol radius and reuse factor.
///
/// With `improved` set, the traffic-cell exponent and sub-library follow the
/// popularity-truncated scheme; otherwise the baseline
/// `eta = 1 - (alpha - beta) - eta_margin` is used (0 when `alpha - beta = 1`).
pub fn derive_scales<F: Real>(cfg: &NetworkConfig<F>, improved: Option<ImprovedParams<F>>) -> Result<DerivedScales<F>> {
    cfg.validate()?;
    let regime = cfg.regime()?;
    let nf = F::count(cfg.n);
    let library_size = round_count(cfg.a1 * nf.powf(cfg.alpha));
    let cache_size = round_count(cfg.a2 * nf.powf(cfg.beta)).min(library_size);
    let gap = cfg.alpha - cfg.beta;

    let (eta, n2, sub_library_size) = match improved {
        Some(p) => {
            let threshold = F::one() + F::one() / cfg.alpha;
            if !(p.gamma > threshold) {
                return Err(Error::ImprovedSchemeUnavailable {
                    gamma: p.gamma.as_f64(),
                    threshold: threshold.as_f64(),
                });
            }
            if !(p.eps_c > F::zero()) {
                return Err(Error::InvalidConfig(format!("eps_c must be > 0 (got {})", p.eps_c)));
            }
            let head = F::one().min(cfg.beta + F::one() - F::one() / (p.gamma - F::one()));
            let eta = head - p.eps_c;
            if !(eta > F::zero()) {
                return Err(Error::InvalidConfig(format!(
                    "eps_c = {} leaves no positive traffic-cell exponent (min(1, beta + 1 - 1/(gamma - 1)) = {head})",
                    p.eps_c
                )));
            }
            let n2 = nf.powf(F::one() - head + p.eps_c / F::lit(2.0));
            let sub = (cache_size * round_count(n2)).min(library_size);
            (eta, Some(n2), Some(sub))
        }
        None => {
            let eta = match regime {
                Regime::III => F::zero(),
                Regime::IV | Regime::V => F::one() - gap - cfg.eta_margin,
                Regime::I | Regime::II => F::one() - gap - cfg.eta_margin,
            };
            if matches!(regime, Regime::I | Regime::II) || eta < F::zero() {
                return Err(Error::OutageRegime(eta.as_f64()));
            }
            (eta, None, None)
        }
    };

    let traffic_area = nf.powf(-eta);
    let hopping_area = hopping_area(cfg.n, traffic_area);
    let side = reuse_side(cfg.delta);
    let reuse_factor = side * side;
    Ok(DerivedScales {
        n: cfg.n,
        library_size,
        cache_size,
        eta,
        traffic_area,
        hopping_area,
        radius: (F::lit(5.0) * hopping_area).sqrt(),
        delta: cfg.delta,
        w: cfg.w,
        reuse_side: side,
        reuse_factor,
        aggregate_rate: cfg.w / F::count(reuse_factor),
        n2,
        sub_library_size,
    })
}

impl<F: Real> DerivedScales<F> {
    /// Replaces the traffic-cell exponent, e.g. to probe outage beyond the
    /// outage-free range. Cell areas and radius are recomputed.
    pub fn with_eta(mut self, eta: F) -> Result<Self> {
        if !(eta >= F::zero() && eta < F::one()) {
            return Err(Error::InvalidConfig(format!("eta must lie in [0, 1) (got {eta})")));
        }
        self.eta = eta;
        self.traffic_area = F::count(self.n).powf(-eta);
        self.hopping_area = hopping_area(self.n, self.traffic_area);
        self.radius = (F::lit(5.0) * self.hopping_area).sqrt();
        Ok(self)
    }

    /// Traffic cells per side, `ceil(n^(eta/2))`.
    pub fn traffic_side_count(&self) -> u64 {
        let k = ceil_tolerant(F::count(self.n).powf(self.eta / F::lit(2.0)));
        k.to_u64().expect("finite side count").max(1)
    }

    /// Library size seen by the placement: the sub-library when truncated.
    pub fn effective_library(&self) -> u64 {
        self.sub_library_size.unwrap_or(self.library_size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PopularityKind<F: Real> {
    Zipf(F),
    Uniform,
    Explicit,
}

/// Demand distribution over files `1..=m`, non-increasing in the file index.
#[derive(Debug, Clone, PartialEq)]
pub struct Popularity<F: Real> {
    kind: PopularityKind<F>,
    pmf: Vec<F>,
    cdf: Vec<F>,
}

impl<F: Real> Popularity<F> {
    pub fn uniform(m: u64) -> Self {
        assert!(m >= 1, "library must hold at least one file");
        let p = F::one() / F::count(m);
        Self::from_pmf(PopularityKind::Uniform, vec![p; m as usize])
    }

    /// Normalizes `weights` into a pmf; rejects negative or increasing weights.
    pub fn explicit(weights: &[F]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidConfig("empty popularity".into()));
        }
        if weights.iter().any(|w| !(*w >= F::zero()) || !w.is_finite()) {
            return Err(Error::InvalidConfig(
                "popularity weights must be finite and >= 0".into(),
            ));
        }
        if weights.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "popularity must be non-increasing in file index".into(),
            ));
        }
        let total = compensated_sum(weights.iter().copied());
        if !(total > F::zero()) {
            return Err(Error::InvalidConfig("popularity weights sum to zero".into()));
        }
        Ok(Self::from_pmf(
            PopularityKind::Explicit,
            weights.iter().map(|w| *w / total).collect(),
        ))
    }

    fn from_pmf(kind: PopularityKind<F>, pmf: Vec<F>) -> Self {
        let mut acc = F::zero();
        let mut cdf: Vec<F> = pmf
            .iter()
            .map(|p| {
                acc = acc + *p;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = F::one();
        }
        Popularity { kind, pmf, cdf }
    }

    pub fn kind(&self) -> &PopularityKind<F> {
        &self.kind
    }

    pub fn len(&self) -> u64 {
        self.pmf.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    /// Probability of 1-based file index `file`.
    pub fn prob(&self, file: u64) -> F {
        self.pmf[(file - 1) as usize]
    }

    pub fn pmf(&self) -> &[F] {
        &self.pmf
    }

    /// Mass of the `k` most popular files.
    pub fn head_mass(&self, k: u64) -> F {
        let k = k.min(self.len()) as usize;
        compensated_sum(self.pmf[..k].iter().copied())
    }

    /// Inverse-CDF draw of a 1-based file index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u = F::lit(rng.gen::<f64>());
        let idx = self.cdf.partition_point(|c| *c <= u);
        idx.min(self.pmf.len() - 1) as u32 + 1
    }
}

/// Zipf pmf `i^-gamma / sum_j j^-gamma` over `1..=m`; `gamma = 0` is uniform.
pub fn zipf_pmf<F: Real>(m: u64, gamma: F) -> Popularity<F> {
    assert!(m >= 1, "library must hold at least one file");
    assert!(gamma >= F::zero(), "zipf exponent must be >= 0");
    if gamma == F::zero() {
        return Popularity::uniform(m);
    }
    let weights: Vec<F> = (1..=m).map(|i| F::count(i).powf(-gamma)).collect();
    let total = compensated_sum(weights.iter().copied());
    Popularity::from_pmf(
        PopularityKind::Zipf(gamma),
        weights.into_iter().map(|w| w / total).collect(),
    )
}

/// Per-node requested file indices (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandVector(pub Vec<u32>);

impl DemandVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn file(&self, node: usize) -> u32 {
        self.0[node]
    }
}

/// `n` i.i.d. draws from `pop`.
pub fn sample_demands<F: Real, R: Rng + ?Sized>(pop: &Popularity<F>, n: usize, rng: &mut R) -> DemandVector {
    DemandVector((0..n).map(|_| pop.sample(rng)).collect())
}
