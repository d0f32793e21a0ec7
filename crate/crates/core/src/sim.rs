//! One network realization end to end: placement, caching, demands, source
//! selection, delivery and throughput.

use std::fmt;
use std::str::FromStr;

use crate::caching::{place_centralized, place_decentralized, place_decentralized_subset, CachePlacement};
use crate::delivery::{
    build_routes, deliver_single_hop, schedule_tdma, select_sources, RelayVoid, RoutePlan, Schedule, SdAssignment,
};
use crate::error::{Error, Result};
use crate::geometry::{build_grid, place_nodes, CellGrid, NodePlacement};
use crate::metrics::{compute_throughput, OutageCause, SimResult};
use crate::model::{
    derive_scales, sample_demands, zipf_pmf, DemandVector, DerivedScales, ImprovedParams, NetworkConfig, Popularity,
};
use crate::num::Real;
use crate::rng::{stage_rng, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Decentralized caching, local multihop inside traffic cells.
    Multihop,
    /// Decentralized caching, direct transmission inside traffic cells.
    SingleHop,
    /// Popularity-truncated decentralized caching with local multihop.
    MultihopImproved,
    /// Centralized caching over the whole network with global multihop.
    CentralizedGlobal,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Multihop,
        Scheme::SingleHop,
        Scheme::MultihopImproved,
        Scheme::CentralizedGlobal,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Multihop => "multihop",
            Scheme::SingleHop => "single-hop",
            Scheme::MultihopImproved => "multihop-improved",
            Scheme::CentralizedGlobal => "centralized-global",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme {s:?}")))
    }
}

/// Scheme-level knobs shared by every `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams<F: Real> {
    pub scheme: Scheme,
    /// Zipf exponent of the demands.
    pub gamma: F,
    /// Truncation slack of the improved scheme.
    pub eps_c: F,
    /// Fixed traffic-cell exponent replacing the derived one.
    pub eta: Option<F>,
}

/// Everything that depends on `n` but not on the trial.
#[derive(Debug, Clone)]
pub struct PreparedSize<F: Real> {
    pub cfg: NetworkConfig<F>,
    pub params: SchemeParams<F>,
    pub scales: DerivedScales<F>,
    pub popularity: Popularity<F>,
}

/// All intermediate products of one trial.
#[derive(Debug, Clone)]
pub struct World<F: Real> {
    pub placement: NodePlacement<F>,
    pub grid: CellGrid<F>,
    pub cache: CachePlacement,
    pub demands: DemandVector,
    pub assignment: SdAssignment,
    /// Empty for single-hop delivery.
    pub plan: RoutePlan,
    /// `None` for single-hop delivery or when a route hit an empty cell.
    pub schedule: Option<std::result::Result<Schedule, RelayVoid>>,
}

impl<F: Real> PreparedSize<F> {
    pub fn new(cfg: NetworkConfig<F>, params: SchemeParams<F>) -> Result<Self> {
        let improved = (params.scheme == Scheme::MultihopImproved).then_some(ImprovedParams {
            gamma: params.gamma,
            eps_c: params.eps_c,
        });
        let mut scales = derive_scales(&cfg, improved)?;
        if params.scheme == Scheme::CentralizedGlobal {
            scales = scales.with_eta(F::zero())?;
        }
        if let Some(eta) = params.eta {
            scales = scales.with_eta(eta)?;
        }
        if !(params.gamma >= F::zero()) {
            return Err(Error::InvalidConfig(format!(
                "gamma must be >= 0 (got {})",
                params.gamma
            )));
        }
        let popularity = zipf_pmf(scales.library_size, params.gamma);
        Ok(PreparedSize {
            cfg,
            params,
            scales,
            popularity,
        })
    }

    fn node_count(&self) -> usize {
        usize::try_from(self.cfg.n).expect("n fits in memory")
    }

    /// Draws caches for one trial.
    pub fn place_caches(&self, trial: u64) -> Result<CachePlacement> {
        let mut rng = stage_rng(self.cfg.seed, self.cfg.n, trial, Stage::Caches);
        let n = self.node_count();
        let s = &self.scales;
        match self.params.scheme {
            Scheme::Multihop | Scheme::SingleHop => place_decentralized(n, s.cache_size, s.library_size, &mut rng),
            Scheme::MultihopImproved => place_decentralized_subset(n, s.cache_size, s, &mut rng),
            Scheme::CentralizedGlobal => place_centralized(n, s.cache_size, s.library_size, &mut rng),
        }
    }

    /// Builds the full realization for `trial`.
    pub fn build_world(&self, trial: u64) -> Result<World<F>> {
        let (seed, n) = (self.cfg.seed, self.cfg.n);
        let placement = place_nodes(self.node_count(), &mut stage_rng(seed, n, trial, Stage::Nodes));
        let grid = build_grid(&placement, &self.scales);
        let cache = self.place_caches(trial)?;
        let demands = sample_demands(
            &self.popularity,
            self.node_count(),
            &mut stage_rng(seed, n, trial, Stage::Demands),
        );
        let assignment = select_sources(&grid, &cache, &demands, &mut stage_rng(seed, n, trial, Stage::Sources));
        let (plan, schedule) = if self.params.scheme == Scheme::SingleHop {
            (RoutePlan::default(), None)
        } else {
            let plan = build_routes(&assignment, &grid);
            let schedule = schedule_tdma(&plan, &grid, &self.scales);
            (plan, Some(schedule))
        };
        Ok(World {
            placement,
            grid,
            cache,
            demands,
            assignment,
            plan,
            schedule,
        })
    }

    /// Throughput of one realization.
    pub fn run_trial(&self, trial: u64) -> Result<SimResult<F>> {
        let world = self.build_world(trial)?;
        Ok(self.evaluate(&world, trial))
    }

    pub fn evaluate(&self, world: &World<F>, trial: u64) -> SimResult<F> {
        let mut result = match &world.schedule {
            None => compute_throughput(
                &deliver_single_hop(&world.assignment, &world.grid),
                &self.scales,
                &world.assignment,
            ),
            Some(Ok(schedule)) => compute_throughput(schedule.loads(), &self.scales, &world.assignment),
            Some(Err(_)) => {
                let loads = crate::delivery::hopping_loads(&world.plan, &world.grid);
                let mut r = compute_throughput(&loads, &self.scales, &world.assignment);
                if !r.is_outage() {
                    r.outage = OutageCause::RelayVoid;
                }
                r.throughput = F::zero();
                r.aggregate = F::zero();
                r
            }
        };
        result.trial = trial;
        result
    }
}
