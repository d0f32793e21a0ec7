//! Symmetric throughput, outage indicators and per-trial diagnostics.

use std::fmt;

use crate::delivery::{LoadTable, SdAssignment, SdOutcome};
use crate::model::DerivedScales;
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutageCause {
    None,
    /// Some demand had no holder in its traffic cell.
    CacheMiss,
    /// Some route crossed an empty hopping cell.
    RelayVoid,
}

impl OutageCause {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutageCause::None => "none",
            OutageCause::CacheMiss => "cache-miss",
            OutageCause::RelayVoid => "relay-void",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(OutageCause::None),
            "cache-miss" => Some(OutageCause::CacheMiss),
            "relay-void" => Some(OutageCause::RelayVoid),
            _ => None,
        }
    }
}

impl fmt::Display for OutageCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one network realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult<F: Real> {
    pub n: u64,
    pub trial: u64,
    /// Symmetric per-node throughput `T_n`; zero under outage.
    pub throughput: F,
    /// `n * T_n`.
    pub aggregate: F,
    pub outage: OutageCause,
    /// Bottleneck load over the cells carrying traffic.
    pub l_max: u32,
    pub unserved_count: usize,
    pub max_sources_per_node: usize,
    /// Rate the served demands would get, `(W/J) / l_max`, computed even
    /// when the trial is in outage.
    pub served_rate: F,
}

impl<F: Real> SimResult<F> {
    pub fn is_outage(&self) -> bool {
        self.outage != OutageCause::None
    }
}

/// Converts a load table into the symmetric throughput.
///
/// `T_n = (W/J) / L_max`; if nothing needs transmitting `T_n = W`; any
/// unserved demand forces `T_n = 0` with a cache-miss outage.
pub fn compute_throughput<F: Real>(
    loads: &LoadTable,
    scales: &DerivedScales<F>,
    assignment: &SdAssignment,
) -> SimResult<F> {
    let l_max = loads.max();
    let served_rate = if l_max == 0 {
        scales.w
    } else {
        scales.aggregate_rate / F::count(l_max as u64)
    };
    let unserved_count = assignment.unserved_count();
    let (throughput, outage) = if unserved_count > 0 {
        (F::zero(), OutageCause::CacheMiss)
    } else {
        (served_rate, OutageCause::None)
    };
    SimResult {
        n: assignment.outcomes.len() as u64,
        trial: 0,
        throughput,
        aggregate: F::count(assignment.outcomes.len() as u64) * throughput,
        outage,
        l_max,
        unserved_count,
        max_sources_per_node: max_sources_per_node(assignment),
        served_rate,
    }
}

/// Largest number of destinations that picked the same source node.
pub fn max_sources_per_node(assignment: &SdAssignment) -> usize {
    let mut counts = vec![0usize; assignment.outcomes.len()];
    for o in &assignment.outcomes {
        if let SdOutcome::Paired { source } = o {
            counts[*source as usize] += 1;
        }
    }
    counts.into_iter().max().unwrap_or(0)
}

/// Empirical `(cache-miss, relay-void)` outage frequencies.
pub fn outage_fraction<F: Real>(trials: &[SimResult<F>]) -> (F, F) {
    assert!(!trials.is_empty(), "outage_fraction needs at least one trial");
    let total = F::count(trials.len() as u64);
    let count = |cause| F::count(trials.iter().filter(|t| t.outage == cause).count() as u64);
    (
        count(OutageCause::CacheMiss) / total,
        count(OutageCause::RelayVoid) / total,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delivery::LoadLevel;
    use crate::model::{derive_scales, DemandVector, NetworkConfig};
    use proptest::prelude::*;

    fn scales() -> DerivedScales<f64> {
        derive_scales(&NetworkConfig::new(1024, 0.8, 0.2, 1.0, 1.0), None).unwrap()
    }

    fn assignment(outcomes: Vec<SdOutcome>) -> SdAssignment {
        let n = outcomes.len();
        SdAssignment {
            outcomes,
            demands: DemandVector(vec![1; n]),
        }
    }

    fn table(loads: Vec<u32>) -> LoadTable {
        LoadTable {
            level: LoadLevel::Hopping,
            loads,
        }
    }

    #[test]
    fn unserved_means_outage() {
        let a = assignment(vec![SdOutcome::Unserved, SdOutcome::Paired { source: 0 }]);
        let r = compute_throughput(&table(vec![1, 0]), &scales(), &a);
        assert_eq!(r.throughput, 0.0);
        assert_eq!(r.outage, OutageCause::CacheMiss);
        assert_eq!(r.unserved_count, 1);
        assert!(r.served_rate > 0.0);
    }

    #[test]
    fn one_route_one_hop() {
        let a = assignment(vec![SdOutcome::Paired { source: 1 }, SdOutcome::SelfServed]);
        let r = compute_throughput(&table(vec![1, 0, 0]), &scales(), &a);
        assert!((r.throughput - 1.0 / 121.0).abs() < 1e-15);
        assert_eq!(r.outage, OutageCause::None);
        assert_eq!(r.l_max, 1);
        assert!((r.aggregate - 2.0 / 121.0).abs() < 1e-15);
    }

    #[test]
    fn all_self_served_gets_link_rate() {
        let a = assignment(vec![SdOutcome::SelfServed; 3]);
        let r = compute_throughput(&table(vec![0; 4]), &scales(), &a);
        assert_eq!(r.throughput, 1.0);
        assert_eq!(r.max_sources_per_node, 0);
    }

    #[test]
    fn source_fan_in() {
        let a = assignment(vec![
            SdOutcome::Paired { source: 2 },
            SdOutcome::Paired { source: 2 },
            SdOutcome::SelfServed,
            SdOutcome::Paired { source: 0 },
        ]);
        assert_eq!(max_sources_per_node(&a), 2);
    }

    #[test]
    fn outage_rates() {
        let ok = SimResult {
            n: 1,
            trial: 0,
            throughput: 1.0,
            aggregate: 1.0,
            outage: OutageCause::None,
            l_max: 0,
            unserved_count: 0,
            max_sources_per_node: 0,
            served_rate: 1.0,
        };
        assert_eq!(outage_fraction(&[ok, ok]), (0.0, 0.0));
        let miss = SimResult {
            outage: OutageCause::CacheMiss,
            throughput: 0.0,
            ..ok
        };
        let void = SimResult {
            outage: OutageCause::RelayVoid,
            throughput: 0.0,
            ..ok
        };
        assert_eq!(outage_fraction(&[ok, miss, miss, void]), (0.5, 0.25));
        assert_eq!(OutageCause::parse("relay-void"), Some(OutageCause::RelayVoid));
        assert_eq!(OutageCause::CacheMiss.to_string(), "cache-miss");
    }

    proptest! {
        #[test]
        fn throughput_bounded_and_monotone(loads in proptest::collection::vec(0u32..50, 1..40), extra in 0usize..40) {
            let s = scales();
            let a = assignment(vec![SdOutcome::Paired { source: 0 }; 2]);
            let r = compute_throughput(&table(loads.clone()), &s, &a);
            prop_assert!(r.throughput <= s.w);
            prop_assert_eq!(r.throughput > 0.0, !r.is_outage());
            // adding a route through any cell never lowers L_max
            let mut more = loads.clone();
            let k = extra % more.len();
            more[k] += 1;
            let r2 = compute_throughput(&table(more), &s, &a);
            prop_assert!(r2.l_max >= r.l_max);
            prop_assert!(r2.throughput <= r.throughput);
        }
    }
}
