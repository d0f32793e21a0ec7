//! Source selection, HDP/VDP routing, TDMA scheduling and the protocol-model
//! feasibility check.

use std::collections::HashMap;
use std::io::Write;

use rand::Rng;

use crate::caching::CachePlacement;
use crate::error::Result;
use crate::geometry::{CellGrid, HopCell, NodePlacement};
use crate::model::{DemandVector, DerivedScales};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdOutcome {
    /// Demand found in the node's own cache.
    SelfServed,
    /// Served by `source`, a holder of the file in the same traffic cell.
    Paired { source: u32 },
    /// No holder in the traffic cell.
    Unserved,
}

/// Source-destination assignment for every node (indexed by destination).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdAssignment {
    pub outcomes: Vec<SdOutcome>,
    pub demands: DemandVector,
}

impl SdAssignment {
    pub fn unserved_count(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| matches!(o, SdOutcome::Unserved))
            .count()
    }

    pub fn self_served_count(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| matches!(o, SdOutcome::SelfServed))
            .count()
    }

    /// `(destination, source)` for every paired demand, in destination order.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.outcomes.iter().enumerate().filter_map(|(d, o)| match o {
            SdOutcome::Paired { source } => Some((d as u32, *source)),
            _ => None,
        })
    }
}

/// Resolves every demand inside its traffic cell. When several nodes hold
/// the file, one is drawn uniformly at random.
pub fn select_sources<F: Real, R: Rng + ?Sized>(
    grid: &CellGrid<F>,
    cache: &CachePlacement,
    demands: &DemandVector,
    rng: &mut R,
) -> SdAssignment {
    let n = grid.node_count();
    assert_eq!(demands.len(), n, "demand vector and grid disagree on n");
    assert_eq!(cache.node_count(), n, "cache placement and grid disagree on n");
    let mut outcomes = vec![SdOutcome::Unserved; n];
    let mut holders: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut scratch = Vec::new();
    for cell in 0..grid.traffic_cell_count() as u32 {
        let members = grid.traffic_members(cell);
        // small cells with large caches: scanning beats indexing every cached file
        let indexed = members.len() > cache.capacity();
        if indexed {
            holders.clear();
            for &v in members {
                for &f in cache.cache(v) {
                    holders.entry(f).or_default().push(v);
                }
            }
        }
        for &d in members {
            let f = demands.file(d as usize);
            if cache.holds(d, f) {
                outcomes[d as usize] = SdOutcome::SelfServed;
                continue;
            }
            let list = if indexed {
                holders.get(&f).map(Vec::as_slice).unwrap_or(&[])
            } else {
                scratch.clear();
                scratch.extend(members.iter().copied().filter(|&v| cache.holds(v, f)));
                &scratch
            };
            outcomes[d as usize] = if list.is_empty() {
                SdOutcome::Unserved
            } else {
                SdOutcome::Paired {
                    source: list[rng.gen_range(0..list.len())],
                }
            };
        }
    }
    SdAssignment {
        outcomes,
        demands: demands.clone(),
    }
}

/// Hop sequence of one SD pair, source cell first. A single-cell route is a
/// direct transmission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub destination: u32,
    pub source: u32,
    pub cells: Vec<HopCell>,
}

impl Route {
    /// Number of transmissions; a same-cell pair still needs one.
    pub fn hops(&self) -> usize {
        self.cells.len().saturating_sub(1).max(1)
    }

    pub fn is_direct(&self) -> bool {
        self.cells.len() == 1
    }
}

/// Horizontal segment along the source row to the destination column, then
/// vertical segment along that column.
pub fn hv_path(from: HopCell, to: HopCell) -> Vec<HopCell> {
    let mut cells = Vec::with_capacity((from.i.abs_diff(to.i) + from.j.abs_diff(to.j) + 1) as usize);
    let mut c = from;
    cells.push(c);
    while c.i != to.i {
        c.i = if to.i > c.i { c.i + 1 } else { c.i - 1 };
        cells.push(c);
    }
    while c.j != to.j {
        c.j = if to.j > c.j { c.j + 1 } else { c.j - 1 };
        cells.push(c);
    }
    cells
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoutePlan {
    pub routes: Vec<Route>,
}

impl RoutePlan {
    /// Dump as `demand_id,hop_index,cell_i,cell_j` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["demand_id", "hop_index", "cell_i", "cell_j"])?;
        for r in &self.routes {
            for (k, c) in r.cells.iter().enumerate() {
                w.write_record([
                    r.destination.to_string(),
                    k.to_string(),
                    c.i.to_string(),
                    c.j.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Routes every paired demand. Unserved and self-served nodes get no route.
pub fn build_routes<F: Real>(assignment: &SdAssignment, grid: &CellGrid<F>) -> RoutePlan {
    let routes = assignment
        .pairs()
        .map(|(d, s)| Route {
            destination: d,
            source: s,
            cells: hv_path(grid.hop_cell_of(s), grid.hop_cell_of(d)),
        })
        .collect();
    RoutePlan { routes }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadLevel {
    Hopping,
    Traffic,
}

/// Per-cell count of data paths a cell must carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadTable {
    pub level: LoadLevel,
    pub loads: Vec<u32>,
}

impl LoadTable {
    pub fn max(&self) -> u32 {
        self.loads.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.loads.iter().map(|&l| l as u64).sum()
    }
}

/// Number of routes touching each hopping cell (once per route per cell).
pub fn hopping_loads<F: Real>(plan: &RoutePlan, grid: &CellGrid<F>) -> LoadTable {
    let mut loads = vec![0u32; grid.hopping_cell_count()];
    for r in &plan.routes {
        for c in &r.cells {
            loads[grid.hop_index(*c)] += 1;
        }
    }
    LoadTable {
        level: LoadLevel::Hopping,
        loads,
    }
}

/// One scheduled transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub tx: u32,
    pub rx: u32,
    pub cell: HopCell,
}

/// A route crossed a hopping cell with no node to relay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelayVoid {
    pub route: usize,
    pub cell: HopCell,
}

/// TDMA over hopping cells with reuse factor `J = K^2`: cell `(i, j)` is
/// active in slot `(i mod K) * K + (j mod K)`; within a cell, transmissions
/// are served round-robin.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    reuse_side: u32,
    hop_side: u32,
    queues: Vec<Vec<(u32, u32)>>,
    loads: LoadTable,
}

impl Schedule {
    pub fn reuse_side(&self) -> u32 {
        self.reuse_side
    }

    pub fn reuse_factor(&self) -> usize {
        (self.reuse_side * self.reuse_side) as usize
    }

    pub fn slot_of(&self, cell: HopCell) -> usize {
        let k = self.reuse_side;
        ((cell.i % k) * k + (cell.j % k)) as usize
    }

    pub fn loads(&self) -> &LoadTable {
        &self.loads
    }

    /// Round-robin rounds needed to serve every queued transmission once.
    pub fn rounds(&self) -> usize {
        self.queues.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Cells assigned to `slot` (whether or not they have traffic).
    pub fn slot_cells(&self, slot: usize) -> impl Iterator<Item = HopCell> + '_ {
        let k = self.reuse_side;
        let (a, b) = (slot as u32 / k, slot as u32 % k);
        let side = self.hop_side;
        (b..side)
            .step_by(k as usize)
            .flat_map(move |j| (a..side).step_by(k as usize).map(move |i| HopCell::new(i, j)))
    }

    /// Transmissions active in `slot` during round-robin round `round`: one
    /// per active cell with queued traffic.
    pub fn activation_set(&self, slot: usize, round: usize) -> Vec<Link> {
        self.slot_cells(slot)
            .filter_map(|cell| {
                let q = &self.queues[(cell.j * self.hop_side + cell.i) as usize];
                (!q.is_empty()).then(|| {
                    let (tx, rx) = q[round % q.len()];
                    Link { tx, rx, cell }
                })
            })
            .collect()
    }
}

/// Builds the TDMA schedule and per-cell load table for `plan`.
///
/// Endpoints are the actual source and destination nodes; intermediate hops
/// use each cell's designated relay. Fails with [`RelayVoid`] if a route
/// crosses an empty cell.
pub fn schedule_tdma<F: Real>(
    plan: &RoutePlan,
    grid: &CellGrid<F>,
    scales: &DerivedScales<F>,
) -> std::result::Result<Schedule, RelayVoid> {
    let side = grid.hopping_side_count();
    let mut queues = vec![Vec::new(); grid.hopping_cell_count()];
    for (k, r) in plan.routes.iter().enumerate() {
        if r.is_direct() {
            queues[grid.hop_index(r.cells[0])].push((r.source, r.destination));
            continue;
        }
        let last = r.cells.len() - 1;
        let relay = |p: usize| {
            grid.relay(r.cells[p]).ok_or(RelayVoid {
                route: k,
                cell: r.cells[p],
            })
        };
        for p in 0..last {
            let tx = if p == 0 { r.source } else { relay(p)? };
            let rx = if p + 1 == last { r.destination } else { relay(p + 1)? };
            queues[grid.hop_index(r.cells[p])].push((tx, rx));
        }
    }
    Ok(Schedule {
        reuse_side: scales.reuse_side as u32,
        hop_side: side,
        queues,
        loads: hopping_loads(plan, grid),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProtocolViolation<F: Real> {
    /// Receiver farther than `r` from its transmitter.
    OutOfRange { link: usize, distance: F },
    /// Another active transmitter within `(1 + delta) r` of the receiver.
    Interference {
        link: usize,
        interferer: usize,
        distance: F,
    },
}

/// Protocol-model check: every link spans at most `r` and no other active
/// transmitter lies within `(1 + delta) r` of any receiver. Reports the first
/// violation found.
pub fn check_protocol_model<F: Real>(
    links: &[Link],
    placement: &NodePlacement<F>,
    r: F,
    delta: F,
) -> std::result::Result<(), ProtocolViolation<F>> {
    let guard = (F::one() + delta) * r;
    for (k, link) in links.iter().enumerate() {
        let rx = placement.pos(link.rx);
        let d = placement.pos(link.tx).dist(&rx);
        if d > r {
            return Err(ProtocolViolation::OutOfRange { link: k, distance: d });
        }
        for (o, other) in links.iter().enumerate() {
            if o == k {
                continue;
            }
            let d = placement.pos(other.tx).dist(&rx);
            if d <= guard {
                return Err(ProtocolViolation::Interference {
                    link: k,
                    interferer: o,
                    distance: d,
                });
            }
        }
    }
    Ok(())
}

/// Single-hop delivery: per traffic cell, the number of paired demands that
/// must be served directly inside it.
pub fn deliver_single_hop<F: Real>(assignment: &SdAssignment, grid: &CellGrid<F>) -> LoadTable {
    let mut loads = vec![0u32; grid.traffic_cell_count()];
    for (d, _) in assignment.pairs() {
        loads[grid.traffic_cell_of(d) as usize] += 1;
    }
    LoadTable {
        level: LoadLevel::Traffic,
        loads,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caching::{place_decentralized, CachePolicy};
    use crate::geometry::{build_grid, place_nodes, Point};
    use crate::model::{derive_scales, NetworkConfig};
    use crate::rng::trial_rng;
    use proptest::prelude::*;

    fn scales(n: u64, eta: f64) -> DerivedScales<f64> {
        derive_scales(&NetworkConfig::new(n, 0.8, 0.2, 1.0, 1.0), None)
            .unwrap()
            .with_eta(eta)
            .unwrap()
    }

    #[test]
    fn hv_path_examples() {
        let p = hv_path(HopCell::new(2, 3), HopCell::new(5, 3));
        assert_eq!(
            p,
            vec![
                HopCell::new(2, 3),
                HopCell::new(3, 3),
                HopCell::new(4, 3),
                HopCell::new(5, 3)
            ]
        );
        let p = hv_path(HopCell::new(0, 0), HopCell::new(1, 1));
        assert_eq!(p, vec![HopCell::new(0, 0), HopCell::new(1, 0), HopCell::new(1, 1)]);
        let p = hv_path(HopCell::new(4, 4), HopCell::new(4, 4));
        assert_eq!(p.len(), 1);
        let p = hv_path(HopCell::new(3, 1), HopCell::new(1, 0));
        assert_eq!(
            p,
            vec![
                HopCell::new(3, 1),
                HopCell::new(2, 1),
                HopCell::new(1, 1),
                HopCell::new(1, 0)
            ]
        );
    }

    #[test]
    fn direct_route_is_one_hop() {
        let r = Route {
            destination: 0,
            source: 1,
            cells: vec![HopCell::new(2, 2)],
        };
        assert_eq!(r.hops(), 1);
        assert!(r.is_direct());
    }

    fn tiny_world() -> (NodePlacement<f64>, CellGrid<f64>, DerivedScales<f64>) {
        // n = 4096 at eta = 0.5: 8 traffic cells of 2x2 hopping cells, side 1/16
        let s = scales(4096, 0.5);
        let placement = NodePlacement {
            positions: vec![
                Point::new(0.01, 0.01),
                Point::new(0.07, 0.01),
                Point::new(0.07, 0.07),
                Point::new(0.02, 0.02),
                Point::new(0.5, 0.5),
            ],
        };
        let grid = build_grid(&placement, &s);
        (placement, grid, s)
    }

    fn cache_of(sets: &[&[u32]]) -> CachePlacement {
        let files = sets.iter().flat_map(|s| s.iter().copied()).collect();
        CachePlacement::from_parts(CachePolicy::DecentralizedFull, sets[0].len(), files).unwrap()
    }

    #[test]
    fn self_served_and_single_holder() {
        let (_, grid, _) = tiny_world();
        let cache = cache_of(&[&[1], &[2], &[3], &[4], &[5]]);
        let demands = DemandVector(vec![1, 3, 3, 5, 1]);
        let a = select_sources(&grid, &cache, &demands, &mut trial_rng(0, 0, 0));
        assert_eq!(a.outcomes[0], SdOutcome::SelfServed);
        assert_eq!(a.outcomes[1], SdOutcome::Paired { source: 2 });
        assert_eq!(a.outcomes[2], SdOutcome::SelfServed);
        // node 4 holds file 5 but sits in another traffic cell
        assert_eq!(a.outcomes[3], SdOutcome::Unserved);
        assert_eq!(a.outcomes[4], SdOutcome::Unserved);
        assert_eq!(a.unserved_count(), 2);
        assert_eq!(a.self_served_count(), 2);
    }

    #[test]
    fn multiple_holders_chosen_uniformly() {
        let (_, grid, _) = tiny_world();
        let cache = cache_of(&[&[9], &[7], &[7], &[7], &[7]]);
        let demands = DemandVector(vec![7, 9, 9, 9, 9]);
        let mut counts = [0usize; 4];
        let mut rng = trial_rng(1, 0, 0);
        for _ in 0..3000 {
            let a = select_sources(&grid, &cache, &demands, &mut rng);
            match a.outcomes[0] {
                SdOutcome::Paired { source } => counts[source as usize] += 1,
                o => panic!("{o:?}"),
            }
        }
        assert_eq!(counts[0], 0);
        for c in &counts[1..] {
            assert!((*c as f64 - 1000.0).abs() < 120.0, "{counts:?}");
        }
    }

    #[test]
    fn full_caching_serves_everyone_locally() {
        let s = scales(500, 0.3);
        let p = place_nodes::<f64, _>(500, &mut trial_rng(0, 500, 0));
        let g = build_grid(&p, &s);
        let cache = place_decentralized(500, 20, 20, &mut trial_rng(0, 500, 1)).unwrap();
        let demands = DemandVector((0..500).map(|v| v % 20 + 1).collect());
        let a = select_sources(&g, &cache, &demands, &mut trial_rng(0, 500, 2));
        assert_eq!(a.self_served_count(), 500);
        assert_eq!(a.unserved_count(), 0);
        assert!(build_routes(&a, &g).routes.is_empty());
        assert_eq!(deliver_single_hop(&a, &g).max(), 0);
    }

    #[test]
    fn loads_count_routes_once_per_cell() {
        let (_, grid, s) = tiny_world();
        let plan = RoutePlan {
            routes: vec![
                Route {
                    destination: 2,
                    source: 0,
                    cells: hv_path(HopCell::new(0, 0), HopCell::new(1, 1)),
                },
                Route {
                    destination: 1,
                    source: 3,
                    cells: hv_path(HopCell::new(0, 0), HopCell::new(1, 0)),
                },
            ],
        };
        let loads = hopping_loads(&plan, &grid);
        assert_eq!(loads.loads[grid.hop_index(HopCell::new(0, 0))], 2);
        assert_eq!(loads.loads[grid.hop_index(HopCell::new(1, 0))], 2);
        assert_eq!(loads.loads[grid.hop_index(HopCell::new(1, 1))], 1);
        assert_eq!(loads.total(), 5);
        assert_eq!(loads.max(), 2);
        let sched = schedule_tdma(&plan, &grid, &s).unwrap();
        assert_eq!(sched.reuse_factor(), 121);
        assert_eq!(sched.rounds(), 2);
    }

    #[test]
    fn single_route_load() {
        let (_, grid, _) = tiny_world();
        let plan = RoutePlan {
            routes: vec![Route {
                destination: 2,
                source: 0,
                cells: hv_path(HopCell::new(0, 0), HopCell::new(1, 1)),
            }],
        };
        let loads = hopping_loads(&plan, &grid);
        assert_eq!(loads.total(), 3);
        assert_eq!(loads.loads.iter().filter(|&&l| l == 1).count(), 3);
        assert_eq!(
            loads.loads.iter().filter(|&&l| l == 0).count(),
            grid.hopping_cell_count() - 3
        );
    }

    #[test]
    fn relay_void_detected() {
        let (_, grid, s) = tiny_world();
        // (1, 2) .. (3, 2) crosses empty cells
        let plan = RoutePlan {
            routes: vec![Route {
                destination: 4,
                source: 0,
                cells: hv_path(HopCell::new(0, 0), HopCell::new(3, 0)),
            }],
        };
        let e = schedule_tdma(&plan, &grid, &s).unwrap_err();
        assert_eq!(e.route, 0);
        assert_eq!(e.cell, HopCell::new(2, 0));
    }

    #[test]
    fn slot_assignment_covers_each_cell_once() {
        let s = scales(65_536, 0.4);
        let p = place_nodes::<f64, _>(10, &mut trial_rng(0, 10, 0));
        let g = build_grid(&p, &s);
        let sched = schedule_tdma(&RoutePlan::default(), &g, &s).unwrap();
        let mut seen = vec![0u32; g.hopping_cell_count()];
        for slot in 0..sched.reuse_factor() {
            for c in sched.slot_cells(slot) {
                assert_eq!(sched.slot_of(c), slot);
                seen[g.hop_index(c)] += 1;
            }
        }
        assert!(seen.iter().all(|&k| k == 1));
    }

    #[test]
    fn protocol_model_basic_cases() {
        let placement = NodePlacement {
            positions: vec![
                Point::new(0.10, 0.10),
                Point::new(0.12, 0.10),
                Point::new(0.14, 0.10),
                Point::new(0.16, 0.10),
            ],
        };
        let r = 0.03;
        let one = [Link {
            tx: 0,
            rx: 1,
            cell: HopCell::new(0, 0),
        }];
        assert!(check_protocol_model(&one, &placement, r, 1.0).is_ok());
        let two = [
            one[0],
            Link {
                tx: 2,
                rx: 3,
                cell: HopCell::new(1, 0),
            },
        ];
        assert!(matches!(
            check_protocol_model(&two, &placement, r, 1.0),
            Err(ProtocolViolation::Interference {
                link: 0,
                interferer: 1,
                ..
            })
        ));
        let far = [Link {
            tx: 0,
            rx: 3,
            cell: HopCell::new(0, 0),
        }];
        assert!(matches!(
            check_protocol_model(&far, &placement, r, 1.0),
            Err(ProtocolViolation::OutOfRange { link: 0, .. })
        ));
    }

    #[test]
    fn adjacent_cells_on_together_violate() {
        // co-located tx/rx at the nearest corners of two horizontally adjacent cells
        let s = scales(16_384, 0.35);
        let g = build_grid(&place_nodes::<f64, _>(1, &mut trial_rng(0, 1, 0)), &s);
        let h = g.hopping_side();
        let eps = h * 1e-3;
        let placement = NodePlacement {
            positions: vec![
                Point::new(h - eps, 0.5 * h),       // tx in (0, 0)
                Point::new(h - 2.0 * eps, 1.5 * h), // rx in (0, 1)
                Point::new(h + eps, 0.5 * h),       // tx in (1, 0)
                Point::new(h + 2.0 * eps, 1.5 * h), // rx in (1, 1)
            ],
        };
        let links = [
            Link {
                tx: 0,
                rx: 1,
                cell: HopCell::new(0, 0),
            },
            Link {
                tx: 2,
                rx: 3,
                cell: HopCell::new(1, 0),
            },
        ];
        assert!(check_protocol_model(&links[..1], &placement, s.radius, s.delta).is_ok());
        assert!(check_protocol_model(&links, &placement, s.radius, s.delta).is_err());
    }

    #[test]
    fn single_hop_loads() {
        let (_, grid, _) = tiny_world();
        let cache = cache_of(&[&[1], &[2], &[2], &[2], &[5]]);
        let demands = DemandVector(vec![2, 1, 1, 1, 5]);
        let a = select_sources(&grid, &cache, &demands, &mut trial_rng(0, 0, 0));
        let loads = deliver_single_hop(&a, &grid);
        assert_eq!(loads.level, LoadLevel::Traffic);
        assert_eq!(loads.loads[0], 4);
        assert_eq!(loads.total(), 4);
    }

    #[test]
    fn routes_csv() {
        let plan = RoutePlan {
            routes: vec![Route {
                destination: 3,
                source: 0,
                cells: hv_path(HopCell::new(0, 0), HopCell::new(1, 1)),
            }],
        };
        let mut buf = Vec::new();
        plan.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(3), Some("3,2,1,1"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn route_validity_and_load_conservation(n in 200usize..3000, eta in 0.1f64..0.6, seed in any::<u64>()) {
            let s = scales(n as u64, eta);
            let p = place_nodes::<f64, _>(n, &mut trial_rng(seed, n as u64, 0));
            let g = build_grid(&p, &s);
            let cache = place_decentralized(n, 2, 40, &mut trial_rng(seed, n as u64, 1)).unwrap();
            let demands = DemandVector((0..n as u32).map(|v| v % 40 + 1).collect());
            let a = select_sources(&g, &cache, &demands, &mut trial_rng(seed, n as u64, 2));
            for (d, src) in a.pairs() {
                prop_assert_eq!(g.traffic_cell_of(d), g.traffic_cell_of(src));
                prop_assert!(cache.holds(src, demands.file(d as usize)));
                prop_assert!(!cache.holds(d, demands.file(d as usize)));
            }
            let plan = build_routes(&a, &g);
            for r in &plan.routes {
                prop_assert_eq!(*r.cells.first().unwrap(), g.hop_cell_of(r.source));
                prop_assert_eq!(*r.cells.last().unwrap(), g.hop_cell_of(r.destination));
                let tc = g.traffic_cell_of(r.destination);
                let mut vertical = false;
                for w in r.cells.windows(2) {
                    prop_assert!(w[0].is_adjacent(&w[1]));
                    if w[0].j != w[1].j { vertical = true; }
                    // no horizontal step after a vertical one
                    prop_assert!(!(vertical && w[0].i != w[1].i));
                }
                prop_assert!(r.cells.iter().all(|c| g.traffic_cell_of_hop(*c) == tc));
            }
            let loads = hopping_loads(&plan, &g);
            prop_assert_eq!(loads.total(), plan.routes.iter().map(|r| r.cells.len() as u64).sum::<u64>());
        }
    }
}
