//! Node placement on the unit square and the nested traffic/hopping grid.

use std::io::Write;

use rand::Rng;

use crate::error::Result;
use crate::model::DerivedScales;
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<F: Real> {
    pub x: F,
    pub y: F,
}

impl<F: Real> Point<F> {
    pub fn new(x: F, y: F) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point<F>) -> F {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Positions of the `n` nodes, indexed by node id.
#[derive(Debug, Clone, PartialEq)]
pub struct NodePlacement<F: Real> {
    pub positions: Vec<Point<F>>,
}

impl<F: Real> NodePlacement<F> {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn pos(&self, node: u32) -> Point<F> {
        self.positions[node as usize]
    }
}

/// `n` i.i.d. uniform points in `[0,1)^2`.
pub fn place_nodes<F: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> NodePlacement<F> {
    let positions = (0..n)
        .map(|_| {
            let x = F::lit(rng.gen::<f64>());
            let y = F::lit(rng.gen::<f64>());
            Point::new(x, y)
        })
        .collect();
    NodePlacement { positions }
}

/// Hopping cell coordinates on the global hopping grid; `i` is the column
/// (x axis), `j` the row (y axis).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HopCell {
    pub i: u32,
    pub j: u32,
}

impl HopCell {
    pub fn new(i: u32, j: u32) -> Self {
        HopCell { i, j }
    }

    /// True iff the cells differ by one in exactly one axis.
    pub fn is_adjacent(&self, other: &HopCell) -> bool {
        self.i.abs_diff(other.i) + self.j.abs_diff(other.j) == 1
    }
}

/// Compressed lists of node ids per cell.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Buckets {
    offsets: Vec<u32>,
    nodes: Vec<u32>,
}

impl Buckets {
    fn build(cell_of: &[u32], cells: usize) -> Self {
        let mut offsets = vec![0u32; cells + 1];
        for &c in cell_of {
            offsets[c as usize + 1] += 1;
        }
        for k in 0..cells {
            offsets[k + 1] += offsets[k];
        }
        let mut cursor = offsets.clone();
        let mut nodes = vec![0u32; cell_of.len()];
        for (node, &c) in cell_of.iter().enumerate() {
            nodes[cursor[c as usize] as usize] = node as u32;
            cursor[c as usize] += 1;
        }
        Buckets { offsets, nodes }
    }

    fn get(&self, cell: usize) -> &[u32] {
        &self.nodes[self.offsets[cell] as usize..self.offsets[cell + 1] as usize]
    }

    fn cells(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Traffic cells of side `1/k_c`, each split into `k_h x k_h` hopping cells.
///
/// Cells are half-open: a point on a shared edge belongs to the cell with
/// the larger index; the far edges `x = 1`, `y = 1` belong to the last cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid<F: Real> {
    traffic_side: u32,
    hops_per_traffic_side: u32,
    hop_of: Vec<u32>,
    traffic_of: Vec<u32>,
    hop_members: Buckets,
    traffic_members: Buckets,
    relays: Vec<Option<u32>>,
    _scalar: std::marker::PhantomData<F>,
}

impl<F: Real> CellGrid<F> {
    /// `k_c`: traffic cells per side.
    pub fn traffic_side_count(&self) -> u32 {
        self.traffic_side
    }

    /// `k_h`: hopping cells per traffic-cell side.
    pub fn hops_per_traffic_side(&self) -> u32 {
        self.hops_per_traffic_side
    }

    /// Hopping cells per side of the unit square, `k_c * k_h`.
    pub fn hopping_side_count(&self) -> u32 {
        self.traffic_side * self.hops_per_traffic_side
    }

    pub fn hopping_cell_count(&self) -> usize {
        let k = self.hopping_side_count() as usize;
        k * k
    }

    pub fn traffic_cell_count(&self) -> usize {
        let k = self.traffic_side as usize;
        k * k
    }

    /// Side length of a hopping cell.
    pub fn hopping_side(&self) -> F {
        F::one() / F::count(self.hopping_side_count() as u64)
    }

    /// Area of a traffic cell as built (not the nominal `n^-eta`).
    pub fn traffic_cell_area(&self) -> F {
        let s = F::one() / F::count(self.traffic_side as u64);
        s * s
    }

    pub fn hop_index(&self, cell: HopCell) -> usize {
        cell.j as usize * self.hopping_side_count() as usize + cell.i as usize
    }

    pub fn hop_cell(&self, index: usize) -> HopCell {
        let k = self.hopping_side_count() as usize;
        HopCell::new((index % k) as u32, (index / k) as u32)
    }

    pub fn hop_cell_of(&self, node: u32) -> HopCell {
        self.hop_cell(self.hop_of[node as usize] as usize)
    }

    pub fn traffic_cell_of(&self, node: u32) -> u32 {
        self.traffic_of[node as usize]
    }

    /// Traffic cell containing a hopping cell.
    pub fn traffic_cell_of_hop(&self, cell: HopCell) -> u32 {
        let kh = self.hops_per_traffic_side;
        (cell.j / kh) * self.traffic_side + cell.i / kh
    }

    /// Hopping cell containing `p`.
    pub fn locate(&self, p: Point<F>) -> HopCell {
        let k = self.hopping_side_count();
        HopCell::new(axis_cell(p.x, k), axis_cell(p.y, k))
    }

    pub fn hop_members(&self, cell: HopCell) -> &[u32] {
        self.hop_members.get(self.hop_index(cell))
    }

    pub fn traffic_members(&self, traffic_cell: u32) -> &[u32] {
        self.traffic_members.get(traffic_cell as usize)
    }

    /// Designated relay of a hopping cell: the node nearest the cell center,
    /// ties broken by the smaller node id. `None` for an empty cell.
    pub fn relay(&self, cell: HopCell) -> Option<u32> {
        self.relays[self.hop_index(cell)]
    }

    pub fn node_count(&self) -> usize {
        self.hop_of.len()
    }
}

fn axis_cell<F: Real>(v: F, k: u32) -> u32 {
    let c = (v * F::count(k as u64)).floor().to_i64().unwrap_or(0);
    c.clamp(0, k as i64 - 1) as u32
}

/// Builds the nested grid with `k_c = ceil(n^(eta/2))` and
/// `k_h = ceil((1/k_c) / sqrt(a_h))`, so every hopping cell has area at most `a_h`.
pub fn build_grid<F: Real>(placement: &NodePlacement<F>, scales: &DerivedScales<F>) -> CellGrid<F> {
    let kc = scales.traffic_side_count() as u32;
    let kh_f = (F::one() / F::count(kc as u64)) / scales.hopping_area.sqrt();
    let kh = (kh_f.ceil().to_u64().expect("finite hop count") as u32).max(1);
    let k = kc * kh;
    let hop_of: Vec<u32> = placement
        .positions
        .iter()
        .map(|p| axis_cell(p.y, k) * k + axis_cell(p.x, k))
        .collect();
    let traffic_of: Vec<u32> = hop_of
        .iter()
        .map(|&h| {
            let (i, j) = (h % k, h / k);
            (j / kh) * kc + i / kh
        })
        .collect();
    let hop_members = Buckets::build(&hop_of, (k * k) as usize);
    let traffic_members = Buckets::build(&traffic_of, (kc * kc) as usize);

    let side = F::one() / F::count(k as u64);
    let half = side / F::lit(2.0);
    let relays = (0..hop_members.cells())
        .map(|c| {
            let (i, j) = ((c as u32) % k, (c as u32) / k);
            let center = Point::new(F::count(i as u64) * side + half, F::count(j as u64) * side + half);
            // members are in ascending id order, so strict < keeps the smallest id on ties
            let mut best: Option<(F, u32)> = None;
            for &node in hop_members.get(c) {
                let d = placement.pos(node).dist(&center);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, node));
                }
            }
            best.map(|(_, node)| node)
        })
        .collect();

    CellGrid {
        traffic_side: kc,
        hops_per_traffic_side: kh,
        hop_of,
        traffic_of,
        hop_members,
        traffic_members,
        relays,
        _scalar: std::marker::PhantomData,
    }
}

/// Extremes of per-cell node counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OccupancyStats {
    pub hop_min: usize,
    pub hop_max: usize,
    pub traffic_min: usize,
    pub traffic_max: usize,
}

pub fn cell_occupancy_stats<F: Real>(grid: &CellGrid<F>) -> OccupancyStats {
    let extremes = |b: &Buckets| {
        (0..b.cells()).fold((usize::MAX, 0), |(lo, hi), c| {
            let len = b.get(c).len();
            (lo.min(len), hi.max(len))
        })
    };
    let (hop_min, hop_max) = extremes(&grid.hop_members);
    let (traffic_min, traffic_max) = extremes(&grid.traffic_members);
    OccupancyStats {
        hop_min,
        hop_max,
        traffic_min,
        traffic_max,
    }
}

/// Debug dump: `node_id,x,y,traffic_cell,hopping_cell`.
pub fn write_cells_csv<F: Real, W: Write>(placement: &NodePlacement<F>, grid: &CellGrid<F>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node_id", "x", "y", "traffic_cell", "hopping_cell"])?;
    for (node, p) in placement.positions.iter().enumerate() {
        let node = node as u32;
        w.write_record([
            node.to_string(),
            p.x.to_string(),
            p.y.to_string(),
            grid.traffic_cell_of(node).to_string(),
            grid.hop_index(grid.hop_cell_of(node)).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
