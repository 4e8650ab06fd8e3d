//! Exhaustive enumeration of tube polygons by length and span.
//!
//! A polygon of span `s >= 2` is a chain: one starting 1-pattern, `s - 1`
//! proper 1-patterns, one ending 1-pattern, consecutive patterns in the
//! follow relation (see [`crate::patterns`]).  The enumerator runs a
//! depth-first search over these chains, pruned by the cheapest possible
//! completion cost from every proper pattern, and adds the explicit span-0
//! and span-1 polygons.  Totals match the transfer-matrix series
//! coefficient for coefficient; the chain walk additionally materialises
//! every polygon on demand.
//!
//! Counts are tabulated by `(n, span)` in a [`CountTable`] with
//! arbitrary-precision entries.  Work can be sharded by the index of the
//! first proper pattern in the chain: shards are disjoint, sum to the
//! total, and shard 0 also carries the span-0 and span-1 polygons (which
//! have no proper pattern).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;

use crate::lattice::{lane_yz, Edge, LatticePolygon, TubeDims, Vertex};
use crate::patterns::{restricted_system, standard_system, OnePattern, TransferSystem};

/// Polygon counts indexed by `(n, span)`, with arbitrary-precision values.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CountTable {
    map: BTreeMap<(u32, u32), BigUint>,
}

impl CountTable {
    pub fn new() -> Self {
        CountTable::default()
    }

    pub fn add(&mut self, n: u32, span: u32, count: BigUint) {
        if !count.is_zero() {
            *self.map.entry((n, span)).or_default() += count;
        }
    }

    pub fn add_u64(&mut self, n: u32, span: u32, count: u64) {
        self.add(n, span, count.into());
    }

    /// Count of polygons with exactly this length and span.
    pub fn get(&self, n: u32, span: u32) -> BigUint {
        self.map.get(&(n, span)).cloned().unwrap_or_default()
    }

    /// Count of polygons of length `n`, all spans.
    pub fn total(&self, n: u32) -> BigUint {
        self.map
            .iter()
            .filter(|(&(m, _), _)| m == n)
            .map(|(_, c)| c)
            .sum()
    }

    /// All `(n, span, count)` rows in increasing `(n, span)` order.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u32, &BigUint)> {
        self.map.iter().map(|(&(n, s), c)| (n, s, c))
    }

    /// All `(n, total)` rows in increasing `n` order.
    pub fn totals(&self) -> Vec<(u32, BigUint)> {
        let mut out: BTreeMap<u32, BigUint> = BTreeMap::new();
        for (&(n, _), c) in &self.map {
            *out.entry(n).or_default() += c;
        }
        out.into_iter().collect()
    }

    pub fn max_n(&self) -> Option<u32> {
        self.map.keys().map(|&(n, _)| n).max()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn merge(&mut self, other: &CountTable) {
        for (&(n, s), c) in &other.map {
            self.add(n, s, c.clone());
        }
    }
}

impl fmt::Display for CountTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, span, count) in self.entries() {
            writeln!(f, "{},{},{}", n, span, count)?;
        }
        Ok(())
    }
}

/// Which polygons to enumerate.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Filter {
    /// Every polygon.
    #[default]
    All,
    /// Only polygons whose sections all have size at least 4.
    NoTwoSections,
}

/// Enumeration parameters.
#[derive(Clone, Copy, Debug)]
pub struct EnumerateOptions {
    /// Count polygons with `n <= n_max` (hard cap 40).
    pub n_max: u32,
    pub filter: Filter,
    /// `Some((k, i))`: only chains whose first proper pattern index is
    /// congruent to `i` mod `k`; span-0/1 polygons count towards shard 0.
    pub shard: Option<(u32, u32)>,
    /// Split the chain walk across threads (counting only; ignored when a
    /// sink is attached so that delivery order stays deterministic).
    pub parallel: bool,
}

impl EnumerateOptions {
    pub fn new(n_max: u32) -> Self {
        EnumerateOptions {
            n_max,
            filter: Filter::All,
            shard: None,
            parallel: false,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EnumerateError {
    /// The request exceeds the supported size limits.
    ResourceLimit(String),
}

impl fmt::Display for EnumerateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnumerateError::ResourceLimit(msg) => write!(f, "resource limit: {}", msg),
        }
    }
}

impl std::error::Error for EnumerateError {}

/// State of the chain walk at one hinge: which proper pattern occupies it
/// and the length accumulated so far (that pattern included).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct HingeState {
    pub pattern: usize,
    pub length_so_far: u32,
    pub hinge: u32,
}

/// Largest `n_max` the enumerator accepts.  Keeps per-cell counts within
/// `u64` and reflects that the chain walk is exponential in `n` anyway.
pub const N_MAX_LIMIT: u32 = 40;

/// Enumerate polygons in the standard tube, tabulating counts by
/// `(n, span)`; an optional sink receives every polygon in a fixed
/// deterministic order.
pub fn enumerate_polygons(
    dims: TubeDims,
    opts: &EnumerateOptions,
    mut sink: Option<&mut dyn FnMut(&LatticePolygon)>,
) -> Result<CountTable, EnumerateError> {
    assert!(dims.is_standard(), "enumeration supports the 2x1 tube only");
    if opts.n_max > N_MAX_LIMIT {
        return Err(EnumerateError::ResourceLimit(format!(
            "n_max {} exceeds the supported limit {}",
            opts.n_max, N_MAX_LIMIT
        )));
    }
    if let Some((k, i)) = opts.shard {
        if k == 0 || i >= k {
            return Err(EnumerateError::ResourceLimit(format!(
                "shard index {} out of range for {} shards",
                i, k
            )));
        }
    }
    let sys: &TransferSystem = match opts.filter {
        Filter::All => standard_system(),
        Filter::NoTwoSections => restricted_system(),
    };
    let n_max = opts.n_max;
    let min_finish = min_finish_costs(sys);
    let mut table = CountTable::new();

    let in_shard = |p: usize| match opts.shard {
        None => true,
        Some((k, i)) => (p as u32) % k == i,
    };
    let base_shard = opts.shard.map_or(true, |(_, i)| i == 0);

    if base_shard {
        for poly in &sys.span0 {
            if poly.len() as u32 <= n_max {
                table.add_u64(poly.len() as u32, 0, 1);
                if let Some(s) = sink.as_mut() {
                    s(poly);
                }
            }
        }
        for (i, ends) in sys.start_to_end.iter().enumerate() {
            for &j in ends {
                let n = sys.starting[i].n() + sys.ending[j].n();
                if n <= n_max {
                    table.add_u64(n, 1, 1);
                    if let Some(s) = sink.as_mut() {
                        s(&materialize(sys, i, &[], j));
                    }
                }
            }
        }
    }

    // Chain walks grouped by the first proper pattern.
    let mut tasks: Vec<(usize, usize, u32)> = Vec::new(); // (first proper, start, cost)
    for (i, props) in sys.start_to_prop.iter().enumerate() {
        for &p in props {
            if !in_shard(p) {
                continue;
            }
            let cost = sys.starting[i].n() + sys.proper[p].n();
            if cost + min_finish[p] <= n_max {
                tasks.push((p, i, cost));
            }
        }
    }

    if let Some(s) = sink.as_mut() {
        let mut grid = Grid::new(n_max);
        for &(p, start, cost) in &tasks {
            let mut chain = vec![p];
            walk_with_sink(sys, &min_finish, n_max, start, cost, &mut chain, &mut grid, s);
        }
        grid.drain_into(&mut table);
    } else if opts.parallel {
        let grid = tasks
            .par_iter()
            .map(|&(p, _start, cost)| {
                let mut g = Grid::new(n_max);
                walk_count(sys, &min_finish, n_max, HingeState {
                    pattern: p,
                    length_so_far: cost,
                    hinge: 1,
                }, &mut g);
                g
            })
            .reduce(|| Grid::new(n_max), Grid::add);
        let mut g = grid;
        g.drain_into(&mut table);
    } else {
        let mut g = Grid::new(n_max);
        for &(p, _start, cost) in &tasks {
            walk_count(sys, &min_finish, n_max, HingeState {
                pattern: p,
                length_so_far: cost,
                hinge: 1,
            }, &mut g);
        }
        g.drain_into(&mut table);
    }
    Ok(table)
}

/// Total and filtered counts with all sections of size at least 4.
pub fn count_no_2section(
    dims: TubeDims,
    n_max: u32,
) -> Result<CountTable, EnumerateError> {
    let mut opts = EnumerateOptions::new(n_max);
    opts.filter = Filter::NoTwoSections;
    enumerate_polygons(dims, &opts, None)
}

/// Dense `u64` accumulator, `(n, span)`-indexed, merged into a
/// [`CountTable`] at the end of a walk.
struct Grid {
    n_max: u32,
    spans: u32,
    cells: Vec<u64>,
}

impl Grid {
    fn new(n_max: u32) -> Grid {
        let spans = n_max / 2 + 2;
        Grid {
            n_max,
            spans,
            cells: vec![0; ((n_max + 1) * spans) as usize],
        }
    }

    #[inline]
    fn bump(&mut self, n: u32, span: u32) {
        let idx = (n * self.spans + span) as usize;
        self.cells[idx] = self.cells[idx].checked_add(1).expect("count overflow");
    }

    fn add(mut self, other: Grid) -> Grid {
        for (a, b) in self.cells.iter_mut().zip(other.cells) {
            *a = a.checked_add(b).expect("count overflow");
        }
        self
    }

    fn drain_into(&mut self, table: &mut CountTable) {
        for n in 0..=self.n_max {
            for s in 0..self.spans {
                let c = self.cells[(n * self.spans + s) as usize];
                if c > 0 {
                    table.add_u64(n, s, c);
                }
            }
        }
    }
}

/// Cheapest completion cost from each proper pattern: the minimum over all
/// follow chains of (sum of later proper lengths) + (ending length).
/// Dijkstra over the reversed follow digraph, all weights positive.
fn min_finish_costs(sys: &TransferSystem) -> Vec<u32> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let np = sys.proper.len();
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); np]; // q -> list of p with p->q
    for (p, qs) in sys.prop_to_prop.iter().enumerate() {
        for &q in qs {
            rev[q].push(p);
        }
    }
    let mut dist = vec![u32::MAX; np];
    let mut heap: BinaryHeap<Reverse<(u32, usize)>> = BinaryHeap::new();
    for (p, ends) in sys.prop_to_end.iter().enumerate() {
        for &j in ends {
            let d = sys.ending[j].n();
            if d < dist[p] {
                dist[p] = d;
                heap.push(Reverse((d, p)));
            }
        }
    }
    while let Some(Reverse((d, q))) = heap.pop() {
        if d > dist[q] {
            continue;
        }
        // Stepping back from q to p costs q's own length.
        let step = sys.proper[q].n();
        for &p in &rev[q] {
            let nd = d + step;
            if nd < dist[p] {
                dist[p] = nd;
                heap.push(Reverse((nd, p)));
            }
        }
    }
    debug_assert!(
        dist.iter().all(|&d| d != u32::MAX),
        "every realizable proper pattern reaches an ending pattern"
    );
    dist
}

fn walk_count(
    sys: &TransferSystem,
    min_finish: &[u32],
    n_max: u32,
    state: HingeState,
    grid: &mut Grid,
) {
    let HingeState {
        pattern: p,
        length_so_far: cost,
        hinge,
    } = state;
    for &j in &sys.prop_to_end[p] {
        let n = cost + sys.ending[j].n();
        if n <= n_max {
            grid.bump(n, hinge + 1);
        }
    }
    for &q in &sys.prop_to_prop[p] {
        let c2 = cost + sys.proper[q].n();
        if c2 + min_finish[q] <= n_max {
            walk_count(
                sys,
                min_finish,
                n_max,
                HingeState {
                    pattern: q,
                    length_so_far: c2,
                    hinge: hinge + 1,
                },
                grid,
            );
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn walk_with_sink(
    sys: &TransferSystem,
    min_finish: &[u32],
    n_max: u32,
    start: usize,
    cost: u32,
    chain: &mut Vec<usize>,
    grid: &mut Grid,
    sink: &mut dyn FnMut(&LatticePolygon),
) {
    let p = *chain.last().unwrap();
    for &j in &sys.prop_to_end[p] {
        let n = cost + sys.ending[j].n();
        if n <= n_max {
            grid.bump(n, chain.len() as u32 + 1);
            sink(&materialize(sys, start, chain, j));
        }
    }
    for &q in &sys.prop_to_prop[p] {
        let c2 = cost + sys.proper[q].n();
        if c2 + min_finish[q] <= n_max {
            chain.push(q);
            walk_with_sink(sys, min_finish, n_max, start, c2, chain, grid, sink);
            chain.pop();
        }
    }
}

/// Realise a pattern chain as a lattice polygon: hinge `k` carries the
/// grid edges of its pattern at `x = k`, and the pattern's right half-edge
/// lanes become the `x`-edges to hinge `k + 1`.
fn materialize(sys: &TransferSystem, start: usize, chain: &[usize], end: usize) -> LatticePolygon {
    let mut edges: Vec<Edge> = Vec::new();
    let mut put_pattern = |pat: &OnePattern, x: i32| {
        for (a, b) in pat.block.hinge.edges() {
            let (ya, za) = lane_yz(a);
            let (yb, zb) = lane_yz(b);
            edges.push(Edge::new(Vertex::new(x, ya, za), Vertex::new(x, yb, zb)));
        }
        for l in pat.block.right.lanes() {
            let (y, z) = lane_yz(l);
            edges.push(Edge::new(Vertex::new(x, y, z), Vertex::new(x + 1, y, z)));
        }
    };
    put_pattern(&sys.starting[start], 0);
    for (k, &p) in chain.iter().enumerate() {
        put_pattern(&sys.proper[p], k as i32 + 1);
    }
    put_pattern(&sys.ending[end], chain.len() as i32 + 1);
    LatticePolygon::from_edges(TubeDims::default(), &edges)
        .expect("pattern chains realise valid polygons")
}
