//! Geometry of lattice polygons in the tube.
//!
//! The tube is the cubic sublattice `x >= 0`, `0 <= y <= m1`, `0 <= z <= m2`,
//! with the production cross-section fixed at `m1 = 2, m2 = 1`.  A polygon is
//! a self-avoiding closed walk of unit steps; polygons are identified up to
//! translation in `x`, so every stored polygon is normalised to touch the
//! plane `x = 0`.
//!
//! The six vertices of the 2x1 cross-section are the *lanes*, labelled
//!
//! ```text
//!   label  (y, z)   index 2y+z
//!     a    (0, 0)       0
//!     b    (0, 1)       1
//!     c    (1, 0)       2
//!     d    (1, 1)       3
//!     e    (2, 0)       4
//!     f    (2, 1)       5
//! ```
//!
//! Lane indices are ordered by the projection height `y + z/2`, which is the
//! order in which strands stack when the tube is flattened into a diagram.
//!
//! For a polygon of span `s` (maximal `x`-extent), the *section* `S_k`
//! (`k = 1..=s`) is the set of lanes whose `x`-edges cross the plane
//! `x = k - 1/2`, and *hinge* `k` (`k = 0..=s`) is the set of cross-section
//! grid edges lying in the plane `x = k`.  Every polygon edge is either an
//! `x`-edge of exactly one section or a grid edge of exactly one hinge, so
//! the length satisfies `n = sum |S_k| + sum |hinge_k|`.  Section sizes are
//! even and at most 6, i.e. in `{2, 4, 6}`.
//!
//! BFACF moves deform a polygon in place: a `+2` move pushes an edge one
//! step sideways (adding two edges), a `-2` move is its inverse (removing a
//! three-edge U and closing it with the base edge), and a type-0 move flips
//! a corner across its face.  Moves that would leave the tube in `y` or `z`
//! are illegal; motion past `x = 0` is absorbed by the translation
//! normalisation.

use std::collections::{HashMap, HashSet};
use std::fmt;

/// Cross-section of the tube: vertices satisfy `0 <= y <= m1`, `0 <= z <= m2`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TubeDims {
    pub m1: i32, // extent in y
    pub m2: i32, // extent in z
}

impl Default for TubeDims {
    /// The standard 2x1 tube.
    fn default() -> Self {
        TubeDims { m1: 2, m2: 1 }
    }
}

impl TubeDims {
    pub fn new(m1: i32, m2: i32) -> Self {
        assert!(m1 >= 0 && m2 >= 0, "tube dimensions must be non-negative");
        TubeDims { m1, m2 }
    }

    /// Is the vertex inside the tube cross-section?  (`x` is unconstrained
    /// because polygons are identified up to `x`-translation.)
    pub fn contains(&self, v: Vertex) -> bool {
        0 <= v.y && v.y <= self.m1 && 0 <= v.z && v.z <= self.m2
    }

    /// The 2x1 cross-section all lane-indexed operations require.
    pub fn is_standard(&self) -> bool {
        self.m1 == 2 && self.m2 == 1
    }
}

/// A lattice point.  The derived order is lexicographic in `(x, y, z)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Vertex {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Vertex {
    pub fn new(x: i32, y: i32, z: i32) -> Self {
        Vertex { x, y, z }
    }

    /// Lane index `2y + z` of this vertex's cross-section position
    /// (standard tube only).
    pub fn lane(&self) -> usize {
        debug_assert!((0..=2).contains(&self.y) && (0..=1).contains(&self.z));
        (2 * self.y + self.z) as usize
    }

    pub fn offset(self, d: Dir) -> Vertex {
        let (dx, dy, dz) = d.vector();
        Vertex::new(self.x + dx, self.y + dy, self.z + dz)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.x, self.y, self.z)
    }
}

/// One of the six axis directions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Dir {
    XPlus,
    XMinus,
    YPlus,
    YMinus,
    ZPlus,
    ZMinus,
}

impl Dir {
    pub const ALL: [Dir; 6] = [
        Dir::XPlus,
        Dir::XMinus,
        Dir::YPlus,
        Dir::YMinus,
        Dir::ZPlus,
        Dir::ZMinus,
    ];

    pub fn vector(self) -> (i32, i32, i32) {
        match self {
            Dir::XPlus => (1, 0, 0),
            Dir::XMinus => (-1, 0, 0),
            Dir::YPlus => (0, 1, 0),
            Dir::YMinus => (0, -1, 0),
            Dir::ZPlus => (0, 0, 1),
            Dir::ZMinus => (0, 0, -1),
        }
    }

    pub fn flip(self) -> Dir {
        match self {
            Dir::XPlus => Dir::XMinus,
            Dir::XMinus => Dir::XPlus,
            Dir::YPlus => Dir::YMinus,
            Dir::YMinus => Dir::YPlus,
            Dir::ZPlus => Dir::ZMinus,
            Dir::ZMinus => Dir::ZPlus,
        }
    }

    /// Is `d` perpendicular to the segment `u -> v`?
    fn perp_to(self, u: Vertex, v: Vertex) -> bool {
        let (dx, dy, dz) = self.vector();
        dx * (v.x - u.x) + dy * (v.y - u.y) + dz * (v.z - u.z) == 0
    }
}

/// An undirected lattice edge, stored with `a < b`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Edge {
    pub a: Vertex,
    pub b: Vertex,
}

impl Edge {
    pub fn new(u: Vertex, v: Vertex) -> Self {
        assert!(u != v, "degenerate edge");
        if u < v {
            Edge { a: u, b: v }
        } else {
            Edge { a: v, b: u }
        }
    }

    /// Unit length in the l1 metric (true for every polygon edge).
    pub fn is_unit(&self) -> bool {
        (self.a.x - self.b.x).abs() + (self.a.y - self.b.y).abs() + (self.a.z - self.b.z).abs() == 1
    }

    /// Does the edge point along the tube axis?
    pub fn is_x_edge(&self) -> bool {
        self.a.x != self.b.x
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}--{}", self.a, self.b)
    }
}

/// Number of lanes of the standard cross-section.
pub const LANE_COUNT: usize = 6;

/// Lane label for an index in `0..6` (see the module header).
pub fn lane_label(lane: usize) -> char {
    assert!(lane < LANE_COUNT);
    (b'a' + lane as u8) as char
}

/// `(y, z)` coordinates of a lane index.
pub fn lane_yz(lane: usize) -> (i32, i32) {
    assert!(lane < LANE_COUNT);
    ((lane / 2) as i32, (lane % 2) as i32)
}

/// The seven unit edges of the 2x1 cross-section grid, as lane-index pairs:
/// the three `z`-edges ab, cd, ef followed by the four `y`-edges ac, ce, bd, df.
pub const CROSS_SECTION_EDGES: [(usize, usize); 7] =
    [(0, 1), (2, 3), (4, 5), (0, 2), (2, 4), (1, 3), (3, 5)];

/// Index into [`CROSS_SECTION_EDGES`] of the grid edge joining two lanes, if
/// they are adjacent in the cross-section.
pub fn grid_edge_index(l1: usize, l2: usize) -> Option<usize> {
    let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
    CROSS_SECTION_EDGES.iter().position(|&(a, b)| (a, b) == (lo, hi))
}

/// A subset of the six lanes, as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct LaneSet(pub u8);

impl LaneSet {
    pub const EMPTY: LaneSet = LaneSet(0);

    pub fn from_lanes(lanes: &[usize]) -> Self {
        let mut s = LaneSet::EMPTY;
        for &l in lanes {
            s.insert(l);
        }
        s
    }

    pub fn insert(&mut self, lane: usize) {
        assert!(lane < LANE_COUNT);
        self.0 |= 1 << lane;
    }

    pub fn contains(&self, lane: usize) -> bool {
        lane < LANE_COUNT && self.0 & (1 << lane) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// Lanes in increasing index (= increasing projection height) order.
    pub fn lanes(&self) -> Vec<usize> {
        (0..LANE_COUNT).filter(|&l| self.contains(l)).collect()
    }
}

impl fmt::Display for LaneSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.lanes().into_iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", lane_label(l))?;
        }
        write!(f, "}}")
    }
}

/// A subset of the seven cross-section grid edges, as a bitmask over
/// [`CROSS_SECTION_EDGES`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct GridEdgeSet(pub u8);

impl GridEdgeSet {
    pub const EMPTY: GridEdgeSet = GridEdgeSet(0);
    pub const ALL: GridEdgeSet = GridEdgeSet(0x7f);

    pub fn insert(&mut self, idx: usize) {
        assert!(idx < 7);
        self.0 |= 1 << idx;
    }

    pub fn contains(&self, idx: usize) -> bool {
        idx < 7 && self.0 & (1 << idx) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// The grid edges present, as lane pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..7)
            .filter(|&i| self.contains(i))
            .map(|i| CROSS_SECTION_EDGES[i])
            .collect()
    }
}

impl fmt::Display for GridEdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (l1, l2)) in self.edges().into_iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}{}", lane_label(l1), lane_label(l2))?;
        }
        write!(f, "}}")
    }
}

/// Why a vertex list fails to be a tube polygon, or why an operation on a
/// polygon is rejected.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PolygonError {
    /// Consecutive vertices (cyclically) are not at unit distance.
    NotClosed,
    /// A vertex (or an edge) is visited more than once.
    SelfIntersecting,
    /// A vertex violates the `y`/`z` bounds of the tube.
    OutOfTube,
    /// The vertex count is odd (every closed lattice walk has even length).
    OddLength,
    /// A section operation that requires size exactly 4 saw another size.
    NotFourSection,
    /// A BFACF move whose preconditions fail on this polygon.
    IllegalMove,
    /// Malformed polygon text.
    Parse(String),
}

impl fmt::Display for PolygonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolygonError::NotClosed => write!(f, "vertex list is not a closed unit-step walk"),
            PolygonError::SelfIntersecting => write!(f, "walk visits a vertex or edge twice"),
            PolygonError::OutOfTube => write!(f, "vertex outside the tube cross-section"),
            PolygonError::OddLength => write!(f, "closed lattice walks have even length"),
            PolygonError::NotFourSection => write!(f, "section does not have size 4"),
            PolygonError::IllegalMove => write!(f, "BFACF move preconditions not met"),
            PolygonError::Parse(msg) => write!(f, "bad polygon text: {}", msg),
        }
    }
}

impl std::error::Error for PolygonError {}

/// A BFACF deformation, with coordinates in the canonical frame of the
/// polygon it is applied to (x-translated so that min x = 0).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BfacfMove {
    /// Flip the corner at `corner` across its face: if the neighbours of the
    /// corner are `p` and `q`, the corner moves to `p + q - corner`.
    /// Length unchanged.
    Type0 { corner: Vertex },
    /// Push `edge` one step in the perpendicular direction `dir`, replacing
    /// it by the three other sides of the swept face.  Length +2.
    Plus2 { edge: Edge, dir: Dir },
    /// Inverse of `Plus2`: `edge` and its two legs `endpoint -> endpoint+dir`
    /// are replaced by the opposite edge.  Length -2.
    Minus2 { edge: Edge, dir: Dir },
}

/// A self-avoiding polygon in the tube, stored in canonical form:
/// `x`-translated so min `x` is 0, the vertex list starting at the
/// lexicographically smallest vertex and proceeding towards its smaller
/// neighbour.  Equality of canonical forms is equality of translation
/// classes.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LatticePolygon {
    dims: TubeDims,
    verts: Vec<Vertex>,
}

impl LatticePolygon {
    /// Validate and canonicalise a vertex list in the standard 2x1 tube.
    pub fn new(verts: Vec<Vertex>) -> Result<Self, PolygonError> {
        Self::new_in(TubeDims::default(), verts)
    }

    /// Validate and canonicalise a vertex list in the given tube.
    pub fn new_in(dims: TubeDims, verts: Vec<Vertex>) -> Result<Self, PolygonError> {
        Self::validate_in(dims, &verts)?;
        Ok(Self::canonicalize(dims, verts))
    }

    /// Check the polygon axioms: even length >= 4, cyclically consecutive
    /// vertices at unit distance, all vertices distinct, all within the tube
    /// cross-section.  Checked in the order NotClosed (n = 0),
    /// SelfIntersecting (n = 2), OddLength, NotClosed, SelfIntersecting,
    /// OutOfTube.
    pub fn validate_in(dims: TubeDims, verts: &[Vertex]) -> Result<(), PolygonError> {
        let n = verts.len();
        if n == 0 {
            return Err(PolygonError::NotClosed);
        }
        if n == 2 {
            // Two vertices joined back and forth traverse one edge twice.
            return Err(PolygonError::SelfIntersecting);
        }
        if n % 2 != 0 {
            return Err(PolygonError::OddLength);
        }
        for i in 0..n {
            let u = verts[i];
            let v = verts[(i + 1) % n];
            if (u.x - v.x).abs() + (u.y - v.y).abs() + (u.z - v.z).abs() != 1 {
                return Err(PolygonError::NotClosed);
            }
        }
        let mut seen = HashSet::with_capacity(n);
        for &v in verts {
            if !seen.insert(v) {
                return Err(PolygonError::SelfIntersecting);
            }
        }
        for &v in verts {
            if !dims.contains(v) {
                return Err(PolygonError::OutOfTube);
            }
        }
        Ok(())
    }

    fn canonicalize(dims: TubeDims, mut verts: Vec<Vertex>) -> Self {
        let min_x = verts.iter().map(|v| v.x).min().unwrap();
        if min_x != 0 {
            for v in &mut verts {
                v.x -= min_x;
            }
        }
        let n = verts.len();
        let i0 = (0..n).min_by_key(|&i| verts[i]).unwrap();
        let next = verts[(i0 + 1) % n];
        let prev = verts[(i0 + n - 1) % n];
        let mut out = Vec::with_capacity(n);
        if next <= prev {
            for k in 0..n {
                out.push(verts[(i0 + k) % n]);
            }
        } else {
            for k in 0..n {
                out.push(verts[(i0 + n - k) % n]);
            }
        }
        LatticePolygon { dims, verts: out }
    }

    /// Rebuild a polygon from an unordered edge set.  Fails with `NotClosed`
    /// unless the edges form exactly one cycle in which every vertex has
    /// degree 2.
    pub fn from_edges(dims: TubeDims, edges: &[Edge]) -> Result<Self, PolygonError> {
        if edges.is_empty() {
            return Err(PolygonError::NotClosed);
        }
        let mut adj: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
        for e in edges {
            adj.entry(e.a).or_default().push(e.b);
            adj.entry(e.b).or_default().push(e.a);
        }
        if adj.values().any(|nb| nb.len() != 2) {
            return Err(PolygonError::NotClosed);
        }
        let start = *adj.keys().min().unwrap();
        let mut verts = vec![start];
        let mut prev = start;
        let mut cur = adj[&start][0];
        while cur != start {
            verts.push(cur);
            let nb = &adj[&cur];
            let next = if nb[0] == prev { nb[1] } else { nb[0] };
            prev = cur;
            cur = next;
        }
        if verts.len() != adj.len() {
            // More than one cycle.
            return Err(PolygonError::NotClosed);
        }
        Self::new_in(dims, verts)
    }

    pub fn dims(&self) -> TubeDims {
        self.dims
    }

    /// Vertices in canonical cyclic order.
    pub fn vertices(&self) -> &[Vertex] {
        &self.verts
    }

    /// Number of edges (equal to the number of vertices).
    pub fn len(&self) -> usize {
        self.verts.len()
    }

    /// Maximal `x` coordinate (the minimum is 0 by canonicalisation).
    pub fn span(&self) -> i32 {
        self.verts.iter().map(|v| v.x).max().unwrap()
    }

    /// The edges, one per consecutive vertex pair.
    pub fn edges(&self) -> Vec<Edge> {
        let n = self.verts.len();
        (0..n)
            .map(|i| Edge::new(self.verts[i], self.verts[(i + 1) % n]))
            .collect()
    }

    pub fn edge_set(&self) -> HashSet<Edge> {
        self.edges().into_iter().collect()
    }

    pub fn vertex_set(&self) -> HashSet<Vertex> {
        self.verts.iter().copied().collect()
    }

    /// Lane sets of the sections `S_1 ..= S_span` (standard tube only).
    /// Index `k - 1` of the result is `S_k`, the `x`-edges crossing the
    /// plane `x = k - 1/2`.
    pub fn sections(&self) -> Vec<LaneSet> {
        assert!(
            self.dims.is_standard(),
            "lane-indexed operations support the 2x1 tube only"
        );
        let s = self.span() as usize;
        let mut secs = vec![LaneSet::EMPTY; s];
        for e in self.edges() {
            if e.is_x_edge() {
                let k = e.a.x.max(e.b.x) as usize;
                secs[k - 1].insert(e.a.lane());
            }
        }
        secs
    }

    /// Section `S_k` for `k` in `1..=span`.
    pub fn section(&self, k: usize) -> LaneSet {
        let secs = self.sections();
        assert!(k >= 1 && k <= secs.len(), "section index out of range");
        secs[k - 1]
    }

    /// Grid edges of hinge `k` (the plane `x = k`) for `k` in `0..=span`.
    pub fn hinge_edges(&self, k: usize) -> GridEdgeSet {
        assert!(
            self.dims.is_standard(),
            "lane-indexed operations support the 2x1 tube only"
        );
        assert!(k <= self.span() as usize, "hinge index out of range");
        let mut set = GridEdgeSet::EMPTY;
        for e in self.edges() {
            if !e.is_x_edge() && e.a.x == k as i32 {
                let idx = grid_edge_index(e.a.lane(), e.b.lane())
                    .expect("unit grid edge joins adjacent lanes");
                set.insert(idx);
            }
        }
        set
    }

    /// Number of sections of size exactly 2.
    pub fn count_2sections(&self) -> usize {
        self.sections().iter().filter(|s| s.len() == 2).count()
    }

    /// 1-based indices of the sections of size exactly 2.
    pub fn two_sections(&self) -> Vec<usize> {
        self.sections()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.len() == 2)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// If section `k` is a 4-section that one legal `-2` move (with `x`-edge
    /// legs inside the section) turns into a 2-section, return that move.
    ///
    /// The legs of such a move are two section `x`-edges in grid-adjacent
    /// lanes and its pushed edge is the grid edge joining them on one of the
    /// two bounding hinges; the check below simply looks for a pushed edge
    /// with both legs present and verifies the full move legality.
    pub fn hidden_2section_move(&self, k: usize) -> Result<Option<BfacfMove>, PolygonError> {
        let lanes = self.section(k);
        if lanes.len() != 4 {
            return Err(PolygonError::NotFourSection);
        }
        let edge_set = self.edge_set();
        let ll = lanes.lanes();
        for i in 0..ll.len() {
            for j in (i + 1)..ll.len() {
                let (l1, l2) = (ll[i], ll[j]);
                if grid_edge_index(l1, l2).is_none() {
                    continue;
                }
                let (y1, z1) = lane_yz(l1);
                let (y2, z2) = lane_yz(l2);
                // Base on hinge k (legs point -x) or hinge k-1 (legs point +x).
                for (x, dir) in [(k as i32, Dir::XMinus), (k as i32 - 1, Dir::XPlus)] {
                    let u = Vertex::new(x, y1, z1);
                    let v = Vertex::new(x, y2, z2);
                    if edge_set.contains(&Edge::new(u, v)) {
                        let mv = BfacfMove::Minus2 {
                            edge: Edge::new(u, v),
                            dir,
                        };
                        if self.apply_bfacf(&mv).is_ok() {
                            return Ok(Some(mv));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    /// Is section `k` a *hidden 2-section*: a 4-section reducible to a
    /// 2-section by a single legal `-2` move?
    pub fn is_hidden_2section(&self, k: usize) -> Result<bool, PolygonError> {
        Ok(self.hidden_2section_move(k)?.is_some())
    }

    /// Is section `k` of size 2, or a hidden 2-section?
    pub fn is_two_or_hidden_2section(&self, k: usize) -> bool {
        let sz = self.section(k).len();
        sz == 2 || (sz == 4 && self.is_hidden_2section(k).unwrap_or(false))
    }

    /// Apply a BFACF move, returning the deformed polygon in canonical form.
    pub fn apply_bfacf(&self, mv: &BfacfMove) -> Result<LatticePolygon, PolygonError> {
        let n = self.verts.len();
        match *mv {
            BfacfMove::Type0 { corner } => {
                let i = self
                    .verts
                    .iter()
                    .position(|&v| v == corner)
                    .ok_or(PolygonError::IllegalMove)?;
                let p = self.verts[(i + n - 1) % n];
                let q = self.verts[(i + 1) % n];
                let flipped = Vertex::new(p.x + q.x - corner.x, p.y + q.y - corner.y, p.z + q.z - corner.z);
                if flipped == corner {
                    // p and q collinear with the corner: not a corner.
                    return Err(PolygonError::IllegalMove);
                }
                if !self.dims.contains(flipped) || self.verts.contains(&flipped) {
                    return Err(PolygonError::IllegalMove);
                }
                let mut verts = self.verts.clone();
                verts[i] = flipped;
                Ok(Self::canonicalize(self.dims, verts))
            }
            BfacfMove::Plus2 { edge, dir } => {
                let i = self
                    .edge_position(edge)
                    .ok_or(PolygonError::IllegalMove)?;
                if !dir.perp_to(edge.a, edge.b) {
                    return Err(PolygonError::IllegalMove);
                }
                let u = self.verts[i];
                let v = self.verts[(i + 1) % n];
                let u2 = u.offset(dir);
                let v2 = v.offset(dir);
                if !self.dims.contains(u2) || !self.dims.contains(v2) {
                    return Err(PolygonError::IllegalMove);
                }
                if self.verts.contains(&u2) || self.verts.contains(&v2) {
                    return Err(PolygonError::IllegalMove);
                }
                let mut verts = Vec::with_capacity(n + 2);
                verts.extend_from_slice(&self.verts[..=i]);
                verts.push(u2);
                verts.push(v2);
                verts.extend_from_slice(&self.verts[i + 1..]);
                Ok(Self::canonicalize(self.dims, verts))
            }
            BfacfMove::Minus2 { edge, dir } => {
                if n < 6 {
                    return Err(PolygonError::IllegalMove);
                }
                let i = self
                    .edge_position(edge)
                    .ok_or(PolygonError::IllegalMove)?;
                if !dir.perp_to(edge.a, edge.b) {
                    return Err(PolygonError::IllegalMove);
                }
                let u = self.verts[i];
                let v = self.verts[(i + 1) % n];
                let u2 = u.offset(dir);
                let v2 = v.offset(dir);
                let edge_set = self.edge_set();
                if !edge_set.contains(&Edge::new(u, u2)) || !edge_set.contains(&Edge::new(v, v2)) {
                    return Err(PolygonError::IllegalMove);
                }
                if edge_set.contains(&Edge::new(u2, v2)) {
                    return Err(PolygonError::IllegalMove);
                }
                let verts = self
                    .verts
                    .iter()
                    .copied()
                    .filter(|&w| w != u && w != v)
                    .collect::<Vec<_>>();
                // Removing the two U vertices leaves u2 and v2 cyclically
                // adjacent, so the filtered list is already the new cycle.
                Self::new_in(self.dims, verts)
            }
        }
    }

    /// Position `i` such that the polygon edge `verts[i] -- verts[i+1]`
    /// equals `edge`.
    fn edge_position(&self, edge: Edge) -> Option<usize> {
        let n = self.verts.len();
        (0..n).find(|&i| Edge::new(self.verts[i], self.verts[(i + 1) % n]) == edge)
    }

    /// Every legal BFACF move on this polygon (coordinates in its canonical
    /// frame).  Listed deterministically: type-0 flips by corner position,
    /// then +-2 moves by edge position and direction order of [`Dir::ALL`].
    pub fn legal_moves(&self) -> Vec<BfacfMove> {
        let mut moves = Vec::new();
        for &v in &self.verts {
            let mv = BfacfMove::Type0 { corner: v };
            if self.apply_bfacf(&mv).is_ok() {
                moves.push(mv);
            }
        }
        for e in self.edges() {
            for d in Dir::ALL {
                if !d.perp_to(e.a, e.b) {
                    continue;
                }
                for mv in [BfacfMove::Plus2 { edge: e, dir: d }, BfacfMove::Minus2 { edge: e, dir: d }] {
                    if self.apply_bfacf(&mv).is_ok() {
                        moves.push(mv);
                    }
                }
            }
        }
        moves
    }

    /// Serialise as `x,y,z;x,y,z;...` (closure back to the first vertex is
    /// implicit).  Canonical polygons round-trip bit-exactly.
    pub fn to_text(&self) -> String {
        self.verts
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Parse the `to_text` format in the standard tube.
    pub fn from_text(s: &str) -> Result<Self, PolygonError> {
        Self::from_text_in(TubeDims::default(), s)
    }

    /// Parse the `to_text` format in the given tube.
    pub fn from_text_in(dims: TubeDims, s: &str) -> Result<Self, PolygonError> {
        let mut verts = Vec::new();
        for part in s.trim().split(';') {
            let fields: Vec<&str> = part.split(',').collect();
            if fields.len() != 3 {
                return Err(PolygonError::Parse(format!(
                    "vertex `{}` is not of the form x,y,z",
                    part
                )));
            }
            let mut coords = [0i32; 3];
            for (slot, f) in coords.iter_mut().zip(&fields) {
                *slot = f
                    .trim()
                    .parse::<i32>()
                    .map_err(|e| PolygonError::Parse(format!("bad coordinate `{}`: {}", f, e)))?;
            }
            verts.push(Vertex::new(coords[0], coords[1], coords[2]));
        }
        Self::new_in(dims, verts)
    }
}

impl fmt::Display for LatticePolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: i32, y: i32, z: i32) -> Vertex {
        Vertex::new(x, y, z)
    }

    /// The span-0 square through lanes a, b, d, c.
    fn square_abdc() -> LatticePolygon {
        LatticePolygon::new(vec![v(0, 0, 0), v(0, 0, 1), v(0, 1, 1), v(0, 1, 0)]).unwrap()
    }

    /// The span-0 hexagon through all six lanes.
    fn hexagon() -> LatticePolygon {
        LatticePolygon::new(vec![
            v(0, 0, 0),
            v(0, 0, 1),
            v(0, 1, 1),
            v(0, 2, 1),
            v(0, 2, 0),
            v(0, 1, 0),
        ])
        .unwrap()
    }

    /// Span-2 12-gon whose two 4-sections are both hidden 2-sections.
    fn hidden_12gon() -> LatticePolygon {
        LatticePolygon::new(vec![
            v(0, 0, 0),
            v(1, 0, 0),
            v(2, 0, 0),
            v(2, 0, 1),
            v(1, 0, 1),
            v(0, 0, 1),
            v(0, 1, 1),
            v(1, 1, 1),
            v(2, 1, 1),
            v(2, 1, 0),
            v(1, 1, 0),
            v(0, 1, 0),
        ])
        .unwrap()
    }

    /// Span-3 24-gon with sections {a,b}, {a,b,c,d}, {a,b,e,f}; neither
    /// 4-section is hidden because no hinge edge joins two of its lanes.
    fn non_hidden_24gon() -> LatticePolygon {
        LatticePolygon::new(vec![
            v(0, 0, 0),
            v(1, 0, 0),
            v(2, 0, 0),
            v(3, 0, 0),
            v(3, 1, 0),
            v(3, 2, 0),
            v(2, 2, 0),
            v(2, 1, 0),
            v(1, 1, 0),
            v(1, 2, 0),
            v(1, 2, 1),
            v(1, 1, 1),
            v(2, 1, 1),
            v(2, 2, 1),
            v(3, 2, 1),
            v(3, 1, 1),
            v(3, 0, 1),
            v(2, 0, 1),
            v(1, 0, 1),
            v(0, 0, 1),
            v(0, 1, 1),
            v(0, 2, 1),
            v(0, 2, 0),
            v(0, 1, 0),
        ])
        .unwrap()
    }

    #[test]
    fn squares_and_hexagon_validate() {
        assert_eq!(square_abdc().len(), 4);
        assert_eq!(square_abdc().span(), 0);
        assert_eq!(hexagon().len(), 6);
        assert_eq!(hexagon().span(), 0);
    }

    #[test]
    fn canonical_form_is_rotation_and_reflection_invariant() {
        let p1 = LatticePolygon::new(vec![v(0, 1, 1), v(0, 1, 0), v(0, 0, 0), v(0, 0, 1)]).unwrap();
        let p2 = LatticePolygon::new(vec![v(0, 0, 1), v(0, 0, 0), v(0, 1, 0), v(0, 1, 1)]).unwrap();
        assert_eq!(p1, square_abdc(), "rotated input must canonicalise equal");
        assert_eq!(p2, square_abdc(), "reflected input must canonicalise equal");
        let shifted = LatticePolygon::new(vec![v(5, 0, 0), v(5, 0, 1), v(5, 1, 1), v(5, 1, 0)]).unwrap();
        assert_eq!(shifted, square_abdc(), "x-translates are identified");
    }

    #[test]
    fn validation_errors() {
        assert_eq!(
            LatticePolygon::new(vec![v(0, 0, 0), v(0, 0, 1), v(0, 1, 1)]).unwrap_err(),
            PolygonError::OddLength
        );
        assert_eq!(
            LatticePolygon::new(vec![v(0, 0, 0), v(0, 0, 1), v(0, 2, 1), v(0, 2, 0)]).unwrap_err(),
            PolygonError::NotClosed
        );
        assert_eq!(
            LatticePolygon::new(vec![
                v(0, 0, 0),
                v(0, 0, 1),
                v(0, 0, 0),
                v(0, 1, 0),
                v(0, 1, 1),
                v(0, 0, 1)
            ])
            .unwrap_err(),
            PolygonError::SelfIntersecting
        );
        assert_eq!(
            LatticePolygon::new(vec![v(0, 2, 0), v(0, 3, 0), v(1, 3, 0), v(1, 2, 0)]).unwrap_err(),
            PolygonError::OutOfTube
        );
        assert_eq!(
            LatticePolygon::new(vec![v(0, 0, 0), v(0, 0, 1)]).unwrap_err(),
            PolygonError::SelfIntersecting
        );
        assert_eq!(LatticePolygon::new(vec![]).unwrap_err(), PolygonError::NotClosed);
    }

    #[test]
    fn length_equals_sections_plus_hinges() {
        for p in [square_abdc(), hexagon(), hidden_12gon(), non_hidden_24gon()] {
            let sections: usize = p.sections().iter().map(|s| s.len()).sum();
            let hinges: usize = (0..=p.span() as usize)
                .map(|k| p.hinge_edges(k).len())
                .sum();
            assert_eq!(p.len(), sections + hinges, "edge partition for {}", p);
        }
    }

    #[test]
    fn sections_of_the_24gon() {
        let p = non_hidden_24gon();
        let secs = p.sections();
        assert_eq!(secs.len(), 3);
        assert_eq!(secs[0], LaneSet::from_lanes(&[0, 1]));
        assert_eq!(secs[1], LaneSet::from_lanes(&[0, 1, 2, 3]));
        assert_eq!(secs[2], LaneSet::from_lanes(&[0, 1, 4, 5]));
        assert_eq!(p.count_2sections(), 1);
        assert_eq!(p.two_sections(), vec![1]);
    }

    #[test]
    fn hidden_2section_detection() {
        let p = hidden_12gon();
        assert_eq!(p.count_2sections(), 0);
        assert!(p.is_hidden_2section(1).unwrap(), "left 4-section is hidden");
        assert!(p.is_hidden_2section(2).unwrap(), "right 4-section is hidden");

        let q = non_hidden_24gon();
        assert!(!q.is_hidden_2section(2).unwrap(), "no hinge edge joins two lanes of S_2");
        assert!(!q.is_hidden_2section(3).unwrap(), "no hinge edge joins two lanes of S_3");
        assert_eq!(
            q.is_hidden_2section(1).unwrap_err(),
            PolygonError::NotFourSection,
            "S_1 has size 2"
        );
        assert!(q.is_two_or_hidden_2section(1));
        assert!(!q.is_two_or_hidden_2section(2));
    }

    #[test]
    fn applying_the_hidden_move_reduces_the_section() {
        let p = hidden_12gon();
        let mv = p.hidden_2section_move(2).unwrap().expect("S_2 is hidden");
        let q = p.apply_bfacf(&mv).unwrap();
        assert_eq!(q.len(), p.len() - 2);
        assert_eq!(q.section(2).len(), 2, "the 4-section becomes a 2-section");
    }

    #[test]
    fn plus2_then_minus2_is_identity() {
        let p = hexagon();
        let e = Edge::new(v(0, 0, 0), v(0, 0, 1));
        let up = BfacfMove::Plus2 { edge: e, dir: Dir::XPlus };
        let q = p.apply_bfacf(&up).unwrap();
        assert_eq!(q.len(), 8);
        assert_eq!(q.span(), 1);
        let shifted = Edge::new(v(1, 0, 0), v(1, 0, 1));
        let down = BfacfMove::Minus2 { edge: shifted, dir: Dir::XMinus };
        assert_eq!(q.apply_bfacf(&down).unwrap(), p, "+2 then -2 at the image is the identity");
    }

    #[test]
    fn pushing_past_x_zero_translates_back() {
        let p = hexagon();
        let e = Edge::new(v(0, 0, 0), v(0, 0, 1));
        let q = p
            .apply_bfacf(&BfacfMove::Plus2 { edge: e, dir: Dir::XMinus })
            .unwrap();
        assert_eq!(q.span(), 1, "move to x = -1 is re-translated");
        assert_eq!(q.vertices().iter().map(|w| w.x).min().unwrap(), 0);
    }

    #[test]
    fn type0_flip() {
        // Bent hexagon: corner flip moves (1,0,0) to (1,1,1).
        let p = LatticePolygon::new(vec![
            v(0, 0, 0),
            v(0, 1, 0),
            v(1, 1, 0),
            v(1, 0, 0),
            v(1, 0, 1),
            v(0, 0, 1),
        ])
        .unwrap();
        let q = p
            .apply_bfacf(&BfacfMove::Type0 { corner: v(1, 0, 0) })
            .unwrap();
        let expected = LatticePolygon::new(vec![
            v(0, 0, 0),
            v(0, 1, 0),
            v(1, 1, 0),
            v(1, 1, 1),
            v(1, 0, 1),
            v(0, 0, 1),
        ])
        .unwrap();
        assert_eq!(q, expected);
        // Flips whose target is occupied, and straight vertices, are illegal.
        assert_eq!(
            p.apply_bfacf(&BfacfMove::Type0 { corner: v(0, 1, 0) }).unwrap_err(),
            PolygonError::IllegalMove
        );
        let hex = hexagon();
        assert_eq!(
            hex.apply_bfacf(&BfacfMove::Type0 { corner: v(0, 1, 1) }).unwrap_err(),
            PolygonError::IllegalMove,
            "straight (non-corner) vertex"
        );
    }

    #[test]
    fn squares_admit_no_minus2() {
        let p = square_abdc();
        for mv in p.legal_moves() {
            assert!(
                !matches!(mv, BfacfMove::Minus2 { .. }),
                "a square has nothing to shrink"
            );
        }
    }

    #[test]
    fn legal_moves_apply_cleanly() {
        for p in [square_abdc(), hexagon(), hidden_12gon(), non_hidden_24gon()] {
            for mv in p.legal_moves() {
                let q = p.apply_bfacf(&mv).expect("legal move applies");
                let delta = q.len() as i64 - p.len() as i64;
                match mv {
                    BfacfMove::Type0 { .. } => assert_eq!(delta, 0),
                    BfacfMove::Plus2 { .. } => assert_eq!(delta, 2),
                    BfacfMove::Minus2 { .. } => assert_eq!(delta, -2),
                }
            }
        }
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        for p in [square_abdc(), hexagon(), hidden_12gon(), non_hidden_24gon()] {
            let text = p.to_text();
            let back = LatticePolygon::from_text(&text).unwrap();
            assert_eq!(back, p);
            assert_eq!(back.to_text(), text, "round-trip must be bit-exact");
        }
    }

    #[test]
    fn text_parse_errors() {
        assert!(matches!(
            LatticePolygon::from_text("0,0;1,0").unwrap_err(),
            PolygonError::Parse(_)
        ));
        assert!(matches!(
            LatticePolygon::from_text("0,0,zero;0,0,1;0,1,1;0,1,0").unwrap_err(),
            PolygonError::Parse(_)
        ));
    }

    #[test]
    fn from_edges_rejects_disconnected_unions() {
        let p = square_abdc();
        let mut edges = p.edges();
        let far = LatticePolygon::new(vec![v(5, 0, 0), v(5, 0, 1), v(5, 1, 1), v(5, 1, 0)]).unwrap();
        edges.extend(far.edges().iter().map(|e| {
            Edge::new(
                v(e.a.x + 5, e.a.y, e.a.z),
                v(e.b.x + 5, e.b.y, e.b.z),
            )
        }));
        assert_eq!(
            LatticePolygon::from_edges(TubeDims::default(), &edges).unwrap_err(),
            PolygonError::NotClosed
        );
        assert_eq!(
            LatticePolygon::from_edges(TubeDims::default(), &p.edges()).unwrap(),
            p
        );
    }

    #[test]
    fn grid_edge_table_matches_lane_geometry() {
        for (i, &(l1, l2)) in CROSS_SECTION_EDGES.iter().enumerate() {
            let (y1, z1) = lane_yz(l1);
            let (y2, z2) = lane_yz(l2);
            assert_eq!(
                (y1 - y2).abs() + (z1 - z2).abs(),
                1,
                "grid edge {} joins adjacent lanes",
                i
            );
            assert_eq!(grid_edge_index(l1, l2), Some(i));
            assert_eq!(grid_edge_index(l2, l1), Some(i));
        }
        assert_eq!(grid_edge_index(0, 3), None, "a and d are diagonal");
        assert_eq!(grid_edge_index(0, 4), None, "a and e are two steps apart");
    }
}
