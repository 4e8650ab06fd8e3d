//! From polygon to link type: cut the tube at its narrow places and read a
//! 4-string plat word off each remaining block.
//!
//! The pipeline has three geometric stages.
//!
//! 1. **Squash** ([`collapse_6sections`]): deleting the six `x`-edges of a
//!    section that uses every lane and sliding the right half of the
//!    polygon one step left merges the section's two bounding hinges.
//!    The slide is an isotopy, so the link type is unchanged; repeating
//!    it leaves a polygon whose sections have size 2 or 4.
//!
//! 2. **Split** ([`split_at_2sections`]): wherever only two strands cross
//!    a plane the polygon is pinched.  Cutting the two `x`-edges there
//!    and closing both open arcs factors the polygon into a connected
//!    sum of closed pieces.  A 4-section that one `-2` move narrows to a
//!    2-section is straightened first — unless its three-edge spur points
//!    out of an end of the piece, in which case it is cap geometry, not a
//!    pinch.  Each piece records which sections of the input it kept.
//!
//! 3. **Sweep** ([`shifted_braid_word`]): a piece whose remaining interior
//!    sections all have size 4 is a braid on four strands.  The sweep
//!    walks it hinge by hinge: between hinges strands run along their
//!    lanes, and at a hinge each strand follows its grid path.  Lanes
//!    project to diagram heights in index order (`2y + z`), a `y`-step
//!    moves a strand two heights and passes exactly one lane between, and
//!    a `z`-step moves one height and passes nothing.  Every `y`-step
//!    past an occupied lane emits one crossing; of the two strands
//!    involved, the one at `z = 1` is in front, so the sign is `+`
//!    exactly when the strand rising in lane order sits at `z = 1`.
//!    Where the number of active strands steps from 2 to 4 the two new
//!    strands enter at adjacent positions and fix the left closure
//!    (inner pair: flavour 1, outer pair: flavour 2); the first step from
//!    4 back to 2 fixes the right closure the same way.  Crossings made
//!    while only two strands are active are absorbed by the adjacent cap
//!    and are not emitted.
//!
//! [`classify_polygon`] runs all three stages and classifies every piece;
//! the connected sum of the piece types is the type of the polygon.
//! Everything here is a pure function of its input.

use std::fmt;

use crate::braid::{classify_plat, BraidError, BraidWord, Generator, LinkType, PlatDiagram};
use crate::lattice::{
    lane_yz, BfacfMove, Dir, Edge, LaneSet, LatticePolygon, PolygonError, Vertex, LANE_COUNT,
};

/// Errors from the polygon-to-diagram pipeline.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DiagramError {
    /// A lattice operation failed.
    Lattice(PolygonError),
    /// A braid operation failed.
    Braid(BraidError),
    /// The input breaks a documented precondition, or the sweep met
    /// geometry that squashing and splitting should have removed.
    PreconditionViolated(&'static str),
    /// No block insertion turning the polygon into an unknot was found.
    /// Callers should treat this as a defect, not an expected outcome.
    InsertionNotFound,
}

impl fmt::Display for DiagramError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagramError::Lattice(e) => write!(f, "lattice error: {}", e),
            DiagramError::Braid(e) => write!(f, "braid error: {}", e),
            DiagramError::PreconditionViolated(msg) => write!(f, "precondition violated: {}", msg),
            DiagramError::InsertionNotFound => write!(f, "no unknotting insertion found"),
        }
    }
}

impl std::error::Error for DiagramError {}

impl From<PolygonError> for DiagramError {
    fn from(e: PolygonError) -> Self {
        DiagramError::Lattice(e)
    }
}

impl From<BraidError> for DiagramError {
    fn from(e: BraidError) -> Self {
        DiagramError::Braid(e)
    }
}

/// Ascending neighbour lanes of each lane in the cross-section grid.
pub(crate) const LANE_NEIGHBORS: [&[usize]; LANE_COUNT] = [
    &[1, 2],
    &[0, 3],
    &[0, 3, 4],
    &[1, 2, 5],
    &[2, 5],
    &[3, 4],
];

fn lane_vertex(x: i32, lane: usize) -> Vertex {
    let (y, z) = lane_yz(lane);
    Vertex::new(x, y, z)
}

// ---------------------------------------------------------------------------
// Stage 1: squash 6-sections.
// ---------------------------------------------------------------------------

/// A polygon with every 6-section squashed away, plus the input positions
/// of the removed sections so that section indices can be mapped back.
#[derive(Clone, Debug)]
pub struct Collapsed {
    polygon: LatticePolygon,
    removed: Vec<usize>,
}

impl Collapsed {
    pub fn polygon(&self) -> &LatticePolygon {
        &self.polygon
    }

    pub fn into_polygon(self) -> LatticePolygon {
        self.polygon
    }

    /// Input section indices that were squashed away, ascending.
    pub fn removed_sections(&self) -> &[usize] {
        &self.removed
    }

    /// The input section that section `k` of the squashed polygon came
    /// from: `k` shifted past every removed section at or before it.
    pub fn original_section(&self, k: usize) -> usize {
        let mut o = k;
        for &r in &self.removed {
            if r <= o {
                o += 1;
            }
        }
        o
    }
}

/// Squash every 6-section, leftmost first: delete its six `x`-edges and
/// pull everything beyond it one step left, merging its bounding hinges.
///
/// The merge cannot collide.  A repeated grid edge would close a four-edge
/// cycle through the two deleted `x`-edges on its lanes, and a single
/// closed walk longer than 4 contains no 4-cycle; the two endpoints of
/// each deleted `x`-edge fuse into one vertex that inherits exactly one
/// edge from each side.  Sliding half the polygon along the tube axis is
/// an isotopy, so the link type is unchanged.
pub fn collapse_6sections_tracked(p: &LatticePolygon) -> Collapsed {
    let mut poly = p.clone();
    let mut removed: Vec<usize> = Vec::new();
    loop {
        let secs = poly.sections();
        let Some(k0) = secs.iter().position(|s| s.len() == 6) else {
            break;
        };
        let k = (k0 + 1) as i32;
        let mut orig = k0 + 1;
        for &r in &removed {
            if r <= orig {
                orig += 1;
            }
        }
        debug_assert!(removed.last().is_none_or(|&r| r < orig));
        removed.push(orig);
        let mut edges: Vec<Edge> = Vec::new();
        for e in poly.edges() {
            if e.is_x_edge() && e.a.x.max(e.b.x) == k {
                continue;
            }
            if e.a.x.min(e.b.x) >= k {
                let shift = |v: Vertex| Vertex::new(v.x - 1, v.y, v.z);
                edges.push(Edge::new(shift(e.a), shift(e.b)));
            } else {
                edges.push(e);
            }
        }
        poly = LatticePolygon::from_edges(p.dims(), &edges)
            .expect("merging the hinges around a full section leaves one closed walk");
    }
    Collapsed {
        polygon: poly,
        removed,
    }
}

/// [`collapse_6sections_tracked`] without the bookkeeping.
pub fn collapse_6sections(p: &LatticePolygon) -> LatticePolygon {
    collapse_6sections_tracked(p).into_polygon()
}

// ---------------------------------------------------------------------------
// Stage 2: split at 2-sections.
// ---------------------------------------------------------------------------

/// One closed piece of a split polygon.
#[derive(Clone, Debug)]
pub struct Piece {
    polygon: LatticePolygon,
    source_sections: Vec<Option<usize>>,
    cut_before: Option<usize>,
    cut_after: Option<usize>,
}

impl Piece {
    pub fn polygon(&self) -> &LatticePolygon {
        &self.polygon
    }

    pub fn into_polygon(self) -> LatticePolygon {
        self.polygon
    }

    /// For every section of the piece, the section of the split input it
    /// came from; `None` marks closure sections added by a detour through
    /// a neighbouring empty plane.
    pub fn source_sections(&self) -> &[Option<usize>] {
        &self.source_sections
    }

    /// The input section cut on the piece's left side, if any.
    pub fn cut_before(&self) -> Option<usize> {
        self.cut_before
    }

    /// The input section cut on the piece's right side, if any.
    pub fn cut_after(&self) -> Option<usize> {
        self.cut_after
    }
}

struct Work {
    poly: LatticePolygon,
    src: Vec<Option<usize>>,
    cut_before: Option<usize>,
}

impl Work {
    fn first_real(&self) -> Option<usize> {
        self.src.iter().position(|s| s.is_some()).map(|i| i + 1)
    }

    fn last_real(&self) -> Option<usize> {
        self.src.iter().rposition(|s| s.is_some()).map(|i| i + 1)
    }
}

/// A `-2` move that narrows 4-section `k` to a 2-section and whose spur
/// points into the piece.  At the first kept section only a push towards
/// lower `x` is accepted (the spur's base sits on the right bounding
/// hinge), at the last kept section only a push towards higher `x`; a
/// spur pointing out of an end is cap geometry and is left alone.
fn eligible_narrowing_move(
    p: &LatticePolygon,
    k: usize,
    first_real: usize,
    last_real: usize,
) -> Option<BfacfMove> {
    let lanes = p.section(k);
    if lanes.len() != 4 {
        return None;
    }
    let edge_set = p.edge_set();
    let ll = lanes.lanes();
    for i in 0..ll.len() {
        for j in (i + 1)..ll.len() {
            let (l1, l2) = (ll[i], ll[j]);
            if crate::lattice::grid_edge_index(l1, l2).is_none() {
                continue;
            }
            for (x, dir) in [(k as i32, Dir::XMinus), (k as i32 - 1, Dir::XPlus)] {
                let allowed = match dir {
                    Dir::XMinus => k != last_real,
                    Dir::XPlus => k != first_real,
                    _ => unreachable!(),
                };
                if !allowed {
                    continue;
                }
                let base = Edge::new(lane_vertex(x, l1), lane_vertex(x, l2));
                if edge_set.contains(&base) {
                    let mv = BfacfMove::Minus2 { edge: base, dir };
                    if p.apply_bfacf(&mv).is_ok() {
                        return Some(mv);
                    }
                }
            }
        }
    }
    None
}

/// Straighten every narrow 4-section whose spur points into the piece,
/// rescanning from the left after each move (a move can expose another
/// narrow section anywhere).  Each move shortens the polygon by 2, so
/// this terminates.
fn normalize_narrow(work: &mut Work) -> Result<(), DiagramError> {
    'scan: loop {
        let (Some(first), Some(last)) = (work.first_real(), work.last_real()) else {
            return Ok(());
        };
        let secs = work.poly.sections();
        for k in first..=last {
            if secs[k - 1].len() != 4 {
                continue;
            }
            if let Some(mv) = eligible_narrowing_move(&work.poly, k, first, last) {
                work.poly = work.poly.apply_bfacf(&mv)?;
                continue 'scan;
            }
        }
        return Ok(());
    }
}

/// Deterministic shortest grid path from `l1` to `l2` inside one
/// cross-section plane: breadth-first with neighbours in lane order, so
/// ties break towards lower lanes.  Interior lanes must be unblocked;
/// `skip_direct` forbids the one-edge path.
fn plane_path(
    l1: usize,
    l2: usize,
    blocked: &[bool; LANE_COUNT],
    skip_direct: bool,
) -> Option<Vec<usize>> {
    let mut parent = [usize::MAX; LANE_COUNT];
    let mut queue = std::collections::VecDeque::new();
    parent[l1] = l1;
    queue.push_back(l1);
    while let Some(u) = queue.pop_front() {
        for &v in LANE_NEIGHBORS[u] {
            if u == l1 && v == l2 && skip_direct {
                continue;
            }
            if parent[v] != usize::MAX || (v != l2 && blocked[v]) {
                continue;
            }
            parent[v] = u;
            if v == l2 {
                let mut path = vec![l2];
                let mut cur = l2;
                while cur != l1 {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(v);
        }
    }
    None
}

/// Join the two open stubs of an arc at lanes `l1 < l2` of `plane`.  The
/// join runs inside the plane when a self-avoiding path exists there;
/// otherwise both stubs are extended one step towards `outward` — a plane
/// the arc never reaches — and joined in that empty plane.  Returns the
/// closure edges and whether the detour was taken.
fn close_stubs(
    arc: &[Edge],
    plane: i32,
    l1: usize,
    l2: usize,
    outward: i32,
) -> (Vec<Edge>, bool) {
    let mut blocked = [false; LANE_COUNT];
    let mut direct_blocked = false;
    for e in arc {
        for v in [e.a, e.b] {
            if v.x == plane {
                let l = v.lane();
                if l != l1 && l != l2 {
                    blocked[l] = true;
                }
            }
        }
        if !e.is_x_edge() && e.a.x == plane {
            let (p, q) = (e.a.lane(), e.b.lane());
            if (p.min(q), p.max(q)) == (l1, l2) {
                direct_blocked = true;
            }
        }
    }
    if let Some(path) = plane_path(l1, l2, &blocked, direct_blocked) {
        let edges = path
            .windows(2)
            .map(|w| Edge::new(lane_vertex(plane, w[0]), lane_vertex(plane, w[1])))
            .collect();
        return (edges, false);
    }
    let far = plane + outward;
    let path = plane_path(l1, l2, &[false; LANE_COUNT], false)
        .expect("the empty cross-section grid is connected");
    let mut edges = vec![
        Edge::new(lane_vertex(plane, l1), lane_vertex(far, l1)),
        Edge::new(lane_vertex(plane, l2), lane_vertex(far, l2)),
    ];
    edges.extend(
        path.windows(2)
            .map(|w| Edge::new(lane_vertex(far, w[0]), lane_vertex(far, w[1]))),
    );
    (edges, true)
}

/// Cut the polygon at 2-section `c` and close both open arcs, returning
/// the closed left piece and the remaining right side as new work.
fn cut_at(work: Work, c: usize) -> Result<(Piece, Work), DiagramError> {
    let poly = &work.poly;
    let lanes = poly.section(c).lanes();
    debug_assert_eq!(lanes.len(), 2);
    let (l1, l2) = (lanes[0], lanes[1]);
    let cut_src = work.src[c - 1];
    let k = c as i32;
    let mut left: Vec<Edge> = Vec::new();
    let mut right: Vec<Edge> = Vec::new();
    for e in poly.edges() {
        if e.is_x_edge() && e.a.x.max(e.b.x) == k {
            debug_assert!(e.a.lane() == l1 || e.a.lane() == l2);
            continue;
        }
        if e.a.x.max(e.b.x) <= k - 1 {
            left.push(e);
        } else {
            debug_assert!(e.a.x.min(e.b.x) >= k);
            right.push(e);
        }
    }
    let (closure, left_ext) = close_stubs(&left, k - 1, l1, l2, 1);
    left.extend_from_slice(&closure);
    let (closure, right_ext) = close_stubs(&right, k, l1, l2, -1);
    right.extend_from_slice(&closure);
    let left_poly = LatticePolygon::from_edges(poly.dims(), &left)
        .expect("a cut arc and its closure form one closed walk");
    let right_poly = LatticePolygon::from_edges(poly.dims(), &right)
        .expect("a cut arc and its closure form one closed walk");

    let mut left_src: Vec<Option<usize>> = work.src[..c - 1].to_vec();
    if left_ext {
        left_src.push(None);
    }
    debug_assert_eq!(left_src.len(), left_poly.sections().len());
    let mut right_src: Vec<Option<usize>> = Vec::new();
    if right_ext {
        right_src.push(None);
    }
    right_src.extend_from_slice(&work.src[c..]);
    debug_assert_eq!(right_src.len(), right_poly.sections().len());

    let piece = Piece {
        polygon: left_poly,
        source_sections: left_src,
        cut_before: work.cut_before,
        cut_after: cut_src,
    };
    let next = Work {
        poly: right_poly,
        src: right_src,
        cut_before: cut_src,
    };
    Ok((piece, next))
}

/// Cut a polygon without 6-sections into closed pieces at every genuine
/// 2-section, straightening inward-pointing narrow 4-sections as they are
/// uncovered.  Pieces come out left to right; closing a cut can add a
/// narrow section at a piece's end (marked `None` in its sources), and
/// such closure sections are never cut again.  Every cut removes one kept
/// section and every straightening move removes two edges, so the loop
/// terminates.
pub fn split_into_pieces(p: &LatticePolygon) -> Result<Vec<Piece>, DiagramError> {
    if p.sections().iter().any(|s| s.len() == 6) {
        return Err(DiagramError::PreconditionViolated(
            "splitting requires every 6-section squashed first",
        ));
    }
    let m = p.span() as usize;
    let mut work = Work {
        poly: p.clone(),
        src: (1..=m).map(Some).collect(),
        cut_before: None,
    };
    let mut out = Vec::new();
    loop {
        normalize_narrow(&mut work)?;
        let secs = work.poly.sections();
        debug_assert_eq!(secs.len(), work.src.len());
        let cut = work
            .src
            .iter()
            .enumerate()
            .find_map(|(i, s)| (s.is_some() && secs[i].len() == 2).then_some(i + 1));
        match cut {
            Some(c) => {
                let (piece, next) = cut_at(work, c)?;
                out.push(piece);
                work = next;
            }
            None => {
                out.push(Piece {
                    polygon: work.poly,
                    source_sections: work.src,
                    cut_before: work.cut_before,
                    cut_after: None,
                });
                return Ok(out);
            }
        }
    }
}

/// [`split_into_pieces`] without the bookkeeping: just the closed pieces.
pub fn split_at_2sections(p: &LatticePolygon) -> Result<Vec<LatticePolygon>, DiagramError> {
    Ok(split_into_pieces(p)?
        .into_iter()
        .map(Piece::into_polygon)
        .collect())
}

/// The closed pieces of the split that still contain a 4-section — the
/// blocks whose sweeps can produce crossings.  Squashes 6-sections first,
/// so any polygon is accepted.  Pieces that are narrow everywhere close
/// into unknotted loops and are dropped; a polygon that is narrow
/// everywhere therefore yields no blocks at all.
pub fn maximal_suitable_blocks(p: &LatticePolygon) -> Result<Vec<LatticePolygon>, DiagramError> {
    let collapsed = collapse_6sections(p);
    Ok(split_into_pieces(&collapsed)?
        .into_iter()
        .filter(|pc| pc.polygon.sections().iter().any(|s| s.len() == 4))
        .map(Piece::into_polygon)
        .collect())
}

// ---------------------------------------------------------------------------
// Stage 3: sweep a block into a plat diagram.
// ---------------------------------------------------------------------------

/// A plat diagram read from a block, together with how many letters each
/// hinge had emitted before it was processed — the word position aligned
/// with any given section of the block.
#[derive(Clone, Debug)]
pub struct SweepDiagram {
    diagram: PlatDiagram,
    letters_before_hinge: Vec<usize>,
}

impl SweepDiagram {
    pub fn diagram(&self) -> &PlatDiagram {
        &self.diagram
    }

    pub fn into_diagram(self) -> PlatDiagram {
        self.diagram
    }

    /// Word position aligned with the middle of section `k` (1-based):
    /// every letter from hinges left of the section comes before it.
    pub fn word_position_of_section(&self, k: usize) -> usize {
        self.letters_before_hinge[k]
    }
}

/// What happens to the strands at one hinge, as lane paths.
struct HingeEvents {
    /// Paths from the higher dying stub to the lower one.
    deaths: Vec<Vec<usize>>,
    /// Paths from a left stub to a right stub (singleton = straight pass).
    throughs: Vec<Vec<usize>>,
    /// Paths from the lower newborn stub to the higher one.
    births: Vec<Vec<usize>>,
}

/// Follow the grid path starting at a lane with exactly one plane edge.
fn walk_plane_path(adj: &[Vec<usize>; LANE_COUNT], start: usize) -> Result<Vec<usize>, DiagramError> {
    if adj[start].len() != 1 {
        return Err(DiagramError::PreconditionViolated(
            "strand branches inside a hinge",
        ));
    }
    let mut path = vec![start];
    let mut prev = start;
    let mut cur = adj[start][0];
    loop {
        path.push(cur);
        match adj[cur].len() {
            1 => return Ok(path),
            2 => {
                let next = if adj[cur][0] == prev {
                    adj[cur][1]
                } else {
                    adj[cur][0]
                };
                prev = cur;
                cur = next;
            }
            _ => {
                return Err(DiagramError::PreconditionViolated(
                    "strand branches inside a hinge",
                ))
            }
        }
    }
}

/// Partition the grid paths of hinge `k` by what they do to the strands:
/// join two left stubs (death), connect a left stub to a right stub
/// (through), or join two right stubs (birth).  Paths are discovered in
/// ascending order of their lowest stub lane.
fn hinge_events(
    edges: &[Edge],
    k: usize,
    left: LaneSet,
    right: LaneSet,
) -> Result<HingeEvents, DiagramError> {
    let mut adj: [Vec<usize>; LANE_COUNT] = Default::default();
    let mut plane_edge_count = 0usize;
    for e in edges {
        if !e.is_x_edge() && e.a.x == k as i32 {
            adj[e.a.lane()].push(e.b.lane());
            adj[e.b.lane()].push(e.a.lane());
            plane_edge_count += 1;
        }
    }
    for nb in &mut adj {
        nb.sort_unstable();
    }
    let mut consumed = [false; LANE_COUNT];
    let mut used_edges = 0usize;
    let mut events = HingeEvents {
        deaths: Vec::new(),
        throughs: Vec::new(),
        births: Vec::new(),
    };
    for l in 0..LANE_COUNT {
        if !left.contains(l) || consumed[l] {
            continue;
        }
        consumed[l] = true;
        if adj[l].is_empty() {
            if !right.contains(l) {
                return Err(DiagramError::PreconditionViolated(
                    "strand ends nowhere at a hinge",
                ));
            }
            events.throughs.push(vec![l]);
            continue;
        }
        let path = walk_plane_path(&adj, l)?;
        used_edges += path.len() - 1;
        let end = *path.last().expect("paths are nonempty");
        consumed[end] = true;
        if left.contains(end) {
            let mut rev = path;
            rev.reverse();
            events.deaths.push(rev);
        } else if right.contains(end) {
            events.throughs.push(path);
        } else {
            return Err(DiagramError::PreconditionViolated(
                "strand ends nowhere at a hinge",
            ));
        }
    }
    for l in 0..LANE_COUNT {
        if !right.contains(l) || consumed[l] {
            continue;
        }
        consumed[l] = true;
        if adj[l].is_empty() {
            return Err(DiagramError::PreconditionViolated(
                "strand ends nowhere at a hinge",
            ));
        }
        let path = walk_plane_path(&adj, l)?;
        used_edges += path.len() - 1;
        let end = *path.last().expect("paths are nonempty");
        consumed[end] = true;
        if !right.contains(end) {
            return Err(DiagramError::PreconditionViolated(
                "strand ends nowhere at a hinge",
            ));
        }
        events.births.push(path);
    }
    if used_edges != plane_edge_count {
        return Err(DiagramError::PreconditionViolated(
            "hinge contains a closed grid loop",
        ));
    }
    Ok(events)
}

/// The running state of the sweep: which lanes are occupied, the word so
/// far, and the closures fixed so far.
struct Sweep {
    heads: u8,
    word: Vec<Generator>,
    left: Option<u8>,
    right: Option<u8>,
}

fn closure_flavor(p_low: u32) -> u8 {
    if p_low == 2 {
        1
    } else {
        2
    }
}

impl Sweep {
    fn contains(&self, l: usize) -> bool {
        self.heads >> l & 1 == 1
    }

    fn active(&self) -> u32 {
        self.heads.count_ones()
    }

    fn insert(&mut self, l: usize) {
        debug_assert!(!self.contains(l), "two strand heads on one lane");
        self.heads |= 1 << l;
    }

    fn remove(&mut self, l: usize) {
        debug_assert!(self.contains(l));
        self.heads &= !(1 << l);
    }

    /// 0-based number of occupied lanes strictly below `l`.
    fn count_below(&self, l: usize) -> u32 {
        (self.heads & ((1u8 << l) - 1)).count_ones()
    }

    /// A `y`-step of the moving strand from `cur` towards `next` passes
    /// the lane between them; if a resting strand sits there and four
    /// strands are active, emit the crossing.  The mover is never in
    /// `heads` during a walk, so the strands below the crossing pair are
    /// exactly the occupied lanes below the crossed one.
    fn note_crossing(&mut self, cur: usize, next: usize) {
        let mid = (cur + next) / 2;
        if !self.contains(mid) || self.active() != 3 {
            return;
        }
        let rising = next > cur;
        let riser = if rising { cur } else { mid };
        let sign: i8 = if riser % 2 == 1 { 1 } else { -1 };
        let p = 1 + self.count_below(mid) as u8;
        self.word
            .push(Generator::new(p, sign).expect("crossing positions lie in 1..=3"));
    }

    /// Move one strand along a lane path.  `remove_start` lifts the head
    /// off the first lane (through and death walks; a newborn's twin
    /// keeps it), `insert_end` puts it down on the last (not for deaths,
    /// whose last lane is the dying partner's).
    fn walk(&mut self, path: &[usize], remove_start: bool, insert_end: bool) {
        if remove_start {
            self.remove(path[0]);
        }
        for (i, w) in path.windows(2).enumerate() {
            let (cur, next) = (w[0], w[1]);
            if cur.abs_diff(next) == 2 {
                self.note_crossing(cur, next);
            }
            let last = i + 2 == path.len();
            debug_assert!(
                !self.contains(next) || (last && !insert_end),
                "strand steps onto an occupied lane"
            );
        }
        if insert_end {
            self.insert(*path.last().expect("paths are nonempty"));
        }
    }
}

/// Sweep a block hinge by hinge and read off its plat diagram, keeping
/// the letter count at every hinge.  Fails with `PreconditionViolated` if
/// a strand pair is born or dies between 4-sections — geometry that
/// splitting removes.  A block that never has four strands active emits
/// no letters and closes into the one-bridge unknot diagram.
pub fn sweep_block(block: &LatticePolygon) -> Result<SweepDiagram, DiagramError> {
    let span = block.span() as usize;
    let secs = block.sections();
    let edges = block.edges();
    let mut sweep = Sweep {
        heads: 0,
        word: Vec::new(),
        left: None,
        right: None,
    };
    let mut cums = vec![0usize];
    for k in 0..=span {
        let left = if k >= 1 { secs[k - 1] } else { LaneSet::EMPTY };
        let right = if k < span { secs[k] } else { LaneSet::EMPTY };
        let events = hinge_events(&edges, k, left, right)?;

        for path in &events.deaths {
            let low = *path.last().expect("paths are nonempty");
            sweep.walk(path, true, false);
            if sweep.active() == 3 {
                let p_low = 1 + sweep.count_below(low);
                if sweep.right.is_some() {
                    return Err(DiagramError::PreconditionViolated(
                        "a strand pair dies between full sections",
                    ));
                }
                sweep.right = Some(closure_flavor(p_low));
            }
            sweep.remove(low);
        }
        for path in &events.throughs {
            sweep.walk(path, true, true);
        }
        for path in &events.births {
            let anchor = path[0];
            let pre = sweep.active();
            let p_low = 1 + sweep.count_below(anchor);
            sweep.insert(anchor);
            if pre == 2 {
                if sweep.left.is_some() {
                    return Err(DiagramError::PreconditionViolated(
                        "a strand pair is born between full sections",
                    ));
                }
                sweep.left = Some(closure_flavor(p_low));
            }
            sweep.walk(path, false, true);
        }

        let expect = if k < span { secs[k].0 } else { 0 };
        if sweep.heads != expect {
            return Err(DiagramError::PreconditionViolated(
                "sweep lost track of the strands",
            ));
        }
        cums.push(sweep.word.len());
    }
    let diagram = match (sweep.left, sweep.right) {
        (Some(l), Some(r)) => PlatDiagram::new(l, r, BraidWord(sweep.word))?,
        (None, None) => {
            debug_assert!(sweep.word.is_empty());
            PlatDiagram::new(1, 2, BraidWord::empty())?
        }
        _ => {
            return Err(DiagramError::PreconditionViolated(
                "sweep fixed only one closure",
            ))
        }
    };
    Ok(SweepDiagram {
        diagram,
        letters_before_hinge: cums,
    })
}

/// The plat word of a block: [`sweep_block`] without the position map.
pub fn shifted_braid_word(block: &LatticePolygon) -> Result<PlatDiagram, DiagramError> {
    Ok(sweep_block(block)?.into_diagram())
}

// ---------------------------------------------------------------------------
// Classification.
// ---------------------------------------------------------------------------

/// A 4-section of a factor that survives from the input polygon: a place
/// where a braid block can be spliced into the input and its word lands
/// at a known position in the factor's diagram.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct InsertionSite {
    /// Section index in the input polygon.
    pub section: usize,
    /// The factor's own section index.
    pub piece_section: usize,
    /// Word position in the factor's diagram aligned with that section.
    pub word_position: usize,
}

/// One factor of a classified polygon: the closed piece, its link type,
/// its swept diagram (absent for pieces that are narrow everywhere),
/// where it was cut from the input, and its insertion sites.
#[derive(Clone, Debug)]
pub struct Factor {
    polygon: LatticePolygon,
    link: LinkType,
    diagram: Option<SweepDiagram>,
    cut_before: Option<usize>,
    cut_after: Option<usize>,
    sites: Vec<InsertionSite>,
}

impl Factor {
    pub fn polygon(&self) -> &LatticePolygon {
        &self.polygon
    }

    pub fn link(&self) -> &LinkType {
        &self.link
    }

    pub fn diagram(&self) -> Option<&SweepDiagram> {
        self.diagram.as_ref()
    }

    /// The input section cut on the factor's left side, if any.
    pub fn cut_before(&self) -> Option<usize> {
        self.cut_before
    }

    /// The input section cut on the factor's right side, if any.
    pub fn cut_after(&self) -> Option<usize> {
        self.cut_after
    }

    /// Sections of this factor that survive from the input, with their
    /// word positions.
    pub fn insertion_sites(&self) -> &[InsertionSite] {
        &self.sites
    }
}

/// The ordered factors of a polygon, left to right.
#[derive(Clone, Debug)]
pub struct FactorDecomposition {
    factors: Vec<Factor>,
}

impl FactorDecomposition {
    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Number of knotted factors.
    pub fn knotted_count(&self) -> usize {
        self.factors
            .iter()
            .filter(|f| f.link != LinkType::Unknot)
            .count()
    }

    /// The multiset of prime fractions over all factors, sorted.
    pub fn prime_fractions(&self) -> Vec<crate::braid::TwoBridgeFraction> {
        let mut out = Vec::new();
        for f in &self.factors {
            match &f.link {
                LinkType::Unknot => {}
                LinkType::Prime(fr) => out.push(*fr),
                LinkType::ConnectedSum(frs) => out.extend(frs.iter().copied()),
                LinkType::TwoComponentUnlink => {
                    unreachable!("split types are rejected during classification")
                }
            }
        }
        out.sort();
        out
    }

    /// The connected sum of all factors.
    pub fn link_type(&self) -> LinkType {
        LinkType::connected_sum(self.prime_fractions())
    }
}

/// Classify a polygon: squash, split, sweep each wide piece, classify its
/// plat closure, and take the connected sum.  Pieces without 4-sections
/// close into one-bridge loops and are unknots by construction.
pub fn classify_polygon(
    p: &LatticePolygon,
) -> Result<(LinkType, FactorDecomposition), DiagramError> {
    let collapsed = collapse_6sections_tracked(p);
    let pieces = split_into_pieces(collapsed.polygon())?;
    let mut factors = Vec::with_capacity(pieces.len());
    for piece in pieces {
        let secs = piece.polygon.sections();
        let wide = secs.iter().any(|s| s.len() == 4);
        let (link, diagram, sites) = if !wide {
            (LinkType::Unknot, None, Vec::new())
        } else {
            let sw = sweep_block(&piece.polygon)?;
            let link = classify_plat(sw.diagram())?;
            if link == LinkType::TwoComponentUnlink {
                return Err(DiagramError::PreconditionViolated(
                    "a closed piece traced as a split link",
                ));
            }
            let sites = piece
                .source_sections
                .iter()
                .enumerate()
                .filter(|&(i, _)| secs[i].len() == 4)
                .filter_map(|(i, s)| {
                    s.map(|src| InsertionSite {
                        section: collapsed.original_section(src),
                        piece_section: i + 1,
                        word_position: sw.word_position_of_section(i + 1),
                    })
                })
                .collect();
            (link, Some(sw), sites)
        };
        factors.push(Factor {
            polygon: piece.polygon,
            link,
            diagram,
            cut_before: piece.cut_before.map(|s| collapsed.original_section(s)),
            cut_after: piece.cut_after.map(|s| collapsed.original_section(s)),
            sites,
        });
    }
    let decomposition = FactorDecomposition { factors };
    Ok((decomposition.link_type(), decomposition))
}

/// Total length of the knotted factors: 0 for unknotted polygons, the
/// whole (squashed) length for a knotted polygon that does not split.
pub fn size_of_linked_part(p: &LatticePolygon) -> Result<usize, DiagramError> {
    let (_, fd) = classify_polygon(p)?;
    Ok(fd
        .factors
        .iter()
        .filter(|f| f.link != LinkType::Unknot)
        .map(|f| f.polygon.len())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{enumerate_polygons, EnumerateOptions};
    use crate::lattice::TubeDims;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Parallel strands along `lanes` for `span` steps, capped by grid
    /// edges between adjacent lanes at both ends.
    fn strand_tube(
        lanes: &[usize],
        span: i32,
        left_caps: &[(usize, usize)],
        right_caps: &[(usize, usize)],
    ) -> LatticePolygon {
        let mut edges = Vec::new();
        for &l in lanes {
            for x in 0..span {
                edges.push(Edge::new(lane_vertex(x, l), lane_vertex(x + 1, l)));
            }
        }
        for &(p, q) in left_caps {
            edges.push(Edge::new(lane_vertex(0, p), lane_vertex(0, q)));
        }
        for &(p, q) in right_caps {
            edges.push(Edge::new(lane_vertex(span, p), lane_vertex(span, q)));
        }
        LatticePolygon::from_edges(TubeDims::default(), &edges).unwrap()
    }

    fn edges_of(list: &[((i32, i32, i32), (i32, i32, i32))]) -> Vec<Edge> {
        list.iter()
            .map(|&((ax, ay, az), (bx, by, bz))| {
                Edge::new(Vertex::new(ax, ay, az), Vertex::new(bx, by, bz))
            })
            .collect()
    }

    #[test]
    fn narrow_tube_splits_everywhere_and_is_unknotted() {
        let rect = strand_tube(&[0, 1], 5, &[(0, 1)], &[(0, 1)]);
        let pieces = split_at_2sections(&rect).unwrap();
        assert_eq!(pieces.len(), 6);
        let (link, fd) = classify_polygon(&rect).unwrap();
        assert_eq!(link, LinkType::Unknot);
        assert_eq!(fd.knotted_count(), 0);
        assert_eq!(size_of_linked_part(&rect).unwrap(), 0);
        assert!(maximal_suitable_blocks(&rect).unwrap().is_empty());
    }

    #[test]
    fn four_strand_tube_sweeps_to_one_absorbable_crossing() {
        let tube = strand_tube(&[0, 1, 2, 3], 4, &[(0, 1), (2, 3)], &[(0, 2), (1, 3)]);
        let sw = sweep_block(&tube).unwrap();
        let d = sw.diagram();
        assert_eq!(d.left_closure(), 2);
        assert_eq!(d.right_closure(), 2);
        assert_eq!(d.word().0, vec![Generator::new(2, 1).unwrap()]);
        // All letters come from the caps: none before the last hinge.
        assert_eq!(sw.word_position_of_section(1), 0);
        assert_eq!(sw.word_position_of_section(4), 0);
        assert_eq!(classify_plat(d).unwrap(), LinkType::Unknot);

        // No 2-sections and no inward spurs: the tube is a single block.
        assert_eq!(split_at_2sections(&tube).unwrap(), vec![tube.clone()]);
        assert_eq!(maximal_suitable_blocks(&tube).unwrap(), vec![tube.clone()]);
        let (link, fd) = classify_polygon(&tube).unwrap();
        assert_eq!(link, LinkType::Unknot);
        assert_eq!(fd.factors().len(), 1);
        assert_eq!(fd.factors()[0].insertion_sites().len(), 4);

        // The span-1 wide loop closes the same way.
        let short = strand_tube(&[0, 1, 2, 3], 1, &[(0, 1), (2, 3)], &[(0, 2), (1, 3)]);
        assert_eq!(classify_polygon(&short).unwrap().0, LinkType::Unknot);
    }

    #[test]
    fn nested_caps_fix_the_inner_closure_flavor() {
        // The second newborn pair enters between the strands of the first,
        // and its mover climbs over the top resident on the way to its
        // lane: an inner (flavour 1) closure with one crossing on top.
        let tube = strand_tube(&[0, 1, 2, 3], 3, &[(0, 2), (1, 3)], &[(0, 1), (2, 3)]);
        let sw = sweep_block(&tube).unwrap();
        let d = sw.diagram();
        assert_eq!(d.left_closure(), 1);
        assert_eq!(d.right_closure(), 2);
        assert_eq!(d.word().0, vec![Generator::new(3, 1).unwrap()]);
        assert_eq!(classify_plat(d).unwrap(), LinkType::Unknot);
    }

    #[test]
    fn full_sections_collapse_to_a_hexagon() {
        // Six straight runs of span 2 visiting the lanes along a closed
        // tour of the cross-section grid, connected alternately at x = 2
        // and x = 0.
        let tour = [0usize, 1, 3, 5, 4, 2];
        let mut list = Vec::new();
        for (i, &l) in tour.iter().enumerate() {
            for x in 0..2 {
                list.push(Edge::new(lane_vertex(x, l), lane_vertex(x + 1, l)));
            }
            let next = tour[(i + 1) % tour.len()];
            let x = if i % 2 == 0 { 2 } else { 0 };
            list.push(Edge::new(lane_vertex(x, l), lane_vertex(x, next)));
        }
        let snake = LatticePolygon::from_edges(TubeDims::default(), &list).unwrap();
        assert_eq!(snake.len(), 18);
        assert!(snake.sections().iter().all(|s| s.len() == 6));

        let collapsed = collapse_6sections_tracked(&snake);
        assert_eq!(collapsed.removed_sections(), &[1, 2]);
        assert_eq!(collapsed.polygon().span(), 0);
        assert_eq!(collapsed.polygon().len(), 6);
        assert_eq!(classify_polygon(&snake).unwrap().0, LinkType::Unknot);

        // Polygons without 6-sections are fixed points.
        let rect = strand_tube(&[0, 1], 3, &[(0, 1)], &[(0, 1)]);
        assert_eq!(collapse_6sections(&rect), rect);
    }

    #[test]
    fn blocked_joins_detour_into_the_empty_plane() {
        // A 2-section at lanes 0 and 5 whose right neighbour occupies
        // lanes 0, 1, 2, 4: the cut plane keeps every lane around stub 0
        // occupied, so the right piece cannot close there and extends
        // both stubs into the plane the cut emptied.
        let list = edges_of(&[
            ((0, 0, 0), (0, 1, 0)),
            ((0, 1, 0), (0, 2, 0)),
            ((0, 2, 0), (0, 2, 1)),
            ((0, 0, 0), (1, 0, 0)),
            ((0, 2, 1), (1, 2, 1)),
            ((1, 2, 0), (1, 2, 1)),
            ((1, 0, 1), (1, 1, 1)),
            ((1, 1, 0), (1, 1, 1)),
            ((1, 0, 0), (2, 0, 0)),
            ((1, 0, 1), (2, 0, 1)),
            ((1, 1, 0), (2, 1, 0)),
            ((1, 2, 0), (2, 2, 0)),
            ((2, 0, 0), (2, 0, 1)),
            ((2, 1, 0), (2, 2, 0)),
        ]);
        let p = LatticePolygon::from_edges(TubeDims::default(), &list).unwrap();
        assert_eq!(p.len(), 14);
        assert_eq!(p.section(1).lanes(), vec![0, 5]);
        assert_eq!(p.section(2).lanes(), vec![0, 1, 2, 4]);

        let pieces = split_into_pieces(&p).unwrap();
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].polygon().len(), 6);
        assert_eq!(pieces[1].polygon().len(), 14);
        assert_eq!(pieces[1].source_sections(), &[None, Some(2)]);

        let sw = sweep_block(pieces[1].polygon()).unwrap();
        assert!(sw.diagram().word().0.is_empty());
        assert_eq!(sw.diagram().left_closure(), 1);
        assert_eq!(sw.diagram().right_closure(), 2);
        assert_eq!(classify_polygon(&p).unwrap().0, LinkType::Unknot);
    }

    #[test]
    fn poked_end_sections_are_straightened_before_cutting() {
        // Two full strands plus a short spur pair whose base grid edge
        // sits one plane inside: section 1 has size 4 but one -2 move
        // narrows it, so the split straightens and then cuts it.
        let list = edges_of(&[
            ((0, 0, 0), (0, 1, 0)),
            ((0, 0, 1), (0, 1, 1)),
            ((1, 1, 0), (1, 1, 1)),
            ((3, 0, 0), (3, 0, 1)),
            ((0, 0, 0), (1, 0, 0)),
            ((1, 0, 0), (2, 0, 0)),
            ((2, 0, 0), (3, 0, 0)),
            ((0, 0, 1), (1, 0, 1)),
            ((1, 0, 1), (2, 0, 1)),
            ((2, 0, 1), (3, 0, 1)),
            ((0, 1, 0), (1, 1, 0)),
            ((0, 1, 1), (1, 1, 1)),
        ]);
        let p = LatticePolygon::from_edges(TubeDims::default(), &list).unwrap();
        assert_eq!(p.len(), 12);
        assert_eq!(p.section(1).len(), 4);
        assert!(p.is_hidden_2section(1).unwrap());

        let pieces = split_into_pieces(&p).unwrap();
        assert_eq!(pieces.len(), 4);
        assert_eq!(pieces[0].polygon().len(), 4);
        assert_eq!(pieces[0].cut_after(), Some(1));
        assert_eq!(classify_polygon(&p).unwrap().0, LinkType::Unknot);
    }

    #[test]
    fn every_small_polygon_is_unknotted() {
        let mut checked = 0usize;
        let mut sink = |p: &LatticePolygon| {
            let (link, fd) = classify_polygon(p).unwrap();
            assert_eq!(link, LinkType::Unknot, "polygon {:?}", p);
            assert_eq!(fd.knotted_count(), 0);
            checked += 1;
        };
        enumerate_polygons(
            TubeDims::default(),
            &EnumerateOptions::new(12),
            Some(&mut sink),
        )
        .unwrap();
        assert_eq!(checked, 9 + 42 + 209 + 1113 + 5835);
    }

    #[test]
    fn random_deformations_keep_the_unknot() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let mut p = strand_tube(&[0, 1, 2, 3], 3, &[(0, 1), (2, 3)], &[(0, 2), (1, 3)]);
        for step in 0..300 {
            let moves: Vec<BfacfMove> = p
                .legal_moves()
                .into_iter()
                .filter(|mv| !matches!(mv, BfacfMove::Plus2 { .. }) || p.len() + 2 <= 22)
                .collect();
            assert!(!moves.is_empty());
            let mv = moves[rng.gen_range(0..moves.len())];
            p = p.apply_bfacf(&mv).unwrap();
            if step % 25 == 0 {
                assert_eq!(classify_polygon(&p).unwrap().0, LinkType::Unknot);
            }
        }
        assert_eq!(classify_polygon(&p).unwrap().0, LinkType::Unknot);
    }

    #[test]
    fn classification_ignores_x_translation() {
        let tube = strand_tube(&[0, 1, 2, 3], 2, &[(0, 1), (2, 3)], &[(0, 2), (1, 3)]);
        let shifted: Vec<Edge> = tube
            .edges()
            .into_iter()
            .map(|e| {
                Edge::new(
                    Vertex::new(e.a.x + 7, e.a.y, e.a.z),
                    Vertex::new(e.b.x + 7, e.b.y, e.b.z),
                )
            })
            .collect();
        let moved = LatticePolygon::from_edges(TubeDims::default(), &shifted).unwrap();
        assert_eq!(moved, tube);
        assert_eq!(
            classify_polygon(&moved).unwrap().0,
            classify_polygon(&tube).unwrap().0
        );
    }
}
