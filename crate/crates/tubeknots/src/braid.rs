//! 4-braid words and 4-plat diagrams.
//!
//! A 4-plat is a braid on four strands closed off on both ends by one of
//! two cap patterns: closure 1 joins strand positions {2,3} and {1,4},
//! closure 2 joins {1,2} and {3,4}.  The diagram `[i| w |j]` is the word
//! `w` read left to right with closure `i` on the left and `j` on the
//! right.  Crossing signs: `σ_k` crosses the strands at positions k, k+1,
//! and is positive when the front strand runs from lower-left to
//! upper-right:
//!
//! ```text
//!   k+1 ---.   .--->        k+1 ---.   .--->
//!           \ /                     \ /
//!            /        = +            \         = -
//!           / \                     / \
//!   k   ---'   '--->        k   ---'   '--->
//! ```
//!
//! Seven moves transform plat diagrams without changing the underlying
//! link: four crossing-preserving moves (A1: swap an index-1 letter with
//! index 3; A2: reverse the word and swap the two closures; A3: exchange
//! indices 1 and 2 throughout a 3-braid word while toggling both closures;
//! A4: trade a trailing `σ1^e` with right closure 1 for `σ2^-e` with right
//! closure 2) and three crossing-reducing moves (B1: delete an end letter
//! that forms a curl against its closure; B2: cancel an adjacent pair
//! `σk^e σk^-e`; B3: replace an adjacent same-sign pair `σ1^e σ2^e` by
//! `σ2^-e` — or `σ2^e σ1^e` by `σ1^-e` — exchanging indices 1 and 2 in the
//! rest of the word and toggling the right closure).  Exhausting the B
//! moves yields a reduced alternating form whose twist regions classify
//! the closure as a 2-bridge link via a continued fraction.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;

/// Errors from the word and diagram calculus.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BraidError {
    /// Flip (index exchange 1↔2) is only defined for 3-braid words.
    FlipOnFourBraid,
    /// The requested move's structural pattern does not match.
    PatternMismatch(&'static str),
    /// The operation needs a nontrivial link as input.
    TrivialInput,
    /// A search that is guaranteed to succeed found nothing — a bug.
    NotFound,
    /// Integer overflow while evaluating a continued fraction.
    Overflow,
    Parse(String),
}

impl fmt::Display for BraidError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BraidError::FlipOnFourBraid => {
                write!(f, "flip is only defined for words without s3")
            }
            BraidError::PatternMismatch(what) => write!(f, "move does not apply: {what}"),
            BraidError::TrivialInput => write!(f, "input closes to a trivial link"),
            BraidError::NotFound => write!(f, "guaranteed search failed (bug)"),
            BraidError::Overflow => write!(f, "continued fraction overflowed"),
            BraidError::Parse(s) => write!(f, "parse error: {s}"),
        }
    }
}

impl std::error::Error for BraidError {}

/// One crossing `σ_index^sign` with `index ∈ {1,2,3}`, `sign = ±1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Generator {
    index: u8,
    sign: i8,
}

impl Generator {
    pub fn new(index: u8, sign: i8) -> Result<Self, BraidError> {
        if !(1..=3).contains(&index) || (sign != 1 && sign != -1) {
            return Err(BraidError::Parse(format!(
                "generator out of range: index {index}, sign {sign}"
            )));
        }
        Ok(Generator { index, sign })
    }

    pub fn index(&self) -> u8 {
        self.index
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn inverse(self) -> Self {
        Generator { index: self.index, sign: -self.sign }
    }

    /// Exchange indices 1 ↔ 2; errors on an index-3 letter.
    pub fn flipped(self) -> Result<Self, BraidError> {
        match self.index {
            1 => Ok(Generator { index: 2, sign: self.sign }),
            2 => Ok(Generator { index: 1, sign: self.sign }),
            _ => Err(BraidError::FlipOnFourBraid),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign > 0 {
            write!(f, "s{}", self.index)
        } else {
            write!(f, "s{}^-1", self.index)
        }
    }
}

/// A sequence of crossings; reducible words are distinct objects from
/// their reductions.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct BraidWord(pub Vec<Generator>);

impl BraidWord {
    pub fn empty() -> Self {
        BraidWord(Vec::new())
    }

    /// Build from `(index, exponent)` twist runs, e.g. `[(1,3)]` = s1 s1 s1.
    pub fn from_runs(runs: &[(u8, i32)]) -> Result<Self, BraidError> {
        let mut gens = Vec::new();
        for &(index, exp) in runs {
            if exp == 0 {
                return Err(BraidError::Parse("zero-length twist run".into()));
            }
            let g = Generator::new(index, exp.signum() as i8)?;
            gens.extend(std::iter::repeat(g).take(exp.unsigned_abs() as usize));
        }
        Ok(BraidWord(gens))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when no index-3 letter occurs.
    pub fn is_three_braid(&self) -> bool {
        self.0.iter().all(|g| g.index != 3)
    }

    /// Letters in reverse order, signs kept.
    pub fn reversed(&self) -> Self {
        BraidWord(self.0.iter().rev().cloned().collect())
    }

    /// The group inverse: reverse order, negate signs.
    pub fn inverse(&self) -> Self {
        BraidWord(self.0.iter().rev().map(|g| g.inverse()).collect())
    }

    /// Exchange indices 1 ↔ 2 throughout; 3-braid words only.
    pub fn flipped(&self) -> Result<Self, BraidError> {
        self.0
            .iter()
            .map(|g| g.flipped())
            .collect::<Result<Vec<_>, _>>()
            .map(BraidWord)
    }

    pub fn concat(&self, other: &BraidWord) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        BraidWord(v)
    }

    /// Where each strand entering at left position p (1-based) exits on
    /// the right: `perm[p-1]`.
    pub fn permutation(&self) -> [u8; 4] {
        let mut at_pos = [1u8, 2, 3, 4];
        for g in &self.0 {
            at_pos.swap(g.index as usize - 1, g.index as usize);
        }
        let mut perm = [0u8; 4];
        for (pos, &strand) in at_pos.iter().enumerate() {
            perm[strand as usize - 1] = pos as u8 + 1;
        }
        perm
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for BraidWord {
    type Err = BraidError;

    /// Tokens `s1`, `s2^-1`, `s3^4` (exponents expand into letters).
    fn from_str(s: &str) -> Result<Self, BraidError> {
        let mut runs = Vec::new();
        for tok in s.split_whitespace() {
            let rest = tok
                .strip_prefix('s')
                .ok_or_else(|| BraidError::Parse(format!("bad token {tok:?}")))?;
            let (idx_str, exp) = match rest.split_once('^') {
                Some((i, e)) => (
                    i,
                    e.parse::<i32>()
                        .map_err(|_| BraidError::Parse(format!("bad exponent in {tok:?}")))?,
                ),
                None => (rest, 1),
            };
            let index: u8 = idx_str
                .parse()
                .map_err(|_| BraidError::Parse(format!("bad index in {tok:?}")))?;
            runs.push((index, exp));
        }
        BraidWord::from_runs(&runs)
    }
}

/// Which end of the word a move acts on.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum End {
    Left,
    Right,
}

/// A 4-plat diagram `[left| word |right]` with closures in {1,2}.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PlatDiagram {
    left: u8,
    right: u8,
    word: BraidWord,
}

/// Legal curl pairs for the B1 move: an end letter with this index is
/// removable against a closure of this flavor.
const CURL_PAIRS: [(u8, u8); 3] = [(1, 2), (2, 1), (3, 2)];

fn cap_pairs(flavor: u8) -> [(u8, u8); 2] {
    match flavor {
        1 => [(2, 3), (1, 4)],
        _ => [(1, 2), (3, 4)],
    }
}

impl PlatDiagram {
    pub fn new(left: u8, right: u8, word: BraidWord) -> Result<Self, BraidError> {
        if !(1..=2).contains(&left) || !(1..=2).contains(&right) {
            return Err(BraidError::Parse(format!("closure out of range: {left}, {right}")));
        }
        Ok(PlatDiagram { left, right, word })
    }

    pub fn left_closure(&self) -> u8 {
        self.left
    }

    pub fn right_closure(&self) -> u8 {
        self.right
    }

    pub fn word(&self) -> &BraidWord {
        &self.word
    }

    pub fn crossing_count(&self) -> usize {
        self.word.len()
    }

    /// Number of components of the closed-up link (1 or 2), by tracing
    /// the four strands through the caps.
    pub fn component_count(&self) -> u8 {
        let perm = self.word.permutation();
        // Endpoints 0..4 = left positions, 4..8 = right positions.
        let mut next = [usize::MAX; 8];
        let link = |a: usize, b: usize, next: &mut [usize; 8]| {
            next[a] = b;
            next[b] = a;
        };
        let mut cap_adj = [usize::MAX; 8];
        for (a, b) in cap_pairs(self.left) {
            link(a as usize - 1, b as usize - 1, &mut cap_adj);
        }
        for (a, b) in cap_pairs(self.right) {
            link(a as usize + 3, b as usize + 3, &mut cap_adj);
        }
        for p in 0..4 {
            link(p, perm[p] as usize + 3, &mut next);
        }
        let mut seen = [false; 8];
        let mut components = 0;
        for start in 0..8 {
            if seen[start] {
                continue;
            }
            components += 1;
            let mut at = start;
            let mut via_cap = true;
            loop {
                seen[at] = true;
                at = if via_cap { cap_adj[at] } else { next[at] };
                via_cap = !via_cap;
                if at == start && via_cap {
                    break;
                }
            }
        }
        components
    }

    /// Whether the underlying 4-valent projection (strands, crossings,
    /// caps) is a single connected piece.  A disconnected shadow presents
    /// a split link.
    pub fn shadow_is_connected(&self) -> bool {
        let mut parent = [0usize, 1, 2, 3];
        fn find(parent: &mut [usize; 4], x: usize) -> usize {
            if parent[x] != x {
                parent[x] = find(parent, parent[x]);
            }
            parent[x]
        }
        let union = |a: usize, b: usize, parent: &mut [usize; 4]| {
            let (ra, rb) = (find(parent, a), find(parent, b));
            parent[ra] = rb;
        };
        let mut at_pos = [0usize, 1, 2, 3];
        for g in &self.word.0 {
            let k = g.index as usize - 1;
            union(at_pos[k], at_pos[k + 1], &mut parent);
            at_pos.swap(k, k + 1);
        }
        for (a, b) in cap_pairs(self.left) {
            union(a as usize - 1, b as usize - 1, &mut parent);
        }
        for (a, b) in cap_pairs(self.right) {
            union(at_pos[a as usize - 1], at_pos[b as usize - 1], &mut parent);
        }
        let root = find(&mut parent, 0);
        (1..4).all(|s| find(&mut parent, s) == root)
    }
}

impl fmt::Display for PlatDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}| {} |{}]", self.left, self.word, self.right)
    }
}

impl FromStr for PlatDiagram {
    type Err = BraidError;

    fn from_str(s: &str) -> Result<Self, BraidError> {
        let s = s.trim();
        let inner = s
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| BraidError::Parse(format!("not a plat: {s:?}")))?;
        let first = inner.find('|');
        let last = inner.rfind('|');
        let (Some(a), Some(b)) = (first, last) else {
            return Err(BraidError::Parse(format!("not a plat: {s:?}")));
        };
        if a == b {
            return Err(BraidError::Parse(format!("not a plat: {s:?}")));
        }
        let left: u8 = inner[..a]
            .trim()
            .parse()
            .map_err(|_| BraidError::Parse(format!("bad left closure in {s:?}")))?;
        let right: u8 = inner[b + 1..]
            .trim()
            .parse()
            .map_err(|_| BraidError::Parse(format!("bad right closure in {s:?}")))?;
        let word: BraidWord = inner[a + 1..b].parse()?;
        PlatDiagram::new(left, right, word)
    }
}

/// One of the seven diagram moves, with enough location data to apply it
/// deterministically.  The crossing-reducing B moves come in both
/// directions so orbits can be explored in either.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Move {
    /// Swap the letter at `pos` between index 1 and index 3.
    A1 { pos: usize },
    /// Reverse the word andswap the two closures.
    A2,
    /// Flip a 3-braid word (1 ↔ 2) and toggle both closures.
    A3,
    /// Right-end exchange: `… σ1^e |1]` ↔ `… σ2^-e |2]`.
    A4,
    /// Remove a curl: an end letter whose (index, closure) is legal.
    B1Remove { end: End },
    /// Insert a curl letter at an end (inverse of B1Remove).
    B1Insert { end: End, gen: Generator },
    /// Cancel the adjacent pair `σk^e σk^-e` at (pos, pos+1).
    B2Remove { pos: usize },
    /// Insert `g g^-1` at `pos` (inverse of B2Remove).
    B2Insert { pos: usize, gen: Generator },
    /// Rewrite the same-sign pair at (pos, pos+1): `σ1^e σ2^e → σ2^-e` or
    /// `σ2^e σ1^e → σ1^-e`, flipping the tail and toggling the right
    /// closure.
    B3Reduce { pos: usize },
    /// Inverse of B3Reduce, expanding the letter at `pos` into a pair.
    B3Expand { pos: usize },
}

/// Apply one move; `PatternMismatch` if its precondition fails at the
/// stated location.  Every move preserves the link type of the closure.
pub fn apply_move(d: &PlatDiagram, m: Move) -> Result<PlatDiagram, BraidError> {
    let word = &d.word.0;
    match m {
        Move::A1 { pos } => {
            let g = *word.get(pos).ok_or(BraidError::PatternMismatch("no letter at pos"))?;
            let new_index = match g.index {
                1 => 3,
                3 => 1,
                _ => return Err(BraidError::PatternMismatch("A1 needs index 1 or 3")),
            };
            let mut w = word.clone();
            w[pos] = Generator { index: new_index, sign: g.sign };
            Ok(PlatDiagram { left: d.left, right: d.right, word: BraidWord(w) })
        }
        Move::A2 => Ok(PlatDiagram {
            left: d.right,
            right: d.left,
            word: d.word.reversed(),
        }),
        Move::A3 => {
            let word = d
                .word
                .flipped()
                .map_err(|_| BraidError::PatternMismatch("A3 needs a 3-braid word"))?;
            Ok(PlatDiagram { left: 3 - d.left, right: 3 - d.right, word })
        }
        Move::A4 => {
            let g = *word.last().ok_or(BraidError::PatternMismatch("A4 needs a last letter"))?;
            let (new_last, new_right) = match (g.index, d.right) {
                (1, 1) => (Generator { index: 2, sign: -g.sign }, 2),
                (2, 2) => (Generator { index: 1, sign: -g.sign }, 1),
                _ => return Err(BraidError::PatternMismatch("A4 end/closure mismatch")),
            };
            let mut w = word.clone();
            *w.last_mut().unwrap() = new_last;
            Ok(PlatDiagram { left: d.left, right: new_right, word: BraidWord(w) })
        }
        Move::B1Remove { end } => {
            let (g, closure) = match end {
                End::Left => (word.first(), d.left),
                End::Right => (word.last(), d.right),
            };
            let g = g.ok_or(BraidError::PatternMismatch("empty word"))?;
            if !CURL_PAIRS.contains(&(g.index, closure)) {
                return Err(BraidError::PatternMismatch("end letter is not a curl"));
            }
            let mut w = word.clone();
            match end {
                End::Left => {
                    w.remove(0);
                }
                End::Right => {
                    w.pop();
                }
            }
            Ok(PlatDiagram { left: d.left, right: d.right, word: BraidWord(w) })
        }
        Move::B1Insert { end, gen } => {
            let closure = match end {
                End::Left => d.left,
                End::Right => d.right,
            };
            if !CURL_PAIRS.contains(&(gen.index, closure)) {
                return Err(BraidError::PatternMismatch("letter would not be a curl"));
            }
            let mut w = word.clone();
            match end {
                End::Left => w.insert(0, gen),
                End::Right => w.push(gen),
            }
            Ok(PlatDiagram { left: d.left, right: d.right, word: BraidWord(w) })
        }
        Move::B2Remove { pos } => {
            if pos + 1 >= word.len() {
                return Err(BraidError::PatternMismatch("no pair at pos"));
            }
            let (g, h) = (word[pos], word[pos + 1]);
            if g.index != h.index || g.sign != -h.sign {
                return Err(BraidError::PatternMismatch("pair does not cancel"));
            }
            let mut w = word.clone();
            w.drain(pos..pos + 2);
            Ok(PlatDiagram { left: d.left, right: d.right, word: BraidWord(w) })
        }
        Move::B2Insert { pos, gen } => {
            if pos > word.len() {
                return Err(BraidError::PatternMismatch("pos beyond word"));
            }
            let mut w = word.clone();
            w.insert(pos, gen.inverse());
            w.insert(pos, gen);
            Ok(PlatDiagram { left: d.left, right: d.right, word: BraidWord(w) })
        }
        Move::B3Reduce { pos } => {
            if pos + 1 >= word.len() {
                return Err(BraidError::PatternMismatch("no pair at pos"));
            }
            let (g, h) = (word[pos], word[pos + 1]);
            if g.sign != h.sign {
                return Err(BraidError::PatternMismatch("pair signs differ"));
            }
            let merged_index = match (g.index, h.index) {
                (1, 2) => 2,
                (2, 1) => 1,
                _ => return Err(BraidError::PatternMismatch("pair is not s1 s2 or s2 s1")),
            };
            let tail = BraidWord(word[pos + 2..].to_vec());
            let tail = tail
                .flipped()
                .map_err(|_| BraidError::PatternMismatch("B3 tail must be a 3-braid"))?;
            let mut w = word[..pos].to_vec();
            w.push(Generator { index: merged_index, sign: -g.sign });
            w.extend_from_slice(&tail.0);
            Ok(PlatDiagram { left: d.left, right: 3 - d.right, word: BraidWord(w) })
        }
        Move::B3Expand { pos } => {
            let g = *word.get(pos).ok_or(BraidError::PatternMismatch("no letter at pos"))?;
            let pair = match g.index {
                // σ2^s came from σ1^-s σ2^-s; σ1^s came from σ2^-s σ1^-s.
                2 => [
                    Generator { index: 1, sign: -g.sign },
                    Generator { index: 2, sign: -g.sign },
                ],
                1 => [
                    Generator { index: 2, sign: -g.sign },
                    Generator { index: 1, sign: -g.sign },
                ],
                _ => return Err(BraidError::PatternMismatch("cannot expand an s3 letter")),
            };
            let tail = BraidWord(word[pos + 1..].to_vec());
            let tail = tail
                .flipped()
                .map_err(|_| BraidError::PatternMismatch("B3 tail must be a 3-braid"))?;
            let mut w = word[..pos].to_vec();
            w.extend_from_slice(&pair);
            w.extend_from_slice(&tail.0);
            Ok(PlatDiagram { left: d.left, right: 3 - d.right, word: BraidWord(w) })
        }
    }
}

/// The reduced alternating closure of a 3-braid word: a twist sequence
/// (a_1, …, a_n), all nonzero with a common sign, whose diagram is
/// `σ1^(a1) σ2^(-a2) σ1^(a3) …` — minimal-crossing for its link.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConwayForm {
    diagram: PlatDiagram,
    conway: Vec<i32>,
}

impl ConwayForm {
    /// The reduced diagram (left closure always 1).
    pub fn diagram(&self) -> &PlatDiagram {
        &self.diagram
    }

    /// The twist integers a_i.
    pub fn integers(&self) -> &[i32] {
        &self.conway
    }

    pub fn crossing_count(&self) -> usize {
        self.diagram.crossing_count()
    }
}

impl fmt::Display for ConwayForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C(")?;
        for (i, a) in self.conway.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ") as {}", self.diagram)
    }
}

/// Build the standard plat of a twist sequence: word `σ1^(a1) σ2^(-a2) …`
/// with left closure 1 and right closure 1 (odd length) or 2 (even).
pub fn conway_plat(seq: &[i32]) -> Result<PlatDiagram, BraidError> {
    let runs: Vec<(u8, i32)> = seq
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if i % 2 == 0 {
                (1u8, a)
            } else {
                (2u8, -a)
            }
        })
        .collect();
    let word = BraidWord::from_runs(&runs)?;
    let right = if seq.len() % 2 == 1 { 1 } else { 2 };
    PlatDiagram::new(1, right, word)
}

/// Find the first applicable crossing-reducing move, scanning B2, B1,
/// then B3 (any fixed order terminates: each strictly shrinks the word).
fn first_b_move(d: &PlatDiagram) -> Option<Move> {
    let w = &d.word.0;
    for pos in 0..w.len().saturating_sub(1) {
        if w[pos].index == w[pos + 1].index && w[pos].sign == -w[pos + 1].sign {
            return Some(Move::B2Remove { pos });
        }
    }
    if let Some(g) = w.first() {
        if CURL_PAIRS.contains(&(g.index, d.left)) {
            return Some(Move::B1Remove { end: End::Left });
        }
    }
    if let Some(g) = w.last() {
        if CURL_PAIRS.contains(&(g.index, d.right)) {
            return Some(Move::B1Remove { end: End::Right });
        }
    }
    for pos in 0..w.len().saturating_sub(1) {
        let (g, h) = (w[pos], w[pos + 1]);
        if g.sign == h.sign && matches!((g.index, h.index), (1, 2) | (2, 1)) {
            return Some(Move::B3Reduce { pos });
        }
    }
    None
}

/// Reduce a diagram to its normal form: replace every index-3 letter by
/// index 1 (A1), exhaust the B moves, then flip once (A3) if needed so
/// the left closure is 1.  The result is reduced alternating and hence
/// minimal-crossing for the link.
pub fn conway_normal_form(d: &PlatDiagram) -> ConwayForm {
    let mut word = d.word.clone();
    for g in &mut word.0 {
        if g.index == 3 {
            g.index = 1;
        }
    }
    let mut cur = PlatDiagram { left: d.left, right: d.right, word };
    while let Some(m) = first_b_move(&cur) {
        cur = apply_move(&cur, m).expect("scanned move must apply");
    }
    if cur.left == 2 {
        cur = apply_move(&cur, Move::A3).expect("word is a 3-braid after the A1 pass");
        debug_assert!(first_b_move(&cur).is_none(), "A3 preserves reducedness");
    }
    let conway = extract_twists(&cur);
    ConwayForm { diagram: cur, conway }
}

/// Read the twist integers off a reduced diagram with left closure 1.
fn extract_twists(d: &PlatDiagram) -> Vec<i32> {
    let mut runs: Vec<(u8, i32)> = Vec::new();
    for g in &d.word.0 {
        match runs.last_mut() {
            Some((index, exp)) if *index == g.index && exp.signum() == g.sign as i32 => {
                *exp += g.sign as i32;
            }
            _ => runs.push((g.index, g.sign as i32)),
        }
    }
    let mut conway = Vec::with_capacity(runs.len());
    for (i, &(index, exp)) in runs.iter().enumerate() {
        let expected = if i % 2 == 0 { 1 } else { 2 };
        assert_eq!(
            index, expected,
            "reduced word must alternate s1/s2 runs starting with s1: {d}"
        );
        let a = if i % 2 == 0 { exp } else { -exp };
        conway.push(a);
    }
    assert!(
        conway.windows(2).all(|p| p[0].signum() == p[1].signum()),
        "reduced twists must share one sign: {d}"
    );
    conway
}

/// A 2-bridge link as a fraction α/β with α ≥ 1, gcd(α, |β|) = 1 and
/// −α < β < α.  Two fractions describe the same (unoriented, chirality-
/// sensitive) link exactly when α agrees and β′ ≡ β or β′β ≡ 1 (mod α);
/// the mirror is β ↦ −β.
#[derive(Clone, Copy, Debug)]
pub struct TwoBridgeFraction {
    alpha: u64,
    beta: i64,
}

impl TwoBridgeFraction {
    fn normalized(alpha: i128, beta: i128) -> Self {
        let (alpha, beta) = if alpha < 0 { (-alpha, -beta) } else { (alpha, beta) };
        debug_assert!(alpha > 1 && beta.unsigned_abs() < alpha.unsigned_abs());
        debug_assert_eq!(gcd(alpha as u64, beta.unsigned_abs() as u64), 1);
        TwoBridgeFraction { alpha: alpha as u64, beta: beta as i64 }
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn beta(&self) -> i64 {
        self.beta
    }

    /// The link determinant equals α.
    pub fn determinant(&self) -> u64 {
        self.alpha
    }

    /// 1 component for odd α, 2 for even.
    pub fn components(&self) -> u8 {
        if self.alpha % 2 == 0 {
            2
        } else {
            1
        }
    }

    pub fn mirror(&self) -> Self {
        TwoBridgeFraction { alpha: self.alpha, beta: -self.beta }
    }

    /// Canonical identifier (α, min(β, β⁻¹) mod α) of the link type.
    pub fn canonical_key(&self) -> (u64, u64) {
        let alpha = self.alpha as i128;
        let b = (self.beta as i128).rem_euclid(alpha) as u64;
        let binv = mod_inverse(b, self.alpha).expect("β invertible mod α");
        (self.alpha, b.min(binv))
    }
}

impl PartialEq for TwoBridgeFraction {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_key() == other.canonical_key()
    }
}

impl Eq for TwoBridgeFraction {}

impl std::hash::Hash for TwoBridgeFraction {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.canonical_key().hash(state);
    }
}

impl PartialOrd for TwoBridgeFraction {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TwoBridgeFraction {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.canonical_key().cmp(&other.canonical_key())
    }
}

impl fmt::Display for TwoBridgeFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.alpha, self.beta)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn mod_inverse(b: u64, alpha: u64) -> Option<u64> {
    if alpha == 1 {
        return Some(0);
    }
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (alpha as i128, b as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(alpha as i128) as u64)
}

/// The link type of a plat closure.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum LinkType {
    Unknot,
    TwoComponentUnlink,
    Prime(TwoBridgeFraction),
    /// Connected sum of at least two prime 2-bridge factors (sorted).
    ConnectedSum(Vec<TwoBridgeFraction>),
}

impl LinkType {
    /// Assemble from prime factors: none → Unknot, one → Prime.
    pub fn connected_sum(mut factors: Vec<TwoBridgeFraction>) -> LinkType {
        factors.sort();
        match factors.len() {
            0 => LinkType::Unknot,
            1 => LinkType::Prime(factors.pop().unwrap()),
            _ => LinkType::ConnectedSum(factors),
        }
    }
}

impl fmt::Display for LinkType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkType::Unknot => write!(f, "unknot"),
            LinkType::TwoComponentUnlink => write!(f, "2-component unlink"),
            LinkType::Prime(frac) => write!(f, "2-bridge {frac}"),
            LinkType::ConnectedSum(parts) => {
                write!(f, "connected sum of ")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " # ")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

/// Evaluate a normal form to its fraction: α/β is the continued fraction
/// a_n + 1/(a_{n-1} + 1/(… + 1/a_1)), computed as (α,β) ← (aα+β, α) from
/// (a_1, 1).  Even-length sequences close with the flavor-2 cap, which
/// mirrors the diagram relative to the odd-length convention, so β is
/// negated there — this is exactly what makes the value invariant under
/// the A4 end exchange (peeling `σ1^±` into `σ2^∓` appends a twist whose
/// raw fraction is the mirror image).  α = 1 means the closure is the
/// unknot; the empty form is resolved by tracing its closures.
pub fn two_bridge_fraction(c: &ConwayForm) -> Result<LinkType, BraidError> {
    if c.conway.is_empty() {
        return Ok(match c.diagram.component_count() {
            1 => LinkType::Unknot,
            _ => LinkType::TwoComponentUnlink,
        });
    }
    let mut alpha: i128 = c.conway[0] as i128;
    let mut beta: i128 = 1;
    for &a in &c.conway[1..] {
        let next = (a as i128)
            .checked_mul(alpha)
            .and_then(|x| x.checked_add(beta))
            .ok_or(BraidError::Overflow)?;
        beta = alpha;
        alpha = next;
    }
    if alpha.unsigned_abs() == 1 {
        return Ok(LinkType::Unknot);
    }
    if c.conway.len() % 2 == 0 {
        beta = -beta;
    }
    Ok(LinkType::Prime(TwoBridgeFraction::normalized(alpha, beta)))
}

/// Full classification of a plat diagram's closure.
pub fn classify_plat(d: &PlatDiagram) -> Result<LinkType, BraidError> {
    two_bridge_fraction(&conway_normal_form(d))
}

/// The guaranteed unknotting word of a nontrivial normal form `[i w |j]`:
/// split w = w₁w₂ at the first letter and take w₀ = w₁⁻¹w₂⁻¹, which
/// cancels every crossing when inserted at the split.  When the fully
/// cancelled closure `[i| |j]` would be the 2-component unlink instead of
/// the unknot, drop the w₁⁻¹ half so one end crossing survives.  Either
/// way |w₀| is at most the crossing number.
pub fn unknotting_word(c: &ConwayForm) -> Result<BraidWord, BraidError> {
    match two_bridge_fraction(c)? {
        LinkType::Unknot | LinkType::TwoComponentUnlink => return Err(BraidError::TrivialInput),
        _ => {}
    }
    let w = &c.diagram.word;
    debug_assert!(w.len() >= 2, "nontrivial forms have at least two crossings");
    let w1 = BraidWord(w.0[..1].to_vec());
    let w2 = BraidWord(w.0[1..].to_vec());
    let cancelled = PlatDiagram {
        left: c.diagram.left,
        right: c.diagram.right,
        word: BraidWord::empty(),
    };
    if cancelled.component_count() == 1 {
        Ok(w1.inverse().concat(&w2.inverse()))
    } else {
        Ok(w2.inverse())
    }
}

/// Which transform of the candidate word an insertion used.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Variant {
    Original,
    Reversed,
    Flipped,
    FlippedReversed,
}

impl Variant {
    pub const ALL: [Variant; 4] =
        [Variant::Original, Variant::Reversed, Variant::Flipped, Variant::FlippedReversed];

    pub fn apply(&self, w: &BraidWord) -> Result<BraidWord, BraidError> {
        match self {
            Variant::Original => Ok(w.clone()),
            Variant::Reversed => Ok(w.reversed()),
            Variant::Flipped => w.flipped(),
            Variant::FlippedReversed => w.flipped().map(|v| v.reversed()),
        }
    }
}

/// A successful unknotting insertion: placing `word` between positions
/// `position-1` and `position` of the diagram's word yields an unknot.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Insertion {
    pub position: usize,
    pub variant: Variant,
    pub word: BraidWord,
}

/// Splice a word into the diagram at `pos` (0 ≤ pos ≤ len).
pub fn insert_word(d: &PlatDiagram, w: &BraidWord, pos: usize) -> PlatDiagram {
    let mut letters = d.word.0[..pos].to_vec();
    letters.extend_from_slice(&w.0);
    letters.extend_from_slice(&d.word.0[pos..]);
    PlatDiagram { left: d.left, right: d.right, word: BraidWord(letters) }
}

/// Search interior insertion positions (both flanks nonempty) for one of
/// the four transforms of `w0` that unknots the diagram.  For a diagram
/// of the link `w0` was built for, this is guaranteed to succeed, so
/// `NotFound` signals a bug.
pub fn find_unknotting_insertion(
    d: &PlatDiagram,
    w0: &BraidWord,
) -> Result<Insertion, BraidError> {
    match classify_plat(d)? {
        LinkType::Unknot | LinkType::TwoComponentUnlink => return Err(BraidError::TrivialInput),
        _ => {}
    }
    let mut variants: Vec<(Variant, BraidWord)> = Vec::new();
    for v in Variant::ALL {
        if let Ok(word) = v.apply(w0) {
            if !variants.iter().any(|(_, w)| *w == word) {
                variants.push((v, word));
            }
        }
    }
    for position in 1..d.word.len() {
        for (variant, word) in &variants {
            let candidate = insert_word(d, word, position);
            if classify_plat(&candidate)? == LinkType::Unknot {
                return Ok(Insertion { position, variant: *variant, word: word.clone() });
            }
        }
    }
    Err(BraidError::NotFound)
}

/// |determinant| of the plat's closure, via the Goeritz matrix of its
/// checkerboard coloring — an oracle independent of the move calculus.
///
/// The five horizontal gaps between/above/below the four strands are
/// checkerboard-colored by parity (gaps 1 and 3 white).  An index-k
/// crossing pinches gap k, so the white regions are the stretches of
/// gaps 1 and 3 between index-1 (resp. index-3) crossings; closure 1
/// joins the adjacent ends of gaps 1 and 3 around its inner cap.  Each
/// crossing connects two white regions with Goeritz sign -sign for
/// index 1 and 3, +sign for index 2; the reduced matrix determinant is
/// the link determinant.  A disconnected shadow is a split diagram, so
/// its determinant is 0 outright.
pub fn determinant_oracle(d: &PlatDiagram) -> u64 {
    if !d.shadow_is_connected() {
        return 0;
    }
    let n1 = d.word.0.iter().filter(|g| g.index == 1).count();
    let n3 = d.word.0.iter().filter(|g| g.index == 3).count();
    // White region nodes: gap-1 stretches 0..=n1, then gap-3 stretches.
    let g1 = |i: usize| i;
    let g3 = |i: usize| n1 + 1 + i;
    let total = n1 + n3 + 2;
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            parent[x] = find(parent, parent[x]);
        }
        parent[x]
    }
    if d.left == 1 {
        let r = find(&mut parent, g1(0));
        let s = find(&mut parent, g3(0));
        parent[r] = s;
    }
    if d.right == 1 {
        let r = find(&mut parent, g1(n1));
        let s = find(&mut parent, g3(n3));
        parent[r] = s;
    }
    // Crossings as (white, white, goeritz sign).
    let mut incidences: Vec<(usize, usize, i64)> = Vec::new();
    let (mut c1, mut c3) = (0, 0);
    for g in &d.word.0 {
        match g.index {
            1 => {
                incidences.push((g1(c1), g1(c1 + 1), -(g.sign as i64)));
                c1 += 1;
            }
            3 => {
                incidences.push((g3(c3), g3(c3 + 1), -(g.sign as i64)));
                c3 += 1;
            }
            _ => incidences.push((g1(c1), g3(c3), g.sign as i64)),
        }
    }
    // Compress to class indices.
    let mut class_of = vec![usize::MAX; total];
    let mut classes = 0;
    for x in 0..total {
        let r = find(&mut parent, x);
        if class_of[r] == usize::MAX {
            class_of[r] = classes;
            classes += 1;
        }
        class_of[x] = class_of[r];
    }
    let w = classes;
    let mut goeritz = vec![vec![0i64; w]; w];
    for &(a, b, eta) in &incidences {
        let (u, v) = (class_of[a], class_of[b]);
        if u != v {
            goeritz[u][v] -= eta;
            goeritz[v][u] -= eta;
        }
    }
    for i in 0..w {
        let off: i64 = (0..w).filter(|&j| j != i).map(|j| goeritz[i][j]).sum();
        goeritz[i][i] = -off;
    }
    // Reduced matrix: drop the last row and column.
    let m = w - 1;
    let reduced: Vec<Vec<i64>> = (0..m).map(|i| goeritz[i][..m].to_vec()).collect();
    match bareiss_i128(&reduced) {
        Some(det) => det.unsigned_abs().try_into().unwrap_or(u64::MAX),
        None => {
            let det = bareiss_bigint(&reduced);
            det.abs().to_u64().unwrap_or(u64::MAX)
        }
    }
}

/// Fraction-free integer determinant; None on i128 overflow.
fn bareiss_i128(mat: &[Vec<i64>]) -> Option<i128> {
    let n = mat.len();
    if n == 0 {
        return Some(1);
    }
    let mut m: Vec<Vec<i128>> =
        mat.iter().map(|row| row.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let pivot = (k + 1..n).find(|&i| m[i][k] != 0)?;
            // A fully zero column means determinant 0.
            m.swap(k, pivot);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[i][j]
                    .checked_mul(m[k][k])?
                    .checked_sub(m[i][k].checked_mul(m[k][j])?)?;
                m[i][j] = num / prev;
            }
        }
        prev = m[k][k];
    }
    Some(sign * m[n - 1][n - 1])
}

fn bareiss_bigint(mat: &[Vec<i64>]) -> BigInt {
    let n = mat.len();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut m: Vec<Vec<BigInt>> =
        mat.iter().map(|row| row.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::from(1);
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if m[k][k] == BigInt::from(0) {
            let Some(pivot) = (k + 1..n).find(|&i| m[i][k] != BigInt::from(0)) else {
                return BigInt::from(0);
            };
            m.swap(k, pivot);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Walk a random orbit of the diagram under the seven moves (B moves in
/// both directions), keeping the word at most `max_len` letters.  Every
/// step applies exactly one legal move, so the link type is preserved.
pub fn scramble<R: Rng + ?Sized>(
    d: &PlatDiagram,
    rng: &mut R,
    steps: usize,
    max_len: usize,
) -> PlatDiagram {
    let mut cur = d.clone();
    for _ in 0..steps {
        let m = random_move(&cur, rng, max_len);
        cur = apply_move(&cur, m).expect("sampled move must apply");
    }
    cur
}

fn random_move<R: Rng + ?Sized>(d: &PlatDiagram, rng: &mut R, max_len: usize) -> Move {
    let w = &d.word.0;
    let len = w.len();
    let three_braid = d.word.is_three_braid();
    let mut kinds: Vec<u8> = vec![1]; // A2 always applies.
    if w.iter().any(|g| g.index != 2) {
        kinds.push(0); // A1
    }
    if three_braid {
        kinds.push(2); // A3
    }
    if let Some(g) = w.last() {
        if (g.index == 1 && d.right == 1) || (g.index == 2 && d.right == 2) {
            kinds.push(3); // A4
        }
    }
    let b1_ends: Vec<End> = [End::Left, End::Right]
        .into_iter()
        .filter(|end| {
            let (g, closure) = match end {
                End::Left => (w.first(), d.left),
                End::Right => (w.last(), d.right),
            };
            g.map_or(false, |g| CURL_PAIRS.contains(&(g.index, closure)))
        })
        .collect();
    if !b1_ends.is_empty() {
        kinds.push(4);
    }
    let b2_positions: Vec<usize> = (0..len.saturating_sub(1))
        .filter(|&p| w[p].index == w[p + 1].index && w[p].sign == -w[p + 1].sign)
        .collect();
    if !b2_positions.is_empty() {
        kinds.push(5);
    }
    let b3_positions: Vec<usize> = (0..len.saturating_sub(1))
        .filter(|&p| {
            w[p].sign == w[p + 1].sign
                && matches!((w[p].index, w[p + 1].index), (1, 2) | (2, 1))
                && w[p + 2..].iter().all(|g| g.index != 3)
        })
        .collect();
    if !b3_positions.is_empty() {
        kinds.push(6);
    }
    if len + 1 <= max_len {
        kinds.push(7); // B1 insert
    }
    if len + 2 <= max_len {
        kinds.push(8); // B2 insert
    }
    let b3_expandable: Vec<usize> = if len + 1 <= max_len {
        (0..len)
            .filter(|&p| w[p].index != 3 && w[p + 1..].iter().all(|g| g.index != 3))
            .collect()
    } else {
        Vec::new()
    };
    if !b3_expandable.is_empty() {
        kinds.push(9);
    }
    match kinds[rng.gen_range(0..kinds.len())] {
        0 => {
            let candidates: Vec<usize> =
                (0..len).filter(|&p| w[p].index != 2).collect();
            Move::A1 { pos: candidates[rng.gen_range(0..candidates.len())] }
        }
        1 => Move::A2,
        2 => Move::A3,
        3 => Move::A4,
        4 => Move::B1Remove { end: b1_ends[rng.gen_range(0..b1_ends.len())] },
        5 => Move::B2Remove { pos: b2_positions[rng.gen_range(0..b2_positions.len())] },
        6 => Move::B3Reduce { pos: b3_positions[rng.gen_range(0..b3_positions.len())] },
        7 => {
            let end = [End::Left, End::Right][rng.gen_range(0..2)];
            let closure = match end {
                End::Left => d.left,
                End::Right => d.right,
            };
            let legal: Vec<u8> = CURL_PAIRS
                .iter()
                .filter(|&&(_, i)| i == closure)
                .map(|&(k, _)| k)
                .collect();
            let index = legal[rng.gen_range(0..legal.len())];
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            Move::B1Insert { end, gen: Generator::new(index, sign).unwrap() }
        }
        8 => {
            let pos = rng.gen_range(0..=len);
            let index = rng.gen_range(1..=3) as u8;
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            Move::B2Insert { pos, gen: Generator::new(index, sign).unwrap() }
        }
        _ => Move::B3Expand { pos: b3_expandable[rng.gen_range(0..b3_expandable.len())] },
    }
}
