//! Synchronous binary relations on paths.
//!
//! A pair of non-empty paths is encoded as a single path over the pair graph
//! `X$ × X$`, where `X$` adds a padding loop `$v` at each vertex. The shorter
//! coordinate is padded at its end with the loop at its target.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::automaton::{Alphabet, Automaton, Builder, PathAutomaton, StateId};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Path, Vertex};

/// A letter of the padded graph `X$`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pad {
    Edge(Edge),
    Pad(Vertex),
}

impl Pad {
    pub fn edge(self) -> Option<Edge> {
        match self {
            Pad::Edge(e) => Some(e),
            Pad::Pad(_) => None,
        }
    }

    pub fn is_pad(self) -> bool {
        matches!(self, Pad::Pad(_))
    }

    fn source(self, g: &Graph) -> Vertex {
        match self {
            Pad::Edge(e) => g.source(e),
            Pad::Pad(v) => v,
        }
    }

    fn target(self, g: &Graph) -> Vertex {
        match self {
            Pad::Edge(e) => g.target(e),
            Pad::Pad(v) => v,
        }
    }
}

pub type PairLetter = (Pad, Pad);

/// `X$ × X$` over a base graph.
#[derive(Debug, PartialEq)]
pub struct PairGraph {
    base: Arc<Graph>,
}

impl PairGraph {
    pub fn new(base: Arc<Graph>) -> Self {
        PairGraph { base }
    }

    pub fn base(&self) -> &Arc<Graph> {
        &self.base
    }

    fn padded_out(&self, v: Vertex) -> Vec<Pad> {
        let mut out: Vec<Pad> = self.base.out_edges(v).iter().map(|&e| Pad::Edge(e)).collect();
        out.push(Pad::Pad(v));
        out
    }

    /// `"$:<vertex>"` for padding, the edge id otherwise.
    pub fn pad_name(&self, p: Pad) -> String {
        match p {
            Pad::Edge(e) => String::from(self.base.edge_id(e)),
            Pad::Pad(v) => format!("$:{}", self.base.vertex_id(v)),
        }
    }

    pub fn parse_pad(&self, s: &str) -> Result<Pad> {
        match s.strip_prefix("$:") {
            Some(v) => self
                .base
                .vertex(v)
                .map(Pad::Pad)
                .ok_or_else(|| Error::UnknownVertex(String::from(v))),
            None => self
                .base
                .edge(s)
                .map(Pad::Edge)
                .ok_or_else(|| Error::UnknownEdge(String::from(s))),
        }
    }
}

impl Alphabet for PairGraph {
    type Letter = PairLetter;
    type Vertex = (Vertex, Vertex);

    fn source(&self, (a, b): PairLetter) -> (Vertex, Vertex) {
        (a.source(&self.base), b.source(&self.base))
    }

    fn target(&self, (a, b): PairLetter) -> (Vertex, Vertex) {
        (a.target(&self.base), b.target(&self.base))
    }

    fn vertex_list(&self) -> Vec<(Vertex, Vertex)> {
        let vs: Vec<Vertex> = self.base.vertices().collect();
        vs.iter().flat_map(|&u| vs.iter().map(move |&v| (u, v))).collect()
    }

    fn letters_from(&self, (u, v): (Vertex, Vertex)) -> Vec<PairLetter> {
        let right = self.padded_out(v);
        self.padded_out(u)
            .into_iter()
            .flat_map(|a| right.iter().map(move |&b| (a, b)))
            .collect()
    }
}

/// The padded convolution of two non-empty paths.
pub fn convolve(a: &Path, b: &Path) -> Result<Vec<PairLetter>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyPath);
    }
    let n = a.len().max(b.len());
    let side = |p: &Path, i: usize| match p.edges().get(i) {
        Some(&e) => Pad::Edge(e),
        None => Pad::Pad(p.target()),
    };
    Ok((0..n).map(|i| (side(a, i), side(b, i))).collect())
}

/// Inverse of [`convolve`]; rejects words outside its image.
pub fn deconvolve(graph: &Graph, word: &[PairLetter]) -> Result<(Path, Path)> {
    if word.is_empty() {
        return Err(Error::InvalidPaddedWord("empty word"));
    }
    if word[0].0.is_pad() || word[0].1.is_pad() {
        return Err(Error::InvalidPaddedWord("a coordinate is empty"));
    }
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (i, &(a, b)) in word.iter().enumerate() {
        if a.is_pad() && b.is_pad() {
            return Err(Error::InvalidPaddedWord("both coordinates padded"));
        }
        for (p, out) in [(a, &mut left), (b, &mut right)] {
            match p {
                Pad::Edge(e) => {
                    if out.len() != i {
                        return Err(Error::InvalidPaddedWord("padding is not trailing"));
                    }
                    out.push(e);
                }
                Pad::Pad(v) => {
                    let last = *out.last().unwrap_or(&Edge(u32::MAX));
                    if last.0 == u32::MAX || graph.target(last) != v {
                        return Err(Error::InvalidPaddedWord("padding letter at the wrong vertex"));
                    }
                }
            }
        }
    }
    let l = Path::from_edges(graph, left).map_err(|_| Error::InvalidPaddedWord("not a path"))?;
    let r = Path::from_edges(graph, right).map_err(|_| Error::InvalidPaddedWord("not a path"))?;
    Ok((l, r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Phase {
    Start,
    Sync,
    LeftPadded,
    RightPadded,
}

impl Phase {
    fn step(self, (a, b): PairLetter) -> Option<Phase> {
        match (self, a.is_pad(), b.is_pad()) {
            (_, true, true) => None,
            (Phase::Start | Phase::Sync, false, false) => Some(Phase::Sync),
            (Phase::Sync | Phase::LeftPadded, true, false) => Some(Phase::LeftPadded),
            (Phase::Sync | Phase::RightPadded, false, true) => Some(Phase::RightPadded),
            _ => None,
        }
    }
}

/// Intersects with the set of valid padded convolutions. The pad vertex is
/// enforced by the typing of the pair graph, so only the phase is tracked.
fn restrict_valid(aut: &Automaton<PairGraph>) -> Automaton<PairGraph> {
    let mut b = Builder::new(Arc::clone(aut.alphabet()));
    let mut index: BTreeMap<(StateId, Phase), StateId> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for &s in aut.starts() {
        let id = b.add_state(aut.label(s));
        b.set_start(id);
        index.insert((s, Phase::Start), id);
        queue.push_back((s, Phase::Start));
    }
    while let Some((s, ph)) = queue.pop_front() {
        let from = index[&(s, ph)];
        if ph != Phase::Start && aut.is_terminal(s) {
            b.set_terminal(from);
        }
        for &(l, t) in aut.transitions(s) {
            let Some(ph2) = ph.step(l) else { continue };
            let to = *index.entry((t, ph2)).or_insert_with(|| {
                queue.push_back((t, ph2));
                b.add_state(aut.label(t))
            });
            b.add_transition(from, l, to);
        }
    }
    b.finish()
}

/// A synchronously regular relation on non-empty paths.
#[derive(Clone, Debug)]
pub struct SyncRelation {
    aut: Automaton<PairGraph>,
}

impl SyncRelation {
    /// Wraps an automaton, discarding any words that are not valid
    /// convolutions.
    pub fn from_automaton(aut: Automaton<PairGraph>) -> Self {
        SyncRelation {
            aut: restrict_valid(&aut),
        }
    }

    /// Wraps an automaton whose language is known to be valid.
    fn trusted(aut: Automaton<PairGraph>) -> Self {
        SyncRelation { aut }
    }

    /// Whether every accepted word of `aut` is a valid convolution.
    pub fn is_valid_automaton(aut: &Automaton<PairGraph>) -> bool {
        aut.empty_vertices().is_empty()
            && aut.difference(&restrict_valid(aut)).map(|d| d.is_empty()).unwrap_or(false)
    }

    pub fn empty(base: Arc<Graph>) -> Self {
        SyncRelation::trusted(Automaton::empty_language(Arc::new(PairGraph::new(base))))
    }

    pub fn from_pairs<'a, I>(base: Arc<Graph>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a Path, &'a Path)>,
    {
        let alphabet = Arc::new(PairGraph::new(base));
        let words = pairs
            .into_iter()
            .map(|(a, b)| convolve(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(SyncRelation::trusted(Automaton::from_words(
            alphabet,
            words.iter().map(Vec::as_slice),
        )))
    }

    pub fn automaton(&self) -> &Automaton<PairGraph> {
        &self.aut
    }

    pub fn base(&self) -> &Arc<Graph> {
        self.aut.alphabet().base()
    }

    pub fn pair_graph(&self) -> &Arc<PairGraph> {
        self.aut.alphabet()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.base() == other.base() {
            Ok(())
        } else {
            Err(Error::GraphMismatch)
        }
    }

    pub fn contains(&self, a: &Path, b: &Path) -> bool {
        convolve(a, b).map(|w| self.aut.accepts_word(&w)).unwrap_or(false)
    }

    /// Pairs with both coordinates of length at most `max_len`, ordered by
    /// first coordinate then second (each by length, then edge ids).
    pub fn enumerate(&self, max_len: usize) -> Vec<(Path, Path)> {
        let mut out: Vec<(Path, Path)> = self
            .aut
            .enumerate(max_len)
            .iter()
            .filter_map(|w| deconvolve(self.base(), w).ok())
            .collect();
        out.sort_by(|x, y| {
            (x.0.len(), x.0.edges(), x.1.len(), x.1.edges()).cmp(&(y.0.len(), y.0.edges(), y.1.len(), y.1.edges()))
        });
        out
    }

    pub fn is_empty(&self) -> bool {
        self.aut.is_empty()
    }

    pub fn equivalent(&self, other: &Self) -> Result<bool> {
        self.aut.equivalent(&other.aut)
    }

    pub fn minimize(&self) -> Self {
        SyncRelation::trusted(self.aut.minimize())
    }

    pub fn inverse(&self) -> Self {
        let alphabet = Arc::clone(self.aut.alphabet());
        SyncRelation::trusted(self.aut.map(alphabet, |(a, b)| Some(Some((b, a))), |(u, v)| (v, u)))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(SyncRelation::trusted(self.aut.union(&other.aut)?))
    }

    pub fn union_all<'a, I: IntoIterator<Item = &'a SyncRelation>>(base: Arc<Graph>, items: I) -> Self {
        let alphabet = Arc::new(PairGraph::new(base));
        let auts: Vec<&Automaton<PairGraph>> = items.into_iter().map(|r| &r.aut).collect();
        SyncRelation::trusted(Automaton::union_all(alphabet, auts))
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(SyncRelation::trusted(self.aut.intersection(&other.aut)?))
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(SyncRelation::trusted(self.aut.difference(&other.aut)?))
    }

    /// `K × L`, ignoring empty paths in either operand.
    pub fn product(k: &PathAutomaton, l: &PathAutomaton) -> Result<Self> {
        if k.alphabet() != l.alphabet() {
            return Err(Error::GraphMismatch);
        }
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
        enum Side {
            Run(StateId, bool),
            Done(Vertex),
        }
        fn moves(a: &PathAutomaton, s: Side) -> Vec<(Pad, Side)> {
            match s {
                Side::Run(p, started) => {
                    let mut out: Vec<(Pad, Side)> = a
                        .transitions(p)
                        .iter()
                        .map(|&(e, t)| (Pad::Edge(e), Side::Run(t, true)))
                        .collect();
                    if started && a.is_terminal(p) {
                        let v = a.label(p);
                        out.push((Pad::Pad(v), Side::Done(v)));
                    }
                    out
                }
                Side::Done(v) => alloc::vec![(Pad::Pad(v), Side::Done(v))],
            }
        }
        let vertex = |a: &PathAutomaton, s: Side| match s {
            Side::Run(p, _) => a.label(p),
            Side::Done(v) => v,
        };
        let finished = |a: &PathAutomaton, s: Side| match s {
            Side::Run(p, started) => started && a.is_terminal(p),
            Side::Done(_) => true,
        };
        let alphabet = Arc::new(PairGraph::new(Arc::clone(k.alphabet())));
        let mut b = Builder::new(alphabet);
        let mut index: BTreeMap<(Side, Side), StateId> = BTreeMap::new();
        let mut queue = VecDeque::new();
        for &p in k.starts() {
            for &q in l.starts() {
                let key = (Side::Run(p, false), Side::Run(q, false));
                let id = b.add_state((k.label(p), l.label(q)));
                b.set_start(id);
                index.insert(key, id);
                queue.push_back(key);
            }
        }
        while let Some(key) = queue.pop_front() {
            let from = index[&key];
            if finished(k, key.0) && finished(l, key.1) {
                b.set_terminal(from);
            }
            let right = moves(l, key.1);
            for (x, s2) in moves(k, key.0) {
                for &(y, t2) in &right {
                    if x.is_pad() && y.is_pad() {
                        continue;
                    }
                    let key2 = (s2, t2);
                    let to = *index.entry(key2).or_insert_with(|| {
                        queue.push_back(key2);
                        b.add_state((vertex(k, s2), vertex(l, t2)))
                    });
                    b.add_transition(from, (x, y), to);
                }
            }
        }
        Ok(SyncRelation::trusted(b.finish()))
    }

    /// `{(w, w) : w ∈ K, w non-empty}`.
    pub fn diagonal(k: &PathAutomaton) -> Self {
        let alphabet = Arc::new(PairGraph::new(Arc::clone(k.alphabet())));
        SyncRelation::trusted(
            k.without_empty()
                .map(alphabet, |e| Some(Some((Pad::Edge(e), Pad::Edge(e)))), |v| (v, v)),
        )
    }

    /// Relational composition: `(a, c)` such that `(a, b) ∈ self` and
    /// `(b, c) ∈ other` for some `b`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        // An operand that has accepted may keep reading doubly padded
        // letters while the other one finishes the middle coordinate.
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
        enum Side {
            Run(StateId),
            Ended(Vertex, Vertex),
        }
        fn label(a: &Automaton<PairGraph>, s: Side) -> (Vertex, Vertex) {
            match s {
                Side::Run(p) => a.label(p),
                Side::Ended(u, v) => (u, v),
            }
        }
        fn moves(a: &Automaton<PairGraph>, s: Side) -> Vec<(PairLetter, Side, bool)> {
            match s {
                Side::Run(p) => {
                    let mut out: Vec<_> = a.transitions(p).iter().map(|&(l, t)| (l, Side::Run(t), false)).collect();
                    if a.is_terminal(p) {
                        let (u, v) = a.label(p);
                        out.push(((Pad::Pad(u), Pad::Pad(v)), Side::Ended(u, v), true));
                    }
                    out
                }
                Side::Ended(u, v) => alloc::vec![((Pad::Pad(u), Pad::Pad(v)), s, true)],
            }
        }
        let accepting = |a: &Automaton<PairGraph>, s: Side| match s {
            Side::Run(p) => a.is_terminal(p),
            Side::Ended(..) => true,
        };
        let (r, s) = (&self.aut, &other.aut);
        let mut b = Builder::new(Arc::clone(r.alphabet()));
        let mut index: BTreeMap<(Side, Side), StateId> = BTreeMap::new();
        let mut queue = VecDeque::new();
        for &p in r.starts() {
            for &q in s.starts() {
                if r.label(p).1 == s.label(q).0 {
                    let key = (Side::Run(p), Side::Run(q));
                    let id = b.add_state((r.label(p).0, s.label(q).1));
                    b.set_start(id);
                    index.insert(key, id);
                    queue.push_back(key);
                }
            }
        }
        while let Some(key) = queue.pop_front() {
            let from = index[&key];
            if accepting(r, key.0) && accepting(s, key.1) {
                b.set_terminal(from);
            }
            let right = moves(s, key.1);
            for ((x, y), p2, virt_r) in moves(r, key.0) {
                for &((y2, z), q2, virt_s) in &right {
                    if y != y2 || (virt_r && virt_s) {
                        continue;
                    }
                    let key2 = (p2, q2);
                    let to = *index.entry(key2).or_insert_with(|| {
                        queue.push_back(key2);
                        b.add_state((label(r, p2).0, label(s, q2).1))
                    });
                    if x.is_pad() && z.is_pad() {
                        b.add_eps(from, to);
                    } else {
                        b.add_transition(from, (x, z), to);
                    }
                }
            }
        }
        Ok(SyncRelation::from_automaton(b.finish()))
    }

    /// Relabels both coordinates through a letter map into another graph.
    pub fn relabel(
        &self,
        target: Arc<Graph>,
        letter: impl Fn(Edge) -> Edge,
        vertex: impl Fn(Vertex) -> Vertex + Copy,
    ) -> Self {
        let pad = |p: Pad| match p {
            Pad::Edge(e) => Pad::Edge(letter(e)),
            Pad::Pad(v) => Pad::Pad(vertex(v)),
        };
        let alphabet = Arc::new(PairGraph::new(target));
        SyncRelation::trusted(self.aut.map(
            alphabet,
            |(a, b)| Some(Some((pad(a), pad(b)))),
            |(u, v)| (vertex(u), vertex(v)),
        ))
    }

    /// Like [`SyncRelation::relabel`], dropping pairs that use a letter the
    /// map leaves undefined.
    pub fn relabel_partial(
        &self,
        target: Arc<Graph>,
        letter: impl Fn(Edge) -> Option<Edge>,
        vertex: impl Fn(Vertex) -> Vertex + Copy,
    ) -> Self {
        let pad = |p: Pad| match p {
            Pad::Edge(e) => letter(e).map(Pad::Edge),
            Pad::Pad(v) => Some(Pad::Pad(vertex(v))),
        };
        let alphabet = Arc::new(PairGraph::new(target));
        let aut = self.aut.map(
            alphabet,
            |(a, b)| Some(Some((pad(a)?, pad(b)?))),
            |(u, v)| (vertex(u), vertex(v)),
        );
        SyncRelation::trusted(aut.trim())
    }

    /// Keeps the pairs whose coordinates lie in the given languages.
    pub fn restrict(&self, first: &PathAutomaton, second: &PathAutomaton) -> Result<Self> {
        self.intersection(&SyncRelation::product(first, second)?)
    }

    /// `{w} × L`.
    pub fn single_times(w: &[Edge], l: &PathAutomaton) -> Result<Self> {
        let single = Automaton::from_words(Arc::clone(l.alphabet()), [w]);
        SyncRelation::product(&single, l)
    }

    /// `L × {w}`.
    pub fn times_single(l: &PathAutomaton, w: &[Edge]) -> Result<Self> {
        let single = Automaton::from_words(Arc::clone(l.alphabet()), [w]);
        SyncRelation::product(l, &single)
    }

    /// First coordinates.
    pub fn project_first(&self) -> PathAutomaton {
        self.aut.map(Arc::clone(self.base()), |(a, _)| Some(a.edge()), |(u, _)| u)
    }

    /// Second coordinates.
    pub fn project_second(&self) -> PathAutomaton {
        self.aut.map(Arc::clone(self.base()), |(_, b)| Some(b.edge()), |(_, v)| v)
    }

    /// `{(u, v·f(x)) : (u, vx) ∈ self, |x| = m}`. Entries of `f` may be
    /// empty paths anchored at the window's source; windows absent from the
    /// table must not occur as suffixes of second coordinates.
    pub fn rewrite_tail(&self, m: usize, f: &BTreeMap<Vec<Edge>, Path>) -> Result<Self> {
        let multi: BTreeMap<Vec<Edge>, Vec<Path>> = f.iter().map(|(x, y)| (x.clone(), alloc::vec![y.clone()])).collect();
        self.rewrite_tail_multi(m, &multi)
    }

    /// As [`SyncRelation::rewrite_tail`], with several replacements per window.
    pub fn rewrite_tail_multi(&self, m: usize, f: &BTreeMap<Vec<Edge>, Vec<Path>>) -> Result<Self> {
        let g = Arc::clone(self.base());
        if m == 0 {
            return Err(Error::Precondition(String::from("window length must be positive")));
        }
        for (x, y) in f.iter().flat_map(|(x, ys)| ys.iter().map(move |y| (x, y))) {
            if x.len() != m || !g.is_path(x) {
                return Err(Error::EndpointViolation(g.format_path(&Path::from_edges(&g, x.clone())?)));
            }
            if y.source() != g.source(x[0]) {
                return Err(Error::EndpointViolation(g.format_path(&Path::from_edges(&g, x.clone())?)));
            }
        }
        let seconds = self.project_second();
        let any = Automaton::universal(Arc::clone(&g), true);
        for x in crate::graph::enumerate_paths(&g, m, false) {
            if x.len() != m || f.contains_key(x.edges()) {
                continue;
            }
            let ending = any.concat(&Automaton::from_words(Arc::clone(&g), [x.edges()]))?;
            if !seconds.intersection(&ending)?.is_empty() {
                return Err(Error::MissingWindow(g.format_path(&x)));
            }
        }
        let alphabet = Arc::new(PairGraph::new(Arc::clone(&g)));
        let mut b = Builder::new(alphabet);
        let mut start = BTreeMap::new();
        let mut diag = BTreeMap::new();
        for v in g.vertices() {
            let s = b.add_state((v, v));
            b.set_start(s);
            start.insert(v, s);
            diag.insert(v, b.add_state((v, v)));
        }
        for e in g.edges() {
            let l = (Pad::Edge(e), Pad::Edge(e));
            let t = diag[&g.target(e)];
            b.add_transition(start[&g.source(e)], l, t);
            b.add_transition(diag[&g.source(e)], l, t);
        }
        for (x, y) in f.iter().flat_map(|(x, ys)| ys.iter().map(move |y| (x, y))) {
            let v = g.source(x[0]);
            let xp = Path::from_edges(&g, x.clone())?;
            let mut froms = alloc::vec![diag[&v]];
            if !y.is_empty() {
                froms.push(start[&v]);
            }
            let n = m.max(y.len());
            let side = |p: &Path, i: usize| match p.edges().get(i) {
                Some(&e) => Pad::Edge(e),
                None => Pad::Pad(p.target()),
            };
            let word: Vec<PairLetter> = (0..n).map(|i| (side(&xp, i), side(y, i))).collect();
            for from in froms {
                let mut cur = from;
                for &l in &word {
                    let next = b.add_state(b.alphabet().target(l));
                    b.add_transition(cur, l, next);
                    cur = next;
                }
                b.set_terminal(cur);
            }
        }
        let t = SyncRelation::from_automaton(b.finish());
        self.compose(&t)
    }
}
