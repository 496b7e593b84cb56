//! Sliding window inverses, and the images of regular languages and
//! synchronous relations under maps that admit them.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::automaton::{Alphabet, Automaton, Builder, PathAutomaton, StateId};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Path, Vertex};
use crate::sync::{Pad, PairGraph, SyncRelation};

/// Window tables map windows (paths of length `n` in the codomain graph) to
/// paths of the domain graph. Empty outputs are anchored paths.
pub type WindowTable = BTreeMap<Vec<Edge>, Path>;

/// Pointwise evaluation of the map itself; `None` outside its domain.
pub type Evaluator = Arc<dyn Fn(&Path) -> Option<Path> + Send + Sync>;

/// A map `φ : A → Y⁺` together with a sliding window inverse `(n, f, g, h)`.
#[derive(Clone)]
pub struct SlidingWindowInverse {
    domain: Arc<Graph>,
    codomain: Arc<Graph>,
    n: usize,
    f: WindowTable,
    g: WindowTable,
    h: WindowTable,
    short: WindowTable,
    domain_aut: Option<PathAutomaton>,
    image: PathAutomaton,
    eval: Option<Evaluator>,
}

impl fmt::Debug for SlidingWindowInverse {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("SlidingWindowInverse")
            .field("n", &self.n)
            .field("f", &self.f.len())
            .field("g", &self.g.len())
            .field("h", &self.h.len())
            .field("short", &self.short.len())
            .field("image_states", &self.image.state_count())
            .finish()
    }
}

impl SlidingWindowInverse {
    /// `short` holds the preimages of image words of length at most `n`,
    /// which have no window decomposition.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        domain: Arc<Graph>,
        codomain: Arc<Graph>,
        n: usize,
        f: WindowTable,
        g: WindowTable,
        h: WindowTable,
        short: WindowTable,
        image: PathAutomaton,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSwi(String::from("window length must be positive")));
        }
        if **image.alphabet() != *codomain {
            return Err(Error::GraphMismatch);
        }
        for (name, table) in [("f", &f), ("g", &g), ("h", &h)] {
            if table.keys().any(|k| k.len() != n || !codomain.is_path(k)) {
                return Err(Error::InvalidSwi(format!("{name} has a key that is not a window")));
            }
        }
        if short.keys().any(|k| k.is_empty() || k.len() > n || !codomain.is_path(k)) {
            return Err(Error::InvalidSwi(String::from("short table key of the wrong length")));
        }
        Ok(SlidingWindowInverse {
            domain,
            codomain,
            n,
            f,
            g,
            h,
            short,
            domain_aut: None,
            image: image.trim(),
            eval: None,
        })
    }

    /// Records the domain `A` as an automaton.
    pub fn with_domain(mut self, a: PathAutomaton) -> Result<Self> {
        if **a.alphabet() != *self.domain {
            return Err(Error::GraphMismatch);
        }
        self.domain_aut = Some(a);
        Ok(self)
    }

    pub fn with_evaluator(mut self, eval: Evaluator) -> Self {
        self.eval = Some(eval);
        self
    }

    pub fn window(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &Arc<Graph> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<Graph> {
        &self.codomain
    }

    pub fn tables(&self) -> (&WindowTable, &WindowTable, &WindowTable, &WindowTable) {
        (&self.f, &self.g, &self.h, &self.short)
    }

    pub fn image(&self) -> &PathAutomaton {
        &self.image
    }

    pub fn domain_automaton(&self) -> Option<&PathAutomaton> {
        self.domain_aut.as_ref()
    }

    pub fn evaluate(&self, w: &Path) -> Option<Path> {
        self.eval.as_ref().and_then(|e| e(w))
    }

    fn lookup<'a>(&self, table: &'a WindowTable, name: &str, window: &[Edge]) -> Result<&'a Path> {
        table.get(window).ok_or_else(|| {
            let shown = Path::from_edges(&self.codomain, window.to_vec())
                .map(|p| self.codomain.format_path(&p))
                .unwrap_or_else(|_| String::from("?"));
            Error::MissingWindow(format!("{name}({shown})"))
        })
    }

    /// Output lengths of the window decomposition of `y`: the `f` window,
    /// then each `g` window, then `h`. Empty for `|y| ≤ n`.
    fn window_outputs(&self, y: &[Edge]) -> Result<Vec<&Path>> {
        let k = y.len();
        let n = self.n;
        if k <= n {
            return Ok(Vec::new());
        }
        let mut out = Vec::with_capacity(k - n + 1);
        out.push(self.lookup(&self.f, "f", &y[0..n])?);
        for m in 1..k - n {
            out.push(self.lookup(&self.g, "g", &y[m..m + n])?);
        }
        out.push(self.lookup(&self.h, "h", &y[k - n..k])?);
        Ok(out)
    }

    /// The preimage of `y` read off the tables.
    pub fn reconstruct(&self, y: &[Edge]) -> Result<Path> {
        if y.len() <= self.n {
            return self.lookup(&self.short, "short", y).cloned();
        }
        let pieces = self.window_outputs(y)?;
        let mut acc = pieces[0].clone();
        for p in &pieces[1..] {
            acc = acc.compose(p).map_err(|_| {
                Error::InvalidSwi(String::from("consecutive window outputs do not chain"))
            })?;
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, Default)]
pub struct SwiReport {
    pub checked: usize,
    /// Offending words, shortest first, with a reason.
    pub violations: Vec<(Path, String)>,
}

impl SwiReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks reconstruction and endpoint chaining on every image word up to
/// `sample_len`, and, when `φ` and `A` are known, on every domain word.
pub fn validate_swi(swi: &SlidingWindowInverse, sample_len: usize) -> SwiReport {
    let mut report = SwiReport::default();
    let cg = &swi.codomain;
    for y in swi.image.enumerate(sample_len) {
        report.checked += 1;
        let yp = Path::from_edges(cg, y.clone()).expect("automaton words are paths");
        match swi.reconstruct(&y) {
            Err(e) => report.violations.push((yp, format!("{e}"))),
            Ok(w) => {
                if w.is_empty() {
                    report.violations.push((yp, String::from("reconstructs the empty path")));
                    continue;
                }
                if let Some(a) = &swi.domain_aut {
                    if !a.accepts_word(w.edges()) {
                        report.violations.push((yp, String::from("reconstruction lies outside the domain")));
                        continue;
                    }
                }
                if swi.eval.is_some() && swi.evaluate(&w).as_ref() != Some(&yp) {
                    report.violations.push((yp, String::from("reconstruction does not map back")));
                }
            }
        }
    }
    if let (Some(a), Some(_)) = (&swi.domain_aut, &swi.eval) {
        for w in a.enumerate(sample_len) {
            report.checked += 1;
            let wp = Path::from_edges(&swi.domain, w).expect("automaton words are paths");
            let Some(y) = swi.evaluate(&wp) else {
                report.violations.push((wp, String::from("map undefined on the domain")));
                continue;
            };
            if !swi.image.accepts_word(y.edges()) {
                report.violations.push((wp, String::from("value outside the image automaton")));
                continue;
            }
            match swi.reconstruct(y.edges()) {
                Ok(back) if back == wp => {}
                Ok(_) => report.violations.push((wp, String::from("reconstruction differs"))),
                Err(e) => report.violations.push((wp, format!("{e}"))),
            }
        }
    }
    report.violations.sort_by(|a, b| (a.0.len(), a.0.edges()).cmp(&(b.0.len(), b.0.edges())));
    report
}

/// An eventually periodic map `ℕ → ℕ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Psi {
    pub prefix: Vec<usize>,
    pub period: Vec<usize>,
}

impl Psi {
    pub fn constant(c: usize) -> Self {
        Psi {
            prefix: Vec::new(),
            period: alloc::vec![c],
        }
    }

    pub fn value(&self, m: usize) -> usize {
        if m < self.prefix.len() {
            self.prefix[m]
        } else {
            self.period[(m - self.prefix.len()) % self.period.len()]
        }
    }
}

/// `ψ`, plus the amount by which a final `h` window may exceed `ψ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyncWitness {
    pub psi: Psi,
    pub h_slack: usize,
}

impl SyncWitness {
    pub fn new(psi: Psi) -> Self {
        SyncWitness { psi, h_slack: 0 }
    }
}

/// Checks the synchronisation clauses on image words up to `sample_len`.
pub fn check_sync(
    a: &SlidingWindowInverse,
    b: &SlidingWindowInverse,
    witness: &SyncWitness,
    sample_len: usize,
) -> Result<()> {
    if a.n != b.n {
        return Err(Error::Desynchronised(String::from("window lengths differ")));
    }
    if witness.psi.period.is_empty() {
        return Err(Error::Desynchronised(String::from("ψ has an empty period")));
    }
    for swi in [a, b] {
        for y in swi.image.enumerate(sample_len) {
            if y.len() <= swi.n {
                continue;
            }
            let outs = swi.window_outputs(&y)?;
            let last = outs.len() - 1;
            for (m, p) in outs.iter().enumerate() {
                let want = witness.psi.value(m);
                let ok = if m == last { p.len() <= want + witness.h_slack } else { p.len() == want };
                if !ok {
                    let yp = Path::from_edges(&swi.codomain, y.clone()).expect("automaton words are paths");
                    return Err(Error::Desynchronised(format!(
                        "window {m} of {} has output length {}, ψ gives {want}",
                        swi.codomain.format_path(&yp),
                        p.len()
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Simulation state of one coordinate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Reader {
    buf: Vec<Edge>,
    emitted: bool,
    ended: bool,
    image: BTreeSet<StateId>,
}

impl Reader {
    fn new(swi: &SlidingWindowInverse) -> Self {
        Reader {
            buf: Vec::new(),
            emitted: false,
            ended: false,
            image: swi.image.starts().iter().copied().collect(),
        }
    }

    /// Reads one letter; `None` when no image word continues this way.
    fn step(&self, swi: &SlidingWindowInverse, y: Edge) -> Result<Option<(Reader, Vec<Edge>)>> {
        let image = step_set(&swi.image, &self.image, y);
        if image.is_empty() {
            return Ok(None);
        }
        let mut next = self.clone();
        next.image = image;
        let mut out = Vec::new();
        if next.buf.len() == swi.n {
            let table = if next.emitted { (&swi.g, "g") } else { (&swi.f, "f") };
            out = swi.lookup(table.0, table.1, &next.buf)?.edges().to_vec();
            next.emitted = true;
            next.buf.remove(0);
        }
        next.buf.push(y);
        Ok(Some((next, out)))
    }

    /// Ends the word; `None` unless it is an image word.
    fn finish(&self, swi: &SlidingWindowInverse) -> Result<Option<(Reader, Vec<Edge>)>> {
        if self.buf.is_empty() || !self.image.iter().any(|&s| swi.image.is_terminal(s)) {
            return Ok(None);
        }
        let out = if self.emitted {
            swi.lookup(&swi.h, "h", &self.buf)?
        } else {
            swi.lookup(&swi.short, "short", &self.buf)?
        };
        let mut next = self.clone();
        next.ended = true;
        next.buf.clear();
        next.image.clear();
        Ok(Some((next, out.edges().to_vec())))
    }
}

fn step_set<A: Alphabet>(a: &Automaton<A>, set: &BTreeSet<StateId>, l: A::Letter) -> BTreeSet<StateId> {
    let mut out = BTreeSet::new();
    for &s in set {
        for &(m, t) in a.transitions(s) {
            if m == l {
                out.insert(t);
            }
        }
    }
    out
}

/// Subset simulation of a path automaton fed with output letters.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Feed {
    states: BTreeSet<StateId>,
    started: bool,
}

impl Feed {
    fn new<A: Alphabet>(a: &Automaton<A>) -> Self {
        Feed {
            states: a.starts().iter().copied().collect(),
            started: false,
        }
    }

    fn push<A: Alphabet>(&mut self, a: &Automaton<A>, l: A::Letter) {
        self.states = step_set(a, &self.states, l);
        self.started = true;
    }

    fn accepting<A: Alphabet>(&self, a: &Automaton<A>) -> bool {
        self.started && self.states.iter().any(|&s| a.is_terminal(s))
    }
}

/// `(L ∩ A)φ` as an automaton over the codomain graph.
pub fn image_of_regular(l: &PathAutomaton, swi: &SlidingWindowInverse) -> Result<PathAutomaton> {
    if **l.alphabet() != *swi.domain {
        return Err(Error::GraphMismatch);
    }
    let l = l.trim();
    type Key = (Vertex, Reader, Feed);
    let mut b = Builder::new(Arc::clone(&swi.codomain));
    let mut index: BTreeMap<Key, StateId> = BTreeMap::new();
    let mut queue: VecDeque<Key> = VecDeque::new();
    for v in swi.codomain.vertices() {
        let key = (v, Reader::new(swi), Feed::new(&l));
        let id = b.add_state(v);
        b.set_start(id);
        index.insert(key.clone(), id);
        queue.push_back(key);
    }
    while let Some(key) = queue.pop_front() {
        let from = index[&key];
        let (v, reader, feed) = &key;
        if let Some((_, out)) = reader.finish(swi)? {
            let mut f = feed.clone();
            for x in out {
                f.push(&l, x);
            }
            if f.accepting(&l) {
                b.set_terminal(from);
            }
        }
        for &y in swi.codomain.out_edges(*v) {
            let Some((r2, out)) = reader.step(swi, y)? else { continue };
            let mut f2 = feed.clone();
            for x in out {
                f2.push(&l, x);
            }
            if f2.started && f2.states.is_empty() {
                continue;
            }
            let key2 = (swi.codomain.target(y), r2, f2);
            let to = match index.get(&key2) {
                Some(&id) => id,
                None => {
                    let id = b.add_state(key2.0);
                    index.insert(key2.clone(), id);
                    queue.push_back(key2);
                    id
                }
            };
            b.add_transition(from, y, to);
        }
    }
    Ok(b.finish())
}

/// `{(uφ₁, vφ₂) : (u, v) ∈ R ∩ (A₁ × A₂)}` for synchronised inverses.
pub fn rel_image(
    r: &SyncRelation,
    swi1: &SlidingWindowInverse,
    swi2: &SlidingWindowInverse,
    witness: &SyncWitness,
) -> Result<SyncRelation> {
    if **r.base() != *swi1.domain || **r.base() != *swi2.domain || swi1.codomain != swi2.codomain {
        return Err(Error::GraphMismatch);
    }
    check_sync(swi1, swi2, witness, swi1.n + 4)?;
    let ra = r.automaton().trim();
    let y = Arc::clone(&swi1.codomain);
    let out_alpha = Arc::new(PairGraph::new(Arc::clone(&y)));
    let max_out = [swi1, swi2]
        .iter()
        .flat_map(|s| [&s.f, &s.g, &s.h, &s.short].into_iter().flat_map(|t| t.values().map(Path::len)))
        .max()
        .unwrap_or(0);
    let cap = 4 * (max_out + 1) + 4;

    #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
    struct State {
        at: (Vertex, Vertex),
        left: Reader,
        right: Reader,
        feed: Feed,
        q1: VecDeque<Edge>,
        q2: VecDeque<Edge>,
    }

    // Feeds queued output into R; false when R dies.
    let drain = |st: &mut State| -> bool {
        loop {
            let letter = match (st.q1.front(), st.q2.front()) {
                (Some(&x), Some(&z)) => (Pad::Edge(x), Pad::Edge(z)),
                (None, Some(&z)) if st.left.ended => {
                    let Some(&s) = st.feed.states.iter().next() else { return false };
                    (Pad::Pad(ra.label(s).0), Pad::Edge(z))
                }
                (Some(&x), None) if st.right.ended => {
                    let Some(&s) = st.feed.states.iter().next() else { return false };
                    (Pad::Edge(x), Pad::Pad(ra.label(s).1))
                }
                _ => return true,
            };
            if !letter.0.is_pad() {
                st.q1.pop_front();
            }
            if !letter.1.is_pad() {
                st.q2.pop_front();
            }
            st.feed.push(&ra, letter);
            if st.feed.states.is_empty() {
                return false;
            }
        }
    };
    let advance = |reader: &Reader, swi: &SlidingWindowInverse, p: Pad| -> Result<Option<(Reader, Vec<Edge>)>> {
        match (p, reader.ended) {
            (Pad::Edge(e), false) => reader.step(swi, e),
            (Pad::Pad(_), false) => reader.finish(swi),
            (Pad::Pad(_), true) => Ok(Some((reader.clone(), Vec::new()))),
            (Pad::Edge(_), true) => Ok(None),
        }
    };

    let mut b = Builder::new(out_alpha);
    let mut index: BTreeMap<State, StateId> = BTreeMap::new();
    let mut queue: VecDeque<State> = VecDeque::new();
    for v1 in y.vertices() {
        for v2 in y.vertices() {
            let st = State {
                at: (v1, v2),
                left: Reader::new(swi1),
                right: Reader::new(swi2),
                feed: Feed::new(&ra),
                q1: VecDeque::new(),
                q2: VecDeque::new(),
            };
            let id = b.add_state((v1, v2));
            b.set_start(id);
            index.insert(st.clone(), id);
            queue.push_back(st);
        }
    }
    let pads = |v: Vertex, r: &Reader| -> Vec<Pad> {
        let mut out = Vec::new();
        if !r.ended {
            out.extend(y.out_edges(v).iter().map(|&e| Pad::Edge(e)));
        }
        if !r.buf.is_empty() || r.ended {
            out.push(Pad::Pad(v));
        }
        out
    };
    while let Some(st) = queue.pop_front() {
        let from = index[&st];
        // acceptance: end both words here
        {
            let mut fin = st.clone();
            let mut ok = true;
            for (reader, swi, q) in [(&mut fin.left, swi1, &mut fin.q1), (&mut fin.right, swi2, &mut fin.q2)] {
                if reader.ended {
                    continue;
                }
                match reader.finish(swi)? {
                    Some((r2, out)) => {
                        *reader = r2;
                        q.extend(out);
                    }
                    None => ok = false,
                }
            }
            if ok && drain(&mut fin) && fin.q1.is_empty() && fin.q2.is_empty() && fin.feed.accepting(&ra) {
                b.set_terminal(from);
            }
        }
        let rights = pads(st.at.1, &st.right);
        for a in pads(st.at.0, &st.left) {
            for &c in &rights {
                if a.is_pad() && c.is_pad() {
                    continue;
                }
                let Some((l2, o1)) = advance(&st.left, swi1, a)? else { continue };
                let Some((r2, o2)) = advance(&st.right, swi2, c)? else { continue };
                let at = (out_target(&y, a), out_target(&y, c));
                let mut next = State {
                    at,
                    left: l2,
                    right: r2,
                    feed: st.feed.clone(),
                    q1: st.q1.clone(),
                    q2: st.q2.clone(),
                };
                next.q1.extend(o1);
                next.q2.extend(o2);
                if !drain(&mut next) {
                    continue;
                }
                if next.q1.len() > cap || next.q2.len() > cap {
                    return Err(Error::Desynchronised(format!(
                        "output queues exceed {cap} letters"
                    )));
                }
                let to = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = b.add_state(at);
                        index.insert(next.clone(), id);
                        queue.push_back(next);
                        id
                    }
                };
                b.add_transition(from, (a, c), to);
            }
        }
    }
    Ok(SyncRelation::from_automaton(b.finish()))
}

fn out_target(g: &Graph, p: Pad) -> Vertex {
    match p {
        Pad::Edge(e) => g.target(e),
        Pad::Pad(v) => v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::enumerate_paths;

    fn graph() -> Arc<Graph> {
        Arc::new(Graph::from_strs(&["u", "v"], &[("a", "u", "v"), ("b", "v", "u"), ("c", "u", "u")]).unwrap())
    }

    /// The identity map with window 1.
    fn identity(g: &Arc<Graph>) -> SlidingWindowInverse {
        let mut t = WindowTable::new();
        for e in g.edges() {
            t.insert(alloc::vec![e], Path::single(g, e));
        }
        let all = Automaton::universal(Arc::clone(g), false);
        SlidingWindowInverse::new(
            Arc::clone(g),
            Arc::clone(g),
            1,
            t.clone(),
            t.clone(),
            t.clone(),
            t,
            all.clone(),
        )
        .unwrap()
        .with_domain(all)
        .unwrap()
        .with_evaluator(Arc::new(|p: &Path| Some(p.clone())))
    }

    #[test]
    fn identity_is_valid() {
        let g = graph();
        let swi = identity(&g);
        assert!(validate_swi(&swi, 5).is_valid());
        let l = Automaton::from_words(Arc::clone(&g), [g.parse_path("a.b.c").unwrap().edges()]);
        assert!(image_of_regular(&l, &swi).unwrap().equivalent(&l).unwrap());
    }

    #[test]
    fn wrong_h_is_reported_at_shortest_word() {
        let g = graph();
        let mut swi = identity(&g);
        let c = g.edge("c").unwrap();
        swi.h.insert(alloc::vec![c], Path::empty(g.vertex("u").unwrap()));
        let rep = validate_swi(&swi, 4);
        assert!(!rep.is_valid());
        assert_eq!(g.format_path(&rep.violations[0].0), "b.c");
    }

    #[test]
    fn identity_relation_image() {
        let g = graph();
        let swi = identity(&g);
        let all = Automaton::universal(Arc::clone(&g), false);
        let d = SyncRelation::diagonal(&all);
        let img = rel_image(&d, &swi, &swi, &SyncWitness::new(Psi::constant(1))).unwrap();
        assert!(img.equivalent(&d).unwrap());
        let ps: Vec<(Path, Path)> = enumerate_paths(&g, 3, false)
            .into_iter()
            .zip(enumerate_paths(&g, 3, false).into_iter().rev())
            .collect();
        let r = SyncRelation::from_pairs(Arc::clone(&g), ps.iter().map(|(a, b)| (a, b))).unwrap();
        let img = rel_image(&r, &swi, &swi, &SyncWitness::new(Psi::constant(1))).unwrap();
        assert!(img.equivalent(&r).unwrap());
    }
}
