//! Finite path automata over typed alphabets.
//!
//! An automaton's states carry vertex labels and its transitions carry
//! letters; a transition on `l` always runs from a state labelled
//! `source(l)` to one labelled `target(l)`. A non-empty word is accepted when
//! it labels a run of at least one transition from a start state to a
//! terminal state. Empty paths are not read by runs at all: acceptance of
//! the empty path at `v` is a per-vertex flag. Terminal marks on states are
//! therefore only consulted after at least one letter.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Vertex};

/// A set of letters, each with a source and target vertex.
pub trait Alphabet: PartialEq + Debug + Send + Sync {
    type Letter: Copy + Ord + Debug + Send + Sync;
    type Vertex: Copy + Ord + Debug + Send + Sync;

    fn source(&self, letter: Self::Letter) -> Self::Vertex;
    fn target(&self, letter: Self::Letter) -> Self::Vertex;
    fn vertex_list(&self) -> Vec<Self::Vertex>;
    /// Every letter whose source is `v`; only needed for complementation.
    fn letters_from(&self, v: Self::Vertex) -> Vec<Self::Letter>;
}

impl Alphabet for Graph {
    type Letter = Edge;
    type Vertex = Vertex;

    fn source(&self, letter: Edge) -> Vertex {
        Graph::source(self, letter)
    }

    fn target(&self, letter: Edge) -> Vertex {
        Graph::target(self, letter)
    }

    fn vertex_list(&self) -> Vec<Vertex> {
        self.vertices().collect()
    }

    fn letters_from(&self, v: Vertex) -> Vec<Edge> {
        self.out_edges(v).to_vec()
    }
}

pub type StateId = u32;

/// A finite automaton over the alphabet `A`.
#[derive(Debug)]
pub struct Automaton<A: Alphabet> {
    alphabet: Arc<A>,
    labels: Vec<A::Vertex>,
    trans: Vec<Vec<(A::Letter, StateId)>>,
    start: Vec<StateId>,
    terminal: Vec<bool>,
    empty: BTreeSet<A::Vertex>,
}

impl<A: Alphabet> Clone for Automaton<A> {
    fn clone(&self) -> Self {
        Automaton {
            alphabet: Arc::clone(&self.alphabet),
            labels: self.labels.clone(),
            trans: self.trans.clone(),
            start: self.start.clone(),
            terminal: self.terminal.clone(),
            empty: self.empty.clone(),
        }
    }
}

/// Path automaton over a plain graph.
pub type PathAutomaton = Automaton<Graph>;

/// Incremental construction with ε-moves; [`Builder::finish`] removes them
/// and trims.
pub struct Builder<A: Alphabet> {
    alphabet: Arc<A>,
    labels: Vec<A::Vertex>,
    trans: Vec<Vec<(A::Letter, StateId)>>,
    eps: Vec<Vec<StateId>>,
    start: Vec<StateId>,
    terminal: Vec<bool>,
    empty: BTreeSet<A::Vertex>,
}

impl<A: Alphabet> Builder<A> {
    pub fn new(alphabet: Arc<A>) -> Self {
        Builder {
            alphabet,
            labels: Vec::new(),
            trans: Vec::new(),
            eps: Vec::new(),
            start: Vec::new(),
            terminal: Vec::new(),
            empty: BTreeSet::new(),
        }
    }

    pub fn alphabet(&self) -> &Arc<A> {
        &self.alphabet
    }

    pub fn add_state(&mut self, label: A::Vertex) -> StateId {
        self.labels.push(label);
        self.trans.push(Vec::new());
        self.eps.push(Vec::new());
        self.terminal.push(false);
        (self.labels.len() - 1) as StateId
    }

    pub fn label(&self, s: StateId) -> A::Vertex {
        self.labels[s as usize]
    }

    pub fn add_transition(&mut self, from: StateId, letter: A::Letter, to: StateId) {
        debug_assert_eq!(self.alphabet.source(letter), self.labels[from as usize]);
        debug_assert_eq!(self.alphabet.target(letter), self.labels[to as usize]);
        self.trans[from as usize].push((letter, to));
    }

    /// Checked variant of [`Builder::add_transition`].
    pub fn try_add_transition(&mut self, from: StateId, letter: A::Letter, to: StateId) -> Result<()> {
        if self.alphabet.source(letter) != self.labels[from as usize]
            || self.alphabet.target(letter) != self.labels[to as usize]
        {
            return Err(Error::LabelMismatch(alloc::format!("{from} -{letter:?}-> {to}")));
        }
        self.trans[from as usize].push((letter, to));
        Ok(())
    }

    /// ε-move between states with equal labels.
    pub fn add_eps(&mut self, from: StateId, to: StateId) {
        debug_assert_eq!(self.labels[from as usize], self.labels[to as usize]);
        self.eps[from as usize].push(to);
    }

    pub fn set_start(&mut self, s: StateId) {
        self.start.push(s);
    }

    pub fn set_terminal(&mut self, s: StateId) {
        self.terminal[s as usize] = true;
    }

    pub fn accept_empty(&mut self, v: A::Vertex) {
        self.empty.insert(v);
    }

    pub fn state_count(&self) -> usize {
        self.labels.len()
    }

    /// Eliminates ε-moves, then trims.
    pub fn finish(self) -> Automaton<A> {
        let n = self.labels.len();
        let has_eps = self.eps.iter().any(|e| !e.is_empty());
        let (trans, terminal) = if has_eps {
            let closures: Vec<Vec<StateId>> = (0..n)
                .map(|s| {
                    let mut seen = BTreeSet::new();
                    let mut stack = vec![s as StateId];
                    while let Some(x) = stack.pop() {
                        if seen.insert(x) {
                            stack.extend(self.eps[x as usize].iter().copied());
                        }
                    }
                    seen.into_iter().collect()
                })
                .collect();
            let mut trans = vec![Vec::new(); n];
            let mut terminal = vec![false; n];
            for s in 0..n {
                for &u in &closures[s] {
                    trans[s].extend(self.trans[u as usize].iter().copied());
                    terminal[s] |= self.terminal[u as usize];
                }
            }
            (trans, terminal)
        } else {
            (self.trans, self.terminal)
        };
        let mut aut = Automaton {
            alphabet: self.alphabet,
            labels: self.labels,
            trans,
            start: self.start,
            terminal,
            empty: self.empty,
        };
        aut.normalize();
        aut.trim()
    }
}

impl<A: Alphabet> Automaton<A> {
    /// The automaton accepting nothing.
    pub fn empty_language(alphabet: Arc<A>) -> Self {
        Builder::new(alphabet).finish()
    }

    /// Builds an automaton from raw parts, validating the labelling.
    pub fn from_parts(
        alphabet: Arc<A>,
        labels: Vec<A::Vertex>,
        transitions: &[(StateId, A::Letter, StateId)],
        start: &[StateId],
        terminal: &[StateId],
        empty: &[A::Vertex],
    ) -> Result<Self> {
        let mut b = Builder::new(alphabet);
        for l in labels {
            b.add_state(l);
        }
        let n = b.state_count() as StateId;
        let check = |s: StateId| -> Result<()> {
            if s >= n {
                Err(Error::LabelMismatch(alloc::format!("state {s} out of range")))
            } else {
                Ok(())
            }
        };
        for &(f, l, t) in transitions {
            check(f)?;
            check(t)?;
            b.try_add_transition(f, l, t)?;
        }
        for &s in start {
            check(s)?;
            b.set_start(s);
        }
        for &s in terminal {
            check(s)?;
            b.set_terminal(s);
        }
        for &v in empty {
            b.accept_empty(v);
        }
        let mut aut = Automaton {
            alphabet: b.alphabet,
            labels: b.labels,
            trans: b.trans,
            start: b.start,
            terminal: b.terminal,
            empty: b.empty,
        };
        aut.normalize();
        Ok(aut)
    }

    /// Finite language of non-empty words (each must be a path).
    pub fn from_words<'a, I>(alphabet: Arc<A>, words: I) -> Self
    where
        I: IntoIterator<Item = &'a [A::Letter]>,
        A::Letter: 'a,
    {
        let mut b = Builder::new(Arc::clone(&alphabet));
        for w in words {
            if w.is_empty() {
                continue;
            }
            let mut cur = b.add_state(alphabet.source(w[0]));
            b.set_start(cur);
            for &l in w {
                let next = b.add_state(alphabet.target(l));
                b.add_transition(cur, l, next);
                cur = next;
            }
            b.set_terminal(cur);
        }
        b.finish()
    }

    fn normalize(&mut self) {
        for t in &mut self.trans {
            t.sort();
            t.dedup();
        }
        self.start.sort();
        self.start.dedup();
    }

    pub fn alphabet(&self) -> &Arc<A> {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.labels.len()
    }

    pub fn transition_count(&self) -> usize {
        self.trans.iter().map(Vec::len).sum()
    }

    pub fn label(&self, s: StateId) -> A::Vertex {
        self.labels[s as usize]
    }

    pub fn transitions(&self, s: StateId) -> &[(A::Letter, StateId)] {
        &self.trans[s as usize]
    }

    pub fn starts(&self) -> &[StateId] {
        &self.start
    }

    pub fn is_terminal(&self, s: StateId) -> bool {
        self.terminal[s as usize]
    }

    pub fn empty_vertices(&self) -> &BTreeSet<A::Vertex> {
        &self.empty
    }

    pub fn accepts_empty(&self, v: A::Vertex) -> bool {
        self.empty.contains(&v)
    }

    fn same_alphabet(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.alphabet, &other.alphabet) || *self.alphabet == *other.alphabet {
            Ok(())
        } else {
            Err(Error::GraphMismatch)
        }
    }

    fn step_set(&self, set: &BTreeSet<StateId>, letter: A::Letter) -> BTreeSet<StateId> {
        let mut out = BTreeSet::new();
        for &s in set {
            let ts = &self.trans[s as usize];
            let lo = ts.partition_point(|(l, _)| *l < letter);
            for &(l, t) in &ts[lo..] {
                if l != letter {
                    break;
                }
                out.insert(t);
            }
        }
        out
    }

    /// Membership of a non-empty word.
    pub fn accepts_word(&self, word: &[A::Letter]) -> bool {
        if word.is_empty() {
            return false;
        }
        let mut set: BTreeSet<StateId> = self.start.iter().copied().collect();
        for &l in word {
            set = self.step_set(&set, l);
            if set.is_empty() {
                return false;
            }
        }
        set.iter().any(|&s| self.terminal[s as usize])
    }

    /// Keeps exactly the transitions lying on some accepting run.
    pub fn trim(&self) -> Self {
        let n = self.labels.len();
        let mut acc = vec![false; n];
        let mut queue: VecDeque<StateId> = self.start.iter().copied().collect();
        for &s in &self.start {
            acc[s as usize] = true;
        }
        while let Some(s) = queue.pop_front() {
            for &(_, t) in &self.trans[s as usize] {
                if !acc[t as usize] {
                    acc[t as usize] = true;
                    queue.push_back(t);
                }
            }
        }
        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for s in 0..n {
            for &(_, t) in &self.trans[s] {
                rev[t as usize].push(s as StateId);
            }
        }
        let mut coacc = vec![false; n];
        let mut queue: VecDeque<StateId> = VecDeque::new();
        for s in 0..n {
            if self.terminal[s] {
                coacc[s] = true;
                queue.push_back(s as StateId);
            }
        }
        while let Some(t) = queue.pop_front() {
            for &s in &rev[t as usize] {
                if !coacc[s as usize] {
                    coacc[s as usize] = true;
                    queue.push_back(s);
                }
            }
        }
        let mut keep = vec![false; n];
        for s in 0..n {
            if !acc[s] {
                continue;
            }
            for &(_, t) in &self.trans[s] {
                if coacc[t as usize] {
                    keep[s] = true;
                    keep[t as usize] = true;
                }
            }
        }
        let mut remap = vec![u32::MAX; n];
        let mut labels = Vec::new();
        let mut terminal = Vec::new();
        for s in 0..n {
            if keep[s] {
                remap[s] = labels.len() as u32;
                labels.push(self.labels[s]);
                terminal.push(self.terminal[s]);
            }
        }
        let mut trans = vec![Vec::new(); labels.len()];
        for s in 0..n {
            if !keep[s] {
                continue;
            }
            for &(l, t) in &self.trans[s] {
                if keep[t as usize] && coacc[t as usize] {
                    trans[remap[s] as usize].push((l, remap[t as usize]));
                }
            }
        }
        let start = self
            .start
            .iter()
            .filter(|&&s| keep[s as usize])
            .map(|&s| remap[s as usize])
            .collect();
        let mut out = Automaton {
            alphabet: Arc::clone(&self.alphabet),
            labels,
            trans,
            start,
            terminal,
            empty: self.empty.clone(),
        };
        out.normalize();
        out
    }

    /// True when no path (empty or not) is accepted.
    pub fn is_empty(&self) -> bool {
        self.empty.is_empty() && self.trim().transition_count() == 0
    }

    /// True when the accepted language is finite.
    pub fn is_finite(&self) -> bool {
        let t = self.trim();
        let n = t.labels.len();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut mark = vec![0u8; n];
        for root in 0..n {
            if mark[root] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            mark[root] = 1;
            while let Some(&mut (s, ref mut i)) = stack.last_mut() {
                if *i < t.trans[s].len() {
                    let next = t.trans[s][*i].1 as usize;
                    *i += 1;
                    match mark[next] {
                        0 => {
                            mark[next] = 1;
                            stack.push((next, 0));
                        }
                        1 => return false,
                        _ => {}
                    }
                } else {
                    mark[s] = 2;
                    stack.pop();
                }
            }
        }
        true
    }

    /// Accepted non-empty words of length at most `max_len`, shortest first
    /// and lexicographic within a length.
    pub fn enumerate(&self, max_len: usize) -> Vec<Vec<A::Letter>> {
        let t = self.trim();
        let mut out = Vec::new();
        let init: BTreeSet<StateId> = t.start.iter().copied().collect();
        let mut layer: Vec<(Vec<A::Letter>, BTreeSet<StateId>)> = vec![(Vec::new(), init)];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for (word, set) in &layer {
                let mut letters: BTreeSet<A::Letter> = BTreeSet::new();
                for &s in set {
                    letters.extend(t.trans[s as usize].iter().map(|(l, _)| *l));
                }
                for l in letters {
                    let succ = t.step_set(set, l);
                    let mut w = word.clone();
                    w.push(l);
                    if succ.iter().any(|&s| t.terminal[s as usize]) {
                        out.push(w.clone());
                    }
                    next.push((w, succ));
                }
            }
            if next.is_empty() {
                break;
            }
            layer = next;
        }
        out
    }

    /// Union, by disjoint sum.
    pub fn union(&self, other: &Self) -> Result<Self> {
        self.same_alphabet(other)?;
        let mut b = Builder::new(Arc::clone(&self.alphabet));
        b.absorb(self);
        b.absorb(other);
        for &v in self.empty.iter().chain(other.empty.iter()) {
            b.accept_empty(v);
        }
        Ok(b.finish())
    }

    pub fn union_all<'a, I: IntoIterator<Item = &'a Self>>(alphabet: Arc<A>, items: I) -> Self
    where
        A: 'a,
    {
        let mut b = Builder::new(alphabet);
        for a in items {
            debug_assert!(*a.alphabet == **b.alphabet());
            b.absorb(a);
            for &v in &a.empty {
                b.accept_empty(v);
            }
        }
        b.finish()
    }

    /// Intersection, by synchronised product.
    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.same_alphabet(other)?;
        let mut b = Builder::new(Arc::clone(&self.alphabet));
        let mut index: BTreeMap<(StateId, StateId), StateId> = BTreeMap::new();
        let mut queue = VecDeque::new();
        for &p in &self.start {
            for &q in &other.start {
                if self.labels[p as usize] == other.labels[q as usize] {
                    let id = b.add_state(self.labels[p as usize]);
                    b.set_start(id);
                    index.insert((p, q), id);
                    queue.push_back((p, q));
                }
            }
        }
        while let Some((p, q)) = queue.pop_front() {
            let from = index[&(p, q)];
            if self.terminal[p as usize] && other.terminal[q as usize] {
                b.set_terminal(from);
            }
            let tq = &other.trans[q as usize];
            for &(l, p2) in &self.trans[p as usize] {
                let lo = tq.partition_point(|(m, _)| *m < l);
                for &(m, q2) in &tq[lo..] {
                    if m != l {
                        break;
                    }
                    let to = *index.entry((p2, q2)).or_insert_with(|| {
                        queue.push_back((p2, q2));
                        b.add_state(self.labels[p2 as usize])
                    });
                    b.add_transition(from, l, to);
                }
            }
        }
        for v in self.empty.intersection(&other.empty) {
            b.accept_empty(*v);
        }
        Ok(b.finish())
    }

    /// Set difference; `other` is determinised on the fly.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.same_alphabet(other)?;
        let mut b = Builder::new(Arc::clone(&self.alphabet));
        let mut index: BTreeMap<(StateId, BTreeSet<StateId>), StateId> = BTreeMap::new();
        let mut queue = VecDeque::new();
        for &p in &self.start {
            let v = self.labels[p as usize];
            let set: BTreeSet<StateId> = other
                .start
                .iter()
                .copied()
                .filter(|&q| other.labels[q as usize] == v)
                .collect();
            let id = b.add_state(v);
            b.set_start(id);
            index.insert((p, set.clone()), id);
            queue.push_back((p, set));
        }
        while let Some((p, set)) = queue.pop_front() {
            let from = index[&(p, set.clone())];
            if self.terminal[p as usize] && !set.iter().any(|&q| other.terminal[q as usize]) {
                b.set_terminal(from);
            }
            for &(l, p2) in &self.trans[p as usize] {
                let set2 = other.step_set(&set, l);
                let key = (p2, set2);
                let to = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = b.add_state(self.labels[p2 as usize]);
                        index.insert(key.clone(), id);
                        queue.push_back(key);
                        id
                    }
                };
                b.add_transition(from, l, to);
            }
        }
        for v in self.empty.difference(&other.empty) {
            b.accept_empty(*v);
        }
        Ok(b.finish())
    }

    /// `{pq : p ∈ L(self), q ∈ L(other), p.target = q.source}`, with empty
    /// paths acting as identities.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        self.same_alphabet(other)?;
        let mut b = Builder::new(Arc::clone(&self.alphabet));
        let oa = b.absorb_states(self);
        let ob = b.absorb_states(other);
        for &s in &self.start {
            b.set_start(oa + s);
        }
        for s in 0..other.labels.len() as StateId {
            if other.terminal[s as usize] {
                b.set_terminal(ob + s);
            }
        }
        // p empty: other's starts at flagged vertices start the product
        for &q in &other.start {
            if self.empty.contains(&other.labels[q as usize]) {
                b.set_start(ob + q);
            }
        }
        for s in 0..self.labels.len() as StateId {
            if !self.terminal[s as usize] {
                continue;
            }
            let v = self.labels[s as usize];
            // q empty: keep self's terminal where other accepts ε at v
            if other.empty.contains(&v) {
                b.set_terminal(oa + s);
            }
            for &q in &other.start {
                if other.labels[q as usize] == v {
                    b.add_eps(oa + s, ob + q);
                }
            }
        }
        for v in self.empty.intersection(&other.empty) {
            b.accept_empty(*v);
        }
        Ok(b.finish())
    }

    /// Smallest composition-closed superset of the non-empty part (L⁺).
    pub fn subsemigroupoid_closure(&self) -> Self {
        let mut b = Builder::new(Arc::clone(&self.alphabet));
        let off = b.absorb_states(self);
        for &s in &self.start {
            b.set_start(off + s);
        }
        for s in 0..self.labels.len() as StateId {
            if self.terminal[s as usize] {
                b.set_terminal(off + s);
                for &q in &self.start {
                    if self.labels[q as usize] == self.labels[s as usize] {
                        b.add_eps(off + s, off + q);
                    }
                }
            }
        }
        b.finish()
    }

    /// Subsemigroupoid closure plus the empty path at every vertex touched
    /// by the language.
    pub fn subcategory_closure(&self) -> Self {
        let mut out = self.subsemigroupoid_closure();
        let mut touched: BTreeSet<A::Vertex> = self.empty.clone();
        for &s in &out.start {
            touched.insert(out.labels[s as usize]);
        }
        for s in 0..out.labels.len() {
            if out.terminal[s] {
                touched.insert(out.labels[s]);
            }
        }
        out.empty = touched;
        out
    }

    /// The non-empty prefixes of accepted words.
    pub fn prefix_closure(&self) -> Self {
        let mut t = self.trim();
        for x in &mut t.terminal {
            *x = true;
        }
        t.empty.clear();
        t
    }

    /// Complete deterministic automaton: one start state per vertex, and one
    /// transition per state and per letter leaving its label.
    pub fn determinize(&self) -> Self {
        let mut b = Builder::new(Arc::clone(&self.alphabet));
        let mut index: BTreeMap<(A::Vertex, BTreeSet<StateId>), StateId> = BTreeMap::new();
        let mut queue = VecDeque::new();
        let mut intern = |b: &mut Builder<A>,
                          queue: &mut VecDeque<(StateId, A::Vertex, BTreeSet<StateId>)>,
                          key: (A::Vertex, BTreeSet<StateId>)|
         -> StateId {
            if let Some(&id) = index.get(&key) {
                return id;
            }
            let id = b.add_state(key.0);
            if key.1.iter().any(|&s| self.terminal[s as usize]) {
                b.set_terminal(id);
            }
            index.insert(key.clone(), id);
            queue.push_back((id, key.0, key.1));
            id
        };
        for v in self.alphabet.vertex_list() {
            let set: BTreeSet<StateId> = self
                .start
                .iter()
                .copied()
                .filter(|&s| self.labels[s as usize] == v)
                .collect();
            let id = intern(&mut b, &mut queue, (v, set));
            b.set_start(id);
        }
        while let Some((from, v, set)) = queue.pop_front() {
            for l in self.alphabet.letters_from(v) {
                let succ = self.step_set(&set, l);
                let to = intern(&mut b, &mut queue, (self.alphabet.target(l), succ));
                b.add_transition(from, l, to);
            }
        }
        for &v in &self.empty {
            b.accept_empty(v);
        }
        // no trimming: completeness is part of the contract
        let mut aut = Automaton {
            alphabet: b.alphabet,
            labels: b.labels,
            trans: b.trans,
            start: b.start,
            terminal: b.terminal,
            empty: b.empty,
        };
        aut.normalize();
        aut
    }

    /// Checks both clauses of the complete-deterministic definition.
    pub fn is_complete_deterministic(&self) -> bool {
        let verts = self.alphabet.vertex_list();
        for v in &verts {
            let n = self
                .start
                .iter()
                .filter(|&&s| self.labels[s as usize] == *v)
                .count();
            if n != 1 {
                return false;
            }
        }
        for s in 0..self.labels.len() {
            let want = self.alphabet.letters_from(self.labels[s]);
            let have: Vec<A::Letter> = self.trans[s].iter().map(|(l, _)| *l).collect();
            let mut want_sorted = want;
            want_sorted.sort();
            if have != want_sorted {
                return false;
            }
        }
        true
    }

    /// Complement within all non-empty paths, or within all paths.
    pub fn complement(&self, with_empty: bool) -> Self {
        let mut d = self.determinize();
        for x in &mut d.terminal {
            *x = !*x;
        }
        d.empty = if with_empty {
            self.alphabet
                .vertex_list()
                .into_iter()
                .filter(|v| !self.empty.contains(v))
                .collect()
        } else {
            BTreeSet::new()
        };
        d.trim()
    }

    /// All paths (optionally including empty ones).
    pub fn universal(alphabet: Arc<A>, with_empty: bool) -> Self {
        Automaton::empty_language(alphabet).complement(with_empty)
    }

    /// Partial (uncompleted) subset construction followed by Moore
    /// partition refinement.
    pub fn minimize(&self) -> Self {
        let t = self.trim();
        // partial determinisation
        let mut sets: Vec<BTreeSet<StateId>> = Vec::new();
        let mut labels = Vec::new();
        let mut index: BTreeMap<BTreeSet<StateId>, u32> = BTreeMap::new();
        let mut starts = Vec::new();
        let mut by_vertex: BTreeMap<A::Vertex, BTreeSet<StateId>> = BTreeMap::new();
        for &s in &t.start {
            by_vertex.entry(t.labels[s as usize]).or_default().insert(s);
        }
        let mut queue = VecDeque::new();
        for (v, set) in by_vertex {
            let id = sets.len() as u32;
            index.insert(set.clone(), id);
            sets.push(set.clone());
            labels.push(v);
            starts.push(id);
            queue.push_back(id);
        }
        let mut dtrans: Vec<Vec<(A::Letter, u32)>> = vec![Vec::new(); sets.len()];
        while let Some(id) = queue.pop_front() {
            let set = sets[id as usize].clone();
            let mut letters = BTreeSet::new();
            for &s in &set {
                letters.extend(t.trans[s as usize].iter().map(|(l, _)| *l));
            }
            for l in letters {
                let succ = t.step_set(&set, l);
                let to = match index.get(&succ) {
                    Some(&x) => x,
                    None => {
                        let x = sets.len() as u32;
                        index.insert(succ.clone(), x);
                        sets.push(succ);
                        labels.push(self.alphabet.target(l));
                        dtrans.push(Vec::new());
                        queue.push_back(x);
                        x
                    }
                };
                dtrans[id as usize].push((l, to));
            }
        }
        let n = sets.len();
        let term: Vec<bool> = sets
            .iter()
            .map(|s| s.iter().any(|&x| t.terminal[x as usize]))
            .collect();
        // Moore refinement
        let mut class: Vec<u32> = {
            let mut keys: BTreeMap<(A::Vertex, bool), u32> = BTreeMap::new();
            (0..n)
                .map(|s| {
                    let k = keys.len() as u32;
                    *keys.entry((labels[s], term[s])).or_insert(k)
                })
                .collect()
        };
        loop {
            let mut keys: BTreeMap<(u32, Vec<(A::Letter, u32)>), u32> = BTreeMap::new();
            let next: Vec<u32> = (0..n)
                .map(|s| {
                    let sig: Vec<(A::Letter, u32)> =
                        dtrans[s].iter().map(|&(l, t)| (l, class[t as usize])).collect();
                    let k = keys.len() as u32;
                    *keys.entry((class[s], sig)).or_insert(k)
                })
                .collect();
            let stable = keys.len() == class.iter().collect::<BTreeSet<_>>().len();
            class = next;
            if stable {
                break;
            }
        }
        let classes = class.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut b = Builder::new(Arc::clone(&self.alphabet));
        let mut rep = vec![None; classes];
        for s in 0..n {
            if rep[class[s] as usize].is_none() {
                rep[class[s] as usize] = Some(s);
            }
        }
        for c in 0..classes {
            let s = rep[c].unwrap_or(0);
            let id = b.add_state(labels[s]);
            if term[s] {
                b.set_terminal(id);
            }
        }
        for c in 0..classes {
            let s = rep[c].unwrap_or(0);
            for &(l, to) in &dtrans[s] {
                b.add_transition(c as StateId, l, class[to as usize]);
            }
        }
        let mut seen = BTreeSet::new();
        for s in starts {
            if seen.insert(class[s as usize]) {
                b.set_start(class[s as usize]);
            }
        }
        for &v in &self.empty {
            b.accept_empty(v);
        }
        b.finish()
    }

    /// Exact language equality.
    pub fn equivalent(&self, other: &Self) -> Result<bool> {
        Ok(self.difference(other)?.is_empty() && other.difference(self)?.is_empty())
    }

    /// Keeps only runs starting at vertices satisfying `keep_start` and
    /// ending at vertices satisfying `keep_end`; empty paths must satisfy both.
    pub fn restrict_endpoints(
        &self,
        keep_start: impl Fn(A::Vertex) -> bool,
        keep_end: impl Fn(A::Vertex) -> bool,
    ) -> Self {
        let mut out = self.clone();
        out.start.retain(|&s| keep_start(self.labels[s as usize]));
        for s in 0..out.labels.len() {
            if !keep_end(out.labels[s]) {
                out.terminal[s] = false;
            }
        }
        out.empty.retain(|&v| keep_start(v) && keep_end(v));
        out.trim()
    }

    /// Drops all empty-path flags.
    pub fn without_empty(&self) -> Self {
        let mut out = self.clone();
        out.empty.clear();
        out
    }

    /// Homomorphic image: each letter is kept (mapped), erased (`Some(None)`)
    /// or its transitions dropped (`None`). Erased letters must map their
    /// endpoints to the same vertex.
    pub fn map<B, F, G>(&self, target: Arc<B>, letter: F, vertex: G) -> Automaton<B>
    where
        B: Alphabet,
        F: Fn(A::Letter) -> Option<Option<B::Letter>>,
        G: Fn(A::Vertex) -> B::Vertex,
    {
        let mut b = Builder::new(target);
        for &l in &self.labels {
            b.add_state(vertex(l));
        }
        for s in 0..self.labels.len() {
            for &(l, t) in &self.trans[s] {
                match letter(l) {
                    None => {}
                    Some(None) => b.add_eps(s as StateId, t),
                    Some(Some(m)) => b.add_transition(s as StateId, m, t),
                }
            }
            if self.terminal[s] {
                b.set_terminal(s as StateId);
            }
        }
        for &s in &self.start {
            b.set_start(s);
        }
        for &v in &self.empty {
            b.accept_empty(vertex(v));
        }
        b.finish()
    }

    /// Letters occurring on transitions of the trimmed automaton.
    pub fn used_letters(&self) -> BTreeSet<A::Letter> {
        let t = self.trim();
        t.trans.iter().flatten().map(|(l, _)| *l).collect()
    }

    /// Words whose last letter is in `last`.
    pub fn ending_with(&self, last: impl Fn(A::Letter) -> bool) -> Self {
        let mut b = Builder::new(Arc::clone(&self.alphabet));
        let off = b.absorb_states(self);
        let n = self.labels.len() as StateId;
        let mut fin: BTreeMap<A::Vertex, StateId> = BTreeMap::new();
        for &s in &self.start {
            b.set_start(off + s);
        }
        for s in 0..n {
            for &(l, t) in &self.trans[s as usize] {
                b.add_transition(off + s, l, off + t);
                if last(l) && self.terminal[t as usize] {
                    let v = self.alphabet.target(l);
                    let f = *fin.entry(v).or_insert_with(|| {
                        let f = b.add_state(v);
                        b.set_terminal(f);
                        f
                    });
                    b.add_transition(off + s, l, f);
                }
            }
        }
        b.finish()
    }
}

impl<A: Alphabet> Builder<A> {
    /// Copies states and transitions (not start/terminal marks); returns the
    /// index offset.
    pub fn absorb_states(&mut self, a: &Automaton<A>) -> StateId {
        let off = self.labels.len() as StateId;
        for &l in &a.labels {
            self.add_state(l);
        }
        for s in 0..a.labels.len() {
            for &(l, t) in &a.trans[s] {
                self.trans[off as usize + s].push((l, off + t));
            }
        }
        off
    }

    /// Copies states, transitions, start and terminal marks.
    pub fn absorb(&mut self, a: &Automaton<A>) -> StateId {
        let off = self.absorb_states(a);
        for &s in &a.start {
            self.set_start(off + s);
        }
        for s in 0..a.labels.len() {
            if a.terminal[s] {
                self.set_terminal(off + s as StateId);
            }
        }
        off
    }
}
