//! Automatic and prefix-automatic structures: a generating graph with
//! letter values, a regular language of representatives, and synchronous
//! automata for right multiplication by letters and for equality.

mod build;
mod ops;
mod verify;

pub use build::{
    assemble_from_cofinite_sublanguage, consolidation_transfer, extend_language, free_structure, CofiniteParts,
    injectivize_alphabet, prefix_close, trivial_structure,
};
pub(crate) use build::{fresh, letter_graph};
pub use ops::{adjoin_identity_letters, adjoin_zero, close_prefixes, from_finite_language, restrict_to};
pub use verify::{Check, CheckStatus, VerifyOptions, VerifyReport};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::algebra::{Element, Semigroupoid};
use crate::automaton::{Automaton, PathAutomaton};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Path, Vertex};
use crate::sync::SyncRelation;

/// Which relation of a structure is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Relation {
    /// `K_a` for an edge `a`.
    Edge(Edge),
    /// `K_a` for the empty path at a vertex.
    Vertex(Vertex),
    /// `K_=`.
    Equality,
    /// `K'_=`.
    PrefixEquality,
}

#[derive(Clone, Debug)]
pub struct AutomaticStructure {
    algebra: Arc<dyn Semigroupoid>,
    alphabet: Arc<Graph>,
    object_of: Vec<u32>,
    letters: Vec<Element>,
    language: PathAutomaton,
    multipliers: Vec<SyncRelation>,
    equality_at: Vec<SyncRelation>,
    equality: SyncRelation,
    prefix_equality: Option<SyncRelation>,
    flags: Flags,
}

/// Properties a structure claims; verification re-checks them exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    pub cross_section: bool,
    pub prefix_closed: bool,
}

impl AutomaticStructure {
    /// `letters` and `multipliers` are indexed by edge, `equality_at` by
    /// vertex. Vertex names must be the object names of the algebra.
    pub fn new(
        algebra: Arc<dyn Semigroupoid>,
        alphabet: Arc<Graph>,
        letters: Vec<Element>,
        language: PathAutomaton,
        multipliers: Vec<SyncRelation>,
        equality_at: Vec<SyncRelation>,
    ) -> Result<Self> {
        if alphabet.vertex_count() != algebra.objects().len() {
            return Err(Error::Precondition(String::from(
                "alphabet vertices must be the objects of the algebra",
            )));
        }
        let object_of = alphabet
            .vertices()
            .map(|v| {
                algebra
                    .object_index(alphabet.vertex_id(v))
                    .ok_or_else(|| Error::UnknownVertex(String::from(alphabet.vertex_id(v))))
            })
            .collect::<Result<Vec<u32>>>()?;
        if letters.len() != alphabet.edge_count()
            || multipliers.len() != alphabet.edge_count()
            || equality_at.len() != alphabet.vertex_count()
        {
            return Err(Error::Precondition(String::from("relation family has the wrong size")));
        }
        for e in alphabet.edges() {
            let x = &letters[e.index()];
            if !algebra.contains(x)
                || algebra.source(x) != object_of[alphabet.source(e).index()]
                || algebra.target(x) != object_of[alphabet.target(e).index()]
            {
                return Err(Error::Precondition(format!(
                    "letter {} does not match the endpoints of its value",
                    alphabet.edge_id(e)
                )));
            }
        }
        if **language.alphabet() != *alphabet
            || multipliers.iter().chain(equality_at.iter()).any(|r| **r.base() != *alphabet)
        {
            return Err(Error::GraphMismatch);
        }
        let equality = SyncRelation::union_all(Arc::clone(&alphabet), equality_at.iter());
        Ok(AutomaticStructure {
            algebra,
            alphabet,
            object_of,
            letters,
            language: language.without_empty(),
            multipliers,
            equality_at,
            equality,
            prefix_equality: None,
            flags: Flags::default(),
        })
    }

    /// Replaces the stored `K_=` (normally the union of the per-vertex
    /// relations); verification checks that the two agree.
    pub fn with_equality(mut self, eq: SyncRelation) -> Result<Self> {
        if **eq.base() != *self.alphabet {
            return Err(Error::GraphMismatch);
        }
        self.equality = eq;
        Ok(self)
    }

    pub fn with_prefix_equality(mut self, rel: SyncRelation) -> Result<Self> {
        if **rel.base() != *self.alphabet {
            return Err(Error::GraphMismatch);
        }
        self.prefix_equality = Some(rel);
        Ok(self)
    }

    pub fn with_flags(mut self, flags: Flags) -> Self {
        self.flags = flags;
        self
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn without_prefix_equality(mut self) -> Self {
        self.prefix_equality = None;
        self
    }

    /// Reinterprets the letters in another algebra with the same objects
    /// that contains their values and multiplies them the same way.
    pub fn with_algebra(mut self, algebra: Arc<dyn Semigroupoid>) -> Result<Self> {
        if algebra.objects() != self.algebra.objects() {
            return Err(Error::Precondition(String::from("the algebras have different objects")));
        }
        if let Some(x) = self.letters.iter().find(|x| !algebra.contains(x)) {
            return Err(Error::UnknownElement(algebra.describe(x)));
        }
        self.algebra = algebra;
        Ok(self)
    }

    /// Replaces one stored relation.
    pub fn replace(&mut self, which: Relation, rel: SyncRelation) {
        match which {
            Relation::Edge(e) => self.multipliers[e.index()] = rel,
            Relation::Vertex(v) => self.equality_at[v.index()] = rel,
            Relation::Equality => self.equality = rel,
            Relation::PrefixEquality => self.prefix_equality = Some(rel),
        }
    }

    pub fn algebra(&self) -> &Arc<dyn Semigroupoid> {
        &self.algebra
    }

    pub fn alphabet(&self) -> &Arc<Graph> {
        &self.alphabet
    }

    pub fn letter(&self, e: Edge) -> &Element {
        &self.letters[e.index()]
    }

    pub fn letters(&self) -> &[Element] {
        &self.letters
    }

    pub fn object(&self, v: Vertex) -> u32 {
        self.object_of[v.index()]
    }

    /// The vertex standing for an object.
    pub fn vertex_of(&self, object: u32) -> Vertex {
        Vertex(self.object_of.iter().position(|&o| o == object).unwrap_or(0) as u32)
    }

    pub fn language(&self) -> &PathAutomaton {
        &self.language
    }

    pub fn relation(&self, which: Relation) -> Option<&SyncRelation> {
        match which {
            Relation::Edge(e) => self.multipliers.get(e.index()),
            Relation::Vertex(v) => self.equality_at.get(v.index()),
            Relation::Equality => Some(&self.equality),
            Relation::PrefixEquality => self.prefix_equality.as_ref(),
        }
    }

    pub fn multiplier(&self, e: Edge) -> &SyncRelation {
        &self.multipliers[e.index()]
    }

    pub fn equality_at(&self, v: Vertex) -> &SyncRelation {
        &self.equality_at[v.index()]
    }

    pub fn equality(&self) -> &SyncRelation {
        &self.equality
    }

    pub fn prefix_equality(&self) -> Option<&SyncRelation> {
        self.prefix_equality.as_ref()
    }

    /// All relations in a fixed order, with display names.
    pub fn named_relations(&self) -> Vec<(String, Relation, &SyncRelation)> {
        let mut out = Vec::new();
        for e in self.alphabet.edges() {
            out.push((format!("K[{}]", self.alphabet.edge_id(e)), Relation::Edge(e), &self.multipliers[e.index()]));
        }
        for v in self.alphabet.vertices() {
            out.push((
                format!("K[@{}]", self.alphabet.vertex_id(v)),
                Relation::Vertex(v),
                &self.equality_at[v.index()],
            ));
        }
        out.push((String::from("K[=]"), Relation::Equality, &self.equality));
        if let Some(p) = &self.prefix_equality {
            out.push((String::from("K'[=]"), Relation::PrefixEquality, p));
        }
        out
    }

    /// `wρ` for a non-empty path.
    pub fn evaluate(&self, w: &[Edge]) -> Result<Element> {
        let (first, rest) = w.split_first().ok_or(Error::EmptyPath)?;
        let mut acc = self.letters[first.index()].clone();
        for e in rest {
            acc = self
                .algebra
                .multiply(&acc, &self.letters[e.index()])
                .ok_or(Error::CompositionMismatch)?;
        }
        Ok(acc)
    }

    pub fn format(&self, w: &[Edge]) -> String {
        match Path::from_edges(&self.alphabet, w.to_vec()) {
            Ok(p) => self.alphabet.format_path(&p),
            Err(_) => String::from("?"),
        }
    }

    /// Representatives of length at most `max_len`, grouped by value.
    pub fn classes(&self, max_len: usize) -> Result<BTreeMap<Element, Vec<Vec<Edge>>>> {
        let mut out: BTreeMap<Element, Vec<Vec<Edge>>> = BTreeMap::new();
        for w in self.language.enumerate(max_len) {
            let x = self.evaluate(&w)?;
            out.entry(x).or_default().push(w);
        }
        Ok(out)
    }

    /// A shortest representative of `x` of length at most `max_len`.
    pub fn representative(&self, x: &Element, max_len: usize) -> Result<Vec<Edge>> {
        for w in self.language.enumerate(max_len) {
            if self.evaluate(&w)? == *x {
                return Ok(w);
            }
        }
        Err(Error::SearchExhausted {
            what: format!("a representative of {}", self.algebra.describe(x)),
            bound: max_len,
        })
    }

    /// The relation computed from its definition, on words of length at
    /// most `max_len`.
    pub fn bruteforce(&self, which: Relation, max_len: usize) -> Result<BTreeSet<(Vec<Edge>, Vec<Edge>)>> {
        let words = self.language.enumerate(max_len);
        let mut values = Vec::with_capacity(words.len());
        let mut classes: BTreeMap<Element, Vec<usize>> = BTreeMap::new();
        for (i, w) in words.iter().enumerate() {
            let x = self.evaluate(w)?;
            classes.entry(x.clone()).or_default().push(i);
            values.push(x);
        }
        let mut out = BTreeSet::new();
        let g = &self.alphabet;
        match which {
            Relation::Edge(a) => {
                let av = &self.letters[a.index()];
                for (i, u) in words.iter().enumerate() {
                    if g.target(*u.last().unwrap_or(&a)) != g.source(a) {
                        continue;
                    }
                    let Some(p) = self.algebra.multiply(&values[i], av) else { continue };
                    for &j in classes.get(&p).map(Vec::as_slice).unwrap_or(&[]) {
                        out.insert((u.clone(), words[j].clone()));
                    }
                }
            }
            Relation::Vertex(_) | Relation::Equality => {
                for (i, u) in words.iter().enumerate() {
                    if let Relation::Vertex(v) = which {
                        if u.last().map(|&e| g.target(e)) != Some(v) {
                            continue;
                        }
                    }
                    for &j in &classes[&values[i]] {
                        out.insert((u.clone(), words[j].clone()));
                    }
                }
            }
            Relation::PrefixEquality => {
                let prefixes = self.language.prefix_closure().enumerate(max_len);
                let mut pclasses: BTreeMap<Element, Vec<&Vec<Edge>>> = BTreeMap::new();
                for p in &prefixes {
                    pclasses.entry(self.evaluate(p)?).or_default().push(p);
                }
                for (i, u) in words.iter().enumerate() {
                    for p in pclasses.get(&values[i]).map(Vec::as_slice).unwrap_or(&[]) {
                        out.insert((u.clone(), (*p).clone()));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Whether `K_=` is the diagonal of `K` (exact).
    pub fn is_cross_section(&self) -> Result<bool> {
        self.equality.equivalent(&SyncRelation::diagonal(&self.language))
    }

    /// Whether `K` is closed under non-empty prefixes (exact).
    pub fn is_prefix_closed(&self) -> Result<bool> {
        self.language.equivalent(&self.language.prefix_closure())
    }

    /// `K_w = {(u, v) : (uw)ρ = vρ}`, composed from the letter multipliers.
    pub fn relation_for_word(&self, w: &[Edge]) -> Result<SyncRelation> {
        if w.is_empty() {
            return Err(Error::EmptyPath);
        }
        if !self.alphabet.is_path(w) {
            return Err(Error::CompositionMismatch);
        }
        let mut acc = self.multipliers[w[0].index()].clone();
        for e in &w[1..] {
            acc = acc.compose(&self.multipliers[e.index()])?.minimize();
        }
        Ok(acc)
    }

    /// Words of `K` ending at vertex `v`.
    pub fn ending_at(&self, v: Vertex) -> PathAutomaton {
        self.language.restrict_endpoints(|_| true, |t| t == v)
    }

    /// A path automaton for a finite set of words.
    pub fn words_automaton(&self, words: &[Vec<Edge>]) -> PathAutomaton {
        Automaton::from_words(Arc::clone(&self.alphabet), words.iter().map(Vec::as_slice))
    }
}
