//! Canonical structures and the constructions that modify them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{AutomaticStructure, Flags};
use crate::algebra::{Consolidation, Element, Free, Semigroupoid};
use crate::automaton::{Automaton, PathAutomaton};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Path, Vertex};
use crate::sync::SyncRelation;

fn edge_name_ok(s: &str) -> bool {
    !s.is_empty() && !s.starts_with('@') && !s.contains(|c: char| c == '.' || c.is_whitespace())
}

/// A fresh edge name based on `base` that is not in `taken`.
pub(crate) fn fresh(base: &str, taken: &BTreeSet<String>) -> String {
    let base: String = base
        .trim_start_matches('@')
        .chars()
        .map(|c| if c == '.' || c.is_whitespace() { '_' } else { c })
        .collect();
    if edge_name_ok(&base) && !taken.contains(&base) {
        return base;
    }
    for i in 1.. {
        let n = format!("{base}'{i}");
        if edge_name_ok(&n) && !taken.contains(&n) {
            return n;
        }
        if i > 64 {
            break;
        }
    }
    (0..)
        .map(|i| format!("x{i}"))
        .find(|n| !taken.contains(n))
        .unwrap_or_default()
}

fn object_names(algebra: &dyn Semigroupoid) -> Vec<String> {
    algebra.objects().to_vec()
}

/// Builds a graph on the objects of `algebra` with one edge per
/// `(name, element)`; returns it with the letter values in edge order.
pub(crate) fn letter_graph(algebra: &dyn Semigroupoid, letters: &[(String, Element)]) -> Result<(Arc<Graph>, Vec<Element>)> {
    let objects = object_names(algebra);
    let g = Graph::new(
        objects.iter().cloned(),
        letters.iter().map(|(n, x)| {
            (
                n.clone(),
                objects[algebra.source(x) as usize].clone(),
                objects[algebra.target(x) as usize].clone(),
            )
        }),
    )?;
    let by_name: BTreeMap<&str, &Element> = letters.iter().map(|(n, x)| (n.as_str(), x)).collect();
    let values = g.edges().map(|e| by_name[g.edge_id(e)].clone()).collect();
    Ok((Arc::new(g), values))
}

fn value(algebra: &dyn Semigroupoid, letters: &[Element], w: &[Edge]) -> Result<Element> {
    let (first, rest) = w.split_first().ok_or(Error::EmptyPath)?;
    let mut acc = letters[first.index()].clone();
    for e in rest {
        acc = algebra
            .multiply(&acc, &letters[e.index()])
            .ok_or(Error::CompositionMismatch)?;
    }
    Ok(acc)
}

fn ending_at(k: &PathAutomaton, v: Vertex) -> PathAutomaton {
    k.restrict_endpoints(|_| true, |t| t == v)
}

fn pairs_relation(g: &Arc<Graph>, pairs: &[(Vec<Edge>, Vec<Edge>)]) -> Result<SyncRelation> {
    let paths = pairs
        .iter()
        .map(|(a, b)| Ok((Path::from_edges(g, a.clone())?, Path::from_edges(g, b.clone())?)))
        .collect::<Result<Vec<_>>>()?;
    SyncRelation::from_pairs(Arc::clone(g), paths.iter().map(|(a, b)| (a, b)))
}

fn per_vertex(eq: &SyncRelation, k: &PathAutomaton) -> Result<Vec<SyncRelation>> {
    k.alphabet()
        .vertices()
        .map(|v| Ok(eq.restrict(&ending_at(k, v), k)?.minimize()))
        .collect()
}

/// Every finite semigroupoid is automatic: one letter per arrow and the
/// length-one words as representatives.
pub fn trivial_structure(algebra: Arc<dyn Semigroupoid>) -> Result<AutomaticStructure> {
    let arrows = algebra
        .arrows()
        .ok_or_else(|| Error::Unsupported(String::from("trivial structure of an infinite semigroupoid")))?;
    let mut taken = BTreeSet::new();
    let mut named = Vec::new();
    for x in &arrows {
        let n = fresh(&algebra.describe(x), &taken);
        taken.insert(n.clone());
        named.push((n, x.clone()));
    }
    let (g, letters) = letter_graph(&*algebra, &named)?;
    let index: BTreeMap<&Element, Edge> = g.edges().map(|e| (&letters[e.index()], e)).collect();
    let k = Automaton::from_words(Arc::clone(&g), g.edges().map(|e| vec![e]).collect::<Vec<_>>().iter().map(Vec::as_slice));
    let mut multipliers = Vec::new();
    for a in g.edges() {
        let mut pairs = Vec::new();
        for u in g.edges() {
            if let Some(p) = algebra.multiply(&letters[u.index()], &letters[a.index()]) {
                pairs.push((vec![u], vec![index[&p]]));
            }
        }
        multipliers.push(pairs_relation(&g, &pairs)?);
    }
    let equality_at = g
        .vertices()
        .map(|v| SyncRelation::diagonal(&ending_at(&k, v)))
        .collect();
    let s = AutomaticStructure::new(algebra, Arc::clone(&g), letters, k.clone(), multipliers, equality_at)?;
    let eq = s.equality().clone();
    s.with_prefix_equality(eq).map(|s| {
        s.with_flags(Flags {
            cross_section: true,
            prefix_closed: true,
        })
    })
}

/// The free semigroupoid on `graph` (or the free category, with one extra
/// identity letter per vertex): all non-empty paths, `K_a = {(w, wa)}`.
pub fn free_structure(graph: Arc<Graph>, identities: bool) -> Result<AutomaticStructure> {
    let algebra: Arc<dyn Semigroupoid> = if identities {
        Arc::new(Free::category(Arc::clone(&graph)))
    } else {
        Arc::new(Free::semigroupoid(Arc::clone(&graph)))
    };
    let mut taken: BTreeSet<String> = graph.edges().map(|e| String::from(graph.edge_id(e))).collect();
    let mut named: Vec<(String, Element)> = graph
        .edges()
        .map(|e| (String::from(graph.edge_id(e)), Element::Path(Path::single(&graph, e))))
        .collect();
    if identities {
        for v in graph.vertices() {
            let n = fresh(&format!("1[{}]", graph.vertex_id(v)), &taken);
            taken.insert(n.clone());
            named.push((n, Element::Path(Path::empty(v))));
        }
    }
    let (g, letters) = letter_graph(&*algebra, &named)?;
    let is_id = |e: Edge| matches!(&letters[e.index()], Element::Path(p) if p.is_empty());
    let id_edge: BTreeMap<Vertex, Edge> = g.edges().filter(|&e| is_id(e)).map(|e| (g.source(e), e)).collect();
    let plain = Automaton::universal(Arc::clone(&g), false)
        .map(Arc::clone(&g), |e| (!is_id(e)).then_some(Some(e)), |v| v);
    let ids: Vec<Vec<Edge>> = id_edge.values().map(|&e| vec![e]).collect();
    let k = plain.union(&Automaton::from_words(Arc::clone(&g), ids.iter().map(Vec::as_slice)))?;
    let mut multipliers = Vec::new();
    for a in g.edges() {
        let v = g.source(a);
        let rel = if is_id(a) {
            SyncRelation::diagonal(&ending_at(&k, v))
        } else {
            let table: BTreeMap<Vec<Edge>, Path> = g
                .edges()
                .filter(|&x| !is_id(x) && g.target(x) == v)
                .map(|x| Ok((vec![x], Path::from_edges(&g, vec![x, a])?)))
                .collect::<Result<_>>()?;
            let mut rel = SyncRelation::diagonal(&ending_at(&plain, v));
            if !table.is_empty() {
                rel = rel.rewrite_tail(1, &table)?;
            }
            if let Some(&i) = id_edge.get(&v) {
                rel = rel.union(&pairs_relation(&g, &[(vec![i], vec![a])])?)?;
            }
            rel
        };
        multipliers.push(rel.minimize());
    }
    let equality_at = g.vertices().map(|v| SyncRelation::diagonal(&ending_at(&k, v))).collect();
    let s = AutomaticStructure::new(algebra, Arc::clone(&g), letters, k, multipliers, equality_at)?;
    let eq = s.equality().clone();
    Ok(s.with_prefix_equality(eq)?.with_flags(Flags {
        cross_section: true,
        prefix_closed: true,
    }))
}

/// Moves a structure to a new alphabet through a value-preserving letter
/// map; each relation is mapped coordinatewise.
fn transport(
    s: &AutomaticStructure,
    g: &Arc<Graph>,
    letters: Vec<Element>,
    sigma: &[Edge],
    extra: Vec<(Edge, SyncRelation)>,
) -> Result<AutomaticStructure> {
    let old = s.alphabet();
    let vmap: Vec<Vertex> = old
        .vertices()
        .map(|v| g.vertex(old.vertex_id(v)).ok_or(Error::GraphMismatch))
        .collect::<Result<_>>()?;
    let vertex = |v: Vertex| vmap[v.index()];
    let letter = |e: Edge| sigma[e.index()];
    let k = s.language().map(Arc::clone(g), |e| Some(Some(letter(e))), vertex);
    let mut multipliers: Vec<Option<SyncRelation>> = vec![None; g.edge_count()];
    for e in old.edges() {
        let t = letter(e);
        if multipliers[t.index()].is_none() {
            multipliers[t.index()] = Some(s.multiplier(e).relabel(Arc::clone(g), letter, vertex).minimize());
        }
    }
    for (e, rel) in extra {
        multipliers[e.index()] = Some(rel.relabel(Arc::clone(g), letter, vertex).minimize());
    }
    let multipliers = multipliers
        .into_iter()
        .map(|m| m.ok_or_else(|| Error::Precondition(String::from("letter without a multiplier"))))
        .collect::<Result<Vec<_>>>()?;
    let mut equality_at = vec![SyncRelation::empty(Arc::clone(g)); g.vertex_count()];
    for v in old.vertices() {
        equality_at[vertex(v).index()] = s.equality_at(v).relabel(Arc::clone(g), letter, vertex).minimize();
    }
    let mut out = AutomaticStructure::new(Arc::clone(s.algebra()), Arc::clone(g), letters, k, multipliers, equality_at)?
        .with_flags(s.flags());
    if let Some(p) = s.prefix_equality() {
        out = out.with_prefix_equality(p.relabel(Arc::clone(g), letter, vertex).minimize())?;
    }
    Ok(out)
}

/// Drops letters with repeated values and adds a fresh letter for each
/// element of `extra` that no letter represents, so letters are injective
/// and cover `extra`. The structure must be a cross-section or have a
/// prefix-closed language. Fresh letters get the multiplier of a shortest
/// representative of length at most `search_len`.
pub fn injectivize_alphabet(s: &AutomaticStructure, extra: &[Element], search_len: usize) -> Result<AutomaticStructure> {
    if !s.is_cross_section()? && !s.is_prefix_closed()? {
        return Err(Error::Precondition(String::from(
            "injectivizing needs a cross-section or a prefix-closed language",
        )));
    }
    let old = s.alphabet();
    let algebra = Arc::clone(s.algebra());
    let mut keep: BTreeMap<Element, Edge> = BTreeMap::new();
    for e in old.edges() {
        keep.entry(s.letter(e).clone()).or_insert(e);
    }
    let mut taken: BTreeSet<String> = old.edges().map(|e| String::from(old.edge_id(e))).collect();
    let mut named: Vec<(String, Element)> = keep
        .iter()
        .map(|(x, &e)| (String::from(old.edge_id(e)), x.clone()))
        .collect();
    let mut fresh_letters = Vec::new();
    for t in extra {
        if keep.contains_key(t) || fresh_letters.iter().any(|(_, x)| x == t) {
            continue;
        }
        if !algebra.contains(t) {
            return Err(Error::UnknownElement(algebra.describe(t)));
        }
        let n = fresh(&format!("y[{}]", algebra.describe(t)), &taken);
        taken.insert(n.clone());
        fresh_letters.push((n, t.clone()));
    }
    named.extend(fresh_letters.iter().cloned());
    let (g, letters) = letter_graph(&*algebra, &named)?;
    let sigma: Vec<Edge> = old
        .edges()
        .map(|e| g.edge(old.edge_id(keep[s.letter(e)])).ok_or(Error::GraphMismatch))
        .collect::<Result<_>>()?;
    let mut extra_rel = Vec::new();
    for (n, t) in &fresh_letters {
        let w = s.representative(t, search_len)?;
        extra_rel.push((g.edge(n).ok_or(Error::GraphMismatch)?, s.relation_for_word(&w)?));
    }
    transport(s, &g, letters, &sigma, extra_rel)
}

/// Input for assembling a structure from relations known on a cofinite
/// part `L` of the language `K`.
#[derive(Clone, Debug)]
pub struct CofiniteParts {
    pub algebra: Arc<dyn Semigroupoid>,
    pub alphabet: Arc<Graph>,
    pub letters: Vec<Element>,
    pub language: PathAutomaton,
    pub sub: PathAutomaton,
    /// `K_= ∩ (L × L)`.
    pub equality: SyncRelation,
    /// `K_c ∩ (L × K)` per edge.
    pub multipliers: Vec<SyncRelation>,
}

struct Classes<'a> {
    p: &'a CofiniteParts,
    finite: Vec<(Vec<Edge>, Element)>,
    reps: BTreeMap<Element, Vec<Edge>>,
}

impl Classes<'_> {
    /// `{x ∈ K : xσ = e}`, using an `L`-representative when one is known.
    fn class(&self, e: &Element) -> Result<PathAutomaton> {
        let g = &self.p.alphabet;
        let words: Vec<&[Edge]> = self
            .finite
            .iter()
            .filter(|(_, x)| x == e)
            .map(|(w, _)| w.as_slice())
            .collect();
        let mut out = Automaton::from_words(Arc::clone(g), words);
        if let Some(u) = self.reps.get(e) {
            let row = SyncRelation::single_times(u, &self.p.sub)?;
            out = out.union(&self.p.equality.intersection(&row)?.project_second())?;
        }
        Ok(out.minimize())
    }
}

fn finite_words(a: &PathAutomaton) -> Result<Vec<Vec<Edge>>> {
    if !a.is_finite() {
        return Err(Error::Precondition(String::from("the complement of the sublanguage is infinite")));
    }
    Ok(a.enumerate(a.state_count() + 1))
}

/// Builds the full relations from their restrictions to a cofinite
/// sublanguage. `L`-representatives of elements are searched up to length
/// `search_len`; elements with none are assumed to be represented only in
/// `K \ L`.
pub fn assemble_from_cofinite_sublanguage(parts: &CofiniteParts, search_len: usize) -> Result<AutomaticStructure> {
    let g = &parts.alphabet;
    let algebra = &*parts.algebra;
    let k = parts.language.without_empty();
    let l = parts.sub.without_empty();
    if !l.difference(&k)?.is_empty() {
        return Err(Error::Precondition(String::from("the sublanguage is not contained in the language")));
    }
    let d = finite_words(&k.difference(&l)?)?;
    let finite = d
        .iter()
        .map(|w| Ok((w.clone(), value(algebra, &parts.letters, w)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut reps = BTreeMap::new();
    for w in l.enumerate(search_len) {
        reps.entry(value(algebra, &parts.letters, &w)?).or_insert(w);
    }
    let cl = Classes { p: parts, finite, reps };
    let mut eq_parts = vec![parts.equality.clone()];
    for (w, x) in &cl.finite {
        let c = cl.class(x)?;
        eq_parts.push(SyncRelation::single_times(w, &c)?);
        eq_parts.push(SyncRelation::times_single(&c, w)?);
    }
    let eq = SyncRelation::union_all(Arc::clone(g), eq_parts.iter()).minimize();
    let mut multipliers = Vec::new();
    for c in g.edges() {
        let mut rel_parts = vec![parts.multipliers[c.index()].clone()];
        for (w, x) in &cl.finite {
            if g.target(*w.last().unwrap_or(&c)) != g.source(c) {
                continue;
            }
            let Some(xc) = algebra.multiply(x, &parts.letters[c.index()]) else { continue };
            rel_parts.push(SyncRelation::single_times(w, &cl.class(&xc)?)?);
        }
        multipliers.push(SyncRelation::union_all(Arc::clone(g), rel_parts.iter()).minimize());
    }
    let equality_at = per_vertex(&eq, &k)?;
    AutomaticStructure::new(
        Arc::clone(&parts.algebra),
        Arc::clone(g),
        parts.letters.clone(),
        k,
        multipliers,
        equality_at,
    )?
    .with_equality(eq)
}

/// Extends a structure with language `L` to a language `K ⊇ L` with
/// `K \ L` finite. Every word of `K \ L` must represent an element already
/// represented in `L` by a word of length at most `search_len`.
pub fn extend_language(s: &AutomaticStructure, k: &PathAutomaton, search_len: usize) -> Result<AutomaticStructure> {
    let g = s.alphabet();
    let l = s.language();
    let k = k.without_empty();
    let d = finite_words(&k.difference(l)?)?;
    let mut reps = BTreeMap::new();
    for w in l.enumerate(search_len) {
        reps.entry(s.evaluate(&w)?).or_insert(w);
    }
    let mut u_of = Vec::new();
    for w in &d {
        let x = s.evaluate(w)?;
        let u = reps.get(&x).ok_or_else(|| {
            Error::Precondition(format!(
                "{} represents {}, which has no representative of length at most {search_len} in the sublanguage",
                s.format(w),
                s.algebra().describe(&x)
            ))
        })?;
        u_of.push((w.clone(), u.clone()));
    }
    let mut multipliers = Vec::new();
    for c in g.edges() {
        let lc = s.multiplier(c);
        let mut rel_parts = vec![lc.clone()];
        for (w, u) in &u_of {
            let hits = lc.intersection(&SyncRelation::times_single(l, u)?)?.project_first();
            if !hits.is_empty() {
                rel_parts.push(SyncRelation::times_single(&hits, w)?);
            }
        }
        multipliers.push(SyncRelation::union_all(Arc::clone(g), rel_parts.iter()).minimize());
    }
    let parts = CofiniteParts {
        algebra: Arc::clone(s.algebra()),
        alphabet: Arc::clone(g),
        letters: s.letters().to_vec(),
        language: k,
        sub: l.clone(),
        equality: s.equality().clone(),
        multipliers,
    };
    let out = assemble_from_cofinite_sublanguage(&parts, search_len)?;
    let cross = s.flags().cross_section && d.is_empty();
    Ok(out.with_flags(Flags {
        cross_section: cross,
        prefix_closed: false,
    }))
}

/// The consolidation of the algebra of `s`, with one vertex, the letters of
/// `s` plus a zero letter `z`, and `K ∪ {z}` as language.
pub fn consolidation_transfer(s: &AutomaticStructure) -> Result<AutomaticStructure> {
    let old = s.alphabet();
    let algebra: Arc<dyn Semigroupoid> = Arc::new(Consolidation::new(Arc::clone(s.algebra())));
    let mut taken: BTreeSet<String> = old.edges().map(|e| String::from(old.edge_id(e))).collect();
    let z_name = fresh("z", &taken);
    taken.insert(z_name.clone());
    let mut named: Vec<(String, Element)> = old
        .edges()
        .map(|e| (String::from(old.edge_id(e)), s.letter(e).clone()))
        .collect();
    named.push((z_name.clone(), Element::Adjoined));
    let (g, letters) = letter_graph(&*algebra, &named)?;
    let z = g.edge(&z_name).ok_or(Error::GraphMismatch)?;
    let sigma: Vec<Edge> = old
        .edges()
        .map(|e| g.edge(old.edge_id(e)).ok_or(Error::GraphMismatch))
        .collect::<Result<_>>()?;
    let star = Vertex(0);
    let flat_lang = |a: &PathAutomaton| a.map(Arc::clone(&g), |e| Some(Some(sigma[e.index()])), |_| star);
    let flat = |r: &SyncRelation| r.relabel(Arc::clone(&g), |e| sigma[e.index()], |_| star);
    let zw = Automaton::from_words(Arc::clone(&g), [&[z][..]]);
    let k = flat_lang(s.language()).union(&zw)?;
    let zz = SyncRelation::diagonal(&zw);
    let mut multipliers = vec![SyncRelation::empty(Arc::clone(&g)); g.edge_count()];
    for a in old.edges() {
        let wrong = s.language().restrict_endpoints(|_| true, |v| v != old.source(a));
        let to_zero = SyncRelation::times_single(&flat_lang(&wrong), &[z])?;
        multipliers[sigma[a.index()].index()] = flat(s.multiplier(a)).union(&to_zero)?.union(&zz)?.minimize();
    }
    multipliers[z.index()] = SyncRelation::times_single(&k, &[z])?.minimize();
    let eq = flat(s.equality()).union(&zz)?.minimize();
    let mut out = AutomaticStructure::new(algebra, Arc::clone(&g), letters, k, multipliers, vec![eq])?.with_flags(s.flags());
    if let Some(p) = s.prefix_equality() {
        out = out.with_prefix_equality(flat(p).union(&zz)?.minimize())?;
    }
    Ok(out)
}

/// Stores `K'_=` for a structure whose language is prefix-closed, where it
/// coincides with `K_=`.
pub fn prefix_close(s: AutomaticStructure) -> Result<AutomaticStructure> {
    if !s.is_prefix_closed()? {
        return Err(Error::Precondition(String::from("the language is not prefix-closed")));
    }
    let eq = s.equality().clone();
    let flags = Flags {
        prefix_closed: true,
        ..s.flags()
    };
    Ok(s.with_prefix_equality(eq)?.with_flags(flags))
}
