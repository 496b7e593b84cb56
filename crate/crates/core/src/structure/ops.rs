//! Changing the algebra under a structure: restriction to a
//! subsemigroupoid, adjoining identities or a zero, and closing the
//! language under prefixes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::build::{fresh, letter_graph};
use super::{AutomaticStructure, Flags};
use crate::algebra::{Element, Semigroupoid};
use crate::automaton::{Automaton, PathAutomaton};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Vertex};
use crate::sync::SyncRelation;

fn vertex_map(old: &Graph, new: &Graph) -> Result<Vec<Vertex>> {
    old.vertices()
        .map(|v| new.vertex(old.vertex_id(v)).ok_or(Error::GraphMismatch))
        .collect()
}

fn edge_map(old: &Graph, new: &Graph) -> Result<Vec<Edge>> {
    old.edges()
        .map(|e| new.edge(old.edge_id(e)).ok_or(Error::GraphMismatch))
        .collect()
}

/// The structure for a subsemigroupoid `sub` with the same objects: letters
/// with values outside `sub` are dropped and the language becomes
/// `K ∩ X_U⁺`. Fails when infinitely many words are lost or when a lost
/// word represents an element of `sub` that keeps no representative of
/// length at most `search_len`.
pub fn restrict_to(s: &AutomaticStructure, sub: Arc<dyn Semigroupoid>, search_len: usize) -> Result<AutomaticStructure> {
    let old = s.alphabet();
    let keep: Vec<bool> = old.edges().map(|e| sub.contains(s.letter(e))).collect();
    let named: Vec<(String, Element)> = old
        .edges()
        .filter(|e| keep[e.index()])
        .map(|e| (String::from(old.edge_id(e)), s.letter(e).clone()))
        .collect();
    let (g, letters) = letter_graph(&*sub, &named)?;
    let sigma: Vec<Option<Edge>> = old
        .edges()
        .map(|e| if keep[e.index()] { g.edge(old.edge_id(e)) } else { None })
        .collect();
    let vmap = vertex_map(old, &g)?;
    let vertex = |v: Vertex| vmap[v.index()];
    let letter = |e: Edge| sigma[e.index()];
    let over_kept = Automaton::universal(Arc::clone(old), false).map(Arc::clone(old), |e| keep[e.index()].then_some(Some(e)), |v| v);
    let k_old = s.language().intersection(&over_kept)?.minimize();
    let lost = s.language().difference(&over_kept)?;
    if !lost.is_finite() {
        return Err(Error::Unsupported(String::from(
            "infinitely many representatives use letters outside the subsemigroupoid",
        )));
    }
    let mut reps: Option<BTreeSet<Element>> = None;
    for w in lost.enumerate(lost.state_count() + 1) {
        let x = s.evaluate(&w)?;
        if !sub.contains(&x) {
            continue;
        }
        let known = match &mut reps {
            Some(r) => r,
            None => reps.insert(
                k_old
                    .enumerate(search_len)
                    .iter()
                    .map(|u| s.evaluate(u))
                    .collect::<Result<_>>()?,
            ),
        };
        if !known.contains(&x) {
            return Err(Error::Unsupported(format!(
                "{} loses its representatives in the subsemigroupoid",
                sub.describe(&x)
            )));
        }
    }
    let cut = |r: &SyncRelation, second: &PathAutomaton| -> Result<SyncRelation> {
        Ok(r.restrict(&k_old, second)?.relabel_partial(Arc::clone(&g), letter, vertex).minimize())
    };
    let mut multipliers = vec![SyncRelation::empty(Arc::clone(&g)); g.edge_count()];
    for e in old.edges() {
        if let Some(t) = letter(e) {
            multipliers[t.index()] = cut(s.multiplier(e), &k_old)?;
        }
    }
    let mut equality_at = vec![SyncRelation::empty(Arc::clone(&g)); g.vertex_count()];
    for v in old.vertices() {
        equality_at[vertex(v).index()] = cut(s.equality_at(v), &k_old)?;
    }
    let k = k_old.map(Arc::clone(&g), |e| letter(e).map(Some), vertex);
    let mut out = AutomaticStructure::new(sub, Arc::clone(&g), letters, k, multipliers, equality_at)?.with_flags(s.flags());
    if let Some(p) = s.prefix_equality() {
        out = out.with_prefix_equality(cut(p, &k_old.prefix_closure())?)?;
    }
    Ok(out)
}

/// Adjoins a letter `1[v]` for each `(v, e)`, where `e` is an identity at
/// object `v` of `bar`, an extension of the algebra of `s` by these
/// identities. Letters keep their names; `K ∪ {1[v]}` is the new language.
pub fn adjoin_identity_letters(
    s: &AutomaticStructure,
    bar: Arc<dyn Semigroupoid>,
    ids: &[(u32, Element)],
    search_len: usize,
) -> Result<AutomaticStructure> {
    let old = s.alphabet();
    let mut taken: BTreeSet<String> = old.edges().map(|e| String::from(old.edge_id(e))).collect();
    let mut named: Vec<(String, Element)> = old
        .edges()
        .map(|e| (String::from(old.edge_id(e)), s.letter(e).clone()))
        .collect();
    let mut id_names = Vec::new();
    for (v, e) in ids {
        let n = fresh(&format!("1[{}]", bar.objects()[*v as usize]), &taken);
        taken.insert(n.clone());
        named.push((n.clone(), e.clone()));
        id_names.push(n);
    }
    let (g, letters) = letter_graph(&*bar, &named)?;
    let sigma = edge_map(old, &g)?;
    let vmap = vertex_map(old, &g)?;
    let vertex = |v: Vertex| vmap[v.index()];
    let letter = |e: Edge| sigma[e.index()];
    let move_rel = |r: &SyncRelation| r.relabel(Arc::clone(&g), letter, vertex);
    let mut id_edge: BTreeMap<Vertex, Edge> = BTreeMap::new();
    for n in &id_names {
        let e = g.edge(n).ok_or(Error::GraphMismatch)?;
        id_edge.insert(g.source(e), e);
    }
    let singles: Vec<Vec<Edge>> = id_edge.values().map(|&e| vec![e]).collect();
    let ones = Automaton::from_words(Arc::clone(&g), singles.iter().map(Vec::as_slice));
    let k = s.language().map(Arc::clone(&g), |e| Some(Some(letter(e))), vertex).union(&ones)?;
    let mut equality_at = vec![SyncRelation::empty(Arc::clone(&g)); g.vertex_count()];
    for v in old.vertices() {
        equality_at[vertex(v).index()] = move_rel(s.equality_at(v));
    }
    for (&v, &e) in &id_edge {
        let one = Automaton::from_words(Arc::clone(&g), [&[e][..]]);
        equality_at[v.index()] = equality_at[v.index()].union(&SyncRelation::diagonal(&one))?.minimize();
    }
    let eq = SyncRelation::union_all(Arc::clone(&g), equality_at.iter());
    let mut multipliers = vec![SyncRelation::empty(Arc::clone(&g)); g.edge_count()];
    for a in old.edges() {
        let t = letter(a);
        let mut rel = move_rel(s.multiplier(a));
        if let Some(&one) = id_edge.get(&g.source(t)) {
            let rep: Vec<Edge> = s.representative(s.letter(a), search_len)?.into_iter().map(letter).collect();
            let pair = SyncRelation::single_times(&[one], &Automaton::from_words(Arc::clone(&g), [rep.as_slice()]))?;
            rel = rel.union(&pair)?;
        }
        multipliers[t.index()] = rel.minimize();
    }
    for (&v, &e) in &id_edge {
        let ending = k.restrict_endpoints(|_| true, |t| t == v);
        multipliers[e.index()] = eq.restrict(&ending, &k)?.minimize();
    }
    let mut out = AutomaticStructure::new(bar, Arc::clone(&g), letters, k, multipliers, equality_at)?.with_flags(s.flags());
    if let Some(p) = s.prefix_equality() {
        out = out.with_prefix_equality(move_rel(p).union(&SyncRelation::diagonal(&ones))?.minimize())?;
    }
    Ok(out)
}

/// Embeds a structure for a one-object semigroup without zero into the
/// semigroup with a zero adjoined (`algebra0`, whose zero is
/// [`Element::Zero`]); adds a letter `z`.
pub fn adjoin_zero(s: &AutomaticStructure, algebra0: Arc<dyn Semigroupoid>) -> Result<AutomaticStructure> {
    let old = s.alphabet();
    if old.vertex_count() != 1 {
        return Err(Error::Precondition(String::from("adjoining a zero needs a one-object semigroup")));
    }
    let taken: BTreeSet<String> = old.edges().map(|e| String::from(old.edge_id(e))).collect();
    let z_name = fresh("z", &taken);
    let mut named: Vec<(String, Element)> = old
        .edges()
        .map(|e| (String::from(old.edge_id(e)), s.letter(e).clone()))
        .collect();
    named.push((z_name.clone(), Element::Zero));
    let (g, letters) = letter_graph(&*algebra0, &named)?;
    let z = g.edge(&z_name).ok_or(Error::GraphMismatch)?;
    let sigma = edge_map(old, &g)?;
    let vmap = vertex_map(old, &g)?;
    let vertex = |v: Vertex| vmap[v.index()];
    let move_rel = |r: &SyncRelation| r.relabel(Arc::clone(&g), |e| sigma[e.index()], vertex);
    let zw = Automaton::from_words(Arc::clone(&g), [&[z][..]]);
    let zz = SyncRelation::diagonal(&zw);
    let k = s.language().map(Arc::clone(&g), |e| Some(Some(sigma[e.index()])), vertex).union(&zw)?;
    let mut multipliers = vec![SyncRelation::empty(Arc::clone(&g)); g.edge_count()];
    for a in old.edges() {
        multipliers[sigma[a.index()].index()] = move_rel(s.multiplier(a)).union(&zz)?.minimize();
    }
    multipliers[z.index()] = SyncRelation::times_single(&k, &[z])?.minimize();
    let eq = move_rel(s.equality()).union(&zz)?.minimize();
    let mut out = AutomaticStructure::new(algebra0, Arc::clone(&g), letters, k, multipliers, vec![eq])?.with_flags(s.flags());
    if let Some(p) = s.prefix_equality() {
        out = out.with_prefix_equality(move_rel(p).union(&zz)?.minimize())?;
    }
    Ok(out)
}

/// Replaces the language `K` of a prefix-automatic structure by `Pref(K)`,
/// composing each relation with `K'_=` on both sides.
pub fn close_prefixes(s: &AutomaticStructure) -> Result<AutomaticStructure> {
    let t = s
        .prefix_equality()
        .ok_or_else(|| Error::Precondition(String::from("closing under prefixes needs K'[=]")))?;
    let g = s.alphabet();
    let t_inv = t.inverse();
    let p = s.language().prefix_closure();
    let conj = |r: &SyncRelation| -> Result<SyncRelation> { Ok(t_inv.compose(r)?.compose(t)?.minimize()) };
    let multipliers = g.edges().map(|e| conj(s.multiplier(e))).collect::<Result<Vec<_>>>()?;
    let eq = t_inv.compose(t)?.minimize();
    let equality_at = g
        .vertices()
        .map(|v| Ok(eq.restrict(&p.restrict_endpoints(|_| true, |t| t == v), &p)?.minimize()))
        .collect::<Result<Vec<_>>>()?;
    let out = AutomaticStructure::new(Arc::clone(s.algebra()), Arc::clone(g), s.letters().to_vec(), p, multipliers, equality_at)?;
    let eq = out.equality().clone();
    Ok(out.with_prefix_equality(eq)?.with_flags(Flags {
        cross_section: false,
        prefix_closed: true,
    }))
}

/// The structure with a finite language `K`, all relations computed
/// pointwise.
pub fn from_finite_language(
    algebra: Arc<dyn Semigroupoid>,
    alphabet: Arc<Graph>,
    letters: Vec<Element>,
    k: PathAutomaton,
) -> Result<AutomaticStructure> {
    if !k.is_finite() {
        return Err(Error::Precondition(String::from("the language is infinite")));
    }
    let g = alphabet;
    let empty = |g: &Arc<Graph>| SyncRelation::empty(Arc::clone(g));
    let shell = AutomaticStructure::new(
        Arc::clone(&algebra),
        Arc::clone(&g),
        letters.clone(),
        k.clone(),
        vec![empty(&g); g.edge_count()],
        vec![empty(&g); g.vertex_count()],
    )?;
    let bound = k.state_count() + 1;
    let to_rel = |pairs: BTreeSet<(Vec<Edge>, Vec<Edge>)>| -> Result<SyncRelation> {
        let paths = pairs
            .into_iter()
            .map(|(a, b)| Ok((crate::graph::Path::from_edges(&g, a)?, crate::graph::Path::from_edges(&g, b)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SyncRelation::from_pairs(Arc::clone(&g), paths.iter().map(|(a, b)| (a, b)))?.minimize())
    };
    let multipliers = g
        .edges()
        .map(|e| to_rel(shell.bruteforce(super::Relation::Edge(e), bound)?))
        .collect::<Result<Vec<_>>>()?;
    let equality_at = g
        .vertices()
        .map(|v| to_rel(shell.bruteforce(super::Relation::Vertex(v), bound)?))
        .collect::<Result<Vec<_>>>()?;
    let prefix = to_rel(shell.bruteforce(super::Relation::PrefixEquality, bound)?)?;
    let out = AutomaticStructure::new(algebra, g, letters, k, multipliers, equality_at)?;
    let flags = Flags {
        cross_section: out.is_cross_section()?,
        prefix_closed: out.is_prefix_closed()?,
    };
    Ok(out.with_prefix_equality(prefix)?.with_flags(flags))
}
