//! The transfers for prefix-automatic structures, which also carry `K'_=`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::backward::{backward_witness, normalized, BackwardEncoding};
use super::forward::{check_base, ideal_split, restricted, ForwardEncoding};
use super::witness::is_identity;
use super::{ReesData, ReesMatrix, RowCrossSectionWitness, TransferOptions};
use crate::algebra::{fold_product, Element, Semigroupoid};
use crate::automaton::{Automaton, Builder, PathAutomaton};
use crate::error::{Error, Result};
use crate::graph::{Edge, Path, Vertex};
use crate::structure::{
    assemble_from_cofinite_sublanguage, close_prefixes, extend_language, injectivize_alphabet, AutomaticStructure,
    Flags,
};
use crate::swi::{image_of_regular, rel_image};
use crate::sync::SyncRelation;

/// `{u ∈ K : uσ = x}` for a structure whose `K_=` is known.
fn class_of(s: &AutomaticStructure, x: &Element, search_len: usize) -> Result<PathAutomaton> {
    let rep = s.representative(x, search_len)?;
    Ok(s
        .equality()
        .intersection(&SyncRelation::single_times(&rep, s.language())?)?
        .project_second()
        .minimize())
}

/// A prefix-automatic structure for `M⁰[S; I, Λ; P]` from one for the
/// category `S`, given a strong row cross-section witness.
pub fn prefix_forward_transfer(
    s: &AutomaticStructure,
    data: Arc<ReesData>,
    witness: &RowCrossSectionWitness,
    opts: &TransferOptions,
) -> Result<AutomaticStructure> {
    if !witness.strong {
        return Err(Error::Precondition(String::from("the prefix transfer needs a strong witness")));
    }
    witness.validate(&data, opts.search_size)?;
    let m0: Arc<dyn Semigroupoid> = Arc::new(ReesMatrix::new(Arc::clone(&data), true)?);
    check_base(s, &*data.base)?;
    let base = &*data.base;
    for o in 0..base.objects().len() as u32 {
        if base.identity(o).is_none() {
            return Err(Error::Precondition(String::from("the base is not a category")));
        }
    }
    let closed = if s.is_prefix_closed()? {
        s.clone()
    } else if s.prefix_equality().is_some() {
        close_prefixes(s)?
    } else if base.is_finite() {
        crate::structure::trivial_structure(Arc::clone(&data.base))?
    } else {
        return Err(Error::Precondition(String::from("the structure is not prefix-automatic")));
    };
    let (u, complement) = ideal_split(&data, opts)?;
    let su = restricted(&closed, u, true, opts)?;
    let enc = ForwardEncoding::new(Arc::clone(&data), Arc::clone(&m0), &su, &complement, opts)?;
    let parts = enc.parts(&su, Arc::clone(&m0), opts)?;
    let len = opts.search_len + 1;
    let full = assemble_from_cofinite_sublanguage(&parts, len)?;
    let m = enc.alphabet();
    let l = full.language().clone();
    let pref = l.prefix_closure();

    let mut ext = Vec::new();
    for (i, &fi) in data.row_object.iter().enumerate() {
        for (lam, &gl) in data.col_object.iter().enumerate() {
            if fi == gl {
                let one = enc.identity(fi).clone();
                if let Some(e) = enc.a_letter(&(i as u32, one.clone(), one, lam as u32)) {
                    ext.push(vec![e]);
                }
            }
        }
    }
    let lbar_lang = l.union(&Automaton::from_words(Arc::clone(m), ext.iter().map(Vec::as_slice)))?;
    let lbar = extend_language(&full, &lbar_lang, len)?;

    let mut rel_parts = vec![full.equality().clone()];
    let mut groups: BTreeSet<(Element, u32)> = BTreeSet::new();
    for (key, _) in enc.a_letters() {
        if !is_identity(base, &key.2) {
            groups.insert((key.2.clone(), key.3));
        }
    }
    for (h, lam) in groups {
        let dec = witness.decompose(&data, &h, opts.search_size)?;
        let t = dec.t.clone().ok_or_else(|| Error::InvalidWitness(String::from("missing right factor")))?;
        let x = Element::Triple(dec.i, alloc::boxed::Box::new(t), lam);
        let mut table: BTreeMap<Vec<Edge>, Path> = BTreeMap::new();
        for (key, e) in enc.a_letters() {
            let (i2, g, hh, mu) = key;
            if *mu != dec.lambda || base.target(g) != base.source(&h) || *hh != *enc.identity(base.target(g)) {
                continue;
            }
            if let Some(to) = enc.a_letter(&(*i2, g.clone(), h.clone(), lam)) {
                table.insert(vec![e], Path::single(m, to));
            }
        }
        if table.is_empty() {
            continue;
        }
        let rep = lbar.representative(&x, len)?;
        let firsts = lbar.language().ending_with(|e| table.contains_key(&vec![e]));
        let r = lbar.relation_for_word(&rep)?.restrict(&firsts, &l)?;
        rel_parts.push(r.inverse().rewrite_tail(1, &table)?);
    }
    for a in m.edges() {
        if !pref.accepts_word(&[a]) {
            continue;
        }
        let class = class_of(&full, full.letter(a), len)?;
        rel_parts.push(SyncRelation::times_single(&class, &[a])?);
    }
    let prefix_eq = SyncRelation::union_all(Arc::clone(m), rel_parts.iter())
        .restrict(&l, &pref)?
        .minimize();
    let flags = Flags {
        cross_section: full.is_cross_section()?,
        prefix_closed: false,
    };
    Ok(full.with_prefix_equality(prefix_eq)?.with_flags(flags))
}

/// Words of `L` whose first letter has its row in `rows`.
fn starting_in(l: &PathAutomaton, ms: &AutomaticStructure, rows: &BTreeSet<u32>) -> Result<PathAutomaton> {
    let m = ms.alphabet();
    let mut b = Builder::new(Arc::clone(m));
    let start = b.add_state(Vertex(0));
    let rest = b.add_state(Vertex(0));
    b.set_start(start);
    b.set_terminal(rest);
    for e in m.edges() {
        if let Element::Triple(i, _, _) = ms.letter(e) {
            if rows.contains(i) {
                b.add_transition(start, e, rest);
            }
        }
        b.add_transition(rest, e, rest);
    }
    l.intersection(&b.finish())
}

/// A prefix-automatic structure for `S` from one for `M⁰[S; I, Λ; P]`.
pub fn prefix_backward_transfer(
    ms: &AutomaticStructure,
    data: Arc<ReesData>,
    opts: &TransferOptions,
) -> Result<AutomaticStructure> {
    let m0 = Arc::new(ReesMatrix::new(Arc::clone(&data), true)?);
    let base = &*data.base;
    let mut cols: BTreeMap<u32, u32> = BTreeMap::new();
    for (l, &o) in data.col_object.iter().enumerate() {
        cols.entry(o).or_insert(l as u32);
    }
    let lambda_prime: Vec<u32> = cols.values().copied().collect();
    let norm = normalized(ms, &m0, &[], true, opts)?;
    let bar_of = |x: &Element| match x {
        Element::Triple(i, s, _) => cols
            .get(&base.target(s))
            .map(|&l| Element::Triple(*i, s.clone(), l)),
        _ => None,
    };
    let extra: Vec<Element> = norm.letters().iter().filter_map(bar_of).collect();
    let norm = injectivize_alphabet(&norm, &extra, opts.search_len)?;
    let enc = BackwardEncoding::new(Arc::clone(&data), &norm, &lambda_prime)?;
    let psi = backward_witness();
    let len = opts.search_len;
    let x = Arc::clone(enc.alphabet());
    let xl = enc.letters().to_vec();
    let lang = norm.language().clone();
    let lv = lang.intersection(enc.domain())?.minimize();
    let k = image_of_regular(&lv, enc.swi())?.minimize();
    let pref_k = k.prefix_closure();
    let m = norm.alphabet();
    let letter_of: BTreeMap<&Element, Edge> = m.edges().map(|e| (norm.letter(e), e)).collect();
    let rows: BTreeSet<u32> = (0..data.rows.len() as u32)
        .filter(|&i| enc.row_for(data.row_object[i as usize]) == Some(i))
        .collect();
    let from_rows = starting_in(&lang, &norm, &rows)?;

    // (φ(w̄), φ(v)) with (w, v) ∈ L_x, w ending in column λ.
    let mut q_cache: BTreeMap<(u32, Element), SyncRelation> = BTreeMap::new();
    let mut q_for = |lam: u32, xe: &Element| -> Result<SyncRelation> {
        let key = (lam, xe.clone());
        if let Some(q) = q_cache.get(&key) {
            return Ok(q.clone());
        }
        let mut bar: BTreeMap<Vec<Edge>, Path> = BTreeMap::new();
        for e in m.edges() {
            let v = norm.letter(e);
            if matches!(v, Element::Triple(_, _, l) if *l == lam) {
                if let Some(to) = bar_of(v).and_then(|b| letter_of.get(&b).copied()) {
                    bar.insert(vec![e], Path::single(m, to));
                }
            }
        }
        let firsts = from_rows.ending_with(|e| bar.contains_key(&vec![e]));
        let q = if bar.is_empty() || firsts.is_empty() {
            SyncRelation::empty(Arc::clone(&x))
        } else {
            let rep = norm.representative(xe, len)?;
            let r = norm.relation_for_word(&rep)?.restrict(&firsts, &lv)?;
            let r = r.inverse().rewrite_tail(1, &bar)?.inverse();
            rel_image(&r, enc.swi(), enc.swi(), &psi)?.minimize()
        };
        q_cache.insert(key, q.clone());
        Ok(q)
    };
    let mut class_cache: BTreeMap<Element, PathAutomaton> = BTreeMap::new();
    let mut class_k = |e: &Element| -> Result<PathAutomaton> {
        if let Some(c) = class_cache.get(e) {
            return Ok(c.clone());
        }
        let (Some(i), Some(l)) = (enc.row_for(base.source(e)), enc.col_for(base.target(e))) else {
            return Err(Error::Precondition(String::from("element outside the rows and columns")));
        };
        let xe = Element::Triple(i, alloc::boxed::Box::new(e.clone()), l);
        let cl = class_of(&norm, &xe, len)?.intersection(&lv)?;
        let c = image_of_regular(&cl, enc.swi())?.minimize();
        class_cache.insert(e.clone(), c.clone());
        Ok(c)
    };
    let value = |w: &[Edge]| -> Result<Element> {
        let xs: Vec<Element> = w.iter().map(|e| xl[e.index()].clone()).collect();
        fold_product(base, &xs)
    };
    let short: Vec<Vec<Edge>> = pref_k.enumerate(2);
    let tails: Vec<Vec<Edge>> = {
        let d_set: BTreeSet<Edge> = data
            .nonzero_entries()
            .iter()
            .filter_map(|(l, i, _)| enc.d_edge(*l, *i))
            .collect();
        let cs: Vec<Edge> = x.edges().filter(|e| !d_set.contains(e)).collect();
        let mut out: Vec<Vec<Edge>> = cs.iter().map(|&c| vec![c]).collect();
        for &c in &cs {
            for &d in &d_set {
                if x.target(c) == x.source(d) {
                    out.push(vec![c, d]);
                }
            }
        }
        out
    };
    let targets: Vec<(Option<Edge>, Vertex)> = x
        .edges()
        .map(|e| (Some(e), x.source(e)))
        .chain(x.vertices().map(|v| (None, v)))
        .collect();
    let mut prefix_rel: BTreeMap<(Option<Edge>, Vertex), SyncRelation> = BTreeMap::new();
    for &(c, v) in &targets {
        let mut rel_parts = Vec::new();
        let mut groups: BTreeMap<(u32, u32, Element), Vec<Vec<Edge>>> = BTreeMap::new();
        for (lam, i, _) in data.nonzero_entries() {
            let Some(d) = enc.d_edge(lam, i) else { continue };
            for b in &tails {
                if x.source(b[0]) != x.target(d) || x.target(*b.last().unwrap()) != v {
                    continue;
                }
                let mut bc = b.clone();
                bc.extend(c);
                let e = value(&bc)?;
                let end = base.target(&e);
                let Some(mu) = enc.col_for(end) else { continue };
                let xe = Element::Triple(i, alloc::boxed::Box::new(e), mu);
                let mut tail = vec![d];
                tail.extend_from_slice(b);
                groups.entry((lam, i, xe)).or_default().push(tail);
            }
        }
        for ((lam, _, xe), tails) in groups {
            let q = q_for(lam, &xe)?;
            if q.is_empty() {
                continue;
            }
            let mut table: BTreeMap<Vec<Edge>, Vec<Path>> = BTreeMap::new();
            for cs in x.edges().filter(|&e| x.target(e) == data_col_vertex(&x, base, &data, lam)) {
                let outs = tails
                    .iter()
                    .map(|t| {
                        let mut w = vec![cs];
                        w.extend_from_slice(t);
                        Path::from_edges(&x, w)
                    })
                    .collect::<Result<Vec<_>>>()?;
                table.insert(vec![cs], outs);
            }
            let ends = Automaton::universal(Arc::clone(&x), false).ending_with(|e| table.contains_key(&vec![e]));
            let q = q.inverse().restrict(&k, &ends)?;
            rel_parts.push(q.rewrite_tail_multi(1, &table)?.inverse());
        }
        for w in &short {
            if x.target(*w.last().unwrap()) != v {
                continue;
            }
            let mut wc = w.clone();
            wc.extend(c);
            let e = value(&wc)?;
            rel_parts.push(SyncRelation::single_times(w, &class_k(&e)?)?);
        }
        let rel = SyncRelation::union_all(Arc::clone(&x), rel_parts.iter())
            .restrict(&pref_k, &k)?
            .minimize();
        prefix_rel.insert((c, v), rel);
    }
    let mut multipliers = Vec::new();
    for e in x.edges() {
        multipliers.push(prefix_rel[&(Some(e), x.source(e))].restrict(&k, &k)?.minimize());
    }
    let mut equality_at = Vec::new();
    let mut inverses = Vec::new();
    for v in x.vertices() {
        let r = &prefix_rel[&(None, v)];
        equality_at.push(r.restrict(&k, &k)?.minimize());
        inverses.push(r.inverse());
    }
    let prefix_eq = SyncRelation::union_all(Arc::clone(&x), inverses.iter()).minimize();
    let out = AutomaticStructure::new(Arc::clone(&data.base), Arc::clone(&x), xl, k, multipliers, equality_at)?;
    let flags = Flags {
        cross_section: out.is_cross_section()?,
        prefix_closed: out.is_prefix_closed()?,
    };
    Ok(out.with_prefix_equality(prefix_eq)?.with_flags(flags))
}

fn data_col_vertex(x: &crate::graph::Graph, base: &dyn Semigroupoid, data: &ReesData, lam: u32) -> Vertex {
    x.vertex(&base.objects()[data.col_object[lam as usize] as usize]).unwrap_or(Vertex(u32::MAX))
}
