//! From a structure for a category `S` to one for `M⁰[S; I, Λ; P]`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{fg_check, ReesData, ReesMatrix, TransferOptions};
use crate::algebra::{tabulate, Element, Excluding, IdentityMode, Semigroupoid};
use crate::automaton::{Automaton, Builder, PathAutomaton, StateId};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Path, Vertex};
use crate::structure::{
    adjoin_identity_letters, assemble_from_cofinite_sublanguage, fresh, injectivize_alphabet, letter_graph,
    restrict_to, trivial_structure, AutomaticStructure, CofiniteParts, Flags,
};
use crate::swi::{image_of_regular, rel_image, Psi, SlidingWindowInverse, SyncWitness, WindowTable};
use crate::sync::SyncRelation;

/// `(i, g, h, λ)`, the letter `a[i|g|h|λ]` with value `(i, gh, λ)`.
pub(super) type ALetter = (u32, Element, Element, u32);

/// `yσ = s P_{λi} t`.
#[derive(Clone, Debug)]
struct Split {
    s: Element,
    lambda: u32,
    i: u32,
    t: Element,
}

/// The letters of the structure for `M⁰` and, per pair `(i, λ)`, the map
/// `φ_{iλ}` from paths `F(i) → G(λ)` over the alphabet of `U = SP'S` to
/// words over those letters, with its sliding window inverse.
pub struct ForwardEncoding {
    data: Arc<ReesData>,
    x: Arc<Graph>,
    m: Arc<Graph>,
    m_letters: Vec<Element>,
    a_of: Vec<Option<ALetter>>,
    a_edge: Arc<BTreeMap<ALetter, Edge>>,
    z: Edge,
    ids: Vec<Element>,
    swis: BTreeMap<(u32, u32), SlidingWindowInverse>,
}

pub(super) fn factors(s: &dyn Semigroupoid, size: usize) -> Vec<Element> {
    s.arrows().unwrap_or_else(|| s.arrows_up_to(size))
}

pub(super) fn object_vertex(g: &Graph, s: &dyn Semigroupoid, o: u32) -> Result<Vertex> {
    g.vertex(&s.objects()[o as usize]).ok_or(Error::GraphMismatch)
}

fn split_of(data: &ReesData, x: &Element, fs: &[Element]) -> Option<Split> {
    let s = &*data.base;
    for (lambda, i, p) in data.nonzero_entries() {
        for a in fs.iter().filter(|a| s.target(a) == s.source(p)) {
            let Some(ap) = s.multiply(a, p) else { continue };
            if let Some(t) = fs.iter().find(|t| s.multiply(&ap, t).as_ref() == Some(x)) {
                return Some(Split { s: a.clone(), lambda, i, t: t.clone() });
            }
        }
    }
    None
}

impl ForwardEncoding {
    /// `su` is a structure for `U` with injective letters and `complement`
    /// is `S \ U`.
    pub fn new(
        data: Arc<ReesData>,
        m0: Arc<dyn Semigroupoid>,
        su: &AutomaticStructure,
        complement: &[Element],
        opts: &TransferOptions,
    ) -> Result<Self> {
        let s = &*data.base;
        let ids: Vec<Element> = (0..s.objects().len() as u32)
            .map(|o| {
                s.identity(o).ok_or_else(|| {
                    Error::Precondition(format!("object {} has no identity", s.objects()[o as usize]))
                })
            })
            .collect::<Result<_>>()?;
        let x = Arc::clone(su.alphabet());
        let fs = factors(s, opts.search_size);
        let mut splits = Vec::new();
        for y in x.edges() {
            let v = su.letter(y);
            splits.push(split_of(&data, v, &fs).ok_or_else(|| Error::SearchExhausted {
                what: format!("a factorisation s P t of {}", s.describe(v)),
                bound: opts.search_size,
            })?);
        }
        let mut h: BTreeSet<Element> = ids.iter().cloned().collect();
        for sp in &splits {
            h.insert(sp.s.clone());
            h.insert(sp.t.clone());
        }
        let mut taken = BTreeSet::new();
        let mut named: Vec<(String, Element)> = Vec::new();
        let mut name = |base: String, v: Element, named: &mut Vec<(String, Element)>| {
            let n = fresh(&base, &taken);
            taken.insert(n.clone());
            named.push((n.clone(), v));
            n
        };
        let mut a_names: Vec<(String, ALetter)> = Vec::new();
        for (i, &fi) in data.row_object.iter().enumerate() {
            for g in h.iter().filter(|g| s.source(g) == fi) {
                for hh in h.iter().filter(|hh| s.source(hh) == s.target(g)) {
                    let Some(gh) = s.multiply(g, hh) else { continue };
                    for (l, &gl) in data.col_object.iter().enumerate() {
                        if s.target(hh) != gl {
                            continue;
                        }
                        let base = format!(
                            "a[{}|{}|{}|{}]",
                            data.rows[i],
                            s.describe(g),
                            s.describe(hh),
                            data.cols[l]
                        );
                        let value = Element::Triple(i as u32, alloc::boxed::Box::new(gh.clone()), l as u32);
                        let n = name(base, value, &mut named);
                        a_names.push((n, (i as u32, g.clone(), hh.clone(), l as u32)));
                    }
                }
            }
        }
        for c in complement {
            for (i, &fi) in data.row_object.iter().enumerate() {
                for (l, &gl) in data.col_object.iter().enumerate() {
                    if s.source(c) == fi && s.target(c) == gl {
                        let base = format!("b[{}|{}|{}]", data.rows[i], s.describe(c), data.cols[l]);
                        name(base, Element::Triple(i as u32, alloc::boxed::Box::new(c.clone()), l as u32), &mut named);
                    }
                }
            }
        }
        let z_name = name(String::from("z"), Element::Zero, &mut named);
        let (m, m_letters) = letter_graph(&*m0, &named)?;
        let z = m.edge(&z_name).ok_or(Error::GraphMismatch)?;
        let mut a_of = vec![None; m.edge_count()];
        let mut a_edge: BTreeMap<ALetter, Edge> = BTreeMap::new();
        for (n, key) in a_names {
            let e = m.edge(&n).ok_or(Error::GraphMismatch)?;
            a_of[e.index()] = Some(key.clone());
            a_edge.insert(key, e);
        }
        let mut by_tail: BTreeMap<(&Element, u32), Vec<Edge>> = BTreeMap::new();
        let mut by_head: BTreeMap<(u32, &Element), Vec<Edge>> = BTreeMap::new();
        for (key, &e) in &a_edge {
            by_tail.entry((&key.2, key.3)).or_default().push(e);
            by_head.entry((key.0, &key.1)).or_default().push(e);
        }
        let mut table: WindowTable = BTreeMap::new();
        let mut next: BTreeMap<Edge, Vec<Edge>> = BTreeMap::new();
        for (y, sp) in x.edges().zip(&splits) {
            let (Some(left), Some(right)) = (by_tail.get(&(&sp.s, sp.lambda)), by_head.get(&(sp.i, &sp.t))) else {
                continue;
            };
            for &a in left {
                for &b in right {
                    table.insert(vec![a, b], Path::single(&x, y));
                    next.entry(a).or_default().push(b);
                }
            }
        }
        let a_edge = Arc::new(a_edge);
        let splits = Arc::new(splits);
        let mut swis = BTreeMap::new();
        for (i, &fi) in data.row_object.iter().enumerate() {
            for (l, &gl) in data.col_object.iter().enumerate() {
                let (i, l) = (i as u32, l as u32);
                let (from, to) = (object_vertex(&x, s, fi)?, object_vertex(&x, s, gl)?);
                let mut b = Builder::new(Arc::clone(&m));
                let star = Vertex(0);
                let start = b.add_state(star);
                b.set_start(start);
                let mut first: BTreeMap<Edge, StateId> = BTreeMap::new();
                let mut later: BTreeMap<Edge, StateId> = BTreeMap::new();
                for e in m.edges() {
                    if a_of[e.index()].is_some() {
                        first.insert(e, b.add_state(star));
                        let st = b.add_state(star);
                        later.insert(e, st);
                        if let Some((_, _, hh, ll)) = &a_of[e.index()] {
                            if *ll == l && *hh == ids[gl as usize] {
                                b.set_terminal(st);
                            }
                        }
                    }
                }
                for (&e, &st) in &first {
                    let Some((ii, g, _, _)) = &a_of[e.index()] else { continue };
                    if *ii == i && *g == ids[fi as usize] {
                        b.add_transition(start, e, st);
                    }
                }
                for (&a, succ) in &next {
                    for &c in succ {
                        b.add_transition(first[&a], c, later[&c]);
                        b.add_transition(later[&a], c, later[&c]);
                    }
                }
                let image = b.finish();
                let domain = Automaton::universal(Arc::clone(&x), false).restrict_endpoints(|v| v == from, |v| v == to);
                let eval = {
                    let (x, a_edge, splits, m) = (Arc::clone(&x), Arc::clone(&a_edge), Arc::clone(&splits), Arc::clone(&m));
                    let (one_f, one_g) = (ids[fi as usize].clone(), ids[gl as usize].clone());
                    move |w: &Path| -> Option<Path> {
                        if w.is_empty() || w.source() != from || w.target() != to {
                            return None;
                        }
                        let ys = w.edges();
                        let mut out = Vec::with_capacity(ys.len() + 1);
                        let s0 = &splits[ys[0].index()];
                        out.push(*a_edge.get(&(i, one_f.clone(), s0.s.clone(), s0.lambda))?);
                        for pair in ys.windows(2) {
                            let (p, q) = (&splits[pair[0].index()], &splits[pair[1].index()]);
                            out.push(*a_edge.get(&(p.i, p.t.clone(), q.s.clone(), q.lambda))?);
                        }
                        let sl = &splits[ys[ys.len() - 1].index()];
                        out.push(*a_edge.get(&(sl.i, sl.t.clone(), one_g.clone(), l))?);
                        let _ = &x;
                        Path::from_edges(&m, out).ok()
                    }
                };
                let swi = SlidingWindowInverse::new(
                    Arc::clone(&x),
                    Arc::clone(&m),
                    2,
                    table.clone(),
                    table.clone(),
                    table.clone(),
                    table.clone(),
                    image,
                )?
                .with_domain(domain)?
                .with_evaluator(Arc::new(eval));
                swis.insert((i, l), swi);
            }
        }
        Ok(ForwardEncoding {
            data,
            x,
            m,
            m_letters,
            a_of,
            a_edge,
            z,
            ids,
            swis,
        })
    }

    /// The encoding used by [`forward_transfer`] for `s`, with the structure
    /// for `U = SP'S` that it reads.
    pub fn for_structure(
        s: &AutomaticStructure,
        data: Arc<ReesData>,
        opts: &TransferOptions,
    ) -> Result<(Self, AutomaticStructure)> {
        let m0: Arc<dyn Semigroupoid> = Arc::new(ReesMatrix::new(Arc::clone(&data), true)?);
        check_base(s, &*data.base)?;
        let (u, complement) = ideal_split(&data, opts)?;
        let su = restricted(s, u, false, opts)?;
        let enc = ForwardEncoding::new(data, m0, &su, &complement, opts)?;
        Ok((enc, su))
    }

    pub fn swi(&self, i: u32, lambda: u32) -> &SlidingWindowInverse {
        &self.swis[&(i, lambda)]
    }

    /// The alphabet of the structure for `M⁰`.
    pub fn alphabet(&self) -> &Arc<Graph> {
        &self.m
    }

    pub fn letters(&self) -> &[Element] {
        &self.m_letters
    }

    pub fn zero_letter(&self) -> Edge {
        self.z
    }

    /// Whether `e` is one of the letters `a[i|g|h|λ]`.
    pub fn is_a_letter(&self, e: Edge) -> bool {
        self.a_of[e.index()].is_some()
    }

    /// Paths `F(i) → G(λ)` in `k`.
    pub(super) fn block(&self, k: &PathAutomaton, i: u32, lambda: u32) -> Result<PathAutomaton> {
        let s = &*self.data.base;
        let from = object_vertex(&self.x, s, self.data.row_object[i as usize])?;
        let to = object_vertex(&self.x, s, self.data.col_object[lambda as usize])?;
        Ok(k.restrict_endpoints(|v| v == from, |v| v == to))
    }

    pub(super) fn blocks(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.swis.keys().copied()
    }

    /// Column index of a letter value; `None` for the zero letter.
    pub(super) fn col_of(&self, e: Edge) -> Option<u32> {
        match &self.m_letters[e.index()] {
            Element::Triple(_, _, l) => Some(*l),
            _ => None,
        }
    }

    pub(super) fn a_letter(&self, key: &ALetter) -> Option<Edge> {
        self.a_edge.get(key).copied()
    }

    pub(super) fn a_letters(&self) -> impl Iterator<Item = (&ALetter, Edge)> + '_ {
        self.a_edge.iter().map(|(k, &e)| (k, e))
    }

    pub(super) fn identity(&self, object: u32) -> &Element {
        &self.ids[object as usize]
    }

    /// The words of `L'`, the relations restricted to it, and the finite
    /// rest of the language, ready for assembly.
    pub(super) fn parts(&self, su: &AutomaticStructure, m0: Arc<dyn Semigroupoid>, opts: &TransferOptions) -> Result<CofiniteParts> {
        let psi = SyncWitness::new(Psi::constant(1));
        let data = &*self.data;
        let s = &*data.base;
        let m = &self.m;
        let mut images = Vec::new();
        let mut blocks: BTreeMap<(u32, u32), PathAutomaton> = BTreeMap::new();
        for (i, l) in self.blocks() {
            let k = self.block(su.language(), i, l)?;
            images.push(image_of_regular(&k, self.swi(i, l))?);
            blocks.insert((i, l), k);
        }
        let l_sub = Automaton::union_all(Arc::clone(m), images.iter()).minimize();
        let finite: Vec<Vec<Edge>> = m.edges().filter(|&e| !self.is_a_letter(e)).map(|e| vec![e]).collect();
        let language = l_sub
            .union(&Automaton::from_words(Arc::clone(m), finite.iter().map(Vec::as_slice)))?
            .minimize();
        let equality = if su.is_cross_section()? {
            SyncRelation::diagonal(&l_sub)
        } else {
            let mut parts = Vec::new();
            for (&(i, l), k) in &blocks {
                let r = su.equality().restrict(k, k)?;
                parts.push(rel_image(&r, self.swi(i, l), self.swi(i, l), &psi)?);
            }
            SyncRelation::union_all(Arc::clone(m), parts.iter())
        }
        .minimize();
        let mut kw_cache: BTreeMap<Element, SyncRelation> = BTreeMap::new();
        let mut image_cache: BTreeMap<(u32, u32, u32, Element), SyncRelation> = BTreeMap::new();
        let mut multipliers = Vec::new();
        for c in m.edges() {
            let Element::Triple(ic, sc, lc) = &self.m_letters[c.index()] else {
                multipliers.push(SyncRelation::times_single(&l_sub, &[self.z])?.minimize());
                continue;
            };
            let zero_last = l_sub.ending_with(|e| self.col_of(e).is_some_and(|l| data.entry(l, *ic).is_none()));
            let mut rel_parts = vec![SyncRelation::times_single(&zero_last, &[self.z])?];
            for (i, l) in self.blocks() {
                let Some(p) = data.entry(l, *ic) else { continue };
                let w = s.multiply(p, sc).ok_or(Error::CompositionMismatch)?;
                let key = (i, l, *lc, w.clone());
                if !image_cache.contains_key(&key) {
                    if !kw_cache.contains_key(&w) {
                        let rep = su.representative(&w, opts.search_len)?;
                        kw_cache.insert(w.clone(), su.relation_for_word(&rep)?);
                    }
                    let r = kw_cache[&w].restrict(&blocks[&(i, l)], &blocks[&(i, *lc)])?;
                    let img = rel_image(&r, self.swi(i, l), self.swi(i, *lc), &psi)?.minimize();
                    image_cache.insert(key.clone(), img);
                }
                rel_parts.push(image_cache[&key].clone());
            }
            multipliers.push(SyncRelation::union_all(Arc::clone(m), rel_parts.iter()).minimize());
        }
        Ok(CofiniteParts {
            algebra: m0,
            alphabet: Arc::clone(m),
            letters: self.m_letters.clone(),
            language,
            sub: l_sub,
            equality,
            multipliers,
        })
    }
}

pub(super) fn check_base(s: &AutomaticStructure, base: &dyn Semigroupoid) -> Result<()> {
    if s.algebra().objects() != base.objects() {
        return Err(Error::Precondition(String::from("the structure is not for the base semigroupoid")));
    }
    if let Some(x) = s.letters().iter().find(|x| !base.contains(x)) {
        return Err(Error::Precondition(format!("letter value {} is not in the base", base.describe(x))));
    }
    Ok(())
}

/// Restricts to `u`, falling back to the trivial structure of a finite `u`
/// when the restriction is not available, then makes letters injective.
pub(super) fn restricted(
    s: &AutomaticStructure,
    u: Arc<dyn Semigroupoid>,
    need_prefix_closed: bool,
    opts: &TransferOptions,
) -> Result<AutomaticStructure> {
    let good = |r: &AutomaticStructure| -> Result<bool> {
        Ok(if need_prefix_closed { r.is_prefix_closed()? } else { r.is_cross_section()? })
    };
    let r = match restrict_to(s, Arc::clone(&u), opts.search_len) {
        Ok(r) if good(&r)? => r,
        Ok(_) | Err(Error::Unsupported(_)) if u.is_finite() => trivial_structure(Arc::clone(&u))?,
        Ok(_) => {
            return Err(Error::Precondition(String::from(if need_prefix_closed {
                "the language is not prefix-closed"
            } else {
                "the structure is not a cross-section"
            })))
        }
        Err(e) => return Err(e),
    };
    injectivize_alphabet(&r, &[], opts.search_len)
}

/// `U = SP'S` and `S \ U`.
pub(super) fn ideal_split(data: &Arc<ReesData>, opts: &TransferOptions) -> Result<(Arc<dyn Semigroupoid>, Vec<Element>)> {
    let verdict = fg_check(data, Some(true), opts.search_size)?;
    let excluded: BTreeSet<Element> = verdict.complement.iter().cloned().collect();
    Ok((Arc::new(Excluding::new(Arc::clone(&data.base), excluded)), verdict.complement))
}

/// A structure for `M⁰[S; I, Λ; P]` from a cross-section structure for the
/// category `S`. For an infinite `S` the complement of `SP'S` is taken to
/// be its part of size at most `search_size`.
pub fn forward_transfer(s: &AutomaticStructure, data: Arc<ReesData>, opts: &TransferOptions) -> Result<AutomaticStructure> {
    let m0: Arc<dyn Semigroupoid> = Arc::new(ReesMatrix::new(Arc::clone(&data), true)?);
    check_base(s, &*data.base)?;
    for o in 0..data.base.objects().len() as u32 {
        if data.base.identity(o).is_none() {
            return Err(Error::Precondition(String::from(
                "the base is not a category; use the general forward transfer",
            )));
        }
    }
    let (u, complement) = ideal_split(&data, opts)?;
    let su = restricted(s, u, false, opts)?;
    let enc = ForwardEncoding::new(Arc::clone(&data), Arc::clone(&m0), &su, &complement, opts)?;
    let parts = enc.parts(&su, m0, opts)?;
    let out = assemble_from_cofinite_sublanguage(&parts, opts.search_len + 1)?;
    Ok(out.with_flags(Flags {
        cross_section: true,
        prefix_closed: false,
    }))
}

/// The base with an identity adjoined at every object, and the data
/// extended by zero rows and columns so that `F` and `G` stay onto.
pub(super) fn with_adjoined_identities(data: &ReesData, mode: IdentityMode) -> Result<(Arc<ReesData>, Vec<(u32, Element)>)> {
    let (fin, arrows) = tabulate(&*data.base)?;
    if arrows.iter().enumerate().any(|(k, x)| *x != Element::Arrow(k as u32)) {
        return Err(Error::Unsupported(String::from("adjoining identities to a base that is not a table")));
    }
    let (bar, new_ids) = fin.adjoin_identities(mode)?;
    let ids: Vec<(u32, Element)> = new_ids
        .iter()
        .enumerate()
        .filter_map(|(v, k)| k.map(|k| (v as u32, Element::Arrow(k))))
        .collect();
    let mut d = ReesData {
        base: Arc::new(bar),
        ..data.clone()
    };
    let objects = d.base.objects().to_vec();
    for (v, name) in objects.iter().enumerate() {
        let v = v as u32;
        if !d.row_object.contains(&v) {
            let taken: BTreeSet<String> = d.rows.iter().cloned().collect();
            d.rows.push(fresh(&format!("i[{name}]"), &taken));
            d.row_object.push(v);
            for row in &mut d.sandwich {
                row.push(None);
            }
        }
        if !d.col_object.contains(&v) {
            let taken: BTreeSet<String> = d.cols.iter().cloned().collect();
            d.cols.push(fresh(&format!("l[{name}]"), &taken));
            d.col_object.push(v);
            d.sandwich.push(vec![None; d.rows.len()]);
        }
    }
    Ok((Arc::new(d), ids))
}

/// The forward transfer for a finite base that need not be a category:
/// identities are adjoined, the transfer runs over the extended data, and
/// the result is restricted back to `M⁰`.
pub fn forward_transfer_general(
    s: &AutomaticStructure,
    data: Arc<ReesData>,
    opts: &TransferOptions,
) -> Result<AutomaticStructure> {
    let m0: Arc<dyn Semigroupoid> = Arc::new(ReesMatrix::new(Arc::clone(&data), true)?);
    check_base(s, &*data.base)?;
    let (bar, ids) = with_adjoined_identities(&data, IdentityMode::Everywhere)?;
    let sbar = adjoin_identity_letters(s, Arc::clone(&bar.base), &ids, opts.search_len)?;
    let big = forward_transfer(&sbar, bar, opts)?;
    let out = match restrict_to(&big, Arc::clone(&m0), opts.search_len) {
        Ok(r) => r,
        Err(Error::Unsupported(_)) => trivial_structure(Arc::clone(&m0))?,
        Err(e) => return Err(e),
    };
    injectivize_alphabet(&out, &[], opts.search_len)
}
