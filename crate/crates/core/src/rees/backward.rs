//! From a structure for `M⁰[S; I, Λ; P]` back to one for `S`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::forward::with_adjoined_identities;
use super::witness::is_identity;
use super::{expect_rees_structure, Decomposition, ReesData, ReesMatrix, RowCrossSectionWitness, TransferOptions};
use crate::algebra::{Element, IdentityMode, Semigroupoid};
use crate::automaton::{Builder, PathAutomaton, StateId};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Path, Vertex};
use crate::structure::{
    close_prefixes, fresh, injectivize_alphabet, restrict_to, trivial_structure, AutomaticStructure, Flags,
};
use crate::swi::{image_of_regular, rel_image, Psi, SlidingWindowInverse, SyncWitness, WindowTable};
use crate::sync::SyncRelation;

/// `ψ` for the backward map: one letter from the first window and from
/// every odd window, none from the others.
pub fn backward_witness() -> SyncWitness {
    SyncWitness {
        psi: Psi {
            prefix: vec![1],
            period: vec![1, 0],
        },
        h_slack: 1,
    }
}

/// The generating graph `C ∪ D` for `S` and the map `φ` from the words `V`
/// of the structure for `M⁰` (non-zero letters, non-zero adjacent sandwich
/// entries, first row in `I'`, last column in `Λ'`) to alternating words
/// `c d c … c`, with its sliding window inverse.
pub struct BackwardEncoding {
    x: Arc<Graph>,
    x_letters: Vec<Element>,
    d_edge: BTreeMap<(u32, u32), Edge>,
    row_for: BTreeMap<u32, u32>,
    col_for: BTreeMap<u32, u32>,
    v: PathAutomaton,
    swi: SlidingWindowInverse,
}

fn triple(x: &Element) -> Option<(u32, &Element, u32)> {
    match x {
        Element::Triple(i, s, l) => Some((*i, s, *l)),
        _ => None,
    }
}

impl BackwardEncoding {
    /// `ms` must have injective letters; `cols` is `Λ'`.
    pub fn new(data: Arc<ReesData>, ms: &AutomaticStructure, cols: &[u32]) -> Result<Self> {
        let s = &*data.base;
        let m = Arc::clone(ms.alphabet());
        let mut row_for = BTreeMap::new();
        for (i, &o) in data.row_object.iter().enumerate() {
            row_for.entry(o).or_insert(i as u32);
        }
        let col_for: BTreeMap<u32, u32> = cols.iter().map(|&l| (data.col_object[l as usize], l)).collect();
        let mut by_value: BTreeMap<(u32, &Element, u32), Edge> = BTreeMap::new();
        for e in m.edges() {
            if let Some(t) = triple(ms.letter(e)) {
                by_value.insert(t, e);
            }
        }
        let cs: BTreeSet<&Element> = by_value.keys().map(|k| k.1).collect();
        let mut taken = BTreeSet::new();
        let mut named: Vec<(String, Element)> = Vec::new();
        let mut c_name: BTreeMap<&Element, String> = BTreeMap::new();
        for &c in &cs {
            let n = fresh(&format!("c[{}]", s.describe(c)), &taken);
            taken.insert(n.clone());
            named.push((n.clone(), c.clone()));
            c_name.insert(c, n);
        }
        let mut d_name: BTreeMap<(u32, u32), String> = BTreeMap::new();
        for (l, i, p) in data.nonzero_entries() {
            let n = fresh(&format!("d[{}|{}]", data.cols[l as usize], data.rows[i as usize]), &taken);
            taken.insert(n.clone());
            named.push((n.clone(), p.clone()));
            d_name.insert((l, i), n);
        }
        let (x, x_letters) = crate::structure::letter_graph(s, &named)?;
        let c_edge: BTreeMap<&Element, Edge> = c_name.iter().map(|(&c, n)| (c, x.edge(n).unwrap())).collect();
        let d_edge: BTreeMap<(u32, u32), Edge> = d_name.iter().map(|(&k, n)| (k, x.edge(n).unwrap())).collect();
        let star = Vertex(0);
        let one = |e: Edge| Path::single(&m, e);
        let letter = |i: u32, c: &Element, l: u32| by_value.get(&(i, c, l)).copied();
        let first_row = |c: &Element| row_for.get(&s.source(c)).copied();
        let last_col = |c: &Element| col_for.get(&s.target(c)).copied();
        let (mut f, mut g, mut h, mut short): (WindowTable, WindowTable, WindowTable, WindowTable) = Default::default();
        for (&c1, &e1) in &c_edge {
            if let (Some(i), Some(l)) = (first_row(c1), last_col(c1)) {
                if let Some(a) = letter(i, c1, l) {
                    short.insert(vec![e1], one(a));
                }
            }
            for (&(l1, i2), &d) in &d_edge {
                if x.source(d) != x.target(e1) {
                    continue;
                }
                for (&c2, &e2) in &c_edge {
                    if x.source(e2) != x.target(d) {
                        continue;
                    }
                    let w = vec![e1, d, e2];
                    g.insert(w.clone(), Path::empty(star));
                    let a1 = first_row(c1).and_then(|i| letter(i, c1, l1));
                    if let Some(a1) = a1 {
                        f.insert(w.clone(), one(a1));
                    }
                    let a2 = last_col(c2).and_then(|l| letter(i2, c2, l));
                    if let Some(a2) = a2 {
                        h.insert(w.clone(), one(a2));
                    }
                    if let (Some(a1), Some(a2)) = (a1, a2) {
                        short.insert(w, Path::from_edges(&m, vec![a1, a2])?);
                    }
                }
            }
        }
        for (&(_, i), &d0) in &d_edge {
            for (&c, &e) in &c_edge {
                if x.source(e) != x.target(d0) {
                    continue;
                }
                for (&(l, _), &d1) in &d_edge {
                    if x.source(d1) != x.target(e) {
                        continue;
                    }
                    if let Some(a) = letter(i, c, l) {
                        g.insert(vec![d0, e, d1], one(a));
                    }
                }
            }
        }
        let image = {
            let mut b = Builder::new(Arc::clone(&x));
            let start = b.add_state(Vertex(0));
            let mut start_at: BTreeMap<Vertex, StateId> = BTreeMap::new();
            for v in x.vertices() {
                let st = if v == Vertex(0) { start } else { b.add_state(v) };
                b.set_start(st);
                start_at.insert(v, st);
            }
            let mut c_state: BTreeMap<(u32, &Element), StateId> = BTreeMap::new();
            for &(i, c, _) in by_value.keys() {
                if let alloc::collections::btree_map::Entry::Vacant(slot) = c_state.entry((i, c)) {
                    let st = b.add_state(x.target(c_edge[c]));
                    if last_col(c).is_some_and(|l| letter(i, c, l).is_some()) {
                        b.set_terminal(st);
                    }
                    slot.insert(st);
                }
            }
            let mut d_state: BTreeMap<u32, StateId> = BTreeMap::new();
            for (&(_, i), &d) in &d_edge {
                d_state.entry(i).or_insert_with(|| b.add_state(x.target(d)));
            }
            for (&(i, c), &st) in &c_state {
                if first_row(c) == Some(i) {
                    b.add_transition(start_at[&x.source(c_edge[c])], c_edge[c], st);
                }
                for (&(l, j), &d) in &d_edge {
                    if letter(i, c, l).is_some() && x.source(d) == x.target(c_edge[c]) {
                        b.add_transition(st, d, d_state[&j]);
                    }
                }
            }
            for (&j, &st) in &d_state {
                for (&(i, c), &to) in &c_state {
                    if i == j && data.row_object[j as usize] == s.source(c) {
                        b.add_transition(st, c_edge[c], to);
                    }
                }
            }
            b.finish()
        };
        let v = {
            let mut b = Builder::new(Arc::clone(&m));
            let start = b.add_state(star);
            b.set_start(start);
            let mut after: BTreeMap<Edge, StateId> = BTreeMap::new();
            for (&(_, c, l), &e) in &by_value {
                let st = b.add_state(star);
                if col_for.get(&s.target(c)) == Some(&l) {
                    b.set_terminal(st);
                }
                after.insert(e, st);
            }
            for (&(i, c, _), &e) in &by_value {
                if first_row(c) == Some(i) {
                    b.add_transition(start, e, after[&e]);
                }
            }
            for (&(_, _, l), &e) in &by_value {
                for (&(j, _, _), &e2) in &by_value {
                    if data.entry(l, j).is_some() {
                        b.add_transition(after[&e], e2, after[&e2]);
                    }
                }
            }
            b.finish()
        };
        let eval = {
            let (x, v, m_letters) = (Arc::clone(&x), v.clone(), ms.letters().to_vec());
            let c_edge: BTreeMap<Element, Edge> = c_edge.iter().map(|(&c, &e)| (c.clone(), e)).collect();
            let d_edge = d_edge.clone();
            move |w: &Path| -> Option<Path> {
                if !v.accepts_word(w.edges()) {
                    return None;
                }
                let mut out = Vec::new();
                let mut prev: Option<u32> = None;
                for e in w.edges() {
                    let (i, c, l) = triple(&m_letters[e.index()])?;
                    if let Some(pl) = prev {
                        out.push(*d_edge.get(&(pl, i))?);
                    }
                    out.push(*c_edge.get(c)?);
                    prev = Some(l);
                }
                Path::from_edges(&x, out).ok()
            }
        };
        let swi = SlidingWindowInverse::new(Arc::clone(&m), Arc::clone(&x), 3, f, g, h, short, image)?
            .with_domain(v.clone())?
            .with_evaluator(Arc::new(eval));
        Ok(BackwardEncoding {
            x,
            x_letters,
            d_edge,
            row_for,
            col_for,
            v,
            swi,
        })
    }

    /// The encoding used by [`backward_transfer`] for `ms`, with the
    /// normalised structure that it reads.
    pub fn for_structure(
        ms: &AutomaticStructure,
        data: Arc<ReesData>,
        witness: &RowCrossSectionWitness,
        opts: &TransferOptions,
    ) -> Result<(Self, AutomaticStructure)> {
        let m0 = Arc::new(ReesMatrix::new(Arc::clone(&data), true)?);
        let norm = normalized(ms, &m0, &[], false, opts)?;
        let enc = BackwardEncoding::new(data, &norm, &witness.lambda_prime)?;
        Ok((enc, norm))
    }

    pub fn swi(&self) -> &SlidingWindowInverse {
        &self.swi
    }

    /// The generating graph `C ∪ D` of the structure for `S`.
    pub fn alphabet(&self) -> &Arc<Graph> {
        &self.x
    }

    pub fn letters(&self) -> &[Element] {
        &self.x_letters
    }

    /// The domain `V` of `φ`.
    pub fn domain(&self) -> &PathAutomaton {
        &self.v
    }

    pub(super) fn row_for(&self, object: u32) -> Option<u32> {
        self.row_for.get(&object).copied()
    }

    pub(super) fn col_for(&self, object: u32) -> Option<u32> {
        self.col_for.get(&object).copied()
    }

    /// Words of `V` whose last letter has column `l`.
    pub(super) fn ending_in_col(&self, a: &PathAutomaton, ms: &AutomaticStructure, l: u32) -> PathAutomaton {
        a.ending_with(|e| triple(ms.letter(e)).is_some_and(|t| t.2 == l))
    }

    /// The letter `d[λ|i]`, for a non-zero entry.
    pub(super) fn d_edge(&self, l: u32, i: u32) -> Option<Edge> {
        self.d_edge.get(&(l, i)).copied()
    }
}

/// The structure for `M⁰` made ready for the backward maps: a finite
/// algebra falls back to its trivial structure when needed, and letters
/// are made injective (adding `extra` values).
pub(super) fn normalized(
    ms: &AutomaticStructure,
    m0: &Arc<ReesMatrix>,
    extra: &[Element],
    need_prefix_closed: bool,
    opts: &TransferOptions,
) -> Result<AutomaticStructure> {
    expect_rees_structure(ms, m0)?;
    let ok = if need_prefix_closed {
        ms.is_prefix_closed()?
    } else {
        ms.is_cross_section()? || ms.is_prefix_closed()?
    };
    let base = if ok {
        ms.clone()
    } else if need_prefix_closed && ms.prefix_equality().is_some() {
        close_prefixes(ms)?
    } else if m0.is_finite() {
        trivial_structure(Arc::clone(m0) as Arc<dyn Semigroupoid>)?
    } else {
        return Err(Error::Precondition(String::from(if need_prefix_closed {
            "the language is not prefix-closed"
        } else {
            "the structure is neither a cross-section nor prefix-closed"
        })));
    };
    let base = base.with_algebra(Arc::clone(m0) as Arc<dyn Semigroupoid>)?;
    injectivize_alphabet(&base, extra, opts.search_len)
}

fn search_decomposition(
    witness: &RowCrossSectionWitness,
    data: &ReesData,
    x: &Element,
    opts: &TransferOptions,
) -> Result<Decomposition> {
    witness.decompose(data, x, opts.search_size)
}

/// A structure for `S` from a structure for `M⁰[S; I, Λ; P]` and a strong
/// row cross-section witness.
pub fn backward_transfer(
    ms: &AutomaticStructure,
    data: Arc<ReesData>,
    witness: &RowCrossSectionWitness,
    opts: &TransferOptions,
) -> Result<AutomaticStructure> {
    if !witness.strong {
        return Err(Error::Precondition(String::from("the backward transfer needs a strong witness")));
    }
    witness.validate(&data, opts.search_size)?;
    let m0 = Arc::new(ReesMatrix::new(Arc::clone(&data), true)?);
    let ms = normalized(ms, &m0, &[], false, opts)?;
    let enc = BackwardEncoding::new(Arc::clone(&data), &ms, &witness.lambda_prime)?;
    let s = &*data.base;
    let psi = backward_witness();
    let x = enc.alphabet();
    let lv = ms.language().intersection(enc.domain())?.minimize();
    let k = image_of_regular(&lv, enc.swi())?.minimize();
    let eq = if ms.is_cross_section()? {
        SyncRelation::diagonal(&k)
    } else {
        rel_image(&ms.equality().restrict(&lv, &lv)?, enc.swi(), enc.swi(), &psi)?
    }
    .minimize();
    let ending = |v: Vertex| k.restrict_endpoints(|_| true, |t| t == v);
    let equality_at = x
        .vertices()
        .map(|v| Ok(eq.restrict(&ending(v), &k)?.minimize()))
        .collect::<Result<Vec<_>>>()?;
    let mut cache: BTreeMap<(u32, Element), SyncRelation> = BTreeMap::new();
    let mut multipliers = Vec::new();
    for b in x.edges() {
        let value = &enc.letters()[b.index()];
        if is_identity(s, value) {
            multipliers.push(eq.restrict(&ending(x.source(b)), &k)?.minimize());
            continue;
        }
        let dec = search_decomposition(witness, &data, value, opts)?;
        let t = dec.t.clone().ok_or_else(|| Error::InvalidWitness(String::from("missing right factor")))?;
        let mu = enc
            .col_for(s.target(value))
            .ok_or_else(|| Error::InvalidWitness(String::from("no column over the target")))?;
        let elem = Element::Triple(dec.i, alloc::boxed::Box::new(t), mu);
        let key = (dec.lambda, elem.clone());
        if !cache.contains_key(&key) {
            let rep = ms.representative(&elem, opts.search_len)?;
            let r = ms
                .relation_for_word(&rep)?
                .restrict(&enc.ending_in_col(&lv, &ms, dec.lambda), &lv)?;
            cache.insert(key.clone(), rel_image(&r, enc.swi(), enc.swi(), &psi)?.minimize());
        }
        multipliers.push(cache[&key].clone());
    }
    let out = AutomaticStructure::new(
        Arc::clone(&data.base),
        Arc::clone(x),
        enc.letters().to_vec(),
        k,
        multipliers,
        equality_at,
    )?;
    Ok(out.with_flags(Flags {
        cross_section: ms.flags().cross_section && ms.is_cross_section()?,
        prefix_closed: false,
    }))
}

/// The backward transfer under a witness that may lack right factors. A
/// strong witness goes straight through; otherwise the base must be
/// finite: identities are adjoined where missing, the structure is moved
/// to the larger Rees matrix semigroup, and the result restricted to `S`.
pub fn backward_transfer_weak(
    ms: &AutomaticStructure,
    data: Arc<ReesData>,
    witness: &RowCrossSectionWitness,
    opts: &TransferOptions,
) -> Result<AutomaticStructure> {
    witness.validate(&data, opts.search_size)?;
    if witness.strong {
        return backward_transfer(ms, data, witness, opts);
    }
    if let Ok(strong) = RowCrossSectionWitness::find(&data, true) {
        if data.base.is_finite() {
            return backward_transfer(ms, data, &strong, opts);
        }
    }
    if !data.base.is_finite() {
        return Err(Error::Unsupported(String::from(
            "weak witnesses over an infinite base",
        )));
    }
    let m0 = Arc::new(ReesMatrix::new(Arc::clone(&data), true)?);
    expect_rees_structure(ms, &m0)?;
    let (bar, _) = with_adjoined_identities(&data, IdentityMode::WhereMissing)?;
    let sb = &*bar.base;
    let mut lambda_prime = witness.lambda_prime.clone();
    for (l, &o) in bar.col_object.iter().enumerate().skip(data.cols.len()) {
        if !lambda_prime.iter().any(|&k| bar.col_object[k as usize] == o) {
            lambda_prime.push(l as u32);
        }
    }
    let mut decompositions = BTreeMap::new();
    for x in data.base.arrows().unwrap_or_default() {
        if is_identity(sb, &x) {
            continue;
        }
        let mut d = witness.decompose(&data, &x, opts.search_size)?;
        if d.t.is_none() {
            let o = bar.row_object[d.i as usize];
            d.t = Some(sb.identity(o).ok_or_else(|| Error::InvalidWitness(String::from("no identity after adjoining")))?);
        }
        decompositions.insert(x, d);
    }
    let strong = RowCrossSectionWitness {
        lambda_prime,
        decompositions,
        strong: true,
    };
    let mbar = Arc::new(ReesMatrix::new(Arc::clone(&bar), true)?);
    let msb = trivial_structure(Arc::clone(&mbar) as Arc<dyn Semigroupoid>)?;
    let sbar = backward_transfer(&msb, Arc::clone(&bar), &strong, opts)?;
    let out = match restrict_to(&sbar, Arc::clone(&data.base), opts.search_len) {
        Ok(r) => r,
        Err(Error::Unsupported(_)) => trivial_structure(Arc::clone(&data.base))?,
        Err(e) => return Err(e),
    };
    Ok(out)
}
