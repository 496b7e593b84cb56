//! Rees matrix semigroups over semigroupoids, and the transfer of automatic
//! structures between a semigroupoid and its Rees matrix semigroups.

mod backward;
mod forward;
mod prefix;
mod witness;

pub use backward::{backward_transfer, backward_transfer_weak, backward_witness, BackwardEncoding};
pub use forward::{forward_transfer, forward_transfer_general, ForwardEncoding};
pub use prefix::{prefix_backward_transfer, prefix_forward_transfer};
pub use witness::{Decomposition, RowCrossSectionWitness};

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{ideal_sps, is_local_identity, predicates, Element, Semigroupoid};
use crate::error::{Error, Result};
use crate::structure::{adjoin_zero, restrict_to, AutomaticStructure};

/// Bounds for the searches the transfers perform: representatives are
/// looked for among words of length at most `search_len`, factorisations
/// among arrows of size at most `search_size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransferOptions {
    pub search_len: usize,
    pub search_size: usize,
}

impl Default for TransferOptions {
    fn default() -> Self {
        TransferOptions {
            search_len: 6,
            search_size: 4,
        }
    }
}

/// `(S, I, Λ, F, G, P)`. The sandwich matrix is indexed `[λ][i]`; `None`
/// entries are zero.
#[derive(Clone, Debug)]
pub struct ReesData {
    pub base: Arc<dyn Semigroupoid>,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub row_object: Vec<u32>,
    pub col_object: Vec<u32>,
    pub sandwich: Vec<Vec<Option<Element>>>,
}

impl ReesData {
    pub fn entry(&self, lambda: u32, i: u32) -> Option<&Element> {
        self.sandwich[lambda as usize][i as usize].as_ref()
    }

    /// Non-zero entries as `(λ, i, p)`, in index order.
    pub fn nonzero_entries(&self) -> Vec<(u32, u32, &Element)> {
        let mut out = Vec::new();
        for (l, row) in self.sandwich.iter().enumerate() {
            for (i, p) in row.iter().enumerate() {
                if let Some(p) = p {
                    out.push((l as u32, i as u32, p));
                }
            }
        }
        out
    }

    pub fn has_zero_entry(&self) -> bool {
        self.sandwich.iter().flatten().any(Option::is_none)
    }

    fn check(&self, with_zero: bool) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRees(m));
        let s = &*self.base;
        let objects = s.objects().len() as u32;
        if self.rows.is_empty() || self.cols.is_empty() {
            return bad(String::from("I and Λ must be non-empty"));
        }
        if self.row_object.len() != self.rows.len() || self.col_object.len() != self.cols.len() {
            return bad(String::from("F and G must be defined on all of I and Λ"));
        }
        if self.row_object.iter().chain(&self.col_object).any(|&o| o >= objects) {
            return bad(String::from("F or G names an unknown object"));
        }
        for (names, what) in [(&self.rows, "I"), (&self.cols, "Λ")] {
            let set: BTreeSet<&String> = names.iter().collect();
            if set.len() != names.len() {
                return bad(format!("duplicate index in {what}"));
            }
        }
        if self.sandwich.len() != self.cols.len() || self.sandwich.iter().any(|r| r.len() != self.rows.len()) {
            return bad(String::from("P must be a Λ × I matrix"));
        }
        for (l, i, p) in self.nonzero_entries() {
            if !s.contains(p)
                || s.source(p) != self.col_object[l as usize]
                || s.target(p) != self.row_object[i as usize]
            {
                return bad(format!(
                    "P[{}][{}] = {} is not an arrow {} → {}",
                    self.cols[l as usize],
                    self.rows[i as usize],
                    s.describe(p),
                    s.objects()[self.col_object[l as usize] as usize],
                    s.objects()[self.row_object[i as usize] as usize],
                ));
            }
        }
        if !with_zero && self.has_zero_entry() {
            return bad(String::from("P has a zero entry, so there is no Rees matrix semigroup without zero"));
        }
        if let Some(arrows) = s.arrows() {
            if arrows.is_empty() {
                return bad(String::from("the semigroupoid is empty"));
            }
            if !predicates(s)?.isolation_free() {
                return bad(String::from("the semigroupoid has an isolated object"));
            }
            let sources: BTreeSet<u32> = arrows.iter().map(|x| s.source(x)).collect();
            let targets: BTreeSet<u32> = arrows.iter().map(|x| s.target(x)).collect();
            let f_img: BTreeSet<u32> = self.row_object.iter().copied().collect();
            let g_img: BTreeSet<u32> = self.col_object.iter().copied().collect();
            if f_img != sources {
                return bad(String::from("F must map onto the sources of arrows"));
            }
            if g_img != targets {
                return bad(String::from("G must map onto the targets of arrows"));
            }
        }
        Ok(())
    }
}

/// The Rees matrix semigroup `M⁰[S; I, Λ; P]` (or `M[…]` without zero) as a
/// one-object semigroupoid.
#[derive(Clone, Debug)]
pub struct ReesMatrix {
    data: Arc<ReesData>,
    with_zero: bool,
    objects: Vec<String>,
}

impl ReesMatrix {
    pub fn new(data: Arc<ReesData>, with_zero: bool) -> Result<Self> {
        data.check(with_zero)?;
        Ok(ReesMatrix {
            data,
            with_zero,
            objects: vec![String::from("*")],
        })
    }

    pub fn data(&self) -> &Arc<ReesData> {
        &self.data
    }

    pub fn with_zero(&self) -> bool {
        self.with_zero
    }

    fn triples(&self, base: Vec<Element>) -> Vec<Element> {
        let d = &*self.data;
        let mut out = Vec::new();
        for (i, &fi) in d.row_object.iter().enumerate() {
            for x in base.iter().filter(|x| d.base.source(x) == fi) {
                for (l, &gl) in d.col_object.iter().enumerate() {
                    if d.base.target(x) == gl {
                        out.push(Element::Triple(i as u32, alloc::boxed::Box::new(x.clone()), l as u32));
                    }
                }
            }
        }
        if self.with_zero {
            out.push(Element::Zero);
        }
        out
    }
}

impl Semigroupoid for ReesMatrix {
    fn objects(&self) -> &[String] {
        &self.objects
    }

    fn source(&self, _x: &Element) -> u32 {
        0
    }

    fn target(&self, _x: &Element) -> u32 {
        0
    }

    fn multiply(&self, x: &Element, y: &Element) -> Option<Element> {
        let (Element::Triple(i, s, l), Element::Triple(j, t, m)) = (x, y) else {
            return self.with_zero.then_some(Element::Zero);
        };
        let d = &*self.data;
        let Some(p) = d.entry(*l, *j) else {
            return self.with_zero.then_some(Element::Zero);
        };
        let sp = d.base.multiply(s, p)?;
        let spt = d.base.multiply(&sp, t)?;
        Some(Element::Triple(*i, alloc::boxed::Box::new(spt), *m))
    }

    fn contains(&self, x: &Element) -> bool {
        let d = &*self.data;
        match x {
            Element::Zero => self.with_zero,
            Element::Triple(i, s, l) => {
                (*i as usize) < d.rows.len()
                    && (*l as usize) < d.cols.len()
                    && d.base.contains(s)
                    && d.base.source(s) == d.row_object[*i as usize]
                    && d.base.target(s) == d.col_object[*l as usize]
            }
            _ => false,
        }
    }

    fn arrows(&self) -> Option<Vec<Element>> {
        Some(self.triples(self.data.base.arrows()?))
    }

    fn arrows_up_to(&self, size: usize) -> Vec<Element> {
        self.triples(self.data.base.arrows_up_to(size))
    }

    fn identity(&self, _object: u32) -> Option<Element> {
        let all = self.arrows()?;
        all.iter().find(|e| is_local_identity(self, e, &all)).cloned()
    }

    fn describe(&self, x: &Element) -> String {
        let d = &*self.data;
        match x {
            Element::Triple(i, s, l) if (*i as usize) < d.rows.len() && (*l as usize) < d.cols.len() => {
                format!("({},{},{})", d.rows[*i as usize], d.base.describe(s), d.cols[*l as usize])
            }
            Element::Zero => String::from("0"),
            other => format!("{other:?}"),
        }
    }

    fn parse_element(&self, text: &str) -> Result<Element> {
        let unknown = || Error::UnknownElement(String::from(text));
        let t = text.trim();
        if t == "0" && self.with_zero {
            return Ok(Element::Zero);
        }
        let inner = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(unknown)?;
        let (i, rest) = inner.split_once(',').ok_or_else(unknown)?;
        let (s, l) = rest.rsplit_once(',').ok_or_else(unknown)?;
        let d = &*self.data;
        let i = d.rows.iter().position(|r| r == i.trim()).ok_or_else(unknown)?;
        let l = d.cols.iter().position(|c| c == l.trim()).ok_or_else(unknown)?;
        let s = d.base.parse_element(s.trim())?;
        let x = Element::Triple(i as u32, alloc::boxed::Box::new(s), l as u32);
        if self.contains(&x) {
            Ok(x)
        } else {
            Err(unknown())
        }
    }
}

/// Validates the data and returns the Rees matrix semigroup.
pub fn build_rees(data: ReesData, with_zero: bool) -> Result<Arc<ReesMatrix>> {
    Ok(Arc::new(ReesMatrix::new(Arc::new(data), with_zero)?))
}

/// The three conditions for finite generation of a Rees matrix semigroup:
/// finite index sets, finitely generated base, and finite complement of
/// the ideal `SP'S`. `None` means undecided.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FgVerdict {
    pub index_sets_finite: bool,
    pub base_finitely_generated: Option<bool>,
    pub complement_finite: Option<bool>,
    /// `S \ SP'S`, exact for finite `S`, otherwise the part of size at
    /// most the search bound.
    pub complement: Vec<Element>,
}

impl FgVerdict {
    pub fn finitely_generated(&self) -> Option<bool> {
        if !self.index_sets_finite
            || self.base_finitely_generated == Some(false)
            || self.complement_finite == Some(false)
        {
            return Some(false);
        }
        match (self.base_finitely_generated, self.complement_finite) {
            (Some(true), Some(true)) => Some(true),
            _ => None,
        }
    }
}

/// `SP'S` membership by a search over factors of size at most `size`.
fn in_ideal_bounded(s: &dyn Semigroupoid, x: &Element, p: &[&Element], factors: &[Element]) -> bool {
    p.iter().any(|q| {
        factors.iter().any(|a| {
            s.multiply(a, q)
                .is_some_and(|aq| factors.iter().any(|b| s.multiply(&aq, b).as_ref() == Some(x)))
        })
    })
}

/// Decides the finite-generation conditions. For an infinite base the
/// caller states whether it is finitely generated, and the complement is
/// only listed up to `search_size`.
pub fn fg_check(data: &ReesData, base_finitely_generated: Option<bool>, search_size: usize) -> Result<FgVerdict> {
    let s = &*data.base;
    let p: Vec<Element> = data.nonzero_entries().into_iter().map(|(_, _, p)| p.clone()).collect();
    if s.is_finite() {
        let (_, rest) = ideal_sps(s, &p)?;
        return Ok(FgVerdict {
            index_sets_finite: true,
            base_finitely_generated: Some(true),
            complement_finite: Some(true),
            complement: rest.into_iter().collect(),
        });
    }
    let factors = s.arrows_up_to(search_size);
    let refs: Vec<&Element> = p.iter().collect();
    let complement = factors
        .iter()
        .filter(|x| !in_ideal_bounded(s, x, &refs, &factors))
        .cloned()
        .collect();
    Ok(FgVerdict {
        index_sets_finite: true,
        base_finitely_generated,
        complement_finite: None,
        complement,
    })
}

/// Elements of a finite semigroupoid that are not products of two arrows.
pub fn indecomposables(s: &dyn Semigroupoid) -> Result<Vec<Element>> {
    let arrows = s
        .arrows()
        .ok_or_else(|| Error::Unsupported(String::from("indecomposables of an infinite semigroupoid")))?;
    let mut products = BTreeSet::new();
    for x in &arrows {
        for y in &arrows {
            if let Some(p) = s.multiply(x, y) {
                products.insert(p);
            }
        }
    }
    Ok(arrows.into_iter().filter(|x| !products.contains(x)).collect())
}

/// Whether a finite semigroupoid is generated by `gens`, by closing the set
/// under products.
pub fn generates(s: &dyn Semigroupoid, gens: &[Element]) -> Result<bool> {
    let arrows = s
        .arrows()
        .ok_or_else(|| Error::Unsupported(String::from("generation in an infinite semigroupoid")))?;
    let mut have: BTreeSet<Element> = gens.iter().cloned().collect();
    let mut frontier: Vec<Element> = have.iter().cloned().collect();
    while let Some(x) = frontier.pop() {
        let known: Vec<Element> = have.iter().cloned().collect();
        for y in &known {
            for p in [s.multiply(&x, y), s.multiply(y, &x)].into_iter().flatten() {
                if have.insert(p.clone()) {
                    frontier.push(p);
                }
            }
        }
    }
    Ok(arrows.iter().all(|x| have.contains(x)))
}

/// Checks that `s` is a structure for `m` as a one-object semigroup.
fn expect_rees_structure(s: &AutomaticStructure, m: &ReesMatrix) -> Result<()> {
    if s.alphabet().vertex_count() != 1 {
        return Err(Error::Precondition(String::from("expected a structure for a Rees matrix semigroup")));
    }
    if let Some(x) = s.letters().iter().find(|x| !m.contains(x)) {
        return Err(Error::Precondition(format!("letter value {} is not in the Rees matrix semigroup", m.describe(x))));
    }
    Ok(())
}

/// A structure for `M[S; I, Λ; P]` from one for `M⁰[S; I, Λ; P]` over the
/// same data, by dropping the letters with value zero.
pub fn drop_zero(s: &AutomaticStructure, data: Arc<ReesData>, opts: &TransferOptions) -> Result<AutomaticStructure> {
    let m: Arc<dyn Semigroupoid> = Arc::new(ReesMatrix::new(data, false)?);
    restrict_to(s, m, opts.search_len)
}

/// A structure for `M⁰[S; I, Λ; P]` from one for `M[S; I, Λ; P]`, adding a
/// letter for the zero.
pub fn add_zero(s: &AutomaticStructure, data: Arc<ReesData>) -> Result<AutomaticStructure> {
    let m = ReesMatrix::new(Arc::clone(&data), false)?;
    expect_rees_structure(s, &m)?;
    adjoin_zero(s, Arc::new(ReesMatrix::new(data, true)?))
}
