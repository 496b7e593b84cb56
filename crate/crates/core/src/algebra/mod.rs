//! Semigroupoids as algebras: finite multiplication tables and symbolic
//! oracles sharing one interface.

mod consolidation;
mod excluding;
mod finite;
mod free;

pub use finite::{AxiomViolation, FiniteSemigroupoid, IdentityMode, ValidationReport};
pub use consolidation::Consolidation;
pub use excluding::Excluding;
pub use free::Free;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::error::{Error, Result};

/// An arrow of some semigroupoid, in the normal form used by that
/// semigroupoid, so structural equality is arrow equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    /// Arrow of a finite table, by index.
    Arrow(u32),
    /// Arrow of a free semigroupoid or category.
    Path(crate::graph::Path),
    /// Zero of a Rees matrix semigroup.
    Zero,
    /// Non-zero element `(i, x, λ)` of a Rees matrix semigroup.
    Triple(u32, alloc::boxed::Box<Element>, u32),
    /// Zero adjoined by consolidation.
    Adjoined,
}

/// A semigroupoid given by an oracle for its partial multiplication.
pub trait Semigroupoid: Debug + Send + Sync {
    fn objects(&self) -> &[String];
    fn source(&self, x: &Element) -> u32;
    fn target(&self, x: &Element) -> u32;
    /// The product `xy`, or `None` when `x.target ≠ y.source`.
    fn multiply(&self, x: &Element, y: &Element) -> Option<Element>;
    fn contains(&self, x: &Element) -> bool;
    /// All arrows, when there are finitely many.
    fn arrows(&self) -> Option<Vec<Element>>;
    /// Arrows of size at most `size` (all arrows for finite semigroupoids).
    fn arrows_up_to(&self, size: usize) -> Vec<Element>;
    /// A two-sided local identity at `object`, if the semigroupoid has one.
    fn identity(&self, object: u32) -> Option<Element>;
    fn describe(&self, x: &Element) -> String;
    fn parse_element(&self, text: &str) -> Result<Element>;

    fn object_index(&self, name: &str) -> Option<u32> {
        self.objects().iter().position(|o| o == name).map(|i| i as u32)
    }

    fn is_finite(&self) -> bool {
        self.arrows().is_some()
    }
}

/// Left fold of the product over a non-empty sequence.
pub fn fold_product(s: &dyn Semigroupoid, xs: &[Element]) -> Result<Element> {
    let (first, rest) = xs.split_first().ok_or(Error::EmptyPath)?;
    let mut acc = first.clone();
    for x in rest {
        acc = s.multiply(&acc, x).ok_or(Error::CompositionMismatch)?;
    }
    Ok(acc)
}

/// Right fold, for associativity cross-checks.
pub fn fold_product_right(s: &dyn Semigroupoid, xs: &[Element]) -> Result<Element> {
    let (last, rest) = xs.split_last().ok_or(Error::EmptyPath)?;
    let mut acc = last.clone();
    for x in rest.iter().rev() {
        acc = s.multiply(x, &acc).ok_or(Error::CompositionMismatch)?;
    }
    Ok(acc)
}

/// Whether `e` is a loop acting as a two-sided identity on every arrow of a
/// finite semigroupoid that it composes with.
pub fn is_local_identity(s: &dyn Semigroupoid, e: &Element, arrows: &[Element]) -> bool {
    let v = s.source(e);
    if s.target(e) != v {
        return false;
    }
    arrows.iter().all(|x| {
        (s.source(x) != v || s.multiply(e, x).as_ref() == Some(x))
            && (s.target(x) != v || s.multiply(x, e).as_ref() == Some(x))
    })
}

/// Tabulates a finite semigroupoid, preserving element order.
pub fn tabulate(s: &dyn Semigroupoid) -> Result<(FiniteSemigroupoid, Vec<Element>)> {
    let arrows = s
        .arrows()
        .ok_or_else(|| Error::Unsupported(String::from("tabulating an infinite semigroupoid")))?;
    let index: BTreeMap<&Element, u32> = arrows.iter().enumerate().map(|(i, x)| (x, i as u32)).collect();
    let n = arrows.len();
    let mut table = alloc::vec![None; n * n];
    for (i, x) in arrows.iter().enumerate() {
        for (j, y) in arrows.iter().enumerate() {
            if let Some(p) = s.multiply(x, y) {
                let k = *index
                    .get(&p)
                    .ok_or_else(|| Error::InvalidSemigroupoid(String::from("product outside the arrow list")))?;
                table[i * n + j] = Some(k);
            }
        }
    }
    let names: Vec<(String, u32, u32)> = arrows
        .iter()
        .map(|x| (s.describe(x), s.source(x), s.target(x)))
        .collect();
    Ok((FiniteSemigroupoid::from_table(s.objects().to_vec(), names, table)?, arrows))
}

/// `SP'S = {s p t}`, over a finite semigroupoid, and its complement.
pub fn ideal_sps(s: &dyn Semigroupoid, p: &[Element]) -> Result<(BTreeSet<Element>, BTreeSet<Element>)> {
    let arrows = s
        .arrows()
        .ok_or_else(|| Error::Unsupported(String::from("SP'S over an infinite semigroupoid")))?;
    let mut ideal = BTreeSet::new();
    for q in p {
        for x in &arrows {
            let Some(xq) = s.multiply(x, q) else { continue };
            for y in &arrows {
                if let Some(xqy) = s.multiply(&xq, y) {
                    ideal.insert(xqy);
                }
            }
        }
    }
    let rest = arrows.into_iter().filter(|x| !ideal.contains(x)).collect();
    Ok((ideal, rest))
}

/// Structural predicates of a finite semigroupoid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicates {
    pub strongly_connected: bool,
    pub isolated: Vec<u32>,
}

impl Predicates {
    pub fn isolation_free(&self) -> bool {
        self.isolated.is_empty()
    }
}

pub fn predicates(s: &dyn Semigroupoid) -> Result<Predicates> {
    let arrows = s
        .arrows()
        .ok_or_else(|| Error::Unsupported(String::from("predicates of an infinite semigroupoid")))?;
    let n = s.objects().len();
    let mut hom = alloc::vec![false; n * n];
    let mut used = alloc::vec![false; n];
    for x in &arrows {
        let (a, b) = (s.source(x) as usize, s.target(x) as usize);
        hom[a * n + b] = true;
        used[a] = true;
        used[b] = true;
    }
    Ok(Predicates {
        strongly_connected: hom.iter().all(|&h| h),
        isolated: (0..n).filter(|&v| !used[v]).map(|v| v as u32).collect(),
    })
}
