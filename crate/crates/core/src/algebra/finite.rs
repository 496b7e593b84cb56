use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{is_local_identity, Element, Semigroupoid};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
struct ArrowData {
    name: String,
    source: u32,
    target: u32,
}

/// A semigroupoid with an explicit multiplication table.
///
/// Construction only resolves names; the axioms are checked by
/// [`FiniteSemigroupoid::validate`], so that invalid tables can be reported
/// rather than rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSemigroupoid {
    objects: Vec<String>,
    arrows: Vec<ArrowData>,
    by_name: BTreeMap<String, u32>,
    table: Vec<Option<u32>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdentityMode {
    Everywhere,
    WhereMissing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomViolation {
    MissingProduct(u32, u32),
    ProductNotComposable(u32, u32),
    Endpoints(u32, u32),
    Associativity(u32, u32, u32),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<AxiomViolation>,
    pub descriptions: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        for d in &self.descriptions {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FiniteSemigroupoid {
    /// Builds from named objects, arrows `(name, source, target)` and
    /// products `(left, right, result)`.
    pub fn new<S: AsRef<str>>(
        objects: &[S],
        arrows: &[(S, S, S)],
        products: &[(S, S, S)],
    ) -> Result<Self> {
        let objects: Vec<String> = objects.iter().map(|o| String::from(o.as_ref())).collect();
        let obj = |name: &str| -> Result<u32> {
            objects
                .iter()
                .position(|o| o == name)
                .map(|i| i as u32)
                .ok_or_else(|| Error::UnknownVertex(String::from(name)))
        };
        for (i, o) in objects.iter().enumerate() {
            if objects[..i].contains(o) {
                return Err(Error::DuplicateId(o.clone()));
            }
        }
        let mut list = Vec::new();
        for (name, s, t) in arrows {
            list.push((String::from(name.as_ref()), obj(s.as_ref())?, obj(t.as_ref())?));
        }
        let mut out = FiniteSemigroupoid::from_table(objects, list, Vec::new())?;
        let n = out.arrows.len();
        out.table = vec![None; n * n];
        for (l, r, p) in products {
            let (l, r, p) = (out.arrow(l.as_ref())?, out.arrow(r.as_ref())?, out.arrow(p.as_ref())?);
            let slot = &mut out.table[l as usize * n + r as usize];
            if slot.is_some_and(|q| q != p) {
                return Err(Error::InvalidSemigroupoid(format!(
                    "two products given for ({}, {})",
                    out.arrows[l as usize].name, out.arrows[r as usize].name
                )));
            }
            *slot = Some(p);
        }
        Ok(out)
    }

    /// Builds from an index-based table (row-major, `arrows × arrows`).
    pub fn from_table(objects: Vec<String>, arrows: Vec<(String, u32, u32)>, table: Vec<Option<u32>>) -> Result<Self> {
        let mut by_name = BTreeMap::new();
        let mut list = Vec::new();
        for (i, (name, s, t)) in arrows.into_iter().enumerate() {
            if s as usize >= objects.len() || t as usize >= objects.len() {
                return Err(Error::UnknownVertex(format!("object index of {name}")));
            }
            if by_name.insert(name.clone(), i as u32).is_some() {
                return Err(Error::DuplicateId(name));
            }
            list.push(ArrowData {
                name,
                source: s,
                target: t,
            });
        }
        let n = list.len();
        let table = if table.is_empty() { vec![None; n * n] } else { table };
        if table.len() != n * n || table.iter().flatten().any(|&k| k as usize >= n) {
            return Err(Error::InvalidSemigroupoid(String::from("table has the wrong shape")));
        }
        Ok(FiniteSemigroupoid {
            objects,
            arrows: list,
            by_name,
            table,
        })
    }

    /// Builds from a product function on arrow indices; `f` is only called
    /// on composable pairs.
    pub fn from_fn(
        objects: Vec<String>,
        arrows: Vec<(String, u32, u32)>,
        f: impl Fn(u32, u32) -> u32,
    ) -> Result<Self> {
        let mut s = FiniteSemigroupoid::from_table(objects, arrows, Vec::new())?;
        let n = s.arrows.len();
        for i in 0..n {
            for j in 0..n {
                if s.arrows[i].target == s.arrows[j].source {
                    s.table[i * n + j] = Some(f(i as u32, j as u32));
                }
            }
        }
        Ok(s)
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn arrow(&self, name: &str) -> Result<u32> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownElement(String::from(name)))
    }

    pub fn arrow_name(&self, a: u32) -> &str {
        &self.arrows[a as usize].name
    }

    pub fn arrow_source(&self, a: u32) -> u32 {
        self.arrows[a as usize].source
    }

    pub fn arrow_target(&self, a: u32) -> u32 {
        self.arrows[a as usize].target
    }

    pub fn product(&self, a: u32, b: u32) -> Option<u32> {
        self.table[a as usize * self.arrows.len() + b as usize]
    }

    /// Products as `(left, right, result)` name triples, in index order.
    pub fn product_list(&self) -> Vec<(&str, &str, &str)> {
        let n = self.arrows.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if let Some(k) = self.table[i * n + j] {
                    out.push((self.arrow_name(i as u32), self.arrow_name(j as u32), self.arrow_name(k)));
                }
            }
        }
        out
    }

    /// Replaces one product; used to plant violations.
    pub fn set_product(&mut self, a: u32, b: u32, p: Option<u32>) {
        let n = self.arrows.len();
        self.table[a as usize * n + b as usize] = p;
    }

    /// Checks: products defined exactly on composable pairs, product
    /// endpoints, associativity. Every violation is listed.
    pub fn validate(&self) -> ValidationReport {
        let n = self.arrows.len() as u32;
        let mut rep = ValidationReport::default();
        let name = |a: u32| self.arrow_name(a);
        for a in 0..n {
            for b in 0..n {
                let composable = self.arrow_target(a) == self.arrow_source(b);
                match (composable, self.product(a, b)) {
                    (true, None) => {
                        rep.violations.push(AxiomViolation::MissingProduct(a, b));
                        rep.descriptions.push(format!("missing product {}·{}", name(a), name(b)));
                    }
                    (false, Some(_)) => {
                        rep.violations.push(AxiomViolation::ProductNotComposable(a, b));
                        rep.descriptions
                            .push(format!("product {}·{} of non-composable arrows", name(a), name(b)));
                    }
                    (true, Some(p)) => {
                        if self.arrow_source(p) != self.arrow_source(a) || self.arrow_target(p) != self.arrow_target(b) {
                            rep.violations.push(AxiomViolation::Endpoints(a, b));
                            rep.descriptions
                                .push(format!("product {}·{} = {} has wrong endpoints", name(a), name(b), name(p)));
                        }
                    }
                    (false, None) => {}
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let Some(ab) = self.product(a, b) else { continue };
                for c in 0..n {
                    let Some(bc) = self.product(b, c) else { continue };
                    let left = self.product(ab, c);
                    let right = self.product(a, bc);
                    if left != right {
                        rep.violations.push(AxiomViolation::Associativity(a, b, c));
                        rep.descriptions.push(format!(
                            "associativity fails at ({}, {}, {})",
                            name(a),
                            name(b),
                            name(c)
                        ));
                    }
                }
            }
        }
        rep
    }

    /// The loops at `v` with the restricted table.
    pub fn local_semigroup(&self, v: u32) -> Result<FiniteSemigroupoid> {
        let loops: Vec<u32> = (0..self.arrows.len() as u32)
            .filter(|&a| self.arrow_source(a) == v && self.arrow_target(a) == v)
            .collect();
        if loops.is_empty() {
            return Err(Error::NoLocalSemigroup(self.objects[v as usize].clone()));
        }
        let pos: BTreeMap<u32, u32> = loops.iter().enumerate().map(|(i, &a)| (a, i as u32)).collect();
        let arrows = loops
            .iter()
            .map(|&a| (String::from(self.arrow_name(a)), 0, 0))
            .collect();
        FiniteSemigroupoid::from_fn(
            vec![self.objects[v as usize].clone()],
            arrows,
            |i, j| pos[&self.product(loops[i as usize], loops[j as usize]).unwrap_or(u32::MAX)],
        )
    }

    /// The semigroup on arrows plus a zero, sending non-composable products
    /// to zero; returned as a one-object semigroupoid.
    pub fn consolidate(&self) -> Result<FiniteSemigroupoid> {
        let n = self.arrows.len() as u32;
        let mut arrows: Vec<(String, u32, u32)> =
            self.arrows.iter().map(|a| (a.name.clone(), 0, 0)).collect();
        arrows.push((self.fresh_name("0"), 0, 0));
        FiniteSemigroupoid::from_fn(vec![String::from("*")], arrows, |a, b| {
            if a == n || b == n {
                n
            } else {
                self.product(a, b).unwrap_or(n)
            }
        })
    }

    fn fresh_name(&self, base: &str) -> String {
        let mut name = String::from(base);
        while self.by_name.contains_key(&name) {
            name.push('\'');
        }
        name
    }

    /// Index of an existing local identity at `v`.
    pub fn local_identity(&self, v: u32) -> Option<u32> {
        let all: Vec<Element> = (0..self.arrows.len() as u32).map(Element::Arrow).collect();
        (0..self.arrows.len() as u32)
            .filter(|&e| self.arrow_source(e) == v)
            .find(|&e| is_local_identity(self, &Element::Arrow(e), &all))
    }

    /// Adjoins fresh identities `1[v]`; returns the new semigroupoid and, per
    /// object, the index of the adjoined identity (if any).
    pub fn adjoin_identities(&self, mode: IdentityMode) -> Result<(FiniteSemigroupoid, Vec<Option<u32>>)> {
        let n = self.arrows.len() as u32;
        let mut arrows: Vec<(String, u32, u32)> = self
            .arrows
            .iter()
            .map(|a| (a.name.clone(), a.source, a.target))
            .collect();
        let mut new_id = vec![None; self.objects.len()];
        let mut owner: BTreeMap<u32, u32> = BTreeMap::new();
        for v in 0..self.objects.len() as u32 {
            if mode == IdentityMode::WhereMissing && self.local_identity(v).is_some() {
                continue;
            }
            let idx = arrows.len() as u32;
            arrows.push((self.fresh_name(&format!("1[{}]", self.objects[v as usize])), v, v));
            new_id[v as usize] = Some(idx);
            owner.insert(idx, v);
        }
        let s = FiniteSemigroupoid::from_fn(self.objects.clone(), arrows, |a, b| {
            if owner.contains_key(&a) {
                b
            } else if owner.contains_key(&b) {
                a
            } else {
                debug_assert!(a < n && b < n);
                self.product(a, b).unwrap_or(a)
            }
        })?;
        Ok((s, new_id))
    }
}

impl Semigroupoid for FiniteSemigroupoid {
    fn objects(&self) -> &[String] {
        &self.objects
    }

    fn source(&self, x: &Element) -> u32 {
        match x {
            Element::Arrow(a) => self.arrow_source(*a),
            _ => u32::MAX,
        }
    }

    fn target(&self, x: &Element) -> u32 {
        match x {
            Element::Arrow(a) => self.arrow_target(*a),
            _ => u32::MAX,
        }
    }

    fn multiply(&self, x: &Element, y: &Element) -> Option<Element> {
        match (x, y) {
            (Element::Arrow(a), Element::Arrow(b)) => self.product(*a, *b).map(Element::Arrow),
            _ => None,
        }
    }

    fn contains(&self, x: &Element) -> bool {
        matches!(x, Element::Arrow(a) if (*a as usize) < self.arrows.len())
    }

    fn arrows(&self) -> Option<Vec<Element>> {
        Some((0..self.arrows.len() as u32).map(Element::Arrow).collect())
    }

    fn arrows_up_to(&self, _size: usize) -> Vec<Element> {
        (0..self.arrows.len() as u32).map(Element::Arrow).collect()
    }

    fn identity(&self, object: u32) -> Option<Element> {
        self.local_identity(object).map(Element::Arrow)
    }

    fn describe(&self, x: &Element) -> String {
        match x {
            Element::Arrow(a) if (*a as usize) < self.arrows.len() => String::from(self.arrow_name(*a)),
            other => format!("{other:?}"),
        }
    }

    fn parse_element(&self, text: &str) -> Result<Element> {
        self.arrow(text).map(Element::Arrow)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ideal_sps, predicates};

    fn trivial() -> FiniteSemigroupoid {
        FiniteSemigroupoid::new(&["*"], &[("1", "*", "*")], &[("1", "1", "1")]).unwrap()
    }

    /// a: u→v, b: v→u, with ab = e_u, ba = e_v idempotent loops.
    fn two_object() -> FiniteSemigroupoid {
        FiniteSemigroupoid::new(
            &["u", "v"],
            &[("a", "u", "v"), ("b", "v", "u"), ("p", "u", "u"), ("q", "v", "v")],
            &[
                ("a", "b", "p"),
                ("b", "a", "q"),
                ("a", "q", "a"),
                ("p", "a", "a"),
                ("b", "p", "b"),
                ("q", "b", "b"),
                ("p", "p", "p"),
                ("q", "q", "q"),
            ],
        )
        .unwrap()
    }

    fn brute_assoc(s: &FiniteSemigroupoid) -> bool {
        let n = s.arrow_count() as u32;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if let (Some(ab), Some(bc)) = (s.product(a, b), s.product(b, c)) {
                        if s.product(ab, c) != s.product(a, bc) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    #[test]
    fn validation() {
        assert!(trivial().validate().is_valid());
        let s = two_object();
        assert!(s.validate().is_valid());
        assert!(brute_assoc(&s));
        let mut bad = s.clone();
        let (a, b, q) = (s.arrow("a").unwrap(), s.arrow("b").unwrap(), s.arrow("q").unwrap());
        bad.set_product(a, b, Some(s.arrow("p").unwrap()));
        bad.set_product(b, a, Some(q));
        bad.set_product(a, q, Some(a));
        bad.set_product(q, q, Some(s.arrow("q").unwrap()));
        bad.set_product(s.arrow("p").unwrap(), a, Some(a));
        bad.set_product(b, s.arrow("p").unwrap(), Some(b));
        bad.set_product(q, b, Some(q));
        let rep = bad.validate();
        assert!(!rep.is_valid());
    }

    #[test]
    fn predicates_and_local() {
        let p = predicates(&trivial()).unwrap();
        assert!(p.strongly_connected && p.isolation_free());
        let s = FiniteSemigroupoid::new(&["u", "w"], &[("1", "u", "u")], &[("1", "1", "1")]).unwrap();
        assert_eq!(predicates(&s).unwrap().isolated, [1]);
        let two = two_object();
        let loc = two.local_semigroup(0).unwrap();
        assert_eq!(loc.arrow_count(), 1);
        assert!(loc.validate().is_valid());
        assert!(s.local_semigroup(1).is_err());
    }

    #[test]
    fn consolidation() {
        let c = trivial().consolidate().unwrap();
        assert_eq!(c.arrow_count(), 2);
        assert_eq!(c.product(0, 0), Some(0));
        assert_eq!(c.product(0, 1), Some(1));
        let two = two_object().consolidate().unwrap();
        assert!(two.validate().is_valid());
        let a = two.arrow("a").unwrap();
        assert_eq!(two.product(a, a), Some(two.arrow("0").unwrap()));
    }

    #[test]
    fn identities() {
        let (s, ids) = trivial().adjoin_identities(IdentityMode::WhereMissing).unwrap();
        assert_eq!(s.arrow_count(), 1);
        assert_eq!(ids, [None]);
        let (s, ids) = trivial().adjoin_identities(IdentityMode::Everywhere).unwrap();
        assert_eq!(s.arrow_count(), 2);
        assert!(ids[0].is_some());
        assert!(s.validate().is_valid());
        let (u, rest) = ideal_sps(&trivial(), &[Element::Arrow(0)]).unwrap();
        assert_eq!(u.len(), 1);
        assert!(rest.is_empty());
        let (u, rest) = ideal_sps(&trivial(), &[]).unwrap();
        assert!(u.is_empty());
        assert_eq!(rest.len(), 1);
    }
}
