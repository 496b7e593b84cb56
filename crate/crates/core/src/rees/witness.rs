use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ReesData;
use crate::algebra::{is_local_identity, Element, Semigroupoid};
use crate::error::{Error, Result};

/// `s = P_{λi} t`, or `s = P_{λi}` when `t` is `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub lambda: u32,
    pub i: u32,
    pub t: Option<Element>,
}

/// A set `Λ'` on which `G` is a bijection onto the targets of arrows,
/// with a left factorisation through `P_{Λ'I}` of every non-identity arrow.
/// Strong witnesses always have a right factor `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowCrossSectionWitness {
    pub lambda_prime: Vec<u32>,
    /// Explicit factorisations; others are searched for on demand.
    pub decompositions: BTreeMap<Element, Decomposition>,
    pub strong: bool,
}

/// Whether `x` is a local identity; exact for finite semigroupoids.
pub(crate) fn is_identity(s: &dyn Semigroupoid, x: &Element) -> bool {
    if s.source(x) != s.target(x) {
        return false;
    }
    match s.arrows() {
        Some(all) => is_local_identity(s, x, &all),
        None => s.identity(s.source(x)).as_ref() == Some(x),
    }
}

impl RowCrossSectionWitness {
    /// `G'`: the element of `Λ'` over each object.
    pub fn col_for(&self, data: &ReesData, object: u32) -> Option<u32> {
        self.lambda_prime
            .iter()
            .copied()
            .find(|&l| data.col_object[l as usize] == object)
    }

    fn search(&self, data: &ReesData, x: &Element, factors: &[Element]) -> Option<Decomposition> {
        let s = &*data.base;
        let l = self.col_for(data, s.source(x))?;
        for (i, p) in data.sandwich[l as usize].iter().enumerate() {
            let Some(p) = p else { continue };
            if let Some(t) = factors.iter().find(|t| s.multiply(p, t).as_ref() == Some(x)) {
                return Some(Decomposition { lambda: l, i: i as u32, t: Some(t.clone()) });
            }
        }
        if self.strong {
            return None;
        }
        data.sandwich[l as usize]
            .iter()
            .position(|p| p.as_ref() == Some(x))
            .map(|i| Decomposition { lambda: l, i: i as u32, t: None })
    }

    /// The factorisation of a non-identity arrow `x`, from the explicit
    /// table or by searching right factors of size at most `search_size`.
    pub fn decompose(&self, data: &ReesData, x: &Element, search_size: usize) -> Result<Decomposition> {
        if let Some(d) = self.decompositions.get(x) {
            return Ok(d.clone());
        }
        let factors = data.base.arrows_up_to(search_size);
        self.search(data, x, &factors).ok_or_else(|| Error::SearchExhausted {
            what: format!("a factorisation of {} through P", data.base.describe(x)),
            bound: search_size,
        })
    }

    /// Checks the conditions on `Λ'` and the stored factorisations, and for
    /// a finite base that every non-identity arrow has one.
    pub fn validate(&self, data: &ReesData, search_size: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidWitness(m));
        let s = &*data.base;
        let mut seen = BTreeSet::new();
        for &l in &self.lambda_prime {
            if l as usize >= data.cols.len() {
                return bad(format!("index {l} is not in Λ"));
            }
            if !seen.insert(data.col_object[l as usize]) {
                return bad(String::from("G is not injective on Λ'"));
            }
        }
        let all: BTreeSet<u32> = data.col_object.iter().copied().collect();
        if seen != all {
            return bad(String::from("G(Λ') misses an object of G(Λ)"));
        }
        for (x, d) in &self.decompositions {
            if !self.lambda_prime.contains(&d.lambda) {
                return bad(format!("the factorisation of {} uses a column outside Λ'", s.describe(x)));
            }
            let Some(p) = data.entry(d.lambda, d.i) else {
                return bad(format!("the factorisation of {} uses a zero entry", s.describe(x)));
            };
            let value = match &d.t {
                Some(t) => s.multiply(p, t),
                None if self.strong => return bad(format!("{} has no right factor", s.describe(x))),
                None => Some(p.clone()),
            };
            if value.as_ref() != Some(x) {
                return bad(format!("the factorisation of {} is wrong", s.describe(x)));
            }
        }
        if let Some(arrows) = s.arrows() {
            for x in arrows.iter().filter(|x| !is_identity(s, x)) {
                if !self.decompositions.contains_key(x) && self.search(data, x, &arrows).is_none() {
                    return bad(format!("{} has no factorisation through P_Λ'I", s.describe(x)));
                }
            }
        } else {
            let _ = search_size;
        }
        Ok(())
    }

    /// Searches for a witness. For a finite base every choice of `Λ'` is
    /// tried in lexicographic order and the factorisations are filled in;
    /// otherwise `Λ'` takes the first column over each object and
    /// factorisations are left to [`RowCrossSectionWitness::decompose`].
    pub fn find(data: &ReesData, strong: bool) -> Result<Self> {
        let s = &*data.base;
        let mut objects: Vec<u32> = data.col_object.clone();
        objects.sort_unstable();
        objects.dedup();
        let choices: Vec<Vec<u32>> = objects
            .iter()
            .map(|&o| (0..data.cols.len() as u32).filter(|&l| data.col_object[l as usize] == o).collect())
            .collect();
        let Some(arrows) = s.arrows() else {
            return Ok(RowCrossSectionWitness {
                lambda_prime: choices.iter().map(|c| c[0]).collect(),
                decompositions: BTreeMap::new(),
                strong,
            });
        };
        let targets: Vec<&Element> = arrows.iter().filter(|x| !is_identity(s, x)).collect();
        let mut pick = alloc::vec![0usize; choices.len()];
        loop {
            let mut w = RowCrossSectionWitness {
                lambda_prime: pick.iter().zip(&choices).map(|(&k, c)| c[k]).collect(),
                decompositions: BTreeMap::new(),
                strong,
            };
            let mut ok = true;
            for x in &targets {
                match w.search(data, x, &arrows) {
                    Some(d) => {
                        w.decompositions.insert((*x).clone(), d);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(w);
            }
            let mut k = 0;
            loop {
                if k == pick.len() {
                    return Err(Error::InvalidWitness(String::from(if strong {
                        "no strong row cross-section exists"
                    } else {
                        "no row cross-section exists"
                    })));
                }
                pick[k] += 1;
                if pick[k] < choices[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
        }
    }
}
