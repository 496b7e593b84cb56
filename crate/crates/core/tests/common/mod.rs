#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use autorees_core::algebra::{fold_product, Element, FiniteSemigroupoid, Semigroupoid};
use autorees_core::graph::{enumerate_paths, Edge};
use autorees_core::rees::ReesData;
use autorees_core::structure::{AutomaticStructure, Relation};
use autorees_core::sync::SyncRelation;
use rand::seq::SliceRandom;
use rand::Rng;

pub type Pairs = BTreeSet<(Vec<Edge>, Vec<Edge>)>;

pub fn trivial_monoid() -> FiniteSemigroupoid {
    FiniteSemigroupoid::new(&["*"], &[("1", "*", "*")], &[("1", "1", "1")]).unwrap()
}

/// a: u→v, b: v→u, ab = p, ba = q idempotent.
pub fn two_object() -> FiniteSemigroupoid {
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

/// Words of the structure's language up to `bound`, with their values,
/// found by enumerating all paths of the alphabet.
pub fn oracle_words(s: &AutomaticStructure, bound: usize) -> Vec<(Vec<Edge>, Element)> {
    let g = s.alphabet();
    enumerate_paths(g, bound, false)
        .into_iter()
        .filter(|p| s.language().accepts_word(p.edges()))
        .map(|p| {
            let xs: Vec<Element> = p.edges().iter().map(|e| s.letter(*e).clone()).collect();
            (p.edges().to_vec(), fold_product(&**s.algebra(), &xs).unwrap())
        })
        .collect()
}

/// The relation from its definition, by exhaustive search.
pub fn oracle_relation(s: &AutomaticStructure, which: Relation, bound: usize) -> Pairs {
    let g = s.alphabet();
    let words = oracle_words(s, bound);
    let alg = &**s.algebra();
    let mut out = Pairs::new();
    for (u, x) in &words {
        for (v, y) in &words {
            let hit = match which {
                Relation::Edge(a) => {
                    g.target(*u.last().unwrap()) == g.source(a) && alg.multiply(x, s.letter(a)).as_ref() == Some(y)
                }
                Relation::Vertex(w) => g.target(*u.last().unwrap()) == w && x == y,
                Relation::Equality => x == y,
                Relation::PrefixEquality => unreachable!(),
            };
            if hit {
                out.insert((u.clone(), v.clone()));
            }
        }
    }
    out
}

pub fn stored(rel: &SyncRelation, bound: usize) -> Pairs {
    rel.enumerate(bound)
        .into_iter()
        .map(|(a, b)| (a.edges().to_vec(), b.edges().to_vec()))
        .collect()
}

/// Compares every stored relation with the oracle; returns the names of
/// those that differ.
pub fn oracle_mismatches(s: &AutomaticStructure, bound: usize) -> Vec<String> {
    s.named_relations()
        .into_iter()
        .filter(|(_, which, _)| *which != Relation::PrefixEquality)
        .filter(|(_, which, rel)| stored(rel, bound) != oracle_relation(s, *which, bound))
        .map(|(n, _, _)| n)
        .collect()
}

/// Whether every arrow of a finite algebra has a representative up to `bound`.
pub fn oracle_surjective(s: &AutomaticStructure, bound: usize) -> bool {
    let seen: BTreeSet<Element> = oracle_words(s, bound).into_iter().map(|(_, x)| x).collect();
    s.algebra().arrows().unwrap().iter().all(|x| seen.contains(x))
}

/// A random finite semigroupoid of maps between small sets: objects are
/// sets, arrows are functions, closed under composition. At most
/// `max_arrows` arrows; `None` when the closure grows too large.
pub fn random_semigroupoid<R: Rng>(rng: &mut R, max_arrows: usize) -> Option<FiniteSemigroupoid> {
    let n_obj = rng.gen_range(1..=3usize);
    let sizes: Vec<usize> = (0..n_obj).map(|_| rng.gen_range(1..=3usize)).collect();
    type Map = (usize, usize, Vec<usize>);
    let mut arrows: Vec<Map> = Vec::new();
    let gens = rng.gen_range(1..=3usize);
    for _ in 0..gens {
        let s = rng.gen_range(0..n_obj);
        let t = rng.gen_range(0..n_obj);
        let f: Vec<usize> = (0..sizes[s]).map(|_| rng.gen_range(0..sizes[t])).collect();
        if !arrows.contains(&(s, t, f.clone())) {
            arrows.push((s, t, f));
        }
    }
    let mut i = 0;
    while i < arrows.len() {
        for j in 0..arrows.len() {
            for (x, y) in [(i, j), (j, i)] {
                let (a, b) = (&arrows[x], &arrows[y]);
                if a.1 != b.0 {
                    continue;
                }
                let c: Map = (a.0, b.1, a.2.iter().map(|&k| b.2[k]).collect());
                if !arrows.contains(&c) {
                    arrows.push(c);
                    if arrows.len() > max_arrows {
                        return None;
                    }
                }
            }
        }
        i += 1;
    }
    arrows.shuffle(rng);
    let objects: Vec<String> = (0..n_obj).map(|k| format!("o{k}")).collect();
    let names: Vec<(String, u32, u32)> = arrows
        .iter()
        .enumerate()
        .map(|(k, a)| (format!("s{k}"), a.0 as u32, a.1 as u32))
        .collect();
    let index: BTreeMap<&Map, u32> = arrows.iter().enumerate().map(|(k, a)| (a, k as u32)).collect();
    let n = arrows.len();
    let mut table = vec![None; n * n];
    for (x, a) in arrows.iter().enumerate() {
        for (y, b) in arrows.iter().enumerate() {
            if a.1 == b.0 {
                let c: Map = (a.0, b.1, a.2.iter().map(|&k| b.2[k]).collect());
                table[x * n + y] = Some(index[&c]);
            }
        }
    }
    FiniteSemigroupoid::from_table(objects, names, table).ok()
}

pub fn finite(s: FiniteSemigroupoid) -> Arc<dyn Semigroupoid> {
    Arc::new(s)
}

/// `I = {1, 2}`, `Λ = {1}` over the trivial monoid, `P = [1 0]`.
pub fn three_element() -> ReesData {
    let s = finite(trivial_monoid());
    ReesData {
        base: s,
        rows: vec!["1".into(), "2".into()],
        cols: vec!["1".into()],
        row_object: vec![0, 0],
        col_object: vec![0],
        sandwich: vec![vec![Some(Element::Arrow(0)), None]],
    }
}

/// The product in a Rees matrix semigroup with zero, from the definition.
pub fn rees_product(d: &ReesData, x: &Element, y: &Element) -> Element {
    match (x, y) {
        (Element::Triple(i, s, l), Element::Triple(j, t, m)) => match &d.sandwich[*l as usize][*j as usize] {
            None => Element::Zero,
            Some(p) => {
                let st = fold_product(&*d.base, &[(**s).clone(), p.clone(), (**t).clone()]).unwrap();
                Element::Triple(*i, Box::new(st), *m)
            }
        },
        _ => Element::Zero,
    }
}

/// Random Rees data over `base` with at most two rows and columns; `F` and
/// `G` onto the sources and targets of arrows.
pub fn random_rees<R: Rng>(rng: &mut R, base: Arc<dyn Semigroupoid>, zero_prob: f64) -> Option<ReesData> {
    let arrows = base.arrows()?;
    let sources: Vec<u32> = arrows.iter().map(|x| base.source(x)).collect::<BTreeSet<_>>().into_iter().collect();
    let targets: Vec<u32> = arrows.iter().map(|x| base.target(x)).collect::<BTreeSet<_>>().into_iter().collect();
    let used: BTreeSet<u32> = sources.iter().chain(&targets).copied().collect();
    if sources.len() > 2 || targets.len() > 2 || used.len() != base.objects().len() {
        return None;
    }
    let n_rows = rng.gen_range(sources.len()..=2);
    let n_cols = rng.gen_range(targets.len()..=2);
    let mut row_object = sources.clone();
    while row_object.len() < n_rows {
        row_object.push(sources[rng.gen_range(0..sources.len())]);
    }
    let mut col_object = targets.clone();
    while col_object.len() < n_cols {
        col_object.push(targets[rng.gen_range(0..targets.len())]);
    }
    let sandwich = col_object
        .iter()
        .map(|&g| {
            row_object
                .iter()
                .map(|&f| {
                    let cands: Vec<&Element> = arrows.iter().filter(|x| base.source(x) == g && base.target(x) == f).collect();
                    if cands.is_empty() || rng.gen_bool(zero_prob) {
                        None
                    } else {
                        Some(cands[rng.gen_range(0..cands.len())].clone())
                    }
                })
                .collect()
        })
        .collect();
    Some(ReesData {
        base,
        rows: (1..=n_rows).map(|k| format!("i{k}")).collect(),
        cols: (1..=n_cols).map(|k| format!("l{k}")).collect(),
        row_object,
        col_object,
        sandwich,
    })
}

/// `K'_=` from its definition: `u ∈ K`, `v` a non-empty prefix of a word
/// of `K`, equal values.
pub fn oracle_prefix_equality(s: &AutomaticStructure, bound: usize) -> Pairs {
    let g = s.alphabet();
    let alg = &**s.algebra();
    let value = |p: &[Edge]| {
        let xs: Vec<Element> = p.iter().map(|e| s.letter(*e).clone()).collect();
        fold_product(alg, &xs).unwrap()
    };
    let words = oracle_words(s, bound);
    let pref = s.language().prefix_closure();
    let prefixes: Vec<Vec<Edge>> = enumerate_paths(g, bound, false)
        .into_iter()
        .filter(|p| !p.is_empty() && pref.accepts_word(p.edges()))
        .map(|p| p.edges().to_vec())
        .collect();
    let mut out = Pairs::new();
    for (u, x) in &words {
        for v in &prefixes {
            if value(v) == *x {
                out.insert((u.clone(), v.clone()));
            }
        }
    }
    out
}
