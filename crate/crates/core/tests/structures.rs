mod common;

use std::sync::Arc;

use autorees_core::algebra::{Element, Semigroupoid};
use autorees_core::rees::ReesMatrix;
use autorees_core::automaton::Automaton;
use autorees_core::graph::{Graph, Path};
use autorees_core::structure::*;
use autorees_core::sync::SyncRelation;
use autorees_core::Error;
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn loop_graph() -> Arc<Graph> {
    Arc::new(Graph::from_strs(&["v"], &[("e", "v", "v")]).unwrap())
}

fn words(g: &Graph, list: &[&str]) -> Vec<Vec<autorees_core::graph::Edge>> {
    list.iter().map(|w| g.parse_path(w).unwrap().edges().to_vec()).collect()
}

#[test]
fn trivial_monoid_structure() {
    let s = trivial_structure(finite(trivial_monoid())).unwrap();
    let g = s.alphabet().clone();
    assert_eq!(s.language().enumerate(4), words(&g, &["1"]));
    assert_eq!(stored(s.multiplier(g.edge("1").unwrap()), 4).len(), 1);
    let r = s.verify(&VerifyOptions::new(8)).unwrap();
    assert!(r.complete(), "{r}");
    assert!(oracle_mismatches(&s, 6).is_empty());
}

#[test]
fn trivial_structures_of_random_semigroupoids() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut done = 0;
    while done < 20 {
        let Some(t) = random_semigroupoid(&mut rng, 8) else { continue };
        let s = trivial_structure(finite(t)).unwrap();
        let r = s.verify(&VerifyOptions::new(4)).unwrap();
        assert!(r.complete(), "{r}");
        assert!(oracle_mismatches(&s, 3).is_empty());
        assert!(oracle_surjective(&s, 1));
        done += 1;
    }
}

#[test]
fn free_loop_structure() {
    let s = free_structure(loop_graph(), false).unwrap();
    let g = s.alphabet().clone();
    let e = g.edge("e").unwrap();
    let pairs = stored(s.multiplier(e), 5);
    let expect: Pairs = (1..5).map(|n| (vec![e; n], vec![e; n + 1])).collect();
    assert_eq!(pairs, expect);
    let r = s.verify(&VerifyOptions::new(8)).unwrap();
    assert!(r.complete(), "{r}");
    assert!(oracle_mismatches(&s, 6).is_empty());
    assert!(s.is_cross_section().unwrap());
}

#[test]
fn free_category_structure() {
    let g = Arc::new(Graph::from_strs(&["u", "v"], &[("a", "u", "v"), ("b", "v", "u"), ("c", "v", "v")]).unwrap());
    for ids in [false, true] {
        let s = free_structure(Arc::clone(&g), ids).unwrap();
        let r = s.verify(&VerifyOptions::new(6)).unwrap();
        assert!(r.complete(), "{r}");
        assert!(oracle_mismatches(&s, 5).is_empty());
    }
}

#[test]
fn broken_relation_is_reported() {
    let mut s = free_structure(loop_graph(), false).unwrap();
    let e = s.alphabet().edge("e").unwrap();
    s.replace(Relation::Edge(e), SyncRelation::empty(Arc::clone(s.alphabet())));
    let r = s.verify(&VerifyOptions::new(8)).unwrap();
    assert!(!r.passed());
    assert_eq!(
        r.get("K[e]"),
        Some(&CheckStatus::Fail("(e, e.e) in the relation but not accepted".into()))
    );
}

#[test]
fn missing_prefix_relation_is_skipped() {
    let s = free_structure(loop_graph(), false).unwrap().without_prefix_equality();
    let r = s.verify(&VerifyOptions::new(6)).unwrap();
    assert!(r.passed());
    assert!(matches!(r.get("K'[=]"), Some(CheckStatus::Skipped(_))));
}

#[test]
fn relation_for_word_matches_oracle() {
    let g = Arc::new(Graph::from_strs(&["u", "v"], &[("a", "u", "v"), ("b", "v", "u"), ("c", "v", "v")]).unwrap());
    let s = free_structure(Arc::clone(&g), false).unwrap();
    let w = g.parse_path("c.b").unwrap();
    let rel = s.relation_for_word(w.edges()).unwrap();
    let expect: Pairs = oracle_words(&s, 5)
        .into_iter()
        .filter(|(u, _)| u.len() <= 3 && g.target(*u.last().unwrap()) == g.source(w.edges()[0]))
        .map(|(u, _)| (u.clone(), [u, w.edges().to_vec()].concat()))
        .collect();
    assert_eq!(stored(&rel, 5), expect);
    let single = s.relation_for_word(&w.edges()[..1]).unwrap();
    assert!(single.equivalent(s.multiplier(w.edges()[0])).unwrap());
    assert!(matches!(
        s.relation_for_word(g.parse_path("a").unwrap().edges()).unwrap().enumerate(3).first(),
        Some(_)
    ));
    // no word of K ends at u
    let lonely = Arc::new(Graph::from_strs(&["u", "v"], &[("a", "u", "v")]).unwrap());
    let t = free_structure(lonely, false).unwrap();
    assert!(t.relation_for_word(&[t.alphabet().edge("a").unwrap()]).unwrap().is_empty());
}

/// The trivial monoid with two letters of the same value.
fn doubled() -> AutomaticStructure {
    let alg = finite(trivial_monoid());
    let g = Arc::new(Graph::from_strs(&["*"], &[("x", "*", "*"), ("y", "*", "*")]).unwrap());
    let one = Element::Arrow(0);
    let x = g.parse_path("x").unwrap();
    let k = Automaton::from_words(Arc::clone(&g), [x.edges()]);
    let xx = SyncRelation::from_pairs(Arc::clone(&g), [(&x, &x)]).unwrap();
    AutomaticStructure::new(alg, Arc::clone(&g), vec![one.clone(), one], k, vec![xx.clone(), xx.clone()], vec![xx])
        .unwrap()
}

#[test]
fn injectivize_drops_duplicates() {
    let s = doubled();
    assert!(s.verify(&VerifyOptions::new(6)).unwrap().passed());
    let t = injectivize_alphabet(&s, &[], 4).unwrap();
    assert_eq!(t.alphabet().edge_count(), 1);
    assert!(t.verify(&VerifyOptions::new(8)).unwrap().passed());
    assert!(oracle_mismatches(&t, 6).is_empty());
}

#[test]
fn injectivize_adds_fresh_letters() {
    let g = Arc::new(Graph::from_strs(&["u", "v"], &[("a", "u", "v"), ("b", "v", "u")]).unwrap());
    let s = free_structure(Arc::clone(&g), false).unwrap();
    let ab = Element::Path(g.parse_path("a.b").unwrap());
    let t = injectivize_alphabet(&s, std::slice::from_ref(&ab), 4).unwrap();
    assert_eq!(t.alphabet().edge_count(), 3);
    let y = t.alphabet().edges().find(|&e| *t.letter(e) == ab).unwrap();
    assert_eq!(t.alphabet().edge_id(y), "y[a_b]");
    assert!(t.verify(&VerifyOptions::new(6)).unwrap().passed());
    assert!(oracle_mismatches(&t, 5).is_empty());
    // same elements and products up to a bound
    for (u, x) in oracle_words(&s, 4) {
        let w = t.representative(&x, 4).unwrap();
        assert_eq!(t.evaluate(&w).unwrap(), x, "{}", s.format(&u));
    }
}

#[test]
fn injectivize_needs_admissible_kind() {
    let alg = finite(trivial_monoid());
    let g = Arc::new(Graph::from_strs(&["*"], &[("x", "*", "*")]).unwrap());
    let k = Automaton::from_words(Arc::clone(&g), [&[g.edge("x").unwrap(); 2][..], &[g.edge("x").unwrap()][..]])
        .difference(&Automaton::from_words(Arc::clone(&g), [&[g.edge("x").unwrap()][..]]))
        .unwrap()
        .union(&Automaton::from_words(Arc::clone(&g), [&[g.edge("x").unwrap(); 3][..]]))
        .unwrap();
    let all = SyncRelation::product(&k, &k).unwrap();
    let s = AutomaticStructure::new(alg, Arc::clone(&g), vec![Element::Arrow(0)], k, vec![all.clone()], vec![all]).unwrap();
    assert!(matches!(injectivize_alphabet(&s, &[], 4), Err(Error::Precondition(_))));
}

#[test]
fn assemble_with_one_extra_word() {
    let alg = finite(trivial_monoid());
    let g = Arc::new(Graph::from_strs(&["*"], &[("x", "*", "*")]).unwrap());
    let x = g.edge("x").unwrap();
    let l = Automaton::from_words(Arc::clone(&g), [&[x][..]]);
    let k = Automaton::from_words(Arc::clone(&g), [&[x][..], &[x, x][..]]);
    let px = Path::from_edges(&g, vec![x]).unwrap();
    let pxx = Path::from_edges(&g, vec![x, x]).unwrap();
    let parts = CofiniteParts {
        algebra: Arc::clone(&alg),
        alphabet: Arc::clone(&g),
        letters: vec![Element::Arrow(0)],
        language: k.clone(),
        sub: l.clone(),
        equality: SyncRelation::from_pairs(Arc::clone(&g), [(&px, &px)]).unwrap(),
        multipliers: vec![SyncRelation::from_pairs(Arc::clone(&g), [(&px, &px), (&px, &pxx)]).unwrap()],
    };
    let s = assemble_from_cofinite_sublanguage(&parts, 4).unwrap();
    assert!(s.verify(&VerifyOptions::new(8)).unwrap().passed());
    assert!(oracle_mismatches(&s, 6).is_empty());

    // L = K returns the given relations
    let same = CofiniteParts { language: l.clone(), multipliers: vec![parts.equality.clone()], ..parts.clone() };
    let t = assemble_from_cofinite_sublanguage(&same, 4).unwrap();
    assert!(t.multiplier(x).equivalent(&parts.equality).unwrap());

    // empty partial relations with K = L non-empty
    let bad = CofiniteParts {
        language: l.clone(),
        equality: SyncRelation::empty(Arc::clone(&g)),
        multipliers: vec![SyncRelation::empty(Arc::clone(&g))],
        ..parts
    };
    let u = assemble_from_cofinite_sublanguage(&bad, 4).unwrap();
    assert!(!u.verify(&VerifyOptions::new(8)).unwrap().passed());
}

#[test]
fn extend_language_keeps_semigroupoid() {
    let s = trivial_structure(finite(two_object())).unwrap();
    let g = s.alphabet().clone();
    let extra = Automaton::from_words(Arc::clone(&g), words(&g, &["a.b", "b.a.b", "p.p"]).iter().map(Vec::as_slice));
    let k = s.language().union(&extra).unwrap();
    let t = extend_language(&s, &k, 3).unwrap();
    let r = t.verify(&VerifyOptions::new(5)).unwrap();
    assert!(r.passed(), "{r}");
    assert!(oracle_mismatches(&t, 4).is_empty());
    assert!(!t.is_cross_section().unwrap());

    let same = extend_language(&s, s.language(), 3).unwrap();
    assert!(same.verify(&VerifyOptions::new(5)).unwrap().passed());
}

#[test]
fn extend_language_rejects_fresh_element() {
    // a structure whose language misses p
    let alg = finite(two_object());
    let full = trivial_structure(Arc::clone(&alg)).unwrap();
    let g = full.alphabet().clone();
    let l = Automaton::from_words(Arc::clone(&g), words(&g, &["a", "b", "q"]).iter().map(Vec::as_slice));
    let rel = |r: &SyncRelation| r.restrict(&l, &l).unwrap();
    let s = AutomaticStructure::new(
        alg,
        Arc::clone(&g),
        full.letters().to_vec(),
        l.clone(),
        g.edges().map(|e| rel(full.multiplier(e))).collect(),
        g.vertices().map(|v| rel(full.equality_at(v))).collect(),
    )
    .unwrap();
    let k = l.union(&Automaton::from_words(Arc::clone(&g), words(&g, &["p"]).iter().map(Vec::as_slice))).unwrap();
    assert!(matches!(extend_language(&s, &k, 3), Err(Error::Precondition(_))));
}

#[test]
fn consolidation_of_trivial_monoid() {
    let s = trivial_structure(finite(trivial_monoid())).unwrap();
    let c = consolidation_transfer(&s).unwrap();
    assert_eq!(c.algebra().arrows().unwrap().len(), 2);
    let r = c.verify(&VerifyOptions::new(8)).unwrap();
    assert!(r.complete(), "{r}");
    assert!(oracle_mismatches(&c, 6).is_empty());
    let z = c.alphabet().edge("z").unwrap();
    for (u, _) in oracle_words(&c, 1) {
        assert!(stored(c.multiplier(z), 1).contains(&(u, vec![z])));
    }
}

#[test]
fn consolidation_of_multi_object_structures() {
    let s = trivial_structure(finite(two_object())).unwrap();
    let c = consolidation_transfer(&s).unwrap();
    let r = c.verify(&VerifyOptions::new(4)).unwrap();
    assert!(r.complete(), "{r}");
    assert!(oracle_mismatches(&c, 3).is_empty());
    let g = Arc::new(Graph::from_strs(&["u", "v"], &[("a", "u", "v"), ("c", "v", "v")]).unwrap());
    let f = consolidation_transfer(&free_structure(g, false).unwrap()).unwrap();
    let r = f.verify(&VerifyOptions::new(5)).unwrap();
    assert!(r.passed(), "{r}");
    assert!(oracle_mismatches(&f, 4).is_empty());
}

#[test]
fn consolidation_keeps_an_inner_zero_apart() {
    let m: Arc<dyn Semigroupoid> = Arc::new(ReesMatrix::new(Arc::new(three_element()), true).unwrap());
    let c = consolidation_transfer(&trivial_structure(m).unwrap()).unwrap();
    assert_eq!(c.algebra().arrows().unwrap().len(), 4);
    assert_eq!(c.algebra().parse_element("0'").unwrap(), Element::Adjoined);
    let r = c.verify(&VerifyOptions::new(6)).unwrap();
    assert!(r.complete(), "{r}");
    assert!(oracle_mismatches(&c, 4).is_empty());
}
