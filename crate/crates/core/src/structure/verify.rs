//! Bounded verification of a structure against its defining relations.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{AutomaticStructure, Relation};
use crate::error::Result;
use crate::graph::Edge;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    /// A shortest witness of the failure.
    Fail(String),
    Skipped(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Words of length at most `bound` are compared with the definitions.
    pub bound: usize,
    /// Every arrow of size at most this must have a representative of
    /// length at most `bound`. Finite algebras are checked in full.
    pub surjectivity_size: usize,
}

impl VerifyOptions {
    pub fn new(bound: usize) -> Self {
        VerifyOptions { bound, surjectivity_size: bound / 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub bound: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| !matches!(c.status, CheckStatus::Fail(_)))
    }

    /// Passed with nothing skipped.
    pub fn complete(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| matches!(c.status, CheckStatus::Fail(_)))
    }

    pub fn get(&self, name: &str) -> Option<&CheckStatus> {
        self.checks.iter().find(|c| c.name == name).map(|c| &c.status)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "checked up to length {}", self.bound)?;
        for c in &self.checks {
            match &c.status {
                CheckStatus::Pass => writeln!(f, "  ok    {}", c.name)?,
                CheckStatus::Fail(w) => writeln!(f, "  FAIL  {}: {}", c.name, w)?,
                CheckStatus::Skipped(why) => writeln!(f, "  skip  {}: {}", c.name, why)?,
            }
        }
        Ok(())
    }
}

type Pair = (Vec<Edge>, Vec<Edge>);

fn pair_key(p: &Pair) -> (usize, &[Edge], &[Edge]) {
    (p.0.len().max(p.1.len()), &p.0, &p.1)
}

impl AutomaticStructure {
    fn stored_pairs(&self, which: Relation, bound: usize) -> BTreeSet<Pair> {
        match self.relation(which) {
            Some(r) => r
                .enumerate(bound)
                .into_iter()
                .map(|(a, b)| (a.edges().to_vec(), b.edges().to_vec()))
                .collect(),
            None => BTreeSet::new(),
        }
    }

    fn compare(&self, which: Relation, bound: usize) -> Result<CheckStatus> {
        let stored = self.stored_pairs(which, bound);
        let truth = self.bruteforce(which, bound)?;
        let missing = truth.difference(&stored).min_by(|a, b| pair_key(a).cmp(&pair_key(b)));
        let extra = stored.difference(&truth).min_by(|a, b| pair_key(a).cmp(&pair_key(b)));
        let show = |p: &Pair| format!("({}, {})", self.format(&p.0), self.format(&p.1));
        Ok(match (missing, extra) {
            (None, None) => CheckStatus::Pass,
            (Some(m), Some(x)) if pair_key(x) < pair_key(m) => CheckStatus::Fail(format!("{} accepted but not in the relation", show(x))),
            (Some(m), _) => CheckStatus::Fail(format!("{} in the relation but not accepted", show(m))),
            (None, Some(x)) => CheckStatus::Fail(format!("{} accepted but not in the relation", show(x))),
        })
    }

    fn surjectivity(&self, opts: &VerifyOptions) -> Result<CheckStatus> {
        let covered = self.classes(opts.bound)?;
        let wanted = match self.algebra.arrows() {
            Some(all) => all,
            None => self.algebra.arrows_up_to(opts.surjectivity_size),
        };
        Ok(match wanted.iter().find(|x| !covered.contains_key(*x)) {
            None => CheckStatus::Pass,
            Some(x) => CheckStatus::Fail(format!(
                "{} has no representative of length at most {}",
                self.algebra.describe(x),
                opts.bound
            )),
        })
    }

    /// Bounded comparison of every stored relation with its definition,
    /// plus the exact checks that are available.
    pub fn verify(&self, opts: &VerifyOptions) -> Result<VerifyReport> {
        let mut checks = Vec::new();
        let mut push = |name: String, status: CheckStatus| checks.push(Check { name, status });
        for (name, which, _) in self.named_relations() {
            push(name, self.compare(which, opts.bound)?);
        }
        if self.prefix_equality.is_none() {
            push(String::from("K'[=]"), CheckStatus::Skipped(String::from("no prefix relation stored")));
        }
        let union = crate::sync::SyncRelation::union_all(alloc::sync::Arc::clone(&self.alphabet), self.equality_at.iter());
        push(
            String::from("K[=] is the union of the vertex relations"),
            if self.equality.equivalent(&union)? {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail(String::from("the stored equality differs from the union (exact)"))
            },
        );
        push(String::from("surjective"), self.surjectivity(opts)?);
        push(
            String::from("cross-section"),
            match (self.flags.cross_section, self.is_cross_section()?) {
                (false, _) => CheckStatus::Skipped(String::from("not declared")),
                (true, true) => CheckStatus::Pass,
                (true, false) => CheckStatus::Fail(String::from("K[=] is not the diagonal of K (exact)")),
            },
        );
        push(
            String::from("prefix-closed"),
            match (self.flags.prefix_closed, self.is_prefix_closed()?) {
                (false, _) => CheckStatus::Skipped(String::from("not declared")),
                (true, true) => CheckStatus::Pass,
                (true, false) => CheckStatus::Fail(String::from("K is not prefix-closed (exact)")),
            },
        );
        Ok(VerifyReport { bound: opts.bound, checks })
    }
}
