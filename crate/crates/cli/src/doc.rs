//! The JSON document family: every file carries `format: 1` and a `kind`.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use autorees_core::algebra::{tabulate, Consolidation, Element, FiniteSemigroupoid, Free, Semigroupoid};
use autorees_core::automaton::{Automaton, PathAutomaton};
use autorees_core::graph::Graph;
use autorees_core::rees::{Decomposition, ReesData, ReesMatrix, RowCrossSectionWitness};
use autorees_core::structure::{AutomaticStructure, Flags};
use autorees_core::sync::{PairGraph, SyncRelation};

pub const FORMAT: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub format: u32,
    #[serde(flatten)]
    pub body: Body,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Body {
    Graph(GraphDoc),
    /// A finite semigroupoid given by its table.
    Semigroupoid {
        objects: Vec<String>,
        /// `[name, source, target]`
        arrows: Vec<(String, String, String)>,
        /// `[left, right, product]`
        products: Vec<(String, String, String)>,
    },
    /// The free semigroupoid, or free category, on a graph.
    Free { graph: GraphDoc, identities: bool },
    Consolidation { of: Box<Body> },
    Rees(ReesDoc),
    Automaton { graph: GraphDoc, automaton: AutomatonDoc },
    Witness(WitnessDoc),
    Structure(Box<StructureDoc>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    /// `[id, source, target]`
    pub edges: Vec<(String, String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReesDoc {
    pub base: Box<Body>,
    /// `[index, object]`
    pub rows: Vec<(String, String)>,
    pub cols: Vec<(String, String)>,
    /// One row per column index, one entry per row index; `"0"` is zero.
    pub sandwich: Vec<Vec<String>>,
    #[serde(default = "yes")]
    pub with_zero: bool,
}

fn yes() -> bool {
    true
}

/// An automaton over a graph, states labelled by vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomatonDoc {
    pub states: Vec<String>,
    pub transitions: Vec<(u32, String, u32)>,
    pub start: Vec<u32>,
    pub terminal: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub empty: Vec<String>,
}

/// A synchronous relation, read over the padded pair graph. States carry
/// vertex pairs and padding is written `$:vertex`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationDoc {
    pub states: Vec<(String, String)>,
    /// `[from, left, right, to]`
    pub transitions: Vec<(u32, String, String, u32)>,
    pub start: Vec<u32>,
    pub terminal: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub lambda_prime: Vec<String>,
    pub strong: bool,
    /// `[arrow, λ, i, t]`; missing arrows are factorised by search.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decompositions: Vec<(String, String, String, Option<String>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureDoc {
    pub algebra: Body,
    /// `[id, source, target, value]`
    pub letters: Vec<(String, String, String, String)>,
    pub language: AutomatonDoc,
    pub multipliers: BTreeMap<String, RelationDoc>,
    pub equality_at: BTreeMap<String, RelationDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix_equality: Option<RelationDoc>,
    pub cross_section: bool,
    pub prefix_closed: bool,
}

pub fn parse(text: &str) -> Result<Document> {
    let doc: Document = serde_json::from_str(text).context("malformed document")?;
    if doc.format != FORMAT {
        bail!("unsupported format {}", doc.format);
    }
    Ok(doc)
}

pub fn render(body: Body) -> String {
    let mut s = serde_json::to_string_pretty(&Document { format: FORMAT, body }).expect("documents serialise");
    s.push('\n');
    s
}

impl GraphDoc {
    pub fn build(&self) -> Result<Arc<Graph>> {
        Ok(Arc::new(Graph::new(self.vertices.iter().cloned(), self.edges.iter().cloned())?))
    }

    pub fn of(g: &Graph) -> Self {
        GraphDoc {
            vertices: g.vertices().map(|v| g.vertex_id(v).to_string()).collect(),
            edges: g
                .edges()
                .map(|e| {
                    (
                        g.edge_id(e).to_string(),
                        g.vertex_id(g.source(e)).to_string(),
                        g.vertex_id(g.target(e)).to_string(),
                    )
                })
                .collect(),
        }
    }
}

impl AutomatonDoc {
    pub fn of_path(a: &PathAutomaton) -> Self {
        let g = a.alphabet();
        let n = a.state_count() as u32;
        AutomatonDoc {
            states: (0..n).map(|s| g.vertex_id(a.label(s)).to_string()).collect(),
            transitions: (0..n)
                .flat_map(|s| a.transitions(s).iter().map(move |&(e, t)| (s, g.edge_id(e).to_string(), t)))
                .collect(),
            start: a.starts().to_vec(),
            terminal: (0..n).filter(|&s| a.is_terminal(s)).collect(),
            empty: a.empty_vertices().iter().map(|&v| g.vertex_id(v).to_string()).collect(),
        }
    }

    pub fn path(&self, g: &Arc<Graph>) -> Result<PathAutomaton> {
        let vertex = |id: &str| g.vertex(id).ok_or_else(|| anyhow!("unknown vertex `{id}`"));
        let labels = self.states.iter().map(|s| vertex(s)).collect::<Result<Vec<_>>>()?;
        let trans = self
            .transitions
            .iter()
            .map(|(s, e, t)| Ok((*s, g.edge(e).ok_or_else(|| anyhow!("unknown edge `{e}`"))?, *t)))
            .collect::<Result<Vec<_>>>()?;
        let empty = self.empty.iter().map(|v| vertex(v)).collect::<Result<Vec<_>>>()?;
        check_states(
            self.states.len(),
            self.transitions.iter().flat_map(|(s, _, t)| [*s, *t]),
            &self.start,
            &self.terminal,
        )?;
        Ok(Automaton::from_parts(Arc::clone(g), labels, &trans, &self.start, &self.terminal, &empty)?)
    }
}

impl RelationDoc {
    pub fn of(r: &SyncRelation) -> Self {
        let a = r.automaton();
        let pg = r.pair_graph();
        let g = pg.base();
        let n = a.state_count() as u32;
        RelationDoc {
            states: (0..n)
                .map(|s| {
                    let (u, v) = a.label(s);
                    (g.vertex_id(u).to_string(), g.vertex_id(v).to_string())
                })
                .collect(),
            transitions: (0..n)
                .flat_map(|s| {
                    a.transitions(s)
                        .iter()
                        .map(move |&((x, y), t)| (s, pg.pad_name(x), pg.pad_name(y), t))
                })
                .collect(),
            start: a.starts().to_vec(),
            terminal: (0..n).filter(|&s| a.is_terminal(s)).collect(),
        }
    }

    pub fn relation(&self, g: &Arc<Graph>) -> Result<SyncRelation> {
        let pg = Arc::new(PairGraph::new(Arc::clone(g)));
        let vertex = |id: &str| g.vertex(id).ok_or_else(|| anyhow!("unknown vertex `{id}`"));
        let labels = self
            .states
            .iter()
            .map(|(a, b)| Ok((vertex(a)?, vertex(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let trans = self
            .transitions
            .iter()
            .map(|(s, a, b, t)| Ok((*s, (pg.parse_pad(a)?, pg.parse_pad(b)?), *t)))
            .collect::<Result<Vec<_>>>()?;
        check_states(
            self.states.len(),
            self.transitions.iter().flat_map(|(s, _, _, t)| [*s, *t]),
            &self.start,
            &self.terminal,
        )?;
        let aut = Automaton::from_parts(pg, labels, &trans, &self.start, &self.terminal, &[])?;
        Ok(SyncRelation::from_automaton(aut))
    }
}

fn check_states(n: usize, used: impl Iterator<Item = u32>, start: &[u32], terminal: &[u32]) -> Result<()> {
    let n = n as u32;
    match used.chain(start.iter().copied()).chain(terminal.iter().copied()).find(|&s| s >= n) {
        Some(s) => bail!("state {s} out of range"),
        None => Ok(()),
    }
}

/// An algebra read from a document.
pub struct Algebra {
    pub algebra: Arc<dyn Semigroupoid>,
    /// The semigroupoid table, before validation.
    pub table: Option<FiniteSemigroupoid>,
    pub free: Option<(Arc<Graph>, bool)>,
}

impl Body {
    pub fn kind(&self) -> &'static str {
        match self {
            Body::Graph(_) => "graph",
            Body::Semigroupoid { .. } => "semigroupoid",
            Body::Free { .. } => "free",
            Body::Consolidation { .. } => "consolidation",
            Body::Rees(_) => "rees",
            Body::Automaton { .. } => "automaton",
            Body::Witness(_) => "witness",
            Body::Structure(_) => "structure",
        }
    }

    /// Reads an algebra without validating finite tables.
    pub fn algebra(&self) -> Result<Algebra> {
        Ok(match self {
            Body::Semigroupoid {
                objects,
                arrows,
                products,
            } => {
                let s = FiniteSemigroupoid::new(objects, arrows, products)?;
                Algebra {
                    algebra: Arc::new(s.clone()),
                    table: Some(s),
                    free: None,
                }
            }
            Body::Free { graph, identities } => {
                let g = graph.build()?;
                let f = if *identities {
                    Free::category(Arc::clone(&g))
                } else {
                    Free::semigroupoid(Arc::clone(&g))
                };
                Algebra {
                    algebra: Arc::new(f),
                    table: None,
                    free: Some((g, *identities)),
                }
            }
            Body::Consolidation { of } => {
                let inner = of.checked_algebra()?;
                Algebra {
                    algebra: Arc::new(Consolidation::new(inner.algebra)),
                    table: None,
                    free: None,
                }
            }
            Body::Rees(r) => {
                Algebra {
                    algebra: Arc::new(ReesMatrix::new(Arc::new(r.data()?), r.with_zero)?),
                    table: None,
                    free: None,
                }
            }
            other => bail!("a `{}` document is not an algebra", other.kind()),
        })
    }

    /// As [`Body::algebra`], rejecting tables that break the axioms.
    pub fn checked_algebra(&self) -> Result<Algebra> {
        let a = self.algebra()?;
        if let Some(t) = &a.table {
            let rep = t.validate();
            if !rep.is_valid() {
                bail!("the semigroupoid is invalid: {}", rep.descriptions.join("; "));
            }
        }
        Ok(a)
    }

    /// The table document of a finite algebra.
    pub fn table_of(s: &dyn Semigroupoid) -> Result<Body> {
        let (t, _) = tabulate(s)?;
        let n = t.arrow_count() as u32;
        let obj = |o: u32| s.objects()[o as usize].clone();
        Ok(Body::Semigroupoid {
            objects: s.objects().to_vec(),
            arrows: (0..n)
                .map(|a| (t.arrow_name(a).to_string(), obj(t.arrow_source(a)), obj(t.arrow_target(a))))
                .collect(),
            products: t
                .product_list()
                .into_iter()
                .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
                .collect(),
        })
    }
}

impl ReesDoc {
    pub fn data(&self) -> Result<ReesData> {
        let base = self.base.checked_algebra()?.algebra;
        let object = |name: &str| base.object_index(name).ok_or_else(|| anyhow!("unknown object `{name}`"));
        let rows = self.rows.iter().map(|r| r.0.clone()).collect();
        let cols = self.cols.iter().map(|c| c.0.clone()).collect();
        let row_object = self.rows.iter().map(|r| object(&r.1)).collect::<Result<Vec<_>>>()?;
        let col_object = self.cols.iter().map(|c| object(&c.1)).collect::<Result<Vec<_>>>()?;
        if self.sandwich.len() != self.cols.len() || self.sandwich.iter().any(|r| r.len() != self.rows.len()) {
            bail!("the sandwich matrix must have one row per column index and one entry per row index");
        }
        let sandwich = self
            .sandwich
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| if p == "0" { Ok(None) } else { Ok(Some(base.parse_element(p)?)) })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ReesData {
            base,
            rows,
            cols,
            row_object,
            col_object,
            sandwich,
        })
    }
}

impl WitnessDoc {
    pub fn witness(&self, data: &ReesData) -> Result<RowCrossSectionWitness> {
        let col = |name: &str| {
            data.cols
                .iter()
                .position(|c| c == name)
                .map(|k| k as u32)
                .ok_or_else(|| anyhow!("unknown column `{name}`"))
        };
        let row = |name: &str| {
            data.rows
                .iter()
                .position(|c| c == name)
                .map(|k| k as u32)
                .ok_or_else(|| anyhow!("unknown row `{name}`"))
        };
        let s = &*data.base;
        let mut decompositions = BTreeMap::new();
        for (x, l, i, t) in &self.decompositions {
            let t = t.as_deref().map(|t| s.parse_element(t)).transpose()?;
            decompositions.insert(
                s.parse_element(x)?,
                Decomposition {
                    lambda: col(l)?,
                    i: row(i)?,
                    t,
                },
            );
        }
        Ok(RowCrossSectionWitness {
            lambda_prime: self.lambda_prime.iter().map(|l| col(l)).collect::<Result<_>>()?,
            decompositions,
            strong: self.strong,
        })
    }
}

impl StructureDoc {
    pub fn of(s: &AutomaticStructure, algebra: Body) -> Self {
        let g = s.alphabet();
        let alg = s.algebra();
        StructureDoc {
            algebra,
            letters: g
                .edges()
                .map(|e| {
                    (
                        g.edge_id(e).to_string(),
                        g.vertex_id(g.source(e)).to_string(),
                        g.vertex_id(g.target(e)).to_string(),
                        alg.describe(s.letter(e)),
                    )
                })
                .collect(),
            language: AutomatonDoc::of_path(s.language()),
            multipliers: g
                .edges()
                .map(|e| (g.edge_id(e).to_string(), RelationDoc::of(s.multiplier(e))))
                .collect(),
            equality_at: g
                .vertices()
                .map(|v| (g.vertex_id(v).to_string(), RelationDoc::of(s.equality_at(v))))
                .collect(),
            prefix_equality: s.prefix_equality().map(RelationDoc::of),
            cross_section: s.flags().cross_section,
            prefix_closed: s.flags().prefix_closed,
        }
    }

    pub fn graph(&self) -> Result<Arc<Graph>> {
        let vertices: std::collections::BTreeSet<&String> = self.letters.iter().flat_map(|l| [&l.1, &l.2]).collect();
        let mut vs: Vec<String> = vertices.into_iter().cloned().collect();
        vs.extend(self.equality_at.keys().filter(|v| !vs.contains(v)).cloned().collect::<Vec<_>>());
        let es = self.letters.iter().map(|l| (l.0.clone(), l.1.clone(), l.2.clone()));
        Ok(Arc::new(Graph::new(vs, es)?))
    }

    pub fn build(&self) -> Result<(AutomaticStructure, Algebra)> {
        let alg = self.algebra.checked_algebra()?;
        let g = self.graph()?;
        let letters: Vec<Element> = self
            .letters
            .iter()
            .map(|l| alg.algebra.parse_element(&l.3).with_context(|| format!("value of letter `{}`", l.0)))
            .collect::<Result<_>>()?;
        let language = self.language.path(&g).context("language")?;
        let multipliers = g
            .edges()
            .map(|e| {
                let id = g.edge_id(e);
                let d = self.multipliers.get(id).ok_or_else(|| anyhow!("no multiplier for `{id}`"))?;
                d.relation(&g).with_context(|| format!("multiplier `{id}`"))
            })
            .collect::<Result<Vec<_>>>()?;
        let equality_at = g
            .vertices()
            .map(|v| {
                let id = g.vertex_id(v);
                let d = self.equality_at.get(id).ok_or_else(|| anyhow!("no equality relation at `{id}`"))?;
                d.relation(&g).with_context(|| format!("equality at `{id}`"))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut s = AutomaticStructure::new(Arc::clone(&alg.algebra), g.clone(), letters, language, multipliers, equality_at)?
            .with_flags(Flags {
                cross_section: self.cross_section,
                prefix_closed: self.prefix_closed,
            });
        if let Some(p) = &self.prefix_equality {
            s = s.with_prefix_equality(p.relation(&g).context("prefix equality")?)?;
        }
        Ok((s, alg))
    }
}
