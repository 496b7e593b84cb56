use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{Element, Semigroupoid};
use crate::error::{Error, Result};
use crate::graph::{enumerate_paths, Graph, Path};

/// The free semigroupoid (non-empty paths) or free category (all paths) on
/// a graph. Arrows are the paths themselves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Free {
    graph: Arc<Graph>,
    objects: Vec<String>,
    identities: bool,
}

impl Free {
    pub fn semigroupoid(graph: Arc<Graph>) -> Self {
        Free::new(graph, false)
    }

    pub fn category(graph: Arc<Graph>) -> Self {
        Free::new(graph, true)
    }

    fn new(graph: Arc<Graph>, identities: bool) -> Self {
        let objects = graph.vertices().map(|v| String::from(graph.vertex_id(v))).collect();
        Free {
            graph,
            objects,
            identities,
        }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn has_identities(&self) -> bool {
        self.identities
    }

    fn path<'a>(&self, x: &'a Element) -> Option<&'a Path> {
        match x {
            Element::Path(p) => Some(p),
            _ => None,
        }
    }
}

impl Semigroupoid for Free {
    fn objects(&self) -> &[String] {
        &self.objects
    }

    fn source(&self, x: &Element) -> u32 {
        self.path(x).map_or(u32::MAX, |p| p.source().0)
    }

    fn target(&self, x: &Element) -> u32 {
        self.path(x).map_or(u32::MAX, |p| p.target().0)
    }

    fn multiply(&self, x: &Element, y: &Element) -> Option<Element> {
        let (p, q) = (self.path(x)?, self.path(y)?);
        p.compose(q).ok().map(Element::Path)
    }

    fn contains(&self, x: &Element) -> bool {
        match self.path(x) {
            Some(p) if p.is_empty() => self.identities && p.source().index() < self.graph.vertex_count(),
            Some(p) => Path::from_edges(&self.graph, p.edges().to_vec()).as_ref() == Ok(p),
            None => false,
        }
    }

    fn arrows(&self) -> Option<Vec<Element>> {
        // finite exactly when the graph is acyclic; only the edgeless case is
        // recognised here
        if self.graph.edge_count() == 0 {
            Some(self.arrows_up_to(0))
        } else {
            None
        }
    }

    fn arrows_up_to(&self, size: usize) -> Vec<Element> {
        enumerate_paths(&self.graph, size, self.identities)
            .into_iter()
            .map(Element::Path)
            .collect()
    }

    fn identity(&self, object: u32) -> Option<Element> {
        (self.identities && (object as usize) < self.objects.len())
            .then(|| Element::Path(Path::empty(crate::graph::Vertex(object))))
    }

    fn describe(&self, x: &Element) -> String {
        match self.path(x) {
            Some(p) => self.graph.format_path(p),
            None => alloc::format!("{x:?}"),
        }
    }

    fn parse_element(&self, text: &str) -> Result<Element> {
        let p = self.graph.parse_path(text)?;
        if p.is_empty() && !self.identities {
            return Err(Error::UnknownElement(String::from(text)));
        }
        Ok(Element::Path(p))
    }
}
