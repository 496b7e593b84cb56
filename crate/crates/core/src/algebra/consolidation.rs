use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{Element, Semigroupoid};
use crate::error::Result;

/// The consolidation of a semigroupoid: its arrows plus a zero, as a
/// one-object semigroupoid, with non-composable products sent to zero.
#[derive(Debug)]
pub struct Consolidation {
    inner: Arc<dyn Semigroupoid>,
    objects: Vec<String>,
}

impl Consolidation {
    pub fn new(inner: Arc<dyn Semigroupoid>) -> Self {
        Consolidation {
            inner,
            objects: vec![String::from("*")],
        }
    }

    pub fn inner(&self) -> &Arc<dyn Semigroupoid> {
        &self.inner
    }

    /// `0`, or `0'` when the inner semigroupoid has a zero of its own.
    pub fn zero_name(&self) -> &'static str {
        if self.inner.contains(&Element::Zero) {
            "0'"
        } else {
            "0"
        }
    }
}

impl Semigroupoid for Consolidation {
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
        if *x == Element::Adjoined || *y == Element::Adjoined {
            return Some(Element::Adjoined);
        }
        Some(self.inner.multiply(x, y).unwrap_or(Element::Adjoined))
    }

    fn contains(&self, x: &Element) -> bool {
        *x == Element::Adjoined || self.inner.contains(x)
    }

    fn arrows(&self) -> Option<Vec<Element>> {
        let mut out = self.inner.arrows()?;
        out.push(Element::Adjoined);
        Some(out)
    }

    fn arrows_up_to(&self, size: usize) -> Vec<Element> {
        let mut out = self.inner.arrows_up_to(size);
        out.push(Element::Adjoined);
        out
    }

    fn identity(&self, _object: u32) -> Option<Element> {
        None
    }

    fn describe(&self, x: &Element) -> String {
        match x {
            Element::Adjoined => String::from(self.zero_name()),
            other => self.inner.describe(other),
        }
    }

    fn parse_element(&self, text: &str) -> Result<Element> {
        if text == self.zero_name() {
            Ok(Element::Adjoined)
        } else {
            self.inner.parse_element(text)
        }
    }
}
