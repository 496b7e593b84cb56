use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{Element, Semigroupoid};
use crate::error::{Error, Result};

/// The subsemigroupoid of `inner` obtained by removing a finite set of
/// arrows. The caller guarantees the rest is closed under products.
#[derive(Debug)]
pub struct Excluding {
    inner: Arc<dyn Semigroupoid>,
    excluded: BTreeSet<Element>,
}

impl Excluding {
    pub fn new(inner: Arc<dyn Semigroupoid>, excluded: BTreeSet<Element>) -> Self {
        Excluding { inner, excluded }
    }

    pub fn inner(&self) -> &Arc<dyn Semigroupoid> {
        &self.inner
    }

    pub fn excluded(&self) -> &BTreeSet<Element> {
        &self.excluded
    }
}

impl Semigroupoid for Excluding {
    fn objects(&self) -> &[String] {
        self.inner.objects()
    }

    fn source(&self, x: &Element) -> u32 {
        self.inner.source(x)
    }

    fn target(&self, x: &Element) -> u32 {
        self.inner.target(x)
    }

    fn multiply(&self, x: &Element, y: &Element) -> Option<Element> {
        self.inner.multiply(x, y)
    }

    fn contains(&self, x: &Element) -> bool {
        !self.excluded.contains(x) && self.inner.contains(x)
    }

    fn arrows(&self) -> Option<Vec<Element>> {
        let all = self.inner.arrows()?;
        Some(all.into_iter().filter(|x| !self.excluded.contains(x)).collect())
    }

    fn arrows_up_to(&self, size: usize) -> Vec<Element> {
        let all = self.inner.arrows_up_to(size);
        all.into_iter().filter(|x| !self.excluded.contains(x)).collect()
    }

    fn identity(&self, object: u32) -> Option<Element> {
        self.inner.identity(object).filter(|e| !self.excluded.contains(e))
    }

    fn describe(&self, x: &Element) -> String {
        self.inner.describe(x)
    }

    fn parse_element(&self, text: &str) -> Result<Element> {
        let x = self.inner.parse_element(text)?;
        if self.excluded.contains(&x) {
            return Err(Error::UnknownElement(String::from(text)));
        }
        Ok(x)
    }
}
