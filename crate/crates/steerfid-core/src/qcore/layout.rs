//! Labelled tensor-factor layouts and composite index arithmetic.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Ordered list of labelled tensor factors.
///
/// The first entry is the most significant factor of the composite index:
/// for a layout `[(a, da), (b, db)]` the basis state `|i, j>` sits at
/// composite index `i * db + j` (row-major).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    subs: Vec<(String, usize)>,
}

impl Layout {
    /// Builds a layout from `(label, dim)` pairs.
    ///
    /// Labels must be unique and dims at least 1 (dim 1 is a legal trivial
    /// placeholder).
    pub fn new(subs: &[(&str, usize)]) -> Result<Self> {
        let owned: Vec<(String, usize)> = subs
            .iter()
            .map(|(l, d)| (l.to_string(), *d))
            .collect();
        Self::from_owned(owned)
    }

    pub fn from_owned(subs: Vec<(String, usize)>) -> Result<Self> {
        for (label, dim) in &subs {
            if *dim == 0 {
                return Err(Error::BadLayout(alloc::format!(
                    "subsystem {label} has dimension 0"
                )));
            }
        }
        for i in 0..subs.len() {
            for j in (i + 1)..subs.len() {
                if subs[i].0 == subs[j].0 {
                    return Err(Error::BadLayout(alloc::format!(
                        "duplicate label {}",
                        subs[i].0
                    )));
                }
            }
        }
        Ok(Layout { subs })
    }

    pub fn len(&self) -> usize {
        self.subs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subs.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.subs.iter().map(|(l, _)| l.as_str())
    }

    pub fn entries(&self) -> &[(String, usize)] {
        &self.subs
    }

    /// Product of all factor dimensions.
    pub fn total_dim(&self) -> usize {
        self.subs.iter().map(|(_, d)| d).product()
    }

    /// Position of `label` in the layout.
    pub fn position(&self, label: &str) -> Result<usize> {
        self.subs
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::BadLayout(alloc::format!("unknown label {label}")))
    }

    /// Dimension of the factor named `label`.
    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subs[self.position(label)?].1)
    }

    /// Product of the dimensions of the given labels.
    pub fn dim_of_set(&self, labels: &[&str]) -> Result<usize> {
        let mut d = 1;
        for l in labels {
            d *= self.dim_of(l)?;
        }
        Ok(d)
    }

    /// Row-major strides, aligned with the factor order.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = alloc::vec![1usize; self.subs.len()];
        for i in (0..self.subs.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.subs[i + 1].1;
        }
        strides
    }

    /// Splits a composite index into per-factor indices.
    pub fn decompose(&self, mut index: usize) -> Vec<usize> {
        let strides = self.strides();
        let mut parts = alloc::vec![0usize; self.subs.len()];
        for (i, s) in strides.iter().enumerate() {
            parts[i] = index / s;
            index %= s;
        }
        parts
    }

    /// Recombines per-factor indices into a composite index.
    pub fn compose(&self, parts: &[usize]) -> usize {
        let strides = self.strides();
        parts.iter().zip(strides.iter()).map(|(p, s)| p * s).sum()
    }

    /// Sub-layout keeping only `labels`, in layout order.
    pub fn restricted_to(&self, labels: &[&str]) -> Result<Layout> {
        for l in labels {
            self.position(l)?;
        }
        let subs = self
            .subs
            .iter()
            .filter(|(l, _)| labels.contains(&l.as_str()))
            .cloned()
            .collect();
        Layout::from_owned(subs)
    }

    /// Sub-layout with `labels` removed, in layout order.
    pub fn without(&self, labels: &[&str]) -> Result<Layout> {
        for l in labels {
            self.position(l)?;
        }
        let subs = self
            .subs
            .iter()
            .filter(|(l, _)| !labels.contains(&l.as_str()))
            .cloned()
            .collect();
        Layout::from_owned(subs)
    }

    /// Concatenation `self ++ other`; labels must stay unique.
    pub fn concat(&self, other: &Layout) -> Result<Layout> {
        let mut subs = self.subs.clone();
        subs.extend(other.subs.iter().cloned());
        Layout::from_owned(subs)
    }
}
