//! Dynamic lists: ordered label sequences resolved per block with
//! deduplication, the genetic ordering search, the tree + dynamic-list
//! combination, and the multi-pass trainer.

use crate::dataset::{ContextTuple, SymbolSpace};
use crate::error::{Error, Result};
use crate::labels::{eval_label, Label};

/// An ordered label sequence. Resolving it against a context yields a full
/// permutation of the modes: labels are evaluated in order, skipping
/// unavailable results and modes already emitted.
///
/// Construction requires every numeric label `#0..#k-1` to be present,
/// which guarantees completeness for every context.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DynamicList {
    labels: Vec<Label>,
}

impl DynamicList {
    pub fn new(labels: Vec<Label>, space: &SymbolSpace) -> Result<Self> {
        let mut have = vec![false; space.k() as usize];
        for l in &labels {
            if let Label::Numeric(m) = l {
                if !space.contains(*m) {
                    return Err(Error::Validation(format!(
                        "numeric label #{m} out of range for k={}",
                        space.k()
                    )));
                }
                have[*m as usize] = true;
            }
        }
        if let Some(missing) = have.iter().position(|&h| !h) {
            return Err(Error::Validation(format!(
                "dynamic list vocabulary is incomplete: numeric label #{missing} is missing, \
                 so some contexts would not cover all modes"
            )));
        }
        Ok(DynamicList { labels })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Emission order of all `k` modes for one context tuple.
    pub fn resolve(&self, ctx: &ContextTuple, space: &SymbolSpace) -> Vec<u16> {
        let k = space.k() as usize;
        let mut out = Vec::with_capacity(k);
        let mut seen = vec![false; k];
        for &l in &self.labels {
            if out.len() == k {
                break;
            }
            if let Some(m) = eval_label(l, ctx, space) {
                if !seen[m as usize] {
                    seen[m as usize] = true;
                    out.push(m);
                }
            }
        }
        debug_assert_eq!(out.len(), k);
        out
    }
}
