//! Brute-force checkers for the false-name-proofness conditions.
//!
//! Quantifiers over the type space run over a finite [`TypePool`]. A pass
//! only means that no violation exists in the swept universe; the report's
//! `cases` field says how large that universe was.

mod allocation;
mod dispatch;
mod price;
mod scf;

pub use allocation::{allocation_of, check_subadditivity, check_weak_monotonicity, check_withdrawal_monotonicity};
pub use dispatch::{AxiomId, PoolCheck};
pub use price::{check_dlb, check_nsa, check_nsa_pool, check_nsaw, check_nsaw_pool, check_pia, check_snsaw, check_submodularity};
pub use scf::{check_scf_fnpw, check_scf_strategyproof, TabulatedScf};

use crate::error::{Error, Result};
use crate::valuation::ValuationSpec;

/// A finite stand-in for the type space: valid types over the same items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypePool {
    m: usize,
    types: Vec<ValuationSpec>,
}

impl TypePool {
    pub fn new(m: usize, types: Vec<ValuationSpec>) -> Result<Self> {
        for t in &types {
            if t.m() != m {
                return Err(Error::MismatchedItems {
                    expected: m,
                    found: t.m(),
                });
            }
            if let Some(cx) = t.validate().counterexample {
                return Err(Error::InvalidValuation(format!("{t:?} is not a valid type: {cx:?}")));
            }
        }
        Ok(TypePool { m, types })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn types(&self) -> &[ValuationSpec] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// Every multiset of pool members with at most `max_size` elements,
    /// smallest first, each listed in pool order.
    pub fn multisets(&self, max_size: usize) -> Vec<Vec<&ValuationSpec>> {
        multiset_indices(self.types.len(), max_size)
            .into_iter()
            .map(|idx| idx.into_iter().map(|i| &self.types[i]).collect())
            .collect()
    }

    /// Multisets of exactly `size` elements.
    pub fn multisets_of_size(&self, size: usize) -> Vec<Vec<&ValuationSpec>> {
        self.multisets(size).into_iter().filter(|o| o.len() == size).collect()
    }
}

/// Nondecreasing index sequences over `0..len` of length `0..=max_size`,
/// shorter first.
pub fn multiset_indices(len: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_size {
        let mut next = Vec::new();
        for seq in &frontier {
            let start = seq.last().copied().unwrap_or(0);
            for i in start..len {
                let mut s: Vec<usize> = seq.clone();
                s.push(i);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub(crate) fn owned(types: &[&ValuationSpec]) -> Vec<ValuationSpec> {
    types.iter().map(|t| (*t).clone()).collect()
}
