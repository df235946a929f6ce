//! The AMD transform `χ^H(S, O) = χ(S, O) + H(O)` for nonempty `S`.
//!
//! `H` is the smallest surcharge making the base prices satisfy the
//! no-super-additivity conditions. It is computed bottom-up over
//! sub-multisets of `O`:
//!
//! * `h1(T)`: the largest amount by which `χ(S1 ∪ S2, T)` exceeds
//!   `χ(S1, T) + χ(S2, T)` over disjoint `S1, S2`;
//! * `h2(T)`: the largest `H(T∖j) + χ(S, T∖j) − χ(S, T)` over `j ∈ T` and
//!   nonempty `S`;
//! * `H(T) = max(h1, h2)`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::domain::{Bundle, Caps, Money};
use crate::error::Result;
use crate::porf::{canonical_multiset, PriceFunction};
use crate::valuation::ValuationSpec;

type Key = (usize, Vec<ValuationSpec>);

pub struct Amd<P> {
    base: P,
    surcharge: RwLock<HashMap<Key, Money>>,
    base_rows: RwLock<HashMap<Key, Arc<Vec<Money>>>>,
}

impl<P: PriceFunction> Amd<P> {
    pub fn new(base: P) -> Self {
        Amd {
            base,
            surcharge: RwLock::new(HashMap::new()),
            base_rows: RwLock::new(HashMap::new()),
        }
    }

    pub fn base(&self) -> &P {
        &self.base
    }

    pub fn memo_len(&self) -> usize {
        self.surcharge.read().unwrap().len()
    }

    fn base_row(&self, m: usize, multiset: &[ValuationSpec]) -> Result<Arc<Vec<Money>>> {
        let key = (m, multiset.to_vec());
        if let Some(row) = self.base_rows.read().unwrap().get(&key) {
            return Ok(row.clone());
        }
        let refs: Vec<&ValuationSpec> = multiset.iter().collect();
        let row = Arc::new(self.base.price_row(m, &refs)?);
        self.base_rows.write().unwrap().insert(key, row.clone());
        Ok(row)
    }

    /// `H(others)`.
    pub fn h(&self, m: usize, others: &[&ValuationSpec]) -> Result<Money> {
        Caps::global().check_n(others.len())?;
        Caps::global().check_m(m)?;
        self.h_sorted(m, &canonical_multiset(others))
    }

    fn h_sorted(&self, m: usize, t: &[ValuationSpec]) -> Result<Money> {
        let key = (m, t.to_vec());
        if let Some(h) = self.surcharge.read().unwrap().get(&key) {
            return Ok(h.clone());
        }
        let row = self.base_row(m, t)?;

        let mut h = Money::zero();
        let full = (1u32 << m) - 1;
        for s1 in 0..=full {
            let rest = Bundle::from_mask(m, full & !s1);
            for s2 in rest.subsets() {
                let s2 = s2.mask();
                if s2 < s1 {
                    continue;
                }
                let gap = &row[(s1 | s2) as usize] - &row[s1 as usize] - &row[s2 as usize];
                if gap > h {
                    h = gap;
                }
            }
        }

        // Removing equal types gives the same sub-multiset; t is sorted.
        for j in 0..t.len() {
            if j > 0 && t[j] == t[j - 1] {
                continue;
            }
            let mut smaller = t.to_vec();
            smaller.remove(j);
            let h_smaller = self.h_sorted(m, &smaller)?;
            let row_smaller = self.base_row(m, &smaller)?;
            for s in 1..=full as usize {
                let cand = &h_smaller + &row_smaller[s] - &row[s];
                if cand > h {
                    h = cand;
                }
            }
        }

        self.surcharge.write().unwrap().insert(key, h.clone());
        Ok(h)
    }
}

impl<P: PriceFunction> PriceFunction for Amd<P> {
    fn name(&self) -> String {
        format!("amd:{}", self.base.name())
    }

    fn price_row(&self, m: usize, others: &[&ValuationSpec]) -> Result<Vec<Money>> {
        Caps::global().check_n(others.len())?;
        Caps::global().check_m(m)?;
        let t = canonical_multiset(others);
        let h = self.h_sorted(m, &t)?;
        let mut row = self.base_row(m, &t)?.as_ref().clone();
        for p in row.iter_mut().skip(1) {
            *p += &h;
        }
        Ok(row)
    }
}

/// `H(others)` for `base`, with a fresh memo.
pub fn amd_h(base: &dyn PriceFunction, m: usize, others: &[&ValuationSpec]) -> Result<Money> {
    Amd::new(base).h(m, others)
}

/// `χ^H(s, others)` for `base`, with a fresh memo.
pub fn amd_price(base: &dyn PriceFunction, s: Bundle, others: &[&ValuationSpec]) -> Result<Money> {
    Amd::new(base).price(s, others)
}
