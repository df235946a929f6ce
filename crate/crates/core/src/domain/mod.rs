//! Core value types shared by every module.

mod bundle;
mod money;

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

pub use bundle::{all_subsets, full_mask, item_label, Bundle, MAX_ITEMS};
pub use money::{Money, UNIFORM_BITS};

use crate::error::{Error, Result};
use crate::valuation::ValuationSpec;

/// Size limits for the exponential algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub m_max: usize,
    pub n_max: usize,
    pub k_max: usize,
    pub q_max: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            m_max: 6,
            n_max: 8,
            k_max: 2,
            q_max: 2,
        }
    }
}

static GLOBAL_CAPS: RwLock<Option<Caps>> = RwLock::new(None);

impl Caps {
    /// The process-wide caps (defaults unless [`Caps::set_global`] was called).
    pub fn global() -> Caps {
        GLOBAL_CAPS.read().unwrap().unwrap_or_default()
    }

    pub fn set_global(caps: Caps) {
        *GLOBAL_CAPS.write().unwrap() = Some(caps);
    }

    /// Parses overrides of the form `m=6,n=8,k=2,q=2` on top of `self`.
    pub fn with_overrides(mut self, spec: &str) -> Result<Caps> {
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("bad cap override {part:?}")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad cap value in {part:?}")))?;
            if value == 0 {
                return Err(Error::InvalidArgument(format!("cap {key} must be >= 1")));
            }
            match key.trim() {
                "m" | "m_max" => self.m_max = value.min(MAX_ITEMS),
                "n" | "n_max" => self.n_max = value,
                "k" | "k_max" => self.k_max = value,
                "q" | "q_max" => self.q_max = value,
                other => return Err(Error::InvalidArgument(format!("unknown cap {other:?}"))),
            }
        }
        Ok(self)
    }

    pub fn check_m(&self, m: usize) -> Result<()> {
        if m > self.m_max {
            return Err(Error::CapExceeded {
                what: "m",
                value: m,
                cap: self.m_max,
            });
        }
        Ok(())
    }

    pub fn check_n(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            return Err(Error::CapExceeded {
                what: "agent count",
                value: n,
                cap: self.n_max,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agent {
    pub id: String,
    pub valuation: ValuationSpec,
}

/// An ordered list of agents reporting types over the same `m` items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    m: usize,
    agents: Vec<Agent>,
}

impl Profile {
    pub fn new(m: usize, agents: Vec<Agent>) -> Result<Self> {
        let mut seen = HashSet::new();
        for agent in &agents {
            if !seen.insert(agent.id.as_str()) {
                return Err(Error::InvalidProfile(format!("duplicate agent id {:?}", agent.id)));
            }
            if agent.valuation.m() != m {
                return Err(Error::MismatchedItems {
                    expected: m,
                    found: agent.valuation.m(),
                });
            }
        }
        Ok(Profile { m, agents })
    }

    /// Agents named `1, 2, ..` in order.
    pub fn from_valuations(m: usize, valuations: impl IntoIterator<Item = ValuationSpec>) -> Result<Self> {
        let agents = valuations
            .into_iter()
            .enumerate()
            .map(|(i, valuation)| Agent {
                id: (i + 1).to_string(),
                valuation,
            })
            .collect();
        Profile::new(m, agents)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.agents.iter().map(|a| a.id.clone()).collect()
    }

    pub fn valuations(&self) -> Vec<&ValuationSpec> {
        self.agents.iter().map(|a| &a.valuation).collect()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.id == id)
    }
}

/// Per-agent allocation and payment, indexed by agent position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    ids: Vec<String>,
    allocation: Vec<Bundle>,
    payments: Vec<Money>,
}

impl Outcome {
    /// Rejects overlapping bundles, negative payments and payments charged
    /// for the empty bundle.
    pub fn new(ids: Vec<String>, allocation: Vec<Bundle>, payments: Vec<Money>) -> Result<Self> {
        if ids.len() != allocation.len() || ids.len() != payments.len() {
            return Err(Error::InvalidArgument(
                "outcome vectors differ in length".to_string(),
            ));
        }
        let mut taken = 0u32;
        for (i, bundle) in allocation.iter().enumerate() {
            let clash = taken & bundle.mask();
            if clash != 0 {
                let item = clash.trailing_zeros() as usize;
                let mut agents: Vec<String> = allocation[..i]
                    .iter()
                    .zip(&ids)
                    .filter(|(b, _)| b.contains(item))
                    .map(|(_, id)| id.clone())
                    .collect();
                agents.push(ids[i].clone());
                return Err(Error::OverlappingAllocation { item, agents });
            }
            taken |= bundle.mask();
        }
        for ((id, bundle), pay) in ids.iter().zip(&allocation).zip(&payments) {
            if pay.is_negative() {
                return Err(Error::InvalidArgument(format!("negative payment {pay} for agent {id}")));
            }
            if bundle.is_empty() && !pay.is_zero() {
                return Err(Error::InvalidArgument(format!(
                    "agent {id} pays {pay} for the empty bundle"
                )));
            }
        }
        Ok(Outcome {
            ids,
            allocation,
            payments,
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Same outcome with agents renamed positionally.
    pub fn with_ids(self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.ids.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} ids, got {}",
                self.ids.len(),
                ids.len()
            )));
        }
        Ok(Outcome { ids, ..self })
    }

    pub fn allocation(&self) -> &[Bundle] {
        &self.allocation
    }

    pub fn payments(&self) -> &[Money] {
        &self.payments
    }

    pub fn bundle(&self, position: usize) -> Bundle {
        self.allocation[position]
    }

    pub fn payment(&self, position: usize) -> &Money {
        &self.payments[position]
    }

    pub fn revenue(&self) -> Money {
        self.payments.iter().sum()
    }

    /// Sum of each agent's value for its own bundle; payments excluded.
    pub fn welfare(&self, valuations: &[&ValuationSpec]) -> Money {
        self.allocation
            .iter()
            .zip(valuations)
            .map(|(b, v)| v.value_of(*b))
            .sum()
    }

    pub fn to_doc(&self) -> OutcomeDoc {
        OutcomeDoc {
            allocation: self
                .ids
                .iter()
                .zip(&self.allocation)
                .map(|(id, b)| (id.clone(), b.label()))
                .collect(),
            payments: self
                .ids
                .iter()
                .zip(&self.payments)
                .map(|(id, p)| (id.clone(), p.clone()))
                .collect(),
        }
    }
}

/// JSON form of an [`Outcome`]: bundles as item-letter strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeDoc {
    pub allocation: BTreeMap<String, String>,
    pub payments: BTreeMap<String, Money>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn outcome_rejects_overlap() {
        let a = Bundle::parse(2, "A").unwrap();
        let ab = Bundle::parse(2, "AB").unwrap();
        let err = Outcome::new(ids(2), vec![a, ab], vec![Money::zero(), Money::zero()]).unwrap_err();
        assert_eq!(
            err,
            Error::OverlappingAllocation {
                item: 0,
                agents: vec!["1".into(), "2".into()]
            }
        );
    }

    #[test]
    fn outcome_rejects_bad_payments() {
        let empty = Bundle::empty(2);
        let a = Bundle::parse(2, "A").unwrap();
        assert!(Outcome::new(ids(1), vec![empty], vec![Money::one()]).is_err());
        assert!(Outcome::new(ids(1), vec![a], vec![Money::from_integer(-1)]).is_err());
        assert!(Outcome::new(ids(1), vec![a], vec![Money::one()]).is_ok());
    }

    #[test]
    fn caps_overrides() {
        let caps = Caps::default().with_overrides("m=3, n=5").unwrap();
        assert_eq!((caps.m_max, caps.n_max, caps.k_max), (3, 5, 2));
        assert!(Caps::default().with_overrides("z=1").is_err());
        assert!(Caps::default().with_overrides("n=0").is_err());
        assert!(caps.check_n(6).is_err());
    }
}
