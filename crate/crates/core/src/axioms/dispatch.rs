use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::Caps;
use crate::error::{Error, Result};
use crate::mechanisms::MechanismId;
use crate::report::CheckReport;
use crate::valuation::ValuationSpec;

use super::{
    check_dlb, check_nsa_pool, check_nsaw_pool, check_pia, check_snsaw, check_subadditivity, check_submodularity,
    check_weak_monotonicity, check_withdrawal_monotonicity, TypePool,
};

/// The checkable conditions by command-line name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomId {
    Dlb,
    Pia,
    Snsaw,
    Nsa,
    Nsaw,
    WeakMono,
    SubAdd,
    WithdrawalMono,
    Submodularity,
    ScfSp,
    ScfFnpw,
}

impl AxiomId {
    pub const ALL: [AxiomId; 11] = [
        AxiomId::Dlb,
        AxiomId::Pia,
        AxiomId::Snsaw,
        AxiomId::Nsa,
        AxiomId::Nsaw,
        AxiomId::WeakMono,
        AxiomId::SubAdd,
        AxiomId::WithdrawalMono,
        AxiomId::Submodularity,
        AxiomId::ScfSp,
        AxiomId::ScfFnpw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomId::Dlb => "dlb",
            AxiomId::Pia => "pia",
            AxiomId::Snsaw => "snsaw",
            AxiomId::Nsa => "nsa",
            AxiomId::Nsaw => "nsaw",
            AxiomId::WeakMono => "weak-mono",
            AxiomId::SubAdd => "sub-add",
            AxiomId::WithdrawalMono => "withdrawal-mono",
            AxiomId::Submodularity => "submodularity",
            AxiomId::ScfSp => "scf-sp",
            AxiomId::ScfFnpw => "scf-fnpw",
        }
    }

    pub fn is_scf(self) -> bool {
        matches!(self, AxiomId::ScfSp | AxiomId::ScfFnpw)
    }

    pub fn needs_mechanism(self) -> bool {
        !self.is_scf() && self != AxiomId::Submodularity
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AxiomId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AxiomId::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown axiom {s:?}")))
    }
}

/// What a pool-based check quantifies over.
///
/// With `others` empty, the checks that take a fixed profile of other
/// agents sweep every pool multiset instead (of at most `max_n` types for
/// dlb, `max_n - 1` for the rest). Without `extra`, pia tries every pool
/// type as the added agent.
#[derive(Debug, Clone)]
pub struct PoolCheck {
    pub pool: TypePool,
    pub others: Vec<ValuationSpec>,
    pub extra: Option<ValuationSpec>,
    pub max_n: usize,
}

impl PoolCheck {
    pub fn new(pool: TypePool, max_n: usize) -> Self {
        PoolCheck {
            pool,
            others: Vec::new(),
            extra: None,
            max_n,
        }
    }

    fn contexts(&self, max_size: usize) -> Vec<Vec<&ValuationSpec>> {
        if self.others.is_empty() {
            self.pool.multisets(max_size)
        } else {
            vec![self.others.iter().collect()]
        }
    }

    pub fn run(&self, axiom: AxiomId, mechanism: Option<&MechanismId>) -> Result<CheckReport> {
        let caps = Caps::global();
        caps.check_n(self.max_n)?;
        caps.check_m(self.pool.m())?;
        let m = self.pool.m();
        let mech = || {
            mechanism.ok_or_else(|| Error::InvalidArgument(format!("{axiom} needs a mechanism")))
        };
        let below = self.max_n.saturating_sub(1);
        match axiom {
            AxiomId::ScfSp | AxiomId::ScfFnpw => Err(Error::InvalidArgument(format!(
                "{axiom} applies to social choice tables, not type pools"
            ))),
            AxiomId::Submodularity => check_submodularity(&self.pool, self.max_n),
            AxiomId::Dlb => {
                let pf = mech()?.cached_price_function()?;
                sweep(self.contexts(self.max_n), |o| check_dlb(pf.as_ref(), m, &o))
            }
            AxiomId::Pia => {
                let pf = mech()?.cached_price_function()?;
                let extras: Vec<&ValuationSpec> = match &self.extra {
                    Some(t) => vec![t],
                    None => self.pool.types().iter().collect(),
                };
                let cases = self
                    .contexts(below)
                    .into_iter()
                    .flat_map(|o| extras.iter().map(move |e| (o.clone(), *e)));
                sweep(cases, |(o, e)| check_pia(pf.as_ref(), m, &o, e))
            }
            AxiomId::Snsaw => check_snsaw(mech()?.cached_price_function()?.as_ref(), &self.pool, self.max_n),
            AxiomId::Nsa => check_nsa_pool(mech()?.cached_price_function()?.as_ref(), &self.pool, self.max_n),
            AxiomId::Nsaw => check_nsaw_pool(mech()?.cached_price_function()?.as_ref(), &self.pool, self.max_n),
            AxiomId::WeakMono | AxiomId::SubAdd | AxiomId::WithdrawalMono => {
                let rule = mech()?.allocation_rule()?;
                let rule = rule.as_ref();
                sweep(self.contexts(below), |o| match axiom {
                    AxiomId::WeakMono => check_weak_monotonicity(rule, &self.pool, &o),
                    AxiomId::SubAdd => check_subadditivity(rule, &self.pool, &o, caps.k_max),
                    _ => check_withdrawal_monotonicity(rule, &self.pool, &o),
                })
            }
        }
    }
}

fn sweep<T>(items: impl IntoIterator<Item = T>, mut check: impl FnMut(T) -> Result<CheckReport>) -> Result<CheckReport> {
    let mut acc = CheckReport::pass(0);
    for item in items {
        let next = check(item)?;
        acc = acc.and_then(|| next);
        if !acc.passed() {
            break;
        }
    }
    Ok(acc)
}
