//! JSON documents read and written by the command-line tool.

use serde::{Deserialize, Serialize};

use crate::axioms::{PoolCheck, TabulatedScf, TypePool};
use crate::domain::{Agent, Money, Profile};
use crate::error::{Error, Result};
use crate::valuation::{ValuationDoc, ValuationSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDoc {
    pub id: String,
    pub valuation: ValuationDoc,
}

/// A profile on disk: `{"m": 2, "agents": [{"id": "1", "valuation": {...}}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub m: usize,
    pub agents: Vec<AgentDoc>,
}

impl InstanceFile {
    pub fn from_profile(profile: &Profile) -> Self {
        InstanceFile {
            m: profile.m(),
            agents: profile
                .agents()
                .iter()
                .map(|a| AgentDoc {
                    id: a.id.clone(),
                    valuation: ValuationDoc::from_spec(&a.valuation, false),
                })
                .collect(),
        }
    }

    pub fn to_profile(&self) -> Result<Profile> {
        let agents = self
            .agents
            .iter()
            .map(|a| {
                let valuation = a.valuation.clone().into_spec(Some(self.m)).map_err(|e| field_error(&a.id, e))?;
                if valuation.m() != self.m {
                    return Err(field_error(
                        &a.id,
                        Error::MismatchedItems {
                            expected: self.m,
                            found: valuation.m(),
                        },
                    ));
                }
                if let Some(cx) = valuation.validate().counterexample {
                    return Err(field_error(&a.id, Error::InvalidValuation(format!("{cx:?}"))));
                }
                Ok(Agent {
                    id: a.id.clone(),
                    valuation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Profile::new(self.m, agents)
    }
}

fn field_error(id: &str, e: Error) -> Error {
    Error::InvalidProfile(format!("agent {id:?}: {e}"))
}

fn parse_types(m: usize, docs: &[ValuationDoc], field: &str) -> Result<Vec<ValuationSpec>> {
    docs.iter()
        .enumerate()
        .map(|(k, d)| {
            let t = d
                .clone()
                .into_spec(Some(m))
                .map_err(|e| Error::InvalidArgument(format!("{field}[{k}]: {e}")))?;
            if t.m() != m {
                return Err(Error::InvalidArgument(format!("{field}[{k}]: expected {m} items, found {}", t.m())));
            }
            Ok(t)
        })
        .collect()
}

/// A type pool plus the fixed context some checks need.
///
/// `others` is the fixed profile of the other agents for the checks that
/// take one (dlb, pia, the allocation-rule conditions). `extra` is the
/// additional agent for pia; without it every pool type is tried.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolFile {
    pub m: usize,
    pub types: Vec<ValuationDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub others: Vec<ValuationDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<ValuationDoc>,
    /// Largest profile size for the pool-wide sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
}

impl PoolFile {
    pub fn new(pool: &TypePool, others: &[ValuationSpec]) -> Self {
        PoolFile {
            m: pool.m(),
            types: pool.types().iter().map(|t| ValuationDoc::from_spec(t, false)).collect(),
            others: others.iter().map(|t| ValuationDoc::from_spec(t, false)).collect(),
            extra: None,
            max_n: None,
        }
    }

    pub fn pool(&self) -> Result<TypePool> {
        TypePool::new(self.m, parse_types(self.m, &self.types, "types")?)
    }

    pub fn others(&self) -> Result<Vec<ValuationSpec>> {
        parse_types(self.m, &self.others, "others")
    }

    pub fn extra(&self) -> Result<Option<ValuationSpec>> {
        match &self.extra {
            Some(d) => Ok(parse_types(self.m, std::slice::from_ref(d), "extra")?.pop()),
            None => Ok(None),
        }
    }

    /// The check this file describes; `max_n` falls back to the file's
    /// value, then to 3.
    pub fn to_check(&self, max_n: Option<usize>) -> Result<PoolCheck> {
        let mut check = PoolCheck::new(self.pool()?, max_n.or(self.max_n).unwrap_or(3));
        check.others = self.others()?;
        check.extra = self.extra()?;
        Ok(check)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScfEntry {
    pub profile: Vec<usize>,
    pub outcome: usize,
}

/// A tabulated social choice function. `utilities[t][o]` is the utility of
/// type `t` for outcome `o` and is only needed for the strategy-proofness
/// check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScfFile {
    pub num_types: usize,
    pub num_outcomes: usize,
    pub max_agents: usize,
    pub entries: Vec<ScfEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilities: Option<Vec<Vec<Money>>>,
}

impl ScfFile {
    pub fn from_scf(f: &TabulatedScf, utilities: Option<Vec<Vec<Money>>>) -> Self {
        let mut entries: Vec<ScfEntry> = f
            .entries()
            .map(|(p, &o)| ScfEntry {
                profile: p.clone(),
                outcome: o,
            })
            .collect();
        entries.sort_by(|a, b| (a.profile.len(), &a.profile).cmp(&(b.profile.len(), &b.profile)));
        ScfFile {
            num_types: f.num_types,
            num_outcomes: f.num_outcomes,
            max_agents: f.max_agents,
            entries,
            utilities,
        }
    }

    pub fn scf(&self) -> Result<TabulatedScf> {
        let mut table = std::collections::HashMap::new();
        for e in &self.entries {
            if table.insert(e.profile.clone(), e.outcome).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate entry for profile {:?}", e.profile)));
            }
        }
        TabulatedScf::new(self.num_types, self.num_outcomes, self.max_agents, table)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents serialize")
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("line {} column {}: {e}", e.line(), e.column())))
}
