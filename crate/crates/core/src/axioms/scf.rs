use std::collections::{BTreeSet, HashMap};

use crate::domain::Money;
use crate::error::{Error, Result};
use crate::report::{CheckReport, Counterexample};

/// A social choice function over types `0..num_types` and outcomes
/// `0..num_outcomes`, tabulated on every ordered profile of `1..=max_agents`
/// reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabulatedScf {
    pub num_types: usize,
    pub num_outcomes: usize,
    pub max_agents: usize,
    table: HashMap<Vec<usize>, usize>,
}

impl TabulatedScf {
    pub fn new(num_types: usize, num_outcomes: usize, max_agents: usize, table: HashMap<Vec<usize>, usize>) -> Result<Self> {
        for (profile, &outcome) in &table {
            if profile.iter().any(|&t| t >= num_types) || outcome >= num_outcomes {
                return Err(Error::InvalidArgument(format!(
                    "table entry {profile:?} -> {outcome} is out of range"
                )));
            }
        }
        Ok(TabulatedScf {
            num_types,
            num_outcomes,
            max_agents,
            table,
        })
    }

    /// Tabulates `f` on every profile.
    pub fn from_fn(num_types: usize, num_outcomes: usize, max_agents: usize, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        let table = profiles(num_types, 1, max_agents)
            .into_iter()
            .map(|p| {
                let o = f(&p);
                (p, o)
            })
            .collect();
        TabulatedScf::new(num_types, num_outcomes, max_agents, table)
    }

    pub fn outcome(&self, profile: &[usize]) -> Result<usize> {
        self.table
            .get(profile)
            .copied()
            .ok_or_else(|| Error::IncompleteTable(profile.to_vec()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &usize)> {
        self.table.iter()
    }
}

/// Ordered profiles with length in `min_len..=max_len`, shorter first.
fn profiles(num_types: usize, min_len: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer = vec![Vec::new()];
    for len in 0..=max_len {
        if len >= min_len {
            out.extend(layer.iter().cloned());
        }
        layer = layer
            .iter()
            .flat_map(|p| {
                (0..num_types).map(move |t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    out
}

/// Every agent gets a most-preferred outcome among those it could reach by
/// changing its own report. `utilities[type][outcome]`.
pub fn check_scf_strategyproof(f: &TabulatedScf, utilities: &[Vec<Money>]) -> Result<CheckReport> {
    if utilities.len() != f.num_types || utilities.iter().any(|u| u.len() != f.num_outcomes) {
        return Err(Error::InvalidArgument(format!(
            "utilities must be a {} x {} table",
            f.num_types, f.num_outcomes
        )));
    }
    let mut cases = 0;
    for profile in profiles(f.num_types, 1, f.max_agents) {
        let outcome = f.outcome(&profile)?;
        for position in 0..profile.len() {
            let truth = profile[position];
            let mut alt = profile.clone();
            for misreport in 0..f.num_types {
                cases += 1;
                alt[position] = misreport;
                let other = f.outcome(&alt)?;
                if utilities[truth][other] > utilities[truth][outcome] {
                    return Ok(CheckReport::fail(
                        Counterexample::ScfStrategyProof {
                            profile,
                            position,
                            misreport,
                            outcome,
                            better_outcome: other,
                        },
                        cases,
                    ));
                }
            }
        }
    }
    Ok(CheckReport::pass(cases))
}

fn attainable(f: &TabulatedScf, others: &[usize], position: usize) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for t in 0..f.num_types {
        let mut profile = others.to_vec();
        profile.insert(position, t);
        out.insert(f.outcome(&profile)?);
    }
    Ok(out)
}

/// Adding another agent never enlarges the set of outcomes an agent can
/// reach. The extra agent is appended after the existing others; the agent
/// itself is checked at every position.
pub fn check_scf_fnpw(f: &TabulatedScf) -> Result<CheckReport> {
    let mut cases = 0;
    if f.max_agents < 2 {
        return Ok(CheckReport::pass(0));
    }
    for others in profiles(f.num_types, 0, f.max_agents - 2) {
        for position in 0..=others.len() {
            let before = attainable(f, &others, position)?;
            for added in 0..f.num_types {
                cases += 1;
                let mut grown = others.clone();
                grown.push(added);
                let after = attainable(f, &grown, position)?;
                if let Some(&outcome) = after.difference(&before).next() {
                    return Ok(CheckReport::fail(
                        Counterexample::ScfFnpw {
                            others,
                            position,
                            added,
                            attainable_before: before.into_iter().collect(),
                            attainable_after: after.into_iter().collect(),
                            outcome,
                        },
                        cases,
                    ));
                }
            }
        }
    }
    Ok(CheckReport::pass(cases))
}

#[cfg(test)]
mod tests {
    use super::*;

    const X: usize = 0;
    const Y: usize = 1;

    fn utilities() -> Vec<Vec<Money>> {
        vec![vec![Money::one(), Money::zero()], vec![Money::zero(), Money::one()]]
    }

    #[test]
    fn profile_enumeration() {
        assert_eq!(profiles(2, 1, 3).len(), 2 + 4 + 8);
        assert_eq!(profiles(2, 0, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn dictatorship_is_strategyproof() {
        let f = TabulatedScf::from_fn(2, 2, 3, |p| p[0]).unwrap();
        assert!(check_scf_strategyproof(&f, &utilities()).unwrap().passed());
    }

    #[test]
    fn minority_is_manipulable() {
        let minority = |p: &[usize]| {
            let xs = p.iter().filter(|&&t| t == X).count();
            if xs * 2 < p.len() { X } else { Y }
        };
        let f = TabulatedScf::from_fn(2, 2, 2, minority).unwrap();
        let r = check_scf_strategyproof(&f, &utilities()).unwrap();
        let Some(Counterexample::ScfStrategyProof { profile, misreport, outcome, better_outcome, .. }) = r.counterexample else {
            panic!()
        };
        // A lone x-supporter gets y, and x by claiming to prefer y.
        assert_eq!((profile, misreport, outcome, better_outcome), (vec![X], Y, Y, X));
    }

    #[test]
    fn constant_function_is_fnpw() {
        let f = TabulatedScf::from_fn(2, 2, 3, |_| X).unwrap();
        assert!(check_scf_fnpw(&f).unwrap().passed());
    }

    #[test]
    fn incomplete_table_is_an_error() {
        let mut table = HashMap::new();
        table.insert(vec![X], X);
        let f = TabulatedScf::new(2, 2, 1, table).unwrap();
        assert_eq!(check_scf_fnpw(&f).unwrap().cases, 0);
        assert!(matches!(
            check_scf_strategyproof(&f, &utilities()),
            Err(Error::IncompleteTable(_))
        ));
    }
}
