use serde::{Deserialize, Serialize};

use crate::domain::{Agent, Bundle, Money, Profile};
use crate::error::{Error, Result};
use crate::mechanisms::MechanismId;
use crate::porf::run_rule;
use crate::valuation::ValuationSpec;
use crate::welfare::efficient_value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Winner {
    pub agent: String,
    pub bundle: String,
    pub payment: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub scenario: u8,
    pub agents: Vec<String>,
    pub winners: Vec<Winner>,
    pub welfare: Money,
    pub optimum: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioResult {
    pub mechanism: String,
    pub m: usize,
    pub epsilon: Money,
    pub scenarios: Vec<ScenarioOutcome>,
    /// Achieved over optimal welfare in the third scenario.
    pub ratio: Money,
}

/// Agent `a` wants the grand bundle at 1; agent `i` wants item `i` alone at
/// `1 − ε`. Scenario 1 pits `a` against agent 1, scenario 2 two copies of
/// agent 1, scenario 3 `a` against all `m` single-item agents.
pub fn run_ratio_scenarios(mechanism: &MechanismId, m: usize, epsilon: &Money) -> Result<RatioResult> {
    if !epsilon.is_positive() || epsilon >= &Money::one() {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let rule = mechanism.allocation_rule()?;
    let grand = ValuationSpec::single_minded(Bundle::grand(m), Money::one());
    let single = |i: usize| ValuationSpec::single_minded(Bundle::singleton(m, i), Money::one() - epsilon);
    let agent = |id: &str, valuation: ValuationSpec| Agent {
        id: id.to_string(),
        valuation,
    };

    let scenarios = vec![
        vec![agent("a", grand.clone()), agent("1", single(0))],
        vec![agent("1", single(0)), agent("1'", single(0))],
        std::iter::once(agent("a", grand))
            .chain((0..m).map(|i| agent(&(i + 1).to_string(), single(i))))
            .collect(),
    ];

    let mut outcomes = Vec::with_capacity(3);
    for (k, agents) in scenarios.into_iter().enumerate() {
        let profile = Profile::new(m, agents)?;
        let outcome = run_rule(rule.as_ref(), &profile)?;
        let valuations = profile.valuations();
        let winners = (0..profile.len())
            .filter(|&i| !outcome.bundle(i).is_empty())
            .map(|i| Winner {
                agent: profile.agents()[i].id.clone(),
                bundle: outcome.bundle(i).label(),
                payment: outcome.payment(i).clone(),
            })
            .collect();
        outcomes.push(ScenarioOutcome {
            scenario: k as u8 + 1,
            agents: profile.ids(),
            winners,
            welfare: outcome.welfare(&valuations),
            optimum: efficient_value(Bundle::grand(m), &valuations)?,
        });
    }
    let last = &outcomes[2];
    let ratio = Money::from(last.welfare.as_rational() / last.optimum.as_rational());
    Ok(RatioResult {
        mechanism: mechanism.to_string(),
        m,
        epsilon: epsilon.clone(),
        scenarios: outcomes,
        ratio,
    })
}
