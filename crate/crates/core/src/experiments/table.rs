use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Bundle, Money, Profile};
use crate::error::{Error, Result};
use crate::mechanisms::MechanismId;
use crate::porf::{run_rule, AllocationRule};
use crate::valuation::{generate, GeneratorMode, ValuationSpec};
use crate::welfare::efficient_value;

pub const TABLE_ITEMS: usize = 2;
pub const TABLE_AGENTS: usize = 5;

/// The columns of the published tables.
pub fn default_table_mechanisms() -> Vec<MechanismId> {
    vec![
        MechanismId::Vcg,
        MechanismId::Set,
        MechanismId::Amd(Box::new(MechanismId::Vcg)),
        MechanismId::Mmvip,
    ]
}

/// The random stream for one instance: seeded by `seed`, stream `index`.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn draw_instance(scenario: GeneratorMode, seed: u64, index: u64) -> Result<Vec<ValuationSpec>> {
    let mut rng = instance_rng(seed, index);
    (0..TABLE_AGENTS)
        .map(|_| generate(scenario, TABLE_ITEMS, &mut rng))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MechanismScore {
    pub mechanism: String,
    pub revenue: Money,
    pub efficiency: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub index: u64,
    pub valuations: Vec<ValuationSpec>,
    pub optimum: Money,
    pub scores: Vec<MechanismScore>,
}

/// Revenue (sum of payments) and efficiency (sum of winners' values) of
/// each mechanism on one drawn instance.
pub fn run_table_instance(
    scenario: GeneratorMode,
    mechanisms: &[MechanismId],
    seed: u64,
    index: u64,
) -> Result<InstanceResult> {
    let valuations = draw_instance(scenario, seed, index)?;
    let refs: Vec<&ValuationSpec> = valuations.iter().collect();
    let profile = Profile::from_valuations(TABLE_ITEMS, valuations.iter().cloned())?;
    let mut scores = Vec::with_capacity(mechanisms.len());
    for id in mechanisms {
        // A fresh rule per instance keeps memo tables from growing across
        // instances that never share a multiset.
        let rule: std::sync::Arc<dyn AllocationRule> = id.allocation_rule()?;
        let outcome = run_rule(rule.as_ref(), &profile).map_err(|e| match e {
            Error::InfeasibleAllocation { item, agents } => Error::InvalidProfile(format!(
                "{id} is infeasible on instance {index} (item {item}, agents {agents:?}): {}",
                serde_json::to_string(&valuations).unwrap_or_default()
            )),
            other => other,
        })?;
        scores.push(MechanismScore {
            mechanism: id.to_string(),
            revenue: outcome.revenue(),
            efficiency: outcome.welfare(&refs),
        });
    }
    Ok(InstanceResult {
        index,
        optimum: efficient_value(Bundle::grand(TABLE_ITEMS), &refs)?,
        valuations,
        scores,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub mechanism: String,
    pub mean_revenue: Money,
    pub mean_efficiency: Money,
}

impl TableRow {
    pub fn mean_revenue_f64(&self) -> f64 {
        self.mean_revenue.to_f64()
    }

    pub fn mean_efficiency_f64(&self) -> f64 {
        self.mean_efficiency.to_f64()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableResult {
    pub scenario: GeneratorMode,
    pub instances: u64,
    pub seed: u64,
    pub rows: Vec<TableRow>,
    /// Mean optimal welfare over the same instances.
    pub mean_optimum: Money,
}

impl TableResult {
    pub fn row(&self, mechanism: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.mechanism == mechanism)
    }
}

/// Runs the instances in parallel and aggregates exact means. Results do
/// not depend on the number of worker threads.
pub fn run_table_experiment(
    scenario: GeneratorMode,
    mechanisms: &[MechanismId],
    instances: u64,
    seed: u64,
) -> Result<(TableResult, Vec<InstanceResult>)> {
    if !matches!(scenario, GeneratorMode::Substitutable | GeneratorMode::Complementary) {
        return Err(Error::InvalidArgument(format!(
            "table scenario must be substitutable or complementary, got {}",
            scenario.name()
        )));
    }
    if instances == 0 {
        return Err(Error::InvalidArgument("at least one instance is required".into()));
    }
    let results: Vec<InstanceResult> = (0..instances)
        .into_par_iter()
        .map(|i| run_table_instance(scenario, mechanisms, seed, i))
        .collect::<Result<_>>()?;
    let rows = mechanisms
        .iter()
        .enumerate()
        .map(|(k, id)| {
            let revenue: Money = results.iter().map(|r| &r.scores[k].revenue).sum();
            let efficiency: Money = results.iter().map(|r| &r.scores[k].efficiency).sum();
            TableRow {
                mechanism: id.to_string(),
                mean_revenue: revenue.div_count(instances as usize),
                mean_efficiency: efficiency.div_count(instances as usize),
            }
        })
        .collect();
    let optimum: Money = results.iter().map(|r| &r.optimum).sum();
    Ok((
        TableResult {
            scenario,
            instances,
            seed,
            rows,
            mean_optimum: optimum.div_count(instances as usize),
        },
        results,
    ))
}
