//! Drivers for the revenue and efficiency tables, the worst-case ratio
//! scenarios, and the named replays.

mod fixtures;
mod ratio;
mod table;

pub use fixtures::{replay_fixture, Fixture};
pub use ratio::{run_ratio_scenarios, RatioResult, ScenarioOutcome, Winner};
pub use table::{
    default_table_mechanisms, draw_instance, instance_rng, run_table_experiment, run_table_instance, InstanceResult,
    MechanismScore, TableResult, TableRow, TABLE_AGENTS, TABLE_ITEMS,
};
