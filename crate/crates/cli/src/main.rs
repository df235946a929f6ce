//! `fnpw`: run mechanisms, check conditions, search for manipulations and
//! run experiments from JSON files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use fnpw_core::axioms::{check_scf_fnpw, check_scf_strategyproof, AxiomId, TypePool};
use fnpw_core::experiments::{replay_fixture, run_ratio_scenarios, run_table_experiment, Fixture};
use fnpw_core::io::{from_json, to_json, InstanceFile, PoolFile, ScfFile};
use fnpw_core::manipulation::{ManipulationFinder, SearchLimits};
use fnpw_core::mechanisms::MechanismId;
use fnpw_core::porf::run_rule;
use fnpw_core::valuation::GeneratorMode;
use fnpw_core::{Caps, Error, Money, ValuationSpec};
use serde_json::json;
use sha2::{Digest, Sha256};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(name = "fnpw", version, about = "False-name-proof combinatorial auction toolkit")]
struct Cli {
    /// Cap overrides such as `m=4,n=6,k=2,q=1`.
    #[arg(long, global = true, env = "FNPW_CAPS")]
    caps: Option<String>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true, env = "FNPW_THREADS")]
    threads: Option<usize>,
    /// Root directory for experiment results.
    #[arg(long, global = true, default_value = "results")]
    results: PathBuf,
    /// Print experiment results without writing files.
    #[arg(long, global = true)]
    no_save: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism on an instance file and print the outcome.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, short)]
        mechanism: String,
    },
    /// Check a condition on a type pool (or a social choice table).
    Check {
        #[arg(long, short)]
        mechanism: Option<String>,
        /// dlb, pia, snsaw, nsa, nsaw, weak-mono, sub-add, withdrawal-mono,
        /// submodularity, scf-sp or scf-fnpw.
        #[arg(long, short)]
        axiom: AxiomId,
        #[arg(long)]
        pool: Option<PathBuf>,
        /// Tabulated social choice function for scf-sp and scf-fnpw.
        #[arg(long)]
        scf: Option<PathBuf>,
        /// Largest profile size swept (defaults to the pool file's, then 3).
        #[arg(long)]
        max_n: Option<usize>,
    },
    /// Search for a profitable false-name manipulation by one agent.
    Manipulate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, short)]
        mechanism: String,
        /// Id of the manipulating agent.
        #[arg(long)]
        agent: String,
        /// Identity types to draw from (defaults to the instance's types).
        #[arg(long)]
        pool: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        no_withdrawal: bool,
    },
    /// Run an experiment and store its results.
    Experiment {
        #[command(subcommand)]
        kind: Experiment,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Mean revenue and efficiency on random two-item instances.
    Table {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        mechanisms: Option<Vec<String>>,
        /// Also store per-instance scores.
        #[arg(long)]
        instances: bool,
    },
    /// Welfare ratio on the three worst-case scenarios.
    Ratio {
        #[arg(long = "mech")]
        mechanism: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        eps: String,
    },
    /// Replay a named construction.
    Fixture { name: String },
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(e) if e.is_infeasible() => EXIT_INFEASIBLE,
            _ => EXIT_USAGE,
        };
        Failure { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}

fn execute(cli: Cli) -> Result<u8, Failure> {
    if let Some(spec) = &cli.caps {
        Caps::set_global(Caps::global().with_overrides(spec)?);
    }
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| anyhow!("cannot start {threads} worker threads: {e}"))?;
    }
    let store = Store {
        root: cli.results.clone(),
        save: !cli.no_save,
    };
    match cli.command {
        Command::Run { instance, mechanism } => cmd_run(&instance, &mechanism),
        Command::Check {
            mechanism,
            axiom,
            pool,
            scf,
            max_n,
        } => cmd_check(mechanism.as_deref(), axiom, pool.as_deref(), scf.as_deref(), max_n),
        Command::Manipulate {
            instance,
            mechanism,
            agent,
            pool,
            k,
            q,
            no_withdrawal,
        } => cmd_manipulate(&instance, &mechanism, &agent, pool.as_deref(), k, q, !no_withdrawal),
        Command::Experiment { kind } => match kind {
            Experiment::Table {
                scenario,
                n,
                seed,
                mechanisms,
                instances,
            } => cmd_table(&store, &scenario, n, seed, mechanisms, instances),
            Experiment::Ratio { mechanism, m, eps } => cmd_ratio(&store, &mechanism, m, &eps),
            Experiment::Fixture { name } => cmd_fixture(&store, &name),
        },
    }
}

fn read_json<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    from_json(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn mechanism(id: &str) -> anyhow::Result<MechanismId> {
    Ok(id.parse::<MechanismId>()?)
}

fn cmd_run(instance: &Path, id: &str) -> Result<u8, Failure> {
    let profile = read_json::<InstanceFile>(instance)?.to_profile()?;
    let rule = mechanism(id)?.allocation_rule()?;
    let outcome = run_rule(rule.as_ref(), &profile)?;
    let doc = json!({
        "mechanism": id,
        "outcome": outcome.to_doc(),
        "revenue": outcome.revenue(),
        "welfare": outcome.welfare(&profile.valuations()),
    });
    println!("{}", to_json(&doc));
    Ok(EXIT_OK)
}

fn cmd_check(
    id: Option<&str>,
    axiom: AxiomId,
    pool: Option<&Path>,
    scf: Option<&Path>,
    max_n: Option<usize>,
) -> Result<u8, Failure> {
    let mechanism = id.map(mechanism).transpose()?;
    let report = if axiom.is_scf() {
        let file: ScfFile = read_json(scf.ok_or_else(|| anyhow!("{axiom} needs --scf"))?)?;
        let f = file.scf()?;
        if axiom == AxiomId::ScfSp {
            let utilities = file
                .utilities
                .as_ref()
                .ok_or_else(|| anyhow!("scf-sp needs a utilities table in the scf file"))?;
            check_scf_strategyproof(&f, utilities)?
        } else {
            check_scf_fnpw(&f)?
        }
    } else {
        let file: PoolFile = read_json(pool.ok_or_else(|| anyhow!("{axiom} needs --pool"))?)?;
        if axiom.needs_mechanism() && mechanism.is_none() {
            return Err(anyhow!("{axiom} needs --mechanism").into());
        }
        file.to_check(max_n)?.run(axiom, mechanism.as_ref())?
    };
    let doc = json!({
        "mechanism": id,
        "axiom": axiom,
        "report": report,
    });
    println!("{}", to_json(&doc));
    Ok(if report.passed() { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_manipulate(
    instance: &Path,
    id: &str,
    agent: &str,
    pool: Option<&Path>,
    k: Option<usize>,
    q: Option<usize>,
    withdrawal: bool,
) -> Result<u8, Failure> {
    let profile = read_json::<InstanceFile>(instance)?.to_profile()?;
    let pos = profile
        .position(agent)
        .ok_or_else(|| anyhow!("no agent {agent:?} in {}", instance.display()))?;
    let truth = &profile.agents()[pos].valuation;
    let others: Vec<&ValuationSpec> = profile
        .agents()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != pos)
        .map(|(_, a)| &a.valuation)
        .collect();
    let pool = match pool {
        Some(path) => read_json::<PoolFile>(path)?.pool()?,
        None => {
            let mut types: Vec<ValuationSpec> = Vec::new();
            for a in profile.agents() {
                if !types.contains(&a.valuation) {
                    types.push(a.valuation.clone());
                }
            }
            TypePool::new(profile.m(), types)?
        }
    };
    let mut limits = SearchLimits::from_caps(&Caps::global(), withdrawal);
    if let Some(k) = k {
        limits.k_max = k;
    }
    if let Some(q) = q {
        if !withdrawal && q > 0 {
            return Err(anyhow!("--q needs withdrawal to be allowed").into());
        }
        limits.q_max = q;
    }
    if limits.k_max == 0 {
        return Err(anyhow!("--k must be at least 1").into());
    }
    let rule = mechanism(id)?.allocation_rule()?;
    let finder = ManipulationFinder::new(rule.as_ref());
    let truthful = finder.truthful_utility(truth, &others)?;
    let plan = finder.find(truth, &others, &pool, &limits)?;
    let doc = json!({
        "mechanism": id,
        "agent": agent,
        "limits": limits,
        "truthful_utility": truthful,
        "manipulation": plan,
    });
    println!("{}", to_json(&doc));
    Ok(if plan.is_some() { EXIT_VIOLATION } else { EXIT_OK })
}

/// Writes experiment outputs under `<root>/<command>/<seed>/` together with
/// a manifest holding the configuration and its SHA-256.
struct Store {
    root: PathBuf,
    save: bool,
}

impl Store {
    fn write(&self, command: &str, seed: u64, config: &serde_json::Value, files: &[(&str, String)]) -> anyhow::Result<Option<PathBuf>> {
        if !self.save {
            return Ok(None);
        }
        let dir = self.root.join(command).join(seed.to_string());
        fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (name, body) in files {
            fs::write(dir.join(name), body).with_context(|| format!("cannot write {name}"))?;
        }
        let canonical = serde_json::to_string(config)?;
        let manifest = json!({
            "command": command,
            "seed": seed,
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "config_sha256": format!("{:x}", Sha256::digest(canonical.as_bytes())),
            "files": files.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
        });
        fs::write(dir.join("manifest.json"), to_json(&manifest))?;
        Ok(Some(dir))
    }
}

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w)?;
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

fn cmd_table(
    store: &Store,
    scenario: &str,
    n: u64,
    seed: u64,
    mechanisms: Option<Vec<String>>,
    with_instances: bool,
) -> Result<u8, Failure> {
    let scenario: GeneratorMode = scenario.parse()?;
    let ids = match &mechanisms {
        Some(list) => list.iter().map(|s| mechanism(s)).collect::<anyhow::Result<Vec<_>>>()?,
        None => fnpw_core::experiments::default_table_mechanisms(),
    };
    if ids.iter().any(|id| matches!(id, MechanismId::Lds3)) {
        return Err(anyhow!("lds3 needs three items; the table uses two").into());
    }
    let (table, instances) = run_table_experiment(scenario, &ids, n, seed)?;
    let csv = csv_string(|w| {
        w.write_record(["mechanism", "mean_revenue", "mean_efficiency", "mean_revenue_exact", "mean_efficiency_exact"])?;
        for row in &table.rows {
            w.write_record([
                row.mechanism.clone(),
                format!("{:.6}", row.mean_revenue_f64()),
                format!("{:.6}", row.mean_efficiency_f64()),
                row.mean_revenue.to_string(),
                row.mean_efficiency.to_string(),
            ])?;
        }
        Ok(())
    })?;
    let mut files = vec![("table.csv", csv), ("table.json", to_json(&table))];
    if with_instances {
        files.push(("instances.json", to_json(&instances)));
    }
    let config = json!({
        "experiment": "table",
        "scenario": scenario,
        "instances": n,
        "seed": seed,
        "mechanisms": ids.iter().map(|id| id.to_string()).collect::<Vec<_>>(),
    });
    let dir = store.write("table", seed, &config, &files)?;
    println!("{} scenario, {n} instances, seed {seed}", scenario.name());
    println!("{:<10} {:>10} {:>11}", "mechanism", "revenue", "efficiency");
    for row in &table.rows {
        println!("{:<10} {:>10.3} {:>11.3}", row.mechanism, row.mean_revenue_f64(), row.mean_efficiency_f64());
    }
    if let Some(dir) = dir {
        println!("results written to {}", dir.display());
    }
    Ok(EXIT_OK)
}

fn cmd_ratio(store: &Store, id: &str, m: usize, eps: &str) -> Result<u8, Failure> {
    let epsilon = Money::from_decimal(eps)?;
    let result = run_ratio_scenarios(&mechanism(id)?, m, &epsilon)?;
    let csv = csv_string(|w| {
        w.write_record(["scenario", "agents", "winners", "welfare", "optimum"])?;
        for s in &result.scenarios {
            let winners: Vec<String> = s
                .winners
                .iter()
                .map(|w| format!("{}:{{{}}}@{}", w.agent, w.bundle, w.payment))
                .collect();
            w.write_record([
                s.scenario.to_string(),
                s.agents.join(" "),
                winners.join(" "),
                s.welfare.to_string(),
                s.optimum.to_string(),
            ])?;
        }
        Ok(())
    })?;
    let config = json!({"experiment": "ratio", "mechanism": id, "m": m, "epsilon": epsilon});
    let dir = store.write("ratio", 0, &config, &[("ratio.csv", csv), ("ratio.json", to_json(&result))])?;
    println!("{}", result.ratio);
    eprintln!("ratio {} ~ {:.6}", result.ratio, result.ratio.to_f64());
    if let Some(dir) = dir {
        eprintln!("results written to {}", dir.display());
    }
    Ok(EXIT_OK)
}

fn cmd_fixture(store: &Store, name: &str) -> Result<u8, Failure> {
    let fixture: Fixture = name.parse()?;
    let report = replay_fixture(fixture)?;
    let config = json!({"experiment": "fixture", "fixture": name});
    let file = format!("{name}.json");
    let dir = store.write("fixture", 0, &config, &[(file.as_str(), to_json(&report))])?;
    println!("{}", to_json(&report));
    if let Some(dir) = dir {
        eprintln!("results written to {}", dir.display());
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_VIOLATION })
}
