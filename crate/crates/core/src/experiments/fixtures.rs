use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::axioms::{check_withdrawal_monotonicity, TypePool};
use crate::domain::{Bundle, Money, Profile};
use crate::error::{Error, Result};
use crate::manipulation::{find_fnpw_manipulation, truthful_utility, SearchLimits};
use crate::mechanisms::{run_lds3, Amd, Lds3, Mmvip, Vcg};
use crate::porf::PriceFunction;
use crate::report::{CheckReport, Counterexample};
use crate::valuation::{generate, GeneratorMode, ValuationSpec};

use super::table::instance_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fixture {
    Example1,
    Prop5Lds,
    Prop11AmdEqMmvip,
    Prop12AdditiveCoincide,
}

impl Fixture {
    pub const ALL: [Fixture; 4] = [
        Fixture::Example1,
        Fixture::Prop5Lds,
        Fixture::Prop11AmdEqMmvip,
        Fixture::Prop12AdditiveCoincide,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::Example1 => "example1",
            Fixture::Prop5Lds => "prop5_lds",
            Fixture::Prop11AmdEqMmvip => "prop11_amd_eq_mmvip",
            Fixture::Prop12AdditiveCoincide => "prop12_additive_coincide",
        }
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Fixture::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown fixture {s:?}")))
    }
}

/// Accumulates named checks; the first mismatch becomes the certificate.
struct Expectations {
    fixture: Fixture,
    cases: u64,
    failure: Option<Counterexample>,
}

impl Expectations {
    fn new(fixture: Fixture) -> Self {
        Expectations {
            fixture,
            cases: 0,
            failure: None,
        }
    }

    fn expect(&mut self, check: &str, expected: impl fmt::Debug, found: impl fmt::Debug) {
        self.cases += 1;
        let (expected, found) = (format!("{expected:?}"), format!("{found:?}"));
        if self.failure.is_none() && expected != found {
            self.failure = Some(Counterexample::FixtureMismatch {
                fixture: self.fixture.to_string(),
                check: check.to_string(),
                expected,
                found,
            });
        }
    }

    fn finish(self) -> CheckReport {
        match self.failure {
            Some(cx) => CheckReport::fail(cx, self.cases),
            None => CheckReport::pass(self.cases),
        }
    }
}

fn sm(m: usize, target: &str, value: &str) -> ValuationSpec {
    ValuationSpec::sm(m, target, value).expect("fixture type")
}

fn money(s: &str) -> Money {
    Money::from_decimal(s).expect("fixture amount")
}

/// Profiles of `n` agents drawn with `mode`, for `n = 1..=max_n`.
fn sweep_profiles(mode: GeneratorMode, m: usize, max_n: usize, per_size: u64, seed: u64) -> Result<Vec<Vec<ValuationSpec>>> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        for k in 0..per_size {
            let mut rng = instance_rng(seed, (n as u64) << 32 | k);
            out.push((0..n).map(|_| generate(mode, m, &mut rng)).collect::<Result<Vec<_>>>()?);
        }
    }
    Ok(out)
}

/// Every agent's price row under `a` and `b` on `profile`; first difference.
fn first_row_difference(
    a: &dyn PriceFunction,
    b: &dyn PriceFunction,
    m: usize,
    profile: &[ValuationSpec],
) -> Result<Option<(usize, Vec<Money>, Vec<Money>)>> {
    for i in 0..profile.len() {
        let others: Vec<&ValuationSpec> = profile.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).collect();
        let (ra, rb) = (a.price_row(m, &others)?, b.price_row(m, &others)?);
        if ra != rb {
            return Ok(Some((i, ra, rb)));
        }
    }
    Ok(None)
}

/// Runs a named construction end to end and checks its stated conclusion.
pub fn replay_fixture(fixture: Fixture) -> Result<CheckReport> {
    let mut ex = Expectations::new(fixture);
    match fixture {
        Fixture::Example1 => {
            let (one, two) = (sm(2, "AB", "4"), sm(2, "B", "2"));
            let truth = sm(2, "A", "1");
            let others = [&one, &two];
            ex.expect("truthful utility", money("0"), truthful_utility(&Vcg, &truth, &others)?);
            let pool = TypePool::new(2, vec![sm(2, "A", "1"), sm(2, "B", "4")])?;
            let plan = find_fnpw_manipulation(&Vcg, &truth, &others, &pool, &SearchLimits::fnpw(2, 2))?;
            ex.expect("withdrawal gain", Some(money("1")), plan.as_ref().map(|p| p.gain.clone()));
            ex.expect(
                "withdrawn identity",
                Some(vec![sm(2, "B", "4")]),
                plan.as_ref().map(|p| p.withdrawn.clone()),
            );
            let pure = find_fnpw_manipulation(&Vcg, &truth, &others, &pool, &SearchLimits::fnp(2))?;
            ex.expect("gain without withdrawal", None::<Money>, pure.map(|p| p.gain));
        }
        Fixture::Prop5Lds => {
            let ab = sm(3, "AB", "2.2");
            let a = Bundle::parse(3, "A")?;
            let won = |agents: Vec<ValuationSpec>| -> Result<Bundle> {
                Ok(run_lds3(&Profile::from_valuations(3, agents)?)?.bundle(0))
            };
            ex.expect("X(1.3)", a, won(vec![sm(3, "A", "1.3"), ab.clone()])?);
            ex.expect("X(1.1)", Bundle::empty(3), won(vec![sm(3, "A", "1.1"), ab.clone()])?);
            ex.expect(
                "X(1.05) with 2.9 on BC",
                a,
                won(vec![sm(3, "A", "1.05"), ab.clone(), sm(3, "BC", "2.9")])?,
            );
            let pool = TypePool::new(
                3,
                vec![sm(3, "A", "1.3"), sm(3, "A", "1.1"), sm(3, "A", "1.05"), sm(3, "BC", "2.9")],
            )?;
            let report = check_withdrawal_monotonicity(&Lds3, &pool, &[&ab])?;
            let witness = match report.counterexample {
                Some(Counterexample::WithdrawalMonotonicity { low_value, up_value, .. }) => Some((low_value, up_value)),
                _ => None,
            };
            ex.expect("withdrawal-monotonicity witness", Some((money("1.1"), money("1.05"))), witness);
        }
        Fixture::Prop11AmdEqMmvip => {
            for profile in sweep_profiles(GeneratorMode::Substitutable, 2, 4, 25, 11)? {
                let amd = Amd::new(Vcg);
                let diff = first_row_difference(&amd, &Mmvip, 2, &profile)?;
                ex.expect("amd:vcg rows equal mmvip rows", None::<()>, diff.map(|d| (profile.clone(), d)));
            }
        }
        Fixture::Prop12AdditiveCoincide => {
            for m in [2, 3] {
                for profile in sweep_profiles(GeneratorMode::Additive, m, 4, 10, 12)? {
                    let diff = first_row_difference(&Vcg, &Mmvip, m, &profile)?;
                    ex.expect("vcg rows equal mmvip rows", None::<()>, diff.map(|d| (profile.clone(), d)));
                    let amd = Amd::new(Vcg);
                    let diff = first_row_difference(&amd, &Vcg, m, &profile)?;
                    ex.expect("amd:vcg rows equal vcg rows", None::<()>, diff.map(|d| (profile.clone(), d)));
                }
            }
        }
    }
    Ok(ex.finish())
}
