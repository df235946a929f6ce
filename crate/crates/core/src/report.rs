//! Verdicts produced by validators and axiom checkers.

use serde::{Deserialize, Serialize};

use crate::domain::{Bundle, Money};
use crate::valuation::ValuationSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// The quantified variables that violate a checked condition, together with
/// the two sides of the violated inequality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Counterexample {
    EmptyBundleValue {
        value: Money,
    },
    NegativeValue {
        bundle: Bundle,
        value: Money,
    },
    NotMonotone {
        smaller: Bundle,
        larger: Bundle,
        smaller_value: Money,
        larger_value: Money,
    },
    /// `χ(S1,O) + χ(S2,O) < χ(S1 ∪ S2, O)`.
    Dlb {
        others: Vec<ValuationSpec>,
        s1: Bundle,
        s2: Bundle,
        price_s1: Money,
        price_s2: Money,
        price_union: Money,
    },
    /// `χ(S, O ∪ {extra}) < χ(S, O)`.
    Pia {
        others: Vec<ValuationSpec>,
        extra: ValuationSpec,
        bundle: Bundle,
        price_before: Money,
        price_after: Money,
    },
    /// `Σ_{i∈Y} χ(B_i, O∖{i}) < χ(∪ B_i, O∖Y∖Z)`; `kept` is `Y` and
    /// `withdrawn` is `Z`, both as positions in `agents`.
    Nsaw {
        agents: Vec<ValuationSpec>,
        kept: Vec<usize>,
        withdrawn: Vec<usize>,
        bundles: Vec<Bundle>,
        kept_price_sum: Money,
        union: Bundle,
        union_price: Money,
    },
    /// `v(θ,X(θ)) − v(θ,X(θ')) < v(θ',X(θ)) − v(θ',X(θ'))`.
    WeakMonotonicity {
        others: Vec<ValuationSpec>,
        theta: ValuationSpec,
        theta_prime: ValuationSpec,
        bundle: Bundle,
        bundle_prime: Bundle,
        lhs: Money,
        rhs: Money,
    },
    /// `v(θ'_i, X(θ_i)) > Σ_l v(θ'_il, X_{+I}(θ_il))`.
    SubAdditivity {
        others: Vec<ValuationSpec>,
        theta: ValuationSpec,
        theta_prime: ValuationSpec,
        identities: Vec<ValuationSpec>,
        identities_prime: Vec<ValuationSpec>,
        identity_bundles: Vec<Bundle>,
        lhs: Money,
        rhs: Money,
    },
    /// `v(θ^L, X(θ_i)) > v(θ^U, X(θ_i))` while both premises hold.
    WithdrawalMonotonicity {
        others: Vec<ValuationSpec>,
        theta: ValuationSpec,
        theta_a: ValuationSpec,
        theta_low: ValuationSpec,
        theta_up: ValuationSpec,
        bundle: Bundle,
        low_value: Money,
        up_value: Money,
    },
    /// `U(S1,Y) + U(S2,Y) < U(S1∪S2,Y) + U(S1∩S2,Y)`.
    Submodularity {
        agents: Vec<ValuationSpec>,
        s1: Bundle,
        s2: Bundle,
        lhs: Money,
        rhs: Money,
    },
    /// The agent at `position` gets `outcome` but could get the strictly
    /// better `better_outcome` by reporting `misreport`.
    ScfStrategyProof {
        profile: Vec<usize>,
        position: usize,
        misreport: usize,
        outcome: usize,
        better_outcome: usize,
    },
    /// `outcome` becomes attainable only after `added` joins `others`.
    ScfFnpw {
        others: Vec<usize>,
        position: usize,
        added: usize,
        attainable_before: Vec<usize>,
        attainable_after: Vec<usize>,
        outcome: usize,
    },
    /// A replayed construction did not reach its stated conclusion.
    FixtureMismatch {
        fixture: String,
        check: String,
        expected: String,
        found: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    /// Number of quantifier instances evaluated. A pass means "no violation
    /// in the swept universe", nothing more.
    pub cases: u64,
}

impl CheckReport {
    pub fn pass(cases: u64) -> Self {
        CheckReport {
            verdict: Verdict::Pass,
            counterexample: None,
            cases,
        }
    }

    pub fn fail(counterexample: Counterexample, cases: u64) -> Self {
        CheckReport {
            verdict: Verdict::Fail,
            counterexample: Some(counterexample),
            cases,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Sequential composition: the first failure wins, case counts add up.
    pub fn and_then(self, next: impl FnOnce() -> CheckReport) -> CheckReport {
        if !self.passed() {
            return self;
        }
        let mut next = next();
        next.cases += self.cases;
        next
    }
}
