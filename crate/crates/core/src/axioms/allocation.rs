use super::{owned, TypePool};
use crate::domain::{Bundle, Money};
use crate::error::Result;
use crate::porf::AllocationRule;
use crate::report::{CheckReport, Counterexample};
use crate::valuation::ValuationSpec;

/// `X(theta, others)`: the bundle won by `theta`, run first, against `others`.
pub fn allocation_of(
    rule: &(impl AllocationRule + ?Sized),
    m: usize,
    theta: &ValuationSpec,
    others: &[&ValuationSpec],
) -> Result<Bundle> {
    let mut agents = Vec::with_capacity(others.len() + 1);
    agents.push(theta);
    agents.extend_from_slice(others);
    Ok(rule.allocate(m, &agents)?.bundle(0))
}

fn allocations(rule: &(impl AllocationRule + ?Sized), pool: &TypePool, others: &[&ValuationSpec]) -> Result<Vec<Bundle>> {
    pool.types()
        .iter()
        .map(|t| allocation_of(rule, pool.m(), t, others))
        .collect()
}

/// `v(θ,X(θ)) − v(θ,X(θ')) ≥ v(θ',X(θ)) − v(θ',X(θ'))` for all pool types
/// `θ, θ'` against fixed `others`.
pub fn check_weak_monotonicity(
    rule: &(impl AllocationRule + ?Sized),
    pool: &TypePool,
    others: &[&ValuationSpec],
) -> Result<CheckReport> {
    let x = allocations(rule, pool, others)?;
    let types = pool.types();
    let mut cases = 0;
    for (a, theta) in types.iter().enumerate() {
        for (b, theta_prime) in types.iter().enumerate() {
            cases += 1;
            let lhs = theta.value_of(x[a]) - theta.value_of(x[b]);
            let rhs = theta_prime.value_of(x[a]) - theta_prime.value_of(x[b]);
            if lhs < rhs {
                return Ok(CheckReport::fail(
                    Counterexample::WeakMonotonicity {
                        others: owned(others),
                        theta: theta.clone(),
                        theta_prime: theta_prime.clone(),
                        bundle: x[a],
                        bundle_prime: x[b],
                        lhs,
                        rhs,
                    },
                    cases,
                ));
            }
        }
    }
    Ok(CheckReport::pass(cases))
}

/// For `k ≤ k_max` identities `θ_i1..θ_ik` whose winnings (each run against
/// `others` and the remaining identities) add up to `X(θ_i)`, and any `θ'_i`
/// that wins nothing of value: `v(θ'_i, X(θ_i))` is at most the sum over `l`
/// of `v(θ'_il, X_l(θ_il))`, for every choice of `θ'_il` that wins a superset
/// of `X_l(θ_il)` and values both equally. All `k` premises must hold
/// jointly, so each `l` contributes its smallest qualifying term.
pub fn check_subadditivity(
    rule: &(impl AllocationRule + ?Sized),
    pool: &TypePool,
    others: &[&ValuationSpec],
    k_max: usize,
) -> Result<CheckReport> {
    let m = pool.m();
    let types = pool.types();
    let x = allocations(rule, pool, others)?;
    let zero_winners: Vec<usize> = (0..types.len())
        .filter(|&t| types[t].value_of(x[t]).is_zero())
        .collect();
    let mut cases = 0;
    for k in 1..=k_max {
        for tuple in ordered_tuples(types.len(), k) {
            let mut identity_bundles = Vec::with_capacity(k);
            let mut primes = Vec::with_capacity(k);
            let mut rhs = Money::zero();
            let mut vacuous = false;
            for l in 0..k {
                let mut context: Vec<&ValuationSpec> = others.to_vec();
                context.extend((0..k).filter(|&t| t != l).map(|t| &types[tuple[t]]));
                let won = allocation_of(rule, m, &types[tuple[l]], &context)?;
                // The cheapest θ'_il meeting both premises for this slot.
                let mut best: Option<(Money, usize)> = None;
                for (c, cand) in types.iter().enumerate() {
                    let cand_won = allocation_of(rule, m, cand, &context)?;
                    if won.is_subset(cand_won) && cand.value_of(cand_won) == cand.value_of(won) {
                        let term = cand.value_of(won);
                        if best.as_ref().map_or(true, |(b, _)| &term < b) {
                            best = Some((term, c));
                        }
                    }
                }
                match best {
                    Some((term, c)) => {
                        rhs += term;
                        primes.push(c);
                    }
                    None => {
                        vacuous = true;
                        break;
                    }
                }
                identity_bundles.push(won);
            }
            if vacuous {
                continue;
            }
            let union = identity_bundles.iter().fold(0u32, |acc, b| acc | b.mask());
            for (i, theta) in types.iter().enumerate() {
                if x[i].mask() != union {
                    continue;
                }
                for &p in &zero_winners {
                    cases += 1;
                    let lhs = types[p].value_of(x[i]);
                    if lhs > rhs {
                        return Ok(CheckReport::fail(
                            Counterexample::SubAdditivity {
                                others: owned(others),
                                theta: theta.clone(),
                                theta_prime: types[p].clone(),
                                identities: tuple.iter().map(|&t| types[t].clone()).collect(),
                                identities_prime: primes.iter().map(|&t| types[t].clone()).collect(),
                                identity_bundles,
                                lhs,
                                rhs,
                            },
                            cases,
                        ));
                    }
                }
            }
        }
    }
    Ok(CheckReport::pass(cases))
}

/// For all pool types `θ_i, θ^a, θ^L, θ^U`: if `θ^L` wins nothing of value
/// against `others` and `θ^U` wins `X(θ_i)` against `others ∪ {θ^a}`, then
/// `v(θ^L, X(θ_i)) ≤ v(θ^U, X(θ_i))`.
pub fn check_withdrawal_monotonicity(
    rule: &(impl AllocationRule + ?Sized),
    pool: &TypePool,
    others: &[&ValuationSpec],
) -> Result<CheckReport> {
    let types = pool.types();
    let x = allocations(rule, pool, others)?;
    // with_extra[a][u] = X(θ^U = types[u], others ∪ {types[a]})
    let mut with_extra = Vec::with_capacity(types.len());
    for extra in types {
        let mut context = others.to_vec();
        context.push(extra);
        with_extra.push(allocations(rule, pool, &context)?);
    }
    let mut cases = 0;
    for (i, theta) in types.iter().enumerate() {
        for (a, theta_a) in types.iter().enumerate() {
            for (u, theta_up) in types.iter().enumerate() {
                if with_extra[a][u] != x[i] {
                    continue;
                }
                for (l, theta_low) in types.iter().enumerate() {
                    if !theta_low.value_of(x[l]).is_zero() {
                        continue;
                    }
                    cases += 1;
                    let low_value = theta_low.value_of(x[i]);
                    let up_value = theta_up.value_of(x[i]);
                    if low_value > up_value {
                        return Ok(CheckReport::fail(
                            Counterexample::WithdrawalMonotonicity {
                                others: owned(others),
                                theta: theta.clone(),
                                theta_a: theta_a.clone(),
                                theta_low: theta_low.clone(),
                                theta_up: theta_up.clone(),
                                bundle: x[i],
                                low_value,
                                up_value,
                            },
                            cases,
                        ));
                    }
                }
            }
        }
    }
    Ok(CheckReport::pass(cases))
}

/// All length-`k` sequences over `0..len`.
fn ordered_tuples(len: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..len).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{Lds3, Mmvip, SetMechanism, Vcg};

    fn sm(m: usize, t: &str, v: &str) -> ValuationSpec {
        ValuationSpec::sm(m, t, v).unwrap()
    }

    fn money(s: &str) -> Money {
        Money::from_decimal(s).unwrap()
    }

    fn small_pool() -> TypePool {
        TypePool::new(
            2,
            vec![
                sm(2, "A", "1"),
                sm(2, "B", "1.5"),
                sm(2, "AB", "2"),
                sm(2, "A", "0.5"),
                ValuationSpec::add(&["0.5", "1"]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn lds_pool() -> TypePool {
        TypePool::new(
            3,
            vec![sm(3, "A", "1.3"), sm(3, "A", "1.1"), sm(3, "A", "1.05"), sm(3, "BC", "2.9")],
        )
        .unwrap()
    }

    #[test]
    fn tuples() {
        assert_eq!(ordered_tuples(3, 2).len(), 9);
        assert_eq!(ordered_tuples(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn weak_monotonicity_holds_for_strategyproof_rules() {
        let pool = small_pool();
        let other = sm(2, "AB", "1.75");
        for others in [vec![], vec![&other]] {
            assert!(check_weak_monotonicity(&Vcg, &pool, &others).unwrap().passed());
            assert!(check_weak_monotonicity(&SetMechanism, &pool, &others).unwrap().passed());
        }
    }

    #[test]
    fn subadditivity_passes_for_set_and_mmvip() {
        let pool = small_pool();
        let other = sm(2, "B", "0.75");
        for others in [vec![], vec![&other]] {
            let set = check_subadditivity(&SetMechanism, &pool, &others, 2).unwrap();
            assert!(set.passed(), "{set:?}");
            assert_eq!(set.cases > 0, !others.is_empty());
            assert!(check_subadditivity(&Mmvip, &pool, &others, 2).unwrap().passed());
        }
        let single = TypePool::new(2, vec![sm(2, "A", "1")]).unwrap();
        let r = check_subadditivity(&Mmvip, &single, &[], 2).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn lds_violates_withdrawal_monotonicity() {
        let other = sm(3, "AB", "2.2");
        let r = check_withdrawal_monotonicity(&Lds3, &lds_pool(), &[&other]).unwrap();
        let Some(Counterexample::WithdrawalMonotonicity { theta, theta_a, theta_low, theta_up, bundle, low_value, up_value, .. }) =
            r.counterexample
        else {
            panic!("{r:?}")
        };
        assert_eq!(bundle.label(), "A");
        assert_eq!((low_value, up_value), (money("1.1"), money("1.05")));
        assert_eq!(theta, sm(3, "A", "1.3"));
        assert_eq!(theta_a, sm(3, "BC", "2.9"));
        assert_eq!(theta_low, sm(3, "A", "1.1"));
        assert_eq!(theta_up, sm(3, "A", "1.05"));
    }

    #[test]
    fn mmvip_withdrawal_monotone_on_lds_pool() {
        let other = sm(3, "AB", "2.2");
        assert!(check_withdrawal_monotonicity(&Mmvip, &lds_pool(), &[&other]).unwrap().passed());
    }
}
