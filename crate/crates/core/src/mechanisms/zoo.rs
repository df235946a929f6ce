use crate::domain::{Bundle, Money};
use crate::error::{Error, Result};
use crate::porf::PriceFunction;
use crate::valuation::ValuationSpec;
use crate::welfare::efficient_value_table;

fn check_items(m: usize, others: &[&ValuationSpec]) -> Result<()> {
    for v in others {
        if v.m() != m {
            return Err(Error::MismatchedItems {
                expected: m,
                found: v.m(),
            });
        }
    }
    Ok(())
}

/// VCG: `χ(S, O) = U(G, O) − U(G∖S, O)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Vcg;

impl PriceFunction for Vcg {
    fn name(&self) -> String {
        "vcg".into()
    }

    fn price_row(&self, m: usize, others: &[&ValuationSpec]) -> Result<Vec<Money>> {
        check_items(m, others)?;
        let u = efficient_value_table(m, others)?;
        let full = (1usize << m) - 1;
        Ok((0..=full).map(|mask| &u[full] - &u[full & !mask]).collect())
    }
}

/// Set: the grand bundle sold by Vickrey auction. Any nonempty bundle costs
/// the highest rival value for `G`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SetMechanism;

impl PriceFunction for SetMechanism {
    fn name(&self) -> String {
        "set".into()
    }

    fn price_row(&self, m: usize, others: &[&ValuationSpec]) -> Result<Vec<Money>> {
        check_items(m, others)?;
        let grand = Bundle::grand(m);
        let top = others
            .iter()
            .map(|v| v.value_of(grand))
            .max()
            .unwrap_or_else(Money::zero);
        let mut row = vec![top; 1 << m];
        row[0] = Money::zero();
        Ok(row)
    }
}

/// Minimal Bundle: the highest rival value on a minimal bundle that
/// conflicts with `S`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MinimalBundle;

impl PriceFunction for MinimalBundle {
    fn name(&self) -> String {
        "mb".into()
    }

    fn price_row(&self, m: usize, others: &[&ValuationSpec]) -> Result<Vec<Money>> {
        check_items(m, others)?;
        let minimal: Vec<(u32, Money)> = others
            .iter()
            .flat_map(|v| v.minimal_bundles().into_iter().map(move |b| (b.mask(), v.value_of(b))))
            .collect();
        Ok((0..1u32 << m)
            .map(|mask| {
                minimal
                    .iter()
                    .filter(|(b, _)| b & mask != 0)
                    .map(|(_, value)| value)
                    .max()
                    .cloned()
                    .unwrap_or_else(Money::zero)
            })
            .collect())
    }
}

/// MMVIP: item pricing at the maximum marginal value any rival has for
/// each item.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Mmvip;

impl Mmvip {
    /// Price of each single item.
    pub fn item_prices(&self, m: usize, others: &[&ValuationSpec]) -> Result<Vec<Money>> {
        check_items(m, others)?;
        let tables: Vec<_> = others.iter().map(|v| v.table()).collect();
        Ok((0..m)
            .map(|item| {
                let bit = 1u32 << item;
                let rest = Bundle::from_mask(m, ((1u32 << m) - 1) & !bit);
                let mut best = Money::zero();
                for t in &tables {
                    for s in rest.subsets() {
                        let marginal = &t[(s.mask() | bit) as usize] - &t[s.mask() as usize];
                        if marginal > best {
                            best = marginal;
                        }
                    }
                }
                best
            })
            .collect())
    }
}

impl PriceFunction for Mmvip {
    fn name(&self) -> String {
        "mmvip".into()
    }

    fn price_row(&self, m: usize, others: &[&ValuationSpec]) -> Result<Vec<Money>> {
        let items = self.item_prices(m, others)?;
        Ok(Bundle::all(m)
            .map(|s| s.items().map(|i| &items[i]).sum())
            .collect())
    }
}

pub fn price_vcg(s: Bundle, others: &[&ValuationSpec]) -> Result<Money> {
    Vcg.price(s, others)
}

pub fn price_set(s: Bundle, others: &[&ValuationSpec]) -> Result<Money> {
    SetMechanism.price(s, others)
}

pub fn price_mb(s: Bundle, others: &[&ValuationSpec]) -> Result<Money> {
    MinimalBundle.price(s, others)
}

pub fn price_mmvip(s: Bundle, others: &[&ValuationSpec]) -> Result<Money> {
    Mmvip.price(s, others)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(m: usize, s: &str) -> Bundle {
        Bundle::parse(m, s).unwrap()
    }

    fn money(s: &str) -> Money {
        Money::from_decimal(s).unwrap()
    }

    fn sm(t: &str, v: &str) -> ValuationSpec {
        ValuationSpec::sm(2, t, v).unwrap()
    }

    #[test]
    fn vcg_examples() {
        let add = ValuationSpec::add(&["3", "2"]).unwrap();
        assert_eq!(price_vcg(b(2, "A"), &[&add]).unwrap(), money("3"));
        let (one, two) = (sm("AB", "4"), sm("B", "2"));
        // U(G) = 4 with both agents; without A only agent 2 scores, without B nobody.
        assert_eq!(price_vcg(b(2, "A"), &[&one, &two]).unwrap(), money("2"));
        assert_eq!(price_vcg(b(2, "B"), &[&one, &two]).unwrap(), money("4"));
        assert_eq!(price_vcg(Bundle::empty(2), &[&one, &two]).unwrap(), money("0"));
        assert_eq!(price_vcg(b(2, "AB"), &[]).unwrap(), money("0"));
    }

    #[test]
    fn set_examples() {
        let add = ValuationSpec::add(&["3", "2"]).unwrap();
        assert_eq!(price_set(b(2, "A"), &[&add]).unwrap(), money("5"));
        assert_eq!(price_set(Bundle::empty(2), &[&add]).unwrap(), money("0"));
        assert_eq!(price_set(b(2, "AB"), &[]).unwrap(), money("0"));
    }

    #[test]
    fn mb_examples() {
        let add = ValuationSpec::add(&["3", "2"]).unwrap();
        assert_eq!(price_mb(b(2, "A"), &[&add]).unwrap(), money("5"));
        assert_eq!(price_mb(b(2, "A"), &[&sm("B", "2")]).unwrap(), money("0"));
        assert_eq!(price_mb(b(2, "B"), &[&sm("AB", "4")]).unwrap(), money("4"));
    }

    #[test]
    fn mmvip_examples() {
        let add = ValuationSpec::add(&["3", "2"]).unwrap();
        assert_eq!(price_mmvip(b(2, "A"), &[&add]).unwrap(), money("3"));
        assert_eq!(price_mmvip(b(2, "AB"), &[&add]).unwrap(), money("5"));
        assert_eq!(price_mmvip(b(2, "A"), &[&sm("AB", "4")]).unwrap(), money("4"));
        assert_eq!(price_mmvip(b(2, "AB"), &[]).unwrap(), money("0"));
    }

    #[test]
    fn mismatched_items_are_rejected() {
        let v = ValuationSpec::sm(3, "A", "1").unwrap();
        assert!(price_vcg(b(2, "A"), &[&v]).is_err());
    }
}
