//! Agent types: monotone valuations over bundles.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::domain::{Bundle, Money, MAX_ITEMS, UNIFORM_BITS};
use crate::error::{Error, Result};
use crate::report::{CheckReport, Counterexample};

/// An agent type `θ`: the function `S ↦ v(θ, S)`.
///
/// The derived ordering is only used to canonicalize multisets of types.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValuationSpec {
    /// One value per bundle, indexed by bundle mask (`2^m` entries).
    Explicit { table: Vec<Money> },
    /// Per-item values; a bundle is worth the sum of its items.
    Additive { values: Vec<Money> },
    /// Worth `value` on any superset of `target`, zero otherwise.
    SingleMinded { target: Bundle, value: Money },
}

impl ValuationSpec {
    pub fn explicit(m: usize, table: Vec<Money>) -> Result<Self> {
        if m > MAX_ITEMS || table.len() != 1 << m {
            return Err(Error::InvalidValuation(format!(
                "explicit table for m = {m} needs {} entries, got {}",
                1usize << m.min(MAX_ITEMS),
                table.len()
            )));
        }
        Ok(ValuationSpec::Explicit { table })
    }

    /// Explicit valuation from `(bundle, value)` pairs; bundles not listed
    /// are worth zero.
    pub fn explicit_from_pairs(m: usize, pairs: impl IntoIterator<Item = (Bundle, Money)>) -> Result<Self> {
        let mut table = vec![Money::zero(); 1 << m];
        for (bundle, value) in pairs {
            if bundle.m() != m {
                return Err(Error::MismatchedItems {
                    expected: m,
                    found: bundle.m(),
                });
            }
            table[bundle.mask() as usize] = value;
        }
        ValuationSpec::explicit(m, table)
    }

    /// The two-item explicit type `(v^A, v^B, v^AB)`.
    pub fn two_item(a: Money, b: Money, ab: Money) -> Self {
        ValuationSpec::Explicit {
            table: vec![Money::zero(), a, b, ab],
        }
    }

    pub fn additive(values: Vec<Money>) -> Result<Self> {
        if values.len() > MAX_ITEMS {
            return Err(Error::CapExceeded {
                what: "m",
                value: values.len(),
                cap: MAX_ITEMS,
            });
        }
        Ok(ValuationSpec::Additive { values })
    }

    pub fn single_minded(target: Bundle, value: Money) -> Self {
        ValuationSpec::SingleMinded { target, value }
    }

    /// Convenience: `sm(2, "AB", "4")` is single-minded on `{A,B}` at 4.
    pub fn sm(m: usize, target: &str, value: &str) -> Result<Self> {
        Ok(ValuationSpec::single_minded(
            Bundle::parse(m, target)?,
            Money::from_decimal(value)?,
        ))
    }

    /// Convenience: `add(&["3", "2"])`.
    pub fn add(values: &[&str]) -> Result<Self> {
        let values = values
            .iter()
            .map(|v| Money::from_decimal(v))
            .collect::<Result<Vec<_>>>()?;
        ValuationSpec::additive(values)
    }

    pub fn m(&self) -> usize {
        match self {
            ValuationSpec::Explicit { table } => table.len().trailing_zeros() as usize,
            ValuationSpec::Additive { values } => values.len(),
            ValuationSpec::SingleMinded { target, .. } => target.m(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ValuationSpec::Explicit { .. } => "explicit",
            ValuationSpec::Additive { .. } => "additive",
            ValuationSpec::SingleMinded { .. } => "single_minded",
        }
    }

    /// `v(θ, S)`.
    pub fn value(&self, s: Bundle) -> Result<Money> {
        if s.m() != self.m() {
            return Err(Error::MismatchedItems {
                expected: self.m(),
                found: s.m(),
            });
        }
        Ok(self.value_of(s))
    }

    /// `v(θ, S)` without the item-count check.
    pub fn value_of(&self, s: Bundle) -> Money {
        debug_assert_eq!(s.m(), self.m());
        match self {
            ValuationSpec::Explicit { table } => table[s.mask() as usize].clone(),
            ValuationSpec::Additive { values } => s.items().map(|i| &values[i]).sum(),
            ValuationSpec::SingleMinded { target, value } => {
                if target.is_subset(s) {
                    value.clone()
                } else {
                    Money::zero()
                }
            }
        }
    }

    /// Values of all `2^m` bundles, indexed by mask.
    pub fn table(&self) -> Cow<'_, [Money]> {
        match self {
            ValuationSpec::Explicit { table } => Cow::Borrowed(table),
            _ => Cow::Owned(Bundle::all(self.m()).map(|s| self.value_of(s)).collect()),
        }
    }

    pub fn to_explicit(&self) -> ValuationSpec {
        ValuationSpec::Explicit {
            table: self.table().into_owned(),
        }
    }

    /// Checks `v(∅) = 0`, nonnegativity and free disposal over all bundles.
    pub fn validate(&self) -> CheckReport {
        let m = self.m();
        let table = self.table();
        let mut cases = 0u64;
        if !table[0].is_zero() {
            return CheckReport::fail(
                Counterexample::EmptyBundleValue {
                    value: table[0].clone(),
                },
                1,
            );
        }
        for larger in Bundle::all(m) {
            let larger_value = &table[larger.mask() as usize];
            cases += 1;
            if larger_value.is_negative() {
                return CheckReport::fail(
                    Counterexample::NegativeValue {
                        bundle: larger,
                        value: larger_value.clone(),
                    },
                    cases,
                );
            }
            for smaller in larger.subsets() {
                cases += 1;
                let smaller_value = &table[smaller.mask() as usize];
                if smaller_value > larger_value {
                    return CheckReport::fail(
                        Counterexample::NotMonotone {
                            smaller,
                            larger,
                            smaller_value: smaller_value.clone(),
                            larger_value: larger_value.clone(),
                        },
                        cases,
                    );
                }
            }
        }
        CheckReport::pass(cases)
    }

    /// `v(S ∪ {item}) − v(S)`; errors if `item ∈ S`.
    pub fn marginal_value(&self, s: Bundle, item: usize) -> Result<Money> {
        if s.m() != self.m() {
            return Err(Error::MismatchedItems {
                expected: self.m(),
                found: s.m(),
            });
        }
        if item >= s.m() {
            return Err(Error::ItemOutOfRange { item, m: s.m() });
        }
        if s.contains(item) {
            return Err(Error::ItemInBundle { item, bundle: s });
        }
        Ok(self.value_of(s.with_item(item)) - self.value_of(s))
    }

    /// Nonempty bundles worth strictly more than each of their proper subsets.
    pub fn minimal_bundles(&self) -> Vec<Bundle> {
        let table = self.table();
        Bundle::all(self.m())
            .filter(|s| !s.is_empty())
            .filter(|s| {
                let v = &table[s.mask() as usize];
                s.subsets()
                    .filter(|sub| sub != s)
                    .all(|sub| &table[sub.mask() as usize] < v)
            })
            .collect()
    }
}

impl fmt::Debug for ValuationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValuationSpec::SingleMinded { target, value } => write!(f, "SM({target}, {value})"),
            ValuationSpec::Additive { values } => {
                let vs: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "Additive({})", vs.join(", "))
            }
            ValuationSpec::Explicit { table } => {
                let m = self.m();
                let entries: Vec<String> = Bundle::all(m)
                    .skip(1)
                    .map(|b| format!("{}:{}", b.label(), table[b.mask() as usize]))
                    .collect();
                write!(f, "Explicit({})", entries.join(", "))
            }
        }
    }
}

/// Wire format of a valuation. `m` may be omitted when a surrounding
/// document supplies it (see [`ValuationDoc::into_spec`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValuationDoc {
    Explicit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        /// Bundle label (`""`, `"A"`, `"AB"`, ..) to value; missing bundles are 0.
        table: BTreeMap<String, Money>,
    },
    Additive {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        values: Vec<Money>,
    },
    SingleMinded {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        target: String,
        value: Money,
    },
}

impl ValuationDoc {
    pub fn into_spec(self, default_m: Option<usize>) -> Result<ValuationSpec> {
        let need_m = |m: Option<usize>| {
            m.or(default_m)
                .ok_or_else(|| Error::InvalidValuation("missing item count m".to_string()))
        };
        match self {
            ValuationDoc::Explicit { m, table } => {
                let m = need_m(m)?;
                let pairs = table
                    .into_iter()
                    .map(|(label, v)| Ok((Bundle::parse(m, &label)?, v)))
                    .collect::<Result<Vec<_>>>()?;
                ValuationSpec::explicit_from_pairs(m, pairs)
            }
            ValuationDoc::Additive { m, values } => {
                let m = m.or(default_m).unwrap_or(values.len());
                if m != values.len() {
                    return Err(Error::MismatchedItems {
                        expected: m,
                        found: values.len(),
                    });
                }
                ValuationSpec::additive(values)
            }
            ValuationDoc::SingleMinded { m, target, value } => {
                let m = need_m(m)?;
                Ok(ValuationSpec::single_minded(Bundle::parse(m, &target)?, value))
            }
        }
    }

    /// Document form with `m` stated only when `with_m` is set.
    pub fn from_spec(spec: &ValuationSpec, with_m: bool) -> Self {
        let m = with_m.then(|| spec.m());
        match spec {
            ValuationSpec::Explicit { table } => ValuationDoc::Explicit {
                m,
                table: Bundle::all(spec.m())
                    .map(|b| (b.label(), table[b.mask() as usize].clone()))
                    .collect(),
            },
            ValuationSpec::Additive { values } => ValuationDoc::Additive {
                m,
                values: values.clone(),
            },
            ValuationSpec::SingleMinded { target, value } => ValuationDoc::SingleMinded {
                m,
                target: target.label(),
                value: value.clone(),
            },
        }
    }
}

impl Serialize for ValuationSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ValuationDoc::from_spec(self, true).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ValuationSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        ValuationDoc::deserialize(deserializer)?
            .into_spec(None)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorMode {
    Substitutable,
    Complementary,
    Additive,
    SingleMinded,
}

impl GeneratorMode {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorMode::Substitutable => "substitutable",
            GeneratorMode::Complementary => "complementary",
            GeneratorMode::Additive => "additive",
            GeneratorMode::SingleMinded => "single-minded",
        }
    }
}

impl FromStr for GeneratorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "substitutable" => Ok(GeneratorMode::Substitutable),
            "complementary" => Ok(GeneratorMode::Complementary),
            "additive" => Ok(GeneratorMode::Additive),
            "single-minded" | "single_minded" => Ok(GeneratorMode::SingleMinded),
            other => Err(Error::InvalidArgument(format!("unknown generator mode {other:?}"))),
        }
    }
}

/// One draw from `U(0,1)` as the exact dyadic `k / 2^53`.
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> Money {
    Money::from_uniform_bits(rng.next_u64() >> (64 - UNIFORM_BITS))
}

/// Draws a random type. Substitutable and complementary types exist only
/// for two items.
pub fn generate<R: RngCore + ?Sized>(mode: GeneratorMode, m: usize, rng: &mut R) -> Result<ValuationSpec> {
    let unsupported = || Error::UnsupportedGenerator {
        mode: mode.name().to_string(),
        m,
    };
    if m == 0 || m > MAX_ITEMS {
        return Err(unsupported());
    }
    match mode {
        GeneratorMode::Substitutable | GeneratorMode::Complementary if m != 2 => Err(unsupported()),
        GeneratorMode::Substitutable => {
            let a = uniform(rng);
            let b = uniform(rng);
            let lo = a.clone().max(b.clone());
            let hi = &a + &b;
            let u = uniform(rng);
            let ab = &lo + &(&u * &(&hi - &lo));
            Ok(ValuationSpec::two_item(a, b, ab))
        }
        GeneratorMode::Complementary => {
            let a = uniform(rng);
            let b = uniform(rng);
            let x = uniform(rng);
            let ab = &(&a + &b) * &(Money::one() + x);
            Ok(ValuationSpec::two_item(a, b, ab))
        }
        GeneratorMode::Additive => Ok(ValuationSpec::Additive {
            values: (0..m).map(|_| uniform(rng)).collect(),
        }),
        GeneratorMode::SingleMinded => {
            let nonempty = (1u64 << m) - 1;
            let mask = 1 + (rng.next_u64() % nonempty) as u32;
            let value = uniform(rng);
            Ok(ValuationSpec::single_minded(Bundle::from_mask(m, mask), value))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn b(m: usize, s: &str) -> Bundle {
        Bundle::parse(m, s).unwrap()
    }

    fn money(s: &str) -> Money {
        Money::from_decimal(s).unwrap()
    }

    #[test]
    fn values() {
        let sm = ValuationSpec::sm(2, "A", "1").unwrap();
        assert_eq!(sm.value(b(2, "AB")).unwrap(), money("1"));
        assert_eq!(sm.value(b(2, "B")).unwrap(), money("0"));
        let add = ValuationSpec::add(&["3", "2"]).unwrap();
        assert_eq!(add.value(b(2, "AB")).unwrap(), money("5"));
        for v in [&sm, &add] {
            assert!(v.value(Bundle::empty(2)).unwrap().is_zero());
        }
        assert!(add.value(b(3, "A")).is_err());
    }

    #[test]
    fn validate_reports_monotonicity_violation() {
        assert!(ValuationSpec::add(&["3", "2"]).unwrap().validate().passed());
        assert!(ValuationSpec::sm(2, "AB", "4").unwrap().validate().passed());

        let bad = ValuationSpec::two_item(money("2"), money("0"), money("1"));
        let report = bad.validate();
        assert!(!report.passed());
        match report.counterexample.unwrap() {
            Counterexample::NotMonotone { smaller, larger, .. } => {
                assert_eq!((smaller, larger), (b(2, "A"), b(2, "AB")));
            }
            other => panic!("unexpected witness {other:?}"),
        }

        let nonzero_empty = ValuationSpec::explicit(1, vec![money("1"), money("2")]).unwrap();
        assert!(!nonzero_empty.validate().passed());
        let negative = ValuationSpec::add(&["-1"]).unwrap();
        assert!(!negative.validate().passed());
    }

    #[test]
    fn marginal_values() {
        let sm = ValuationSpec::sm(2, "AB", "4").unwrap();
        assert_eq!(sm.marginal_value(b(2, "B"), 0).unwrap(), money("4"));
        assert_eq!(sm.marginal_value(Bundle::empty(2), 0).unwrap(), money("0"));
        let add = ValuationSpec::add(&["3", "2"]).unwrap();
        assert_eq!(add.marginal_value(b(2, "B"), 0).unwrap(), money("3"));
        assert!(matches!(
            add.marginal_value(b(2, "A"), 0),
            Err(Error::ItemInBundle { .. })
        ));
    }

    #[test]
    fn minimal_bundle_examples() {
        let sm = ValuationSpec::sm(2, "AB", "4").unwrap();
        assert_eq!(sm.minimal_bundles(), vec![b(2, "AB")]);
        let add = ValuationSpec::add(&["3", "2"]).unwrap();
        assert_eq!(add.minimal_bundles(), vec![b(2, "A"), b(2, "B"), b(2, "AB")]);
        let sm_a = ValuationSpec::sm(2, "A", "1").unwrap();
        assert_eq!(sm_a.minimal_bundles(), vec![b(2, "A")]);
    }

    #[test]
    fn generator_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let v = generate(GeneratorMode::Substitutable, 2, &mut rng).unwrap();
            let t = v.table();
            assert!(t[1].clone().max(t[2].clone()) <= t[3] && t[3] <= &t[1] + &t[2]);
            let v = generate(GeneratorMode::Complementary, 2, &mut rng).unwrap();
            let t = v.table();
            assert!(t[3] >= &t[1] + &t[2]);
        }
        let v = generate(GeneratorMode::Additive, 3, &mut rng).unwrap();
        assert!(matches!(&v, ValuationSpec::Additive { values } if values.len() == 3));
        assert!(generate(GeneratorMode::Substitutable, 3, &mut rng).is_err());
        assert!(generate(GeneratorMode::Complementary, 1, &mut rng).is_err());
    }

    #[test]
    fn generated_types_always_validate() {
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for (mode, m) in [
                (GeneratorMode::Substitutable, 2),
                (GeneratorMode::Complementary, 2),
                (GeneratorMode::Additive, 3),
                (GeneratorMode::SingleMinded, 3),
            ] {
                let v = generate(mode, m, &mut rng).unwrap();
                assert!(v.validate().passed(), "seed {seed} {mode:?}: {v:?}");
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            generate(GeneratorMode::Complementary, 2, &mut rng).unwrap()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }

    #[test]
    fn serde_round_trip() {
        for v in [
            ValuationSpec::sm(3, "AC", "2.2").unwrap(),
            ValuationSpec::add(&["3", "0.5"]).unwrap(),
            ValuationSpec::two_item(money("3"), money("2"), money("4")),
        ] {
            let json = serde_json::to_string(&v).unwrap();
            assert_eq!(serde_json::from_str::<ValuationSpec>(&json).unwrap(), v);
        }
        let doc = r#"{"kind":"single_minded","target":"AB","value":"4"}"#;
        assert!(serde_json::from_str::<ValuationSpec>(doc).is_err());
        let parsed: ValuationDoc = serde_json::from_str(doc).unwrap();
        assert_eq!(
            parsed.into_spec(Some(2)).unwrap(),
            ValuationSpec::sm(2, "AB", "4").unwrap()
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_valuation() -> impl Strategy<Value = ValuationSpec> {
            prop_oneof![
                prop::collection::vec(0i64..20, 3)
                    .prop_map(|v| ValuationSpec::Additive { values: v.into_iter().map(Money::from_integer).collect() }),
                (1u32..8, 0i64..20).prop_map(|(mask, v)| ValuationSpec::single_minded(
                    Bundle::from_mask(3, mask),
                    Money::from_integer(v)
                )),
                // Monotone explicit: max over contained "atoms".
                prop::collection::vec(0i64..10, 8).prop_map(|atoms| {
                    let table = (0..8u32)
                        .map(|mask| {
                            if mask == 0 {
                                return Money::zero();
                            }
                            let best = (1..8u32)
                                .filter(|sub| sub & !mask == 0)
                                .map(|sub| atoms[sub as usize])
                                .max()
                                .unwrap();
                            Money::from_integer(best)
                        })
                        .collect();
                    ValuationSpec::Explicit { table }
                }),
            ]
        }

        proptest! {
            #[test]
            fn marginals_nonnegative(v in arb_valuation(), mask in 0u32..8, item in 0usize..3) {
                let s = Bundle::from_mask(3, mask);
                prop_assume!(!s.contains(item));
                prop_assert!(v.validate().passed());
                let mv = v.marginal_value(s, item).unwrap();
                prop_assert!(!mv.is_negative());
                if let ValuationSpec::Additive { values } = &v {
                    prop_assert_eq!(&mv, &values[item]);
                }
            }

            #[test]
            fn minimal_bundle_characterization(v in arb_valuation()) {
                let minimal = v.minimal_bundles();
                for s in Bundle::all(3).filter(|s| !s.is_empty()) {
                    let vs = v.value_of(s);
                    let proper = s.subsets().filter(|x| *x != s);
                    if minimal.contains(&s) {
                        for sub in proper {
                            prop_assert!(v.value_of(sub) < vs);
                        }
                    } else {
                        let mut proper = proper;
                        prop_assert!(proper.any(|sub| v.value_of(sub) == vs));
                    }
                }
            }
        }
    }
}
