#![allow(dead_code)]

use fnpw_core::axioms::TypePool;
use fnpw_core::valuation::{generate, uniform, GeneratorMode};
use fnpw_core::{Bundle, Money, ValuationSpec};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn money(s: &str) -> Money {
    Money::from_decimal(s).unwrap()
}

pub fn sm(m: usize, target: &str, value: &str) -> ValuationSpec {
    ValuationSpec::sm(m, target, value).unwrap()
}

/// A random value in (0, 2] on a grid of 1/1024, so exact ties are rare but
/// numbers stay small.
pub fn grid_value<R: RngCore>(rng: &mut R) -> Money {
    Money::from_ratio(rng.gen_range(1..=2048), 1024)
}

pub fn random_sm<R: RngCore>(m: usize, rng: &mut R) -> ValuationSpec {
    let mask = rng.gen_range(1..(1u32 << m));
    ValuationSpec::single_minded(Bundle::from_mask(m, mask), grid_value(rng))
}

pub fn random_additive<R: RngCore>(m: usize, rng: &mut R) -> ValuationSpec {
    let values = (0..m)
        .map(|_| if rng.gen_bool(0.2) { Money::zero() } else { grid_value(rng) })
        .collect();
    ValuationSpec::additive(values).unwrap()
}

/// Any of the supported random type families for `m` items.
pub fn random_type<R: RngCore>(m: usize, rng: &mut R) -> ValuationSpec {
    let choice = rng.gen_range(0..if m == 2 { 5 } else { 3 });
    match choice {
        0 => random_sm(m, rng),
        1 => random_additive(m, rng),
        2 => generate(GeneratorMode::SingleMinded, m, rng).unwrap(),
        3 => generate(GeneratorMode::Substitutable, m, rng).unwrap(),
        _ => generate(GeneratorMode::Complementary, m, rng).unwrap(),
    }
}

/// A pool of single-minded and additive types.
pub fn random_pool<R: RngCore>(m: usize, singles: usize, additives: usize, rng: &mut R) -> TypePool {
    let mut types = Vec::new();
    while types.len() < singles {
        let t = random_sm(m, rng);
        if !types.contains(&t) {
            types.push(t);
        }
    }
    while types.len() < singles + additives {
        let t = random_additive(m, rng);
        if !types.contains(&t) {
            types.push(t);
        }
    }
    TypePool::new(m, types).unwrap()
}

pub fn uniform_money<R: RngCore>(rng: &mut R) -> Money {
    uniform(rng)
}

pub fn refs(v: &[ValuationSpec]) -> Vec<&ValuationSpec> {
    v.iter().collect()
}
