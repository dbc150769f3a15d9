#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use superweyl::structure::random::{perturb, valid_lie, valid_super};
use superweyl::AlgebraSpec;

pub struct Named {
    pub name: String,
    pub spec: AlgebraSpec,
}

fn named(name: impl Into<String>, spec: AlgebraSpec) -> Named {
    Named {
        name: name.into(),
        spec,
    }
}

/// Abelian `n <= 3`, the two-dimensional non-abelian algebra, Heisenberg,
/// and `random` seeded valid Lie algebras of dimension 2 or 3.
pub fn lie_corpus(random: usize) -> Vec<Named> {
    let mut out: Vec<Named> = (1..=3)
        .map(|n| named(format!("abelian({n})"), AlgebraSpec::abelian(n, 0)))
        .collect();
    out.push(named("[X1,X2]=X1", AlgebraSpec::two_dim_nonabelian()));
    out.push(named("heisenberg", AlgebraSpec::heisenberg()));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for i in 0..random {
        let n = 2 + i % 2;
        out.push(named(
            format!("random-lie-{i}(n={n})"),
            valid_lie(&mut rng, n, true),
        ));
    }
    out
}

/// The (1|1) and (2|1) examples plus `random` seeded valid superalgebras
/// with `n <= 3`, `m <= 2` and a nonzero odd action.
pub fn super_corpus(random: usize) -> Vec<Named> {
    let mut out = vec![
        named("(1|1) K111=1", AlgebraSpec::super_1_1()),
        named("(2|1)", AlgebraSpec::super_2_1()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for i in 0..random {
        let n = 1 + i % 3;
        let m = 1 + (i / 3) % 2;
        out.push(named(
            format!("random-super-{i}(n={n},m={m})"),
            valid_super(&mut rng, n, m, true),
        ));
    }
    out
}

/// Valid specs alongside single-entry perturbations of them.
pub fn mixed_validity_corpus(count: usize) -> Vec<AlgebraSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let n = 2 + i % 2;
        let m = (i / 2) % 3;
        let spec = if m == 0 {
            valid_lie(&mut rng, 3, true)
        } else {
            valid_super(&mut rng, n, m, true)
        };
        out.push(if i % 2 == 0 {
            spec
        } else {
            perturb(&mut rng, &spec)
        });
    }
    out
}
