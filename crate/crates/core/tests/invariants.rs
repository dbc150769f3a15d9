mod common;

use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use superweyl::realize::{build_ctilde, matrix_series, realization, tensor, OpMatrix};
use superweyl::series::bernoulli_coeffs;
use superweyl::structure::random::{perturb, sparse_lie, valid_lie, valid_super};
use superweyl::structure::{flatten, flatten_unchecked, validate, FlatStructure};
use superweyl::verify::{verify_relations, verify_shift_commutators};
use superweyl::{rational, AlgebraSpec, Element, Rational, SeriesFn};

fn random_spec(seed: u64, max_n: usize, max_m: usize) -> AlgebraSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1 + (seed as usize) % max_n;
    let m = (seed as usize / max_n) % (max_m + 1);
    if m == 0 {
        valid_lie(&mut rng, n, true)
    } else {
        valid_super(&mut rng, n, m, true)
    }
}

fn random_super(seed: u64, max_n: usize, max_m: usize) -> FlatStructure {
    flatten(&random_spec(seed, max_n, max_m)).unwrap()
}

fn identity_like(mat: &OpMatrix) -> OpMatrix {
    OpMatrix::identity(mat.signature(), mat.truncation(), mat.row_parity().to_vec())
}

fn pow(mat: &OpMatrix, k: usize) -> OpMatrix {
    (0..k).fold(identity_like(mat), |acc, _| acc.mul(mat).unwrap())
}

/// `sum_J Ct[A][B][J] M_{JC}` as a `d^2 x d` matrix.
fn structure_times(flat: &FlatStructure, mat: &OpMatrix) -> OpMatrix {
    let d = flat.dim();
    let sig = flat.signature();
    let pairs: Vec<u8> = (0..d * d)
        .map(|i| (flat.parity(i / d) + flat.parity(i % d)) % 2)
        .collect();
    let mut out = OpMatrix::zeros(sig, mat.truncation(), pairs, mat.col_parity().to_vec());
    for row in 0..d * d {
        for c in 0..d {
            let mut acc = Element::zero(sig, mat.truncation());
            for j in 0..d {
                let coeff = flat.ct(row / d, row % d, j);
                if !coeff.is_zero() {
                    acc.add_scaled(mat.get(j, c), &coeff).unwrap();
                }
            }
            out.set(row, c, acc);
        }
    }
    out
}

#[test]
fn structure_transport_through_powers() {
    for seed in 0..12 {
        let flat = random_super(seed, 2, 2);
        let ct = build_ctilde(&flat, 4).unwrap();
        let sum = tensor::left(&ct).add(&tensor::right(&ct)).unwrap();
        for k in 1..=3 {
            let lhs = structure_times(&flat, &pow(&ct, k));
            let rhs = tensor::contract(&pow(&sum, k), &flat).unwrap();
            assert_eq!(lhs, rhs, "seed {seed}, k = {k}");
        }
    }
}

#[test]
fn graded_derivative_transport() {
    const N: usize = 3;
    let b = bernoulli_coeffs(N);
    for seed in 0..10 {
        let flat = random_super(seed, 2, 2);
        let d = flat.dim();
        let ct = build_ctilde(&flat, N).unwrap();
        let f = matrix_series(&ct, &b, N).unwrap();
        let left = tensor::left(&ct);
        let sum = left.add(&tensor::right(&ct)).unwrap();
        // (f(L + R) - f(L)) / R = sum_m b_m sum_{k<m} L^k (L + R)^{m-1-k}
        let mut quotient = OpMatrix::zeros(
            ct.signature(),
            N,
            sum.row_parity().to_vec(),
            sum.col_parity().to_vec(),
        );
        for m in 1..=N {
            for k in 0..m {
                let term = pow(&left, k).mul(&pow(&sum, m - 1 - k)).unwrap();
                quotient.add_scaled(&term, &b.coeff(m)).unwrap();
            }
        }
        let rhs = tensor::contract(&quotient, &flat).unwrap();
        for a in 0..d {
            for bi in 0..d {
                for c in 0..d {
                    let lhs = f.get(a, c).graded_derivative(bi).unwrap().truncate(N - 1);
                    assert_eq!(
                        lhs,
                        rhs.get(a * d + bi, c).truncate(N - 1),
                        "seed {seed} ({a},{bi},{c})"
                    );
                }
            }
        }
    }
}

#[test]
fn relations_hold_across_orders() {
    let corpus: Vec<_> = common::lie_corpus(4)
        .into_iter()
        .chain(common::super_corpus(6))
        .collect();
    for entry in &corpus {
        let flat = flatten(&entry.spec).unwrap();
        for n in 2..=5 {
            let r = realization(&flat, n).unwrap();
            let report = verify_relations(&flat, &r).unwrap();
            assert!(report.is_success(), "{} at N={n}", entry.name);
            assert_eq!(report.max_certified_degree, n - 1);
        }
    }
}

#[test]
fn perturbed_constants_break_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    for entry in common::super_corpus(6) {
        let bad = perturb(&mut rng, &entry.spec);
        if validate(&bad).is_valid() {
            continue;
        }
        let flat = flatten_unchecked(&bad).unwrap();
        let r = realization(&flat, 3).unwrap();
        assert!(
            !verify_relations(&flat, &r).unwrap().is_success(),
            "{}",
            entry.name
        );
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn shift_commutators_for_random_specs() {
    for seed in 0..8 {
        let flat = random_super(seed, 3, 2);
        let r = realization(&flat, 3).unwrap();
        assert!(
            verify_shift_commutators(&flat, &r).unwrap().is_success(),
            "seed {seed}"
        );
    }
}

#[test]
fn bottom_left_block_vanishes_for_any_series() {
    for seed in 0..6 {
        let flat = random_super(seed + 3, 3, 2);
        let n = flat.signature().n();
        let d = flat.dim();
        let ct = build_ctilde(&flat, 5).unwrap();
        let e = matrix_series(&ct, &SeriesFn::exp(5), 5).unwrap();
        assert!(e.block(n..d, 0..n).is_zero());
    }
}

fn scale_by_degree(e: &Element, h: &Rational) -> Element {
    let mut out = Element::zero(e.signature(), e.truncation());
    for (mono, c) in e.terms() {
        let factor = (0..mono.d_degree()).fold(Rational::one(), |acc, _| acc * h);
        let term = Element::from_monomial(e.signature(), e.truncation(), mono.clone(), c * factor);
        out.add_scaled(&term, &Rational::one()).unwrap();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn graded_and_flat_jacobi_agree(seed in any::<u64>(), perturbed in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 1 + (seed % 3) as usize;
        let m = ((seed / 3) % 3) as usize;
        let spec = if m == 0 {
            sparse_lie(&mut rng, n.max(3), 0.4)
        } else {
            valid_super(&mut rng, n, m, true)
        };
        let spec = if perturbed { perturb(&mut rng, &spec) } else { spec };
        let graded = validate(&spec).is_valid();
        let flat = flatten_unchecked(&spec).unwrap();
        prop_assert_eq!(graded, flat.jacobi_violation().is_none());
    }

    #[test]
    fn scaling_matches_degree_grading(seed in 0u64..1000, num in -3i64..=3, den in 1i64..=3) {
        prop_assume!(num != 0);
        let h = rational(num, den);
        let spec = random_spec(seed, 3, 2);
        let base = realization(&flatten(&spec).unwrap(), 3).unwrap();
        let scaled = realization(&flatten(&spec.scaled(&h)).unwrap(), 3).unwrap();
        for (z, zs) in base.zhats.iter().zip(&scaled.zhats) {
            prop_assert_eq!(&scale_by_degree(z, &h), zs);
        }
    }
}
