//! Seeded random structure constants for property suites.
//!
//! Entries are drawn from `{0, +-1, +-1/2}` on a sparse pattern and the
//! result is kept only if it satisfies the Jacobi identities.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{validate, AlgebraSpec};
use crate::{int, rational, Rational};

const MAX_ATTEMPTS: usize = 100_000;

fn coefficient<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    [int(1), int(-1), rational(1, 2), rational(-1, 2)]
        .choose(rng)
        .cloned()
        .expect("nonempty")
}

/// Antisymmetric `C` with each `mu < nu` slot filled with probability
/// `density`; `K` zero. Not necessarily valid.
pub fn sparse_lie<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> AlgebraSpec {
    let mut spec = AlgebraSpec::abelian(n, 0);
    for mu in 0..n {
        for nu in mu + 1..n {
            for alpha in 0..n {
                if rng.gen_bool(density) {
                    spec.set_bracket(mu, nu, alpha, coefficient(rng));
                }
            }
        }
    }
    spec
}

fn with_odd(spec: &AlgebraSpec, m: usize) -> AlgebraSpec {
    let mut out = AlgebraSpec::abelian(spec.n(), m);
    for (&[mu, nu, al], v) in spec.c_tensor().nonzero() {
        out.set_c(mu, nu, al, v.clone());
    }
    out
}

/// A valid Lie algebra of dimension `n`, non-abelian if requested (and
/// `n >= 2`).
pub fn valid_lie<R: Rng + ?Sized>(rng: &mut R, n: usize, nonabelian: bool) -> AlgebraSpec {
    let want_bracket = nonabelian && n >= 2;
    for _ in 0..MAX_ATTEMPTS {
        let density = rng.gen_range(0.15..0.5);
        let spec = sparse_lie(rng, n, density);
        if want_bracket && spec.is_abelian() {
            continue;
        }
        if validate(&spec).is_valid() {
            return spec;
        }
    }
    unreachable!("rejection sampling found no valid Lie algebra of dimension {n}")
}

/// A valid `(n|m)` superalgebra. With `odd_action`, `K` is nonzero
/// (requires `n, m >= 1`).
pub fn valid_super<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    m: usize,
    odd_action: bool,
) -> AlgebraSpec {
    let need_k = odd_action && n >= 1 && m >= 1;
    for _ in 0..MAX_ATTEMPTS {
        let base = with_odd(&valid_lie(rng, n, false), m);
        // A handful of K draws per even part.
        for _ in 0..50 {
            let mut spec = base.clone();
            let density = rng.gen_range(0.1..0.4);
            for a in 0..m {
                for nu in 0..n {
                    for b in 0..m {
                        if rng.gen_bool(density) {
                            spec.set_k(a, nu, b, coefficient(rng));
                        }
                    }
                }
            }
            if need_k && spec.k_tensor().is_zero() {
                continue;
            }
            if validate(&spec).is_valid() {
                return spec;
            }
        }
    }
    unreachable!("rejection sampling found no valid ({n}|{m}) superalgebra")
}

/// Adds `+-1/2` or `+-1` to one entry of `C` (keeping antisymmetry) or of
/// `K`. The result is usually, but not always, invalid.
pub fn perturb<R: Rng + ?Sized>(rng: &mut R, spec: &AlgebraSpec) -> AlgebraSpec {
    let mut out = spec.clone();
    let (n, m) = (spec.n(), spec.m());
    let can_c = n >= 2;
    let can_k = n >= 1 && m >= 1;
    let use_c = can_c && (!can_k || rng.gen_bool(0.5));
    if use_c {
        let mu = rng.gen_range(0..n);
        let nu = (mu + rng.gen_range(1..n)) % n;
        let al = rng.gen_range(0..n);
        out.set_bracket(mu, nu, al, spec.c(mu, nu, al) + coefficient(rng));
    } else if can_k {
        let a = rng.gen_range(0..m);
        let nu = rng.gen_range(0..n);
        let b = rng.gen_range(0..m);
        out.set_k(a, nu, b, spec.k(a, nu, b) + coefficient(rng));
    }
    out
}
