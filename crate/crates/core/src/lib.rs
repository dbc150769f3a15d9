//! Exact Weyl realizations of Lie algebras and of Lie superalgebras
//! `g = g0 + g1` with `[g1, g1] = 0`, computed inside a Weyl superalgebra
//! truncated in the derivative-like generators.
//!
//! All arithmetic is over arbitrary-precision rationals. Identities are
//! certified with zero tolerance, order by order.

pub mod cli;
pub mod par;
pub mod realize;
pub mod series;
pub mod structure;
pub mod verify;
pub mod weyl;

pub use num_rational::BigRational as Rational;

pub use realize::{OpMatrix, Realization};
pub use series::{SeriesFn, TruncatedSeries1, TruncatedSeries2};
pub use structure::{AlgebraSpec, FlatStructure};
pub use verify::DefectReport;
pub use weyl::{Element, Monomial, Signature};

use num_bigint::BigInt;

/// `num / den` as an exact rational. Panics on a zero denominator.
pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as an exact rational.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"p/q"` or `"p"` into a reduced rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den == BigInt::from(0) {
        return None;
    }
    Some(Rational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("1/3"), Some(rational(1, 3)));
        assert_eq!(parse_rational("-2/4"), Some(rational(-1, 2)));
        assert_eq!(parse_rational("7"), Some(int(7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(parse_rational("3/-6"), Some(rational(-1, 2)));
    }
}
