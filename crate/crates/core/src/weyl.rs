//! Normal-ordered arithmetic in the Weyl superalgebra on even pairs
//! `(x_mu, d_mu)` and odd pairs `(xi_a, q_a)`.
//!
//! Defining relations: `[d_mu, x_nu] = delta`, `[q_a, xi_b] = delta` (an
//! anticommutator, both being odd); every other pair supercommutes.
//! Monomials are kept in the order `x < xi < d < q` with ascending indices
//! inside each block. Elements are truncated in the derivative-like degree
//! `|d| + |q|`.
//!
//! Indices in this API are 0-based. Rendering and serialization use the
//! 1-based names `x1`, `xi1`, `d1`, `q1`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{parse_rational, Rational};

/// Largest supported count of odd pairs (Grassmann sets are bitmasks).
pub const MAX_ODD: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("invalid signature (n={n}, m={m}): need n + m >= 1 and m <= {MAX_ODD}")]
    InvalidSignature { n: usize, m: usize },
    #[error("signature mismatch: {0} vs {1}")]
    SignatureMismatch(Signature, Signature),
    #[error("truncation mismatch: {0} vs {1}")]
    TruncationMismatch(usize, usize),
    #[error("generator index {index} out of range for {dim} generators")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("term exceeds truncation order {0}")]
    ExceedsTruncation(usize),
    #[error("malformed element: {0}")]
    Malformed(String),
}

/// Counts of even pairs `(x, d)` and odd pairs `(xi, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    n: usize,
    m: usize,
}

impl Signature {
    pub fn new(n: usize, m: usize) -> Result<Self, KernelError> {
        if n + m == 0 || m > MAX_ODD {
            return Err(KernelError::InvalidSignature { n, m });
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of coordinate generators `z_A` (`x` then `xi`).
    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    /// Parity of the generator pair `A`: even for `A < n`.
    pub fn parity(&self, index: usize) -> u8 {
        u8::from(index >= self.n)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}|{})", self.n, self.m)
    }
}

/// `x^xexp xi^xi d^dexp q^q` in normal order. Odd sets are bitmasks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    xexp: Vec<u32>,
    xi: u64,
    dexp: Vec<u32>,
    q: u64,
}

fn bit_indices(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

fn mask_of(indices: &[usize], m: usize) -> Result<u64, KernelError> {
    let mut mask = 0u64;
    let mut last = None;
    for &i in indices {
        if i >= m {
            return Err(KernelError::IndexOutOfRange { index: i, dim: m });
        }
        if last.is_some_and(|l| l >= i) {
            return Err(KernelError::Malformed(
                "odd index list must be strictly increasing".into(),
            ));
        }
        last = Some(i);
        mask |= 1 << i;
    }
    Ok(mask)
}

// Number of pairs (a in left, b in right) with b < a: the transpositions
// needed to sort the concatenation left ++ right.
fn crossing_count(left: u64, right: u64) -> u32 {
    bit_indices(right)
        .map(|b| (left >> b >> 1).count_ones())
        .sum()
}

impl Monomial {
    pub fn one(sig: Signature) -> Self {
        Self {
            xexp: vec![0; sig.n],
            xi: 0,
            dexp: vec![0; sig.n],
            q: 0,
        }
    }

    /// Builds a monomial from exponent vectors and increasing odd index
    /// lists.
    pub fn new(
        sig: Signature,
        xexp: Vec<u32>,
        xi: &[usize],
        dexp: Vec<u32>,
        q: &[usize],
    ) -> Result<Self, KernelError> {
        if xexp.len() != sig.n || dexp.len() != sig.n {
            return Err(KernelError::Malformed(format!(
                "exponent vectors must have length {}",
                sig.n
            )));
        }
        Ok(Self {
            xexp,
            xi: mask_of(xi, sig.m)?,
            dexp,
            q: mask_of(q, sig.m)?,
        })
    }

    /// The coordinate generator `z_A` (`x_A` for `A < n`, else `xi_{A-n}`).
    pub fn z(sig: Signature, index: usize) -> Result<Self, KernelError> {
        let mut mono = Self::one(sig);
        if index < sig.n {
            mono.xexp[index] = 1;
        } else if index < sig.dim() {
            mono.xi = 1 << (index - sig.n);
        } else {
            return Err(KernelError::IndexOutOfRange {
                index,
                dim: sig.dim(),
            });
        }
        Ok(mono)
    }

    /// The derivative-like generator `D_A` (`d_A` for `A < n`, else
    /// `q_{A-n}`).
    pub fn d(sig: Signature, index: usize) -> Result<Self, KernelError> {
        let mut mono = Self::one(sig);
        if index < sig.n {
            mono.dexp[index] = 1;
        } else if index < sig.dim() {
            mono.q = 1 << (index - sig.n);
        } else {
            return Err(KernelError::IndexOutOfRange {
                index,
                dim: sig.dim(),
            });
        }
        Ok(mono)
    }

    pub fn xexp(&self) -> &[u32] {
        &self.xexp
    }

    pub fn dexp(&self) -> &[u32] {
        &self.dexp
    }

    pub fn xi_indices(&self) -> Vec<usize> {
        bit_indices(self.xi).collect()
    }

    pub fn q_indices(&self) -> Vec<usize> {
        bit_indices(self.q).collect()
    }

    pub fn parity(&self) -> u8 {
        ((self.xi.count_ones() + self.q.count_ones()) % 2) as u8
    }

    /// Total degree in `d` and `q`.
    pub fn d_degree(&self) -> usize {
        self.dexp.iter().sum::<u32>() as usize + self.q.count_ones() as usize
    }

    /// Total degree in `x` and `xi`.
    pub fn z_degree(&self) -> usize {
        self.xexp.iter().sum::<u32>() as usize + self.xi.count_ones() as usize
    }

    pub fn is_d_only(&self) -> bool {
        self.xi == 0 && self.xexp.iter().all(|&e| e == 0)
    }

    fn word<'a>(exps: &'a [u32], odd: u64) -> impl Iterator<Item = usize> + 'a {
        let n = exps.len();
        exps.iter()
            .enumerate()
            .flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize))
            .chain(bit_indices(odd).map(move |a| n + a))
    }
}

impl Ord for Monomial {
    /// Coordinate word, then derivative degree, then derivative word; words
    /// compare lexicographically as index sequences with multiplicity.
    fn cmp(&self, other: &Self) -> Ordering {
        Self::word(&self.xexp, self.xi)
            .cmp(Self::word(&other.xexp, other.xi))
            .then_with(|| self.d_degree().cmp(&other.d_degree()))
            .then_with(|| Self::word(&self.dexp, self.q).cmp(Self::word(&other.dexp, other.q)))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Odd part of q^B xi^C in normal order: signed list of (xi set, q set).
fn reorder_odd(q_left: u64, xi_right: u64) -> Vec<(bool, u64, u64)> {
    let mut state = vec![(false, xi_right, 0u64)];
    // Peel q factors off from the right (highest index first).
    for b in bit_indices(q_left).collect::<Vec<_>>().into_iter().rev() {
        let bit = 1u64 << b;
        let mut next = Vec::with_capacity(state.len() * 2);
        for (neg, xs, qs) in state {
            if xs & bit != 0 {
                // q_b xi_b = 1 - xi_b q_b; contract after moving past the
                // xi factors below b.
                let pos = (xs & (bit - 1)).count_ones();
                next.push((neg ^ (pos % 2 == 1), xs & !bit, qs));
            }
            // Pass q_b through the whole xi block; qs only holds indices
            // above b, so it joins the q block in front without a sign.
            let pass = xs.count_ones() % 2 == 1;
            next.push((neg ^ pass, xs, qs | bit));
        }
        state = next;
    }
    state
}

fn falling_factorial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i))
}

fn binomial(n: u32, k: u32) -> BigInt {
    falling_factorial(n, k) / falling_factorial(k, k)
}

/// Normal-ordered product `a * b` with terms of derivative degree above
/// `trunc` dropped. Returns signed terms, possibly with repeated monomials.
pub fn mono_mul(a: &Monomial, b: &Monomial, trunc: usize) -> Vec<(Monomial, BigInt)> {
    let n = a.xexp.len();
    let a_d: u32 = a.dexp.iter().sum();
    let b_x: u32 = b.xexp.iter().sum();
    let max_contract = a_d.min(b_x) as usize + (a.q.count_ones().min(b.xi.count_ones())) as usize;
    if a.d_degree() + b.d_degree() > trunc + max_contract {
        return Vec::new();
    }

    // d^beta x^gamma = sum_k prod_mu C(beta,k) gamma!/(gamma-k)! x^{gamma-k} d^{beta-k}
    let limits: Vec<u32> = (0..n).map(|i| a.dexp[i].min(b.xexp[i])).collect();
    let mut leibniz: Vec<(Vec<u32>, BigInt)> = Vec::new();
    let mut k = vec![0u32; n];
    loop {
        let coeff = (0..n).fold(BigInt::one(), |acc, i| {
            if k[i] == 0 {
                acc
            } else {
                acc * binomial(a.dexp[i], k[i]) * falling_factorial(b.xexp[i], k[i])
            }
        });
        leibniz.push((k.clone(), coeff));
        // odometer over 0..=limits
        let mut i = 0;
        while i < n {
            if k[i] < limits[i] {
                k[i] += 1;
                break;
            }
            k[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }

    let odd = reorder_odd(a.q, b.xi);
    let b_q = b.q;
    let b_d: usize = b.dexp.iter().sum::<u32>() as usize;

    let mut out = Vec::new();
    for (neg, xs, qs) in odd {
        if a.xi & xs != 0 || qs & b_q != 0 {
            continue;
        }
        let sign = neg ^ (crossing_count(a.xi, xs) % 2 == 1) ^ (crossing_count(qs, b_q) % 2 == 1);
        let q_deg = (qs | b_q).count_ones() as usize;
        for (k, coeff) in &leibniz {
            let k_sum: u32 = k.iter().sum();
            let d_deg = (a_d - k_sum) as usize + b_d + q_deg;
            if d_deg > trunc {
                continue;
            }
            let mono = Monomial {
                xexp: (0..n).map(|i| a.xexp[i] + b.xexp[i] - k[i]).collect(),
                xi: a.xi | xs,
                dexp: (0..n).map(|i| a.dexp[i] - k[i] + b.dexp[i]).collect(),
                q: qs | b_q,
            };
            out.push((mono, if sign { -coeff.clone() } else { coeff.clone() }));
        }
    }
    out
}

/// A normal-ordered element: a finite sum of monomials with nonzero
/// rational coefficients and derivative degree at most `trunc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    sig: Signature,
    trunc: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Element {
    pub fn zero(sig: Signature, trunc: usize) -> Self {
        Self {
            sig,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(sig: Signature, trunc: usize) -> Self {
        Self::from_monomial(sig, trunc, Monomial::one(sig), Rational::one())
    }

    pub fn scalar(sig: Signature, trunc: usize, c: Rational) -> Self {
        Self::from_monomial(sig, trunc, Monomial::one(sig), c)
    }

    /// `c * mono`, or zero if `mono` lies above the truncation.
    pub fn from_monomial(sig: Signature, trunc: usize, mono: Monomial, c: Rational) -> Self {
        let mut e = Self::zero(sig, trunc);
        if !c.is_zero() && mono.d_degree() <= trunc {
            e.terms.insert(mono, c);
        }
        e
    }

    /// Coordinate generator `z_A`.
    pub fn z(sig: Signature, trunc: usize, index: usize) -> Result<Self, KernelError> {
        Ok(Self::from_monomial(
            sig,
            trunc,
            Monomial::z(sig, index)?,
            Rational::one(),
        ))
    }

    /// Derivative-like generator `D_A`.
    pub fn d(sig: Signature, trunc: usize, index: usize) -> Result<Self, KernelError> {
        Ok(Self::from_monomial(
            sig,
            trunc,
            Monomial::d(sig, index)?,
            Rational::one(),
        ))
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn truncation(&self) -> usize {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in rendering order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mono: &Monomial) -> Rational {
        self.terms.get(mono).cloned().unwrap_or_else(Rational::zero)
    }

    /// Largest derivative degree present; `None` for zero.
    pub fn max_d_degree(&self) -> Option<usize> {
        self.terms.keys().map(Monomial::d_degree).max()
    }

    /// Smallest derivative degree present; `None` for zero.
    pub fn min_d_degree(&self) -> Option<usize> {
        self.terms.keys().map(Monomial::d_degree).min()
    }

    /// Whether every term lies in the subalgebra generated by `d` and `q`.
    pub fn is_d_only(&self) -> bool {
        self.terms.keys().all(Monomial::is_d_only)
    }

    fn filtered(&self, keep: impl Fn(&Monomial) -> bool) -> Self {
        Self {
            sig: self.sig,
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Component of derivative degree exactly `degree`.
    pub fn d_degree_part(&self, degree: usize) -> Self {
        self.filtered(|m| m.d_degree() == degree)
    }

    /// `(even, odd)` parity components.
    pub fn parity_parts(&self) -> (Self, Self) {
        (
            self.filtered(|m| m.parity() == 0),
            self.filtered(|m| m.parity() == 1),
        )
    }

    /// The parity if the element is homogeneous (zero counts as even).
    pub fn parity(&self) -> Option<u8> {
        let mut parities = self.terms.keys().map(Monomial::parity);
        match parities.next() {
            None => Some(0),
            Some(p) => parities.all(|q| q == p).then_some(p),
        }
    }

    /// Drops every term of derivative degree above `trunc`; the result
    /// carries truncation `trunc`.
    pub fn truncate(&self, trunc: usize) -> Self {
        let mut e = self.filtered(|m| m.d_degree() <= trunc);
        e.trunc = trunc;
        e
    }

    fn check_compatible(&self, other: &Self) -> Result<(), KernelError> {
        if self.sig != other.sig {
            return Err(KernelError::SignatureMismatch(self.sig, other.sig));
        }
        if self.trunc != other.trunc {
            return Err(KernelError::TruncationMismatch(self.trunc, other.trunc));
        }
        Ok(())
    }

    fn add_term(&mut self, mono: Monomial, c: Rational) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Self, c: &Rational) -> Result<(), KernelError> {
        self.check_compatible(other)?;
        if c.is_zero() {
            return Ok(());
        }
        for (m, v) in &other.terms {
            self.add_term(m.clone(), v * c);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, KernelError> {
        let mut out = self.clone();
        out.add_scaled(other, &Rational::one())?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, KernelError> {
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one())?;
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.sig, self.trunc);
        }
        Self {
            sig: self.sig,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    /// Bilinear extension of [`mono_mul`], truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self, KernelError> {
        self.mul_to(other, self.trunc)
    }

    /// Product of two elements of equal truncation, keeping only derivative
    /// degrees up to `trunc`; the result carries truncation `trunc`.
    pub fn mul_to(&self, other: &Self, trunc: usize) -> Result<Self, KernelError> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.sig, trunc);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let products = mono_mul(ma, mb, trunc);
                if products.is_empty() {
                    continue;
                }
                let c = ca * cb;
                for (m, k) in products {
                    out.add_term(m, &c * Rational::from_integer(k));
                }
            }
        }
        Ok(out)
    }

    /// `[a, b] = ab - (-1)^{|a||b|} ba`, extended bilinearly over parity
    /// components: `ab - ba + 2 b_odd a_odd`.
    pub fn supercommutator(&self, other: &Self) -> Result<Self, KernelError> {
        self.supercommutator_to(other, self.trunc)
    }

    /// [`Self::supercommutator`] keeping only derivative degrees up to
    /// `trunc`.
    pub fn supercommutator_to(&self, other: &Self, trunc: usize) -> Result<Self, KernelError> {
        self.check_compatible(other)?;
        let mut out = self.mul_to(other, trunc)?;
        out.add_scaled(&other.mul_to(self, trunc)?, &-Rational::one())?;
        let (_, a_odd) = self.parity_parts();
        let (_, b_odd) = other.parity_parts();
        if !a_odd.is_zero() && !b_odd.is_zero() {
            out.add_scaled(
                &b_odd.mul_to(&a_odd, trunc)?,
                &Rational::from_integer(2.into()),
            )?;
        }
        Ok(out)
    }

    /// `[self, z_A]`.
    pub fn graded_derivative(&self, index: usize) -> Result<Self, KernelError> {
        let z = Self::z(self.sig, self.trunc, index)?;
        self.supercommutator(&z)
    }

    /// Plain-text rendering, e.g. `x1 + 1/2*x1*d2 - 1/12*xi1*q1`.
    pub fn render(&self) -> String {
        self.to_string()
    }

    /// Parses the plain-text rendering. Factors may appear in any order;
    /// they are multiplied through the kernel.
    pub fn parse(sig: Signature, trunc: usize, text: &str) -> Result<Self, KernelError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(KernelError::Malformed("empty expression".into()));
        }
        let mut result = Self::zero(sig, trunc);
        let mut start = 0;
        let bytes = compact.as_bytes();
        let mut pieces = Vec::new();
        for i in 1..=bytes.len() {
            if i == bytes.len() || ((bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^')
            {
                pieces.push(&compact[start..i]);
                start = i;
            }
        }
        for piece in pieces {
            let (negative, body) = match piece.as_bytes()[0] {
                b'-' => (true, &piece[1..]),
                b'+' => (false, &piece[1..]),
                _ => (false, piece),
            };
            if body.is_empty() {
                return Err(KernelError::Malformed(format!("dangling sign in {text:?}")));
            }
            let mut term = Self::one(sig, trunc);
            for factor in body.split('*') {
                term = term.mul(&parse_factor(sig, trunc, factor)?)?;
            }
            result.add_scaled(
                &term,
                &if negative {
                    -Rational::one()
                } else {
                    Rational::one()
                },
            )?;
        }
        Ok(result)
    }

    /// Structured form: one `[coefficient, xexp, xiset, dexp, qset]` record
    /// per term, odd sets 1-based.
    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(m, c)| {
                TermRecord(
                    c.to_string(),
                    m.xexp.clone(),
                    bit_indices(m.xi).map(|i| i + 1).collect(),
                    m.dexp.clone(),
                    bit_indices(m.q).map(|i| i + 1).collect(),
                )
            })
            .collect()
    }

    pub fn from_records(
        sig: Signature,
        trunc: usize,
        records: &[TermRecord],
    ) -> Result<Self, KernelError> {
        let mut e = Self::zero(sig, trunc);
        for TermRecord(coeff, xexp, xi, dexp, q) in records {
            let c = parse_rational(coeff)
                .ok_or_else(|| KernelError::Malformed(format!("bad coefficient {coeff:?}")))?;
            if c.is_zero() {
                return Err(KernelError::Malformed("zero coefficient stored".into()));
            }
            let to_zero_based = |v: &[usize]| -> Result<Vec<usize>, KernelError> {
                v.iter()
                    .map(|&i| {
                        i.checked_sub(1)
                            .ok_or_else(|| KernelError::Malformed("odd indices are 1-based".into()))
                    })
                    .collect()
            };
            let mono = Monomial::new(
                sig,
                xexp.clone(),
                &to_zero_based(xi)?,
                dexp.clone(),
                &to_zero_based(q)?,
            )?;
            if mono.d_degree() > trunc {
                return Err(KernelError::ExceedsTruncation(trunc));
            }
            if e.terms.insert(mono, c).is_some() {
                return Err(KernelError::Malformed("duplicate term".into()));
            }
        }
        Ok(e)
    }
}

/// Serialized term: `[coefficient, xexp, xiset, dexp, qset]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord(
    pub String,
    pub Vec<u32>,
    pub Vec<usize>,
    pub Vec<u32>,
    pub Vec<usize>,
);

fn parse_factor(sig: Signature, trunc: usize, factor: &str) -> Result<Element, KernelError> {
    let malformed = || KernelError::Malformed(format!("bad factor {factor:?}"));
    if factor.starts_with(|c: char| c.is_ascii_digit()) {
        let c = parse_rational(factor).ok_or_else(malformed)?;
        return Ok(Element::scalar(sig, trunc, c));
    }
    let (base, power) = match factor.split_once('^') {
        Some((b, p)) => (b, p.parse::<u32>().map_err(|_| malformed())?),
        None => (factor, 1),
    };
    let split = base
        .find(|c: char| c.is_ascii_digit())
        .ok_or_else(malformed)?;
    let (name, index) = base.split_at(split);
    let index: usize = index.parse().map_err(|_| malformed())?;
    let index = index.checked_sub(1).ok_or_else(malformed)?;
    let generator = match name {
        "x" if index < sig.n => Element::z(sig, trunc, index)?,
        "d" if index < sig.n => Element::d(sig, trunc, index)?,
        "xi" if index < sig.m => Element::z(sig, trunc, sig.n + index)?,
        "q" if index < sig.m => Element::d(sig, trunc, sig.n + index)?,
        "x" | "d" | "xi" | "q" => {
            return Err(KernelError::IndexOutOfRange {
                index,
                dim: sig.dim(),
            })
        }
        _ => return Err(malformed()),
    };
    let mut out = Element::one(sig, trunc);
    for _ in 0..power {
        out = out.mul(&generator)?;
    }
    Ok(out)
}

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial) -> fmt::Result {
    let mut first = true;
    let mut put = |f: &mut fmt::Formatter<'_>, name: &str, i: usize, e: u32| -> fmt::Result {
        if !first {
            f.write_str("*")?;
        }
        first = false;
        if e == 1 {
            write!(f, "{name}{}", i + 1)
        } else {
            write!(f, "{name}{}^{e}", i + 1)
        }
    };
    for (i, &e) in m.xexp.iter().enumerate().filter(|(_, &e)| e > 0) {
        put(f, "x", i, e)?;
    }
    for i in bit_indices(m.xi) {
        put(f, "xi", i, 1)?;
    }
    for (i, &e) in m.dexp.iter().enumerate().filter(|(_, &e)| e > 0) {
        put(f, "d", i, e)?;
    }
    for i in bit_indices(m.q) {
        put(f, "q", i, 1)?;
    }
    Ok(())
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let abs = c.abs();
            let constant = m.z_degree() == 0 && m.d_degree() == 0;
            if constant {
                write!(f, "{abs}")?;
            } else {
                if !abs.is_one() {
                    write!(f, "{abs}*")?;
                }
                write_monomial(f, m)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{int, rational};
    use proptest::prelude::*;

    fn sig(n: usize, m: usize) -> Signature {
        Signature::new(n, m).unwrap()
    }

    fn el(s: Signature, n: usize, text: &str) -> Element {
        Element::parse(s, n, text).unwrap()
    }

    #[test]
    fn rejects_bad_signature() {
        assert!(Signature::new(0, 0).is_err());
        assert!(Signature::new(0, 65).is_err());
        assert!(Signature::new(0, 1).is_ok());
    }

    #[test]
    fn defining_relations() {
        let s = sig(2, 1);
        let d1x1 = el(s, 4, "d1").mul(&el(s, 4, "x1")).unwrap();
        assert_eq!(d1x1.render(), "1 + x1*d1");
        let q1xi1 = el(s, 4, "q1").mul(&el(s, 4, "xi1")).unwrap();
        assert_eq!(q1xi1, el(s, 4, "1 - xi1*q1"));
        let p = el(s, 4, "xi1*q1");
        assert_eq!(p.mul(&p).unwrap(), p);
    }

    #[test]
    fn products() {
        let s = sig(2, 1);
        let e = el(s, 4, "x1 + d1");
        assert_eq!(e.mul(&Element::one(s, 4)).unwrap(), e);
        let h = el(s, 4, "x1*d1");
        assert_eq!(h.mul(&h).unwrap(), el(s, 4, "x1^2*d1^2 + x1*d1"));
        let xi = el(s, 4, "xi1");
        assert!(xi.mul(&xi).unwrap().is_zero());
    }

    #[test]
    fn leibniz_higher_power() {
        // d^2 x^2 = x^2 d^2 + 4 x d + 2
        let s = sig(1, 0);
        let p = el(s, 5, "d1^2").mul(&el(s, 5, "x1^2")).unwrap();
        assert_eq!(p, el(s, 5, "x1^2*d1^2 + 4*x1*d1 + 2"));
    }

    #[test]
    fn odd_signs() {
        let s = sig(0, 2);
        // xi2 xi1 = -xi1 xi2
        assert_eq!(
            el(s, 3, "xi2").mul(&el(s, 3, "xi1")).unwrap(),
            el(s, 3, "-xi1*xi2")
        );
        // q1 (xi1 xi2) = xi2 - xi1 q1 xi2 = xi2 + xi1 xi2 q1
        let lhs = el(s, 3, "q1").mul(&el(s, 3, "xi1*xi2")).unwrap();
        assert_eq!(lhs.render(), "xi1*xi2*q1 + xi2");
        // q2 (xi1 xi2) = -xi1 q2 xi2 = -xi1 (1 - xi2 q2) = -xi1 + xi1 xi2 q2
        let lhs = el(s, 3, "q2").mul(&el(s, 3, "xi1*xi2")).unwrap();
        assert_eq!(lhs.render(), "-xi1 + xi1*xi2*q2");
        assert!(el(s, 3, "q1").mul(&el(s, 3, "q1")).unwrap().is_zero());
        assert_eq!(el(s, 3, "q2*q1"), el(s, 3, "-q1*q2"));
    }

    #[test]
    fn supercommutators() {
        let s = sig(2, 1);
        let one = Element::one(s, 3);
        assert_eq!(
            el(s, 3, "d1").supercommutator(&el(s, 3, "x1")).unwrap(),
            one
        );
        assert_eq!(
            el(s, 3, "q1").supercommutator(&el(s, 3, "xi1")).unwrap(),
            one
        );
        assert!(el(s, 3, "x1")
            .supercommutator(&el(s, 3, "x2"))
            .unwrap()
            .is_zero());
        // both odd: xi1 q1 d2 + q1 d2 xi1 = d2
        assert_eq!(
            el(s, 3, "xi1").supercommutator(&el(s, 3, "q1*d2")).unwrap(),
            el(s, 3, "d2")
        );
    }

    #[test]
    fn graded_derivatives() {
        let s = sig(2, 1);
        assert_eq!(
            el(s, 3, "d1*d2").graded_derivative(0).unwrap(),
            el(s, 3, "d2")
        );
        assert_eq!(
            el(s, 3, "q1").graded_derivative(2).unwrap(),
            Element::one(s, 3)
        );
        assert!(Element::one(s, 3).graded_derivative(1).unwrap().is_zero());
        assert!(matches!(
            Element::one(s, 3).graded_derivative(3),
            Err(KernelError::IndexOutOfRange { index: 3, dim: 3 })
        ));
    }

    #[test]
    fn truncation() {
        let s = sig(2, 1);
        let e = el(s, 4, "x1 + x1*d2 + x1*d2^2");
        assert_eq!(e.truncate(1), el(s, 1, "x1 + x1*d2"));
        assert_eq!(e.truncate(7).truncate(4), e);
        assert!(el(s, 4, "xi1*q1*d1").truncate(1).is_zero());
        // products above the order are dropped
        assert!(el(s, 1, "d1").mul(&el(s, 1, "d2")).unwrap().is_zero());
    }

    #[test]
    fn mismatches_are_errors() {
        let a = Element::one(sig(1, 0), 2);
        let b = Element::one(sig(2, 0), 2);
        let c = Element::one(sig(1, 0), 3);
        assert!(matches!(a.mul(&b), Err(KernelError::SignatureMismatch(..))));
        assert!(matches!(
            a.mul(&c),
            Err(KernelError::TruncationMismatch(2, 3))
        ));
    }

    #[test]
    fn rendering_format() {
        let s = sig(2, 1);
        let e = Element::from_monomial(
            s,
            3,
            Monomial::new(s, vec![1, 0], &[], vec![0, 2], &[]).unwrap(),
            rational(1, 12),
        );
        assert_eq!(e.render(), "1/12*x1*d2^2");
        assert_eq!(Element::zero(s, 3).render(), "0");
        assert_eq!(Element::scalar(s, 3, int(-3)).render(), "-3");
        let recs = e.to_records();
        assert_eq!(
            serde_json::to_string(&recs).unwrap(),
            r#"[["1/12",[1,0],[],[0,2],[]]]"#
        );
    }

    #[test]
    fn records_reject_malformed() {
        let s = sig(1, 1);
        let bad = |r: TermRecord| Element::from_records(s, 2, &[r]).is_err();
        assert!(bad(TermRecord(
            "0".into(),
            vec![0],
            vec![],
            vec![0],
            vec![]
        )));
        assert!(bad(TermRecord(
            "1".into(),
            vec![0, 0],
            vec![],
            vec![0],
            vec![]
        )));
        assert!(bad(TermRecord(
            "1".into(),
            vec![0],
            vec![2],
            vec![0],
            vec![]
        )));
        assert!(bad(TermRecord(
            "1".into(),
            vec![0],
            vec![],
            vec![3],
            vec![]
        )));
        assert!(bad(TermRecord(
            "1/0".into(),
            vec![0],
            vec![],
            vec![0],
            vec![]
        )));
    }

    // Random elements over (2|2) with small degrees.
    fn arb_monomial() -> impl Strategy<Value = Monomial> {
        (
            prop::collection::vec(0u32..=2, 2),
            0u64..4,
            prop::collection::vec(0u32..=2, 2),
            0u64..4,
        )
            .prop_map(|(xexp, xi, dexp, q)| Monomial { xexp, xi, dexp, q })
    }

    fn arb_element(trunc: usize) -> impl Strategy<Value = Element> {
        prop::collection::vec((arb_monomial(), -3i64..=3, 1i64..=2), 0..4).prop_map(move |terms| {
            let s = sig(2, 2);
            let mut e = Element::zero(s, trunc);
            for (m, n, d) in terms {
                e.add_scaled(
                    &Element::from_monomial(s, trunc, m, rational(n, d)),
                    &int(1),
                )
                .unwrap();
            }
            e
        })
    }

    fn arb_homogeneous(trunc: usize) -> impl Strategy<Value = Element> {
        (arb_element(trunc), any::<bool>()).prop_map(|(e, odd)| {
            let (even, odd_part) = e.parity_parts();
            if odd {
                odd_part
            } else {
                even
            }
        })
    }

    // Large enough that products of the sampled elements are never cut.
    const WIDE: usize = 40;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn associative(a in arb_element(WIDE), b in arb_element(WIDE), c in arb_element(WIDE)) {
            let lhs = a.mul(&b).unwrap().mul(&c).unwrap();
            let rhs = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        // Dropped high-degree terms can come back down by contracting with
        // coordinates on the right, so truncated products agree with the
        // exact product only below the order minus those coordinate degrees.
        #[test]
        fn associative_modulo_truncation(a in arb_element(WIDE), b in arb_element(WIDE), c in arb_element(WIDE)) {
            const T: usize = 8;
            let zmax = |e: &Element| e.terms().map(|(m, _)| m.z_degree()).max().unwrap_or(0);
            let lost = zmax(&b) + zmax(&c);
            prop_assume!(lost <= T);
            let exact = a.mul(&b).unwrap().mul(&c).unwrap().truncate(T - lost);
            let (at, bt, ct) = (a.truncate(T), b.truncate(T), c.truncate(T));
            let lhs = at.mul(&bt).unwrap().mul(&ct).unwrap().truncate(T - lost);
            let rhs = at.mul(&bt.mul(&ct).unwrap()).unwrap().truncate(T - lost);
            prop_assert_eq!(&lhs, &exact);
            prop_assert_eq!(&rhs, &exact);
        }

        #[test]
        fn graded_antisymmetry(a in arb_homogeneous(WIDE), b in arb_homogeneous(WIDE)) {
            let pa = a.parity().unwrap();
            let pb = b.parity().unwrap();
            let ab = a.supercommutator(&b).unwrap();
            let ba = b.supercommutator(&a).unwrap();
            let sign = if pa * pb == 1 { int(1) } else { int(-1) };
            prop_assert_eq!(ab, ba.scale(&sign));
        }

        #[test]
        fn graded_jacobi(a in arb_homogeneous(WIDE), b in arb_homogeneous(WIDE), c in arb_homogeneous(WIDE)) {
            let (pa, pb, pc) = (a.parity().unwrap(), b.parity().unwrap(), c.parity().unwrap());
            let sign = |p: u8| if p.is_multiple_of(2) { int(1) } else { int(-1) };
            let t1 = a.supercommutator(&b.supercommutator(&c).unwrap()).unwrap().scale(&sign(pa * pc));
            let t2 = b.supercommutator(&c.supercommutator(&a).unwrap()).unwrap().scale(&sign(pb * pa));
            let t3 = c.supercommutator(&a.supercommutator(&b).unwrap()).unwrap().scale(&sign(pc * pb));
            prop_assert!(t1.add(&t2).unwrap().add(&t3).unwrap().is_zero());
        }

        #[test]
        fn graded_derivative_leibniz_on_d_subalgebra(
            a in arb_element(WIDE), b in arb_element(WIDE), idx in 0usize..4
        ) {
            let only_d = |e: Element| {
                let mut out = Element::zero(e.signature(), e.truncation());
                for (m, c) in e.terms() {
                    if m.is_d_only() {
                        out.add_scaled(&Element::from_monomial(e.signature(), e.truncation(), m.clone(), c.clone()), &int(1)).unwrap();
                    }
                }
                out
            };
            let (even, odd) = only_d(a).parity_parts();
            let (a, pa) = if odd.is_zero() { (even, 0) } else { (odd, 1) };
            let b = only_d(b);
            let pz = u8::from(idx >= 2);
            let sign = if pa * pz == 1 { int(-1) } else { int(1) };
            let lhs = a.mul(&b).unwrap().graded_derivative(idx).unwrap();
            let rhs = a.graded_derivative(idx).unwrap().mul(&b).unwrap()
                .add(&a.mul(&b.graded_derivative(idx).unwrap()).unwrap().scale(&sign)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn d_subalgebra_supercommutes(a in arb_element(WIDE), b in arb_element(WIDE)) {
            let keep = |e: &Element| {
                let mut out = Element::zero(e.signature(), e.truncation());
                for (m, c) in e.terms() {
                    if m.is_d_only() {
                        out.add_scaled(&Element::from_monomial(e.signature(), e.truncation(), m.clone(), c.clone()), &int(1)).unwrap();
                    }
                }
                out
            };
            prop_assert!(keep(&a).supercommutator(&keep(&b)).unwrap().is_zero());
        }

        #[test]
        fn text_and_records_roundtrip(a in arb_element(6)) {
            let s = a.signature();
            let text = a.render();
            let back = Element::parse(s, 6, &text).unwrap();
            prop_assert_eq!(&back, &a);
            prop_assert_eq!(back.render(), text);
            let json = serde_json::to_string(&a.to_records()).unwrap();
            let recs: Vec<TermRecord> = serde_json::from_str(&json).unwrap();
            let again = Element::from_records(s, 6, &recs).unwrap();
            prop_assert_eq!(serde_json::to_string(&again.to_records()).unwrap(), json);
        }
    }
}
