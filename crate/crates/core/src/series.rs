//! Exact truncated power series and the identities satisfied by the
//! Bernoulli generating function `f(t) = t / (1 - e^{-t})`.

use num_integer::binomial;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("series is not divisible by {0}: nonzero coefficient with no factor of {0}")]
    NotDivisible(&'static str),
    #[error("series with zero constant term has no multiplicative inverse")]
    NotInvertible,
    #[error("truncation order {got} is below the minimum {required}")]
    OrderTooSmall { required: usize, got: usize },
    #[error("operation would leave no known coefficients")]
    PrecisionExhausted,
}

/// Taylor coefficients `coeffs[k]` of an analytic function at zero, known
/// through `t^order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesFn {
    coeffs: Vec<Rational>,
}

impl SeriesFn {
    /// Panics if `coeffs` is empty.
    pub fn new(coeffs: Vec<Rational>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a series needs at least one coefficient"
        );
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `t^k`; zero past the stored order.
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    /// `e^t` through `t^order`.
    pub fn exp(order: usize) -> Self {
        Self::exp_scaled(order, 1)
    }

    /// `e^{-t}` through `t^order`.
    pub fn exp_neg(order: usize) -> Self {
        Self::exp_scaled(order, -1)
    }

    fn exp_scaled(order: usize, sign: i64) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut c = Rational::one();
        for k in 0..=order {
            if k > 0 {
                c = c * int(sign) / int(k as i64);
            }
            coeffs.push(c.clone());
        }
        Self { coeffs }
    }

    /// Restricts to the first `order + 1` coefficients, padding with zeros.
    pub fn with_order(&self, order: usize) -> Self {
        Self {
            coeffs: (0..=order).map(|k| self.coeff(k)).collect(),
        }
    }
}

/// Which sign is attached to `B_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BernoulliConvention {
    /// `B_1 = +1/2`, so that `t / (1 - e^{-t}) = sum B_k t^k / k!`.
    PlusHalf,
    /// `B_1 = -1/2`, so that `t / (1 - e^{-t}) = sum (-1)^k B_k t^k / k!`.
    MinusHalf,
}

/// Taylor coefficients `b_0..b_order` of `t / (1 - e^{-t})`, generated by
/// `sum_{k<n} b_k b_{n-k} + n b_n = b_{n-1}` with `b_0 = 1`.
pub fn bernoulli_coeffs(order: usize) -> SeriesFn {
    let mut b: Vec<Rational> = Vec::with_capacity(order + 1);
    b.push(Rational::one());
    for n in 1..=order {
        // The k = 0 term of the convolution is b_n itself.
        let mut rhs = b[n - 1].clone();
        for k in 1..n {
            rhs -= &b[k] * &b[n - k];
        }
        b.push(rhs / int(n as i64 + 1));
    }
    SeriesFn::new(b)
}

/// Bernoulli numbers `B_0..B_order` in the given convention, read off the
/// stored Taylor coefficients.
pub fn bernoulli_numbers(order: usize, convention: BernoulliConvention) -> Vec<Rational> {
    let b = bernoulli_coeffs(order);
    let mut factorial = Rational::one();
    b.coeffs()
        .iter()
        .enumerate()
        .map(|(k, bk)| {
            if k > 0 {
                factorial *= int(k as i64);
            }
            let value = bk * &factorial;
            match convention {
                BernoulliConvention::MinusHalf if k % 2 == 1 => -value,
                _ => value,
            }
        })
        .collect()
}

/// Univariate series known modulo `t^{order+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries1 {
    coeffs: Vec<Rational>,
}

impl From<&SeriesFn> for TruncatedSeries1 {
    fn from(f: &SeriesFn) -> Self {
        Self {
            coeffs: f.coeffs.clone(),
        }
    }
}

impl TruncatedSeries1 {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a series needs at least one coefficient"
        );
        Self { coeffs }
    }

    pub fn constant(c: Rational, order: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); order + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    /// The series `t`.
    pub fn variable(order: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); order + 1];
        if order >= 1 {
            coeffs[1] = Rational::one();
        }
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self {
            coeffs: self.coeffs.iter().take(order + 1).cloned().collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self {
            coeffs: (0..=order)
                .map(|k| &self.coeffs[k] + &other.coeffs[k])
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self {
            coeffs: (0..=order)
                .map(|k| &self.coeffs[k] - &other.coeffs[k])
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|n| {
                (0..=n).fold(Rational::zero(), |acc, k| {
                    acc + &self.coeffs[k] * &other.coeffs[n - k]
                })
            })
            .collect();
        Self { coeffs }
    }

    /// Multiplication by `t`; the order is kept, so the top coefficient is
    /// dropped.
    pub fn mul_t(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        coeffs.push(Rational::zero());
        coeffs.extend(self.coeffs[..self.order()].iter().cloned());
        Self { coeffs }
    }

    /// Exact division by `t`. Fails unless the constant term is zero.
    pub fn div_t(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_zero() {
            return Err(SeriesError::NotDivisible("t"));
        }
        if self.order() == 0 {
            return Err(SeriesError::PrecisionExhausted);
        }
        Ok(Self {
            coeffs: self.coeffs[1..].to_vec(),
        })
    }

    /// Formal derivative; known to one order less.
    pub fn derivative(&self) -> Result<Self, SeriesError> {
        if self.order() == 0 {
            return Err(SeriesError::PrecisionExhausted);
        }
        Ok(Self {
            coeffs: (1..=self.order())
                .map(|k| &self.coeffs[k] * int(k as i64))
                .collect(),
        })
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn inverse(&self) -> Result<Self, SeriesError> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        let inv0 = c0.recip();
        let mut out: Vec<Rational> = Vec::with_capacity(self.coeffs.len());
        out.push(inv0.clone());
        for n in 1..=self.order() {
            let s = (1..=n).fold(Rational::zero(), |acc, k| {
                acc + &self.coeffs[k] * &out[n - k]
            });
            out.push(-(s * &inv0));
        }
        Ok(Self { coeffs: out })
    }
}

/// Bivariate series in commuting `t`, `s`, known modulo total degree
/// `order + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries2 {
    order: usize,
    // rows[i][j] is the coefficient of t^i s^j, i + j <= order.
    rows: Vec<Vec<Rational>>,
}

impl TruncatedSeries2 {
    pub fn zero(order: usize) -> Self {
        Self {
            order,
            rows: (0..=order)
                .map(|i| vec![Rational::zero(); order - i + 1])
                .collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficient of `t^i s^j`; zero outside the stored triangle.
    pub fn coeff(&self, i: usize, j: usize) -> Rational {
        if i + j > self.order {
            return Rational::zero();
        }
        self.rows[i][j].clone()
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        assert!(
            i + j <= self.order,
            "coefficient ({i}, {j}) outside order {}",
            self.order
        );
        self.rows[i][j] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(Zero::is_zero)
    }

    /// Smallest total degree carrying a nonzero coefficient.
    pub fn lowest_nonzero_degree(&self) -> Option<usize> {
        (0..=self.order).find(|&d| (0..=d).any(|i| !self.rows[i][d - i].is_zero()))
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        let mut out = Self::zero(order);
        for i in 0..=order {
            for j in 0..=order - i {
                out.rows[i][j] = self.rows[i][j].clone();
            }
        }
        out
    }

    /// `p(t)` viewed bivariately.
    pub fn from_t(p: &TruncatedSeries1) -> Self {
        let mut out = Self::zero(p.order());
        for (i, c) in p.coeffs().iter().enumerate() {
            out.rows[i][0] = c.clone();
        }
        out
    }

    /// `p(s)` viewed bivariately.
    pub fn from_s(p: &TruncatedSeries1) -> Self {
        let mut out = Self::zero(p.order());
        for (j, c) in p.coeffs().iter().enumerate() {
            out.rows[0][j] = c.clone();
        }
        out
    }

    /// `p(t + s)`.
    pub fn from_sum(p: &TruncatedSeries1) -> Self {
        let mut out = Self::zero(p.order());
        for (k, c) in p.coeffs().iter().enumerate() {
            for i in 0..=k {
                out.rows[i][k - i] = c * int(binomial(k as i64, i as i64));
            }
        }
        out
    }

    fn zip(&self, other: &Self, op: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        let order = self.order.min(other.order);
        let mut out = Self::zero(order);
        for i in 0..=order {
            for j in 0..=order - i {
                out.rows[i][j] = op(&self.rows[i][j], &other.rows[i][j]);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut out = Self::zero(order);
        for i1 in 0..=order {
            for j1 in 0..=order - i1 {
                let a = &self.rows[i1][j1];
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..=order - i1 - j1 {
                    for j2 in 0..=order - i1 - j1 - i2 {
                        let b = &other.rows[i2][j2];
                        if !b.is_zero() {
                            out.rows[i1 + i2][j1 + j2] += a * b;
                        }
                    }
                }
            }
        }
        out
    }

    /// Exact division by `t`: requires every `s^j` coefficient to vanish.
    pub fn div_t(&self) -> Result<Self, SeriesError> {
        if self.rows[0].iter().any(|c| !c.is_zero()) {
            return Err(SeriesError::NotDivisible("t"));
        }
        if self.order == 0 {
            return Err(SeriesError::PrecisionExhausted);
        }
        let mut out = Self::zero(self.order - 1);
        for i in 1..=self.order {
            for j in 0..=self.order - i {
                out.rows[i - 1][j] = self.rows[i][j].clone();
            }
        }
        Ok(out)
    }

    /// Exact division by `s`: requires every `t^i` coefficient to vanish.
    pub fn div_s(&self) -> Result<Self, SeriesError> {
        if self.rows.iter().any(|row| !row[0].is_zero()) {
            return Err(SeriesError::NotDivisible("s"));
        }
        if self.order == 0 {
            return Err(SeriesError::PrecisionExhausted);
        }
        let mut out = Self::zero(self.order - 1);
        for i in 0..self.order {
            for j in 1..=self.order - i {
                out.rows[i][j - 1] = self.rows[i][j].clone();
            }
        }
        Ok(out)
    }
}

/// Outcome of the functional-equation check together with its residual.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionalEquationCheck {
    pub holds: bool,
    pub residual: TruncatedSeries2,
}

fn require_order(got: usize, required: usize) -> Result<(), SeriesError> {
    if got < required {
        Err(SeriesError::OrderTooSmall { required, got })
    } else {
        Ok(())
    }
}

/// `f(t)(f(t+s) - f(s))/t + f(s)(f(t+s) - f(t))/s - f(t+s)` for `f` known
/// through order `M`; the residual is exact through total degree `M - 1`.
pub fn functional_equation_residual(f: &SeriesFn) -> Result<TruncatedSeries2, SeriesError> {
    let f1 = TruncatedSeries1::from(f);
    let ft = TruncatedSeries2::from_t(&f1);
    let fs = TruncatedSeries2::from_s(&f1);
    let fsum = TruncatedSeries2::from_sum(&f1);
    let left = ft.mul(&fsum.sub(&fs).div_t()?);
    let right = fs.mul(&fsum.sub(&ft).div_s()?);
    Ok(left.add(&right).sub(&fsum))
}

/// Checks the functional equation for the Bernoulli generating function
/// through total degree `order`.
pub fn check_functional_equation(order: usize) -> Result<FunctionalEquationCheck, SeriesError> {
    require_order(order, 1)?;
    let residual = functional_equation_residual(&bernoulli_coeffs(order + 1))?;
    Ok(FunctionalEquationCheck {
        holds: residual.is_zero(),
        residual,
    })
}

/// `g(t) = 1 - t / f(t)`.
pub fn g_transform(f: &SeriesFn) -> Result<TruncatedSeries1, SeriesError> {
    let f1 = TruncatedSeries1::from(f);
    let one = TruncatedSeries1::constant(Rational::one(), f.order());
    Ok(one.sub(&f1.inverse()?.mul_t()))
}

/// `g(t) g(s) - g(t + s)`.
pub fn multiplicative_residual(g: &TruncatedSeries1) -> TruncatedSeries2 {
    let gt = TruncatedSeries2::from_t(g);
    let gs = TruncatedSeries2::from_s(g);
    gt.mul(&gs).sub(&TruncatedSeries2::from_sum(g))
}

/// With `g = 1 - t/f`, checks `g(t)g(s) = g(t+s)` through total degree
/// `order` and that `g` is the truncation of `e^{-t}`.
pub fn check_g_multiplicative(order: usize) -> Result<bool, SeriesError> {
    require_order(order, 1)?;
    let g = g_transform(&bernoulli_coeffs(order))?;
    let is_exp = g.coeffs() == SeriesFn::exp_neg(order).coeffs();
    Ok(is_exp && multiplicative_residual(&g).is_zero())
}

/// `f (f - 1)/t + f' - f`, exact modulo `t^M` for `f` known through `t^M`.
pub fn ode_residual(f: &SeriesFn) -> Result<TruncatedSeries1, SeriesError> {
    let f1 = TruncatedSeries1::from(f);
    let one = TruncatedSeries1::constant(Rational::one(), f.order());
    let quotient = f1.mul(&f1.sub(&one).div_t()?);
    Ok(quotient.add(&f1.derivative()?).sub(&f1))
}

/// The logistic equation `g' = g(1 - g)` for `g = f/t`, multiplied through
/// by `t^2`: `t f' - f - (t f - f^2)`.
pub fn logistic_residual(f: &SeriesFn) -> Result<TruncatedSeries1, SeriesError> {
    let f1 = TruncatedSeries1::from(f);
    let lhs = f1.derivative()?.mul_t().sub(&f1);
    let rhs = f1.mul_t().sub(&f1.mul(&f1));
    Ok(lhs.sub(&rhs))
}

/// The initial value problem and its logistic form both vanish for the
/// Bernoulli coefficients through `order`.
pub fn check_ode(order: usize) -> Result<bool, SeriesError> {
    require_order(order, 2)?;
    let f = bernoulli_coeffs(order);
    if !f.coeff(0).is_one() {
        return Ok(false);
    }
    Ok(ode_residual(&f)?.is_zero() && logistic_residual(&f)?.is_zero())
}

/// Every odd Bernoulli coefficient from index 3 through `order` vanishes.
pub fn check_odd_vanishing(order: usize) -> bool {
    let b = bernoulli_coeffs(order);
    (3..=order).step_by(2).all(|k| b.coeff(k).is_zero())
}
