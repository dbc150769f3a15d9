//! Operator-valued matrices over the Weyl superalgebra and the realization
//! `Z_A = sum_J z_J f(Ct)_{AJ}` built from them.

use std::ops::Range;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::par;
use crate::series::{bernoulli_coeffs, SeriesFn};
use crate::structure::{flatten, AlgebraSpec, FlatStructure, StructureError};
use crate::weyl::{Element, KernelError, Signature};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(
        "entry ({row}, {col}) has a term of derivative degree 0; the series would not terminate"
    )]
    NonNilpotentEntry { row: usize, col: usize },
    #[error("series of order {got} cannot be evaluated to order {required}")]
    SeriesTooShort { required: usize, got: usize },
    #[error("truncation order must be at least {required}, got {got}")]
    OrderTooSmall { required: usize, got: usize },
    #[error("block assembly disagrees with the flattened matrix at ({row}, {col})")]
    BlockMismatch { row: usize, col: usize },
}

/// Dense matrix of [`Element`]s with row and column parities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Element>,
    row_parity: Vec<u8>,
    col_parity: Vec<u8>,
    sig: Signature,
    trunc: usize,
}

impl OpMatrix {
    pub fn zeros(sig: Signature, trunc: usize, row_parity: Vec<u8>, col_parity: Vec<u8>) -> Self {
        let (rows, cols) = (row_parity.len(), col_parity.len());
        Self {
            rows,
            cols,
            entries: vec![Element::zero(sig, trunc); rows * cols],
            row_parity,
            col_parity,
            sig,
            trunc,
        }
    }

    pub fn identity(sig: Signature, trunc: usize, parity: Vec<u8>) -> Self {
        let mut out = Self::zeros(sig, trunc, parity.clone(), parity);
        for i in 0..out.rows {
            out.set(i, i, Element::one(sig, trunc));
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn truncation(&self) -> usize {
        self.trunc
    }

    pub fn row_parity(&self) -> &[u8] {
        &self.row_parity
    }

    pub fn col_parity(&self) -> &[u8] {
        &self.col_parity
    }

    pub fn get(&self, row: usize, col: usize) -> &Element {
        &self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Element) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Element::is_zero)
    }

    /// Entry-wise truncation.
    pub fn truncate(&self, trunc: usize) -> Self {
        Self {
            entries: self.entries.iter().map(|e| e.truncate(trunc)).collect(),
            trunc,
            ..self.clone()
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), RealizeError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(RealizeError::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Self, c: &Rational) -> Result<(), RealizeError> {
        self.check_same_shape(other)?;
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            a.add_scaled(b, c)?;
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, RealizeError> {
        let mut out = self.clone();
        out.add_scaled(other, &Rational::one())?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, RealizeError> {
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one())?;
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            entries: self.entries.iter().map(|e| e.scale(c)).collect(),
            ..self.clone()
        }
    }

    /// Row-into-column product; entries are computed in parallel and each
    /// sum is accumulated left to right.
    pub fn mul(&self, other: &Self) -> Result<Self, RealizeError> {
        if self.cols != other.rows {
            return Err(RealizeError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let cols = other.cols;
        let entries = par::try_map_range(self.rows * cols, |idx| {
            let (i, j) = (idx / cols, idx % cols);
            let mut acc = Element::zero(self.sig, self.trunc);
            for k in 0..self.cols {
                let (a, b) = (self.get(i, k), other.get(k, j));
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc.add_scaled(&a.mul(b)?, &Rational::one())?;
            }
            Ok::<_, KernelError>(acc)
        })?;
        Ok(Self {
            rows: self.rows,
            cols,
            entries,
            row_parity: self.row_parity.clone(),
            col_parity: other.col_parity.clone(),
            sig: self.sig,
            trunc: self.trunc,
        })
    }

    /// Sub-matrix over the given row and column ranges.
    pub fn block(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        let mut out = Self::zeros(
            self.sig,
            self.trunc,
            self.row_parity[rows.clone()].to_vec(),
            self.col_parity[cols.clone()].to_vec(),
        );
        for (i, r) in rows.enumerate() {
            for (j, c) in cols.clone().enumerate() {
                out.set(i, j, self.get(r, c).clone());
            }
        }
        out
    }

    /// `[[top_left, top_right], [0, bottom_right]]`.
    pub fn upper_triangular(top_left: &Self, top_right: &Self, bottom_right: &Self) -> Self {
        let row_parity: Vec<u8> = top_left
            .row_parity
            .iter()
            .chain(&bottom_right.row_parity)
            .copied()
            .collect();
        let col_parity: Vec<u8> = top_left
            .col_parity
            .iter()
            .chain(&bottom_right.col_parity)
            .copied()
            .collect();
        let n = top_left.rows;
        let mut out = Self::zeros(top_left.sig, top_left.trunc, row_parity, col_parity);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, top_left.get(i, j).clone());
            }
            for j in 0..top_right.cols {
                out.set(i, n + j, top_right.get(i, j).clone());
            }
        }
        for i in 0..bottom_right.rows {
            for j in 0..bottom_right.cols {
                out.set(n + i, n + j, bottom_right.get(i, j).clone());
            }
        }
        out
    }

    /// First entry where the two matrices differ.
    pub fn first_difference(&self, other: &Self) -> Option<(usize, usize)> {
        if self.rows != other.rows || self.cols != other.cols {
            return Some((0, 0));
        }
        (0..self.rows * self.cols)
            .find(|&i| self.entries[i] != other.entries[i])
            .map(|i| (i / self.cols, i % self.cols))
    }
}

fn require_order(got: usize, required: usize) -> Result<(), RealizeError> {
    if got < required {
        Err(RealizeError::OrderTooSmall { required, got })
    } else {
        Ok(())
    }
}

fn parities(sig: Signature) -> Vec<u8> {
    (0..sig.dim()).map(|i| sig.parity(i)).collect()
}

/// `Ct_{AB} = sum_J Ct[A][J][B] D_J`.
pub fn build_ctilde(flat: &FlatStructure, trunc: usize) -> Result<OpMatrix, RealizeError> {
    require_order(trunc, 1)?;
    let sig = flat.signature();
    let mut out = OpMatrix::zeros(sig, trunc, parities(sig), parities(sig));
    for (&[a, j, b], v) in flat.tensor().nonzero() {
        let mut entry = out.get(a, b).clone();
        entry.add_scaled(&Element::d(sig, trunc, j)?, v)?;
        out.set(a, b, entry);
    }
    Ok(out)
}

/// The blocks of `Ct = [[C, L], [0, K]]`, built directly from `C` and `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blocks {
    /// `C_{mu nu} = sum_alpha C[mu][alpha][nu] d_alpha` (n x n).
    pub c: OpMatrix,
    /// `L_{mu a} = -sum_b K[b][mu][a] q_b` (n x m).
    pub l: OpMatrix,
    /// `K_{ab} = sum_rho K[a][rho][b] d_rho` (m x m).
    pub k: OpMatrix,
}

/// Builds the three blocks and checks that their assembly equals
/// [`build_ctilde`] of the flattened constants.
pub fn blocks(spec: &AlgebraSpec, trunc: usize) -> Result<Blocks, RealizeError> {
    require_order(trunc, 1)?;
    let sig = spec.signature()?;
    let (n, m) = (spec.n(), spec.m());
    let even = vec![0u8; n];
    let odd = vec![1u8; m];
    let mut c = OpMatrix::zeros(sig, trunc, even.clone(), even.clone());
    let mut l = OpMatrix::zeros(sig, trunc, even, odd.clone());
    let mut k = OpMatrix::zeros(sig, trunc, odd.clone(), odd);
    for (&[mu, al, nu], v) in spec.c_tensor().nonzero() {
        let mut e = c.get(mu, nu).clone();
        e.add_scaled(&Element::d(sig, trunc, al)?, v)?;
        c.set(mu, nu, e);
    }
    for (&[b, mu, a], v) in spec.k_tensor().nonzero() {
        let mut e = l.get(mu, a).clone();
        e.add_scaled(&Element::d(sig, trunc, n + b)?, &-v.clone())?;
        l.set(mu, a, e);
        let mut e = k.get(b, a).clone();
        e.add_scaled(&Element::d(sig, trunc, mu)?, v)?;
        k.set(b, a, e);
    }
    let assembled = OpMatrix::upper_triangular(&c, &l, &k);
    let direct = build_ctilde(&flatten(spec)?, trunc)?;
    if let Some((row, col)) = assembled.first_difference(&direct) {
        return Err(RealizeError::BlockMismatch { row, col });
    }
    Ok(Blocks { c, l, k })
}

/// `sum_{k=0}^{N} f_k M^k`, with `M` truncated to order `N`. Every entry of
/// `M` must lie in derivative degree at least 1.
pub fn matrix_series(mat: &OpMatrix, f: &SeriesFn, trunc: usize) -> Result<OpMatrix, RealizeError> {
    if mat.rows != mat.cols {
        return Err(RealizeError::Dimension(format!(
            "matrix series needs a square matrix, got {}x{}",
            mat.rows, mat.cols
        )));
    }
    if f.order() < trunc {
        return Err(RealizeError::SeriesTooShort {
            required: trunc,
            got: f.order(),
        });
    }
    for i in 0..mat.rows {
        for j in 0..mat.cols {
            if mat.get(i, j).min_d_degree() == Some(0) {
                return Err(RealizeError::NonNilpotentEntry { row: i, col: j });
            }
        }
    }
    let base = mat.truncate(trunc);
    let mut power = OpMatrix::identity(mat.sig, trunc, mat.row_parity.clone());
    let mut sum = power.scale(&f.coeff(0));
    for k in 1..=trunc {
        power = power.mul(&base)?;
        if power.is_zero() {
            break;
        }
        sum.add_scaled(&power, &f.coeff(k))?;
    }
    Ok(sum)
}

/// Top-right block of `f(Ct)` from the double sum
/// `sum_{k>=1} b_k sum_{l=1}^{k} C^{k-l} L K^{l-1}`.
pub fn block_f(spec: &AlgebraSpec, trunc: usize) -> Result<OpMatrix, RealizeError> {
    let Blocks { c, l, k } = blocks(spec, trunc)?;
    let sig = c.sig;
    let b = bernoulli_coeffs(trunc);
    let powers = |mat: &OpMatrix| -> Result<Vec<OpMatrix>, RealizeError> {
        let mut out = vec![OpMatrix::identity(sig, trunc, mat.row_parity.clone())];
        for i in 1..trunc {
            let next = out[i - 1].mul(mat)?;
            out.push(next);
        }
        Ok(out)
    };
    let c_pow = powers(&c)?;
    let k_pow = powers(&k)?;
    let mut f = OpMatrix::zeros(sig, trunc, l.row_parity.clone(), l.col_parity.clone());
    for deg in 1..=trunc {
        let coeff = b.coeff(deg);
        if coeff.is_zero() {
            continue;
        }
        for split in 1..=deg {
            let term = c_pow[deg - split].mul(&l)?.mul(&k_pow[split - 1])?;
            f.add_scaled(&term, &coeff)?;
        }
    }
    Ok(f)
}

/// Realized generators `Z_A` together with their source constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    pub zhats: Vec<Element>,
    pub source: FlatStructure,
    pub truncation: usize,
}

impl Realization {
    pub fn signature(&self) -> Signature {
        self.source.signature()
    }

    /// Display name of generator `A`: `X1..Xn`, then `theta1..thetam`.
    pub fn generator_name(&self, index: usize) -> String {
        let n = self.signature().n();
        if index < n {
            format!("X{}", index + 1)
        } else {
            format!("theta{}", index - n + 1)
        }
    }

    /// Structured export: metadata plus per-generator terms.
    pub fn to_json(&self, source_digest: &str) -> Value {
        let sig = self.signature();
        let generators: Vec<Value> = self
            .zhats
            .iter()
            .enumerate()
            .map(|(i, z)| {
                json!({
                    "name": self.generator_name(i),
                    "parity": sig.parity(i),
                    "text": z.render(),
                    "terms": z.to_records(),
                })
            })
            .collect();
        json!({
            "order": self.truncation,
            "signature": {"n": sig.n(), "m": sig.m()},
            "source_digest": source_digest,
            "generators": generators,
        })
    }

    pub fn render_text(&self) -> String {
        self.zhats
            .iter()
            .enumerate()
            .map(|(i, z)| format!("{} = {}\n", self.generator_name(i), z))
            .collect()
    }
}

/// `Z_A = sum_J z_J f(Ct)_{AJ}` for an arbitrary coefficient series `f`.
pub fn realization_with(
    flat: &FlatStructure,
    f: &SeriesFn,
    trunc: usize,
) -> Result<Realization, RealizeError> {
    let ct = build_ctilde(flat, trunc)?;
    let fc = matrix_series(&ct, f, trunc)?;
    let sig = flat.signature();
    let zhats = par::try_map_range(sig.dim(), |a| {
        let mut z_hat = Element::zero(sig, trunc);
        for j in 0..sig.dim() {
            let entry = fc.get(a, j);
            if !entry.is_zero() {
                z_hat.add_scaled(&Element::z(sig, trunc, j)?.mul(entry)?, &Rational::one())?;
            }
        }
        Ok::<_, KernelError>(z_hat)
    })?;
    Ok(Realization {
        zhats,
        source: flat.clone(),
        truncation: trunc,
    })
}

/// The Weyl realization, `f(t) = t / (1 - e^{-t})`.
pub fn realization(flat: &FlatStructure, trunc: usize) -> Result<Realization, RealizeError> {
    realization_with(flat, &bernoulli_coeffs(trunc), trunc)
}

/// Left and right shift operators `(e^{Ct}, e^{-Ct})`.
pub fn shift_operators(
    flat: &FlatStructure,
    trunc: usize,
) -> Result<(OpMatrix, OpMatrix), RealizeError> {
    let ct = build_ctilde(flat, trunc)?;
    let t = matrix_series(&ct, &SeriesFn::exp(trunc), trunc)?;
    let s = matrix_series(&ct, &SeriesFn::exp_neg(trunc), trunc)?;
    Ok((t, s))
}

/// Tensor-square constructions on a `d x d` operator matrix, indexed by
/// pairs `(A, B) -> A * d + B`.
pub mod tensor {
    use super::*;

    fn pair_parities(mat: &OpMatrix) -> Vec<u8> {
        let p = &mat.row_parity;
        p.iter()
            .flat_map(|a| p.iter().map(move |b| (a + b) % 2))
            .collect()
    }

    /// `M (x) I`: entry `((A,B),(J,K)) = M_{AJ} delta_{BK}`.
    pub fn left(mat: &OpMatrix) -> OpMatrix {
        let d = mat.rows;
        let parity = pair_parities(mat);
        let mut out = OpMatrix::zeros(mat.sig, mat.trunc, parity.clone(), parity);
        for a in 0..d {
            for b in 0..d {
                for j in 0..d {
                    out.set(a * d + b, j * d + b, mat.get(a, j).clone());
                }
            }
        }
        out
    }

    /// `I (x) M`: entry `((A,B),(J,K)) = delta_{AJ} M_{BK}`.
    pub fn right(mat: &OpMatrix) -> OpMatrix {
        let d = mat.rows;
        let parity = pair_parities(mat);
        let mut out = OpMatrix::zeros(mat.sig, mat.trunc, parity.clone(), parity);
        for a in 0..d {
            for b in 0..d {
                for k in 0..d {
                    out.set(a * d + b, a * d + k, mat.get(b, k).clone());
                }
            }
        }
        out
    }

    /// `sum_{J,K} T_{(A,B),(J,K)} Ct[J][K][C]`, as a `d^2 x d` matrix with
    /// rows `(A,B)` and columns `C`.
    pub fn contract(t: &OpMatrix, flat: &FlatStructure) -> Result<OpMatrix, RealizeError> {
        let d = flat.dim();
        let sig = flat.signature();
        let mut out = OpMatrix::zeros(sig, t.trunc, t.row_parity.clone(), parities(sig));
        for row in 0..d * d {
            for c in 0..d {
                let mut acc = Element::zero(sig, t.trunc);
                for j in 0..d {
                    for k in 0..d {
                        let coeff = flat.ct(j, k, c);
                        if !coeff.is_zero() {
                            acc.add_scaled(t.get(row, j * d + k), &coeff)?;
                        }
                    }
                }
                out.set(row, c, acc);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::flatten;
    use crate::{int, rational};

    fn el(sig: Signature, trunc: usize, text: &str) -> Element {
        Element::parse(sig, trunc, text).unwrap()
    }

    #[test]
    fn ctilde_examples() {
        let flat = flatten(&AlgebraSpec::abelian(2, 1)).unwrap();
        assert!(build_ctilde(&flat, 2).unwrap().is_zero());

        let flat = flatten(&AlgebraSpec::two_dim_nonabelian()).unwrap();
        let sig = flat.signature();
        let ct = build_ctilde(&flat, 2).unwrap();
        assert_eq!(ct.get(0, 0), &el(sig, 2, "d2"));
        assert!(ct.get(0, 1).is_zero());
        assert_eq!(ct.get(1, 0), &el(sig, 2, "-d1"));
        assert!(ct.get(1, 1).is_zero());

        let flat = flatten(&AlgebraSpec::super_1_1()).unwrap();
        let sig = flat.signature();
        let ct = build_ctilde(&flat, 2).unwrap();
        assert!(ct.get(0, 0).is_zero());
        assert_eq!(ct.get(0, 1), &el(sig, 2, "-q1"));
        assert!(ct.get(1, 0).is_zero());
        assert_eq!(ct.get(1, 1), &el(sig, 2, "d1"));
    }

    #[test]
    fn ctilde_entries_are_graded_and_linear() {
        let flat = flatten(&AlgebraSpec::super_2_1()).unwrap();
        let ct = build_ctilde(&flat, 3).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let e = ct.get(a, b);
                if e.is_zero() {
                    continue;
                }
                assert_eq!(e.parity(), Some((flat.parity(a) + flat.parity(b)) % 2));
                assert_eq!((e.min_d_degree(), e.max_d_degree()), (Some(1), Some(1)));
            }
        }
    }

    #[test]
    fn block_examples() {
        let Blocks { c, l, k } = blocks(&AlgebraSpec::super_1_1(), 3).unwrap();
        let sig = c.signature();
        assert!(c.get(0, 0).is_zero());
        assert_eq!(l.get(0, 0), &el(sig, 3, "-q1"));
        assert_eq!(k.get(0, 0), &el(sig, 3, "d1"));

        let spec = AlgebraSpec::two_dim_nonabelian();
        let Blocks { c, l, k } = blocks(&spec, 3).unwrap();
        assert_eq!((l.rows(), l.cols(), k.rows()), (2, 0, 0));
        assert_eq!(c, build_ctilde(&flatten(&spec).unwrap(), 3).unwrap());

        let Blocks { c, l, k } = blocks(&AlgebraSpec::abelian(2, 2), 3).unwrap();
        assert!(c.is_zero() && l.is_zero() && k.is_zero());
    }

    #[test]
    fn series_examples() {
        let flat = flatten(&AlgebraSpec::abelian(2, 1)).unwrap();
        let zero = build_ctilde(&flat, 3).unwrap();
        let f = matrix_series(&zero, &bernoulli_coeffs(3), 3).unwrap();
        assert_eq!(f, OpMatrix::identity(flat.signature(), 3, vec![0, 0, 1]));

        let flat = flatten(&AlgebraSpec::two_dim_nonabelian()).unwrap();
        let sig = flat.signature();
        let ct = build_ctilde(&flat, 2).unwrap();
        let f = matrix_series(&ct, &bernoulli_coeffs(2), 2).unwrap();
        assert_eq!(f.get(0, 0), &el(sig, 2, "1 + 1/2*d2 + 1/12*d2^2"));
        assert_eq!(f.get(1, 0), &el(sig, 2, "-1/2*d1 - 1/12*d1*d2"));
        assert!(f.get(0, 1).is_zero());
        assert_eq!(f.get(1, 1), &Element::one(sig, 2));

        let ct1 = build_ctilde(&flat, 1).unwrap();
        let e = matrix_series(&ct1, &SeriesFn::exp(1), 1).unwrap();
        let expected = OpMatrix::identity(sig, 1, vec![0, 0]).add(&ct1).unwrap();
        assert_eq!(e, expected);
    }

    #[test]
    fn series_refuses_degree_zero_entries() {
        let sig = Signature::new(1, 0).unwrap();
        let mut mat = OpMatrix::zeros(sig, 2, vec![0], vec![0]);
        mat.set(0, 0, el(sig, 2, "1 + d1"));
        assert_eq!(
            matrix_series(&mat, &bernoulli_coeffs(2), 2),
            Err(RealizeError::NonNilpotentEntry { row: 0, col: 0 })
        );
        mat.set(0, 0, el(sig, 2, "x1*d1"));
        assert!(matrix_series(&mat, &bernoulli_coeffs(1), 2).is_err());
    }

    #[test]
    fn block_f_examples() {
        let spec = AlgebraSpec::super_1_1();
        let f = block_f(&spec, 3).unwrap();
        let sig = f.signature();
        assert_eq!(f.get(0, 0), &el(sig, 3, "-1/2*q1 - 1/12*d1*q1"));

        let f = block_f(&AlgebraSpec::two_dim_nonabelian(), 3).unwrap();
        assert_eq!((f.rows(), f.cols()), (2, 0));
        assert!(block_f(&AlgebraSpec::abelian(2, 2), 3).unwrap().is_zero());
    }

    #[test]
    fn realization_examples() {
        let flat = flatten(&AlgebraSpec::abelian(2, 1)).unwrap();
        let r = realization(&flat, 3).unwrap();
        for (a, z) in r.zhats.iter().enumerate() {
            assert_eq!(z, &Element::z(flat.signature(), 3, a).unwrap());
        }

        let flat = flatten(&AlgebraSpec::two_dim_nonabelian()).unwrap();
        let sig = flat.signature();
        let r = realization(&flat, 2).unwrap();
        assert_eq!(r.zhats[0], el(sig, 2, "x1 + 1/2*x1*d2 + 1/12*x1*d2^2"));
        assert_eq!(r.zhats[1], el(sig, 2, "x2 - 1/2*x1*d1 - 1/12*x1*d1*d2"));

        let flat = flatten(&AlgebraSpec::super_1_1()).unwrap();
        let sig = flat.signature();
        let r = realization(&flat, 2).unwrap();
        assert_eq!(r.zhats[1], el(sig, 2, "xi1 + 1/2*xi1*d1 + 1/12*xi1*d1^2"));
        assert_eq!(r.zhats[0], el(sig, 2, "x1 - 1/2*xi1*q1 - 1/12*xi1*d1*q1"));
    }

    #[test]
    fn shift_examples() {
        let flat = flatten(&AlgebraSpec::abelian(1, 1)).unwrap();
        let (t, s) = shift_operators(&flat, 3).unwrap();
        let id = OpMatrix::identity(flat.signature(), 3, vec![0, 1]);
        assert_eq!(t, id);
        assert_eq!(s, id);

        for spec in [
            AlgebraSpec::two_dim_nonabelian(),
            AlgebraSpec::super_2_1(),
            AlgebraSpec::so3(),
        ] {
            let flat = flatten(&spec).unwrap();
            let (t, s) = shift_operators(&flat, 4).unwrap();
            let id = OpMatrix::identity(flat.signature(), 4, parities(flat.signature()));
            assert_eq!(t.mul(&s).unwrap(), id);
            assert_eq!(s.mul(&t).unwrap(), id);
        }

        let flat = flatten(&AlgebraSpec::two_dim_nonabelian()).unwrap();
        let (t, _) = shift_operators(&flat, 1).unwrap();
        let ct = build_ctilde(&flat, 1).unwrap();
        assert_eq!(
            t,
            OpMatrix::identity(flat.signature(), 1, vec![0, 0])
                .add(&ct)
                .unwrap()
        );
    }

    #[test]
    fn realization_scales_with_h() {
        let h = rational(-2, 3);
        for spec in [AlgebraSpec::so3(), AlgebraSpec::super_2_1()] {
            let base = realization(&flatten(&spec).unwrap(), 4).unwrap();
            let scaled = realization(&flatten(&spec.scaled(&h)).unwrap(), 4).unwrap();
            for (z, zs) in base.zhats.iter().zip(&scaled.zhats) {
                let mut expected = Element::zero(z.signature(), 4);
                for d in 0..=4 {
                    let factor = (0..d).fold(int(1), |acc, _| acc * &h);
                    expected.add_scaled(&z.d_degree_part(d), &factor).unwrap();
                }
                assert_eq!(zs, &expected);
            }
        }
    }
}
