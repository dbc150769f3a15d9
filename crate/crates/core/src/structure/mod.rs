//! Structure constants of a Lie superalgebra `g = g0 + g1` with
//! `[g1, g1] = 0`:
//!
//! ```text
//! [X_mu, X_nu]    = sum_alpha C[mu][nu][alpha] X_alpha
//! [theta_a, X_nu] = sum_b     K[a][nu][b]      theta_b
//! [theta_a, theta_b] = 0
//! ```
//!
//! and their flattened, ungraded form `Ct[A][B][J]` over the combined index
//! set (even indices first). Indices are 0-based in the API and 1-based in
//! the file format.

pub mod random;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::weyl::{KernelError, Signature};
use crate::{int, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("syntax error: {0}")]
    Syntax(String),
    /// Indices as written in the file (1-based).
    #[error("{tensor} index {indices:?} out of range")]
    IndexOutOfRange {
        tensor: &'static str,
        indices: Vec<u64>,
    },
    #[error("antisymmetry conflict at C[{}]", fmt_indices(.indices))]
    AntisymmetryConflict { indices: Vec<usize> },
    #[error("duplicate entry {tensor}[{}]", fmt_indices(.indices))]
    Duplicate {
        tensor: &'static str,
        indices: Vec<usize>,
    },
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("structure constants are not a valid superalgebra:\n{0}")]
    Invalid(ValidationReport),
    #[error("flattened constants fail the ungraded Jacobi identity at ({})", fmt_indices(.0))]
    FlatJacobi(Vec<usize>),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

fn fmt_indices(indices: &[usize]) -> String {
    indices
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Sparse rank-3 tensor of rationals; absent entries are zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Tensor3 {
    shape: [usize; 3],
    entries: BTreeMap<[usize; 3], Rational>,
}

impl Tensor3 {
    pub fn new(shape: [usize; 3]) -> Self {
        Self {
            shape,
            entries: BTreeMap::new(),
        }
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Rational {
        self.entries
            .get(&[i, j, k])
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Stores `value`; zero removes the entry. Panics when out of shape.
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: Rational) {
        assert!(
            i < self.shape[0] && j < self.shape[1] && k < self.shape[2],
            "index ({i},{j},{k}) outside shape {:?}",
            self.shape
        );
        if value.is_zero() {
            self.entries.remove(&[i, j, k]);
        } else {
            self.entries.insert([i, j, k], value);
        }
    }

    /// Nonzero entries in index order.
    pub fn nonzero(&self) -> impl Iterator<Item = (&[usize; 3], &Rational)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, h: &Rational) -> Self {
        let mut out = Self::new(self.shape);
        for (&[i, j, k], v) in &self.entries {
            out.set(i, j, k, v * h);
        }
        out
    }
}

/// Structure constants `C` (even-even) and `K` (odd-even) of `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraSpec {
    n: usize,
    m: usize,
    c: Tensor3,
    k: Tensor3,
}

impl AlgebraSpec {
    /// The abelian superalgebra of dimension `(n|m)`.
    pub fn abelian(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            c: Tensor3::new([n, n, n]),
            k: Tensor3::new([m, n, m]),
        }
    }

    /// Two-dimensional non-abelian Lie algebra `[X_1, X_2] = X_1`.
    pub fn two_dim_nonabelian() -> Self {
        let mut spec = Self::abelian(2, 0);
        spec.set_bracket(0, 1, 0, int(1));
        spec
    }

    /// Heisenberg algebra `[X_1, X_2] = X_3`.
    pub fn heisenberg() -> Self {
        let mut spec = Self::abelian(3, 0);
        spec.set_bracket(0, 1, 2, int(1));
        spec
    }

    /// `so(3)`: `[X_1, X_2] = X_3` and cyclic.
    pub fn so3() -> Self {
        let mut spec = Self::abelian(3, 0);
        spec.set_bracket(0, 1, 2, int(1));
        spec.set_bracket(1, 2, 0, int(1));
        spec.set_bracket(2, 0, 1, int(1));
        spec
    }

    /// `(1|1)` with `[theta, X] = theta`.
    pub fn super_1_1() -> Self {
        let mut spec = Self::abelian(1, 1);
        spec.k.set(0, 0, 0, int(1));
        spec
    }

    /// `(2|1)` with `[X_1, X_2] = X_1` and `[theta, X_2] = theta`.
    pub fn super_2_1() -> Self {
        let mut spec = Self::two_dim_nonabelian();
        spec.m = 1;
        spec.k = Tensor3::new([1, 2, 1]);
        spec.k.set(0, 1, 0, int(1));
        spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn signature(&self) -> Result<Signature, KernelError> {
        Signature::new(self.n, self.m)
    }

    pub fn c(&self, mu: usize, nu: usize, alpha: usize) -> Rational {
        self.c.get(mu, nu, alpha)
    }

    pub fn k(&self, a: usize, nu: usize, b: usize) -> Rational {
        self.k.get(a, nu, b)
    }

    pub fn c_tensor(&self) -> &Tensor3 {
        &self.c
    }

    pub fn k_tensor(&self) -> &Tensor3 {
        &self.k
    }

    /// Sets a single entry `C[mu][nu][alpha]` without touching its mirror.
    pub fn set_c(&mut self, mu: usize, nu: usize, alpha: usize, value: Rational) {
        self.c.set(mu, nu, alpha, value);
    }

    /// Sets `C[mu][nu][alpha] = value` and `C[nu][mu][alpha] = -value`.
    pub fn set_bracket(&mut self, mu: usize, nu: usize, alpha: usize, value: Rational) {
        self.c.set(nu, mu, alpha, -value.clone());
        self.c.set(mu, nu, alpha, value);
    }

    pub fn set_k(&mut self, a: usize, nu: usize, b: usize, value: Rational) {
        self.k.set(a, nu, b, value);
    }

    pub fn is_abelian(&self) -> bool {
        self.c.is_zero() && self.k.is_zero()
    }

    /// Constants rescaled by `h`.
    pub fn scaled(&self, h: &Rational) -> Self {
        Self {
            n: self.n,
            m: self.m,
            c: self.c.scaled(h),
            k: self.k.scaled(h),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// `C[mu][nu][alpha] + C[nu][mu][alpha] != 0`.
    Antisymmetry,
    /// Jacobi identity among three even generators.
    EvenJacobi,
    /// Jacobi identity for one odd and two even generators.
    MixedJacobi,
}

/// One violated instance, with 0-based indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub indices: Vec<usize>,
    pub residual: Rational,
}

/// Every violated constraint; empty means valid.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let violations: Vec<Value> = self
            .violations
            .iter()
            .map(|v| {
                serde_json::json!({
                    "kind": v.kind,
                    "indices": v.indices.iter().map(|i| i + 1).collect::<Vec<_>>(),
                    "residual": v.residual.to_string(),
                })
            })
            .collect();
        serde_json::json!({
            "status": if self.is_valid() { "valid" } else { "invalid" },
            "violations": violations,
        })
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return writeln!(f, "valid");
        }
        for v in &self.violations {
            let name = match v.kind {
                ViolationKind::Antisymmetry => "antisymmetry",
                ViolationKind::EvenJacobi => "even Jacobi",
                ViolationKind::MixedJacobi => "mixed Jacobi",
            };
            writeln!(
                f,
                "{name} violated at ({}): residual {}",
                fmt_indices(&v.indices),
                v.residual
            )?;
        }
        Ok(())
    }
}

/// `sum_rho C[mu][al][rho] C[rho][be][nu] + cyclic(mu, al, be)`.
fn even_jacobi(spec: &AlgebraSpec, mu: usize, al: usize, be: usize, nu: usize) -> Rational {
    (0..spec.n).fold(Rational::zero(), |acc, rho| {
        acc + spec.c(mu, al, rho) * spec.c(rho, be, nu)
            + spec.c(al, be, rho) * spec.c(rho, mu, nu)
            + spec.c(be, mu, rho) * spec.c(rho, al, nu)
    })
}

/// `sum_b (K[a][nu][b] K[b][mu][c] - K[a][mu][b] K[b][nu][c]) + sum_rho C[mu][nu][rho] K[a][rho][c]`.
fn mixed_jacobi(spec: &AlgebraSpec, a: usize, mu: usize, nu: usize, c: usize) -> Rational {
    let kk = (0..spec.m).fold(Rational::zero(), |acc, b| {
        acc + spec.k(a, nu, b) * spec.k(b, mu, c) - spec.k(a, mu, b) * spec.k(b, nu, c)
    });
    (0..spec.n).fold(kk, |acc, rho| acc + spec.c(mu, nu, rho) * spec.k(a, rho, c))
}

/// Lists every violation of antisymmetry and of the even and mixed Jacobi
/// identities.
pub fn validate(spec: &AlgebraSpec) -> ValidationReport {
    let (n, m) = (spec.n, spec.m);
    let mut violations = Vec::new();
    for mu in 0..n {
        for nu in mu..n {
            for alpha in 0..n {
                let residual = spec.c(mu, nu, alpha) + spec.c(nu, mu, alpha);
                if !residual.is_zero() {
                    violations.push(Violation {
                        kind: ViolationKind::Antisymmetry,
                        indices: vec![mu, nu, alpha],
                        residual,
                    });
                }
            }
        }
    }
    for mu in 0..n {
        for al in 0..n {
            for be in 0..n {
                for nu in 0..n {
                    let residual = even_jacobi(spec, mu, al, be, nu);
                    if !residual.is_zero() {
                        violations.push(Violation {
                            kind: ViolationKind::EvenJacobi,
                            indices: vec![mu, al, be, nu],
                            residual,
                        });
                    }
                }
            }
        }
    }
    for a in 0..m {
        for mu in 0..n {
            for nu in 0..n {
                for c in 0..m {
                    let residual = mixed_jacobi(spec, a, mu, nu, c);
                    if !residual.is_zero() {
                        violations.push(Violation {
                            kind: ViolationKind::MixedJacobi,
                            indices: vec![a, mu, nu, c],
                            residual,
                        });
                    }
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Flattened constants `Ct[A][B][J]` over `A, B, J < n + m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatStructure {
    sig: Signature,
    ct: Tensor3,
}

impl FlatStructure {
    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn dim(&self) -> usize {
        self.sig.dim()
    }

    /// 0 for the first `n` indices, 1 for the last `m`.
    pub fn parity(&self, index: usize) -> u8 {
        self.sig.parity(index)
    }

    pub fn ct(&self, a: usize, b: usize, j: usize) -> Rational {
        self.ct.get(a, b, j)
    }

    pub fn tensor(&self) -> &Tensor3 {
        &self.ct
    }

    pub fn is_abelian(&self) -> bool {
        self.ct.is_zero()
    }

    /// `sum_J Ct[A][B][J] Ct[J][C][D] + cyclic(A, B, C)`.
    pub fn jacobi_residual(&self, a: usize, b: usize, c: usize, d: usize) -> Rational {
        (0..self.dim()).fold(Rational::zero(), |acc, j| {
            acc + self.ct(a, b, j) * self.ct(j, c, d)
                + self.ct(b, c, j) * self.ct(j, a, d)
                + self.ct(c, a, j) * self.ct(j, b, d)
        })
    }

    /// First index quadruple violating the ungraded Jacobi identity.
    pub fn jacobi_violation(&self) -> Option<[usize; 4]> {
        let dim = self.dim();
        (0..dim.pow(4))
            .map(|i| [i / dim.pow(3), i / dim.pow(2) % dim, i / dim % dim, i % dim])
            .find(|&[a, b, c, d]| !self.jacobi_residual(a, b, c, d).is_zero())
    }

    pub fn is_skew(&self) -> bool {
        self.ct
            .nonzero()
            .all(|(&[a, b, j], v)| self.ct(b, a, j) == -v.clone())
    }
}

/// Flattens without checking validity.
pub fn flatten_unchecked(spec: &AlgebraSpec) -> Result<FlatStructure, StructureError> {
    let sig = spec.signature()?;
    let n = spec.n;
    let mut ct = Tensor3::new([sig.dim(); 3]);
    for (&[mu, nu, la], v) in spec.c.nonzero() {
        ct.set(mu, nu, la, v.clone());
    }
    for (&[a, mu, b], v) in spec.k.nonzero() {
        ct.set(mu, n + a, n + b, -v.clone());
        ct.set(n + a, mu, n + b, v.clone());
    }
    Ok(FlatStructure { sig, ct })
}

/// Validates, flattens, and re-checks the ungraded Jacobi identity.
pub fn flatten(spec: &AlgebraSpec) -> Result<FlatStructure, StructureError> {
    let report = validate(spec);
    if !report.is_valid() {
        return Err(StructureError::Invalid(report));
    }
    let flat = flatten_unchecked(spec)?;
    if let Some(q) = flat.jacobi_violation() {
        return Err(StructureError::FlatJacobi(q.to_vec()));
    }
    Ok(flat)
}

fn syntax(msg: impl Into<String>) -> StructureError {
    StructureError::Syntax(msg.into())
}

fn parse_coeff(value: &Value) -> Result<Rational, StructureError> {
    match value {
        Value::String(s) => {
            if let Some((_, den)) = s.split_once('/') {
                if den.trim().parse::<i128>() == Ok(0) {
                    return Err(StructureError::ZeroDenominator(s.clone()));
                }
            }
            parse_rational(s).ok_or_else(|| syntax(format!("bad rational {s:?}")))
        }
        Value::Number(num) => num.as_i64().map(int).ok_or_else(|| {
            syntax(format!(
                "non-integer numeric coefficient {num}; use \"p/q\""
            ))
        }),
        other => Err(syntax(format!("coefficient must be a string, got {other}"))),
    }
}

fn parse_entries(
    root: &Value,
    key: &'static str,
    bounds: [usize; 3],
) -> Result<Vec<([usize; 3], Rational)>, StructureError> {
    let Some(list) = root.get(key) else {
        return Ok(Vec::new());
    };
    let list = list
        .as_array()
        .ok_or_else(|| syntax(format!("\"{key}\" must be an array")))?;
    let mut seen = BTreeMap::new();
    let mut out = Vec::with_capacity(list.len());
    for entry in list {
        let items = entry
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| syntax(format!("\"{key}\" entries must be [i, j, k, \"p/q\"]")))?;
        let raw = items[..3]
            .iter()
            .map(|item| {
                item.as_u64().ok_or_else(|| {
                    syntax(format!(
                        "\"{key}\" index {item} is not a non-negative integer"
                    ))
                })
            })
            .collect::<Result<Vec<u64>, _>>()?;
        if raw
            .iter()
            .zip(bounds)
            .any(|(&i, b)| i == 0 || i as usize > b)
        {
            return Err(StructureError::IndexOutOfRange {
                tensor: key,
                indices: raw,
            });
        }
        let idx = [
            raw[0] as usize - 1,
            raw[1] as usize - 1,
            raw[2] as usize - 1,
        ];
        if seen.insert(idx, ()).is_some() {
            return Err(StructureError::Duplicate {
                tensor: key,
                indices: idx.to_vec(),
            });
        }
        out.push((idx, parse_coeff(&items[3])?));
    }
    Ok(out)
}

/// Parses an algebra file:
///
/// ```json
/// {"n": 2, "m": 1, "C": [[1, 2, 1, "1"]], "K": [[1, 2, 1, "1/2"]]}
/// ```
///
/// Only one orientation of each antisymmetric pair of `C` is needed; the
/// other is completed. Giving both with values that are not negatives of
/// each other is an error.
pub fn parse_spec(text: &[u8]) -> Result<AlgebraSpec, StructureError> {
    let root: Value = serde_json::from_slice(text).map_err(|e| syntax(e.to_string()))?;
    if !root.is_object() {
        return Err(syntax("algebra file must be a JSON object"));
    }
    let dim = |key: &str| -> Result<usize, StructureError> {
        root.get(key)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| syntax(format!("missing non-negative integer field \"{key}\"")))
    };
    let (n, m) = (dim("n")?, dim("m")?);
    Signature::new(n, m)?;
    let c_entries = parse_entries(&root, "C", [n, n, n])?;
    let k_entries = parse_entries(&root, "K", [m, n, m])?;

    let explicit: BTreeMap<[usize; 3], Rational> = c_entries.iter().cloned().collect();
    let mut spec = AlgebraSpec::abelian(n, m);
    for ([mu, nu, alpha], v) in c_entries {
        let conflict = || StructureError::AntisymmetryConflict {
            indices: vec![mu, nu, alpha],
        };
        if mu == nu && !v.is_zero() {
            return Err(conflict());
        }
        if let Some(mirror) = explicit.get(&[nu, mu, alpha]) {
            if *mirror != -v.clone() {
                return Err(conflict());
            }
        }
        spec.set_bracket(mu, nu, alpha, v);
    }
    for ([a, nu, b], v) in k_entries {
        spec.set_k(a, nu, b, v);
    }
    Ok(spec)
}

/// Renders an algebra file; `C` is written with `mu < nu` only.
pub fn render_spec(spec: &AlgebraSpec) -> String {
    let c: Vec<Value> = spec
        .c
        .nonzero()
        .filter(|(&[mu, nu, _], _)| mu < nu)
        .map(|(&[mu, nu, al], v)| serde_json::json!([mu + 1, nu + 1, al + 1, v.to_string()]))
        .collect();
    let k: Vec<Value> = spec
        .k
        .nonzero()
        .map(|(&[a, nu, b], v)| serde_json::json!([a + 1, nu + 1, b + 1, v.to_string()]))
        .collect();
    let doc = serde_json::json!({"n": spec.n, "m": spec.m, "C": c, "K": k});
    serde_json::to_string_pretty(&doc).expect("json values always serialize")
}
