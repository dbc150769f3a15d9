//! Order-by-order certification of realizations.
//!
//! A realization truncated at order `N` is exact through derivative degree
//! `N`, but every relation involves a supercommutator with a coordinate,
//! which lowers the degree by one. Relations are therefore certified
//! through degree `N - 1` only.

use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::par;
use crate::realize::{realization_with, shift_operators, Realization, RealizeError};
use crate::series::SeriesFn;
use crate::structure::FlatStructure;
use crate::weyl::{Element, KernelError, Monomial};
use crate::Rational;

/// Largest order handled by [`uniqueness_oracle`].
pub const MAX_ORACLE_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Realize(#[from] RealizeError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("realization was not built from the given structure constants")]
    SourceMismatch,
    #[error("truncation order must be at least {required}, got {got}")]
    OrderTooSmall { required: usize, got: usize },
    #[error("oracle order must be between 1 and {MAX_ORACLE_ORDER}, got {0}")]
    OracleOrder(usize),
    #[error("coefficient equations at order {0} are inconsistent")]
    Inconsistent(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationKind {
    /// `[Z_A, Z_B] = sum_J Ct[A][B][J] Z_J`.
    Bracket,
    /// `[(e^Ct)_{AB}, Z_C] = sum_D Ct[A][C][D] (e^Ct)_{DB}`.
    LeftShift,
    /// `[(e^-Ct)_{AB}, Z_C] = -sum_D Ct[D][C][B] (e^-Ct)_{AD}`.
    RightShift,
}

/// A relation that failed, with its 0-based generator indices and the
/// nonzero residual (left side minus right side).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Defect {
    pub relation: RelationKind,
    pub indices: Vec<usize>,
    pub residual: Element,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectReport {
    pub max_certified_degree: usize,
    /// Sorted by relation, then indices.
    pub violations: Vec<Defect>,
}

impl DefectReport {
    pub fn is_success(&self) -> bool {
        self.violations.is_empty()
    }

    /// Smallest derivative degree at which any residual is nonzero.
    pub fn lowest_defect_degree(&self) -> Option<usize> {
        self.violations
            .iter()
            .filter_map(|d| d.residual.min_d_degree())
            .min()
    }

    pub fn merge(mut self, other: DefectReport) -> DefectReport {
        self.max_certified_degree = self.max_certified_degree.min(other.max_certified_degree);
        self.violations.extend(other.violations);
        self
    }

    pub fn to_json(&self) -> Value {
        let violations: Vec<Value> = self
            .violations
            .iter()
            .map(|d| {
                json!({
                    "relation": d.relation,
                    "indices": d.indices.iter().map(|i| i + 1).collect::<Vec<_>>(),
                    "residual": d.residual.render(),
                })
            })
            .collect();
        json!({
            "status": if self.is_success() { "ok" } else { "violated" },
            "certified_degree": self.max_certified_degree,
            "violations": violations,
        })
    }
}

fn certified_order(r: &Realization) -> Result<usize, VerifyError> {
    if r.truncation < 2 {
        return Err(VerifyError::OrderTooSmall {
            required: 2,
            got: r.truncation,
        });
    }
    Ok(r.truncation - 1)
}

/// `[Z_A, Z_B] - sum_J Ct[A][B][J] Z_J` through degree `cert`.
fn bracket_residual(
    flat: &FlatStructure,
    zhats: &[Element],
    a: usize,
    b: usize,
    cert: usize,
) -> Result<Element, KernelError> {
    let mut residual = zhats[a].supercommutator_to(&zhats[b], cert)?;
    for (j, z) in zhats.iter().enumerate() {
        let c = flat.ct(a, b, j);
        if !c.is_zero() {
            residual.add_scaled(&z.truncate(cert), &-c)?;
        }
    }
    Ok(residual)
}

/// Checks the defining relations of `flat` on `r` through degree `N - 1`.
pub fn verify_relations(
    flat: &FlatStructure,
    r: &Realization,
) -> Result<DefectReport, VerifyError> {
    if &r.source != flat {
        return Err(VerifyError::SourceMismatch);
    }
    let cert = certified_order(r)?;
    let dim = flat.dim();
    let residuals = par::try_map_range(dim * dim, |idx| {
        bracket_residual(flat, &r.zhats, idx / dim, idx % dim, cert)
    })?;
    let violations = residuals
        .into_iter()
        .enumerate()
        .filter(|(_, e)| !e.is_zero())
        .map(|(idx, residual)| Defect {
            relation: RelationKind::Bracket,
            indices: vec![idx / dim, idx % dim],
            residual,
        })
        .collect();
    Ok(DefectReport {
        max_certified_degree: cert,
        violations,
    })
}

/// Whether the degree-0 part of each `Z_A` is exactly `z_A`.
pub fn verify_classical_limit(r: &Realization) -> bool {
    let sig = r.signature();
    r.zhats
        .iter()
        .enumerate()
        .all(|(a, z)| Element::z(sig, z.truncation(), a).is_ok_and(|za| z.d_degree_part(0) == za))
}

/// Checks both shift-operator commutator families through degree `N - 1`.
pub fn verify_shift_commutators(
    flat: &FlatStructure,
    r: &Realization,
) -> Result<DefectReport, VerifyError> {
    if &r.source != flat {
        return Err(VerifyError::SourceMismatch);
    }
    let cert = certified_order(r)?;
    let (t, s) = shift_operators(flat, r.truncation)?;
    let dim = flat.dim();
    let triples = dim * dim * dim;
    let residuals = par::try_map_range(2 * triples, |idx| {
        let left = idx < triples;
        let rem = idx % triples;
        let (a, b, c) = (rem / (dim * dim), rem / dim % dim, rem % dim);
        let mut residual;
        if left {
            residual = t.get(a, b).supercommutator_to(&r.zhats[c], cert)?;
            for d in 0..dim {
                let coeff = flat.ct(a, c, d);
                if !coeff.is_zero() {
                    residual.add_scaled(&t.get(d, b).truncate(cert), &-coeff)?;
                }
            }
        } else {
            residual = s.get(a, b).supercommutator_to(&r.zhats[c], cert)?;
            for d in 0..dim {
                let coeff = flat.ct(d, c, b);
                if !coeff.is_zero() {
                    residual.add_scaled(&s.get(a, d).truncate(cert), &coeff)?;
                }
            }
        }
        Ok::<_, KernelError>(residual)
    })?;
    let violations = residuals
        .into_iter()
        .enumerate()
        .filter(|(_, e)| !e.is_zero())
        .map(|(idx, residual)| {
            let rem = idx % triples;
            Defect {
                relation: if idx < triples {
                    RelationKind::LeftShift
                } else {
                    RelationKind::RightShift
                },
                indices: vec![rem / (dim * dim), rem / dim % dim, rem % dim],
                residual,
            }
        })
        .collect();
    Ok(DefectReport {
        max_certified_degree: cert,
        violations,
    })
}

/// Solves for the coefficients `a_1..a_order` of `f(t) = 1 + sum a_k t^k`
/// one order at a time, demanding that the realization
/// `Z_A = sum_J z_J f(Ct)_{AJ}` satisfy the bracket relations.
///
/// The unknown `a_k` enters the degree `k - 1` residual linearly, so each
/// order yields a linear system in one unknown. `None` marks a coefficient
/// that the structure constants leave unconstrained; it is set to zero for
/// later orders.
pub fn uniqueness_oracle(
    flat: &FlatStructure,
    max_order: usize,
) -> Result<Vec<Option<Rational>>, VerifyError> {
    if !(1..=MAX_ORACLE_ORDER).contains(&max_order) {
        return Err(VerifyError::OracleOrder(max_order));
    }
    let dim = flat.dim();
    let mut solved: Vec<Option<Rational>> = Vec::with_capacity(max_order);
    for order in 1..=max_order {
        let cert = order - 1;
        let mut known = vec![Rational::from_integer(1.into())];
        known.extend(
            solved
                .iter()
                .map(|c| c.clone().unwrap_or_else(Rational::zero)),
        );
        known.push(Rational::zero());
        let base = realization_with(flat, &SeriesFn::new(known), order)?;

        let mut unit = vec![Rational::zero(); order + 1];
        unit[order] = Rational::from_integer(1.into());
        let probe = realization_with(flat, &SeriesFn::new(unit), order)?;

        let pairs = par::try_map_range(dim * dim, |idx| {
            let (a, b) = (idx / dim, idx % dim);
            let constant = bracket_residual(flat, &base.zhats, a, b, cert)?.d_degree_part(cert);
            let mut linear = base.zhats[a].supercommutator_to(&probe.zhats[b], cert)?;
            linear.add_scaled(
                &probe.zhats[a].supercommutator_to(&base.zhats[b], cert)?,
                &Rational::from_integer(1.into()),
            )?;
            for (j, z) in probe.zhats.iter().enumerate() {
                let c = flat.ct(a, b, j);
                if !c.is_zero() {
                    linear.add_scaled(&z.truncate(cert), &-c)?;
                }
            }
            Ok::<_, KernelError>((constant, linear.d_degree_part(cert)))
        })?;

        let mut solution: Option<Rational> = None;
        let mut equations: Vec<(Rational, Rational)> = Vec::new();
        for (constant, linear) in &pairs {
            let monos: std::collections::BTreeSet<&Monomial> = constant
                .terms()
                .chain(linear.terms())
                .map(|(m, _)| m)
                .collect();
            for m in monos {
                equations.push((constant.coeff(m), linear.coeff(m)));
            }
        }
        for (r0, r1) in &equations {
            if !r1.is_zero() {
                solution = Some(-r0 / r1);
                break;
            }
        }
        let value = solution.clone().unwrap_or_else(Rational::zero);
        if equations
            .iter()
            .any(|(r0, r1)| !(r0 + r1 * &value).is_zero())
        {
            return Err(VerifyError::Inconsistent(order));
        }
        solved.push(solution);
    }
    Ok(solved)
}
