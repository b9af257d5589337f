//! The verification engine for the CM-value identity: compare
//! `log|Psi(alpha_Q, d)|` (and its class-group average) against
//! `-(1/4) Sigma_m delta(m) c+((Dd - m^2)/4)` built from the kappa table.

use crate::arith::{sturm_condition, Discriminant};
use crate::eiskappa::{EisensteinKappa, TwoPowerRule};
use crate::grosszagier::log_abs_psi;
use crate::qforms::FormClassGroup;
use crate::qseries::PrecisionContext;
use crate::{Error, Result};
use rug::Float;
use serde::Serialize;
use std::collections::HashMap;

/// `delta(m)`: 2 when `m = 0 mod |D|`, else 1.
pub fn delta_weight(m: i64, d: Discriminant) -> u32 {
    if m.rem_euclid(d.abs()) == 0 {
        2
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    EisensteinKappa,
    UserSupplied,
}

/// Coefficients `c+(n)` on a declared window; indices outside the window are
/// an error, never a silent zero, except below the declared cutoff.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub provenance: Provenance,
    /// every `n <= zero_below` is declared zero
    pub zero_below: i64,
    pub n_max: i64,
    values: HashMap<i64, Float>,
}

impl CoefficientTable {
    pub fn user_supplied(d: Discriminant, values: HashMap<i64, Float>, n_max: i64) -> Self {
        CoefficientTable {
            provenance: Provenance::UserSupplied,
            zero_below: d.value().div_euclid(4),
            n_max,
            values,
        }
    }

    pub fn get(&self, n: i64, ctx: &PrecisionContext) -> Result<Float> {
        if let Some(v) = self.values.get(&n) {
            return Ok(v.clone());
        }
        if n <= self.zero_below {
            return Ok(Float::with_val(ctx.bits, 0));
        }
        Err(Error::WindowViolation(n))
    }
}

/// The kappa table for `0 <= n <= n_max`, zero for `n < 0` (the incoherent
/// Eisenstein series has no principal part).
pub fn eisenstein_table(
    d: Discriminant,
    n_max: i64,
    ctx: &PrecisionContext,
    rule: TwoPowerRule,
) -> Result<CoefficientTable> {
    let kappa = EisensteinKappa::new(d)?.with_rule(rule);
    let mut values = HashMap::new();
    values.insert(0, kappa.kappa_constant(ctx).numeric);
    for n in 1..=n_max {
        values.insert(n, kappa.kappa(n, ctx)?.numeric);
    }
    Ok(CoefficientTable {
        provenance: Provenance::EisensteinKappa,
        zero_below: -1,
        n_max,
        values,
    })
}

/// One summand of the coefficient side.
#[derive(Debug, Clone, Serialize)]
pub struct TermRecord {
    pub m: i64,
    pub n: i64,
    pub delta: u32,
    pub coefficient: f64,
}

/// `-(1/4) Sigma_{m = d mod 2} delta(m) c+((Dd - m^2)/4)` with the itemized
/// term list.
pub fn coefficient_sum(
    table: &CoefficientTable,
    big_d: Discriminant,
    d: Discriminant,
    ctx: &PrecisionContext,
) -> Result<(Float, Vec<TermRecord>)> {
    let dd = big_d.value() * d.value();
    let parity = d.value().rem_euclid(2);
    let mut sum = Float::with_val(ctx.bits, 0);
    let mut terms = Vec::new();
    let mut m = parity;
    loop {
        let n = (dd - m * m).div_euclid(4);
        if n <= table.zero_below {
            break;
        }
        let c = table.get(n, ctx)?;
        let delta = delta_weight(m, big_d);
        // m and -m contribute equally; m = 0 only once
        let weight = if m == 0 { 1u32 } else { 2 };
        sum += c.clone() * delta * weight;
        terms.push(TermRecord {
            m,
            n,
            delta,
            coefficient: c.to_f64(),
        });
        m += 2;
    }
    Ok((sum / -4i32, terms))
}

/// Outcome of one identity check.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    #[serde(skip)]
    pub lhs_full: Float,
    #[serde(skip)]
    pub rhs_full: Float,
    pub abs_error: f64,
    pub precision_bits: u32,
    pub terms: Vec<TermRecord>,
    pub pass: bool,
}

fn report(lhs: Float, rhs: Float, terms: Vec<TermRecord>, ctx: &PrecisionContext) -> IdentityReport {
    let abs_error = Float::with_val(ctx.bits, &lhs - &rhs).abs();
    let pass = abs_error.to_f64() < 2f64.powi(-(ctx.bits as i32) / 3);
    IdentityReport {
        lhs: lhs.to_f64(),
        rhs: rhs.to_f64(),
        abs_error: abs_error.to_f64(),
        lhs_full: lhs,
        rhs_full: rhs,
        precision_bits: ctx.bits,
        terms,
        pass,
    }
}

fn check_pair(big_d: Discriminant, _d: Discriminant) -> Result<()> {
    if !big_d.is_odd() {
        return Err(Error::EvenDiscriminant(big_d.value()));
    }
    if !sturm_condition(big_d)? {
        return Err(Error::Domain(format!(
            "discriminant {big_d} violates the ramified-prime bound prod(1+1/p) <= 3"
        )));
    }
    Ok(())
}

/// Individual identity for class number one:
/// `log|Psi(alpha_Q, d)| = -(1/4) Sigma delta(m) kappa((Dd - m^2)/4)`.
pub fn verify_individual(
    big_d: Discriminant,
    d: Discriminant,
    ctx: &PrecisionContext,
) -> Result<IdentityReport> {
    verify_individual_with_rule(big_d, d, ctx, TwoPowerRule::default())
}

pub fn verify_individual_with_rule(
    big_d: Discriminant,
    d: Discriminant,
    ctx: &PrecisionContext,
    rule: TwoPowerRule,
) -> Result<IdentityReport> {
    check_pair(big_d, d)?;
    let g = FormClassGroup::new(big_d)?;
    if g.h != 1 {
        return Err(Error::Domain(format!(
            "individual verification requires class number one, got h = {}",
            g.h
        )));
    }
    let lhs = log_abs_psi(g.principal(), d, ctx)?;
    let n_max = (big_d.value() * d.value()) / 4;
    let table = eisenstein_table(big_d, n_max, ctx, rule)?;
    let (rhs, terms) = coefficient_sum(&table, big_d, d, ctx)?;
    Ok(report(lhs, rhs, terms, ctx))
}

/// Genus-averaged identity:
/// `Sigma_Q log|Psi(alpha_Q, d)| = h_D * (-(1/4) Sigma delta(m) kappa(...))`.
pub fn verify_averaged(
    big_d: Discriminant,
    d: Discriminant,
    ctx: &PrecisionContext,
) -> Result<IdentityReport> {
    verify_averaged_with_rule(big_d, d, ctx, TwoPowerRule::default())
}

pub fn verify_averaged_with_rule(
    big_d: Discriminant,
    d: Discriminant,
    ctx: &PrecisionContext,
    rule: TwoPowerRule,
) -> Result<IdentityReport> {
    check_pair(big_d, d)?;
    let g = FormClassGroup::new(big_d)?;
    let mut lhs = Float::with_val(ctx.bits, 0);
    for &q in &g.classes {
        lhs += log_abs_psi(q, d, ctx)?;
    }
    let n_max = (big_d.value() * d.value()) / 4;
    let table = eisenstein_table(big_d, n_max, ctx, rule)?;
    let (sum, terms) = coefficient_sum(&table, big_d, d, ctx)?;
    let rhs = sum * g.h as u32;
    Ok(report(lhs, rhs, terms, ctx))
}

/// The ramified-prime bound `prod_{p | D} (1 + 1/p) <= 3`.
pub fn sturm_check(d: Discriminant) -> Result<bool> {
    sturm_condition(d)
}
