//! Singular moduli: `Psi(z, d)`, its CM values and class-group norms, and the
//! exact prime factorization `prod n^{eps(n')}` over `4 n n' = dD - x^2`.

use crate::arith::{factorize, kronecker, Discriminant};
use crate::qforms::{cm_point, BinaryQuadraticForm, FormClassGroup};
use crate::qseries::{j_invariant, PrecisionContext};
use crate::{Error, Result};
use rug::ops::Pow;
use rug::{Complex, Float, Integer};

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn require_coprime(d1: Discriminant, d2: Discriminant) -> Result<()> {
    if gcd(d1.value(), d2.value()) != 1 {
        return Err(Error::NotCoprime(d1.value(), d2.value()));
    }
    Ok(())
}

/// `j(alpha_Q)` for every reduced class of discriminant `d`.
fn singular_moduli(d: Discriminant, ctx: &PrecisionContext) -> Result<Vec<Complex>> {
    FormClassGroup::new(d)?
        .classes
        .iter()
        .map(|&q| j_invariant(&cm_point(q, ctx).alpha, ctx))
        .collect()
}

/// `Psi(z, d) = prod_Q (j(z) - j(alpha_Q))^{4/w_d}` via the principal branch.
pub fn psi_value(z: &Complex, d: Discriminant, ctx: &PrecisionContext) -> Result<Complex> {
    let jz = j_invariant(z, ctx)?;
    let w = Discriminant::new(d.value())?.roots_of_unity();
    let mut log_sum = Complex::with_val(ctx.bits, 0);
    for jq in singular_moduli(d, ctx)? {
        let diff = Complex::with_val(ctx.bits, &jz - &jq);
        let scale = 1.0 + jz.clone().abs().real().to_f64().abs();
        if diff.clone().abs().real().to_f64() < scale * 2f64.powi(-(ctx.bits as i32) / 2) {
            return Err(Error::PoleAtCmPoint);
        }
        log_sum += diff.ln();
    }
    let exponent = Float::with_val(ctx.bits, 4) / w;
    Ok((log_sum * exponent).exp())
}

/// `log |Psi(alpha_Q, d)|`, computed in the log domain (no overflow for
/// large singular moduli).
pub fn log_abs_psi(q: BinaryQuadraticForm, d: Discriminant, ctx: &PrecisionContext) -> Result<Float> {
    let big_d = Discriminant::new(q.discriminant())
        .map_err(|_| Error::NotFundamental(q.discriminant()))?;
    require_coprime(big_d, d)?;
    let jq = j_invariant(&cm_point(q, ctx).alpha, ctx)?;
    let w = d.roots_of_unity();
    let mut sum = Float::with_val(ctx.bits, 0);
    for jr in singular_moduli(d, ctx)? {
        let diff = Complex::with_val(ctx.bits, &jq - &jr);
        let abs: Float = diff.abs().real().clone();
        if abs.is_zero() {
            return Err(Error::PoleAtCmPoint);
        }
        sum += abs.ln();
    }
    Ok(sum * Float::with_val(ctx.bits, 4) / w)
}

/// The multiplicative sign `eps` on a prime `ell`: the Kronecker symbol of
/// whichever of the two discriminants is coprime to `ell`; for `ell` coprime
/// to both, the two symbols must agree (they do for every `ell` dividing an
/// `n'` from `4 n n' = dD - x^2`).
pub fn epsilon(ell: u64, d: Discriminant, big_d: Discriminant) -> Result<i32> {
    require_coprime(d, big_d)?;
    let l = ell as i64;
    let div_d = d.value() % l == 0;
    let div_big = big_d.value() % l == 0;
    match (div_d, div_big) {
        (true, false) => Ok(kronecker(big_d.value(), l)),
        (false, true) => Ok(kronecker(d.value(), l)),
        (false, false) => {
            let e1 = kronecker(big_d.value(), l);
            let e2 = kronecker(d.value(), l);
            if e1 != e2 {
                return Err(Error::EpsilonAmbiguous(ell));
            }
            Ok(e1)
        }
        (true, true) => unreachable!("coprimality was checked"),
    }
}

/// `eps` extended to `n' > 0` by complete multiplicativity.
fn epsilon_of(n_prime: u64, d: Discriminant, big_d: Discriminant) -> Result<i32> {
    let mut e = 1i32;
    for (p, a) in factorize(n_prime)?.factors {
        if a % 2 == 1 {
            e *= epsilon(p, d, big_d)?;
        }
    }
    Ok(e)
}

/// An exact positive-integer prime factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GZFactorization {
    pub factors: Vec<(u64, i64)>,
    pub value: Integer,
}

/// The norm-side product `prod_{x, n, n' > 0, 4nn' = dD - x^2} n^{eps(n')}`
/// in exact arithmetic.
pub fn gz_rhs_factorization(big_d: Discriminant, d: Discriminant) -> Result<GZFactorization> {
    require_coprime(big_d, d)?;
    let dd = big_d.value() * d.value();
    let mut exps: std::collections::BTreeMap<u64, i64> = std::collections::BTreeMap::new();
    let parity = dd.rem_euclid(2);
    let mut x = if parity == 0 { 0 } else { 1 };
    while x * x < dd {
        let nn = (dd - x * x) / 4;
        // x and -x contribute identically; x = 0 only once
        let weight = if x == 0 { 1 } else { 2 };
        for n in 1..=nn as u64 {
            if nn as u64 % n != 0 {
                continue;
            }
            let e = epsilon_of(nn as u64 / n, d, big_d)?;
            for (p, a) in factorize(n)?.factors {
                *exps.entry(p).or_insert(0) += weight * e as i64 * a as i64;
            }
        }
        x += 2;
    }
    let factors: Vec<(u64, i64)> = exps.into_iter().filter(|&(_, e)| e != 0).collect();
    let mut value = Integer::from(1);
    for &(p, e) in &factors {
        if e < 0 {
            return Err(Error::Domain(format!(
                "negative exponent {e} at prime {p} in the norm factorization"
            )));
        }
        value *= Integer::from(p).pow(e as u32);
    }
    Ok(GZFactorization { factors, value })
}

/// A numeric value recognized as an integer, with the recognition residual.
#[derive(Debug, Clone)]
pub struct RecognizedInteger {
    pub numeric: Float,
    pub rounded: Integer,
    pub residual: Float,
}

/// `log` of the class-group norm: `(2/w_D) * sum_Q log|Psi(alpha_Q, d)|`.
fn log_norm(big_d: Discriminant, d: Discriminant, ctx: &PrecisionContext) -> Result<Float> {
    let g = FormClassGroup::new(big_d)?;
    let mut sum = Float::with_val(ctx.bits, 0);
    for &q in &g.classes {
        sum += log_abs_psi(q, d, ctx)?;
    }
    Ok(sum * 2u32 / g.w)
}

fn recognize_at(big_d: Discriminant, d: Discriminant, ctx: &PrecisionContext) -> Result<RecognizedInteger> {
    // first pass to size the value, then rerun with enough bits that the
    // absolute residual of exp(log-sum) is meaningful
    let rough = log_norm(big_d, d, &PrecisionContext::new(96))?.to_f64();
    let magnitude_bits = (rough / std::f64::consts::LN_2).max(0.0) as u32;
    let work = PrecisionContext::new(ctx.bits + magnitude_bits + 64);
    let value = log_norm(big_d, d, &work)?.exp();
    let rounded = value
        .to_integer()
        .ok_or_else(|| Error::Domain("norm did not evaluate to a finite number".into()))?;
    let residual = (value.clone() - Float::with_val(work.bits, &rounded)).abs();
    Ok(RecognizedInteger {
        numeric: value,
        rounded,
        residual,
    })
}

/// Numeric `|prod_Q Psi(alpha_Q, d)|^{2/w_D}` with integer recognition,
/// re-confirmed at doubled precision.
pub fn norm_product(big_d: Discriminant, d: Discriminant, ctx: &PrecisionContext) -> Result<RecognizedInteger> {
    let first = recognize_at(big_d, d, ctx)?;
    let tolerance = Float::with_val(ctx.bits, 10).pow(-(ctx.guard_digits as i32));
    if first.residual > tolerance {
        return Err(Error::RecognitionFailure {
            residual: first.residual.to_string_radix(10, Some(8)),
            tolerance: tolerance.to_string_radix(10, Some(8)),
        });
    }
    let confirm = recognize_at(big_d, d, &ctx.doubled())?;
    if confirm.rounded != first.rounded {
        return Err(Error::RecognitionFailure {
            residual: confirm.residual.to_string_radix(10, Some(8)),
            tolerance: "doubled-precision disagreement".into(),
        });
    }
    Ok(first)
}
