//! Precision-managed evaluation of the classical q-series: Dedekind eta,
//! E4, E6, Delta, the j-invariant, and exact integer theta expansions of
//! positive definite binary forms.

use crate::qforms::BinaryQuadraticForm;
use crate::{Error, Result};
use rug::ops::Pow;
use rug::{Complex, Float, Integer};
use serde::Serialize;

/// Working precision for all floating evaluations.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PrecisionContext {
    /// mantissa bits
    pub bits: u32,
    /// default truncation order for q-expansions evaluated away from a tail bound
    pub q_order: usize,
    /// decimal digits of slack allowed in acceptance comparisons
    pub guard_digits: u32,
}

impl PrecisionContext {
    pub fn new(bits: u32) -> Self {
        PrecisionContext {
            bits: bits.max(64),
            q_order: 256,
            guard_digits: 20,
        }
    }

    pub fn with_q_order(mut self, q_order: usize) -> Self {
        self.q_order = q_order;
        self
    }

    pub fn doubled(self) -> Self {
        PrecisionContext {
            bits: 2 * self.bits,
            ..self
        }
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits, rug::float::Constant::Pi)
    }

    /// `e(z) = exp(2 pi i z)`
    pub fn e(&self, z: &Complex) -> Complex {
        let two_pi_i = Complex::with_val(self.bits, (0, 1)) * 2u32 * self.pi();
        Complex::from(two_pi_i * z).exp()
    }
}

/// A truncated q-expansion with exact integer coefficients:
/// `sum_{n >= n0} c(n) q^n` known through `n0 + coefficients.len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QExpansion {
    pub leading_exponent: i64,
    pub coefficients: Vec<Integer>,
}

impl QExpansion {
    pub fn coefficient(&self, n: i64) -> Result<&Integer> {
        let idx = n - self.leading_exponent;
        if idx < 0 || idx as usize >= self.coefficients.len() {
            return Err(Error::WindowViolation(n));
        }
        Ok(&self.coefficients[idx as usize])
    }

    pub fn truncation_order(&self) -> i64 {
        self.leading_exponent + self.coefficients.len() as i64 - 1
    }

    pub fn add(&self, other: &QExpansion) -> QExpansion {
        let n0 = self.leading_exponent.min(other.leading_exponent);
        let n1 = self.truncation_order().min(other.truncation_order());
        let coefficients = (n0..=n1)
            .map(|n| {
                let mut c = Integer::new();
                for e in [self, other] {
                    if let Ok(v) = e.coefficient(n) {
                        c += v;
                    }
                }
                c
            })
            .collect();
        QExpansion {
            leading_exponent: n0,
            coefficients,
        }
    }

    pub fn mul(&self, other: &QExpansion) -> QExpansion {
        let n0 = self.leading_exponent + other.leading_exponent;
        // the product is only trustworthy where every contributing pair is known
        let n1 = (self.truncation_order() + other.leading_exponent)
            .min(other.truncation_order() + self.leading_exponent);
        let mut coefficients = vec![Integer::new(); (n1 - n0 + 1).max(0) as usize];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                let n = self.leading_exponent + i as i64 + other.leading_exponent + j as i64;
                if n <= n1 {
                    coefficients[(n - n0) as usize] += Integer::from(a * b);
                }
            }
        }
        QExpansion {
            leading_exponent: n0,
            coefficients,
        }
    }

    /// Evaluate at `q` by Horner's rule over the known window.
    pub fn eval(&self, q: &Complex, ctx: &PrecisionContext) -> Complex {
        let mut acc = Complex::with_val(ctx.bits, 0);
        for c in self.coefficients.iter().rev() {
            acc *= q;
            acc += c;
        }
        acc * Complex::from(q.clone().pow(self.leading_exponent as i32))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eisenstein {
    E4,
    E6,
}

fn sigma(n: u64, k: u32) -> Integer {
    let mut s = Integer::new();
    for d in 1..=n {
        if n % d == 0 {
            s += Integer::from(d).pow(k);
        }
    }
    s
}

/// `E4 = 1 + 240 sum sigma_3(n) q^n`, `E6 = 1 - 504 sum sigma_5(n) q^n`.
pub fn eisenstein_series(which: Eisenstein, order: usize) -> QExpansion {
    let (mult, k) = match which {
        Eisenstein::E4 => (240i64, 3),
        Eisenstein::E6 => (-504i64, 5),
    };
    let mut coefficients = vec![Integer::from(1)];
    for n in 1..=order as u64 {
        coefficients.push(sigma(n, k) * mult);
    }
    QExpansion {
        leading_exponent: 0,
        coefficients,
    }
}

fn check_upper_half(tau: &Complex) -> Result<()> {
    if tau.imag().is_sign_positive() && !tau.imag().is_zero() && tau.imag().is_finite() {
        Ok(())
    } else {
        Err(Error::NotInUpperHalfPlane)
    }
}

/// Move `tau` into the standard fundamental domain; returns the reduced point
/// together with the accumulated eta multiplier `F` such that
/// `eta(tau) = F * eta(reduced)`.
fn reduce_tau(tau: &Complex, ctx: &PrecisionContext) -> (Complex, Complex) {
    let bits = ctx.bits;
    let mut t = Complex::with_val(bits, tau);
    let mut factor = Complex::with_val(bits, 1);
    let e24 = {
        // e(-1/24)
        let z = Complex::with_val(bits, (Float::with_val(bits, -1) / 24, 0));
        ctx.e(&z)
    };
    loop {
        // translate: eta(t) = e(n/24) eta(t - n)
        let n = t.real().to_f64().round();
        if n != 0.0 {
            t -= Float::with_val(bits, n);
            // eta(original) = factor * eta(t+n) = factor * e(n/24) eta(t)
            let mut m = Complex::with_val(bits, 1);
            let steps = n.abs() as u64;
            let base = if n > 0.0 {
                e24.clone().recip()
            } else {
                e24.clone()
            };
            for _ in 0..steps {
                m *= &base;
            }
            factor *= m;
        }
        let norm = Float::with_val(bits, t.clone().norm().real());
        if norm < 0.999_999 {
            // invert: eta(-1/t) = sqrt(-i t) eta(t), so with s = -1/t:
            // eta(t) = eta(s) / sqrt(-i s^{-1} * ... )  — directly:
            // eta(t) = eta(-1/s) applied to s gives eta(s) = sqrt(-i t) eta(t)
            let s = -Complex::with_val(bits, t.clone().recip());
            let root = (Complex::with_val(bits, (0, -1)) * &t).sqrt();
            factor /= root;
            t = s;
        } else if t.real().to_f64().abs() <= 0.5 + 1e-15 {
            break;
        }
    }
    (t, factor)
}

/// Dedekind eta via the pentagonal-number series after fundamental-domain
/// reduction.
pub fn eta(tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    check_upper_half(tau)?;
    let bits = ctx.bits;
    let (t, factor) = reduce_tau(tau, ctx);
    let q = ctx.e(&t);
    // q^{1/24}
    let q24 = ctx.e(&(Complex::with_val(bits, &t) / 24u32));
    let mut sum = Complex::with_val(bits, 1);
    let log_q_abs = -2.0 * std::f64::consts::PI * t.imag().to_f64();
    let target = -((bits as f64 + 32.0) * std::f64::consts::LN_2);
    let mut k = 1i64;
    loop {
        let e1 = k * (3 * k - 1) / 2;
        let e2 = k * (3 * k + 1) / 2;
        if (e1 as f64) * log_q_abs < target {
            break;
        }
        let term = Complex::from(q.clone().pow(e1 as u32)) + q.clone().pow(e2 as u32);
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
    Ok(factor * q24 * sum)
}

/// `Delta = eta^24`.
pub fn delta(tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    Ok(Complex::from(eta(tau, ctx)?.pow(24)))
}

/// The order past which the E4/E6 tails at `Im tau = im` drop below the
/// precision budget.
fn series_order(im: f64, bits: u32) -> usize {
    let decay = 2.0 * std::f64::consts::PI * im;
    let mut n = 1usize;
    loop {
        let log_term = 6.0 * (n as f64 + 1.0).ln() + 7.0 - decay * n as f64;
        if log_term < -((bits as f64 + 32.0) * std::f64::consts::LN_2) {
            return n;
        }
        n += 1;
    }
}

/// `j = E4^3 / Delta`, evaluated after moving `tau` into the fundamental
/// domain so the q-series converge at eight-plus digits per term.
pub fn j_invariant(tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    check_upper_half(tau)?;
    let (t, _) = reduce_tau(tau, ctx);
    let q = ctx.e(&t);
    let order = series_order(t.imag().to_f64(), ctx.bits);
    let e4 = eisenstein_series(Eisenstein::E4, order).eval(&q, ctx);
    let d = delta(&t, ctx)?;
    Ok(Complex::from(e4.pow(3)) / d)
}

/// Exact representation numbers `r_Q(n)` for `n <= order`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThetaExpansion {
    pub form: BinaryQuadraticForm,
    pub r: Vec<u64>,
}

impl ThetaExpansion {
    pub fn eval(&self, q: &Complex, ctx: &PrecisionContext) -> Complex {
        let mut acc = Complex::with_val(ctx.bits, 0);
        for &c in self.r.iter().rev() {
            acc *= q;
            acc += Float::with_val(ctx.bits, c);
        }
        acc
    }
}

/// Count lattice points on `Q(x,y) = n` for `n = 0..=order` by scanning the
/// ellipse `Q <= order`.
pub fn theta_form(f: BinaryQuadraticForm, order: usize) -> ThetaExpansion {
    let mut r = vec![0u64; order + 1];
    let neg_d = (4 * f.a * f.c - f.b * f.b) as f64;
    let n = order as f64;
    let xb = (4.0 * f.c as f64 * n / neg_d).sqrt() as i64 + 1;
    let yb = (4.0 * f.a as f64 * n / neg_d).sqrt() as i64 + 1;
    for x in -xb..=xb {
        for y in -yb..=yb {
            let v = f.eval(x, y);
            if 0 <= v && v <= order as i64 {
                r[v as usize] += 1;
            }
        }
    }
    ThetaExpansion { form: f, r }
}
