//! Exact arithmetic in the cyclotomic field `Q(zeta_m)`: elements are
//! rational coefficient vectors modulo the m-th cyclotomic polynomial.
//! Used for class-group characters and their exact orthogonality.

use crate::qseries::PrecisionContext;
use rug::{Complex, Rational};

/// Coefficients of a polynomial over Q, lowest degree first.
type Poly = Vec<Rational>;

fn poly_trim(p: &mut Poly) {
    while p.last().map(|c| *c == 0).unwrap_or(false) {
        p.pop();
    }
}

/// Quotient-free exact division: returns `a / b` assuming it is exact
/// (used for `(x^m - 1) / prod of lower cyclotomics`).
fn poly_div_exact(a: &Poly, b: &Poly) -> Poly {
    let mut rem = a.clone();
    poly_trim(&mut rem);
    let mut b = b.clone();
    poly_trim(&mut b);
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut q = vec![Rational::new(); rem.len().saturating_sub(db)];
    while rem.len() > db {
        let da = rem.len() - 1;
        let c = rem[da].clone() / lead.clone();
        q[da - db] = c.clone();
        for i in 0..=db {
            let sub = b[i].clone() * c.clone();
            rem[da - db + i] -= sub;
        }
        poly_trim(&mut rem);
        if rem.is_empty() {
            break;
        }
    }
    q
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![Rational::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += Rational::from(x * y);
        }
    }
    out
}

/// The m-th cyclotomic polynomial via `x^m - 1 = prod_{d | m} Phi_d`.
fn cyclotomic_poly(m: u32) -> Poly {
    let mut num: Poly = vec![Rational::new(); m as usize + 1];
    num[0] = Rational::from(-1);
    num[m as usize] = Rational::from(1);
    let mut den: Poly = vec![Rational::from(1)];
    for d in 1..m {
        if m % d == 0 {
            den = poly_mul(&den, &cyclotomic_poly(d));
        }
    }
    poly_div_exact(&num, &den)
}

/// The field `Q(zeta_m)` with elements as length-`deg` rational vectors in
/// the power basis `1, zeta, ..., zeta^{deg-1}`.
#[derive(Debug, Clone)]
pub struct CyclotomicField {
    pub m: u32,
    pub deg: usize,
    /// `zeta^j` reduced into the power basis, for `0 <= j < m`
    powers: Vec<Vec<Rational>>,
}

pub type Cyc = Vec<Rational>;

impl CyclotomicField {
    pub fn new(m: u32) -> Self {
        let phi = cyclotomic_poly(m);
        let deg = phi.len() - 1;
        // x^j mod Phi_m, iteratively: x^{j+1} = shift, reduce by the monic Phi
        let mut powers: Vec<Vec<Rational>> = Vec::with_capacity(m as usize);
        let mut cur = vec![Rational::new(); deg];
        cur[0] = Rational::from(1);
        for _ in 0..m {
            powers.push(cur.clone());
            // multiply by x
            let top = cur[deg - 1].clone();
            for i in (1..deg).rev() {
                cur[i] = cur[i - 1].clone();
            }
            cur[0] = Rational::new();
            if top != 0 {
                // x^deg = -(phi[0] + ... + phi[deg-1] x^{deg-1})
                for i in 0..deg {
                    cur[i] -= Rational::from(&phi[i] * &top);
                }
            }
        }
        CyclotomicField { m, deg, powers }
    }

    pub fn zero(&self) -> Cyc {
        vec![Rational::new(); self.deg]
    }

    pub fn one(&self) -> Cyc {
        self.root(0)
    }

    /// `zeta_m^k`
    pub fn root(&self, k: i64) -> Cyc {
        self.powers[k.rem_euclid(self.m as i64) as usize].clone()
    }

    pub fn add(&self, a: &Cyc, b: &Cyc) -> Cyc {
        a.iter().zip(b).map(|(x, y)| Rational::from(x + y)).collect()
    }

    pub fn scale(&self, a: &Cyc, r: &Rational) -> Cyc {
        a.iter().map(|x| Rational::from(x * r)).collect()
    }

    pub fn mul(&self, a: &Cyc, b: &Cyc) -> Cyc {
        let mut out = self.zero();
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if *y == 0 {
                    continue;
                }
                let c = Rational::from(x * y);
                let pw = &self.powers[(i + j) % self.m as usize];
                // zeta^{i+j}: i+j < 2 deg <= 2m, wrap through zeta^m = zeta^{i+j-m}...
                // power index must be taken mod m only when i+j >= m; since
                // zeta^m = 1 the residue is exact
                for (k, p) in pw.iter().enumerate() {
                    out[k] += Rational::from(&c * p);
                }
            }
        }
        out
    }

    /// complex conjugation `zeta -> zeta^{-1}`
    pub fn conj(&self, a: &Cyc) -> Cyc {
        let mut out = self.zero();
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            let pw = &self.powers[((self.m as usize - i) % self.m as usize) % self.m as usize];
            for (k, p) in pw.iter().enumerate() {
                out[k] += Rational::from(x * p);
            }
        }
        out
    }

    pub fn is_zero(&self, a: &Cyc) -> bool {
        a.iter().all(|x| *x == 0)
    }

    pub fn eq(&self, a: &Cyc, b: &Cyc) -> bool {
        a == b
    }

    /// the rational number an element represents, if it lies in Q
    pub fn as_rational(&self, a: &Cyc) -> Option<Rational> {
        if a[1..].iter().all(|x| *x == 0) {
            Some(a[0].clone())
        } else {
            None
        }
    }

    /// numeric realization at `zeta_m = e(1/m)`
    pub fn eval(&self, a: &Cyc, ctx: &PrecisionContext) -> Complex {
        let zeta = ctx.e(&Complex::with_val(
            ctx.bits,
            (Rational::from((1, self.m)), Rational::new()),
        ));
        let mut acc = Complex::with_val(ctx.bits, 0);
        for c in a.iter().rev() {
            acc *= &zeta;
            acc += Complex::with_val(ctx.bits, c);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn cyclotomic_polynomials() {
        // Phi_1 = x - 1, Phi_3 = x^2 + x + 1, Phi_4 = x^2 + 1,
        // Phi_6 = x^2 - x + 1, Phi_12 = x^4 - x^2 + 1
        assert_eq!(cyclotomic_poly(1), vec![r(-1), r(1)]);
        assert_eq!(cyclotomic_poly(3), vec![r(1), r(1), r(1)]);
        assert_eq!(cyclotomic_poly(4), vec![r(1), r(0), r(1)]);
        assert_eq!(cyclotomic_poly(6), vec![r(1), r(-1), r(1)]);
        assert_eq!(cyclotomic_poly(12), vec![r(1), r(0), r(-1), r(0), r(1)]);
    }

    #[test]
    fn roots_of_unity_relations() {
        for m in [3u32, 4, 5, 6, 8, 12] {
            let f = CyclotomicField::new(m);
            // zeta^m = 1
            assert_eq!(f.root(m as i64), f.one());
            // zeta^a * zeta^b = zeta^{a+b}
            for a in 0..m as i64 {
                for b in 0..m as i64 {
                    let prod = f.mul(&f.root(a), &f.root(b));
                    assert!(f.eq(&prod, &f.root(a + b)), "m={m} a={a} b={b}");
                }
            }
            // zeta * conj(zeta) = 1
            let z = f.root(1);
            assert!(f.eq(&f.mul(&z, &f.conj(&z)), &f.one()));
            // sum over a full orbit vanishes (m prime cases)
            if m == 3 || m == 5 {
                let mut s = f.zero();
                for k in 0..m as i64 {
                    s = f.add(&s, &f.root(k));
                }
                assert!(f.is_zero(&s));
            }
        }
    }

    #[test]
    fn numeric_realization() {
        let ctx = PrecisionContext::new(128);
        let f = CyclotomicField::new(12);
        let v = f.eval(&f.root(3), &ctx); // e(1/4) = i
        assert!(v.real().to_f64().abs() < 1e-30);
        assert!((v.imag().to_f64() - 1.0).abs() < 1e-30);
        let w = f.eval(&f.add(&f.root(1), &f.conj(&f.root(1))), &ctx); // 2cos(pi/6)
        assert!((w.real().to_f64() - 3f64.sqrt()).abs() < 1e-30);
        assert!(w.imag().to_f64().abs() < 1e-30);
    }

    #[test]
    fn rational_detection() {
        let f = CyclotomicField::new(3);
        let z = f.root(1);
        let s = f.add(&f.add(&z, &f.conj(&z)), &f.one()); // zeta + zeta^2 + 1 = 0
        assert_eq!(f.as_rational(&s), Some(Rational::new()));
        assert_eq!(f.as_rational(&z), None);
        assert_eq!(f.as_rational(&f.scale(&f.one(), &Rational::from((3, 2)))), Some(Rational::from((3, 2))));
    }
}
