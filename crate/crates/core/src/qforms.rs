//! Positive definite binary quadratic forms: reduction, Gauss composition,
//! the form class group, genus characters, and CM points.

use crate::arith::{factorize, kronecker, Discriminant};
use crate::qseries::PrecisionContext;
use crate::{Error, Result};
use rug::{Complex, Float};
use serde::Serialize;

/// `a x^2 + b x y + c y^2` with `b^2 - 4ac < 0` and `a > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BinaryQuadraticForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl BinaryQuadraticForm {
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        if a <= 0 || b * b - 4 * a * c >= 0 {
            return Err(Error::NotPositiveDefinite(a, b, c));
        }
        Ok(BinaryQuadraticForm { a, b, c })
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() < a && a < c))
    }

    pub fn is_principal(&self) -> bool {
        let r = reduce(*self);
        r.a == 1
    }

    /// The reduced form of the inverse class, `[a, -b, c]` reduced.
    pub fn inverse(&self) -> BinaryQuadraticForm {
        reduce(BinaryQuadraticForm {
            a: self.a,
            b: -self.b,
            c: self.c,
        })
    }
}

impl std::fmt::Display for BinaryQuadraticForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

/// The unique reduced representative of the class of `f`.
pub fn reduce(f: BinaryQuadraticForm) -> BinaryQuadraticForm {
    let (mut a, mut b, mut c) = (f.a, f.b, f.c);
    loop {
        // translate b into (-a, a]
        if b > a || b <= -a {
            let k = (a - b).div_euclid(2 * a);
            let b2 = b + 2 * k * a;
            c += k * (b + k * a);
            b = b2;
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
        } else {
            break;
        }
    }
    if b < 0 && (a == c || b == -a) {
        b = -b;
    }
    BinaryQuadraticForm { a, b, c }
}

fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Gauss composition of classes; returns the reduced representative.
pub fn compose(f: BinaryQuadraticForm, g: BinaryQuadraticForm) -> Result<BinaryQuadraticForm> {
    let d = f.discriminant();
    if g.discriminant() != d {
        return Err(Error::MismatchedDiscriminants(d, g.discriminant()));
    }
    let (a1, b1) = (f.a as i128, f.b as i128);
    let (a2, b2) = (g.a as i128, g.b as i128);
    let beta = (b1 + b2) / 2;
    // m = t·a1 + u·a2 + w·beta = gcd(a1, a2, beta)
    let (g1, x, y) = egcd(f.a, g.a);
    let (m, s, w) = egcd(g1, beta as i64);
    let (t, u, w) = (x as i128 * s as i128, y as i128 * s as i128, w as i128);
    let m = m as i128;
    let a = a1 * a2 / (m * m);
    let bnum = (t * a1 * b2 + u * a2 * b1 + w * (b1 * b2 + d as i128) / 2) / m;
    let b = bnum.rem_euclid(2 * a);
    let c = (b * b - d as i128) / (4 * a);
    let composed = BinaryQuadraticForm {
        a: a as i64,
        b: b as i64,
        c: c as i64,
    };
    Ok(reduce(composed))
}

/// `compose(f, f)`, reduced.
pub fn square_class(f: BinaryQuadraticForm) -> Result<BinaryQuadraticForm> {
    compose(f, f)
}

/// The class group `Cl(D)` with its reduced representatives and
/// composition table.
#[derive(Debug, Clone, Serialize)]
pub struct FormClassGroup {
    pub discriminant: Discriminant,
    pub classes: Vec<BinaryQuadraticForm>,
    /// `composition_table[i][j]` is the index of `classes[i] * classes[j]`.
    pub composition_table: Vec<Vec<usize>>,
    pub h: usize,
    pub w: u32,
}

impl FormClassGroup {
    pub fn new(d: Discriminant) -> Result<Self> {
        let dv = d.value();
        let mut classes = Vec::new();
        let bound = ((dv.unsigned_abs() / 3) as f64).sqrt() as i64 + 1;
        for a in 1..=bound {
            for b in (-a + 1)..=a {
                if (b * b - dv).rem_euclid(4 * a) != 0 {
                    continue;
                }
                let c = (b * b - dv) / (4 * a);
                let f = BinaryQuadraticForm { a, b, c };
                if f.is_reduced() && f.discriminant() == dv {
                    classes.push(f);
                }
            }
        }
        // principal form first, then lexicographic by (a, b)
        classes.sort_by_key(|f| (f.a, f.b));
        let h = classes.len();
        let index = |f: &BinaryQuadraticForm| -> Result<usize> {
            classes
                .iter()
                .position(|g| g == f)
                .ok_or_else(|| Error::Domain(format!("composition left the class list: {f}")))
        };
        let mut composition_table = vec![vec![0usize; h]; h];
        for i in 0..h {
            for j in i..h {
                let k = index(&compose(classes[i], classes[j])?)?;
                composition_table[i][j] = k;
                composition_table[j][i] = k;
            }
        }
        Ok(FormClassGroup {
            discriminant: d,
            classes,
            composition_table,
            h,
            w: d.roots_of_unity(),
        })
    }

    pub fn principal(&self) -> BinaryQuadraticForm {
        self.classes[0]
    }

    pub fn index_of(&self, f: BinaryQuadraticForm) -> Result<usize> {
        let r = reduce(f);
        self.classes
            .iter()
            .position(|g| *g == r)
            .ok_or_else(|| Error::MismatchedDiscriminants(self.discriminant.value(), f.discriminant()))
    }
}

/// Values of the genus characters `chi_p` for the odd primes `p | D`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenusVector {
    pub values: Vec<(u64, i32)>,
}

/// A value `f(x,y)` coprime to the discriminant, from a small scan.
fn represented_coprime(f: BinaryQuadraticForm) -> i64 {
    let d = f.discriminant();
    let mut bound = 20i64;
    loop {
        for x in -bound..=bound {
            for y in -bound..=bound {
                let m = f.eval(x, y);
                if m != 0 && num_gcd(m, d) == 1 {
                    return m;
                }
            }
        }
        bound *= 2;
    }
}

fn num_gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Genus character `chi_p(f)` for an odd prime `p | D`:
/// `kronecker(p*, m)` with `p* = (-1)^((p-1)/2) p` and `m` represented
/// by `f` coprime to `D`.
pub fn genus_character(p: u64, f: BinaryQuadraticForm) -> Result<i32> {
    let d = f.discriminant();
    if p % 2 == 0 || d % (p as i64) != 0 {
        return Err(Error::Domain(format!("{p} is not an odd prime divisor of {d}")));
    }
    let p_star = if p % 4 == 1 { p as i64 } else { -(p as i64) };
    Ok(kronecker(p_star, represented_coprime(f)))
}

/// All genus character values of `f` at the odd primes dividing `D`.
pub fn genus_vector(f: BinaryQuadraticForm) -> Result<GenusVector> {
    let d = f.discriminant();
    let mut values = Vec::new();
    for p in factorize(d.unsigned_abs())?.primes() {
        if p % 2 == 1 {
            values.push((p, genus_character(p, f)?));
        }
    }
    Ok(GenusVector { values })
}

/// The CM point `alpha_Q = (-b + i sqrt|D|) / (2a)`.
#[derive(Debug, Clone)]
pub struct CMPoint {
    pub form: BinaryQuadraticForm,
    pub alpha: Complex,
    pub y: Float,
}

pub fn cm_point(f: BinaryQuadraticForm, ctx: &PrecisionContext) -> CMPoint {
    let abs_d = -f.discriminant();
    let sqrt_d = Float::with_val(ctx.bits, abs_d).sqrt();
    let two_a = Float::with_val(ctx.bits, 2 * f.a);
    let y = sqrt_d / &two_a;
    let x = Float::with_val(ctx.bits, -f.b) / &two_a;
    CMPoint {
        form: f,
        alpha: Complex::with_val(ctx.bits, (&x, &y)),
        y,
    }
}
