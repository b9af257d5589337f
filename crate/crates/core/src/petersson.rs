//! Petersson norms of dihedral weight-one theta forms for prime
//! discriminants: the class-character decomposition `theta_psi`, the closed
//! formula through CM values of the Dedekind eta function, and a direct
//! quadrature oracle over a fundamental domain of `Gamma_0(|D|)`.

use crate::arith::{factorize, Discriminant};
use crate::cyclotomic::{Cyc, CyclotomicField};
use crate::qforms::{cm_point, reduce, BinaryQuadraticForm, FormClassGroup};
use crate::qseries::{eta, PrecisionContext, QExpansion};
use crate::{Error, Result};
use rug::{Complex, Float, Integer, Rational};
use serde::Serialize;

/// A character of the form class group, with values stored exactly as
/// root-of-unity exponents: `psi(classes[i]) = e(exponents[i] / modulus)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassCharacter {
    pub modulus: u32,
    pub exponents: Vec<u32>,
}

impl ClassCharacter {
    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    /// order of the character in the dual group
    pub fn order(&self) -> u32 {
        let g = self
            .exponents
            .iter()
            .fold(self.modulus, |acc, &e| num_gcd(acc, e));
        self.modulus / g.max(1)
    }

    /// `psi^2`
    pub fn square(&self) -> ClassCharacter {
        ClassCharacter {
            modulus: self.modulus,
            exponents: self
                .exponents
                .iter()
                .map(|&e| (2 * e) % self.modulus)
                .collect(),
        }
    }

    pub fn value(&self, class_index: usize, field: &CyclotomicField) -> Cyc {
        field.root(self.exponents[class_index] as i64)
    }

    pub fn value_numeric(&self, class_index: usize, ctx: &PrecisionContext) -> Complex {
        let arg = Rational::from((self.exponents[class_index], self.modulus));
        ctx.e(&Complex::with_val(ctx.bits, (arg, Rational::new())))
    }
}

fn num_gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

fn group_exponent(g: &FormClassGroup) -> u32 {
    let mut m = 1u32;
    for i in 0..g.h {
        let mut ord = 1u32;
        let mut cur = i;
        while cur != 0 {
            cur = g.composition_table[cur][i];
            ord += 1;
        }
        m = m / num_gcd(m, ord) * ord;
    }
    m
}

/// All `h` characters of the class group, built by extending characters
/// subgroup by subgroup.
pub fn characters(g: &FormClassGroup) -> Vec<ClassCharacter> {
    let m = group_exponent(g);
    let table = &g.composition_table;
    // subgroup as an element->exponent map (usize::MAX for "not a member")
    let mut members: Vec<Option<u32>> = vec![None; g.h];
    members[0] = Some(0);
    let mut chars: Vec<Vec<u32>> = vec![{
        let mut v = vec![0u32; g.h];
        v[0] = 0;
        v
    }];
    let mut subgroup: Vec<usize> = vec![0];
    while subgroup.len() < g.h {
        let gen = (0..g.h).find(|i| members[*i].is_none()).unwrap();
        // order of gen modulo the current subgroup
        let mut q = 1u32;
        let mut pow = gen;
        while members[pow].is_none() {
            pow = table[pow][gen];
            q += 1;
        }
        // cosets (h * gen^j, h, j)
        let mut coset_reps: Vec<(usize, usize, u32)> = Vec::new();
        for j in 0..q {
            for &h in &subgroup {
                let mut e = h;
                for _ in 0..j {
                    e = table[e][gen];
                }
                coset_reps.push((e, h, j));
            }
        }
        let mut new_chars = Vec::with_capacity(chars.len() * q as usize);
        for c in &chars {
            // extensions assign chi(gen) = s with q*s = chi(gen^q) (mod m);
            // solvable because gen^q sits in the subgroup and every element
            // order divides m
            let t = c[pow];
            let base = (0..m)
                .find(|&s| (q * s) % m == t)
                .expect("character extension always solvable");
            for k in 0..q {
                let s = (base + k * (m / q)) % m;
                let mut v = c.clone();
                for &(elem, h, j) in &coset_reps {
                    v[elem] = (c[h] + j * s) % m;
                }
                new_chars.push(v);
            }
        }
        chars = new_chars;
        subgroup = coset_reps.into_iter().map(|(e, _, _)| e).collect();
        for &e in &subgroup {
            members[e] = Some(0);
        }
    }
    chars.sort();
    chars.dedup();
    chars
        .into_iter()
        .map(|exponents| ClassCharacter {
            modulus: m,
            exponents,
        })
        .collect()
}

/// Exact expansion `(1/w_D) sum_classes psi(class) theta_class` with
/// cyclotomic coefficients.
#[derive(Debug, Clone)]
pub struct ThetaPsi {
    pub field: CyclotomicField,
    /// coefficient of `q^n` at index `n`
    pub coefficients: Vec<Cyc>,
}

impl ThetaPsi {
    /// rational coefficient list, if every coefficient lies in Q
    pub fn rational_coefficients(&self) -> Option<Vec<Rational>> {
        self.coefficients
            .iter()
            .map(|c| self.field.as_rational(c))
            .collect()
    }

    pub fn coefficient_numeric(&self, n: usize, ctx: &PrecisionContext) -> Complex {
        self.field.eval(&self.coefficients[n], ctx)
    }
}

pub fn theta_psi(g: &FormClassGroup, psi: &ClassCharacter, order: usize) -> ThetaPsi {
    let field = CyclotomicField::new(psi.modulus);
    let thetas: Vec<_> = g
        .classes
        .iter()
        .map(|&f| crate::qseries::theta_form(f, order))
        .collect();
    let inv_w = Rational::from((1u32, g.w));
    let mut coefficients = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut c = field.zero();
        for (i, t) in thetas.iter().enumerate() {
            let val = field.scale(&psi.value(i, &field), &Rational::from(t.r[n]));
            c = field.add(&c, &val);
        }
        coefficients.push(field.scale(&c, &inv_w));
    }
    ThetaPsi {
        field,
        coefficients,
    }
}

/// `sqrt(y_Q) |eta(alpha_Q)|^2` at the reduced CM point of the class.
pub fn eta_cm_value(q: BinaryQuadraticForm, ctx: &PrecisionContext) -> Result<Float> {
    let p = cm_point(reduce(q), ctx);
    let e = eta(&p.alpha, ctx)?;
    let abs_sq: Float = e.abs().real().clone().square();
    Ok(p.y.clone().sqrt() * abs_sq)
}

/// The Petersson norm of `theta_chi` through the CM-value formula.
#[derive(Debug, Clone)]
pub struct PeterssonValue {
    pub character: ClassCharacter,
    pub numeric: Float,
    pub imag_residual: Float,
    pub terms: Vec<(BinaryQuadraticForm, Complex, Float)>,
}

/// `(theta_chi, theta_chi) = -(4 h_D / w_D^2) sum_Q psi(Q) log(sqrt(y_Q) |eta(alpha_Q)|^2)`
/// with `psi = chi^2`, for prime `|D|`.
pub fn petersson_norm_eta(
    d: Discriminant,
    chi: &ClassCharacter,
    ctx: &PrecisionContext,
) -> Result<PeterssonValue> {
    let p = d.abs() as u64;
    if factorize(p)?.factors != vec![(p, 1)] {
        return Err(Error::NotPrime(d.value()));
    }
    let psi = chi.square();
    if psi.is_trivial() {
        return Err(Error::Domain(
            "the CM-value norm formula requires a character whose square is nontrivial".into(),
        ));
    }
    let g = FormClassGroup::new(d)?;
    let mut sum = Complex::with_val(ctx.bits, 0);
    let mut terms = Vec::new();
    for (i, &q) in g.classes.iter().enumerate() {
        let log_val = eta_cm_value(q, ctx)?.ln();
        let psi_q = psi.value_numeric(i, ctx);
        sum += Complex::with_val(ctx.bits, &psi_q * &log_val);
        terms.push((q, psi_q, log_val));
    }
    let scale = Float::with_val(ctx.bits, -4i32 * g.h as i32) / (g.w * g.w);
    let value = sum * scale;
    let numeric = value.real().clone();
    let imag_residual = value.imag().clone().abs();
    if !(numeric.is_sign_positive() && !numeric.is_zero()) {
        return Err(Error::Domain(format!(
            "Petersson norm came out non-positive: {}",
            numeric.to_f64()
        )));
    }
    Ok(PeterssonValue {
        character: chi.clone(),
        numeric,
        imag_residual,
        terms,
    })
}

/// `prod_{n >= 1} (1 - q^n)` to the given order (pentagonal-number sparse
/// expansion).
pub fn euler_product_expansion(order: usize) -> QExpansion {
    let mut coefficients = vec![Integer::new(); order + 1];
    coefficients[0] = Integer::from(1);
    let mut k = 1i64;
    loop {
        let e1 = k * (3 * k - 1) / 2;
        let e2 = k * (3 * k + 1) / 2;
        if e1 as usize > order {
            break;
        }
        let sign = if k % 2 == 0 { 1 } else { -1 };
        coefficients[e1 as usize] += sign;
        if e2 as usize <= order {
            coefficients[e2 as usize] += sign;
        }
        k += 1;
    }
    QExpansion {
        leading_exponent: 0,
        coefficients,
    }
}

/// The expansion of `eta(tau) eta(N tau)` for `(1 + N) | 24`-compatible
/// levels: `q^{(1+N)/24} prod (1-q^n)(1-q^{Nn})`.
pub fn eta_product_expansion(n_scale: u32, order: usize) -> QExpansion {
    let a = euler_product_expansion(order);
    let scaled = {
        let src = euler_product_expansion(order / n_scale as usize);
        let mut coefficients = vec![Integer::new(); order + 1];
        for (i, c) in src.coefficients.iter().enumerate() {
            if i * n_scale as usize <= order {
                coefficients[i * n_scale as usize] = c.clone();
            }
        }
        QExpansion {
            leading_exponent: 0,
            coefficients,
        }
    };
    let mut prod = a.mul(&scaled);
    prod.leading_exponent = ((1 + n_scale) / 24) as i64;
    prod
}

#[derive(Clone, Copy)]
struct C64 {
    re: f64,
    im: f64,
}

impl C64 {
    fn norm_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    fn mul(self, o: C64) -> C64 {
        C64 {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

/// `sum a(n) q^n` at `tau = u + iv`, truncating once the tail is negligible.
fn eval_cusp_form(coeffs: &[f64], u: f64, v: f64) -> C64 {
    let decay = 2.0 * std::f64::consts::PI * v;
    let n_cut = ((34.0 / decay).ceil() as usize).min(coeffs.len());
    let arg = 2.0 * std::f64::consts::PI * u;
    let q = C64 {
        re: (-decay).exp() * arg.cos(),
        im: (-decay).exp() * arg.sin(),
    };
    let mut acc = C64 { re: 0.0, im: 0.0 };
    for n in (0..n_cut).rev() {
        acc = acc.mul(q);
        acc.re += coeffs[n];
    }
    // overall factor q^1 (coeffs[0] is the coefficient of q^1)
    acc.mul(q)
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    // nodes/weights on [-1, 1] by Newton iteration on Legendre polynomials
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Numeric `int |f|^2 v dmu` over a fundamental domain of `Gamma_0(N)`,
/// assembled from the coset translates `F` and `S T^k F` of the standard
/// domain.  Double precision; target accuracy ~1%.
pub fn petersson_quadrature(coeffs_from_q1: &[f64], level: u32) -> f64 {
    let nodes_u = gauss_legendre(48);
    let nodes_t = gauss_legendre(96);
    let v_max = 48.0f64;
    // integrand H(tau) = |f(tau)|^2 Im(tau), Gamma_0(N)-invariant;
    // evaluated at gamma*tau for each coset representative gamma
    let eval_tile = |gamma: Option<u32>| -> f64 {
        let mut tile = 0.0;
        for &(xu, wu) in &nodes_u {
            let u = 0.5 * xu;
            let v0 = (1.0 - u * u).sqrt();
            let t_half = 0.5 * (v_max / v0).ln();
            for &(xt, wt) in &nodes_t {
                let t = t_half * (xt + 1.0);
                let v = v0 * t.exp();
                // dmu = du dv / v^2, with v = v0 e^t: dv = v dt
                let measure = 0.5 * wu * t_half * wt / v;
                let (pu, pv) = match gamma {
                    None => (u, v),
                    Some(k) => {
                        // S T^k : tau -> -1/(tau + k)
                        let a = u + k as f64;
                        let den = a * a + v * v;
                        (-a / den, v / den)
                    }
                };
                let h = eval_cusp_form(coeffs_from_q1, pu, pv).norm_sq() * pv;
                tile += measure * h;
            }
        }
        tile
    };
    let mut total = eval_tile(None);
    for k in 0..level {
        total += eval_tile(Some(k));
    }
    total
}

/// Hyperbolic area of the tiling used by the quadrature, for validation
/// against `(N + 1) * pi / 3`.
pub fn quadrature_area(level: u32) -> f64 {
    let nodes_u = gauss_legendre(48);
    let nodes_t = gauss_legendre(96);
    let v_max = 48.0f64;
    let mut area_one = 0.0;
    for &(xu, wu) in &nodes_u {
        let u = 0.5 * xu;
        let v0 = (1.0 - u * u).sqrt();
        let t_half = 0.5 * (v_max / v0).ln();
        for &(xt, wt) in &nodes_t {
            let t = t_half * (xt + 1.0);
            let v = v0 * t.exp();
            area_one += 0.5 * wu * t_half * wt / v;
        }
    }
    // analytic tail of the truncated cusp neighborhood
    area_one += 1.0 / v_max;
    area_one * (level + 1) as f64
}
