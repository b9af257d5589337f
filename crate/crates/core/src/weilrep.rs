//! Finite quadratic modules attached to odd discriminants and the explicit
//! Weil representation matrices rho(T), rho(S), with unitarity, braid, and
//! Gauss-sum (Milgram) verification.

use crate::arith::Discriminant;
use crate::qseries::PrecisionContext;
use crate::{Error, Result};
use rug::{Complex, Float, Rational};
use serde::Serialize;

/// A direct sum of cyclic components `Z/n_i` with `q(k e_i) = k^2 q_i mod 1`.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteQuadraticModule {
    pub orders: Vec<u64>,
    /// value of q on the generator of each component
    pub q_gens: Vec<Rational>,
    pub signature_mod_8: i32,
    /// common denominator of all q and bilinear values
    pub level: u64,
}

fn frac_mod_1(r: Rational) -> Rational {
    let f = r.fract_floor(rug::Integer::new());
    f.0
}

impl FiniteQuadraticModule {
    pub fn new(orders: Vec<u64>, q_gens: Vec<Rational>, signature_mod_8: i32) -> Result<Self> {
        if orders.len() != q_gens.len() || orders.iter().any(|&n| n == 0) {
            return Err(Error::Domain("malformed quadratic module".into()));
        }
        let mut level = 1u64;
        for (&n, q) in orders.iter().zip(&q_gens) {
            // q(k) = k^2 q_gen must be well-defined mod 1 on Z/n: n^2 q in Z
            let scaled = Rational::from(q * Rational::from(n * n));
            if !scaled.is_integer() {
                return Err(Error::Domain("q is not well-defined on the cyclic component".into()));
            }
            let den = q.denom().to_u64().unwrap_or(0);
            if den == 0 {
                return Err(Error::Domain("q denominator overflow".into()));
            }
            level = lcm(level, den);
        }
        let m = FiniteQuadraticModule {
            orders,
            q_gens,
            signature_mod_8,
            level,
        };
        // nondegeneracy per component: the pairing 2 x y q_gen must be
        // nontrivial against every nonzero x
        for (i, &n) in m.orders.iter().enumerate() {
            for x in 1..n {
                let degenerate = (0..n).all(|y| {
                    let b = Rational::from(&m.q_gens[i] * Rational::from(2 * x * y));
                    frac_mod_1(b) == 0
                });
                if degenerate {
                    return Err(Error::Domain(format!(
                        "degenerate element {x} in cyclic component of order {n}"
                    )));
                }
            }
        }
        Ok(m)
    }

    pub fn size(&self) -> u64 {
        self.orders.iter().product()
    }

    pub fn decode(&self, mut idx: usize) -> Vec<u64> {
        let mut out = vec![0u64; self.orders.len()];
        for i in (0..self.orders.len()).rev() {
            out[i] = (idx as u64) % self.orders[i];
            idx /= self.orders[i] as usize;
        }
        out
    }

    pub fn encode(&self, tuple: &[u64]) -> usize {
        let mut idx = 0usize;
        for (i, &n) in self.orders.iter().enumerate() {
            idx = idx * n as usize + (tuple[i] % n) as usize;
        }
        idx
    }

    pub fn neg(&self, idx: usize) -> usize {
        let t = self.decode(idx);
        let neg: Vec<u64> = t
            .iter()
            .zip(&self.orders)
            .map(|(&x, &n)| (n - x) % n)
            .collect();
        self.encode(&neg)
    }

    /// `q(x) mod 1`
    pub fn q_value(&self, tuple: &[u64]) -> Rational {
        let mut s = Rational::new();
        for (i, &x) in tuple.iter().enumerate() {
            s += Rational::from(&self.q_gens[i] * Rational::from(x * x));
        }
        frac_mod_1(s)
    }

    /// bilinear form `b(x, y) = q(x+y) - q(x) - q(y) mod 1`
    pub fn bilinear(&self, a: &[u64], b: &[u64]) -> Rational {
        let mut s = Rational::new();
        for i in 0..self.orders.len() {
            s += Rational::from(&self.q_gens[i] * Rational::from(2 * a[i] * b[i]));
        }
        frac_mod_1(s)
    }

    /// `Sigma_x e(q(x))`
    pub fn gauss_sum(&self, ctx: &PrecisionContext) -> Complex {
        let mut s = Complex::with_val(ctx.bits, 0);
        for idx in 0..self.size() as usize {
            let t = self.decode(idx);
            s += e_frac(&self.q_value(&t), ctx);
        }
        s
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    let mut x = a;
    let mut y = b;
    while y != 0 {
        let t = x % y;
        x = y;
        y = t;
    }
    a / x * b
}

fn e_frac(r: &Rational, ctx: &PrecisionContext) -> Complex {
    ctx.e(&Complex::with_val(ctx.bits, (r, &Rational::new())))
}

/// `Z/|D| + Z/2|D|` with `q(x, y) = x^2/|D| - y^2/(4|D|)`, the discriminant
/// module of the odd-discriminant lattice pair; signature 1 mod 8.
pub fn fqm_for_gz(d: Discriminant) -> Result<FiniteQuadraticModule> {
    if !d.is_odd() {
        return Err(Error::EvenDiscriminant(d.value()));
    }
    let abs_d = d.abs() as u64;
    FiniteQuadraticModule::new(
        vec![abs_d, 2 * abs_d],
        vec![
            Rational::from((1, abs_d)),
            -Rational::from((1, 4 * abs_d)),
        ],
        1,
    )
}

/// `t` with `2t = 1 mod |D|`, and the coset element `y (t, 1)` matching the
/// scalar Fourier bookkeeping (the sign of `t` is immaterial downstream).
pub fn two_inverse(d: Discriminant) -> u64 {
    (d.abs() as u64 + 1) / 2
}

pub fn scalar_coset_map(d: Discriminant, y: i64) -> Result<Vec<u64>> {
    if !d.is_odd() {
        return Err(Error::EvenDiscriminant(d.value()));
    }
    let abs_d = d.abs() as u64;
    let t = two_inverse(d);
    let y1 = y.rem_euclid(abs_d as i64) as u64;
    let y2 = y.rem_euclid(2 * abs_d as i64) as u64;
    Ok(vec![(y1 * t) % abs_d, y2])
}

/// Dense Weil representation matrices.
pub struct WeilMatrices {
    pub rho_t: Vec<Complex>,
    pub rho_s: Vec<Vec<Complex>>,
}

/// `rho(T) = diag e(q(mu))`; `rho(S) = e(-sgn/8)/sqrt|A| (e(-(mu,nu)))`.
pub fn weil_matrices(
    a: &FiniteQuadraticModule,
    sgn: i32,
    ctx: &PrecisionContext,
) -> WeilMatrices {
    let n = a.size() as usize;
    // all entries are level-th roots of unity: build the table once
    let level = a.level as i64;
    let roots: Vec<Complex> = (0..level)
        .map(|k| e_frac(&Rational::from((k, level)), ctx))
        .collect();
    let root_of = |r: &Rational| -> Complex {
        let k = Rational::from(r * Rational::from(level)).numer().to_i64().unwrap();
        roots[k.rem_euclid(level) as usize].clone()
    };
    let tuples: Vec<Vec<u64>> = (0..n).map(|i| a.decode(i)).collect();
    let rho_t: Vec<Complex> = tuples.iter().map(|t| root_of(&a.q_value(t))).collect();
    let prefactor = e_frac(&Rational::from((-(sgn as i64), 16)), ctx)
        .square()
        / Float::with_val(ctx.bits, n).sqrt();
    let rho_s: Vec<Vec<Complex>> = tuples
        .iter()
        .map(|mu| {
            tuples
                .iter()
                .map(|nu| {
                    let b = -a.bilinear(mu, nu);
                    Complex::with_val(ctx.bits, &prefactor * &root_of(&frac_mod_1(b)))
                })
                .collect()
        })
        .collect();
    WeilMatrices { rho_t, rho_s }
}

/// Per-component discrete transforms realizing `rho(S)` up to the scalar
/// prefactor; applying them costs `|A| (n_1 + ... + n_k)` instead of `|A|^2`.
struct SeparableS {
    factors: Vec<Vec<Vec<Complex>>>,
    prefactor: Complex,
    orders: Vec<u64>,
}

impl SeparableS {
    fn build(a: &FiniteQuadraticModule, sgn: i32, ctx: &PrecisionContext) -> Self {
        let mut factors = Vec::new();
        for (i, &n) in a.orders.iter().enumerate() {
            let mat: Vec<Vec<Complex>> = (0..n)
                .map(|x| {
                    (0..n)
                        .map(|y| {
                            let b = frac_mod_1(-Rational::from(
                                &a.q_gens[i] * Rational::from(2 * x * y),
                            ));
                            e_frac(&b, ctx)
                        })
                        .collect()
                })
                .collect();
            factors.push(mat);
        }
        let prefactor = Complex::from(
            e_frac(&Rational::from((-(sgn as i64), 16)), ctx).square(),
        ) / Float::with_val(ctx.bits, a.size()).sqrt();
        SeparableS {
            factors,
            prefactor,
            orders: a.orders.clone(),
        }
    }

    /// apply along one axis of the flattened tensor
    fn apply_axis(&self, v: &[Complex], axis: usize, conj: bool, bits: u32) -> Vec<Complex> {
        let n = self.orders[axis] as usize;
        let stride: usize = self.orders[axis + 1..].iter().product::<u64>() as usize;
        let outer = v.len() / (n * stride);
        let mut out = vec![Complex::with_val(bits, 0); v.len()];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for x in 0..n {
                    let mut acc = Complex::with_val(bits, 0);
                    for y in 0..n {
                        let m = if conj {
                            Complex::with_val(bits, self.factors[axis][y][x].clone().conj())
                        } else {
                            self.factors[axis][x][y].clone()
                        };
                        acc += m * &v[base + y * stride];
                    }
                    out[base + x * stride] = acc;
                }
            }
        }
        out
    }

    fn apply(&self, v: &[Complex], bits: u32) -> Vec<Complex> {
        let mut cur = v.to_vec();
        for axis in 0..self.orders.len() {
            cur = self.apply_axis(&cur, axis, false, bits);
        }
        cur.iter()
            .map(|c| Complex::with_val(bits, c * &self.prefactor))
            .collect()
    }

    fn apply_adjoint(&self, v: &[Complex], bits: u32) -> Vec<Complex> {
        let mut cur = v.to_vec();
        for axis in 0..self.orders.len() {
            cur = self.apply_axis(&cur, axis, true, bits);
        }
        let pc = Complex::with_val(bits, self.prefactor.clone().conj());
        cur.iter().map(|c| Complex::with_val(bits, c * &pc)).collect()
    }
}

/// Residuals of the defining relations.
#[derive(Debug, Clone, Serialize)]
pub struct WeilReport {
    pub unitarity: f64,
    pub braid: f64,
    pub s_square_negation: f64,
    pub dense_consistency: f64,
    pub milgram_abs: f64,
    pub milgram_phase: f64,
    pub max_residual: f64,
}

fn max_abs_diff(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| Complex::with_val(x.prec().0, x - y).abs().real().to_f64())
        .fold(0.0, f64::max)
}

/// Check unitarity, the braid relation `(rho_S rho_T)^3 = rho_S^2`, the
/// negation action of `rho_S^2`, agreement of the dense `rho_S` with the
/// separable transforms, and the Milgram formula.
pub fn verify_relations(
    w: &WeilMatrices,
    a: &FiniteQuadraticModule,
    sgn: i32,
    ctx: &PrecisionContext,
) -> WeilReport {
    let bits = ctx.bits;
    let n = a.size() as usize;
    let sep = SeparableS::build(a, sgn, ctx);
    let apply_t = |v: &[Complex]| -> Vec<Complex> {
        v.iter()
            .enumerate()
            .map(|(i, c)| Complex::with_val(bits, c * &w.rho_t[i]))
            .collect()
    };
    let central = e_frac(&Rational::from((-(sgn as i64), 8)), ctx).square();
    let mut unitarity = 0.0f64;
    let mut braid = 0.0f64;
    let mut s_square = 0.0f64;
    let mut dense = 0.0f64;
    for mu in 0..n {
        let mut basis = vec![Complex::with_val(bits, 0); n];
        basis[mu] = Complex::with_val(bits, 1);
        let s1 = sep.apply(&basis, bits);
        // dense column mu of rho_S
        let col: Vec<Complex> = (0..n).map(|r| w.rho_s[r][mu].clone()).collect();
        dense = dense.max(max_abs_diff(&s1, &col));
        // unitarity: S^dagger S = 1
        unitarity = unitarity.max(max_abs_diff(&sep.apply_adjoint(&s1, bits), &basis));
        // braid: (S T)^3 = S^2
        let x1 = sep.apply(&apply_t(&basis), bits);
        let x2 = sep.apply(&apply_t(&x1), bits);
        let x3 = sep.apply(&apply_t(&x2), bits);
        let s2 = sep.apply(&s1, bits);
        braid = braid.max(max_abs_diff(&x3, &s2));
        // S^2 = e(-sgn/4) * negation
        let mut expected = vec![Complex::with_val(bits, 0); n];
        expected[a.neg(mu)] = central.clone();
        s_square = s_square.max(max_abs_diff(&s2, &expected));
    }
    // diagonal unitarity of rho_T
    for c in &w.rho_t {
        let dev = (c.clone().abs().real().to_f64() - 1.0).abs();
        unitarity = unitarity.max(dev);
    }
    let gs = a.gauss_sum(ctx);
    let sqrt_n = Float::with_val(bits, n).sqrt();
    let milgram_abs = (Float::with_val(bits, gs.clone().abs().real()) - &sqrt_n)
        .abs()
        .to_f64();
    let expected_phase = e_frac(&Rational::from((a.signature_mod_8 as i64, 8)), ctx) * &sqrt_n;
    let milgram_phase = Complex::with_val(bits, gs - expected_phase)
        .abs()
        .real()
        .to_f64();
    let max_residual = [unitarity, braid, s_square, dense, milgram_abs, milgram_phase]
        .into_iter()
        .fold(0.0, f64::max);
    WeilReport {
        unitarity,
        braid,
        s_square_negation: s_square,
        dense_consistency: dense,
        milgram_abs,
        milgram_phase,
        max_residual,
    }
}
