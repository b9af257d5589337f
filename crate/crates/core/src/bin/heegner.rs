//! Command-line interface: class groups, modular function values, kappa
//! coefficients, norm factorizations, CM-value identity verification,
//! Petersson norms, and Weil representation checks, all with JSON output.
//!
//! Exit codes: 0 success, 1 identity/recognition failure, 2 usage error.

use clap::{Parser, Subcommand};
use heegner::arith::Discriminant;
use heegner::cmidentity::{self, IdentityReport};
use heegner::eiskappa::{diff_set, EisensteinKappa};
use heegner::grosszagier::{gz_rhs_factorization, norm_product};
use heegner::petersson::{
    characters, petersson_norm_eta, petersson_quadrature, theta_psi,
};
use heegner::qforms::{BinaryQuadraticForm, FormClassGroup};
use heegner::qseries::{j_invariant, theta_form, PrecisionContext};
use heegner::weilrep::{fqm_for_gz, verify_relations, weil_matrices};
use rug::{Complex, Float};
use serde_json::{json, Value};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "heegner", about = "CM values of modular functions: exact factorizations and high-precision identity checks")]
struct Cli {
    /// working mantissa precision in bits (or HEEGNER_PRECISION_BITS)
    #[arg(long, global = true, env = "HEEGNER_PRECISION_BITS", default_value_t = 300)]
    precision_bits: u32,
    /// truncation order override for q-expansions
    #[arg(long, global = true)]
    q_order: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the form class group of a fundamental discriminant
    Classgroup {
        #[arg(allow_hyphen_values = true)]
        d: i64,
    },
    /// Evaluate the j-invariant at tau = "re,im"
    J { tau: String },
    /// Representation numbers of a positive definite form "a,b,c"
    Theta { form: String, order: usize },
    /// The coefficient kappa(n) for discriminant D
    Kappa {
        #[arg(allow_hyphen_values = true)]
        d: i64,
        n: i64,
    },
    /// Norm of the singular-moduli product vs the exact factorization
    Gz {
        #[arg(allow_hyphen_values = true)]
        big_d: i64,
        #[arg(allow_hyphen_values = true)]
        d: i64,
    },
    /// Verify the CM-value identity for a pair (D, d)
    Verify {
        #[arg(long = "D", allow_hyphen_values = true)]
        big_d: i64,
        #[arg(long = "d", allow_hyphen_values = true)]
        d: i64,
        /// average over the class group (any odd D)
        #[arg(long, conflicts_with = "individual")]
        averaged: bool,
        /// single-class identity (requires class number one)
        #[arg(long)]
        individual: bool,
    },
    /// Verify all admissible pairs with |D| <= Dmax, |d| <= dmax
    VerifyBatch {
        #[arg(long = "Dmax")]
        d_max: u64,
        #[arg(long = "dmax")]
        small_d_max: u64,
    },
    /// Petersson norm of the dihedral theta form for a prime discriminant
    Petersson {
        #[arg(long = "D", allow_hyphen_values = true)]
        big_d: i64,
        /// also run the quadrature oracle and report the relative difference
        #[arg(long)]
        oracle: bool,
    },
    /// Weil representation relation residuals for an odd discriminant
    Weilrep {
        #[arg(long = "D", allow_hyphen_values = true)]
        big_d: i64,
        #[arg(long)]
        check: bool,
    },
    /// The ramified-prime bound prod(1 + 1/p) <= 3
    Sturm {
        #[arg(allow_hyphen_values = true)]
        d: i64,
    },
}

fn float_json(x: &Float) -> Value {
    json!({
        "dec": x.to_string_radix(10, None),
        "display": x.to_f64(),
    })
}

fn disc(v: i64) -> Result<Discriminant, String> {
    Discriminant::new(v).map_err(|e| e.to_string())
}

/// Ok(true) = pass, Ok(false) = identity failure, Err = usage error.
fn run(cli: &Cli) -> Result<bool, String> {
    let mut ctx = PrecisionContext::new(cli.precision_bits);
    if let Some(q) = cli.q_order {
        ctx = ctx.with_q_order(q);
    }
    match &cli.command {
        Command::Classgroup { d } => {
            let g = FormClassGroup::new(disc(*d)?).map_err(|e| e.to_string())?;
            let classes: Vec<Value> = g.classes.iter().map(|f| json!([f.a, f.b, f.c])).collect();
            println!(
                "{}",
                json!({"D": *d, "h": g.h, "w": g.w, "classes": classes, "table": g.composition_table})
            );
            Ok(true)
        }
        Command::J { tau } => {
            let (re, im) = tau
                .split_once(',')
                .ok_or("tau must be \"re,im\"")?;
            let re: f64 = re.trim().parse().map_err(|_| "bad real part")?;
            let im: f64 = im.trim().parse().map_err(|_| "bad imaginary part")?;
            let z = Complex::with_val(ctx.bits, (re, im));
            let j = j_invariant(&z, &ctx).map_err(|e| e.to_string())?;
            println!(
                "{}",
                json!({"tau": [re, im], "j": [float_json(j.real()), float_json(j.imag())]})
            );
            Ok(true)
        }
        Command::Theta { form, order } => {
            let parts: Vec<i64> = form
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| "form must be \"a,b,c\""))
                .collect::<Result<_, _>>()?;
            if parts.len() != 3 {
                return Err("form must be \"a,b,c\"".into());
            }
            let f = BinaryQuadraticForm::new(parts[0], parts[1], parts[2])
                .map_err(|e| e.to_string())?;
            let t = theta_form(f, *order);
            println!("{}", json!({"form": [f.a, f.b, f.c], "r": t.r}));
            Ok(true)
        }
        Command::Kappa { d, n } => {
            let d = disc(*d)?;
            let k = EisensteinKappa::new(d).map_err(|e| e.to_string())?;
            let (value, diff): (Value, Value) = if *n == 0 {
                (float_json(&k.kappa_constant(&ctx).numeric), Value::Null)
            } else {
                let v = k.kappa(*n, &ctx).map_err(|e| e.to_string())?;
                let terms: Vec<Value> = v
                    .terms
                    .iter()
                    .map(|(r, p)| json!([r.to_string(), p]))
                    .collect();
                let ds = diff_set(*n, d, 1).map_err(|e| e.to_string())?;
                (
                    json!({"terms": terms, "numeric": float_json(&v.numeric)}),
                    json!({"finite_primes": ds.finite_primes, "includes_infinity": ds.includes_infinity}),
                )
            };
            println!("{}", json!({"D": d.value(), "n": n, "diff": diff, "kappa": value}));
            Ok(true)
        }
        Command::Gz { big_d, d } => {
            let (big_d, d) = (disc(*big_d)?, disc(*d)?);
            let rhs = gz_rhs_factorization(big_d, d).map_err(|e| e.to_string())?;
            let lhs = norm_product(big_d, d, &ctx);
            let (pass, recognized, residual) = match &lhs {
                Ok(r) => (
                    r.rounded == rhs.value,
                    json!(r.rounded.to_string()),
                    json!(r.residual.to_f64()),
                ),
                Err(e) => (false, Value::Null, json!(e.to_string())),
            };
            println!(
                "{}",
                json!({
                    "D": big_d.value(), "d": d.value(),
                    "recognized": recognized,
                    "factors": rhs.factors,
                    "expected": rhs.value.to_string(),
                    "residual": residual,
                    "pass": pass,
                })
            );
            Ok(pass)
        }
        Command::Verify {
            big_d,
            d,
            averaged,
            individual,
        } => {
            let (big_d, d) = (disc(*big_d)?, disc(*d)?);
            let report = if *individual && !*averaged {
                cmidentity::verify_individual(big_d, d, &ctx)
            } else {
                cmidentity::verify_averaged(big_d, d, &ctx)
            }
            .map_err(|e| e.to_string())?;
            print_report(big_d.value(), d.value(), &report);
            Ok(report.pass)
        }
        Command::VerifyBatch { d_max, small_d_max } => {
            let mut all_pass = true;
            let mut reports = Vec::new();
            for bd in -(*d_max as i64)..0 {
                let Ok(big_d) = Discriminant::new(bd) else { continue };
                if !big_d.is_odd() || !heegner::cmidentity::sturm_check(big_d).unwrap_or(false) {
                    continue;
                }
                for dv in -(*small_d_max as i64)..0 {
                    let Ok(d) = Discriminant::new(dv) else { continue };
                    if gcd(bd, dv) != 1 {
                        continue;
                    }
                    match cmidentity::verify_averaged(big_d, d, &ctx) {
                        Ok(r) => {
                            all_pass &= r.pass;
                            reports.push(json!({
                                "D": bd, "d": dv, "pass": r.pass,
                                "abs_error": r.abs_error,
                            }));
                        }
                        Err(e) => {
                            all_pass = false;
                            reports.push(json!({"D": bd, "d": dv, "error": e.to_string()}));
                        }
                    }
                }
            }
            println!("{}", json!({"reports": reports, "all_pass": all_pass}));
            Ok(all_pass)
        }
        Command::Petersson { big_d, oracle } => {
            let d = disc(*big_d)?;
            let g = FormClassGroup::new(d).map_err(|e| e.to_string())?;
            let chi = characters(&g)
                .into_iter()
                .find(|c| !c.square().is_trivial())
                .ok_or("no character with nontrivial square exists for this discriminant")?;
            let value = petersson_norm_eta(d, &chi, &ctx).map_err(|e| e.to_string())?;
            let mut out = json!({
                "D": d.value(),
                "character_order": chi.order(),
                "value": float_json(&value.numeric),
                "imag_residual": value.imag_residual.to_f64(),
            });
            let mut pass = true;
            if *oracle {
                let order = 16384;
                let tp = theta_psi(&g, &chi, order);
                let coeffs: Vec<f64> = (1..=order)
                    .map(|n| tp.coefficient_numeric(n, &ctx).real().to_f64())
                    .collect();
                let q = petersson_quadrature(&coeffs, d.abs() as u32);
                let rel = (q / value.numeric.to_f64() - 1.0).abs();
                pass = rel < 0.01;
                out["oracle_value"] = json!(q);
                out["rel_diff"] = json!(rel);
                out["pass"] = json!(pass);
            }
            println!("{out}");
            Ok(pass)
        }
        Command::Weilrep { big_d, check } => {
            let d = disc(*big_d)?;
            let m = fqm_for_gz(d).map_err(|e| e.to_string())?;
            let mut out = json!({
                "D": d.value(),
                "orders": m.orders,
                "signature_mod_8": m.signature_mod_8,
            });
            let mut pass = true;
            if *check {
                let w = weil_matrices(&m, 1, &ctx);
                let r = verify_relations(&w, &m, 1, &ctx);
                pass = r.max_residual < 2f64.powi(-(ctx.bits as i32) + 20);
                out["residuals"] = serde_json::to_value(&r).unwrap();
                out["pass"] = json!(pass);
            }
            println!("{out}");
            Ok(pass)
        }
        Command::Sturm { d } => {
            let d = disc(*d)?;
            let ok = heegner::cmidentity::sturm_check(d).map_err(|e| e.to_string())?;
            println!("{}", json!({"D": d.value(), "satisfied": ok}));
            Ok(true)
        }
    }
}

fn print_report(big_d: i64, d: i64, r: &IdentityReport) {
    let terms: Vec<Value> = r
        .terms
        .iter()
        .map(|t| json!({"m": t.m, "n": t.n, "delta": t.delta, "coefficient": t.coefficient}))
        .collect();
    println!(
        "{}",
        json!({
            "D": big_d, "d": d,
            "lhs": float_json(&r.lhs_full),
            "rhs": float_json(&r.rhs_full),
            "abs_error": r.abs_error,
            "precision_bits": r.precision_bits,
            "terms": terms,
            "pass": r.pass,
        })
    );
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
