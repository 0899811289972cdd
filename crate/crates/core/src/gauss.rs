//! Complete exponential sums over residue classes.
//!
//! `V_q(a, r) = Σ_{0 <= m < q, (r + mW, qW) = 1} e(a (r + mW)² / q)`, the
//! quadratic Gauss sum over units, and the factorisation of a complete
//! quadratic sum when part of the modulus divides the leading coefficient.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{factorize, gcd, PrimorialModulus};
use crate::error::{invalid, Result};

/// Exponent applied to `w` in the comparison quantity of [`vq_ratio`].
pub const RATIO_EXPONENT: f64 = 97.0 / 200.0;

/// Relative tolerance for the sweep checks, scaled by `q`.
pub const SWEEP_TOLERANCE: f64 = 1e-8;

/// `e(k / q) = exp(2πi k / q)` for an already reduced residue `k`.
pub fn phase(k: u64, q: u64) -> Complex64 {
    debug_assert!(k < q.max(1));
    let (s, c) = (TAU * k as f64 / q as f64).sin_cos();
    Complex64::new(c, s)
}

fn reduce(x: i128, q: u64) -> u64 {
    x.rem_euclid(q as i128) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VqParams {
    q: u64,
    a: i64,
    r: i64,
    big_w: u64,
}

impl VqParams {
    pub fn new(q: u64, a: i64, r: i64, big_w: u64) -> Result<Self> {
        if q == 0 {
            return Err(invalid("q must be at least 1"));
        }
        if big_w == 0 || !big_w.is_multiple_of(2) {
            return Err(invalid(format!(
                "W = {big_w} must be a positive even integer"
            )));
        }
        if gcd(reduce(a as i128, q), q) != 1 {
            return Err(invalid(format!("gcd(a = {a}, q = {q}) != 1")));
        }
        if gcd(reduce(r as i128, big_w), big_w) != 1 {
            return Err(invalid(format!("gcd(r = {r}, W = {big_w}) != 1")));
        }
        Ok(Self { q, a, r, big_w })
    }

    /// Parameters with `W = 2U` taken from `m`.
    pub fn for_modulus(q: u64, a: i64, r: i64, m: &PrimorialModulus) -> Result<Self> {
        let big_w = m
            .big_w_u64()
            .ok_or_else(|| invalid(format!("W for w = {} does not fit in 64 bits", m.w())))?;
        Self::new(q, a, r, big_w)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn big_w(&self) -> u64 {
        self.big_w
    }
}

/// The finite sum `V_q(a, r)`. Since `(r, W) = 1`, the condition
/// `(r + mW, qW) = 1` reduces to `(r + mW, q) = 1`; every phase is computed
/// from the residue `a (r + mW)² mod q`.
pub fn v_q(params: VqParams) -> Complex64 {
    let q = params.q;
    let a = reduce(params.a as i128, q) as u128;
    let r = reduce(params.r as i128, q) as u128;
    let w = (params.big_w % q) as u128;
    let q128 = q as u128;
    (0..q as u128)
        .filter_map(|m| {
            let x = (r + m * w) % q128;
            (gcd(x as u64, q) == 1).then(|| phase((a * (x * x % q128) % q128) as u64, q))
        })
        .sum()
}

/// The closed form `q · e(a r² / q)`, valid when `q | 2W`.
pub fn closed_form(params: VqParams) -> Complex64 {
    let q = params.q as u128;
    let a = reduce(params.a as i128, params.q) as u128;
    let r = reduce(params.r as i128, params.q) as u128;
    phase((a * (r * r % q) % q) as u64, params.q) * params.q as f64
}

/// `Σ_{0 <= x < V, (x, V) = 1} e(a x² / V)`.
pub fn quad_gauss_units(a: i64, v: u64) -> Result<Complex64> {
    if v == 0 {
        return Err(invalid("V must be at least 1"));
    }
    let a = reduce(a as i128, v);
    if gcd(a, v) != 1 {
        return Err(invalid(format!("gcd(a, V = {v}) != 1")));
    }
    let (a, v128) = (a as u128, v as u128);
    Ok((0..v)
        .filter(|&x| gcd(x, v) == 1)
        .map(|x| {
            let x = x as u128;
            phase((a * (x * x % v128) % v128) as u64, v)
        })
        .sum())
}

/// Largest possible `|Σ_{(x, V) = 1} e(a x² / V)|` over units `a`, as a
/// product over prime powers `p^k || V`: `√p + 1` for odd `p` with `k = 1`,
/// `1, 2, 4` for `2, 4, 8`, and `0` for every other prime power (those sums
/// vanish).
pub fn unit_gauss_magnitude_bound(v: u64) -> f64 {
    factorize(v)
        .into_iter()
        .map(|(p, k)| match (p, k) {
            (2, 1) => 1.0,
            (2, 2) => 2.0,
            (2, 3) => 4.0,
            (2, _) => 0.0,
            (p, 1) => (p as f64).sqrt() + 1.0,
            _ => 0.0,
        })
        .product()
}

/// Both sides of the factorisation of `Σ_{0 <= m < d} e(P(m) / d)` with
/// `P(z) = c0 z² + c1 z + c2`, `d = d1 d2` and `d2 | c0`:
/// `lhs` is the complete sum and `rhs` the product of the partial sum over
/// `m1 < d1` with `Σ_{m2 < d2} e(c1 m2 / d2)`.
pub fn factor_split_check(
    c0: i64,
    c1: i64,
    c2: i64,
    d1: u64,
    d2: u64,
) -> Result<(Complex64, Complex64)> {
    if d1 == 0 || d2 == 0 {
        return Err(invalid("d1 and d2 must be positive"));
    }
    if c0 % d2 as i64 != 0 {
        return Err(invalid(format!("d2 = {d2} does not divide c0 = {c0}")));
    }
    let d = d1
        .checked_mul(d2)
        .ok_or_else(|| invalid("d1·d2 overflows"))?;
    let poly = |m: u64| -> u64 {
        let (c0, c1, c2) = (
            reduce(c0 as i128, d) as u128,
            reduce(c1 as i128, d) as u128,
            reduce(c2 as i128, d) as u128,
        );
        let (m, d) = (m as u128, d as u128);
        ((c0 * (m * m % d) + c1 * m + c2) % d) as u64
    };
    let lhs: Complex64 = (0..d).map(|m| phase(poly(m), d)).sum();
    let first: Complex64 = (0..d1).map(|m| phase(poly(m), d)).sum();
    let c1_mod = reduce(c1 as i128, d2) as u128;
    let second: Complex64 = (0..d2)
        .map(|m| phase((c1_mod * m as u128 % d2 as u128) as u64, d2))
        .sum();
    Ok((lhs, first * second))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VanishingClass {
    MustVanish,
    ClosedForm,
    General,
}

impl VanishingClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::MustVanish => "must_vanish",
            Self::ClosedForm => "closed_form",
            Self::General => "general",
        }
    }
}

/// `ClosedForm` when `q | 2W`, `MustVanish` when `q` is `w`-smooth but does
/// not divide `2W`, `General` when `q` has a prime factor above `w`.
pub fn vq_vanishing_predict(q: u64, m: &PrimorialModulus) -> VanishingClass {
    let two_w = m.big_w() * 2u32;
    if (two_w % q).is_zero() {
        VanishingClass::ClosedForm
    } else if m.is_smooth(q) {
        VanishingClass::MustVanish
    } else {
        VanishingClass::General
    }
}

/// `φ(qW)` computed from `φ(W)` and the primes of `q` not dividing `W`.
pub fn phi_q_big_w(q: u64, big_w: u64) -> u128 {
    let phi_w = crate::arith::euler_phi(big_w) as u128;
    factorize(q)
        .into_iter()
        .fold(phi_w * q as u128, |acc, (p, _)| {
            if big_w.is_multiple_of(p) {
                acc
            } else {
                acc / p as u128 * (p as u128 - 1)
            }
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VqRatio {
    pub magnitude: f64,
    pub phi_qw: u128,
    /// `|V_q(a, r)| / φ(qW)`.
    pub ratio: f64,
    /// `1 / (φ(W) w^{97/200})`.
    pub comparator: f64,
}

pub fn vq_ratio(params: VqParams, m: &PrimorialModulus) -> Result<VqRatio> {
    if m.big_w_u64() != Some(params.big_w) {
        return Err(invalid("W in the parameters does not match the modulus"));
    }
    let magnitude = v_q(params).norm();
    let phi_qw = phi_q_big_w(params.q, params.big_w);
    let phi_w = crate::arith::euler_phi(params.big_w) as f64;
    Ok(VqRatio {
        magnitude,
        phi_qw,
        ratio: magnitude / phi_qw as f64,
        comparator: 1.0 / (phi_w * (m.w() as f64).powf(RATIO_EXPONENT)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub q: u64,
    pub a: u64,
    pub r: u64,
    pub magnitude: f64,
    pub class: VanishingClass,
    pub pass: bool,
}

/// Evaluates `V_q(a, r)` for every `q <= q_max`, every unit `a mod q` and
/// every unit `r mod W`, checking vanishing for `MustVanish`, the closed form
/// for `ClosedForm`, and the trivial bound `|V| <= q` otherwise.
pub fn vanishing_sweep(m: &PrimorialModulus, q_max: u64) -> Result<Vec<SweepRow>> {
    let big_w = m
        .big_w_u64()
        .ok_or_else(|| invalid("W does not fit in 64 bits"))?;
    let rs: Vec<u64> = (1..big_w).filter(|&r| gcd(r, big_w) == 1).collect();
    let rows = (1..=q_max)
        .into_par_iter()
        .flat_map_iter(|q| {
            let class = vq_vanishing_predict(q, m);
            let rs = &rs;
            (0..q).filter(move |&a| gcd(a, q) == 1).flat_map(move |a| {
                rs.iter().map(move |&r| {
                    let params =
                        VqParams::new(q, a as i64, r as i64, big_w).expect("units by construction");
                    let v = v_q(params);
                    let tol = SWEEP_TOLERANCE * q as f64;
                    let pass = match class {
                        VanishingClass::MustVanish => v.norm() <= tol,
                        VanishingClass::ClosedForm => (v - closed_form(params)).norm() <= tol,
                        VanishingClass::General => v.norm() <= q as f64 + tol,
                    };
                    SweepRow {
                        q,
                        a,
                        r,
                        magnitude: v.norm(),
                        class,
                        pass,
                    }
                })
            })
        })
        .collect();
    Ok(rows)
}

/// Writes sweep rows as CSV with header `q,a,r,abs_v,class,pass`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io = |e: csv::Error| invalid(format!("csv output failed: {e}"));
    writer
        .write_record(["q", "a", "r", "abs_v", "class", "pass"])
        .map_err(io)?;
    for row in rows {
        writer
            .write_record([
                row.q.to_string(),
                row.a.to_string(),
                row.r.to_string(),
                format!("{:.12e}", row.magnitude),
                row.class.as_str().to_string(),
                row.pass.to_string(),
            ])
            .map_err(io)?;
    }
    writer
        .flush()
        .map_err(|e| invalid(format!("csv output failed: {e}")))?;
    Ok(())
}
