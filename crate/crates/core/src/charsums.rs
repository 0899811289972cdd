//! Character sums over `Z/pZ` and the counting problems modulo a primorial.
//!
//! The mod-p quantities are computed as exact integers and only divided at
//! the end. The mod-U counts never form `x² + y² + c` as a big integer: each
//! input is reduced once per prime factor of `U`, and the unit-square test is
//! a table lookup per prime.

use std::collections::HashMap;

use serde::Serialize;

use crate::arith::{is_prime, legendre_unchecked, PrimorialModulus};
use crate::error::{check_budget, invalid, Error, Result};

/// Work limit for the exhaustive mod-p evaluators (number of inner terms).
pub const MODP_BUDGET: u128 = 200_000_000;
/// Work limit for pair counting modulo `U` (pairs times primes).
pub const PAIR_BUDGET: u128 = 2_000_000_000;

fn check_odd_prime(p: u64) -> Result<()> {
    if p == 2 || !is_prime(p) {
        Err(Error::NotOddPrime(p))
    } else {
        Ok(())
    }
}

fn check_even_t(t: u32) -> Result<()> {
    if t < 2 || !t.is_multiple_of(2) {
        Err(invalid(format!("t = {t} must be an even integer >= 2")))
    } else {
        Ok(())
    }
}

/// `ε_p(x, y) = 1 + λ_p(x² + y² + c)`.
pub fn epsilon_p(x: i128, y: i128, c: i128, p: u64) -> Result<u8> {
    check_odd_prime(p)?;
    let n = (x * x + y * y + c).rem_euclid(p as i128) as u64;
    Ok((1 + legendre_unchecked(n, p)) as u8)
}

/// The `p × p` table of `ε_p(x, y)` for the class `c`.
fn epsilon_table(p: u64, c: u64) -> Vec<Vec<u128>> {
    (0..p)
        .map(|x| {
            (0..p)
                .map(|y| {
                    let n = (x * x + y * y + c) % p;
                    (1 + legendre_unchecked(n, p)) as u128
                })
                .collect()
        })
        .collect()
}

/// Visits every tuple in `values^len` in lexicographic order.
fn for_each_tuple(values: &[u64], len: usize, mut f: impl FnMut(&[u64])) {
    if values.is_empty() && len > 0 {
        return;
    }
    let mut idx = vec![0usize; len];
    let mut tuple: Vec<u64> = vec![values.first().copied().unwrap_or(0); len];
    loop {
        f(&tuple);
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < values.len() {
                tuple[pos] = values[idx[pos]];
                break;
            }
            idx[pos] = 0;
            tuple[pos] = values[0];
        }
    }
}

/// Parameters of `ℰ_p(k, t)`. `c` is held reduced modulo `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CharParams {
    pub p: u64,
    pub c: u64,
    pub t: u32,
    pub k: u32,
}

impl CharParams {
    pub fn new(p: u64, c: i128, t: u32, k: u32) -> Result<Self> {
        check_odd_prime(p)?;
        check_even_t(t)?;
        if k < 1 || k > t {
            return Err(invalid(format!("k = {k} must lie in [1, t = {t}]")));
        }
        Ok(Self {
            p,
            c: c.rem_euclid(p as i128) as u64,
            t,
            k,
        })
    }
}

/// An exact non-negative rational `numerator / denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExactRatio {
    pub numerator: u128,
    pub denominator: u128,
}

impl ExactRatio {
    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

/// `ℰ_p(k, t)` as an exact ratio, in the factorised form
/// `Σ_{y ∈ (G_p*)^k} (Σ_{x ∈ G_p*} ∏_{j<=k} ε_p(x, y_j))^t / (p−1)^{k+t}`.
///
/// The variables `y_{k+1}, …, y_t` do not occur in the product and the `x_i`
/// are independent, which collapses the `2t`-fold average to `p^{k+1}` work.
pub fn script_e_p_exact(params: CharParams) -> Result<ExactRatio> {
    let CharParams { p, c, t, k } = params;
    let work = (p as u128).checked_pow(k + 1).unwrap_or(u128::MAX) * k as u128;
    check_budget("factorised E_p(k,t)", work, MODP_BUDGET)?;
    let eps = epsilon_table(p, c);
    let units: Vec<u64> = (1..p).collect();
    let mut total: u128 = 0;
    let mut overflow = false;
    for_each_tuple(&units, k as usize, |ys| {
        let inner: u128 = units
            .iter()
            .map(|&x| {
                ys.iter()
                    .map(|&y| eps[x as usize][y as usize])
                    .product::<u128>()
            })
            .sum();
        match inner.checked_pow(t).and_then(|v| total.checked_add(v)) {
            Some(v) => total = v,
            None => overflow = true,
        }
    });
    if overflow {
        return Err(Error::Overflow("E_p(k,t) numerator"));
    }
    let denominator = ((p - 1) as u128)
        .checked_pow(k + t)
        .ok_or(Error::Overflow("E_p(k,t) denominator"))?;
    Ok(ExactRatio {
        numerator: total,
        denominator,
    })
}

/// `ℰ_p(k, t) = E_{y_1..y_t} E_{x_1..x_t} ∏_{i<=t, j<=k} ε_p(x_i, y_j)` over
/// `(G_p \ {0})^{2t}`.
pub fn script_e_p(params: CharParams) -> Result<f64> {
    script_e_p_exact(params).map(|r| r.value())
}

/// `Σ_{y ∈ G_p^{t/2}} Σ_{x ∈ G_p^t} ∏_{i<=t, j<=t/2} (1 + λ_p(x_i² + y_j² + c))`,
/// evaluated as `Σ_y (Σ_{x ∈ G_p} ∏_j ε_p(x, y_j))^t`.
pub fn sumzp_lhs(p: u64, c: i128, t: u32) -> Result<u128> {
    check_odd_prime(p)?;
    check_even_t(t)?;
    let half = t / 2;
    let work = (p as u128).checked_pow(half + 1).unwrap_or(u128::MAX) * half as u128;
    check_budget("Z/pZ sum", work, MODP_BUDGET)?;
    let eps = epsilon_table(p, c.rem_euclid(p as i128) as u64);
    let all: Vec<u64> = (0..p).collect();
    let mut total: u128 = 0;
    let mut overflow = false;
    for_each_tuple(&all, half as usize, |ys| {
        let inner: u128 = all
            .iter()
            .map(|&x| {
                ys.iter()
                    .map(|&y| eps[x as usize][y as usize])
                    .product::<u128>()
            })
            .sum();
        match inner.checked_pow(t).and_then(|v| total.checked_add(v)) {
            Some(v) => total = v,
            None => overflow = true,
        }
    });
    if overflow {
        return Err(Error::Overflow("Z/pZ sum"));
    }
    Ok(total)
}

/// An inequality `lhs <= rhs` together with its parameters. Right-hand sides
/// that overflow `f64` are carried by their logarithm; `rhs` is then `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck<P> {
    pub params: P,
    pub lhs: f64,
    pub rhs: Option<f64>,
    pub ln_rhs: f64,
    pub pass: bool,
}

impl<P> BoundCheck<P> {
    fn from_logs(params: P, lhs: f64, ln_rhs: f64) -> Self {
        let rhs = ln_rhs.exp();
        let pass = lhs <= 0.0 || lhs.ln() <= ln_rhs;
        Self {
            params,
            lhs,
            rhs: rhs.is_finite().then_some(rhs),
            ln_rhs,
            pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModpParams {
    pub p: u64,
    pub c: u64,
    pub t: u32,
}

/// Checks `ℰ_p(t/2, t) <= (p/(p−1))^{2t} · exp(4 t⁵ 2ᵗ / p)`.
pub fn check_modp_bound(p: u64, c: i128, t: u32) -> Result<BoundCheck<ModpParams>> {
    let params = CharParams::new(p, c, t, t / 2)?;
    let lhs = script_e_p(params)?;
    let (pf, tf) = (p as f64, t as f64);
    let ln_rhs = 2.0 * tf * (pf / (pf - 1.0)).ln() + 4.0 * tf.powi(5) * 2f64.powi(t as i32) / pf;
    Ok(BoundCheck::from_logs(
        ModpParams { p, c: params.c, t },
        lhs,
        ln_rhs,
    ))
}

/// Checks the `Z/pZ` sum against `p^{3t/2} · exp(4 t⁵ 2ᵗ / p)`.
pub fn check_sumzp_bound(p: u64, c: i128, t: u32) -> Result<BoundCheck<ModpParams>> {
    let lhs = sumzp_lhs(p, c, t)? as f64;
    let (pf, tf) = (p as f64, t as f64);
    let ln_rhs = 1.5 * tf * pf.ln() + 4.0 * tf.powi(5) * 2f64.powi(t as i32) / pf;
    Ok(BoundCheck::from_logs(
        ModpParams {
            p,
            c: c.rem_euclid(p as i128) as u64,
            t,
        },
        lhs,
        ln_rhs,
    ))
}

/// Unit-square tables for each prime factor of `U`, with inputs stored as
/// residue vectors.
struct ResidueSystem<'a> {
    primes: &'a [u64],
    // unit_square[i][r]: r is a nonzero square modulo primes[i]
    unit_square: Vec<Vec<bool>>,
}

impl<'a> ResidueSystem<'a> {
    fn new(m: &'a PrimorialModulus) -> Self {
        let unit_square = m
            .primes()
            .iter()
            .map(|&p| {
                if p == 2 {
                    vec![false, true]
                } else {
                    (0..p).map(|r| legendre_unchecked(r, p) == 1).collect()
                }
            })
            .collect();
        Self {
            primes: m.primes(),
            unit_square,
        }
    }

    fn residues(&self, x: i128) -> Vec<u32> {
        self.primes
            .iter()
            .map(|&p| x.rem_euclid(p as i128) as u32)
            .collect()
    }

    /// Whether `a² + b² + c` is a unit square modulo `U`, from residue vectors.
    #[inline]
    fn passes(&self, a: &[u32], b: &[u32], c: &[u32]) -> bool {
        self.primes.iter().enumerate().all(|(i, &p)| {
            let (x, y, z) = (a[i] as u64, b[i] as u64, c[i] as u64);
            self.unit_square[i][((x * x + y * y + z) % p) as usize]
        })
    }
}

/// `|T_c(X, Y)|`: pairs `(x, y) ∈ X × Y` with `x² + y² + c` a unit square mod `U`.
pub fn count_t_c(xs: &[i128], ys: &[i128], c: i128, m: &PrimorialModulus) -> Result<u64> {
    let work = xs.len() as u128 * ys.len() as u128 * m.primes().len() as u128;
    check_budget("T_c pair count", work, PAIR_BUDGET)?;
    let sys = ResidueSystem::new(m);
    let rx: Vec<Vec<u32>> = xs.iter().map(|&x| sys.residues(x)).collect();
    let ry: Vec<Vec<u32>> = ys.iter().map(|&y| sys.residues(y)).collect();
    let rc = sys.residues(c);
    let mut count = 0u64;
    for a in &rx {
        for b in &ry {
            if sys.passes(a, b, &rc) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Multiplicities `m(a)` of the classes of `Z` modulo `U`, keyed by residue vector.
pub fn class_multiplicities(zs: &[i128], m: &PrimorialModulus) -> Vec<(Vec<u32>, u64)> {
    let sys = ResidueSystem::new(m);
    let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
    for &z in zs {
        *counts.entry(sys.residues(z)).or_default() += 1;
    }
    let mut out: Vec<_> = counts.into_iter().collect();
    out.sort();
    out
}

/// `|R_U(Z, c)|`: triples `(x, y, i) ∈ Z × Z × I` with `x² + y² + c(i)` a unit
/// square mod `U`, computed as `Σ_i Σ_{(a,b)} α_i(a, b) m(a) m(b)` over the
/// classes of `Z` modulo `U`.
pub fn count_r_u(zs: &[i128], cseq: &[i128], m: &PrimorialModulus) -> Result<u128> {
    let classes = class_multiplicities(zs, m);
    let work = (classes.len() as u128).pow(2) * cseq.len() as u128 * m.primes().len() as u128;
    check_budget("R_U class count", work, PAIR_BUDGET)?;
    let sys = ResidueSystem::new(m);
    let mut total: u128 = 0;
    for &c in cseq {
        let rc = sys.residues(c);
        for (a, ma) in &classes {
            for (b, mb) in &classes {
                if sys.passes(a, b, &rc) {
                    total += *ma as u128 * *mb as u128;
                }
            }
        }
    }
    Ok(total)
}

/// A density parameter `A >= 4`, held through `ln A` so that values far
/// beyond `f64` range remain usable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityParameter {
    ln_a: f64,
}

impl DensityParameter {
    pub fn new(a: f64) -> Result<Self> {
        Self::from_ln(a.ln())
    }

    pub fn from_ln(ln_a: f64) -> Result<Self> {
        if !(ln_a >= 4f64.ln()) || !ln_a.is_finite() {
            return Err(invalid(format!(
                "density parameter needs A >= 4 (ln A = {ln_a})"
            )));
        }
        Ok(Self { ln_a })
    }

    pub fn ln_a(&self) -> f64 {
        self.ln_a
    }

    pub fn ln_ln_a(&self) -> f64 {
        self.ln_a.ln()
    }

    /// `v` from `v log 2 = log(log A / (log log A)^6)`.
    pub fn holder_v(&self) -> f64 {
        (self.ln_a / self.ln_ln_a().powi(6)).ln() / std::f64::consts::LN_2
    }

    /// The even exponent used with the Hölder bound: the least even integer
    /// `>= v` (which lies in `[v, v + 2]`), or 2 when `v < 4`.
    pub fn holder_t(&self) -> u32 {
        let v = self.holder_v();
        if !(v >= 4.0) {
            2
        } else {
            let t = v.ceil() as u32;
            t + t % 2
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderBound {
    pub t: u32,
    pub ln_value: f64,
}

impl HolderBound {
    /// The bound itself; `+∞` when it exceeds the `f64` range.
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

/// The explicit bound
/// `(U/φ(U))² · |X||Y| / τ(U) · exp(3 log A / t + 8 log 50 · t³ 2ᵗ log log A)`,
/// evaluated in logarithmic form.
pub fn holder_bound_eq8(
    size_x: u64,
    size_y: u64,
    m: &PrimorialModulus,
    a: DensityParameter,
    t: u32,
) -> Result<HolderBound> {
    check_even_t(t)?;
    let lnln = a.ln_ln_a();
    if !(lnln > 0.0) {
        return Err(invalid("log log A must be positive"));
    }
    if size_x == 0 || size_y == 0 {
        return Ok(HolderBound {
            t,
            ln_value: f64::NEG_INFINITY,
        });
    }
    let tf = t as f64;
    let exponent = 3.0 * a.ln_a() / tf + 8.0 * 50f64.ln() * tf.powi(3) * 2f64.powi(t as i32) * lnln;
    let ln_value = 2.0 * m.ln_u_over_phi() + (size_x as f64).ln() + (size_y as f64).ln()
        - m.ln_tau()
        + exponent;
    Ok(HolderBound { t, ln_value })
}
