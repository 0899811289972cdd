//! Circle-method apparatus: the tent weights and their Fourier transform, the
//! exponential sums `Ŝ`, `ψ` and `T`, major arcs and Dirichlet approximation,
//! the major-arc main term, and the exact orthogonality evaluation of
//! `∫_0^1 Ŝ(t)^6 Ŝ(−t)^5 ψ(−t) dt`.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{gcd, sieve_primes, PrimeSquareSet, PrimorialModulus};
use crate::energy::{weighted_rep_counts, CompensatedSum};
use crate::error::{check_budget, invalid, Result};
use crate::gauss::{phi_q_big_w, v_q, VqParams};

/// Work limit for [`major_main_term`], counted as `φ(W) · q` phase evaluations.
pub const MAIN_TERM_BUDGET: u128 = 100_000_000;

/// Largest `|S|` accepted by [`energy_integral_identity`].
pub const IDENTITY_MAX_SET: usize = 12;

/// Largest `√(5N)` accepted by [`energy_integral_identity`].
pub const IDENTITY_MAX_ROOT: u64 = 1000;

/// `e(x) = exp(2πi x)` for real `x`, reduced to `[−1/2, 1/2]` first.
pub fn e(x: f64) -> Complex64 {
    let (s, c) = (TAU * (x - x.round())).sin_cos();
    Complex64::new(c, s)
}

/// `sin(πz) / (πz)` with the removable singularity filled in.
pub fn sinc(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        // reduce before sin so large arguments keep their accuracy
        let r = z - 2.0 * (z / 2.0).round();
        (PI * r).sin() / (PI * z)
    }
}

/// The tent `α(t) = 1 − |2t / 5N|` on `|t| <= 5N/2` and its shift
/// `β(t) = α(t − 5N/2)`, supported on `[0, 5N]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TentWindow {
    n: u64,
}

impl TentWindow {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("window base N must be positive"));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `5N / 2`.
    pub fn half_width(&self) -> f64 {
        2.5 * self.n as f64
    }

    pub fn alpha(&self, t: f64) -> f64 {
        let l = self.half_width();
        if t.abs() <= l {
            1.0 - t.abs() / l
        } else {
            0.0
        }
    }

    pub fn beta(&self, t: f64) -> f64 {
        self.alpha(t - self.half_width())
    }

    /// `β(x)` at an integer, as the exact quotient `(5N − |2x − 5N|) / 5N`.
    pub fn beta_at(&self, x: u64) -> f64 {
        let five_n = 5 * self.n as i128;
        let num = five_n - (2 * x as i128 - five_n).abs();
        if num <= 0 {
            0.0
        } else {
            num as f64 / five_n as f64
        }
    }

    /// `α̂(u) = (5N/2) sinc²(u · 5N/2)`.
    pub fn alpha_hat(&self, u: f64) -> f64 {
        let l = self.half_width();
        l * sinc(u * l).powi(2)
    }

    /// `β̂(u) = ∫ β(t) e(−ut) dt = e(−u · 5N/2) α̂(u)`.
    pub fn beta_hat(&self, u: f64) -> Complex64 {
        let l = self.half_width();
        e(-(u * l).rem_euclid(1.0)) * self.alpha_hat(u)
    }
}

pub fn beta_hat(u: f64, n: u64) -> Result<Complex64> {
    Ok(TentWindow::new(n)?.beta_hat(u))
}

/// `Ŝ(t) = Σ_{p² ∈ S} log p · e(p² t)`.
pub fn s_hat(t: f64, s: &PrimeSquareSet) -> Complex64 {
    let t = t.rem_euclid(1.0);
    s.elements()
        .iter()
        .zip(s.weights())
        .map(|(&x, &w)| e(x as f64 * t) * w)
        .sum()
}

/// Primes `n` with `β(n²) > 0`, i.e. `n² < 5N`, and their weights
/// `2n log n β(n²)`.
fn psi_terms(window: &TentWindow) -> Vec<(u64, f64)> {
    let five_n = 5 * window.n();
    sieve_primes(crate::arith::isqrt(five_n))
        .into_iter()
        .filter(|&p| p * p < five_n)
        .map(|p| (p, 2.0 * p as f64 * (p as f64).ln() * window.beta_at(p * p)))
        .collect()
}

/// `ψ(t) = Σ_{n prime} 2n log n β(n²) e(n² t)`.
pub fn psi(t: f64, n: u64) -> Result<Complex64> {
    let window = TentWindow::new(n)?;
    let t = t.rem_euclid(1.0);
    Ok(psi_terms(&window)
        .into_iter()
        .map(|(p, weight)| e((p * p) as f64 * t) * weight)
        .sum())
}

/// `T(u) = Σ_{p <= u} log p · e(p² α)`.
pub fn t_partial(u: f64, alpha_phase: f64) -> Result<Complex64> {
    if !(u >= 0.0 && u.is_finite()) {
        return Err(invalid(format!(
            "u = {u} must be a finite nonnegative number"
        )));
    }
    let a = alpha_phase.rem_euclid(1.0);
    Ok(sieve_primes(u.floor() as u64)
        .into_iter()
        .map(|p| e((p * p) as f64 * a) * (p as f64).ln())
        .sum())
}

/// Empirical `max_{u <= √(5N)} |T(u)|` against `√N / A^6`. The comparison
/// carries an unspecified constant and is never asserted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinorArcDiagnostic {
    pub alpha_phase: f64,
    pub max_abs_t: f64,
    pub argmax_u: u64,
    pub comparator: f64,
    pub ratio: f64,
}

pub fn minor_arc_diagnostic(alpha_phase: f64, n: u64, density: f64) -> Result<MinorArcDiagnostic> {
    if n == 0 || !(density > 0.0) {
        return Err(invalid("N and A must be positive"));
    }
    let a = alpha_phase.rem_euclid(1.0);
    let mut running = Complex64::zero();
    let (mut max_abs_t, mut argmax_u) = (0.0, 0);
    let five_n = 5 * n;
    for p in sieve_primes(crate::arith::isqrt(five_n)) {
        running += e((p * p) as f64 * a) * (p as f64).ln();
        if running.norm() > max_abs_t {
            max_abs_t = running.norm();
            argmax_u = p;
        }
    }
    let comparator = (n as f64).sqrt() / density.powi(6);
    Ok(MinorArcDiagnostic {
        alpha_phase,
        max_abs_t,
        argmax_u,
        comparator,
        ratio: max_abs_t / comparator,
    })
}

fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| invalid(format!("{x} is not finite")))
}

/// A major arc `[a/q − 1/M, a/q + 1/M)` with exact endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    a: u64,
    q: u64,
    lo: BigRational,
    hi: BigRational,
}

impl Arc {
    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn contains(&self, t: &BigRational) -> bool {
        &self.lo <= t && t < &self.hi
    }
}

/// Major arcs for `0 <= a < q <= Q`, `(a, q) = 1`, sorted by centre. The
/// arc at `1/1` coincides with the one at `0/1` after reduction to the
/// fundamental interval `[−1/M, 1 − 1/M)` and is left out.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcPartition {
    q_max: u64,
    m: f64,
    inv_m: BigRational,
    arcs: Vec<Arc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum PointClass {
    Major { a: u64, q: u64 },
    Minor,
}

impl PointClass {
    pub fn label(&self) -> String {
        match self {
            Self::Major { a, q } => format!("major:{a}/{q}"),
            Self::Minor => "minor".to_string(),
        }
    }
}

impl ArcPartition {
    pub fn q_max(&self) -> u64 {
        self.q_max
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// `|arcs| · 2/M`.
    pub fn total_measure(&self) -> f64 {
        self.arcs.len() as f64 * 2.0 / self.m
    }

    /// Reduces `t` into `[−1/M, 1 − 1/M)`.
    pub fn fundamental(&self, t: &BigRational) -> BigRational {
        let shifted = t + &self.inv_m;
        t - shifted.floor()
    }

    pub fn classify_exact(&self, t: &BigRational) -> PointClass {
        let t = self.fundamental(t);
        let idx = self.arcs.partition_point(|arc| arc.lo <= t);
        match idx.checked_sub(1).map(|i| &self.arcs[i]) {
            Some(arc) if arc.contains(&t) => PointClass::Major { a: arc.a, q: arc.q },
            _ => PointClass::Minor,
        }
    }
}

pub fn build_major_arcs(q_max: u64, m: f64) -> Result<ArcPartition> {
    if q_max == 0 {
        return Err(invalid("Q must be at least 1"));
    }
    let m_exact = exact(m)?;
    let two_q2 = BigRational::from_integer(BigInt::from(2u64) * BigInt::from(q_max).pow(2));
    if m_exact <= two_q2 {
        return Err(invalid(format!(
            "M = {m} must exceed 2Q² = {}",
            2 * q_max * q_max
        )));
    }
    let inv_m = m_exact.recip();
    let mut arcs = Vec::new();
    for q in 1..=q_max {
        for a in (0..q).filter(|&a| gcd(a, q) == 1) {
            let centre = BigRational::new(BigInt::from(a), BigInt::from(q));
            arcs.push(Arc {
                a,
                q,
                lo: &centre - &inv_m,
                hi: &centre + &inv_m,
            });
        }
    }
    arcs.sort_by(|x, y| x.lo.cmp(&y.lo));
    Ok(ArcPartition {
        q_max,
        m,
        inv_m,
        arcs,
    })
}

pub fn classify_point(t: f64, arcs: &ArcPartition) -> Result<PointClass> {
    Ok(arcs.classify_exact(&exact(t)?))
}

/// Last continued-fraction convergent `a/q` of `t` with `q <= M`. Then
/// `(a, q) = 1` and `|t − a/q| <= 1/(qM)`. The floating input is treated as
/// the exact binary rational it represents.
pub fn dirichlet_approx(t: f64, m: f64) -> Result<(i64, u64)> {
    if !(m >= 1.0 && m.is_finite()) {
        return Err(invalid(format!("M = {m} must be a finite number >= 1")));
    }
    let m = exact(m)?;
    let mut x = exact(t)?;
    let a0 = x.floor().to_integer();
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p, mut q) = (a0.clone(), BigInt::one());
    let mut frac = &x - BigRational::from_integer(a0);
    while !frac.is_zero() {
        x = frac.recip();
        let ai = x.floor().to_integer();
        let p_next = &ai * &p + &p_prev;
        let q_next = &ai * &q + &q_prev;
        if BigRational::from_integer(q_next.clone()) > m {
            break;
        }
        frac = &x - BigRational::from_integer(ai);
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
    }
    debug_assert!(p.gcd(&q).is_one());
    let a = p
        .to_i64()
        .ok_or_else(|| invalid("numerator overflows i64"))?;
    let q = q
        .to_u64()
        .ok_or_else(|| invalid("denominator overflows u64"))?;
    Ok((a, q))
}

/// Whether `(a, q)` satisfies `q >= 1`, `q <= M`, `(a, q) = 1` and
/// `|t − a/q| <= 1/(qM)`, all compared exactly.
pub fn is_dirichlet_pair(t: f64, m: f64, a: i64, q: u64) -> bool {
    let (Ok(t), Ok(m)) = (exact(t), exact(m)) else {
        return false;
    };
    if q == 0 || BigRational::from_integer(BigInt::from(q)) > m {
        return false;
    }
    if num_integer::gcd(a.unsigned_abs(), q) != 1 {
        return false;
    }
    let approx = BigRational::new(BigInt::from(a), BigInt::from(q));
    let err = (t - approx).abs();
    err * BigRational::from_integer(BigInt::from(q)) * m <= BigRational::one()
}

/// Main term of `ψ(t)` on the major arc at `a/q`:
/// `(1/φ(qW)) Σ_{0 <= r < W, (r, W) = 1} V_q(a, r) · conj(β̂(t − a/q))`.
pub fn major_main_term(t: f64, a: i64, q: u64, n: u64, m: &PrimorialModulus) -> Result<Complex64> {
    if q == 0 || gcd(a.rem_euclid(q as i64) as u64, q) != 1 {
        return Err(invalid(format!("({a}, {q}) is not a reduced fraction")));
    }
    let big_w = m
        .big_w_u64()
        .ok_or_else(|| invalid("W does not fit in 64 bits"))?;
    let phi_w = crate::arith::euler_phi(big_w) as u128;
    check_budget("major arc main term", phi_w * q as u128, MAIN_TERM_BUDGET)?;
    let window = TentWindow::new(n)?;
    let mut sum = Complex64::zero();
    for r in (1..big_w).filter(|&r| gcd(r, big_w) == 1) {
        sum += v_q(VqParams::new(q, a, r as i64, big_w)?);
    }
    let theta = t - a as f64 / q as f64;
    Ok(sum * window.beta_hat(theta).conj() / phi_q_big_w(q, big_w) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcParameters {
    pub q: f64,
    pub m: f64,
    pub disjoint: bool,
}

/// `Q = (log N)^B A^48` and `M = N / (log N)^{2B}` for a chosen constant `B`.
pub fn arc_parameters(n: f64, density: f64, b: f64) -> Result<ArcParameters> {
    if !(n > 1.0 && density > 0.0 && b >= 0.0) {
        return Err(invalid("need N > 1, A > 0, B >= 0"));
    }
    let ln_n = n.ln();
    let q = ln_n.powf(b) * density.powi(48);
    let m = n / ln_n.powf(2.0 * b);
    Ok(ArcParameters {
        q,
        m,
        disjoint: m > 2.0 * q * q,
    })
}

/// Both sides of `(4/5) √N E_6(S) <= ∫_0^1 Ŝ(t)^6 Ŝ(−t)^5 ψ(−t) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub n: u64,
    pub set_size: usize,
    pub energy: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Evaluates the integral through orthogonality: it equals
/// `Σ_m W_6(m) Σ_{n prime} W_5(m − n²) · 2n log n β(n²)`, where `W_k` are the
/// log-weighted k-fold representation counts of `S`. `N` is the window base
/// of `S`.
pub fn energy_integral_identity(s: &PrimeSquareSet) -> Result<IdentityReport> {
    let n = s.window_base();
    if s.len() > IDENTITY_MAX_SET {
        return Err(invalid(format!(
            "|S| = {} exceeds {IDENTITY_MAX_SET}",
            s.len()
        )));
    }
    let root = crate::arith::isqrt(5 * n);
    if root > IDENTITY_MAX_ROOT {
        return Err(invalid(format!(
            "√(5N) = {root} exceeds {IDENTITY_MAX_ROOT}"
        )));
    }
    if s.is_empty() {
        return Ok(IdentityReport {
            n,
            set_size: 0,
            energy: 0.0,
            lhs: 0.0,
            rhs: 0.0,
            pass: true,
        });
    }
    let window = TentWindow::new(n)?;
    let six = weighted_rep_counts(s, 6)?;
    let five = weighted_rep_counts(s, 5)?;
    let terms = psi_terms(&window);
    let mut rhs = CompensatedSum::default();
    for &(m, w6) in six.entries() {
        for &(p, weight) in &terms {
            let sq = p * p;
            if sq < m {
                let w5 = five.get(m - sq);
                if w5 != 0.0 {
                    rhs.add(w6 * w5 * weight);
                }
            }
        }
    }
    let energy = six.sum_of_squares();
    let lhs = 0.8 * (n as f64).sqrt() * energy;
    let rhs = rhs.value();
    Ok(IdentityReport {
        n,
        set_size: s.len(),
        energy,
        lhs,
        rhs,
        pass: lhs <= rhs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub t: f64,
    pub abs_s_hat: f64,
    pub abs_psi: f64,
    pub class: String,
}

/// `|Ŝ|`, `|ψ|` and the arc class at `t = j / points`, `0 <= j < points`.
pub fn grid_sweep(s: &PrimeSquareSet, arcs: &ArcPartition, points: usize) -> Result<Vec<GridRow>> {
    if points == 0 {
        return Err(invalid("grid needs at least one point"));
    }
    let n = s.window_base();
    (0..points)
        .into_par_iter()
        .map(|j| {
            let t = BigRational::new(BigInt::from(j), BigInt::from(points));
            let tf = j as f64 / points as f64;
            Ok(GridRow {
                t: tf,
                abs_s_hat: s_hat(tf, s).norm(),
                abs_psi: psi(tf, n)?.norm(),
                class: arcs.classify_exact(&t).label(),
            })
        })
        .collect()
}

/// CSV with header `t,abs_s_hat,abs_psi,class`.
pub fn write_grid_csv<W: Write>(rows: &[GridRow], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io = |e: csv::Error| invalid(format!("csv output failed: {e}"));
    for row in rows {
        writer.serialize(row).map_err(io)?;
    }
    writer
        .flush()
        .map_err(|e| invalid(format!("csv output failed: {e}")))?;
    Ok(())
}
