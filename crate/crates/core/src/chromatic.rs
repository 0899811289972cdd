//! Colourings of prime squares, shortest representations by unbounded
//! knapsack, the finite addition theorem check, and desk-scale estimates of
//! the monochromatic order `s(K)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{isqrt, sieve_primes, PrimeSquareSet};
use crate::energy::{additive_energy, Backend};
use crate::error::{check_budget, invalid, Error, Result};

/// Work limit for [`min_reps`], counted as `nMax · |S|`.
pub const MIN_REPS_BUDGET: u128 = 4_000_000_000;

/// Largest `X` accepted by [`Coloring::build`].
pub const MAX_COLORING_RANGE: u64 = 1 << 40;

/// At most this many failing `n` are listed in a report.
pub const MAX_LISTED_FAILURES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    RoundRobin,
    UniformRandom,
    Congruence,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Self::RoundRobin, Self::UniformRandom, Self::Congruence];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::RoundRobin => "round-robin",
            Self::UniformRandom => "uniform-random",
            Self::Congruence => "congruence",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown colouring strategy {s:?}")))
    }
}

/// Assignment of a colour in `1..=K` to every prime square `<= X`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coloring {
    k: u32,
    x: u64,
    strategy: Strategy,
    seed: u64,
    primes: Vec<u64>,
    colours: Vec<u32>,
}

impl Coloring {
    /// Colours `p²` for every prime `p <= √X`:
    /// round-robin by index, uniformly at random from `seed`, or by
    /// `(p mod ℓ) mod K` with `ℓ` the K-th prime.
    pub fn build(k: u32, x: u64, strategy: Strategy, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(invalid("need at least one colour"));
        }
        if x > MAX_COLORING_RANGE {
            return Err(invalid(format!("X = {x} exceeds {MAX_COLORING_RANGE}")));
        }
        let primes = sieve_primes(isqrt(x));
        let colours = match strategy {
            Strategy::RoundRobin => (0..primes.len()).map(|i| (i as u32 % k) + 1).collect(),
            Strategy::UniformRandom => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                primes.iter().map(|_| rng.gen_range(1..=k)).collect()
            }
            Strategy::Congruence => {
                let ell = kth_prime(k as usize);
                primes
                    .iter()
                    .map(|&p| ((p % ell) % k as u64) as u32 + 1)
                    .collect()
            }
        };
        Ok(Self {
            k,
            x,
            strategy,
            seed,
            primes,
            colours,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Colour of `p²`, if `p <= √X` is prime.
    pub fn colour_of(&self, p: u64) -> Option<u32> {
        self.primes.binary_search(&p).ok().map(|i| self.colours[i])
    }

    /// Ascending prime squares of colour `c`.
    pub fn class(&self, c: u32) -> Vec<u64> {
        self.primes
            .iter()
            .zip(&self.colours)
            .filter(|&(_, &col)| col == c)
            .map(|(&p, _)| p * p)
            .collect()
    }

    pub fn classes(&self) -> Vec<Vec<u64>> {
        (1..=self.k).map(|c| self.class(c)).collect()
    }
}

fn kth_prime(k: usize) -> u64 {
    let mut bound = 16u64;
    loop {
        let primes = sieve_primes(bound);
        if primes.len() >= k {
            return primes[k - 1];
        }
        bound *= 2;
    }
}

/// `r[n]` = least number of elements of `S` (with repetition) summing to
/// `n`, for `0 <= n <= nMax`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinReps {
    values: Vec<u32>,
    unreachable: u32,
}

impl MinReps {
    pub fn n_max(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    /// `None` when `n` is not a sum of elements of `S`.
    pub fn get(&self, n: u64) -> Option<u32> {
        let v = *self.values.get(n as usize)?;
        (v != self.unreachable).then_some(v)
    }

    pub fn raw(&self) -> &[u32] {
        &self.values
    }
}

/// Unbounded knapsack: `r[0] = 0`, `r[n] = 1 + min_{s in S, s <= n} r[n − s]`.
/// Unreachable entries hold the sentinel `nMax + 1`.
pub fn min_reps(set: &[u64], n_max: u64) -> Result<MinReps> {
    let mut set: Vec<u64> = set.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.first() == Some(&0) {
        return Err(invalid("set elements must be positive"));
    }
    check_budget(
        "min_reps",
        n_max as u128 * set.len().max(1) as u128,
        MIN_REPS_BUDGET,
    )?;
    let unreachable = u32::try_from(n_max + 1)
        .ok()
        .filter(|&u| u < u32::MAX)
        .ok_or_else(|| invalid(format!("nMax = {n_max} too large for the table")))?;
    let len = n_max as usize + 1;
    let mut r = vec![unreachable; len];
    r[0] = 0;
    let set: Vec<usize> = set.into_iter().map(|s| s as usize).collect();
    for n in 1..len {
        let mut best = unreachable;
        for &s in &set {
            if s > n {
                break;
            }
            best = best.min(r[n - s]);
        }
        if best < unreachable {
            r[n] = best + 1;
        }
    }
    Ok(MinReps {
        values: r,
        unreachable,
    })
}

/// Outcome of one hypothesis of the addition theorem, with both sides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub holds: bool,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SarkozyReport {
    pub n: u64,
    pub set_size: usize,
    pub d: f64,
    /// `⌈6D⌉`.
    pub six_d: u64,
    /// `N >= 72D + 12`.
    pub size: Hypothesis,
    /// `e_6(S) <= |S|^12 D / (3N)`.
    pub energy: Hypothesis,
    /// Some element of `S` is coprime to every prime `<= ⌈6D⌉`.
    pub coprime: Hypothesis,
    pub coprime_witness: Option<u64>,
    pub status: String,
    /// `30N(2⌈6D⌉ + 1)`, absent when it overflows.
    pub n0: Option<u64>,
    pub window: u64,
    pub checked: u64,
    pub failure_count: u64,
    /// Failing `n`, at most [`MAX_LISTED_FAILURES`] of them.
    pub failures: Vec<u64>,
    /// True when the hypotheses hold and no `n` failed, or when a failed
    /// hypothesis was reported.
    pub pass: bool,
}

fn ceil_six(d: f64) -> Result<u64> {
    let v = (6.0 * d).ceil();
    if !(v.is_finite() && v < u64::MAX as f64) {
        return Err(invalid(format!("⌈6D⌉ for D = {d} is out of range")));
    }
    Ok(v as u64)
}

/// `3N · e_6 <= |S|^12 · D`, compared exactly.
fn energy_hypothesis_holds(n: u64, e6: u128, size: usize, d: f64) -> bool {
    let lhs = BigInt::from(3u64) * BigInt::from(n) * BigInt::from(e6);
    let s12 = BigInt::from(size).pow(12);
    match BigRational::from_float(d) {
        Some(d) => BigRational::from_integer(lhs) <= BigRational::from_integer(s12) * d,
        None => false,
    }
}

fn six_fold_energy(s: &PrimeSquareSet) -> Result<u128> {
    additive_energy(s, 6, false, Backend::Convolution)?
        .exact()
        .ok_or(Error::Overflow("six-fold energy"))
}

/// The least `D >= 1` with `e_6(S) <= |S|^12 D / (3N)`, i.e.
/// `max(1, 3N e_6(S) / |S|^12)`, rounded up to the next float where needed
/// so the inequality holds exactly.
pub fn derive_d_from_energy(s: &PrimeSquareSet) -> Result<f64> {
    if s.is_empty() {
        return Err(invalid("S must be nonempty"));
    }
    let n = s.window_base();
    let e6 = six_fold_energy(s)?;
    let s12 = (s.len() as f64).powi(12);
    let mut d = (3.0 * n as f64 * e6 as f64 / s12).max(1.0);
    while !energy_hypothesis_holds(n, e6, s.len(), d) {
        d = d.next_up();
    }
    Ok(d)
}

/// Checks the hypotheses of the finite addition theorem for `S` and `D`,
/// then verifies that every `n` in `[n0, n0 + window]` is a sum of at most
/// `⌊n/N⌋` elements of `S`. A failed hypothesis is reported, not an error.
pub fn sarkozy_check(s: &PrimeSquareSet, d: f64, window: u64) -> Result<SarkozyReport> {
    if !(d >= 1.0 && d.is_finite()) {
        return Err(invalid(format!("D = {d} must be a finite number >= 1")));
    }
    if s.is_empty() {
        return Err(invalid("S must be nonempty"));
    }
    let n = s.window_base();
    let six_d = ceil_six(d)?;

    let size_rhs = 72.0 * d + 12.0;
    let size = Hypothesis {
        holds: n as f64 >= size_rhs,
        lhs: n.to_string(),
        rhs: size_rhs.to_string(),
    };

    let e6 = six_fold_energy(s)?;
    let energy = Hypothesis {
        holds: energy_hypothesis_holds(n, e6, s.len(), d),
        lhs: e6.to_string(),
        rhs: ((s.len() as f64).powi(12) * d / (3.0 * n as f64)).to_string(),
    };

    let coprime_witness = s.primes().iter().copied().find(|&p| p > six_d);
    let coprime = Hypothesis {
        holds: coprime_witness.is_some(),
        lhs: s.primes().last().copied().unwrap_or(0).to_string(),
        rhs: format!("> {six_d}"),
    };

    let n0 = (2 * six_d as u128 + 1)
        .checked_mul(30 * n as u128)
        .and_then(|v| u64::try_from(v).ok());

    let failed: Vec<&str> = [
        (&size, "size"),
        (&energy, "(a) energy"),
        (&coprime, "(b) coprimality"),
    ]
    .into_iter()
    .filter(|(h, _)| !h.holds)
    .map(|(_, name)| name)
    .collect();

    let mut report = SarkozyReport {
        n,
        set_size: s.len(),
        d,
        six_d,
        size,
        energy,
        coprime,
        coprime_witness,
        status: String::new(),
        n0,
        window,
        checked: 0,
        failure_count: 0,
        failures: Vec::new(),
        pass: true,
    };
    if !failed.is_empty() {
        report.status = format!("hypothesis {} failed", failed.join(", "));
        return Ok(report);
    }
    let n0 = n0.ok_or_else(|| invalid("n0 overflows u64"))?;
    let top = n0
        .checked_add(window)
        .ok_or_else(|| invalid("n0 + window overflows u64"))?;
    let reps = min_reps(s.elements(), top)?;
    for m in n0..=top {
        let ok = reps.get(m).is_some_and(|r| r as u64 <= m / n);
        if !ok {
            report.failure_count += 1;
            if report.failures.len() < MAX_LISTED_FAILURES {
                report.failures.push(m);
            }
        }
    }
    report.checked = window + 1;
    report.pass = report.failure_count == 0;
    report.status = if report.pass {
        "hypotheses hold; conclusion verified".to_string()
    } else {
        "hypotheses hold; conclusion failed".to_string()
    };
    Ok(report)
}

/// Desk-scale estimate of `s(K)` for one colouring.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkEstimate {
    #[serde(rename = "K")]
    pub k: u32,
    #[serde(rename = "X")]
    pub x: u64,
    pub strategy: Strategy,
    pub seed: u64,
    pub window: [u64; 2],
    /// `max_n min_i r_i[n]` over the window; absent when some `n` has no
    /// monochromatic representation at this scale.
    pub s_estimate: Option<u32>,
    pub class_sizes: Vec<usize>,
    pub unrepresentable: u64,
    /// Unrepresentable `n`, at most [`MAX_LISTED_FAILURES`] of them.
    pub failures: Vec<u64>,
}

/// Colours the prime squares `<= X` and, for every `n` in
/// `[X/2, X/2 + width]`, takes the shortest monochromatic representation;
/// the estimate is the largest of those lengths.
pub fn estimate_sk(
    k: u32,
    x: u64,
    strategy: Strategy,
    seed: u64,
    width: u64,
) -> Result<SkEstimate> {
    let coloring = Coloring::build(k, x, strategy, seed)?;
    let lo = x / 2;
    let hi = lo
        .checked_add(width)
        .ok_or_else(|| invalid("window overflows u64"))?;
    let classes = coloring.classes();
    let tables: Vec<MinReps> = classes
        .par_iter()
        .map(|class| min_reps(class, hi))
        .collect::<Result<_>>()?;
    let mut s_max = 0u32;
    let mut unrepresentable = 0u64;
    let mut failures = Vec::new();
    for m in lo..=hi {
        match tables.iter().filter_map(|t| t.get(m)).min() {
            Some(r) => s_max = s_max.max(r),
            None => {
                unrepresentable += 1;
                if failures.len() < MAX_LISTED_FAILURES {
                    failures.push(m);
                }
            }
        }
    }
    Ok(SkEstimate {
        k,
        x,
        strategy,
        seed,
        window: [lo, hi],
        s_estimate: (unrepresentable == 0).then_some(s_max),
        class_sizes: classes.iter().map(Vec::len).collect(),
        unrepresentable,
        failures,
    })
}

/// `I(N) = ((288D + 72)N, (288D + 73)N]`.
pub fn chaining_interval(n: u64, d: f64) -> (f64, f64) {
    let n = n as f64;
    ((288.0 * d + 72.0) * n, (288.0 * d + 73.0) * n)
}

/// Whether `I(N)` (with `D = d_n`) meets `I(N + 1)` (with `D = d_next`).
pub fn chaining_overlaps(n: u64, d_n: f64, d_next: f64) -> bool {
    let (a_lo, a_hi) = chaining_interval(n, d_n);
    let (b_lo, b_hi) = chaining_interval(n + 1, d_next);
    a_lo < b_hi && b_lo < a_hi
}
