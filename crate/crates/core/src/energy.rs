//! Representation counts and additive energies of prime-square sets.
//!
//! `rep_counts` builds the k-fold representation function of a set by
//! iterated convolution with the set's indicator (or `log p` weight) vector.
//! The 2k-fold additive energy is then `Σ_n r_k(n)²`. A brute-force backend
//! that walks all 2k-tuples is kept alongside as an independent oracle.

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::arith::PrimeSquareSet;
use crate::error::{check_budget, invalid, Error, Result};

/// Work limit (number of 2k-tuples) for the brute-force backend.
pub const ORACLE_BUDGET: u128 = 1_000_000_000;

/// Below this fill ratio of the attainable-sum span the convolution keeps a
/// hash map instead of a dense array.
pub const SPARSE_FILL_RATIO: f64 = 1.0 / 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Oracle,
    Convolution,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Value type of a representation table: exact `u128` counts or `f64`
/// log-weighted masses.
pub trait Mass:
    Copy + Default + PartialEq + Send + Sync + Serialize + std::ops::Mul<Output = Self> + 'static
{
    type Acc: Copy + Default;
    const ONE: Self;

    fn accumulate(acc: &mut Self::Acc, value: Self, weight: Self) -> Result<()>;
    fn finish(acc: Self::Acc) -> Self;
    fn is_zero(&self) -> bool;
    fn as_f64(&self) -> f64;
}

impl Mass for u128 {
    type Acc = u128;
    const ONE: u128 = 1;

    #[inline]
    fn accumulate(acc: &mut u128, value: u128, weight: u128) -> Result<()> {
        *acc = value
            .checked_mul(weight)
            .and_then(|v| acc.checked_add(v))
            .ok_or(Error::Overflow("representation count"))?;
        Ok(())
    }

    fn finish(acc: u128) -> u128 {
        acc
    }

    fn is_zero(&self) -> bool {
        *self == 0
    }

    fn as_f64(&self) -> f64 {
        *self as f64
    }
}

impl Mass for f64 {
    type Acc = CompensatedSum;
    const ONE: f64 = 1.0;

    #[inline]
    fn accumulate(acc: &mut CompensatedSum, value: f64, weight: f64) -> Result<()> {
        acc.add(value * weight);
        Ok(())
    }

    fn finish(acc: CompensatedSum) -> f64 {
        acc.value()
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn as_f64(&self) -> f64 {
        *self
    }
}

/// Sparse listing of `n ↦ r_k(n)` for the k-fold sums of a set, ascending in `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepCountTable<T: Mass> {
    k: usize,
    entries: Vec<(u64, T)>,
}

impl<T: Mass> RepCountTable<T> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[(u64, T)] {
        &self.entries
    }

    pub fn get(&self, n: u64) -> T {
        self.entries
            .binary_search_by_key(&n, |&(m, _)| m)
            .map(|i| self.entries[i].1)
            .unwrap_or_default()
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|&(n, _)| n)
    }

    pub fn to_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let io = |e: csv::Error| invalid(format!("csv output: {e}"));
        wtr.write_record(["n", "count"]).map_err(io)?;
        for (n, c) in &self.entries {
            wtr.serialize((n, c)).map_err(io)?;
        }
        wtr.flush()
            .map_err(|e| invalid(format!("csv output: {e}")))?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serialises")
    }
}

impl RepCountTable<u128> {
    pub fn total_mass(&self) -> Result<u128> {
        self.entries.iter().try_fold(0u128, |acc, &(_, c)| {
            acc.checked_add(c).ok_or(Error::Overflow("total mass"))
        })
    }

    /// `Σ_n r(n)²`.
    pub fn sum_of_squares(&self) -> Result<u128> {
        self.entries.iter().try_fold(0u128, |acc, &(_, c)| {
            c.checked_mul(c)
                .and_then(|sq| acc.checked_add(sq))
                .ok_or(Error::Overflow("additive energy"))
        })
    }
}

impl RepCountTable<f64> {
    pub fn total_mass(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, c)| c)
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, c)| c * c)
            .collect::<CompensatedSum>()
            .value()
    }
}

/// One convolution step: `next[m] = Σ_i cur[m - s_i] · w_i`.
fn convolve_step<T: Mass>(cur: &[(u64, T)], set: &[u64], weights: &[T]) -> Result<Vec<(u64, T)>> {
    let (Some(&(lo, _)), Some(&(hi, _))) = (cur.first(), cur.last()) else {
        return Ok(Vec::new());
    };
    let (smin, smax) = (set[0], set[set.len() - 1]);
    let out_lo = lo + smin;
    let span = (hi + smax - out_lo + 1) as usize;
    let estimate = (cur.len() * set.len()).min(span);

    if (estimate as f64) < SPARSE_FILL_RATIO * span as f64 {
        let mut acc: HashMap<u64, T::Acc> = HashMap::with_capacity(estimate);
        for &(n, c) in cur {
            for (&s, &w) in set.iter().zip(weights) {
                T::accumulate(acc.entry(n + s).or_default(), c, w)?;
            }
        }
        let mut out: Vec<(u64, T)> = acc
            .into_iter()
            .map(|(n, a)| (n, T::finish(a)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        out.sort_unstable_by_key(|&(n, _)| n);
        Ok(out)
    } else {
        let width = (hi - lo + 1) as usize;
        let mut dense = vec![T::default(); width];
        for &(n, c) in cur {
            dense[(n - lo) as usize] = c;
        }
        let mut out = Vec::new();
        for j in 0..span {
            let m = out_lo + j as u64;
            let mut acc = T::Acc::default();
            for (&s, &w) in set.iter().zip(weights) {
                if m < lo + s {
                    break;
                }
                let idx = (m - s - lo) as usize;
                if idx < width {
                    T::accumulate(&mut acc, dense[idx], w)?;
                }
            }
            let v = T::finish(acc);
            if !v.is_zero() {
                out.push((m, v));
            }
        }
        Ok(out)
    }
}

fn rep_counts_generic<T: Mass>(set: &[u64], weights: &[T], k: usize) -> Result<RepCountTable<T>> {
    if k == 0 {
        return Err(invalid("summand count k must be at least 1"));
    }
    if let Some(&max) = set.last() {
        max.checked_mul(k as u64)
            .ok_or_else(|| invalid("k · max(S) overflows u64"))?;
    }
    let mut cur: Vec<(u64, T)> = set.iter().copied().zip(weights.iter().copied()).collect();
    for _ in 1..k {
        cur = convolve_step(&cur, set, weights)?;
    }
    Ok(RepCountTable { k, entries: cur })
}

/// Exact number of ordered k-tuples of `S` summing to each `n`.
pub fn rep_counts(s: &PrimeSquareSet, k: usize) -> Result<RepCountTable<u128>> {
    rep_counts_generic(s.elements(), &vec![1u128; s.len()], k)
}

/// `Σ ∏ log p_i` over ordered k-tuples of `S` summing to each `n`.
pub fn weighted_rep_counts(s: &PrimeSquareSet, k: usize) -> Result<RepCountTable<f64>> {
    rep_counts_generic(s.elements(), s.weights(), k)
}

/// Representation counts for an arbitrary ascending set of positive integers.
pub fn rep_counts_of(set: &[u64], k: usize) -> Result<RepCountTable<u128>> {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.first() == Some(&0) {
        return Err(invalid("set elements must be positive"));
    }
    rep_counts_generic(&sorted, &vec![1u128; sorted.len()], k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Energy {
    Exact(u128),
    Weighted(f64),
}

impl Energy {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Energy::Exact(v) => v as f64,
            Energy::Weighted(v) => v,
        }
    }

    pub fn exact(&self) -> Option<u128> {
        match *self {
            Energy::Exact(v) => Some(v),
            Energy::Weighted(_) => None,
        }
    }
}

/// The 2k-fold additive energy: `e_k(S)` when unweighted, `E_k(S)` (with
/// `log p` weights) otherwise.
pub fn additive_energy(
    s: &PrimeSquareSet,
    k: usize,
    weighted: bool,
    backend: Backend,
) -> Result<Energy> {
    match (backend, weighted) {
        (Backend::Convolution, false) => Ok(Energy::Exact(rep_counts(s, k)?.sum_of_squares()?)),
        (Backend::Convolution, true) => Ok(Energy::Weighted(
            weighted_rep_counts(s, k)?.sum_of_squares(),
        )),
        (Backend::Oracle, false) => {
            let ones = vec![1u128; s.len()];
            Ok(Energy::Exact(brute_force_energy(s.elements(), &ones, k)?))
        }
        (Backend::Oracle, true) => Ok(Energy::Weighted(brute_force_energy(
            s.elements(),
            s.weights(),
            k,
        )?)),
    }
}

/// Walks every 2k-tuple of the set and adds up the weight products of those
/// whose first k entries and last k entries have the same sum.
fn brute_force_energy<T: Mass>(set: &[u64], weights: &[T], k: usize) -> Result<T> {
    if k == 0 {
        return Err(invalid("summand count k must be at least 1"));
    }
    let work = (set.len() as u128)
        .checked_pow(2 * k as u32)
        .unwrap_or(u128::MAX);
    check_budget("brute-force energy", work, ORACLE_BUDGET)?;
    if set.is_empty() {
        return Ok(T::default());
    }

    struct Walk<'a, T: Mass> {
        set: &'a [u64],
        weights: &'a [T],
        k: usize,
        acc: T::Acc,
    }

    impl<T: Mass> Walk<'_, T> {
        fn go(&mut self, depth: usize, balance: i64, product: Option<T>) -> Result<()> {
            if depth == 2 * self.k {
                if balance == 0 {
                    T::accumulate(&mut self.acc, product.expect("depth > 0"), T::ONE)?;
                }
                return Ok(());
            }
            for i in 0..self.set.len() {
                let s = self.set[i] as i64;
                let b = if depth < self.k {
                    balance + s
                } else {
                    balance - s
                };
                let w = self.weights[i];
                let p = product.map_or(w, |p| p * w);
                self.go(depth + 1, b, Some(p))?;
            }
            Ok(())
        }
    }

    let mut walk = Walk {
        set,
        weights,
        k,
        acc: T::Acc::default(),
    };
    walk.go(0, 0, None)?;
    Ok(T::finish(walk.acc))
}

/// Grid size cap for the quadrature in [`moment_eleven`].
pub const MOMENT_GRID_BUDGET: u128 = 200_000_000;

/// Eleventh-moment quantities of `Ŝ(t) = Σ log p · e(p² t)`.
///
/// * `signed`: `∫₀¹ Ŝ(t)⁶ Ŝ(−t)⁵ dt = Σ_n W₆(n) W₅(n)`, exact by orthogonality
///   from the weighted representation tables.
/// * `absolute`: `∫₀¹ |Ŝ(t)|¹¹ dt`, by the trapezoid rule on a uniform grid
///   (spectrally accurate for this smooth periodic integrand).
/// * `bound`: `|S| · max log p · E₅(S)`, which dominates `absolute` because
///   `|Ŝ| <= Σ log p` and `∫|Ŝ|¹⁰ = E₅(S)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEleven {
    pub signed: f64,
    pub absolute: f64,
    pub bound: f64,
}

pub fn moment_eleven(s: &PrimeSquareSet) -> Result<MomentEleven> {
    if s.is_empty() {
        return Ok(MomentEleven {
            signed: 0.0,
            absolute: 0.0,
            bound: 0.0,
        });
    }
    let w5 = weighted_rep_counts(s, 5)?;
    let w6 = weighted_rep_counts(s, 6)?;
    let signed = w6
        .entries()
        .iter()
        .map(|&(n, v)| v * w5.get(n))
        .collect::<CompensatedSum>()
        .value();
    let bound = s.len() as f64 * s.max_weight() * w5.sum_of_squares();

    // |Ŝ| only sees the differences p² − min(S); |Ŝ|² has degree <= span
    let base = s.elements()[0];
    let span = s.elements()[s.len() - 1] - base;
    let points = (64 * (span + 1)).next_power_of_two();
    check_budget(
        "eleventh moment grid",
        points as u128 * s.len() as u128,
        MOMENT_GRID_BUDGET,
    )?;
    let absolute = (0..points)
        .map(|j| {
            let (mut re, mut im) = (0.0, 0.0);
            for (&e, &w) in s.elements().iter().zip(s.weights()) {
                // exact phase reduction: (e − base)·j mod points
                let k = ((e - base) as u128 * j as u128 % points as u128) as f64;
                let theta = std::f64::consts::TAU * k / points as f64;
                re += w * theta.cos();
                im += w * theta.sin();
            }
            (re * re + im * im).sqrt().powi(11)
        })
        .collect::<CompensatedSum>()
        .value()
        / points as f64;
    Ok(MomentEleven {
        signed,
        absolute,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::prime_squares_in;

    #[test]
    fn small_rep_tables() {
        let s = prime_squares_in(3).unwrap();
        assert_eq!(s.elements(), &[4, 9]);
        let t = rep_counts(&s, 2).unwrap();
        assert_eq!(t.entries(), &[(8, 1), (13, 2), (18, 1)]);

        let single = PrimeSquareSet::from_primes(20, &[5]).unwrap();
        assert_eq!(rep_counts(&single, 3).unwrap().entries(), &[(75, 1)]);

        let t = rep_counts(&prime_squares_in(100).unwrap(), 2).unwrap();
        assert_eq!(t.total_mass().unwrap(), 16);
    }

    #[test]
    fn zero_k_is_rejected() {
        let s = prime_squares_in(100).unwrap();
        assert!(rep_counts(&s, 0).is_err());
    }

    #[test]
    fn energy_examples() {
        let single = PrimeSquareSet::from_primes(20, &[5]).unwrap();
        for backend in [Backend::Oracle, Backend::Convolution] {
            assert_eq!(
                additive_energy(&single, 6, false, backend).unwrap(),
                Energy::Exact(1)
            );
            let e = additive_energy(&single, 6, true, backend).unwrap().as_f64();
            assert!((e - 5f64.ln().powi(12)).abs() < 1e-9);
        }
        let pair = prime_squares_in(3).unwrap();
        for backend in [Backend::Oracle, Backend::Convolution] {
            assert_eq!(
                additive_energy(&pair, 6, false, backend).unwrap(),
                Energy::Exact(924)
            );
        }
    }

    #[test]
    fn oracle_budget_enforced() {
        let s = prime_squares_in(10_000).unwrap();
        let err = additive_energy(&s, 6, false, Backend::Oracle).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
        assert!(additive_energy(&s, 6, false, Backend::Convolution).is_ok());
    }

    #[test]
    fn support_and_mass_invariants() {
        let s = prime_squares_in(1000).unwrap();
        let n = s.window_base();
        for k in 1..=6 {
            let t = rep_counts(&s, k).unwrap();
            assert_eq!(t.total_mass().unwrap(), (s.len() as u128).pow(k as u32));
            assert!(t
                .support()
                .all(|m| m > k as u64 * n && m <= 4 * k as u64 * n));
            let w = weighted_rep_counts(&s, k).unwrap();
            let expected = s.weights().iter().sum::<f64>().powi(k as i32);
            assert!((w.total_mass() - expected).abs() <= 1e-10 * expected);
        }
    }

    #[test]
    fn dense_and_sparse_paths_agree() {
        // a set dense enough in its span to take the dense path immediately
        let dense: Vec<u64> = (10..40).collect();
        let t = rep_counts_of(&dense, 3).unwrap();
        let mut brute: HashMap<u64, u128> = HashMap::new();
        for a in &dense {
            for b in &dense {
                for c in &dense {
                    *brute.entry(a + b + c).or_default() += 1;
                }
            }
        }
        assert_eq!(t.entries().len(), brute.len());
        for &(n, c) in t.entries() {
            assert_eq!(brute[&n], c);
        }
    }

    #[test]
    fn moment_eleven_examples() {
        let single = PrimeSquareSet::from_primes(20, &[5]).unwrap();
        let m = moment_eleven(&single).unwrap();
        let expected = 5f64.ln().powi(11);
        assert!((m.absolute - expected).abs() < 1e-9 * expected);
        assert_eq!(m.signed, 0.0);

        let pair = prime_squares_in(3).unwrap();
        let m = moment_eleven(&pair).unwrap();
        // independent evaluation from explicit tuple enumeration
        let (s, w) = (pair.elements(), pair.weights());
        let mut sums6: HashMap<u64, f64> = HashMap::new();
        let mut sums5: HashMap<u64, f64> = HashMap::new();
        for mask in 0..(1u32 << 6) {
            let (mut sum, mut prod) = (0, 1.0);
            for b in 0..6 {
                let i = ((mask >> b) & 1) as usize;
                sum += s[i];
                prod *= w[i];
            }
            *sums6.entry(sum).or_default() += prod;
            if mask < (1 << 5) {
                let (mut sum5, mut prod5) = (0, 1.0);
                for b in 0..5 {
                    let i = ((mask >> b) & 1) as usize;
                    sum5 += s[i];
                    prod5 *= w[i];
                }
                *sums5.entry(sum5).or_default() += prod5;
            }
        }
        let expected: f64 = sums6
            .iter()
            .map(|(n, v)| v * sums5.get(n).unwrap_or(&0.0))
            .sum();
        assert!((m.signed - expected).abs() <= 1e-12 * expected.max(1.0));
        assert!(m.signed <= m.absolute && m.absolute <= m.bound);
    }

    #[test]
    fn moment_chain_on_prime_square_windows() {
        for n in [100, 1000, 3000] {
            let s = prime_squares_in(n).unwrap();
            let m = moment_eleven(&s).unwrap();
            // p² ≡ 1 mod 24 for p > 3, so 6-fold and 5-fold sums never meet
            assert_eq!(m.signed, 0.0, "N={n}");
            assert!(m.absolute > 0.0);
            assert!(m.signed <= m.absolute * (1.0 + 1e-12), "N={n}: {m:?}");
            assert!(m.absolute <= m.bound, "N={n}: {m:?}");
        }
    }

    #[test]
    fn csv_and_json_output() {
        let t = rep_counts(&prime_squares_in(3).unwrap(), 2).unwrap();
        let mut buf = Vec::new();
        t.to_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n,count\n8,1\n13,2\n18,1\n"
        );
        assert_eq!(t.to_json(), r#"{"k":2,"entries":[[8,1],[13,2],[18,1]]}"#);
    }
}
