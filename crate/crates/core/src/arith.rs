//! Primes, primorial moduli and quadratic residuosity.
//!
//! Everything here works on native integers except the primorial itself,
//! which is kept as a [`BigUint`] next to its prime list. Predicates modulo
//! the primorial never touch the big integer: they reduce the input modulo
//! each prime factor and combine the answers through the Chinese remainder
//! theorem.

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Largest smoothness bound accepted by [`PrimorialModulus::new`].
pub const MAX_SMOOTHNESS_BOUND: u64 = 1 << 24;

/// Ascending list of all primes `<= x`. Returns an empty list for `x < 2`.
pub fn sieve_primes(x: u64) -> Vec<u64> {
    if x < 2 {
        return Vec::new();
    }
    let limit = usize::try_from(x).expect("sieve bound exceeds address space");
    // odd[i] stands for 2i + 1
    let mut composite = vec![false; limit / 2 + 1];
    let mut primes = vec![2];
    let mut i = 1;
    while 2 * i < limit {
        if !composite[i] {
            let p = 2 * i + 1;
            primes.push(p as u64);
            let mut m = p * p;
            while m <= limit {
                composite[m / 2] = true;
                m += 2 * p;
            }
        }
        i += 1;
    }
    primes
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Legendre symbol of `x` modulo the odd prime `p`, by Euler's criterion.
pub fn legendre(x: i128, p: u64) -> Result<i8> {
    if p == 2 || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    Ok(legendre_unchecked(x.rem_euclid(p as i128) as u64, p))
}

/// Euler's criterion for a reduced residue `x < p`; `p` must be an odd prime.
#[inline]
pub(crate) fn legendre_unchecked(x: u64, p: u64) -> i8 {
    if x == 0 {
        return 0;
    }
    if pow_mod(x, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Prime factorisation by trial division, as ascending `(prime, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn divisor_count(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .map(|(_, e)| e as u64 + 1)
        .product()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// The primorial `U = ∏_{p <= w} p` together with the arithmetic data the
/// rest of the crate needs: the prime list, `φ(U)`, `τ(U)` and `W = 2U`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimorialModulus {
    w: u64,
    primes: Vec<u64>,
    u: BigUint,
    phi: BigUint,
    tau: BigUint,
    big_w: BigUint,
}

impl PrimorialModulus {
    pub fn new(w: u64) -> Result<Self> {
        if w < 2 {
            return Err(invalid(format!(
                "smoothness bound w = {w} must be at least 2"
            )));
        }
        if w > MAX_SMOOTHNESS_BOUND {
            return Err(invalid(format!(
                "smoothness bound w = {w} exceeds {MAX_SMOOTHNESS_BOUND}"
            )));
        }
        let primes = sieve_primes(w);
        let u: BigUint = primes.iter().map(|&p| BigUint::from(p)).product();
        let phi: BigUint = primes.iter().map(|&p| BigUint::from(p - 1)).product();
        let tau = BigUint::one() << primes.len();
        let big_w = &u * 2u32;
        Ok(Self {
            w,
            primes,
            u,
            phi,
            tau,
            big_w,
        })
    }

    /// Smoothness bound `A^25` attached to a density parameter `A`, as a real
    /// number. It is astronomically large for every admissible `A`.
    pub fn density_smoothness_bound(a: f64) -> f64 {
        a.powi(25)
    }

    /// Builds the modulus for density parameter `A`, i.e. with `w = ⌊A^25⌋`.
    /// Fails unless that bound is within [`MAX_SMOOTHNESS_BOUND`].
    pub fn from_density_parameter(a: f64) -> Result<Self> {
        let w = Self::density_smoothness_bound(a);
        if !w.is_finite() || w > MAX_SMOOTHNESS_BOUND as f64 {
            return Err(invalid(format!(
                "A = {a} gives w = A^25 = {w:e}, beyond the supported range"
            )));
        }
        Self::new(w.floor() as u64)
    }

    pub fn w(&self) -> u64 {
        self.w
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn odd_primes(&self) -> &[u64] {
        &self.primes[1..]
    }

    pub fn u(&self) -> &BigUint {
        &self.u
    }

    pub fn phi_u(&self) -> &BigUint {
        &self.phi
    }

    pub fn tau_u(&self) -> &BigUint {
        &self.tau
    }

    /// `W = 2U`.
    pub fn big_w(&self) -> &BigUint {
        &self.big_w
    }

    /// `U` as a native integer when it fits.
    pub fn u_u64(&self) -> Option<u64> {
        u64::try_from(&self.u).ok()
    }

    pub fn big_w_u64(&self) -> Option<u64> {
        u64::try_from(&self.big_w).ok()
    }

    /// `ln(U / φ(U)) = Σ_{p <= w} ln(p / (p - 1))`.
    pub fn ln_u_over_phi(&self) -> f64 {
        self.primes
            .iter()
            .map(|&p| (p as f64 / (p - 1) as f64).ln())
            .sum()
    }

    /// `ln τ(U) = π(w) ln 2`.
    pub fn ln_tau(&self) -> f64 {
        self.primes.len() as f64 * std::f64::consts::LN_2
    }

    /// True when every prime factor of `q` is at most `w`.
    pub fn is_smooth(&self, q: u64) -> bool {
        let mut q = q;
        for &p in &self.primes {
            while q.is_multiple_of(p) {
                q /= p;
            }
        }
        q == 1
    }

    /// Whether `n` is a unit square in `Z/UZ` (`include2 == false`) or in
    /// `Z/4UZ = Z/2WZ` (`include2 == true`).
    ///
    /// The 2-part is decided by the structure of odd squares: modulo 2 every
    /// odd number is a square, modulo 8 only the class 1 is. `U` is even, so
    /// `4U` is divisible by 8 and `4U / 8` is odd.
    pub fn is_invertible_square(&self, n: i128, include2: bool) -> bool {
        let two_adic = if include2 { 8 } else { 2 };
        if n.rem_euclid(two_adic) != 1 {
            return false;
        }
        self.odd_primes()
            .iter()
            .all(|&p| legendre_unchecked(n.rem_euclid(p as i128) as u64, p) == 1)
    }
}

/// `n` is a unit square modulo `U` (or modulo `2W` with `include2`).
pub fn is_invertible_square_mod(n: i128, m: &PrimorialModulus, include2: bool) -> bool {
    m.is_invertible_square(n, include2)
}

/// A set of prime squares in the window `(N, 4N]`, each carrying the weight
/// `log p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimeSquareSet {
    n: u64,
    roots: Vec<u64>,
    elements: Vec<u64>,
    weights: Vec<f64>,
}

impl PrimeSquareSet {
    /// All prime squares in `(N, 4N]`.
    pub fn all_in(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("window base N = {n} must be at least 2")));
        }
        let hi = isqrt(4 * n);
        let roots: Vec<u64> = sieve_primes(hi)
            .into_iter()
            .filter(|&p| p * p > n)
            .collect();
        Ok(Self::from_sorted_roots(n, roots))
    }

    /// The prime squares `p²` for the given primes, validated against the window.
    pub fn from_primes(n: u64, primes: &[u64]) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("window base N = {n} must be at least 2")));
        }
        let mut roots = primes.to_vec();
        roots.sort_unstable();
        roots.dedup();
        for &p in &roots {
            if !is_prime(p) {
                return Err(invalid(format!("{p} is not prime")));
            }
            let sq = p
                .checked_mul(p)
                .ok_or_else(|| invalid("prime square overflows u64"))?;
            if sq <= n || sq > 4 * n {
                return Err(invalid(format!(
                    "{p}² = {sq} lies outside ({n}, {}]",
                    4 * n
                )));
            }
        }
        Ok(Self::from_sorted_roots(n, roots))
    }

    fn from_sorted_roots(n: u64, roots: Vec<u64>) -> Self {
        let elements = roots.iter().map(|&p| p * p).collect();
        let weights = roots.iter().map(|&p| (p as f64).ln()).collect();
        Self {
            n,
            roots,
            elements,
            weights,
        }
    }

    /// Keeps the members whose index is selected by `keep`.
    pub fn filter_by_index(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let roots = self
            .roots
            .iter()
            .enumerate()
            .filter(|&(i, _)| keep(i))
            .map(|(_, &p)| p)
            .collect();
        Self::from_sorted_roots(self.n, roots)
    }

    pub fn window_base(&self) -> u64 {
        self.n
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn primes(&self) -> &[u64] {
        &self.roots
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }
}

/// All prime squares in `(N, 4N]` with their `log p` weights.
pub fn prime_squares_in(n: u64) -> Result<PrimeSquareSet> {
    PrimeSquareSet::all_in(n)
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_small_bounds() {
        assert_eq!(sieve_primes(10), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(2), vec![2]);
        assert!(sieve_primes(1).is_empty());
        assert!(sieve_primes(0).is_empty());
        assert_eq!(sieve_primes(30).len(), 10);
        assert_eq!(sieve_primes(100_000).len(), 9592);
    }

    #[test]
    fn sieve_agrees_with_miller_rabin() {
        let primes = sieve_primes(5000);
        let mr: Vec<u64> = (0..=5000).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, mr);
    }

    #[test]
    fn prime_square_windows() {
        let s = prime_squares_in(10).unwrap();
        assert_eq!(s.elements(), &[25]);
        assert!((s.weights()[0] - 5f64.ln()).abs() < 1e-15);

        assert_eq!(prime_squares_in(4).unwrap().elements(), &[9]);
        assert_eq!(
            prime_squares_in(100).unwrap().elements(),
            &[121, 169, 289, 361]
        );
        assert_eq!(prime_squares_in(3).unwrap().elements(), &[4, 9]);
        assert!(prime_squares_in(1).is_err());
    }

    #[test]
    fn from_primes_rejects_out_of_window() {
        assert!(PrimeSquareSet::from_primes(100, &[11, 19]).is_ok());
        assert!(PrimeSquareSet::from_primes(100, &[7]).is_err());
        assert!(PrimeSquareSet::from_primes(100, &[21]).is_err());
        assert!(PrimeSquareSet::from_primes(100, &[23]).is_err());
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(1, 3).unwrap(), 1);
        assert_eq!(legendre(0, 5).unwrap(), 0);
        assert_eq!(legendre(2, 3).unwrap(), -1);
        assert_eq!(legendre(-1, 5).unwrap(), 1);
        assert_eq!(legendre(-1, 7).unwrap(), -1);
        assert_eq!(legendre(1, 2), Err(Error::NotOddPrime(2)));
        assert_eq!(legendre(1, 9), Err(Error::NotOddPrime(9)));
    }

    #[test]
    fn legendre_matches_residue_search() {
        for p in sieve_primes(97).into_iter().skip(1) {
            let squares: Vec<bool> = {
                let mut v = vec![false; p as usize];
                for r in 1..p {
                    v[(r * r % p) as usize] = true;
                }
                v
            };
            for x in -(p as i128)..(2 * p as i128) {
                let r = x.rem_euclid(p as i128) as usize;
                let expected = if r == 0 {
                    0
                } else if squares[r] {
                    1
                } else {
                    -1
                };
                assert_eq!(legendre(x, p).unwrap(), expected, "x={x} p={p}");
            }
        }
    }

    #[test]
    fn primorial_data() {
        let m = PrimorialModulus::new(3).unwrap();
        assert_eq!(m.primes(), &[2, 3]);
        assert_eq!(m.u_u64(), Some(6));
        assert_eq!(m.phi_u(), &BigUint::from(2u32));
        assert_eq!(m.tau_u(), &BigUint::from(4u32));
        assert_eq!(m.big_w_u64(), Some(12));

        let m = PrimorialModulus::new(50).unwrap();
        assert_eq!(m.u_u64(), Some(614_889_782_588_491_410));
        assert_eq!(m.tau_u(), &(BigUint::one() << 15));
        assert!(PrimorialModulus::new(1).is_err());
        assert!(PrimorialModulus::from_density_parameter(1.5).is_ok());
        assert!(PrimorialModulus::from_density_parameter(std::f64::consts::E.powf(7.389)).is_err());
    }

    #[test]
    fn invertible_square_examples() {
        let m = PrimorialModulus::new(3).unwrap();
        assert!(is_invertible_square_mod(1, &m, false));
        assert!(!is_invertible_square_mod(3, &m, false));
        assert!(is_invertible_square_mod(25, &m, false));
        assert!(is_invertible_square_mod(7, &m, false));
        // modulo 24 the odd class must also be 1 mod 8
        assert!(!is_invertible_square_mod(13, &m, true));
        assert!(is_invertible_square_mod(13, &m, false));
        assert!(is_invertible_square_mod(25, &m, true));
    }

    #[test]
    fn invertible_square_matches_exhaustive_search() {
        for w in [2, 3, 5, 7] {
            let m = PrimorialModulus::new(w).unwrap();
            for include2 in [false, true] {
                let modulus = m.u_u64().unwrap() * if include2 { 4 } else { 1 };
                let mut unit_squares = vec![false; modulus as usize];
                for r in 1..modulus {
                    if gcd(r, modulus) == 1 {
                        unit_squares[(r * r % modulus) as usize] = true;
                    }
                }
                for n in 0..modulus {
                    assert_eq!(
                        m.is_invertible_square(n as i128, include2),
                        unit_squares[n as usize],
                        "n={n} modulus={modulus}"
                    );
                }
            }
        }
    }

    #[test]
    fn arithmetic_helpers() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(24), 8);
        assert_eq!(divisor_count(24), 8);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(isqrt(99), 9);
        assert_eq!(isqrt(100), 10);
    }
}
