//! Bilinear forms over the capped simplex `{x : Σ x_i = P, 0 <= x_i <= D}`.
//!
//! A linear functional on the capped simplex is maximised by filling the
//! coordinates with the largest coefficients up to the cap. Alternating that
//! greedy step between the two arguments of a bilinear form gives a pair of
//! extreme points whose value dominates the starting diagonal value.

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Result};

/// Relative tolerance for mass and cap comparisons.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Maximum number of alternating greedy rounds in [`bilinear_ascend`].
pub const MAX_ASCENT_ROUNDS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CappedSimplexSpec {
    n: usize,
    mass: f64,
    cap: f64,
}

impl CappedSimplexSpec {
    pub fn new(n: usize, mass: f64, cap: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if !(mass > 0.0 && mass.is_finite()) || !(cap > 0.0 && cap.is_finite()) {
            return Err(invalid(format!(
                "mass P = {mass} and cap D = {cap} must be positive"
            )));
        }
        if (n as f64) * cap < mass * (1.0 - MASS_TOLERANCE) {
            return Err(invalid(format!(
                "empty polytope: n·D = {} < P = {mass}",
                n as f64 * cap
            )));
        }
        Ok(Self { n, mass, cap })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    fn tol(&self) -> f64 {
        MASS_TOLERANCE * self.mass.max(self.cap)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = self.tol();
        x.len() == self.n
            && x.iter().all(|&v| v >= -tol && v <= self.cap + tol)
            && (x.iter().sum::<f64>() - self.mass).abs() <= tol * self.n as f64
    }
}

/// A vertex of the capped simplex: all coordinates in `{0, D}` except at most
/// one, which lies strictly between.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremePoint {
    coords: Vec<f64>,
}

impl ExtremePoint {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Indices with a nonzero coordinate.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coords.len())
            .filter(|&i| self.coords[i] != 0.0)
            .collect()
    }

    /// Checks the three vertex invariants against `spec`: the mass equation,
    /// at most one interior coordinate, and `m·D >= P > (m−1)·D` for the
    /// support size `m`.
    pub fn satisfies_invariants(&self, spec: &CappedSimplexSpec) -> bool {
        let (p, d) = (spec.mass(), spec.cap());
        let tol = spec.tol();
        if !spec.contains(&self.coords) {
            return false;
        }
        let interior = self.coords.iter().filter(|&&v| v > 0.0 && v < d).count();
        let m = self.support().len() as f64;
        interior <= 1 && m * d >= p - tol && p > (m - 1.0) * d + tol.min(p * 1e-15)
    }
}

/// Maximises `Σ coeffs_i x_i` over the capped simplex: the cap `D` goes to
/// coordinates in decreasing coefficient order (lower index first on ties)
/// until the mass `P` is used up.
pub fn greedy_linear_max(coeffs: &[f64], spec: &CappedSimplexSpec) -> Result<ExtremePoint> {
    if coeffs.len() != spec.dim() {
        return Err(invalid(format!(
            "{} coefficients for a {}-dimensional polytope",
            coeffs.len(),
            spec.dim()
        )));
    }
    let mut order: Vec<usize> = (0..coeffs.len()).collect();
    order.sort_by(|&a, &b| coeffs[b].total_cmp(&coeffs[a]).then(a.cmp(&b)));

    let (p, d) = (spec.mass(), spec.cap());
    let mut coords = vec![0.0; coeffs.len()];
    let full = (p / d).floor() as usize;
    let mut used = 0.0;
    for &i in order.iter().take(full.min(coeffs.len())) {
        coords[i] = d;
        used += d;
    }
    let rest = p - used;
    if rest > spec.tol() {
        if let Some(&i) = order.get(full) {
            coords[i] = rest.min(d);
        }
    }
    Ok(ExtremePoint { coords })
}

/// Rejection attempts in [`sample_feasible`] before falling back to a convex
/// combination of random vertices.
pub const SAMPLE_ATTEMPTS: usize = 10_000;

/// A random point of the capped simplex: a flat Dirichlet draw scaled to
/// mass `P`, rejected while some coordinate exceeds `D`. When the cap is too
/// tight for rejection to succeed, a random convex combination of greedy
/// vertices is returned instead.
pub fn sample_feasible<R: Rng + ?Sized>(spec: &CappedSimplexSpec, rng: &mut R) -> Vec<f64> {
    let n = spec.dim();
    for _ in 0..SAMPLE_ATTEMPTS {
        let draws: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = draws.iter().sum();
        let x: Vec<f64> = draws.iter().map(|v| v / total * spec.mass()).collect();
        if x.iter().all(|&v| v <= spec.cap()) {
            return x;
        }
    }
    let mut x = vec![0.0; n];
    let mut weights: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    for w in weights {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let vertex = greedy_linear_max(&coeffs, spec).expect("dimension matches");
        for (xi, vi) in x.iter_mut().zip(vertex.coords()) {
            *xi += w * vi;
        }
    }
    x
}

/// `f(x, y) = Σ_{i,j} α(i, j) x_i y_j`.
pub fn bilinear_value(alpha: impl Fn(usize, usize) -> f64, x: &[f64], y: &[f64]) -> f64 {
    let mut total = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        for (j, &yj) in y.iter().enumerate() {
            if yj != 0.0 {
                total += alpha(i, j) * xi * yj;
            }
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BilinearAscent {
    pub x_star: ExtremePoint,
    pub y_star: ExtremePoint,
    pub value: f64,
    pub start_value: f64,
    /// Value reached by the alternating rounds alone.
    pub local_value: f64,
    pub rounds: usize,
    /// Whether every vertex was swept, making `value` the maximum over the
    /// product polytope.
    pub global: bool,
}

/// Largest vertex count for which [`bilinear_ascend`] sweeps every vertex.
pub const VERTEX_SWEEP_LIMIT: u128 = 1 << 20;

/// Number of vertices of the capped simplex.
pub fn vertex_count(spec: &CappedSimplexSpec) -> u128 {
    let n = spec.dim() as u128;
    let full = ((spec.mass() / spec.cap()).floor() as u128).min(n);
    let mut choose = 1u128;
    for i in 0..full {
        choose = choose.saturating_mul(n - i) / (i + 1);
    }
    let rest = spec.mass() - full as f64 * spec.cap();
    if rest > spec.tol() {
        choose.saturating_mul(n - full)
    } else {
        choose
    }
}

/// Calls `visit` on every vertex of the capped simplex.
pub fn for_each_vertex(spec: &CappedSimplexSpec, mut visit: impl FnMut(&ExtremePoint)) {
    let (n, d) = (spec.dim(), spec.cap());
    let full = ((spec.mass() / d).floor() as usize).min(n);
    let rest = spec.mass() - full as f64 * d;
    let fractional = rest > spec.tol();
    let mut chosen: Vec<usize> = (0..full).collect();
    let mut point = ExtremePoint {
        coords: vec![0.0; n],
    };
    loop {
        for &i in &chosen {
            point.coords[i] = d;
        }
        if fractional {
            for j in 0..n {
                if point.coords[j] == 0.0 {
                    point.coords[j] = rest;
                    visit(&point);
                    point.coords[j] = 0.0;
                }
            }
        } else {
            visit(&point);
        }
        for &i in &chosen {
            point.coords[i] = 0.0;
        }
        // next combination in lexicographic order
        let Some(pos) = (0..full).rev().find(|&k| chosen[k] < n - full + k) else {
            return;
        };
        chosen[pos] += 1;
        for k in pos + 1..full {
            chosen[k] = chosen[k - 1] + 1;
        }
    }
}

/// Alternating greedy ascent from a feasible `x0`: `y*` maximises `f(x0, ·)`,
/// then `x*` maximises `f(·, y*)`, repeated while the value increases. The
/// chain `f(x0, x0) <= f(x0, y*) <= f(x*, y*)` holds at every round.
///
/// The alternating rounds only reach a local optimum. When the polytope has
/// at most [`VERTEX_SWEEP_LIMIT`] vertices, every vertex `y` is paired with
/// its best response `x` as well, so `(x*, y*)` maximises `f` over the whole
/// product and `f(x, x) <= f(x*, y*)` for every feasible `x`.
pub fn bilinear_ascend(
    alpha: impl Fn(usize, usize) -> f64,
    spec: &CappedSimplexSpec,
    x0: &[f64],
) -> Result<BilinearAscent> {
    if !spec.contains(x0) {
        return Err(invalid("starting point is not in the capped simplex"));
    }
    let n = spec.dim();
    let start_value = bilinear_value(&alpha, x0, x0);

    let row_coeffs = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|j| (0..n).map(|i| alpha(i, j) * x[i]).sum())
            .collect()
    };
    let col_coeffs = |y: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|j| alpha(i, j) * y[j]).sum())
            .collect()
    };

    let mut y_star = greedy_linear_max(&row_coeffs(x0), spec)?;
    let mut x_star = greedy_linear_max(&col_coeffs(y_star.coords()), spec)?;
    let mut value = bilinear_value(&alpha, x_star.coords(), y_star.coords());
    let mut rounds = 1;
    while rounds < MAX_ASCENT_ROUNDS {
        let y_next = greedy_linear_max(&row_coeffs(x_star.coords()), spec)?;
        let x_next = greedy_linear_max(&col_coeffs(y_next.coords()), spec)?;
        let next = bilinear_value(&alpha, x_next.coords(), y_next.coords());
        if next <= value * (1.0 + 1e-14) + 1e-300 {
            break;
        }
        x_star = x_next;
        y_star = y_next;
        value = next;
        rounds += 1;
    }
    let local_value = value;
    let global = vertex_count(spec) <= VERTEX_SWEEP_LIMIT;
    if global {
        let mut best: Option<(ExtremePoint, ExtremePoint, f64)> = None;
        let mut coeffs = vec![0.0; n];
        for_each_vertex(spec, |y| {
            let support = y.support();
            for (i, c) in coeffs.iter_mut().enumerate() {
                *c = support.iter().map(|&j| alpha(i, j) * y.coords[j]).sum();
            }
            let x = greedy_linear_max(&coeffs, spec).expect("dimension matches");
            let v = bilinear_value(&alpha, x.coords(), y.coords());
            if best.as_ref().is_none_or(|b| v > b.2) {
                best = Some((x, y.clone(), v));
            }
        });
        if let Some((x, y, v)) = best {
            if v > value {
                x_star = x;
                y_star = y;
                value = v;
            }
        }
    }
    Ok(BilinearAscent {
        x_star,
        y_star,
        value,
        start_value,
        local_value,
        rounds,
        global,
    })
}

/// Outcome of bounding `Σ α(a, b) m(a) m(b)` through extreme points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedReduction {
    /// `Σ_{a,b} α(a, b) m(a) m(b)`.
    pub weighted_count: f64,
    /// `f(x*, y*)` from the ascent started at `m`.
    pub extreme_value: f64,
    pub x_support: Vec<usize>,
    pub y_support: Vec<usize>,
    /// Passing pairs on `X × Y`.
    pub pair_count: u64,
    /// `4 · T · P² / (|X| |Y|)`.
    pub bound: f64,
}

/// Replaces the class multiplicities `m` (total `P`, each at most `D`) by a
/// pair of extreme points and returns the resulting bound
/// `4 · |T(X, Y)| · P² / (|X| |Y|)`, where `X`, `Y` are the supports of the
/// extreme points and `T(X, Y)` the passing pairs between them.
pub fn reduce_weighted_count(
    multiplicities: &[f64],
    cap: f64,
    alpha: impl Fn(usize, usize) -> bool,
) -> Result<WeightedReduction> {
    if let Some(&bad) = multiplicities.iter().find(|&&v| !(0.0..=cap).contains(&v)) {
        return Err(invalid(format!(
            "multiplicity {bad} outside [0, D = {cap}]"
        )));
    }
    let mass: f64 = multiplicities.iter().sum();
    let spec = CappedSimplexSpec::new(multiplicities.len(), mass, cap)?;
    let weight = |i: usize, j: usize| if alpha(i, j) { 1.0 } else { 0.0 };

    let weighted_count = bilinear_value(weight, multiplicities, multiplicities);
    let ascent = bilinear_ascend(weight, &spec, multiplicities)?;
    let x_support = ascent.x_star.support();
    let y_support = ascent.y_star.support();
    for support in [&x_support, &y_support] {
        let m = support.len() as f64;
        assert!(
            m * cap >= mass * (1.0 - MASS_TOLERANCE) && mass > (m - 1.0) * cap,
            "extreme point support violates m·D >= P > (m−1)·D"
        );
    }
    let pair_count = x_support
        .iter()
        .flat_map(|&a| y_support.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| alpha(a, b))
        .count() as u64;
    let bound = 4.0 * pair_count as f64 * mass * mass / (x_support.len() * y_support.len()) as f64;
    Ok(WeightedReduction {
        weighted_count,
        extreme_value: ascent.value,
        x_support,
        y_support,
        pair_count,
        bound,
    })
}
