//! Major arcs, Dirichlet approximation and point classification.
//!
//! cargo run --example major_arcs -- 0.3183

use primesq::circle::{arc_parameters, build_major_arcs, classify_point, dirichlet_approx};

fn main() -> primesq::Result<()> {
    let t: f64 = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("t must be a number"))
        .unwrap_or(std::f64::consts::FRAC_1_PI);

    for m in [10.0, 100.0, 1e4, 1e8] {
        let (a, q) = dirichlet_approx(t, m)?;
        println!(
            "M = {m:>9}: t ≈ {a}/{q}, |t − a/q| = {:.3e}",
            (t - a as f64 / q as f64).abs()
        );
    }

    let arcs = build_major_arcs(10, 201.0)?;
    println!(
        "\nQ = 10, M = 201: {} arcs covering {:.4} of the circle",
        arcs.len(),
        arcs.total_measure()
    );
    for probe in [t, 0.5, 0.5 + 1.0 / 300.0, 1.0 / 7.0 + 0.004] {
        println!(
            "  t = {probe:.6} -> {}",
            classify_point(probe, &arcs)?.label()
        );
    }

    let p = arc_parameters(1e30, 1.0, 2.0)?;
    println!(
        "\nN = 1e30, A = 1, B = 2: Q = {:.1}, M = {:.3e}, disjoint = {}",
        p.q, p.m, p.disjoint
    );
    Ok(())
}
