//! Checks the finite addition theorem for the prime squares in (N, 4N].
//!
//! cargo run --release --example addition_theorem -- 10000

use primesq::arith::prime_squares_in;
use primesq::chromatic::{chaining_overlaps, derive_d_from_energy, sarkozy_check};

fn main() -> primesq::Result<()> {
    let n: u64 = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("N must be an integer"))
        .unwrap_or(10_000);
    let s = prime_squares_in(n)?;
    let d = derive_d_from_energy(&s)?;
    let r = sarkozy_check(&s, d, 10 * n)?;

    println!("N = {n}, |S| = {}, D = {d:.4}, 6D = {}", s.len(), r.six_d);
    println!(
        "size:     {} vs {}  {}",
        r.size.lhs, r.size.rhs, r.size.holds
    );
    println!(
        "energy:   {} vs {}  {}",
        r.energy.lhs, r.energy.rhs, r.energy.holds
    );
    println!("coprime:  {}", r.coprime.holds);
    if let Some(n0) = r.n0 {
        println!(
            "n0 = {n0}; checked {} values, {} failures",
            r.checked, r.failure_count
        );
    }
    println!("{}", r.status);
    println!(
        "\nintervals for N and N + 1 overlap at this D: {}",
        chaining_overlaps(n, d, d)
    );
    Ok(())
}
