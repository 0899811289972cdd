//! Primorial moduli, unit squares and prime-square sets.
//!
//! cargo run --example prime_squares

use primesq::arith::{is_invertible_square_mod, prime_squares_in, PrimorialModulus};

fn main() -> primesq::Result<()> {
    for w in [2, 3, 5, 7, 11, 13] {
        let m = PrimorialModulus::new(w)?;
        println!(
            "w = {w:>2}  U = {:>6}  phi(U) = {:>5}  tau(U) = {:>3}  2W = {}",
            m.u(),
            m.phi_u(),
            m.tau_u(),
            m.big_w()
        );
    }

    let m = PrimorialModulus::new(5)?;
    let big_w = m.big_w_u64().unwrap() as i128;
    let squares: Vec<i128> = (1..big_w)
        .filter(|&n| is_invertible_square_mod(n, &m, true))
        .collect();
    println!("\nunit squares mod {big_w}: {squares:?}");

    let s = prime_squares_in(1000)?;
    println!("\nprime squares in (1000, 4000]:");
    for (p, (x, w)) in s.primes().iter().zip(s.elements().iter().zip(s.weights())) {
        println!("  {p:>3}^2 = {x:>5}  log p = {w:.4}");
    }
    Ok(())
}
