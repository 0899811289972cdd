//! Desk-scale estimates of s(K) for colourings of prime squares.
//!
//! cargo run --release --example colouring_estimate -- 4 100000

use primesq::chromatic::{estimate_sk, Strategy};

fn main() -> primesq::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: u32 = args
        .next()
        .map_or(4, |a| a.parse().expect("K must be an integer"));
    let x: u64 = args
        .next()
        .map_or(100_000, |a| a.parse().expect("X must be an integer"));

    for strategy in Strategy::ALL {
        let e = estimate_sk(k, x, strategy, 7, 1000)?;
        let estimate = e.s_estimate.map_or("none".to_string(), |s| s.to_string());
        println!(
            "{:<15} classes {:?}  window {:?}  s = {estimate}  unrepresentable {}",
            strategy.as_str(),
            e.class_sizes,
            e.window,
            e.unrepresentable
        );
    }
    Ok(())
}
