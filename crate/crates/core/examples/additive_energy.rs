//! Representation counts and k-fold additive energies of prime squares.
//!
//! cargo run --release --example additive_energy

use primesq::arith::prime_squares_in;
use primesq::energy::{additive_energy, moment_eleven, rep_counts, Backend};

fn main() -> primesq::Result<()> {
    let s = prime_squares_in(100)?;
    println!("S = squares of {:?}", s.primes());

    let r2 = rep_counts(&s, 2)?;
    let busiest = r2.entries().iter().max_by_key(|(_, c)| *c).unwrap();
    println!(
        "r_2 has {} nonzero entries; the largest is r_2({}) = {}",
        r2.entries().len(),
        busiest.0,
        busiest.1
    );

    for k in 1..=6 {
        let fast = additive_energy(&s, k, false, Backend::Convolution)?;
        let weighted = additive_energy(&s, k, true, Backend::Convolution)?;
        let check = if k <= 4 {
            let slow = additive_energy(&s, k, false, Backend::Oracle)?;
            if slow == fast {
                "oracle agrees"
            } else {
                "ORACLE DISAGREES"
            }
        } else {
            ""
        };
        println!(
            "E_{k} = {:>14}  weighted {:>16.3}  {check}",
            fast.exact().unwrap(),
            weighted.as_f64()
        );
    }

    let m = moment_eleven(&s)?;
    println!(
        "\nsum W6 W5 = {:.4e} <= integral |S^|^11 = {:.4e} <= bound {:.4e}",
        m.signed, m.absolute, m.bound
    );
    Ok(())
}
