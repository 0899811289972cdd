//! Quadratic character sums modulo p and the Hölder bound modulo U.
//!
//! cargo run --example character_sums

use primesq::arith::PrimorialModulus;
use primesq::charsums::{
    check_modp_bound, check_sumzp_bound, count_t_c, holder_bound_eq8, DensityParameter,
};

fn main() -> primesq::Result<()> {
    println!("  p  c  t   E_p(t/2, t)   log rhs   pass");
    for p in [3, 5, 7, 11, 13] {
        for c in 0..3 {
            let r = check_modp_bound(p, c, 2)?;
            println!(
                "{p:>3} {c:>2} {:>2}  {:>12.6}  {:>8.2}   {}",
                2, r.lhs, r.ln_rhs, r.pass
            );
        }
    }

    let z = check_sumzp_bound(11, 1, 2)?;
    println!(
        "\nZ/11Z sum at c = 1, t = 2: {} (log rhs {:.2})",
        z.lhs, z.ln_rhs
    );

    // pairs (x, y) of units mod 30 with x² + y² + c again a unit square
    let m = PrimorialModulus::new(5)?;
    let units: Vec<i128> = (1..30)
        .filter(|x| [2, 3, 5].iter().all(|p| x % p != 0))
        .collect();
    println!(
        "\nnonzero T_c over all {} unit pairs mod 30:",
        units.len().pow(2)
    );
    for c in 0..30 {
        let t = count_t_c(&units, &units, c, &m)?;
        if t > 0 {
            println!("  T_{c} = {t}");
        }
    }

    let a = DensityParameter::new(1e6)?;
    let t = a.holder_t();
    let bound = holder_bound_eq8(1000, 1000, &m, a, t)?;
    println!(
        "Hölder bound at A = 1e6, t = {t}: log value {:.2}",
        bound.ln_value
    );
    Ok(())
}
