//! Complete quadratic sums V_q and unit Gauss sums.
//!
//! cargo run --example gauss_sums

use primesq::arith::PrimorialModulus;
use primesq::gauss::{
    closed_form, quad_gauss_units, unit_gauss_magnitude_bound, v_q, vanishing_sweep, vq_ratio,
    vq_vanishing_predict, VanishingClass, VqParams,
};

fn main() -> primesq::Result<()> {
    let m = PrimorialModulus::new(3)?;
    println!("  q  class         |V_q(1, 1)|  closed form");
    for q in [1, 2, 3, 4, 6, 8, 9, 12, 16, 24, 27, 48, 5, 35] {
        let params = VqParams::for_modulus(q, 1, 1, &m)?;
        let class = vq_vanishing_predict(q, &m);
        let v = v_q(params);
        let closed = if class == VanishingClass::ClosedForm {
            format!("{:.3}", closed_form(params))
        } else {
            String::new()
        };
        println!(
            "{q:>3}  {:<12}  {:>11.3}  {closed}",
            class.as_str(),
            v.norm()
        );
    }

    let ratio = vq_ratio(VqParams::for_modulus(35, 1, 1, &m)?, &m)?;
    println!(
        "\nq = 35: |V_q| / phi(q, W) = {:.4} vs q^(-97/200) = {:.4}",
        ratio.ratio, ratio.comparator
    );

    let rows = vanishing_sweep(&m, 100)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    println!(
        "sweep up to q = 100: {} rows, {failed} failures",
        rows.len()
    );

    for v in [15, 65, 105, 221] {
        let worst = (0..v as i64)
            .filter(|a| primesq::arith::gcd(*a as u64, v) == 1)
            .map(|a| quad_gauss_units(a, v).map(|s| s.norm()))
            .collect::<primesq::Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!(
            "V = {v:>3}: max |G*| = {worst:.3}, bound {:.3}",
            unit_gauss_magnitude_bound(v)
        );
    }
    Ok(())
}
