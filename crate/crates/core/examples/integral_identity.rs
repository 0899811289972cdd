//! The tent window, its Fourier transform and the energy integral inequality.
//!
//! cargo run --release --example integral_identity

use primesq::arith::prime_squares_in;
use primesq::circle::{energy_integral_identity, psi, s_hat, TentWindow};

fn main() -> primesq::Result<()> {
    let w = TentWindow::new(1000)?;
    let l = w.half_width();
    for z in [0.0, 0.25, 0.5, 1.0, 1.5] {
        let u = z / l;
        let b = w.beta_hat(u);
        println!(
            "u·5N/2 = {z:<4}  beta_hat = {:>10.3} {:+10.3}i  |.| = {:.3}",
            b.re,
            b.im,
            b.norm()
        );
    }

    let s = prime_squares_in(1000)?;
    println!(
        "\n|S^(0)| = {:.3}, |psi(0)| = {:.3}",
        s_hat(0.0, &s).norm(),
        psi(0.0, 1000)?.norm()
    );

    for n in [100, 1000, 2000] {
        let r = energy_integral_identity(&prime_squares_in(n)?)?;
        println!(
            "N = {n:>4}, |S| = {:>2}: (4/5)√N E_6 = {:.4e} <= {:.4e}  {}",
            r.set_size,
            r.lhs,
            r.rhs,
            if r.pass { "ok" } else { "FAILS" }
        );
    }
    Ok(())
}
