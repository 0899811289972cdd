//! Linear and bilinear maximisation over the capped simplex.
//!
//! cargo run --example extreme_points

use primesq::arith::PrimorialModulus;
use primesq::extremal::{
    bilinear_ascend, greedy_linear_max, reduce_weighted_count, sample_feasible, vertex_count,
    CappedSimplexSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> primesq::Result<()> {
    let spec = CappedSimplexSpec::new(6, 2.5, 1.0)?;
    let x = greedy_linear_max(&[0.3, 2.0, -1.0, 2.0, 0.7, 0.1], &spec)?;
    println!("greedy vertex: {:?}", x.coords());
    println!("vertices of the polytope: {}", vertex_count(&spec));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 12;
    let spec = CappedSimplexSpec::new(n, 2.7, 1.0)?;
    let alpha: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x0 = sample_feasible(&spec, &mut rng);
    let r = bilinear_ascend(|i, j| alpha[i * n + j], &spec, &x0)?;
    println!(
        "\nf(x0, x0) = {:.4}, alternating rounds reach {:.4}, maximum {:.4}",
        r.start_value, r.local_value, r.value
    );
    println!(
        "x* support {:?}, y* support {:?}",
        r.x_star.support(),
        r.y_star.support()
    );

    // multiplicities of residue classes mod 6 with a unit-square predicate
    let m = PrimorialModulus::new(3)?;
    let mult = [0.4, 1.0, 0.2, 0.9, 0.0, 0.5];
    let red = reduce_weighted_count(&mult, 1.0, |a, b| {
        let (a, b) = (a as i128, b as i128);
        m.is_invertible_square(a * a + b * b + 1, false)
    })?;
    println!(
        "\nweighted count {:.3} <= f(x*, y*) {:.3} <= bound {:.3}",
        red.weighted_count, red.extreme_value, red.bound
    );
    Ok(())
}
