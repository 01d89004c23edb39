//! Draws from the angular and step-length noise used by noisy agents and
//! shows what a perturbed action looks like.
//!
//! `cargo run --example noise_samplers`

use goalsetting::agents::{perturb_action, sample_von_mises, NoiseParams};
use goalsetting::seed::rng_from_seed;

fn main() {
    let mut rng = rng_from_seed(1);
    let noise = NoiseParams::default();
    let n = 50_000;
    let (mut c, mut s) = (0.0, 0.0);
    for _ in 0..n {
        let th = sample_von_mises(noise.angular_concentration, &mut rng);
        c += th.cos();
        s += th.sin();
    }
    println!(
        "von Mises κ={}: circular mean {:.4}, mean resultant length {:.4}",
        noise.angular_concentration,
        s.atan2(c),
        (c * c + s * s).sqrt() / n as f64
    );

    let ideal = [30.0, 0.0, 40.0];
    for _ in 0..5 {
        let a = perturb_action(&ideal, &noise, &mut rng);
        let len = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let cos = a.iter().zip(&ideal).map(|(x, y)| x * y).sum::<f64>() / (len * 50.0);
        println!(
            "{a:8.3?}  length {len:.3}  angle {:.2}°",
            cos.clamp(-1.0, 1.0).acos().to_degrees()
        );
    }
}
