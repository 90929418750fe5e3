//! Which generators give a loss that is convex in τ for exponential
//! families? Includes a user-defined generator.
//!
//! cargo run --example convexity_certificate

use sdrme::bregman::{certify_convexity, default_certification_grid, CustomGenerator, Generator};

// f(x) = (x^1.5 - 1.5x + 0.5) / 0.75, so f''(1) = 1.
fn power_f(x: f64) -> f64 {
    (x.powf(1.5) - 1.5 * x + 0.5) / 0.75
}
fn power_d1(x: f64) -> f64 {
    (1.5 * x.sqrt() - 1.5) / 0.75
}
fn power_d2(x: f64) -> f64 {
    1.0 / x.sqrt()
}
fn power_d3(x: f64) -> f64 {
    -0.5 * x.powf(-1.5)
}

fn main() -> sdrme::Result<()> {
    let grid = default_certification_grid();
    let custom = Generator::custom(CustomGenerator {
        name: "power-1.5",
        f: power_f,
        d1: power_d1,
        d2: power_d2,
        d3: power_d3,
    })?;
    for f in [Generator::Kl, Generator::Js, Generator::Chi, custom] {
        println!("{:<10} {}", f.name(), certify_convexity(&f, &grid));
    }
    Ok(())
}
