//! Lower and upper power of a fixed design over an ICC rectangle, and the
//! power curve along the covariate ICC.
//!
//! cargo run --example power_bounds

use crt_design::power::{power_curve, Approximation};
use crt_design::{
    power_bounds, CostModel, Design, EffectSpec, EffectTest, ParameterSpace, PowerOptions, ScaleModel,
};

fn main() -> crt_design::Result<()> {
    let cost = CostModel::new(100_000.0, 500.0, 50.0)?;
    let design = Design::for_budget(22, &cost)?;
    let params = ParameterSpace::new((0.005, 0.2), (0.1, 0.75), 40)?;
    let scale = ScaleModel::default();
    let effects = EffectSpec::new(0.2, 0.2, 0.05)?;

    for approximation in [Approximation::Normal, Approximation::StudentT] {
        let opts = PowerOptions {
            approximation,
            ..Default::default()
        };
        for test in [EffectTest::Hte, EffectTest::Ate] {
            let b = power_bounds(test, &design, &params, &effects, &scale, &opts)?;
            println!(
                "{:?} {:<3} power in [{:.3}, {:.3}]  worst at ({}, {})",
                approximation,
                test.name(),
                b.lower,
                b.upper,
                b.argmin.rho_y(),
                b.argmin.rho_x()
            );
        }
    }

    println!("\nHTE power of (m={}, n={}) along rho_x:", design.m, design.n);
    let curve = power_curve(
        EffectTest::Hte,
        &design,
        &[0.005, 0.05, 0.2],
        &ParameterSpace::new((0.005, 0.2), (0.1, 0.75), 4)?,
        &effects,
        &scale,
        &PowerOptions::default(),
    )?;
    for p in curve {
        println!(
            "  rho_y={:<5} rho_x={:<6.4} power={:.3}",
            p.rho_y, p.rho_x, p.power
        );
    }
    Ok(())
}
