//! Diabetes prevention programme: choose a cluster size that keeps power for
//! the programme effect and for its modification by BMI and fasting glucose.
//!
//! cargo run --release --example case_study

use crt_design::maximin::Criterion;
use crt_design::reproduce::{kdpp_params, kdpp_search, Modifier, KDPP_SD_Y};
use crt_design::{power_bounds, EffectTest, PowerOptions, ScaleModel};

fn main() -> crt_design::Result<()> {
    let search = kdpp_search();
    let opts = PowerOptions::default();
    let ate_scale = ScaleModel::from_sd(KDPP_SD_Y, 1.0)?;

    println!("lambda  m   n   minRE   ATE power        BMI power        IFG power");
    for lambda in [0.5, 0.6, 0.7, 0.8, 0.9] {
        let r = search.run(Criterion::Compound(lambda))?;
        let ate = power_bounds(
            EffectTest::Ate,
            &r.design,
            &kdpp_params(),
            &Modifier::Bmi.effects(),
            &ate_scale,
            &opts,
        )?;
        let mut line = format!(
            "{lambda:<6} {:<3} {:<3} {:.3}   [{:.3}, {:.3}]",
            r.design.m, r.design.n, r.min_value, ate.lower, ate.upper
        );
        for modifier in [Modifier::Bmi, Modifier::Ifg] {
            let b = power_bounds(
                EffectTest::Hte,
                &r.design,
                &kdpp_params(),
                &modifier.effects(),
                &modifier.scale(),
                &opts,
            )?;
            line.push_str(&format!("   [{:.3}, {:.3}]", b.lower, b.upper));
        }
        println!("{line}");
    }
    Ok(())
}
