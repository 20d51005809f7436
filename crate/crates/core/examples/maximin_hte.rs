//! Maximin cluster size for the heterogeneity test when both ICCs are only
//! known to lie in a rectangle.
//!
//! cargo run --release --example maximin_hte

use crt_design::maximin::{Criterion, MaximinSearch};
use crt_design::reproduce::{reference_cost, reference_params};
use crt_design::{DesignSpace, ParameterSpace};

fn main() -> crt_design::Result<()> {
    let params = reference_params();
    for k in [10, 20] {
        let search = MaximinSearch::new(params.clone(), DesignSpace::default(), reference_cost(k)?);
        let r = search.run(Criterion::Hte)?;
        let worst: Vec<String> = r
            .worst_case_iccs
            .iter()
            .map(|c| format!("({}, {})", c.rho_y(), c.rho_x()))
            .collect();
        println!(
            "k={k:<3} maximin design m={} n={}  worst-case RE={:.4} at {}",
            r.design.m,
            r.design.n,
            r.min_value,
            worst.join(", ")
        );

        let idx = r.surface.designs.iter().position(|d| d == &r.design).unwrap();
        for (g, icc) in r.surface.grid.iter().enumerate() {
            if params.is_corner(icc) {
                println!(
                    "    RE at ({:<5}, {:<4}) = {:.4}",
                    icc.rho_y(),
                    icc.rho_x(),
                    r.surface.row(idx)[g]
                );
            }
        }
    }

    // Narrowing the covariate-ICC range changes the answer.
    let narrow = ParameterSpace::new((0.005, 0.2), (0.1, 0.75), 40)?;
    let r = MaximinSearch::new(narrow, DesignSpace::default(), reference_cost(10)?).run(Criterion::Hte)?;
    println!(
        "k=10 with rho_x <= 0.75: m={} n={} RE={:.4}",
        r.design.m, r.design.n, r.min_value
    );
    Ok(())
}
