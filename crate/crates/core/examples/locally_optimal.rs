//! Locally optimal cluster sizes for a single guess of the two ICCs.
//!
//! cargo run --example locally_optimal

use crt_design::lod::{reference_optimum, CompoundWeighting, LodOptions};
use crt_design::{lod_ate, lod_compound, lod_hte, CostModel, DesignSpace, IccPair, ScaleModel};

fn main() -> crt_design::Result<()> {
    // $100k budget, $500 per cluster, $50 per person: k = 10.
    let cost = CostModel::new(100_000.0, 500.0, 50.0)?;
    let space = DesignSpace::default();
    let scale = ScaleModel::default();

    for (ry, rx) in [(0.05, 0.75), (0.05, 0.1), (0.2, 0.5), (0.1, 1.0)] {
        let icc = IccPair::new(ry, rx)?;
        let hte = lod_hte(&icc, &cost, &scale, &space)?;
        let ate = lod_ate(ry, &cost, &scale, &space)?;
        println!(
            "rho_y={ry:<5} rho_x={rx:<4}  HTE (m={:>3}, n={:>3}){}  ATE (m={:>3}, n={:>3})",
            hte.design.m,
            hte.design.n,
            if hte.capped { " capped" } else { "       " },
            ate.design.m,
            ate.design.n,
        );
    }

    let icc = IccPair::new(0.05, 0.5)?;
    let r = reference_optimum(&icc, &cost, &space)?;
    println!(
        "\nreference optima at (0.05, 0.5): m_hte={:.2} m_ate={:.2}",
        r.m_hte, r.m_ate
    );
    let consistent = LodOptions {
        weighting: CompoundWeighting::Consistent,
        ..Default::default()
    };
    for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let d = lod_compound(&icc, &cost, &scale, &space, lambda)?;
        let c = crt_design::lod::lod_compound_with(&icc, &cost, &scale, &space, lambda, &consistent)?;
        println!(
            "lambda={lambda:<4}  m={:>3} n={:>3} value={:.4}   consistent: m={:>3} value={:.4}",
            d.design.m, d.design.n, d.objective_value, c.design.m, c.objective_value
        );
    }
    Ok(())
}
