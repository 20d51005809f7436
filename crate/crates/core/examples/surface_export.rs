//! Writes the full criterion surface of a maximin search as CSV, one row per
//! design and ICC grid point.
//!
//! cargo run --release --example surface_export > surface.csv

use std::io;

use crt_design::maximin::Criterion;
use crt_design::report::write_records;
use crt_design::reproduce::reference_search;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lambda = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0.6);
    let search = reference_search(10)?;
    let surface = search.surface(Criterion::Compound(lambda))?;
    eprintln!(
        "{} designs x {} grid points",
        surface.designs.len(),
        surface.grid.len()
    );
    write_records(io::stdout().lock(), &surface.records())?;
    Ok(())
}
