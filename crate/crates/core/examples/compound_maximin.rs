//! Maximin designs balancing the average and heterogeneity effects, for a
//! range of weights on the average effect.
//!
//! cargo run --release --example compound_maximin

use crt_design::maximin::Criterion;
use crt_design::reproduce::reference_search;

fn main() -> crt_design::Result<()> {
    let search = reference_search(10)?;
    println!("{:>6} {:>4} {:>4} {:>9}", "lambda", "m", "n", "min RE");
    for i in 0..=10 {
        let lambda = f64::from(i) / 10.0;
        let r = search.run(Criterion::Compound(lambda))?;
        println!(
            "{lambda:>6.1} {:>4} {:>4} {:>9.4}",
            r.design.m, r.design.n, r.min_value
        );
    }
    Ok(())
}
