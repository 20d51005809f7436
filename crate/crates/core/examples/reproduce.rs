//! Prints one of the reference tables or figure data sets.
//!
//! cargo run --release --example reproduce -- table3
//! cargo run --release --example reproduce -- fig2 csv

use crt_design::reproduce::{reproduce, TABLE_IDS};

fn main() {
    let mut args = std::env::args().skip(1);
    let Some(id) = args.next() else {
        eprintln!("usage: reproduce <{}> [csv|json]", TABLE_IDS.join("|"));
        std::process::exit(2);
    };
    let table = match reproduce(&id) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    match args.next().as_deref() {
        Some("csv") => print!("{}", table.to_csv()),
        Some("json") => println!("{}", serde_json::to_string_pretty(&table.to_json()).unwrap()),
        _ => print!("{}", table.to_text()),
    }
}
