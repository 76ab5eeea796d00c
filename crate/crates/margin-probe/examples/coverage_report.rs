//! Assembles the coverage table from previously written stage artifacts
//! (attack CSVs, SVM dumps, PAS files) and prints it.
//!
//!     cargo run --release --example coverage_report -- [OUT_DIR]

use margin_probe::cli::{cmd_report, RunConfig};
use std::path::PathBuf;

fn main() {
    let output_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"));
    let cfg = RunConfig { output_dir, ..RunConfig::default() };
    match cmd_report(&cfg) {
        Ok(out) => {
            println!();
            println!("coverage csv:   {}", out.csv_path.display());
            println!("coverage table: {}", out.table_path.display());
        }
        Err(err) => {
            eprintln!("report failed: {err}");
            std::process::exit(1);
        }
    }
}
