//! Runs the iFGSM and DeepFool budget sweeps against a trained checkpoint
//! and writes one outcome CSV per (attack, budget).
//!
//!     cargo run --release --example attack_sweep -- [DATA_DIR] [OUT_DIR]
//!
//! Expects OUT_DIR/model.pasm (produced by the train_mnist example or the
//! `margin-probe train` command).

use margin_probe::cli::{cmd_attack, RunConfig};
use std::path::PathBuf;

fn main() {
    let mut args = std::env::args().skip(1);
    let data_dir = args
        .next()
        .map(PathBuf::from)
        .or_else(|| {
            let local = PathBuf::from("data/mnist");
            local.is_dir().then_some(local)
        });
    let output_dir = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"));
    let cfg = RunConfig { data_dir, output_dir, ..RunConfig::default() };
    match cmd_attack(&cfg) {
        Ok(out) => {
            println!("{} outcome files written:", out.csv_paths.len());
            for path in &out.csv_paths {
                println!("  {}", path.display());
            }
        }
        Err(err) => {
            eprintln!("attack failed: {err}");
            std::process::exit(1);
        }
    }
}
