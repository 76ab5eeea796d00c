//! Trains the LeNet-class model on MNIST and writes a checkpoint.
//!
//!     cargo run --release --example train_mnist -- [DATA_DIR] [OUT_DIR]
//!
//! DATA_DIR defaults to $MARGIN_PROBE_DATA, then ./data/mnist.

use margin_probe::cli::{cmd_train, RunConfig};
use std::path::PathBuf;

fn main() {
    let mut args = std::env::args().skip(1);
    let cfg = RunConfig {
        data_dir: args.next().map(PathBuf::from),
        output_dir: args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
        ..RunConfig::default()
    };
    let cfg = RunConfig {
        data_dir: cfg.data_dir.or_else(default_data_dir),
        ..cfg
    };
    match cmd_train(&cfg) {
        Ok(out) => {
            println!("checkpoint: {}", out.checkpoint.display());
            println!("training log: {}", out.log_path.display());
        }
        Err(err) => {
            eprintln!("train failed: {err}");
            std::process::exit(1);
        }
    }
}

fn default_data_dir() -> Option<PathBuf> {
    let local = PathBuf::from("data/mnist");
    local.is_dir().then_some(local)
}
