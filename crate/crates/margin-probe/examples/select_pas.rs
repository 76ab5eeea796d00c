//! Extracts last-conv-block features of the correctly classified test
//! samples, trains the one-vs-rest SVM for each C, and selects the support
//! vectors as potential adversarial samples.
//!
//!     cargo run --release --example select_pas -- [DATA_DIR] [OUT_DIR]
//!
//! Expects OUT_DIR/model.pasm. Writes the SVM dumps, the feature bank, and
//! the per-C PAS index files.

use margin_probe::cli::{cmd_pas, cmd_svm, RunConfig};
use std::path::PathBuf;

fn main() {
    let mut args = std::env::args().skip(1);
    let data_dir = args.next().map(PathBuf::from).or_else(|| {
        let local = PathBuf::from("data/mnist");
        local.is_dir().then_some(local)
    });
    let output_dir = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"));
    let cfg = RunConfig { data_dir, output_dir, ..RunConfig::default() };
    let run = cmd_svm(&cfg).and_then(|svm_out| {
        let pas_out = cmd_pas(&cfg)?;
        Ok((svm_out, pas_out))
    });
    match run {
        Ok((svm_out, pas_out)) => {
            println!("feature bank: {}", svm_out.bank_path.display());
            for ((c, indices), path) in pas_out.pas_indices.iter().zip(&pas_out.pas_paths) {
                println!("C={c}: {} PAS -> {}", indices.len(), path.display());
            }
        }
        Err(err) => {
            eprintln!("pas selection failed: {err}");
            std::process::exit(1);
        }
    }
}
