//! Runs every pipeline stage for Function 2 and prints the report.
//!
//! Pass an output directory as the first argument; a temporary one is used
//! otherwise.

use std::path::PathBuf;

use rulenet::io::read_text;
use rulenet::pipeline::{run_pipeline, PipelineConfig, REPORT};

fn main() {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("rulenet-function2"));
    let cfg = PipelineConfig { out_dir, ..PipelineConfig::default() };

    match run_pipeline(&cfg) {
        Ok(summary) => {
            println!("artifacts in {}\n", summary.out_dir.display());
            print!("{}", read_text(&summary.out_dir.join(REPORT)).unwrap());
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
