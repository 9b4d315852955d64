//! Run a JSON problem file and print the CSV report.
//!
//! `cargo run --example problem_file -- crates/core/problems/examples/plane.json`

use std::path::PathBuf;

use xconvex::cli::{run, to_csv, ProblemFile};

fn main() -> xconvex::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/problems/examples/plane.json")));
    let problem = ProblemFile::load(&path)?;
    let report = run("example", &problem)?;
    print!("{}", to_csv(&report)?);
    eprintln!("exit code {}", report.exit_code);
    Ok(())
}
