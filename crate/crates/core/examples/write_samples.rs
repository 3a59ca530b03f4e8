//! Write the bundled sample databases to a directory.
//!
//! `cargo run --example write_samples -- <dir>`

use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "sample_dbs".into()));
    std::fs::create_dir_all(&dir)?;
    let paths = sqlsynth::samples::write_sample_databases(&dir)?;
    for p in &paths {
        println!("{}", p.display());
    }
    Ok(())
}
