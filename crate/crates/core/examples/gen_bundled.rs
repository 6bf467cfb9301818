//! Writes the bundled synthetic datasets as svmlight files.
//!
//! `cargo run --example gen_bundled -- [DIR]` (defaults to the crate's `data/`).

use std::path::PathBuf;

use scsvm::data::svmlight::save_svmlight;
use scsvm::data::synthetic::BUNDLED;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"));
    std::fs::create_dir_all(&dir)?;
    for b in &BUNDLED {
        let ds = (b.generate)();
        let path = dir.join(format!("{}.svm", b.name));
        save_svmlight(&ds.to_raw(), &path)?;
        println!("{}: {} samples, {} features", path.display(), ds.n(), ds.m());
    }
    Ok(())
}
