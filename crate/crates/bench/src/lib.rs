//! Fixtures shared by the criterion benchmarks.

use std::path::PathBuf;

use renokm_core::{load_csv, Dataset, DatasetPreset};

/// Path of a file in the repository's `data/` directory.
pub fn data_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(file)
}

/// Loads one of the bundled sets by preset name (`iris`, `wine`, `ecoli`, `yeast`).
pub fn bundled(name: &str) -> Dataset {
    let preset = DatasetPreset::by_name(name).unwrap_or_else(|| panic!("no preset {name}"));
    load_csv(data_path(&format!("{name}.data")), &preset).expect("bundled data loads")
}
