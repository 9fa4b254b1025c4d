#![no_main]

use archicop::experiments::{plan_cells, ExperimentConfig};
use libfuzzer_sys::fuzz_target;

// Parsing never panics, and an accepted configuration always expands into a cell grid
// or a configuration error.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::from_toml_str(text) {
        let _ = plan_cells(&cfg);
    }
});
