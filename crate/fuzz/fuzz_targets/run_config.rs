#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use pliag::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = RunConfig::parse(text, Path::new("/nonexistent"), "fuzz") {
            let _ = cfg.solver_config();
        }
    }
});
