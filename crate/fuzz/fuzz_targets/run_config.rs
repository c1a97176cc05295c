#![no_main]

use libfuzzer_sys::fuzz_target;
use qdtrap_cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::parse(text) {
        let _ = cfg.validate_simulate();
        let _ = cfg.validate_sweep();
    }
});
