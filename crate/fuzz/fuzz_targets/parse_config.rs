#![no_main]

use fredholm_colloc::config::StudyConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = StudyConfig::from_toml_str(text);
    }
});
