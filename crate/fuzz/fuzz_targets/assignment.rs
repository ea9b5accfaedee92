#![no_main]

use libfuzzer_sys::fuzz_target;
use telesense_cli::config::parse_assignment;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Some((k, v)) = parse_assignment(text) {
            assert!(!k.contains('='));
            assert!(k.len() + v.len() < text.len());
        }
    }
});
