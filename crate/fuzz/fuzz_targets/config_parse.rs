#![no_main]

use libfuzzer_sys::fuzz_target;
use telesense_cli::config::parse_config;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(file) = parse_config(text) {
            for (k, v) in &file.values {
                assert!(!k.is_empty());
                assert_eq!(k.trim(), k);
                assert_eq!(v.trim(), v);
            }
        }
    }
});
