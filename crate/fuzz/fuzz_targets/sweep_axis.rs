#![no_main]

use libfuzzer_sys::fuzz_target;
use telesense_cli::sweep::SweepAxis;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(axis) = text.parse::<SweepAxis>() {
            let values = axis.values();
            assert_eq!(values.len(), axis.points);
            assert!(values.iter().all(|v| v.is_finite()));
            // Display must round-trip.
            let again: SweepAxis = axis.to_string().parse().expect("display re-parses");
            assert_eq!(again, axis);
        }
    }
});
