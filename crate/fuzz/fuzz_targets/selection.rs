#![no_main]

use libfuzzer_sys::fuzz_target;
use pliag::config::parse_selection;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(policy) = parse_selection(text) {
            for n in 1..6 {
                if policy.validate(n).is_ok() {
                    let _ = policy.partition(3, n);
                }
            }
        }
    }
});
