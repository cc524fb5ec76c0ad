#![no_main]

use libfuzzer_sys::fuzz_target;
use nrl::env::read_trajectory;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = read_trajectory(text);
    }
});
