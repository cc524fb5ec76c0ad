#![no_main]

use libfuzzer_sys::fuzz_target;
use nrl::harness::plot::read_chart_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = read_chart_csv(text);
    }
});
