#![no_main]

use libfuzzer_sys::fuzz_target;
use nrl::harness::{read_metrics_csv, write_metrics_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rows) = read_metrics_csv(text) {
        assert_eq!(read_metrics_csv(&write_metrics_csv(&rows)).unwrap(), rows);
    }
});
