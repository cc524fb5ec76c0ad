#![no_main]

use libfuzzer_sys::fuzz_target;
use nrl::harness::GridConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(grid) = GridConfig::from_toml_str(text) {
            for cell in grid.cells() {
                cell.validate().unwrap();
            }
        }
    }
});
