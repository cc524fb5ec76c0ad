#![no_main]

use libfuzzer_sys::fuzz_target;
use nrl::policy::{read_checkpoint, write_checkpoint};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(net) = read_checkpoint(text) {
        assert!(net.is_finite());
        let again = read_checkpoint(&write_checkpoint(&net)).unwrap();
        assert_eq!(net, again);
    }
});
