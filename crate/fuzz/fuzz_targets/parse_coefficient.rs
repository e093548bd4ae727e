#![no_main]

use lbmfd::schemefile::{parse_coefficient, ExprContext};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(src) = std::str::from_utf8(data) {
        let _ = parse_coefficient(src, &ExprContext::permissive(0));
    }
});
