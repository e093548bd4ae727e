#![no_main]

use lbmfd::schemefile::{parse_expression, ExprContext};
use libfuzzer_sys::fuzz_target;

// First byte picks how many conserved moments are in scope.
fuzz_target!(|data: &[u8]| {
    let Some((n, rest)) = data.split_first() else {
        return;
    };
    if let Ok(src) = std::str::from_utf8(rest) {
        let _ = parse_expression(src, &ExprContext::permissive((*n % 4) as usize));
    }
});
