//! Scheme files: parsing must never panic, and anything accepted must
//! survive a serialize/parse round trip unchanged.

#![no_main]

use lbmfd::schemefile::{parse_scheme, serialize_scheme};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(scheme) = parse_scheme(text) {
        let again = parse_scheme(&serialize_scheme(&scheme)).expect("serialized scheme parses");
        assert_eq!(scheme, again);
    }
});
