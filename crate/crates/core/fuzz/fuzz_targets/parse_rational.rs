#![no_main]

use libfuzzer_sys::fuzz_target;
use zsig_core::parse::{parse_fraction, parse_rational};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(q) = parse_rational(s) {
        // printing and reparsing must give the same value
        let again = parse_rational(&q.to_string()).expect("reparse");
        assert_eq!(q, again);
        let (n, d) = parse_fraction(s).expect("fraction");
        assert!(d > 0);
        assert_eq!(n.gcd(&d), 1);
    }
});
