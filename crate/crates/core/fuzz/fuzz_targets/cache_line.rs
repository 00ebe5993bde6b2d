#![no_main]

use libfuzzer_sys::fuzz_target;
use zsig_core::cache::{format_line, parse_line};
use zsig_core::Parameter;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(e) = parse_line(s) else {
        return;
    };
    assert!(e.d >= 2 && e.n >= 1 && e.b > 0);
    // reduced entries round-trip exactly
    if let Ok(p) = Parameter::new(e.a.clone(), e.b.clone(), e.d) {
        if *p.a() == e.a && *p.b() == e.b {
            let line = format_line(&p, e.n, &e.numerator);
            assert_eq!(parse_line(&line).expect("round trip"), e);
        }
    }
});
