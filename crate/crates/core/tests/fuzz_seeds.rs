//! Replays the checked-in fuzz corpus through the same checks the fuzz
//! targets make, so the seeds stay meaningful without a nightly toolchain.

use std::fs;
use std::path::PathBuf;

use zsig_core::cache::{format_line, parse_line, Cache};
use zsig_core::parse::{parse_complex, parse_fraction, parse_rational};
use zsig_core::Parameter;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn rational_seeds() {
    let mut accepted = 0;
    for (name, data) in seeds("parse_rational") {
        let Ok(s) = std::str::from_utf8(&data) else { continue };
        if let Ok(q) = parse_rational(s) {
            accepted += 1;
            assert_eq!(parse_rational(&q.to_string()).unwrap(), q, "{name}");
            let (n, d) = parse_fraction(s).unwrap();
            assert!(d > 0 && n.gcd(&d) == 1, "{name}");
        }
    }
    assert!(accepted >= 5);
}

#[test]
fn complex_seeds() {
    for (name, data) in seeds("parse_complex") {
        let s = std::str::from_utf8(&data).unwrap();
        let z = parse_complex(s).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(z.re.is_finite() && z.im.is_finite());
    }
}

#[test]
fn cache_line_seeds() {
    let mut accepted = 0;
    for (name, data) in seeds("cache_line") {
        let s = std::str::from_utf8(&data).unwrap();
        let Ok(e) = parse_line(s) else { continue };
        accepted += 1;
        let p = Parameter::new(e.a.clone(), e.b.clone(), e.d).unwrap();
        let line = format_line(&p, e.n, &e.numerator);
        assert_eq!(parse_line(&line).unwrap(), e, "{name}");
    }
    assert_eq!(accepted, 2);
}

#[test]
fn cache_file_seeds() {
    let mut kept = Vec::new();
    for (name, data) in seeds("cache_file") {
        let (cache, stats) = Cache::from_reader(&data[..]).unwrap();
        assert_eq!(cache.len(), stats.orbits, "{name}");
        kept.push((name, stats.orbits, stats.rejected));
    }
    assert_eq!(
        kept,
        vec![
            ("mixed".to_string(), 1, 0),
            ("orbit".to_string(), 1, 0),
            ("tampered".to_string(), 0, 1),
        ]
    );
}
