//! Append-only on-disk cache of orbit numerators.
//!
//! One term per line: `a<TAB>b<TAB>d<TAB>n<TAB>a_n`, all decimal except
//! `a_n`, which is signed lowercase hex. Malformed lines and orbits that fail
//! the recurrence check are skipped on load; the cache never decides a result.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;

use rug::Integer;

use crate::error::{Error, Result};
use crate::orbit::{Orbit, Parameter};

/// Environment variable naming the cache file.
pub const ENV_VAR: &str = "ZSIG_CACHE";

/// Longest numerator accepted from a cache line, in hex digits.
pub const MAX_HEX_DIGITS: usize = 1 << 22;

/// Largest degree accepted from a cache line.
pub const MAX_DEGREE: u32 = 1 << 16;

/// Largest index accepted from a cache line.
pub const MAX_INDEX: u32 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub a: Integer,
    pub b: Integer,
    pub d: u32,
    pub n: u32,
    pub numerator: Integer,
}

pub fn format_line(param: &Parameter, n: u32, numerator: &Integer) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}",
        param.a(),
        param.b(),
        param.d(),
        n,
        numerator.to_string_radix(16)
    )
}

fn dec(field: &str, what: &str) -> Result<Integer> {
    let body = field.strip_prefix('-').unwrap_or(field);
    if body.is_empty() || body.len() > 4096 || !body.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("cache line: bad {what}")));
    }
    Integer::from_str_radix(field, 10).map_err(|_| Error::Parse(format!("cache line: bad {what}")))
}

fn small(field: &str, what: &str, max: u32) -> Result<u32> {
    if field.is_empty() || field.len() > 10 || !field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("cache line: bad {what}")));
    }
    match field.parse::<u32>() {
        Ok(v) if v <= max => Ok(v),
        _ => Err(Error::Parse(format!("cache line: {what} out of range"))),
    }
}

pub fn parse_line(line: &str) -> Result<Entry> {
    let line = line.strip_suffix('\n').unwrap_or(line);
    let line = line.strip_suffix('\r').unwrap_or(line);
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 5 {
        return Err(Error::Parse(format!(
            "cache line: expected 5 fields, got {}",
            fields.len()
        )));
    }
    let a = dec(fields[0], "a")?;
    let b = dec(fields[1], "b")?;
    if b <= 0 {
        return Err(Error::Parse("cache line: b must be positive".into()));
    }
    let d = small(fields[2], "d", MAX_DEGREE)?;
    if d < 2 {
        return Err(Error::Parse("cache line: d must be at least 2".into()));
    }
    let n = small(fields[3], "n", MAX_INDEX)?;
    if n == 0 {
        return Err(Error::Parse("cache line: n must be at least 1".into()));
    }
    let hex = fields[4];
    let digits = hex.strip_prefix('-').unwrap_or(hex);
    if digits.is_empty()
        || digits.len() > MAX_HEX_DIGITS
        || !digits.bytes().all(|c| c.is_ascii_digit() || (b'a'..=b'f').contains(&c))
    {
        return Err(Error::Parse("cache line: bad numerator".into()));
    }
    let numerator = Integer::from_str_radix(hex, 16)
        .map_err(|_| Error::Parse("cache line: bad numerator".into()))?;
    Ok(Entry { a, b, d, n, numerator })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub lines: usize,
    pub malformed: usize,
    pub orbits: usize,
    /// Orbits dropped for gaps, non-reduced parameters or failed checks.
    pub rejected: usize,
}

/// Cached orbits keyed by parameter.
#[derive(Clone, Debug, Default)]
pub struct Cache {
    orbits: HashMap<Parameter, Orbit>,
}

impl Cache {
    pub fn get(&self, param: &Parameter) -> Option<&Orbit> {
        self.orbits.get(param)
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    /// Build from lines. Every orbit is rechecked with
    /// [`Orbit::from_numerators`] before use.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<(Self, LoadStats)> {
        let mut stats = LoadStats::default();
        let mut raw: HashMap<(Integer, Integer, u32), HashMap<u32, Integer>> = HashMap::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            stats.lines += 1;
            match parse_line(&line) {
                Ok(e) => {
                    raw.entry((e.a, e.b, e.d)).or_default().insert(e.n, e.numerator);
                }
                Err(_) => stats.malformed += 1,
            }
        }
        let mut keys: Vec<_> = raw.keys().cloned().collect();
        keys.sort();
        let mut orbits = HashMap::new();
        for key in keys {
            let mut terms = raw.remove(&key).unwrap_or_default();
            let (a, b, d) = key;
            let param = match Parameter::new(a.clone(), b.clone(), d) {
                Ok(p) if *p.a() == a && *p.b() == b => p,
                _ => {
                    stats.rejected += 1;
                    continue;
                }
            };
            let mut nums = Vec::new();
            let mut k = 1;
            while let Some(x) = terms.remove(&k) {
                nums.push(x);
                k += 1;
            }
            if nums.is_empty() {
                stats.rejected += 1;
                continue;
            }
            match Orbit::from_numerators(param.clone(), nums) {
                Ok(o) => {
                    stats.orbits += 1;
                    orbits.insert(param, o);
                }
                Err(_) => stats.rejected += 1,
            }
        }
        Ok((Cache { orbits }, stats))
    }

    /// Load from `path`; a missing file is an empty cache.
    pub fn load(path: &Path) -> Result<(Self, LoadStats)> {
        match File::open(path) {
            Ok(f) => Self::from_reader(BufReader::new(f)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok((Cache::default(), LoadStats::default())),
            Err(e) => Err(e.into()),
        }
    }
}

/// The cache path from [`ENV_VAR`], if set and non-empty.
pub fn path_from_env() -> Option<PathBuf> {
    std::env::var_os(ENV_VAR).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Serialized appender: workers send orbits, one thread writes.
pub struct Writer {
    tx: Option<mpsc::Sender<(Parameter, Vec<(u32, Integer)>)>>,
    handle: Option<thread::JoinHandle<Result<usize>>>,
}

impl Writer {
    pub fn open(path: &Path) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let (tx, rx) = mpsc::channel::<(Parameter, Vec<(u32, Integer)>)>();
        let handle = thread::spawn(move || -> Result<usize> {
            let mut out = BufWriter::new(file);
            let mut written = 0;
            for (param, terms) in rx {
                for (n, x) in terms {
                    writeln!(out, "{}", format_line(&param, n, &x))?;
                    written += 1;
                }
            }
            out.flush()?;
            Ok(written)
        });
        Ok(Writer {
            tx: Some(tx),
            handle: Some(handle),
        })
    }

    /// Queue terms `a_from..` of `orbit` for appending, stopping at the
    /// first term longer than `max_bits`.
    pub fn append(&self, orbit: &Orbit, from: u32, max_bits: u64) {
        let terms: Vec<(u32, Integer)> = orbit
            .terms()
            .take_while(|t| t.bits() <= max_bits)
            .filter(|t| t.n >= from)
            .map(|t| (t.n, t.numerator.clone()))
            .collect();
        if terms.is_empty() {
            return;
        }
        if let Some(tx) = &self.tx {
            // a closed channel only means the writer failed; finish() reports it
            let _ = tx.send((orbit.parameter().clone(), terms));
        }
    }

    /// Flush and close; returns the number of lines written.
    pub fn finish(mut self) -> Result<usize> {
        self.tx.take();
        match self.handle.take() {
            Some(h) => h
                .join()
                .map_err(|_| Error::Invariant("cache writer panicked".into()))?,
            None => Ok(0),
        }
    }
}

impl Drop for Writer {
    fn drop(&mut self) {
        self.tx.take();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_round_trip() {
        let p = Parameter::new(-7, 4, 2).unwrap();
        let line = format_line(&p, 4, &Integer::from(-114639));
        assert_eq!(line, "-7\t4\t2\t4\t-1bfcf");
        let e = parse_line(&line).unwrap();
        assert_eq!((e.a, e.b, e.d, e.n), (Integer::from(-7), Integer::from(4), 2, 4));
        assert_eq!(e.numerator, -114639);
    }

    #[test]
    fn bad_lines() {
        for bad in [
            "",
            "1\t2\t2\t1",
            "1\t0\t2\t1\t1",
            "1\t2\t1\t1\t1",
            "1\t2\t2\t0\t1",
            "1\t2\t2\t1\t0x1",
            "1\t2\t2\t1\tABC",
            "1\t2\t2\t1\t-",
            "+1\t2\t2\t1\t1",
            "1\t2\t2\t99999999999\t1",
        ] {
            assert!(parse_line(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn load_checks_orbits() {
        let good = "-7\t4\t2\t1\t-7\n-7\t4\t2\t2\t15\n-7\t4\t2\t3\t-7\n";
        let (c, s) = Cache::from_reader(good.as_bytes()).unwrap();
        assert_eq!((s.orbits, s.rejected, s.malformed), (1, 0, 0));
        let o = c.get(&Parameter::new(-7, 4, 2).unwrap()).unwrap();
        assert_eq!(o.len(), 3);

        let tampered = "-7\t4\t2\t1\t-7\n-7\t4\t2\t2\t16\ngarbage\n";
        let (c, s) = Cache::from_reader(tampered.as_bytes()).unwrap();
        assert!(c.is_empty());
        assert_eq!((s.orbits, s.rejected, s.malformed), (0, 1, 1));
    }

    #[test]
    fn writer_appends() {
        let dir = std::env::temp_dir().join(format!("zsig-cache-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("orbits.tsv");
        let _ = std::fs::remove_file(&path);
        let orbit = Orbit::new(Parameter::new(-3, 2, 2).unwrap()).extend(4).unwrap();
        let w = Writer::open(&path).unwrap();
        w.append(&orbit, 1, u64::MAX);
        assert_eq!(w.finish().unwrap(), 4);
        let (c, _) = Cache::load(&path).unwrap();
        let got = c.get(orbit.parameter()).unwrap();
        assert_eq!(got.numerator(4).unwrap(), orbit.numerator(4).unwrap());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
