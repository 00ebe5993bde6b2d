use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use zsig_core::cache::{self, Cache, Writer};
use zsig_core::divisibility::{self, ZsigOptions};
use zsig_core::sweep::{self, SweepMode, SweepSpec};
use zsig_core::{bounds, classifier, mahler, mandelbrot, parse, Error, Orbit, Parameter};

#[derive(Parser)]
#[command(name = "zsig", version, about = "Zsigmondy sets of critical orbits of z^d + c")]
struct Cli {
    /// Compact single-line JSON instead of pretty-printed output.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Numerator of c.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "c")]
    a: Option<String>,
    /// Denominator of c.
    #[arg(long, allow_hyphen_values = true, requires = "a")]
    b: Option<String>,
    /// c as a fraction or decimal, e.g. -7/4.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    /// Degree of z^d + c.
    #[arg(long, default_value_t = 2)]
    d: u32,
}

impl ParamArgs {
    fn parameter(&self) -> Result<Parameter, Error> {
        let (a, b) = match (&self.c, &self.a) {
            (Some(c), _) => parse::parse_fraction(c)?,
            (None, Some(a)) => {
                let a = parse::parse_rational(a)?;
                let b = match &self.b {
                    Some(b) => parse::parse_rational(b)?,
                    None => 1.into(),
                };
                if b == 0 {
                    return Err(Error::ZeroDenominator);
                }
                (a / b).into_numer_denom()
            }
            (None, None) => {
                return Err(Error::Precondition("give --c, or --a with optional --b".into()))
            }
        };
        Parameter::new(a, b, self.d)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Classify,
    Verify,
    MandelS,
}

#[derive(Subcommand)]
enum Command {
    /// Numerators a_1..a_n of the critical orbit.
    Orbit {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        n: u32,
        /// Per-term size guard in bits.
        #[arg(long, default_value_t = 1 << 26)]
        max_bits: u64,
    },
    /// Is n in the Zsigmondy set?
    Zsig {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        n: u32,
        /// Search bound for a primitive prime witness (0 disables).
        #[arg(long, default_value_t = 1_000_000)]
        witness_bound: u64,
    },
    /// The Zsigmondy set within [2, max-n].
    Set {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        max_n: u32,
    },
    /// Case, M(c) and predicted Zsigmondy set.
    Classify {
        #[command(flatten)]
        p: ParamArgs,
        /// Also compute the set up to this index and compare.
        #[arg(long)]
        verify: Option<u32>,
    },
    /// Classify and verify every reduced a/b in a box; JSON lines.
    Sweep {
        #[arg(long, default_value_t = 2)]
        d_min: u32,
        #[arg(long, default_value_t = 2)]
        d_max: u32,
        #[arg(long, default_value_t = 2)]
        b_min: u64,
        #[arg(long, default_value_t = 10)]
        b_max: u64,
        /// Bound on max(|a|, b).
        #[arg(long, default_value_t = 20)]
        height: u64,
        #[arg(long, allow_hyphen_values = true)]
        a_min: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        a_max: Option<i64>,
        #[arg(long, default_value_t = 12)]
        n_max: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Verify)]
        mode: ModeArg,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
        /// Write records here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Constants of the Diophantine approximation step.
    Mahler {
        #[arg(long, num_args = 1.., default_values_t = [2, 4, 6])]
        d: Vec<u32>,
    },
    /// Attracting-region membership and lower bounds for z^2 + c.
    Mandel {
        /// Complex parameter, e.g. -7/4 or 0.25+0.5i.
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[arg(long, default_value_t = 12)]
        max_period: u32,
        /// Fixed rho for every period instead of rho_n.
        #[arg(long)]
        rho: Option<f64>,
        /// Also list the cycles of each period (slow beyond period 10).
        #[arg(long)]
        cycles: bool,
    },
    /// Effective M(c) beyond which no index is in the Zsigmondy set.
    Msolve {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 64)]
        n_probe: u32,
    },
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Mismatch { .. } | Error::Invariant(_) => 2,
        Error::Inconclusive(_) | Error::NoConvergence(_) | Error::TailNotCertified(_) => 3,
        _ => 1,
    }
}

struct Out {
    compact: bool,
}

impl Out {
    fn emit(&self, v: &Value) -> io::Result<()> {
        let mut stdout = io::stdout().lock();
        if self.compact {
            serde_json::to_writer(&mut stdout, v)?;
        } else {
            serde_json::to_writer_pretty(&mut stdout, v)?;
        }
        writeln!(stdout)
    }
}

fn orbit_json(orbit: &Orbit) -> Value {
    let p = orbit.parameter();
    json!({
        "a": zsig_core::json::int(p.a()),
        "b": zsig_core::json::int(p.b()),
        "d": p.d(),
        "terms": orbit.terms().map(|t| json!({
            "n": t.n,
            "numerator": zsig_core::json::int(&t.numerator),
            "denominator_exponent": zsig_core::json::int(&t.denom_exp),
            "bits": t.bits(),
        })).collect::<Vec<_>>(),
    })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let out = Out { compact: cli.json };
    match cli.command {
        Command::Orbit { p, n, max_bits } => {
            if n == 0 {
                return Err(Failure::Usage("--n must be at least 1".into()));
            }
            let orbit = Orbit::new(p.parameter()?).with_max_bits(max_bits).extend(n)?;
            out.emit(&orbit_json(&orbit))?;
        }
        Command::Zsig { p, n, witness_bound } => {
            let orbit = Orbit::new(p.parameter()?);
            let opts = ZsigOptions {
                witness_bound,
                ..ZsigOptions::default()
            };
            let v = divisibility::zsigmondy_test_with(&orbit, n, &opts)?;
            out.emit(&v.to_json())?;
        }
        Command::Set { p, max_n } => {
            let param = p.parameter()?;
            let set = divisibility::zsigmondy_set(&Orbit::new(param.clone()), max_n)?;
            out.emit(&json!({
                "a": zsig_core::json::int(param.a()),
                "b": zsig_core::json::int(param.b()),
                "d": param.d(),
                "max_n": max_n,
                "set": set,
            }))?;
        }
        Command::Classify { p, verify } => {
            let param = p.parameter()?;
            match verify {
                None => out.emit(&classifier::classify(&param).to_json())?,
                Some(n_max) => {
                    let r = classifier::verify_against_computation(&param, n_max)?;
                    out.emit(&r.to_json())?;
                }
            }
        }
        Command::Sweep {
            d_min,
            d_max,
            b_min,
            b_max,
            height,
            a_min,
            a_max,
            n_max,
            mode,
            jobs,
            out: path,
        } => {
            let a_range = match (a_min, a_max) {
                (None, None) => None,
                (x, y) => Some((x.unwrap_or(i64::MIN / 4), y.unwrap_or(i64::MAX / 4))),
            };
            let spec = SweepSpec {
                d_range: (d_min, d_max),
                b_range: (b_min, b_max),
                height_max: height,
                a_range,
                n_max,
                mode: match mode {
                    ModeArg::Classify => SweepMode::ClassifyOnly,
                    ModeArg::Verify => SweepMode::FullVerify,
                    ModeArg::MandelS => SweepMode::MandelS,
                },
                jobs: jobs.unwrap_or_else(|| {
                    std::thread::available_parallelism().map_or(1, |n| n.get())
                }),
            };
            spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let cache_path = cache::path_from_env();
            let loaded = match &cache_path {
                Some(path) => Some(Cache::load(path)?.0),
                None => None,
            };
            let writer = match &cache_path {
                Some(path) => Some(Writer::open(path)?),
                None => None,
            };
            let mut sink: Box<dyn Write> = match &path {
                Some(p) => Box::new(BufWriter::new(File::create(p)?)),
                None => Box::new(BufWriter::new(io::stdout().lock())),
            };
            let summary = sweep::run_sweep(&spec, loaded.as_ref(), writer.as_ref(), |rec| {
                serde_json::to_writer(&mut sink, &rec.to_json()).map_err(io::Error::from)?;
                writeln!(sink)?;
                Ok(())
            })?;
            serde_json::to_writer(&mut sink, &summary.to_json()).map_err(io::Error::from)?;
            writeln!(sink)?;
            sink.flush()?;
            drop(sink);
            if let Some(w) = writer {
                w.finish()?;
            }
            if summary.mismatches > 0 {
                report_error(&Error::Mismatch {
                    message: "sweep found a mismatch; see the last record".into(),
                    evidence: Box::new(summary.to_json()),
                });
                return Ok(2);
            }
        }
        Command::Mahler { d } => {
            out.emit(&mahler::table_json(&d)?)?;
        }
        Command::Mandel {
            c,
            max_period,
            rho,
            cycles,
        } => {
            let z = parse::parse_complex(&c)?;
            if max_period == 0 || max_period > mandelbrot::MAX_PERIOD {
                return Err(Failure::Usage(format!(
                    "--max-period must be in 1..={}",
                    mandelbrot::MAX_PERIOD
                )));
            }
            let mut periods = Vec::new();
            let mut hits = Vec::new();
            for n in 1..=max_period {
                let r = rho.unwrap_or_else(|| mandelbrot::rho_n(n));
                let v = mandelbrot::in_d(z, n, r)?;
                if v.in_d {
                    hits.push(n);
                }
                let lb_rho = r.min(0.2);
                let lower = match mandelbrot::lower_bound_check(z, n, lb_rho) {
                    Ok(l) => l.to_json(),
                    Err(Error::Precondition(m)) => json!({ "skipped": m }),
                    Err(e) => return Err(e.into()),
                };
                let mut entry = json!({
                    "n": n,
                    "rho": r,
                    "region": v.to_json(),
                    "lower_bound": lower,
                });
                if cycles {
                    let cs = mandelbrot::periodic_cycles(z, n, mandelbrot::default_tol(n))?;
                    entry["cycles"] = json!(cs.iter().map(|c| c.to_json()).collect::<Vec<_>>());
                }
                periods.push(entry);
            }
            out.emit(&json!({
                "c": [z.re, z.im],
                "max_period": max_period,
                "in_S_up_to_period": hits.is_empty(),
                "hits": hits,
                "periods": periods,
                "distortion": mandelbrot::blaschke_distortion_check(0.2)?.to_json(),
            }))?;
        }
        Command::Msolve { p, eps, tau, n_probe } => {
            let param = p.parameter()?;
            let s = bounds::effective_m_solver(&param, eps, tau, n_probe)?;
            let mut v = serde_json::to_value(&s).map_err(io::Error::from)?;
            v["a"] = zsig_core::json::int(param.a());
            v["b"] = zsig_core::json::int(param.b());
            v["d"] = json!(param.d());
            v["M"] = json!(s.m);
            out.emit(&v)?;
        }
    }
    Ok(0)
}

fn report_error(e: &Error) {
    let mut v = json!({ "error": e.kind(), "message": e.to_string() });
    if let Error::Mismatch { evidence, .. } = e {
        v["evidence"] = (**evidence).clone();
    }
    eprintln!("{v}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.render().to_string();
            eprintln!("{}", json!({ "error": "usage", "message": msg.trim() }));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("{}", json!({ "error": "usage", "message": msg }));
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            report_error(&e);
            ExitCode::from(exit_code(&e))
        }
    }
}
