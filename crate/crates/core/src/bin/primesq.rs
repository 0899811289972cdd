use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use primesq::arith::{PrimeSquareSet, PrimorialModulus};
use primesq::chromatic::{derive_d_from_energy, estimate_sk, sarkozy_check, Strategy};
use primesq::circle::{
    build_major_arcs, classify_point, energy_integral_identity, grid_sweep, write_grid_csv,
};
use primesq::energy::{additive_energy, Backend, Energy};
use primesq::extremal::{bilinear_ascend, bilinear_value, sample_feasible, CappedSimplexSpec};
use primesq::gauss::{vanishing_sweep, write_sweep_csv, VanishingClass};
use primesq::{charsums, Error};

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(
    name = "primesq",
    version,
    about = "Verification suites for sums of prime squares"
)]
struct Cli {
    /// Report path; defaults to $PRIMESQ_OUT_DIR/<command>.<ext> or stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[arg(long, global = true, env = "PRIMESQ_OUT_DIR", hide_env_values = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Oracle,
    Convolution,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    RoundRobin,
    UniformRandom,
    Congruence,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::RoundRobin => Strategy::RoundRobin,
            StrategyArg::UniformRandom => Strategy::UniformRandom,
            StrategyArg::Congruence => Strategy::Congruence,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Mod-p character expectations against (p/(p−1))^{2t} exp(4t⁵2ᵗ/p),
    /// for every c mod p.
    VerifyCharsums {
        #[arg(long = "p", num_args = 1.., default_values_t = [3u64, 5, 7, 11])]
        primes: Vec<u64>,
        #[arg(long = "t", num_args = 1.., default_values_t = [2u32, 4])]
        ts: Vec<u32>,
    },
    /// V_q(a,r) vanishes for w-smooth q not dividing 2W and equals
    /// q·e(ar²/q) for q | 2W; exhaustive over reduced a and r.
    VerifyGauss {
        #[arg(long, default_value_t = 3)]
        w: u64,
        #[arg(long, default_value_t = 200)]
        qmax: u64,
    },
    /// Greedy ascent with a full vertex sweep for random bilinear forms over the capped
    /// simplex: vertex invariants and f(x,x) <= f(x*,y*) on sampled x.
    VerifyExtremal {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long)]
        seed: u64,
    },
    /// k-fold additive energy of the prime squares in (N, 4N].
    Energy {
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long, value_enum, default_value_t = BackendArg::Convolution)]
        backend: BackendArg,
        /// Weight each element p² by log p.
        #[arg(long)]
        weighted: bool,
    },
    /// Major arcs [a/q − 1/M, a/q + 1/M) for 0 <= a < q <= Q; optionally
    /// classifies a point.
    Arcs {
        #[arg(long = "Q")]
        q: u64,
        #[arg(long = "M")]
        m: f64,
        #[arg(long)]
        t: Option<f64>,
    },
    /// (4/5)√N E_6(S) against ∫ Ŝ(t)^6 Ŝ(−t)^5 ψ(−t) dt evaluated by
    /// orthogonality, for S the prime squares in (N, 4N].
    Identity32 {
        #[arg(long = "N")]
        n: u64,
    },
    /// Finite addition theorem: small six-fold energy and a large prime in S
    /// force every n >= 30N(2⌈6D⌉+1) to be a sum of at most n/N elements.
    Sarkozy {
        #[arg(long = "N")]
        n: u64,
        /// Defaults to the least D allowed by the energy of S.
        #[arg(long = "D")]
        d: Option<f64>,
        #[arg(long, default_value_t = 0)]
        window: u64,
    },
    /// Shortest monochromatic sums of prime squares on [X/2, X/2 + width]
    /// for a K-colouring.
    EstimateSk {
        #[arg(long = "K")]
        k: u32,
        #[arg(long = "X")]
        x: u64,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        width: u64,
    },
    /// |Ŝ(t)|, |ψ(t)| and arc class on the grid t = j/points.
    Sweep {
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "Q")]
        q: u64,
        #[arg(long = "M")]
        m: f64,
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::VerifyCharsums { .. } => "verify-charsums",
            Self::VerifyGauss { .. } => "verify-gauss",
            Self::VerifyExtremal { .. } => "verify-extremal",
            Self::Energy { .. } => "energy",
            Self::Arcs { .. } => "arcs",
            Self::Identity32 { .. } => "identity32",
            Self::Sarkozy { .. } => "sarkozy",
            Self::EstimateSk { .. } => "estimate-sk",
            Self::Sweep { .. } => "sweep",
        }
    }
}

enum Report {
    Json(Value),
    Csv(Vec<u8>),
}

struct Outcome {
    report: Report,
    pass: bool,
}

fn json_outcome(command: &str, pass: bool, body: impl Serialize) -> Outcome {
    let mut value = json!({ "schema": SCHEMA, "command": command });
    if let (Value::Object(map), Ok(Value::Object(extra))) = (&mut value, serde_json::to_value(body))
    {
        map.extend(extra);
    }
    value["pass"] = json!(pass);
    Outcome {
        report: Report::Json(value),
        pass,
    }
}

fn run(cmd: &Command, format: Format) -> Result<Outcome, Error> {
    let name = cmd.name();
    match *cmd {
        Command::VerifyCharsums { ref primes, ref ts } => {
            let mut checks = Vec::new();
            for &p in primes {
                for &t in ts {
                    for c in 0..p as i128 {
                        checks.push(charsums::check_modp_bound(p, c, t)?);
                    }
                }
            }
            let pass = checks.iter().all(|c| c.pass);
            Ok(json_outcome(name, pass, json!({ "checks": checks })))
        }
        Command::VerifyGauss { w, qmax } => {
            let m = PrimorialModulus::new(w)?;
            let rows = vanishing_sweep(&m, qmax)?;
            let pass = rows.iter().all(|r| r.pass);
            if format == Format::Csv {
                let mut buf = Vec::new();
                write_sweep_csv(&rows, &mut buf)?;
                return Ok(Outcome {
                    report: Report::Csv(buf),
                    pass,
                });
            }
            let count = |class| rows.iter().filter(|r| r.class == class).count();
            let failures: Vec<_> = rows.iter().filter(|r| !r.pass).take(100).collect();
            Ok(json_outcome(
                name,
                pass,
                json!({
                    "w": w,
                    "qmax": qmax,
                    "closed_form_sign": "q·e(+a r²/q)",
                    "cases": rows.len(),
                    "must_vanish": count(VanishingClass::MustVanish),
                    "closed_form": count(VanishingClass::ClosedForm),
                    "general": count(VanishingClass::General),
                    "failures": failures,
                }),
            ))
        }
        Command::VerifyExtremal {
            instances,
            samples,
            n_max,
            seed,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut invariant_failures, mut ascent_failures) = (0usize, 0usize);
            for _ in 0..instances {
                let ratio = [1.5, 2.7][rng.gen_range(0..2)];
                let n = rng.gen_range(3..=n_max.max(3));
                let spec = CappedSimplexSpec::new(n, ratio, 1.0)?;
                let alpha: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let f = |i: usize, j: usize| alpha[i * n + j];
                let x0 = sample_feasible(&spec, &mut rng);
                let ascent = bilinear_ascend(f, &spec, &x0)?;
                if !ascent.x_star.satisfies_invariants(&spec)
                    || !ascent.y_star.satisfies_invariants(&spec)
                {
                    invariant_failures += 1;
                }
                let tol = 1e-12 * ascent.value.abs().max(1.0);
                let dominated = ascent.start_value <= ascent.value + tol
                    && (0..samples).all(|_| {
                        let x = sample_feasible(&spec, &mut rng);
                        bilinear_value(f, &x, &x) <= ascent.value + tol
                    });
                if !dominated {
                    ascent_failures += 1;
                }
            }
            let pass = invariant_failures == 0 && ascent_failures == 0;
            Ok(json_outcome(
                name,
                pass,
                json!({
                    "seed": seed,
                    "instances": instances,
                    "samples": samples,
                    "invariant_failures": invariant_failures,
                    "ascent_failures": ascent_failures,
                }),
            ))
        }
        Command::Energy {
            n,
            k,
            backend,
            weighted,
        } => {
            let s = PrimeSquareSet::all_in(n)?;
            let backends: &[Backend] = match backend {
                BackendArg::Oracle => &[Backend::Oracle],
                BackendArg::Convolution => &[Backend::Convolution],
                BackendArg::Both => &[Backend::Oracle, Backend::Convolution],
            };
            let values: Vec<(Backend, Energy)> = backends
                .iter()
                .map(|&b| additive_energy(&s, k, weighted, b).map(|e| (b, e)))
                .collect::<Result<_, _>>()?;
            let pass = match values.as_slice() {
                [(_, Energy::Exact(a)), (_, Energy::Exact(b))] => a == b,
                [(_, Energy::Weighted(a)), (_, Energy::Weighted(b))] => {
                    (a - b).abs() <= 1e-10 * a.abs().max(b.abs())
                }
                _ => true,
            };
            let energies: Vec<Value> = values
                .iter()
                .map(|(b, e)| json!({ "backend": b, "energy": e }))
                .collect();
            Ok(json_outcome(
                name,
                pass,
                json!({ "N": n, "k": k, "weighted": weighted, "set_size": s.len(), "energies": energies }),
            ))
        }
        Command::Arcs { q, m, t } => {
            let arcs = build_major_arcs(q, m)?;
            let list: Vec<Value> = arcs
                .arcs()
                .iter()
                .map(|a| json!({ "a": a.a(), "q": a.q() }))
                .collect();
            let disjoint = arcs.arcs().windows(2).all(|w| w[0].hi() <= w[1].lo());
            let class = t.map(|t| classify_point(t, &arcs)).transpose()?;
            Ok(json_outcome(
                name,
                disjoint,
                json!({
                    "Q": q,
                    "M": m,
                    "count": arcs.len(),
                    "measure": arcs.total_measure(),
                    "disjoint": disjoint,
                    "t": t,
                    "classification": class,
                    "arcs": list,
                }),
            ))
        }
        Command::Identity32 { n } => {
            let s = PrimeSquareSet::all_in(n)?;
            let r = energy_integral_identity(&s)?;
            Ok(json_outcome(name, r.pass, r))
        }
        Command::Sarkozy { n, d, window } => {
            let s = PrimeSquareSet::all_in(n)?;
            let d = match d {
                Some(d) => d,
                None => derive_d_from_energy(&s)?,
            };
            let r = sarkozy_check(&s, d, window)?;
            Ok(json_outcome(name, r.pass, r))
        }
        Command::EstimateSk {
            k,
            x,
            strategy,
            seed,
            width,
        } => {
            let r = estimate_sk(k, x, strategy.into(), seed, width)?;
            Ok(json_outcome(name, true, r))
        }
        Command::Sweep { n, q, m, points } => {
            let s = PrimeSquareSet::all_in(n)?;
            let arcs = build_major_arcs(q, m)?;
            let rows = grid_sweep(&s, &arcs, points)?;
            if format == Format::Csv {
                let mut buf = Vec::new();
                write_grid_csv(&rows, &mut buf)?;
                return Ok(Outcome {
                    report: Report::Csv(buf),
                    pass: true,
                });
            }
            Ok(json_outcome(
                name,
                true,
                json!({ "N": n, "Q": q, "M": m, "rows": rows }),
            ))
        }
    }
}

fn write_report(cli: &Cli, report: &Report) -> io::Result<()> {
    let ext = match report {
        Report::Json(_) => "json",
        Report::Csv(_) => "csv",
    };
    let path = cli.out.clone().or_else(|| {
        cli.out_dir
            .as_ref()
            .map(|d| d.join(format!("{}.{ext}", cli.command.name())))
    });
    let mut sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    match report {
        Report::Json(v) => {
            serde_json::to_writer_pretty(&mut sink, v)?;
            sink.write_all(b"\n")?;
        }
        Report::Csv(bytes) => sink.write_all(bytes)?,
    }
    sink.flush()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command, cli.format) {
        Ok(outcome) => {
            if let Err(e) = write_report(&cli, &outcome.report) {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(3);
            }
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}: a check failed", cli.command.name());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
