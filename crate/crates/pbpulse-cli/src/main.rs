//! `pbpulse`: generate composite phase sequences, scan inversion profiles,
//! extract metrics, solve phase conditions, and simulate pulse trains.
//!
//! Exit codes: 0 success, 2 input error, 3 non-convergence, 4 internal
//! consistency failure.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pbpulse::{
    broadband_phases, evolution_trace_pair, fidelity_bands, narrowband_phases, nest_bn, nest_nb,
    overlap_csv, overlap_scan, parse_selector, scan_analytic, scan_matrix, single_pulse, solve_pb,
    wimperis_pb2, AreaGrid, Error, PhaseList, PulseShape, SolveConfig, SolveSeed,
};

#[derive(Parser)]
#[command(
    name = "pbpulse",
    about = "Composite-pulse sequence design and verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenKind {
    /// Single π pulse
    Single,
    /// Broadband B sequence
    Bb,
    /// Narrowband N sequence
    Nb,
    /// Passband N(B): broadband nested into narrowband
    NbOfBb,
    /// Passband B(N): narrowband nested into broadband
    BbOfNb,
    /// 9-pulse PB2(π) reference sequence
    WimperisPb2,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScanSourceArg {
    /// Brute-force matrix product
    Matrix,
    /// Closed-form profile (analytic families only)
    Analytic,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ShapeArg {
    Rectangular,
    RaisedCosine,
    Gaussian,
}

impl ShapeArg {
    fn shape(self) -> PulseShape {
        match self {
            ShapeArg::Rectangular => PulseShape::Rectangular,
            ShapeArg::RaisedCosine => PulseShape::RaisedCosineEdges {
                edge_fraction: 0.25,
            },
            ShapeArg::Gaussian => PulseShape::Gaussian { truncation: 3.0 },
        }
    }
}

#[derive(Args)]
struct GridArgs {
    /// Scan start, in units of π
    #[arg(long, default_value_t = 0.0)]
    from: f64,
    /// Scan end, in units of π
    #[arg(long, default_value_t = 2.0)]
    to: f64,
    /// Number of grid points
    #[arg(long, default_value_t = 2001)]
    points: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<AreaGrid, Error> {
        AreaGrid::new(self.from * PI, self.to * PI, self.points)
    }
}

#[derive(Args)]
struct SeqArg {
    /// Sequence selector (single, B3, N5, N3(B5), B3(N7), wimperis-pb2) or a
    /// path to a sequence JSON file
    #[arg(long)]
    seq: String,
}

impl SeqArg {
    fn load(&self) -> Result<PhaseList, Error> {
        let path = Path::new(&self.seq);
        if path.exists() {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::SequenceFile(format!("{}: {e}", self.seq)))?;
            PhaseList::from_json(&text)
        } else {
            parse_selector(&self.seq)
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Emit a sequence as JSON (exact rational phases in units of π)
    Gen {
        /// Construction to generate; alternatively give --seq
        #[arg(long, value_enum)]
        kind: Option<GenKind>,
        /// Broadband pulse count N_b (odd)
        #[arg(long)]
        bb: Option<u32>,
        /// Narrowband pulse count N_n (odd)
        #[arg(long)]
        nb: Option<u32>,
        /// Selector shorthand, e.g. "N3(B5)"
        #[arg(long)]
        seq: Option<String>,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan the inversion profile over a pulse-area grid, CSV output
    Scan {
        #[command(flatten)]
        seq: SeqArg,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = ScanSourceArg::Matrix)]
        source: ScanSourceArg,
        /// Round numbers to this many significant digits (full double
        /// precision when omitted)
        #[arg(long)]
        round: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Half-width, steepness and fidelity bands, JSON output
    Metrics {
        #[command(flatten)]
        seq: SeqArg,
        /// Fidelity error threshold for the bands
        #[arg(long, default_value_t = 1e-4)]
        threshold: f64,
        #[command(flatten)]
        grid: GridArgs,
        /// Round numbers to this many significant digits
        #[arg(long)]
        round: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the passband conditions for the phases of an N-pulse train
    Solve {
        /// Pulse count N (odd)
        #[arg(long)]
        n: u32,
        /// Target flat-top order N_b (odd)
        #[arg(long)]
        nb_order: u32,
        /// Target flat-bottom order N_n (odd)
        #[arg(long)]
        nn_order: u32,
        /// Seed: "nested", "random", or a sequence JSON path
        #[arg(long, default_value = "nested")]
        seed: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        /// Random starts when --seed random
        #[arg(long, default_value_t = 16)]
        multistart: usize,
        /// RNG seed for random starts
        #[arg(long, default_value_t = 0x5eed)]
        rng_seed: u64,
        /// Output path for the solved sequence JSON (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output path for the solve report JSON
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Time-domain simulation: population trace or overlap profile scan
    Simulate {
        #[command(flatten)]
        seq: SeqArg,
        #[command(subcommand)]
        mode: SimulateMode,
    },
}

#[derive(Subcommand)]
enum SimulateMode {
    /// Population versus time for per-pulse areas (1−ε)π and επ
    Trace {
        /// Common amplitude error ε in (0, 1)
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = ShapeArg::Rectangular)]
        shape: ShapeArg,
        #[arg(long, default_value_t = 32)]
        samples_per_pulse: usize,
        /// Round numbers to this many significant digits
        #[arg(long)]
        round: Option<usize>,
        /// CSV path for the (1−ε)π trace
        #[arg(long)]
        out_high: PathBuf,
        /// CSV path for the επ trace
        #[arg(long)]
        out_low: PathBuf,
    },
    /// Final population versus area for a set of overlap fractions
    OverlapScan {
        /// Comma-separated overlap fractions in [0, 0.05]
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 1e-4, 1e-3, 1e-2])]
        overlaps: Vec<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = ShapeArg::Rectangular)]
        shape: ShapeArg,
        #[arg(long, default_value_t = 32)]
        samples_per_pulse: usize,
        /// Round numbers to this many significant digits
        #[arg(long)]
        round: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn fmt_f64(x: f64, round: Option<usize>) -> String {
    match round {
        Some(d) => format!("{:.*e}", d.saturating_sub(1), x),
        None => format!("{x:.16e}"),
    }
}

fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits as i32 - 1 - magnitude);
    (x * factor).round() / factor
}

/// Rebuild a scan CSV at reduced precision; `None` keeps the canonical
/// full-precision form from the library.
fn scan_csv(scan: &pbpulse::ProfileScan, round: Option<usize>) -> String {
    match round {
        None => scan.to_csv(),
        Some(_) => {
            let mut out = String::from("area_over_pi,probability\n");
            for (a, p) in scan.areas.iter().zip(&scan.probabilities) {
                let p = if *p < 1e-300 { 0.0 } else { *p };
                out.push_str(&format!(
                    "{},{}\n",
                    fmt_f64(a / PI, round),
                    fmt_f64(p, round)
                ));
            }
            out
        }
    }
}

fn trace_csv(trace: &pbpulse::EvolutionTrace, round: Option<usize>) -> String {
    match round {
        None => trace.to_csv(1.0),
        Some(_) => {
            let mut out = String::from("time_over_T,population\n");
            for (t, p) in trace.times.iter().zip(&trace.populations) {
                out.push_str(&format!("{},{}\n", fmt_f64(*t, round), fmt_f64(*p, round)));
            }
            out
        }
    }
}

fn rounded_metrics(m: &pbpulse::ProfileMetrics, round: Option<usize>) -> pbpulse::ProfileMetrics {
    match round {
        None => *m,
        Some(d) => {
            let band =
                |b: Option<(f64, f64)>| b.map(|(lo, hi)| (round_sig(lo, d), round_sig(hi, d)));
            pbpulse::ProfileMetrics {
                hwhm_rad: round_sig(m.hwhm_rad, d),
                steepness_rad: round_sig(m.steepness_rad, d),
                top_band: band(m.top_band),
                bottom_band_0: band(m.bottom_band_0),
                bottom_band_2pi: band(m.bottom_band_2pi),
                threshold: m.threshold,
            }
        }
    }
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::SequenceFile(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(
    kind: Option<GenKind>,
    bb: Option<u32>,
    nb: Option<u32>,
    seq: Option<String>,
    out: Option<PathBuf>,
) -> Result<(), Error> {
    let list = match (kind, seq) {
        (None, Some(sel)) => parse_selector(&sel)?,
        (Some(kind), None) => {
            let need = |v: Option<u32>, name: &str| {
                v.ok_or_else(|| Error::InvalidParameter(format!("--{name} is required")))
            };
            match kind {
                GenKind::Single => single_pulse(),
                GenKind::WimperisPb2 => wimperis_pb2(),
                GenKind::Bb => broadband_phases(need(bb, "bb")?)?,
                GenKind::Nb => narrowband_phases(need(nb, "nb")?)?.canonicalized(),
                GenKind::NbOfBb => nest_nb(need(nb, "nb")?, need(bb, "bb")?)?,
                GenKind::BbOfNb => nest_bn(need(bb, "bb")?, need(nb, "nb")?)?,
            }
        }
        _ => {
            return Err(Error::InvalidParameter(
                "give exactly one of --kind or --seq".into(),
            ))
        }
    };
    write_out(&out, &list.to_json())
}

fn run() -> Result<(), Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen {
            kind,
            bb,
            nb,
            seq,
            out,
        } => cmd_gen(kind, bb, nb, seq, out),
        Command::Scan {
            seq,
            grid,
            source,
            round,
            out,
        } => {
            let list = seq.load()?;
            let grid = grid.grid()?;
            let scan = match source {
                ScanSourceArg::Matrix => scan_matrix(&list, &grid)?,
                ScanSourceArg::Analytic => scan_analytic(&list, &grid)?,
            };
            write_out(&out, &scan_csv(&scan, round))
        }
        Command::Metrics {
            seq,
            threshold,
            grid,
            round,
            out,
        } => {
            let list = seq.load()?;
            let metrics = fidelity_bands(&list, threshold, &grid.grid()?)?;
            write_out(&out, &rounded_metrics(&metrics, round).to_json())
        }
        Command::Solve {
            n,
            nb_order,
            nn_order,
            seed,
            tol,
            max_iter,
            multistart,
            rng_seed,
            out,
            report,
        } => {
            let cfg = SolveConfig {
                tol,
                max_iter,
                multistart,
                rng_seed,
                ..SolveConfig::default()
            };
            let seed = match seed.as_str() {
                "nested" => SolveSeed::Nested,
                "random" => SolveSeed::Random,
                path => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Error::SequenceFile(format!("{path}: {e}")))?;
                    SolveSeed::Phases(PhaseList::from_json(&text)?.radians())
                }
            };
            let outcome = solve_pb(n, nb_order, nn_order, seed, &cfg)?;
            write_out(&out, &outcome.sequence.to_json())?;
            if let Some(report_path) = report {
                write_out(&Some(report_path), &outcome.report.to_json())?;
            }
            Ok(())
        }
        Command::Simulate { seq, mode } => {
            let list = seq.load()?;
            match mode {
                SimulateMode::Trace {
                    epsilon,
                    shape,
                    samples_per_pulse,
                    round,
                    out_high,
                    out_low,
                } => {
                    let (high, low) =
                        evolution_trace_pair(&list, epsilon, shape.shape(), samples_per_pulse)?;
                    write_out(&Some(out_high), &trace_csv(&high, round))?;
                    write_out(&Some(out_low), &trace_csv(&low, round))
                }
                SimulateMode::OverlapScan {
                    overlaps,
                    grid,
                    shape,
                    samples_per_pulse,
                    round,
                    out,
                } => {
                    let scans = overlap_scan(
                        &list,
                        &overlaps,
                        &grid.grid()?,
                        shape.shape(),
                        samples_per_pulse,
                    )?;
                    let text = match round {
                        None => overlap_csv(&overlaps, &scans),
                        Some(_) => {
                            let mut out_text =
                                String::from("area_over_pi,probability,overlap_fraction\n");
                            for (f, scan) in overlaps.iter().zip(&scans) {
                                for (a, p) in scan.areas.iter().zip(&scan.probabilities) {
                                    out_text.push_str(&format!(
                                        "{},{},{}\n",
                                        fmt_f64(a / PI, round),
                                        fmt_f64(*p, round),
                                        fmt_f64(*f, round)
                                    ));
                                }
                            }
                            out_text
                        }
                    };
                    write_out(&out, &text)
                }
            }
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::SolverNotConverged { .. } | Error::IntegratorNotConverged { .. } => 3,
        Error::ProbabilityOutOfRange(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
