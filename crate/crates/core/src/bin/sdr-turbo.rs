use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sdr_turbo::exit::{exit_curve, write_exit_csv, ExitSetup, DEFAULT_BINS};
use sdr_turbo::ldpc::{build_pcm, derive_generator, read_alist, write_alist};
use sdr_turbo::sim::{csv_header, parse_snr_range, run_ber_sweep, write_ber_csv, Link, SimConfig};
use sdr_turbo::turbo::Scheme;
use sdr_turbo::Result;

#[derive(Parser)]
#[command(name = "sdr-turbo", version, about = "SDR turbo receiver simulations for LDPC-coded MIMO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER/FER sweep over an SNR grid.
    Ber(Common),
    /// Detector EXIT curve.
    Exit {
        #[command(flatten)]
        common: Common,
        /// Comma-separated a priori information grid.
        #[arg(long, default_value = "0,0.25,0.5,0.75")]
        ia: String,
        #[arg(long, default_value_t = 40)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
    },
    /// Per-iteration trace of one frame as JSON lines.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Frame index within the seed's stream.
        #[arg(long, default_value_t = 0)]
        frame: u64,
    },
    /// Parity-check matrix tools.
    #[command(subcommand)]
    Pcm(PcmCommand),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<Scheme>,
    /// SNR grid in dB as `a:b:step` or a single value.
    #[arg(long)]
    snr: Option<String>,
    /// Frame cap per SNR point.
    #[arg(long)]
    frames: Option<u64>,
    #[arg(long)]
    min_errors: Option<u64>,
    /// Simulate frames on all cores.
    #[arg(long)]
    parallel: bool,
}

#[derive(Subcommand)]
enum PcmCommand {
    /// Construct a column-regular code and write it as alist.
    Gen {
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 128)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        col_weight: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the size and degree profile of an alist file.
    Inspect { path: PathBuf },
}

impl Common {
    fn config(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::load(path)?,
            None => SimConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(scheme) = self.scheme {
            cfg.scheme = scheme;
        }
        if let Some(snr) = &self.snr {
            cfg.snr_grid_db = parse_snr_range(snr)?;
        }
        if let Some(frames) = self.frames {
            cfg.max_frames = frames;
        }
        if let Some(min_errors) = self.min_errors {
            cfg.min_errors = min_errors;
        }
        cfg.parallel |= self.parallel;
        cfg.validate()?;
        Ok(cfg)
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|x| x.trim().parse().map_err(|_| sdr_turbo::Error::Config(format!("bad a priori grid value {x:?}"))))
        .collect()
}

fn histogram(values: &[usize]) -> String {
    let mut counts = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    counts.iter().map(|(d, c)| format!("{d}:{c}")).collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ber(common) => {
            let cfg = common.config()?;
            let records = run_ber_sweep(&cfg)?;
            let mut out = common.output()?;
            write_ber_csv(&mut out, &cfg, &records)?;
            out.flush()?;
        }
        Command::Exit { common, ia, trials, bins } => {
            let cfg = common.config()?;
            let grid = parse_grid(&ia)?;
            let link = Link::build(&cfg)?;
            let setup = ExitSetup {
                receiver: &link.receiver,
                generator: &link.generator,
                layout: link.layout,
                seed: cfg.seed,
                bins,
                parallel: cfg.parallel,
            };
            let mut points = Vec::new();
            for &snr in &cfg.snr_grid_db {
                points.extend(exit_curve(&setup, snr, &grid, trials)?);
            }
            let header = csv_header("exit", &cfg);
            let mut out = common.output()?;
            out.write_all(header.as_bytes())?;
            write_exit_csv(&mut out, &points, &format!("trials={trials} bins={bins}"))?;
            out.flush()?;
        }
        Command::Trace { common, frame } => {
            let mut cfg = common.config()?;
            cfg.snr_grid_db.truncate(1);
            let link = Link::build(&cfg)?;
            let (_, trace) = link.simulate(frame, cfg.snr_grid_db[0])?;
            let mut out = common.output()?;
            trace.write_json_lines(&mut out)?;
            out.flush()?;
        }
        Command::Pcm(PcmCommand::Gen { n, k, col_weight, seed, out }) => {
            write_alist(&build_pcm(n, k, col_weight, seed)?, out)?;
        }
        Command::Pcm(PcmCommand::Inspect { path }) => {
            let h = read_alist(&path)?;
            let g = derive_generator(&h);
            println!("n {}", h.n());
            println!("m {}", h.m());
            println!("rank {}", g.rank());
            println!("k {}", g.k());
            println!("column weights {}", histogram(&h.column_weights()));
            println!("row weights {}", histogram(&h.row_weights()));
            println!("four-cycles {}", if h.has_four_cycle() { "yes" } else { "no" });
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
