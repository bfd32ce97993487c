use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pim_core::config::{Scheme, SimConfig};
use pim_core::detection::Detector;
use pim_core::modem::{build_lookup_table, Constellation, ImModem, ModulationKind, PulseSet};
use pim_core::output::to_csv;
use pim_core::pulses::{matched_srrc_symbol_period, spectrum, srrc_pulse, PulseGrid, SampledPulse};
use pim_core::sim::{run_monte_carlo, run_theory_sweep};

#[derive(Parser)]
#[command(name = "pimsim", version, about = "Pulse index modulation link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER sweep for a PIM/GPIM or benchmark link.
    Simulate(RunArgs),
    /// Union-bound sweep without simulation.
    Theory(RunArgs),
    /// Monte Carlo sweep of an SM, QSM or single-antenna reference link
    /// (`--scheme sm|qsm|classic`).
    Bench(RunArgs),
    /// Pulse family utilities.
    Pulses {
        #[command(subcommand)]
        command: PulsesCommand,
    },
    /// Modulator utilities.
    Modem {
        #[command(subcommand)]
        command: ModemCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Pim,
    Gpim,
    Classic,
    Sm,
    Qsm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModulationArg {
    Psk,
    Qam,
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectorArg {
    Direct,
    Correlator,
}

impl From<ModulationArg> for ModulationKind {
    fn from(m: ModulationArg) -> Self {
        match m {
            ModulationArg::Psk => ModulationKind::Psk,
            ModulationArg::Qam => ModulationKind::Qam,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Flat TOML configuration; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

/// One flag per configuration key.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    modulation: Option<ModulationArg>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    num_samples: Option<usize>,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    truncate_to: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    snr_db_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    snr_db_stop: Option<f64>,
    #[arg(long)]
    snr_db_step: Option<f64>,
    #[arg(long)]
    min_bit_errors: Option<u64>,
    #[arg(long)]
    max_bits: Option<u64>,
    #[arg(long)]
    ber_floor: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    batch: Option<u64>,
    #[arg(long, value_enum)]
    detector: Option<DetectorArg>,
    #[arg(long)]
    noiseless: bool,
    #[arg(long)]
    theory: bool,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    nr: Option<usize>,
    #[arg(long)]
    target_bpcu: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &mut SimConfig) {
        if let Some(s) = self.scheme {
            cfg.scheme = match s {
                SchemeArg::Pim => Scheme::Pim,
                SchemeArg::Gpim => Scheme::Gpim,
                SchemeArg::Classic => Scheme::Classic,
                SchemeArg::Sm => Scheme::Sm,
                SchemeArg::Qsm => Scheme::Qsm,
            };
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            )*};
        }
        set!(
            n, m, num_samples, half_width, truncate_to, snr_db_start, snr_db_stop, snr_db_step, min_bit_errors,
            max_bits, seed, workers, batch, nt, nr
        );
        if let Some(m) = self.modulation {
            cfg.modulation = m.into();
        }
        if let Some(d) = self.detector {
            cfg.detector = match d {
                DetectorArg::Direct => Detector::Direct,
                DetectorArg::Correlator => Detector::Correlator,
            };
        }
        if self.ber_floor.is_some() {
            cfg.ber_floor = self.ber_floor;
        }
        if self.target_bpcu.is_some() {
            cfg.target_bpcu = self.target_bpcu;
        }
        cfg.noiseless |= self.noiseless;
        cfg.theory |= self.theory;
    }
}

#[derive(Subcommand)]
enum PulsesCommand {
    /// Sampled ψ0..ψ3 as CSV `t,psi0,psi1,psi2,psi3`.
    Dump {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Magnitude spectra in dB of ψ0..ψ3 and the rate-matched SRRC pulse.
    Spectrum {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 8192)]
        fft_size: usize,
        /// SRRC roll-off.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = pim_core::pulses::DEFAULT_NUM_SAMPLES)]
    num_samples: usize,
    #[arg(long, default_value_t = pim_core::pulses::DEFAULT_HALF_WIDTH)]
    half_width: f64,
    /// Keep only this many central samples.
    #[arg(long)]
    truncate_to: Option<usize>,
}

impl GridArgs {
    fn family(&self) -> Result<Vec<SampledPulse>> {
        let grid = PulseGrid {
            num_samples: self.num_samples,
            half_width: self.half_width,
            truncate_to: self.truncate_to,
        };
        Ok(grid.family(4)?)
    }
}

#[derive(Subcommand)]
enum ModemCommand {
    /// Shows the pulses, symbols and waveform energy for one bit word.
    Map {
        /// Bits, MSB first, e.g. `0110`.
        #[arg(long)]
        bits: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value = "psk")]
        modulation: ModulationArg,
        #[arg(long, default_value_t = 4)]
        m: usize,
    },
}

fn load(run: &RunArgs) -> Result<SimConfig> {
    let mut cfg = match &run.config {
        Some(path) => SimConfig::from_file(path)?,
        None => SimConfig::default(),
    };
    run.overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            // a closed pipe (e.g. `| head`) is not a failure
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn simulate(cfg: &SimConfig, out: Option<&Path>) -> Result<()> {
    let curve = run_monte_carlo(cfg)?;
    emit(&to_csv(&curve)?, out)
}

fn pulses_dump(grid: &GridArgs, out: Option<&Path>) -> Result<()> {
    let family = grid.family()?;
    let mut text = String::from("t,psi0,psi1,psi2,psi3\n");
    for (i, t) in family[0].times().iter().enumerate() {
        write!(text, "{t}")?;
        for p in &family {
            write!(text, ",{}", p.samples()[i])?;
        }
        text.push('\n');
    }
    emit(&text, out)
}

fn pulses_spectrum(grid: &GridArgs, fft_size: usize, beta: f64, out: Option<&Path>) -> Result<()> {
    let family = grid.family()?;
    let ts = family[0].sample_interval();
    let period = matched_srrc_symbol_period(&family, beta, fft_size)?;
    let srrc = srrc_pulse(beta, family[0].len(), period / ts, ts)?;
    let mut spectra = family.iter().map(|p| spectrum(p, fft_size)).collect::<pim_core::Result<Vec<_>>>()?;
    spectra.push(spectrum(&srrc, fft_size)?);
    let mut text = String::new();
    for (name, s) in ["psi0", "psi1", "psi2", "psi3", "srrc"].iter().zip(&spectra) {
        writeln!(text, "# {name} band edge = {} Hz", s.first_null_bandwidth)?;
    }
    writeln!(text, "# srrc beta = {beta}, symbol period = {period}")?;
    text.push_str("freq_hz,psi0_db,psi1_db,psi2_db,psi3_db,srrc_db\n");
    for (i, f) in spectra[0].frequencies.iter().enumerate() {
        write!(text, "{f}")?;
        for s in &spectra {
            write!(text, ",{}", s.magnitude_db[i])?;
        }
        text.push('\n');
    }
    emit(&text, out)
}

fn modem_map(bits: &str, n: usize, k: usize, modulation: ModulationArg, m: usize) -> Result<()> {
    let word: Vec<bool> = bits
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => bail!("bit strings may only contain 0 and 1, found `{other}`"),
        })
        .collect::<Result<_>>()?;
    let pulses = PulseSet::new(PulseGrid::link_default().family(n)?)?;
    let modem = ImModem::new(build_lookup_table(n, k)?, Constellation::new(modulation.into(), m)?, pulses)?;
    let frame = modem.modulate(&word)?;
    let energy: f64 = frame.waveform.iter().map(|x| x.norm_sqr()).sum();
    let mut text = String::new();
    writeln!(text, "pulses = {:?}", frame.pulse_indices)?;
    for s in &frame.symbols {
        writeln!(text, "symbol = {} {:+}j", s.re, s.im)?;
    }
    writeln!(text, "energy = {energy}")?;
    emit(&text, None)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(run) => simulate(&load(&run)?, run.out.as_deref()),
        Command::Theory(run) => {
            let cfg = load(&run)?;
            emit(&to_csv(&run_theory_sweep(&cfg)?)?, run.out.as_deref())
        }
        Command::Bench(run) => {
            let cfg = load(&run)?;
            if cfg.scheme.benchmark().is_none() {
                bail!("bench needs --scheme sm, qsm or classic, got {}", cfg.scheme);
            }
            simulate(&cfg, run.out.as_deref())
        }
        Command::Pulses { command } => match command {
            PulsesCommand::Dump { grid, out } => pulses_dump(&grid, out.as_deref()),
            PulsesCommand::Spectrum {
                grid,
                fft_size,
                beta,
                out,
            } => pulses_spectrum(&grid, fft_size, beta, out.as_deref()),
        },
        Command::Modem { command } => match command {
            ModemCommand::Map {
                bits,
                n,
                k,
                modulation,
                m,
            } => modem_map(&bits, n, k, modulation, m),
        },
    }
}

fn main() -> std::process::ExitCode {
    match run(Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
