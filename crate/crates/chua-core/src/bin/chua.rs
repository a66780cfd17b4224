//! Command-line laboratory for the circuit: transient runs, regime sweeps,
//! synchronization experiments, masked communication, and sound synthesis.
//!
//! Exit codes: 0 success, 1 validation, 2 numerical failure, 3 io.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use chua_core::analysis::{sweep_bifurcation, write_bifurcation_csv, write_sweep_csv};
use chua_core::circuit::State;
use chua_core::config::ExperimentConfig;
use chua_core::error::Error;
use chua_core::integrate::{simulate, Schedule};
use chua_core::sync::{
    correlation, mask_transmit_with_ratio, master_drive, recover_message, resample_linear,
    run_synchronization,
};

#[derive(Parser)]
#[command(
    name = "chua",
    version,
    about = "Chua's circuit laboratory: route to chaos, synchronization, masking, sound"
)]
struct Cli {
    /// Experiment configuration file (TOML); defaults describe the reference circuit.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Integration step override (s).
    #[arg(long, global = true)]
    dt: Option<f64>,

    /// End time override (s); for sync/comm this is the experiment end.
    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,

    /// Recording decimation override (steps per recorded sample).
    #[arg(long = "record-every", global = true)]
    record_every: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and export waveform + phase-plane CSVs.
    Simulate {
        /// Coupling resistor override (Ω).
        #[arg(long)]
        r0: Option<f64>,
    },
    /// Classify the long-run regime across a set of coupling resistances.
    Sweep {
        /// Comma-separated resistances (Ω), e.g. "2200,1900,1800".
        #[arg(long = "r0-list")]
        r0_list: Option<String>,
        /// start:stop:step range (Ω), e.g. "2000:1800:5".
        #[arg(long = "r0-range")]
        r0_range: Option<String>,
        /// Worker threads (default: one per logical core).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Master/slave switch experiment with optional slave-side mismatch.
    Sync {
        /// none, c=5%, r0=5% or l=5%.
        #[arg(long)]
        mismatch: Option<String>,
    },
    /// Chaotic-masking message transmission and recovery.
    Comm {
        /// Message CSV with `t,value` rows; resampled onto the carrier grid.
        #[arg(long = "message-file")]
        message_file: Option<PathBuf>,
        /// Built-in tone frequency (Hz).
        #[arg(long = "tone-freq")]
        tone_freq: Option<f64>,
        /// Tone amplitude as a fraction of the carrier RMS.
        #[arg(long = "tone-ratio")]
        tone_ratio: Option<f64>,
        /// Receiver-side mismatch: none, c=5%, r0=5% or l=5%.
        #[arg(long)]
        mismatch: Option<String>,
    },
    /// Synthesize audio by modulating the coupling resistor; writes a WAV.
    Sound {
        /// staircase or sine.
        #[arg(long = "mod")]
        mode: Option<String>,
        /// Modulation frequency (Hz).
        #[arg(long)]
        freq: Option<f64>,
        /// Staircase levels (Ω), comma-separated.
        #[arg(long)]
        levels: Option<String>,
        /// Sine center (Ω).
        #[arg(long)]
        center: Option<f64>,
        /// Sine depth (Ω).
        #[arg(long)]
        depth: Option<f64>,
        /// Clip duration (s).
        #[arg(long)]
        duration: Option<f64>,
        /// Audio sample rate (Hz).
        #[arg(long)]
        rate: Option<u32>,
        /// Output node: v_c1, v_c2 or i_l.
        #[arg(long)]
        node: Option<String>,
        /// Also dump the pre-quantization samples as CSV.
        #[arg(long = "dump-csv")]
        dump_csv: bool,
    },
}

struct RunReport {
    command: &'static str,
    elapsed_s: f64,
    outputs: Vec<PathBuf>,
    metrics: Vec<(String, String)>,
    warnings: Vec<String>,
    echo: PathBuf,
}

impl RunReport {
    fn print(&self) {
        println!("command: {}", self.command);
        println!("elapsed: {:.3} s", self.elapsed_s);
        println!("outputs:");
        for p in &self.outputs {
            println!("  {}", p.display());
        }
        if !self.metrics.is_empty() {
            println!("metrics:");
            for (k, v) in &self.metrics {
                println!("  {k} = {v}");
            }
        }
        for w in &self.warnings {
            println!("warning: {w}");
        }
        println!("config echo: {}", self.echo.display());
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                std::process::exit(0);
            }
            let _ = e.print();
            std::process::exit(1);
        }
    };
    match run(cli) {
        Ok(report) => report.print(),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match &e {
                Error::Io(_) => 3,
                e if e.is_validation() => 1,
                _ => 2,
            };
            std::process::exit(code);
        }
    }
}

fn run(cli: Cli) -> Result<RunReport, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(dt) = cli.dt {
        cfg.sim.dt = dt;
    }
    if let Some(re) = cli.record_every {
        cfg.sim.record_every = re;
    }
    if let Some(t_end) = cli.t_end {
        cfg.sim.t_end = t_end;
    }
    let started = Instant::now();
    let out = cli.out.clone();
    match cli.command {
        Command::Simulate { r0 } => cmd_simulate(cfg, &out, r0, started),
        Command::Sweep {
            r0_list,
            r0_range,
            workers,
        } => cmd_sweep(cfg, &out, r0_list, r0_range, workers, started),
        Command::Sync { mismatch } => cmd_sync(cfg, &out, mismatch, cli.t_end, started),
        Command::Comm {
            message_file,
            tone_freq,
            tone_ratio,
            mismatch,
        } => cmd_comm(
            cfg,
            &out,
            message_file,
            tone_freq,
            tone_ratio,
            mismatch,
            cli.t_end,
            started,
        ),
        Command::Sound {
            mode,
            freq,
            levels,
            center,
            depth,
            duration,
            rate,
            node,
            dump_csv,
        } => cmd_sound(
            cfg, &out, mode, freq, levels, center, depth, duration, rate, node, dump_csv, started,
        ),
    }
}

fn write_echo(cfg: &ExperimentConfig, out: &Path) -> Result<PathBuf, Error> {
    let path = out.join("config.echo.toml");
    std::fs::write(&path, cfg.to_toml_string())?;
    Ok(path)
}

fn parse_list(text: &str) -> Result<Vec<f64>, Error> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    values.map_err(|e| Error::InvalidParam(format!("list {text:?}: {e}")))
}

fn parse_range(text: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParam(format!(
            "range {text:?} should be start:stop:step"
        )));
    }
    let nums: Result<Vec<f64>, _> = parts.iter().map(|s| s.trim().parse::<f64>()).collect();
    let nums = nums.map_err(|e| Error::InvalidParam(format!("range {text:?}: {e}")))?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "range step must be > 0, got {step}"
        )));
    }
    let span = (stop - start).abs();
    let n = (span / step + 1e-9).floor() as usize + 1;
    let dir = if stop >= start { 1.0 } else { -1.0 };
    Ok((0..n).map(|i| start + dir * i as f64 * step).collect())
}

fn cmd_simulate(
    mut cfg: ExperimentConfig,
    out: &Path,
    r0: Option<f64>,
    started: Instant,
) -> Result<RunReport, Error> {
    if let Some(r0) = r0 {
        cfg.circuit.r0 = r0;
    }
    let params = cfg.circuit.to_params()?;
    let tr = simulate(
        &params,
        &State::new(0.1, 0.0, 0.0),
        cfg.sim.t_end,
        cfg.sim.dt,
        &Schedule::empty(),
        cfg.sim.record_every,
    )?;

    let mut trajectory = Vec::new();
    tr.write_csv(&mut trajectory)?;
    let mut phase = Vec::from(&b"v_c1,v_c2\n"[..]);
    for s in &tr.samples {
        phase.extend_from_slice(format!("{},{}\n", s.v_c1, s.v_c2).as_bytes());
    }

    std::fs::create_dir_all(out)?;
    let traj_path = out.join("trajectory.csv");
    let phase_path = out.join("phase.csv");
    std::fs::write(&traj_path, trajectory)?;
    std::fs::write(&phase_path, phase)?;
    let echo = write_echo(&cfg, out)?;

    let terminal = tr.terminal().copied().unwrap_or_default();
    Ok(RunReport {
        command: "simulate",
        elapsed_s: started.elapsed().as_secs_f64(),
        outputs: vec![traj_path, phase_path],
        metrics: vec![
            ("r0_ohm".to_string(), format!("{}", cfg.circuit.r0)),
            ("t_end_s".to_string(), format!("{}", cfg.sim.t_end)),
            ("samples".to_string(), format!("{}", tr.len())),
            (
                "terminal".to_string(),
                format!("({}, {}, {})", terminal.v_c1, terminal.v_c2, terminal.i_l),
            ),
        ],
        warnings: vec![],
        echo,
    })
}

fn cmd_sweep(
    mut cfg: ExperimentConfig,
    out: &Path,
    r0_list: Option<String>,
    r0_range: Option<String>,
    workers: Option<usize>,
    started: Instant,
) -> Result<RunReport, Error> {
    if let Some(list) = r0_list {
        cfg.sweep.r0_values = parse_list(&list)?;
    } else if let Some(range) = r0_range {
        cfg.sweep.r0_values = parse_range(&range)?;
    }
    if let Some(w) = workers {
        cfg.sweep.workers = w;
    }
    if cfg.sweep.r0_values.is_empty() {
        return Err(Error::InvalidParam("sweep list is empty".to_string()));
    }
    let params = cfg.circuit.to_params()?;
    let classify = cfg.analysis.to_classify_config(&cfg.sim);

    let mut pool = rayon::ThreadPoolBuilder::new();
    if cfg.sweep.workers > 0 {
        pool = pool.num_threads(cfg.sweep.workers);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidParam(format!("worker pool: {e}")))?;
    let points = pool.install(|| sweep_bifurcation(&params, &cfg.sweep.r0_values, &classify))?;

    let ok = points.iter().filter(|p| p.outcome.is_ok()).count();
    if ok == 0 {
        return Err(Error::Inconclusive(format!(
            "all {} sweep points failed; first: {}",
            points.len(),
            points[0]
                .outcome
                .as_ref()
                .err()
                .cloned()
                .unwrap_or_default()
        )));
    }

    let mut regimes = Vec::new();
    write_sweep_csv(&points, &mut regimes)?;
    let mut bifurcation = Vec::new();
    write_bifurcation_csv(&points, &mut bifurcation)?;

    std::fs::create_dir_all(out)?;
    let regimes_path = out.join("regimes.csv");
    let bif_path = out.join("bifurcation.csv");
    std::fs::write(&regimes_path, regimes)?;
    std::fs::write(&bif_path, bifurcation)?;
    let echo = write_echo(&cfg, out)?;

    let mut tally: Vec<(String, usize)> = Vec::new();
    for p in &points {
        let name = match &p.outcome {
            Ok(o) => o.regime.tag.to_string(),
            Err(_) => "error".to_string(),
        };
        match tally.iter_mut().find(|(n, _)| *n == name) {
            Some((_, c)) => *c += 1,
            None => tally.push((name, 1)),
        }
    }
    let mut metrics = vec![
        ("points".to_string(), format!("{}", points.len())),
        ("succeeded".to_string(), format!("{ok}")),
    ];
    for (name, count) in tally {
        metrics.push((format!("regime.{name}"), format!("{count}")));
    }

    Ok(RunReport {
        command: "sweep",
        elapsed_s: started.elapsed().as_secs_f64(),
        outputs: vec![regimes_path, bif_path],
        metrics,
        warnings: vec![],
        echo,
    })
}

fn cmd_sync(
    mut cfg: ExperimentConfig,
    out: &Path,
    mismatch: Option<String>,
    t_end: Option<f64>,
    started: Instant,
) -> Result<RunReport, Error> {
    if let Some(m) = mismatch {
        cfg.sync.mismatch = m;
    }
    if let Some(t) = t_end {
        cfg.sync.t_end = t;
    }
    let sync_cfg = cfg.sync.to_sync_config(&cfg.circuit, &cfg.sim)?;
    let result = run_synchronization(&sync_cfg)?;

    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    std::fs::create_dir_all(out)?;
    let sync_path = out.join("sync.csv");
    std::fs::write(&sync_path, csv)?;
    let echo = write_echo(&cfg, out)?;

    let m = result.metrics;
    Ok(RunReport {
        command: "sync",
        elapsed_s: started.elapsed().as_secs_f64(),
        outputs: vec![sync_path],
        metrics: vec![
            ("mismatch".to_string(), cfg.sync.mismatch.clone()),
            ("rms_pre_v".to_string(), format!("{:.6e}", m.rms_pre)),
            ("rms_post_v".to_string(), format!("{:.6e}", m.rms_post)),
            (
                "max_glitch_post_v".to_string(),
                format!("{:.6e}", m.max_glitch_post),
            ),
            ("signal_rms_v".to_string(), format!("{:.6e}", m.signal_rms)),
            (
                "rms_post_over_signal".to_string(),
                format!("{:.6e}", m.rms_post / m.signal_rms),
            ),
        ],
        warnings: vec![],
        echo,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_comm(
    mut cfg: ExperimentConfig,
    out: &Path,
    message_file: Option<PathBuf>,
    tone_freq: Option<f64>,
    tone_ratio: Option<f64>,
    mismatch: Option<String>,
    t_end: Option<f64>,
    started: Instant,
) -> Result<RunReport, Error> {
    if let Some(p) = &message_file {
        cfg.comm.message_file = Some(p.display().to_string());
    }
    if let Some(f) = tone_freq {
        cfg.comm.tone_freq = f;
    }
    if let Some(r) = tone_ratio {
        cfg.comm.tone_ratio = r;
    }
    if let Some(m) = mismatch {
        cfg.comm.mismatch = m;
    }
    if let Some(t) = t_end {
        cfg.comm.t_end = t;
    }

    // The receiver may be mismatched; the transmitter is always the master.
    let rx_cfg = cfg.comm.to_sync_config(&cfg.circuit, &cfg.sim)?;
    let tx_cfg = chua_core::sync::SyncConfig {
        slave: rx_cfg.master.clone(),
        ..rx_cfg.clone()
    };

    let drive = master_drive(&tx_cfg)?;
    let message = match &cfg.comm.message_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let mut points = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || (i == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
                    continue;
                }
                let (t, v) = line.split_once(',').ok_or_else(|| {
                    Error::InvalidParam(format!("message line {}: expected t,value", i + 1))
                })?;
                let t: f64 = t
                    .trim()
                    .parse()
                    .map_err(|e| Error::InvalidParam(format!("message line {}: {e}", i + 1)))?;
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|e| Error::InvalidParam(format!("message line {}: {e}", i + 1)))?;
                points.push((t, v));
            }
            resample_linear(&points, 0.0, drive.dt, drive.len())?
        }
        None => {
            let rms = drive.rms_window(tx_cfg.t_sync, tx_cfg.t_end)?;
            chua_core::sync::tone(
                cfg.comm.tone_freq,
                cfg.comm.tone_ratio * rms,
                0.0,
                drive.dt,
                drive.len(),
            )
        }
    };

    let masked = mask_transmit_with_ratio(&message, &tx_cfg, cfg.comm.mask_ratio)?;
    let recovered = recover_message(&masked.channel, &rx_cfg)?;

    let window = recovered.index_range(rx_cfg.t_sync + rx_cfg.settle, rx_cfg.t_end);
    let corr = correlation(
        &recovered.samples[window.clone()],
        &message.samples[window.clone()],
    );
    let recovered_rms = recovered.rms_window(rx_cfg.t_sync + rx_cfg.settle, rx_cfg.t_end)?;

    // Downsample file output to the shared recording rate.
    let stride = cfg.sim.record_every.max(1) as usize;
    let mut channel_csv = Vec::from(&b"t,value\n"[..]);
    for i in (0..masked.channel.len()).step_by(stride) {
        channel_csv.extend_from_slice(
            format!(
                "{},{}\n",
                masked.channel.time_at(i),
                masked.channel.samples[i]
            )
            .as_bytes(),
        );
    }
    let mut recovered_csv = Vec::from(&b"t,original,recovered\n"[..]);
    for i in (0..recovered.len()).step_by(stride) {
        recovered_csv.extend_from_slice(
            format!(
                "{},{},{}\n",
                recovered.time_at(i),
                message.samples[i],
                recovered.samples[i]
            )
            .as_bytes(),
        );
    }

    std::fs::create_dir_all(out)?;
    let channel_path = out.join("channel.csv");
    let recovered_path = out.join("recovered.csv");
    std::fs::write(&channel_path, channel_csv)?;
    std::fs::write(&recovered_path, recovered_csv)?;
    let echo = write_echo(&cfg, out)?;

    let mut warnings = Vec::new();
    if masked.over_amplitude {
        warnings.push(format!(
            "message peak exceeds mask_ratio {} x carrier RMS {:.3e} V; recovery quality degrades",
            cfg.comm.mask_ratio, masked.drive_rms
        ));
    }

    Ok(RunReport {
        command: "comm",
        elapsed_s: started.elapsed().as_secs_f64(),
        outputs: vec![channel_path, recovered_path],
        metrics: vec![
            ("mismatch".to_string(), cfg.comm.mismatch.clone()),
            (
                "carrier_rms_v".to_string(),
                format!("{:.6e}", masked.drive_rms),
            ),
            ("correlation".to_string(), format!("{corr:.6}")),
            (
                "recovered_rms_v".to_string(),
                format!("{recovered_rms:.6e}"),
            ),
            (
                "recovered_rms_over_carrier".to_string(),
                format!("{:.6e}", recovered_rms / masked.drive_rms),
            ),
        ],
        warnings,
        echo,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_sound(
    mut cfg: ExperimentConfig,
    out: &Path,
    mode: Option<String>,
    freq: Option<f64>,
    levels: Option<String>,
    center: Option<f64>,
    depth: Option<f64>,
    duration: Option<f64>,
    rate: Option<u32>,
    node: Option<String>,
    dump_csv: bool,
    started: Instant,
) -> Result<RunReport, Error> {
    if let Some(m) = mode {
        cfg.audio.mode = m;
    }
    if let Some(f) = freq {
        cfg.audio.freq = f;
    }
    if let Some(l) = levels {
        cfg.audio.levels = parse_list(&l)?;
    }
    if let Some(c) = center {
        cfg.audio.center = c;
    }
    if let Some(d) = depth {
        cfg.audio.depth = d;
    }
    if let Some(d) = duration {
        cfg.audio.duration = d;
    }
    if let Some(r) = rate {
        cfg.audio.rate = r;
    }
    if let Some(n) = node {
        cfg.audio.node = n;
    }

    let params = cfg.circuit.to_params()?;
    let modulation = cfg.audio.to_modulation()?;
    let output_node = cfg.audio.to_node()?;
    let clip = chua_core::audio::synthesize(&params, &modulation, cfg.audio.rate, output_node)?;
    let bytes = chua_core::audio::wav_bytes(&clip);

    std::fs::create_dir_all(out)?;
    let wav_path = out.join("sound.wav");
    std::fs::write(&wav_path, &bytes)?;
    let mut outputs = vec![wav_path];
    if dump_csv {
        let mut csv = Vec::from(&b"t,value\n"[..]);
        for (i, s) in clip.samples.iter().enumerate() {
            csv.extend_from_slice(format!("{},{}\n", i as f64 / clip.rate as f64, s).as_bytes());
        }
        let csv_path = out.join("samples.csv");
        std::fs::write(&csv_path, csv)?;
        outputs.push(csv_path);
    }
    let echo = write_echo(&cfg, out)?;

    Ok(RunReport {
        command: "sound",
        elapsed_s: started.elapsed().as_secs_f64(),
        outputs,
        metrics: vec![
            ("mode".to_string(), cfg.audio.mode.clone()),
            ("rate_hz".to_string(), format!("{}", clip.rate)),
            ("samples".to_string(), format!("{}", clip.samples.len())),
            ("duration_s".to_string(), format!("{:.3}", clip.duration())),
            ("wav_bytes".to_string(), format!("{}", bytes.len())),
        ],
        warnings: vec![],
        echo,
    })
}
