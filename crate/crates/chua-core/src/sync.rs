//! Master/slave synchronization experiments: drive-response coupling with a
//! switch event, component-mismatch injection, error metrics, and
//! chaotic-masking message transmission and recovery.
//!
//! The default coupling substitutes the master's v_c1 into the slave — the
//! standard stable-subsystem decomposition for this circuit: the remaining
//! (v_c2, i_l) response is linear and contracting. Message recovery drives
//! the response subsystem with the channel, regenerates the drive variable
//! through the slave's own nonlinear node, and subtracts.

use crate::circuit::{vector_field, CircuitParams, State};
use crate::error::{Error, Result};
use crate::integrate::{rk4_array, step_count, DIVERGENCE_LIMIT};

/// Which state variable crosses the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriveVar {
    #[default]
    VC1,
    VC2,
}

/// How the drive line acts on the slave once the switch closes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Coupling {
    /// Replace the slave's drive variable with the master's.
    #[default]
    Substitution,
    /// Bidirectional coupling resistor between the two drive nodes.
    Resistive { r_c: f64 },
}

/// Coupling resistor bridging the two tank nodes in the default switch
/// experiment (Ω). Chosen so that matched circuits synchronize to numerical
/// precision, a 5% capacitor mismatch leaves only small glitches, and a 5%
/// coupling-resistor mismatch visibly breaks synchronization.
pub const DEFAULT_COUPLING_R: f64 = 1800.0;

/// Coupling resistor (Ω) of the default masking carrier. Spiral-chaotic, so
/// the receiver's regenerated drive never re-locks onto the mirror branch.
pub const DEFAULT_MASKING_R0: f64 = 1830.0;

/// Conductance (S) of the weak tap that pulls the receiver's regeneration
/// stage toward the channel; breaks the mirror-branch bistability of the
/// odd nonlinearity without visibly distorting the recovered message.
pub const DEFAULT_REGEN_TAP: f64 = 1e-5;

/// One synchronization experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncConfig {
    pub master: CircuitParams,
    pub slave: CircuitParams,
    /// Switch-close time (s).
    pub t_sync: f64,
    pub t_end: f64,
    pub drive: DriveVar,
    pub coupling: Coupling,
    pub master_init: State,
    pub slave_init: State,
    pub dt: f64,
    pub record_every: u32,
    /// Time after the switch before metrics are trusted (s).
    pub settle: f64,
    /// Stabilizing tap conductance for message recovery (S).
    pub regen_tap: f64,
}

impl Default for SyncConfig {
    fn default() -> Self {
        let p = CircuitParams::default();
        SyncConfig {
            master: p.clone(),
            slave: p,
            t_sync: 0.1,
            t_end: 0.2,
            drive: DriveVar::VC2,
            coupling: Coupling::Resistive {
                r_c: DEFAULT_COUPLING_R,
            },
            master_init: State::new(0.1, 0.0, 0.0),
            // Guarantees visible pre-sync deviation.
            slave_init: State::new(-0.1, 0.05, 0.0),
            dt: crate::integrate::DEFAULT_DT,
            record_every: crate::integrate::DEFAULT_RECORD_EVERY,
            settle: 0.02,
            regen_tap: DEFAULT_REGEN_TAP,
        }
    }
}

impl SyncConfig {
    /// Defaults for the masking pipeline: a spiral-chaotic carrier with
    /// unidirectional substitution of the nonlinear-node voltage.
    pub fn masking() -> Self {
        let p = CircuitParams::standard(DEFAULT_MASKING_R0, CircuitParams::DEFAULT_E_SAT)
            .expect("standard values are valid");
        SyncConfig {
            master: p.clone(),
            slave: p,
            drive: DriveVar::VC1,
            coupling: Coupling::Substitution,
            ..SyncConfig::default()
        }
    }
}

impl SyncConfig {
    pub fn validate(&self) -> Result<()> {
        self.master.validate()?;
        self.slave.validate()?;
        if !(self.t_sync > 0.0 && self.t_sync < self.t_end) {
            return Err(Error::InvalidParam(format!(
                "need 0 < t_sync < t_end, got t_sync = {}, t_end = {}",
                self.t_sync, self.t_end
            )));
        }
        if let Coupling::Resistive { r_c } = self.coupling {
            if !(r_c.is_finite() && r_c > 0.0) {
                return Err(Error::InvalidParam(format!(
                    "coupling resistance must be > 0, got {r_c}"
                )));
            }
        }
        if !(self.dt > 0.0 && self.record_every >= 1) {
            return Err(Error::InvalidParam(
                "dt must be > 0 and record_every >= 1".to_string(),
            ));
        }
        if !(self.settle >= 0.0 && self.settle < self.t_end - self.t_sync) {
            return Err(Error::InvalidParam(format!(
                "settle {} must fit inside the post-switch window {}",
                self.settle,
                self.t_end - self.t_sync
            )));
        }
        if !self.master_init.is_finite() || !self.slave_init.is_finite() {
            return Err(Error::NonFinite("sync initial state"));
        }
        if !(self.regen_tap.is_finite() && self.regen_tap >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "regen_tap must be >= 0, got {}",
                self.regen_tap
            )));
        }
        Ok(())
    }
}

/// Component mismatch injected into the slave circuit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Mismatch {
    #[default]
    None,
    /// Scale both capacitors by (1 + fraction).
    C(f64),
    /// Scale the coupling resistor by (1 + fraction).
    R0(f64),
    /// Scale the inductor by (1 + fraction).
    L(f64),
}

impl Mismatch {
    pub fn apply(&self, p: &CircuitParams) -> Result<CircuitParams> {
        let mut out = p.clone();
        match *self {
            Mismatch::None => {}
            Mismatch::C(f) => {
                out.c1 *= 1.0 + f;
                out.c2 *= 1.0 + f;
            }
            Mismatch::R0(f) => out.r0 *= 1.0 + f,
            Mismatch::L(f) => out.l *= 1.0 + f,
        }
        out.validate()?;
        Ok(out)
    }
}

impl std::str::FromStr for Mismatch {
    type Err = Error;

    /// Accepts `none`, or `<component>=<amount>` with component one of
    /// c, r0, l and amount either a percentage (`5%`) or a fraction (`0.05`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(Mismatch::None);
        }
        let (kind, amount) = s.split_once('=').ok_or_else(|| {
            Error::InvalidParam(format!(
                "mismatch {s:?} should look like none, c=5%, r0=5% or l=5%"
            ))
        })?;
        let amount = amount.trim();
        let fraction = if let Some(pct) = amount.strip_suffix('%') {
            pct.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParam(format!("mismatch amount {amount:?}: {e}")))?
                / 100.0
        } else {
            amount
                .parse::<f64>()
                .map_err(|e| Error::InvalidParam(format!("mismatch amount {amount:?}: {e}")))?
        };
        if !fraction.is_finite() || fraction <= -1.0 {
            return Err(Error::InvalidParam(format!(
                "mismatch fraction {fraction} out of range"
            )));
        }
        match kind.trim().to_ascii_lowercase().as_str() {
            "c" => Ok(Mismatch::C(fraction)),
            "r0" => Ok(Mismatch::R0(fraction)),
            "l" => Ok(Mismatch::L(fraction)),
            other => Err(Error::InvalidParam(format!(
                "unknown mismatch component {other:?}; expected c, r0 or l"
            ))),
        }
    }
}

/// Uniformly sampled scalar signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Indices whose sample times fall in [t_a, t_b).
    pub fn index_range(&self, t_a: f64, t_b: f64) -> std::ops::Range<usize> {
        let lo = if t_a <= self.t0 {
            0
        } else {
            ((t_a - self.t0) / self.dt - 1e-9).ceil() as usize
        };
        let hi = if t_b <= self.t0 {
            0
        } else {
            (((t_b - self.t0) / self.dt - 1e-9).ceil() as usize).min(self.samples.len())
        };
        lo.min(hi)..hi
    }

    pub fn rms_window(&self, t_a: f64, t_b: f64) -> Result<f64> {
        let r = self.index_range(t_a, t_b);
        if r.is_empty() {
            return Err(Error::EmptyWindow(format!("[{t_a}, {t_b})")));
        }
        let n = r.len() as f64;
        let sum: f64 = self.samples[r].iter().map(|x| x * x).sum();
        Ok((sum / n).sqrt())
    }

    pub fn max_abs_window(&self, t_a: f64, t_b: f64) -> Result<f64> {
        let r = self.index_range(t_a, t_b);
        if r.is_empty() {
            return Err(Error::EmptyWindow(format!("[{t_a}, {t_b})")));
        }
        Ok(self.samples[r].iter().fold(0.0f64, |m, x| m.max(x.abs())))
    }
}

/// Sine tone sampled on a waveform grid.
pub fn tone(freq: f64, amplitude: f64, t0: f64, dt: f64, n: usize) -> Waveform {
    let samples = (0..n)
        .map(|i| amplitude * (2.0 * std::f64::consts::PI * freq * (t0 + i as f64 * dt)).sin())
        .collect();
    Waveform { t0, dt, samples }
}

/// Linear-interpolation resampling of (t, value) points onto a uniform grid.
/// Times outside the point span clamp to the end values.
pub fn resample_linear(points: &[(f64, f64)], t0: f64, dt: f64, n: usize) -> Result<Waveform> {
    if points.is_empty() {
        return Err(Error::InvalidParam("no message points".to_string()));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidParam(
            "message times must be strictly ascending".to_string(),
        ));
    }
    let mut samples = Vec::with_capacity(n);
    let mut seg = 0usize;
    for i in 0..n {
        let t = t0 + i as f64 * dt;
        while seg + 1 < points.len() && points[seg + 1].0 < t {
            seg += 1;
        }
        let v = if t <= points[0].0 {
            points[0].1
        } else if t >= points[points.len() - 1].0 {
            points[points.len() - 1].1
        } else {
            let (ta, va) = points[seg];
            let (tb, vb) = points[seg + 1];
            va + (vb - va) * (t - ta) / (tb - ta)
        };
        samples.push(v);
    }
    Ok(Waveform { t0, dt, samples })
}

/// Pre/post-switch error figures. All in volts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncMetrics {
    pub rms_pre: f64,
    pub rms_post: f64,
    pub max_glitch_post: f64,
    pub signal_rms: f64,
}

/// Paired recordings of the compared node plus their difference.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncResult {
    pub master_v_y: Waveform,
    pub slave_v_y: Waveform,
    pub difference: Waveform,
    pub metrics: SyncMetrics,
    pub t_sync: f64,
    pub t_end: f64,
}

impl SyncResult {
    /// CSV rows `t,v_y_master,v_y_slave,difference`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(b"t,v_y_master,v_y_slave,difference\n")?;
        for i in 0..self.master_v_y.len() {
            writeln!(
                w,
                "{},{},{},{}",
                self.master_v_y.time_at(i),
                self.master_v_y.samples[i],
                self.slave_v_y.samples[i],
                self.difference.samples[i]
            )?;
        }
        Ok(())
    }
}

/// Error metrics over [0, t_sync) and [t_sync + settle, t_end], with the
/// master's RMS over the post window as the signal reference.
pub fn sync_error_metrics(result: &SyncResult, settle: f64) -> Result<SyncMetrics> {
    if !(settle >= 0.0 && settle < result.t_end - result.t_sync) {
        return Err(Error::EmptyWindow(format!(
            "settle {settle} leaves no post-switch window"
        )));
    }
    let post_start = result.t_sync + settle;
    Ok(SyncMetrics {
        rms_pre: result.difference.rms_window(0.0, result.t_sync)?,
        rms_post: result.difference.rms_window(post_start, result.t_end)?,
        max_glitch_post: result.difference.max_abs_window(post_start, result.t_end)?,
        signal_rms: result.master_v_y.rms_window(post_start, result.t_end)?,
    })
}

fn pack(m: &State, s: &State) -> [f64; 6] {
    [m.v_c1, m.v_c2, m.i_l, s.v_c1, s.v_c2, s.i_l]
}

fn field_single(p: &CircuitParams, v1: f64, v2: f64, il: f64) -> (f64, f64, f64) {
    let f = vector_field(&State::new(v1, v2, il), p);
    (f.v_c1, f.v_c2, f.i_l)
}

/// Coupled 6-state field. Before the switch closes both circuits run free;
/// afterwards the coupling mode decides how the drive line acts.
fn coupled_field(cfg: &SyncConfig, closed: bool, y: &[f64; 6]) -> [f64; 6] {
    let (m1, m2, m3) = field_single(&cfg.master, y[0], y[1], y[2]);
    let (s1, s2, s3) = field_single(&cfg.slave, y[3], y[4], y[5]);
    let mut out = [m1, m2, m3, s1, s2, s3];
    if !closed {
        return out;
    }
    match (cfg.coupling, cfg.drive) {
        (Coupling::Substitution, DriveVar::VC1) => {
            // Slave v_c1 is pinned to the master's: same value, same rate.
            out[3] = m1;
        }
        (Coupling::Substitution, DriveVar::VC2) => {
            out[4] = m2;
        }
        (Coupling::Resistive { r_c }, DriveVar::VC1) => {
            let i_c = (y[0] - y[3]) / r_c;
            out[0] -= i_c / cfg.master.c1;
            out[3] += i_c / cfg.slave.c1;
        }
        (Coupling::Resistive { r_c }, DriveVar::VC2) => {
            let i_c = (y[1] - y[4]) / r_c;
            out[1] -= i_c / cfg.master.c2;
            out[4] += i_c / cfg.slave.c2;
        }
    }
    out
}

/// Run one switch-at-t_sync experiment and record v_c2 of both circuits.
pub fn run_synchronization(cfg: &SyncConfig) -> Result<SyncResult> {
    cfg.validate()?;
    let n_steps = step_count(cfg.t_end, cfg.dt);
    let switch_step = step_count(cfg.t_sync, cfg.dt);
    let mut y = pack(&cfg.master_init, &cfg.slave_init);

    let cap = (n_steps / cfg.record_every as u64 + 2) as usize;
    let mut master_v_y = Vec::with_capacity(cap);
    let mut slave_v_y = Vec::with_capacity(cap);
    master_v_y.push(y[1]);
    slave_v_y.push(y[4]);

    for k in 0..n_steps {
        let closed = k >= switch_step;
        if k == switch_step {
            if let Coupling::Substitution = cfg.coupling {
                match cfg.drive {
                    DriveVar::VC1 => y[3] = y[0],
                    DriveVar::VC2 => y[4] = y[1],
                }
            }
        }
        let t = k as f64 * cfg.dt;
        y = rk4_array(|_, yy| coupled_field(cfg, closed, yy), t, cfg.dt, &y);
        if y.iter()
            .any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT)
        {
            return Err(Error::Divergence { t: t + cfg.dt });
        }
        if (k + 1) % cfg.record_every as u64 == 0 {
            master_v_y.push(y[1]);
            slave_v_y.push(y[4]);
        }
    }

    let dt_rec = cfg.dt * cfg.record_every as f64;
    let difference: Vec<f64> = master_v_y
        .iter()
        .zip(&slave_v_y)
        .map(|(a, b)| a - b)
        .collect();
    let mut result = SyncResult {
        master_v_y: Waveform {
            t0: 0.0,
            dt: dt_rec,
            samples: master_v_y,
        },
        slave_v_y: Waveform {
            t0: 0.0,
            dt: dt_rec,
            samples: slave_v_y,
        },
        difference: Waveform {
            t0: 0.0,
            dt: dt_rec,
            samples: difference,
        },
        metrics: SyncMetrics {
            rms_pre: 0.0,
            rms_post: 0.0,
            max_glitch_post: 0.0,
            signal_rms: 0.0,
        },
        t_sync: cfg.t_sync,
        t_end: cfg.t_end,
    };
    result.metrics = sync_error_metrics(&result, cfg.settle)?;
    Ok(result)
}

/// The master's clean drive-variable waveform, sampled at every step.
pub fn master_drive(cfg: &SyncConfig) -> Result<Waveform> {
    cfg.validate()?;
    let n_steps = step_count(cfg.t_end, cfg.dt);
    let mut s = cfg.master_init;
    let mut samples = Vec::with_capacity(n_steps as usize + 1);
    let pick = |s: &State| match cfg.drive {
        DriveVar::VC1 => s.v_c1,
        DriveVar::VC2 => s.v_c2,
    };
    samples.push(pick(&s));
    for k in 0..n_steps {
        s = crate::integrate::step_rk4(&s, k as f64 * cfg.dt, cfg.dt, &cfg.master)?;
        if !s.is_finite() || s.v_c1.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Divergence {
                t: (k + 1) as f64 * cfg.dt,
            });
        }
        samples.push(pick(&s));
    }
    Ok(Waveform {
        t0: 0.0,
        dt: cfg.dt,
        samples,
    })
}

/// Default cap on message amplitude relative to the carrier RMS.
pub const DEFAULT_MASK_RATIO: f64 = 0.05;

/// Masked channel plus the pieces needed to audit it.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedChannel {
    pub channel: Waveform,
    pub clean_drive: Waveform,
    /// Carrier RMS over [t_sync, t_end].
    pub drive_rms: f64,
    /// Message peak exceeded mask_ratio x drive RMS; recovery quality degrades.
    pub over_amplitude: bool,
}

/// Additive masking: channel(t) = drive(t) + message(t).
///
/// The message must share the drive grid (t0 = 0, dt = cfg.dt, same length).
pub fn mask_transmit(message: &Waveform, cfg: &SyncConfig) -> Result<MaskedChannel> {
    mask_transmit_with_ratio(message, cfg, DEFAULT_MASK_RATIO)
}

pub fn mask_transmit_with_ratio(
    message: &Waveform,
    cfg: &SyncConfig,
    mask_ratio: f64,
) -> Result<MaskedChannel> {
    let drive = master_drive(cfg)?;
    if message.len() != drive.len() || (message.dt - drive.dt).abs() > 1e-15 {
        return Err(Error::InvalidParam(format!(
            "message grid ({} samples at dt {}) does not match the drive grid ({} at {})",
            message.len(),
            message.dt,
            drive.len(),
            drive.dt
        )));
    }
    let drive_rms = drive.rms_window(cfg.t_sync, cfg.t_end)?;
    let peak = message.samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let over_amplitude = peak > mask_ratio * drive_rms;
    let channel = Waveform {
        t0: drive.t0,
        dt: drive.dt,
        samples: drive
            .samples
            .iter()
            .zip(&message.samples)
            .map(|(d, m)| d + m)
            .collect(),
    };
    Ok(MaskedChannel {
        channel,
        clean_drive: drive,
        drive_rms,
        over_amplitude,
    })
}

/// Drive the slave with the channel and subtract its regenerated drive
/// variable: recovered(t) = channel(t) - regenerated(t). Valid after
/// t_sync + settle.
///
/// The response subsystem takes the channel in place of the drive variable;
/// the drive variable itself is regenerated by the slave's remaining
/// equation, cascaded from the synchronized response states. The
/// `regen_tap` conductance weakly pulls the regenerated node toward the
/// channel: without it the N-shaped nonlinearity lets the regeneration lock
/// onto the mirror-image branch and stay there on single-scroll carriers.
pub fn recover_message(channel: &Waveform, cfg: &SyncConfig) -> Result<Waveform> {
    cfg.validate()?;
    if channel.len() < 2 {
        return Err(Error::InvalidParam("channel too short".to_string()));
    }
    let dt = channel.dt;
    let n_steps = channel.len() - 1;
    let switch_step = step_count(cfg.t_sync, dt).min(n_steps as u64);
    let p = &cfg.slave;

    // Channel value at a possibly half-step time, by linear interpolation.
    let drive_at = |steps: f64| -> f64 {
        let i = steps.floor() as usize;
        let frac = steps - i as f64;
        if i + 1 >= channel.len() {
            channel.samples[channel.len() - 1]
        } else if frac == 0.0 {
            channel.samples[i]
        } else {
            channel.samples[i] * (1.0 - frac) + channel.samples[i + 1] * frac
        }
    };

    let mut y = [cfg.slave_init.v_c1, cfg.slave_init.v_c2, cfg.slave_init.i_l];
    let mut regenerated = Vec::with_capacity(channel.len());
    let pick = |y: &[f64; 3]| match cfg.drive {
        DriveVar::VC1 => y[0],
        DriveVar::VC2 => y[1],
    };
    regenerated.push(pick(&y));

    for k in 0..n_steps {
        let driven = k as u64 >= switch_step;
        let t = k as f64 * dt;
        y = rk4_array(
            |tt, yy| {
                if !driven {
                    let f = vector_field(&State::new(yy[0], yy[1], yy[2]), p);
                    return [f.v_c1, f.v_c2, f.i_l];
                }
                let s = drive_at(tt / dt);
                match cfg.drive {
                    DriveVar::VC1 => [
                        // Regeneration stage: own nonlinear node driven by the
                        // synchronized tank voltage, plus the stabilizing tap.
                        ((yy[1] - yy[0]) / p.r0 - p.diode.g(yy[0]) + cfg.regen_tap * (s - yy[0]))
                            / p.c1,
                        ((s - yy[1]) / p.r0 + yy[2]) / p.c2,
                        -yy[1] / p.l,
                    ],
                    DriveVar::VC2 => [
                        ((s - yy[0]) / p.r0 - p.diode.g(yy[0])) / p.c1,
                        ((yy[0] - yy[1]) / p.r0 + yy[2] + cfg.regen_tap * (s - yy[1])) / p.c2,
                        -s / p.l,
                    ],
                }
            },
            t,
            dt,
            &y,
        );
        if y.iter()
            .any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT)
        {
            return Err(Error::Divergence { t: t + dt });
        }
        regenerated.push(pick(&y));
    }

    Ok(Waveform {
        t0: channel.t0,
        dt,
        samples: channel
            .samples
            .iter()
            .zip(&regenerated)
            .map(|(c, r)| c - r)
            .collect(),
    })
}

/// Pearson correlation of two equal-length slices.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    if a.is_empty() {
        return 0.0;
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}
