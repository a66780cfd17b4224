//! Sound synthesis by coupling-resistor modulation: staircase or sine
//! waveforms drive the regime of the circuit, the chosen node is decimated
//! to audio rate, normalized, and written as a 16-bit PCM WAV file.

use crate::circuit::{CircuitParams, State};
use crate::error::{Error, Result};
use crate::integrate::{decimate_series, simulate, Action, R0Waveform, Schedule};

/// Transient discarded before the audible part starts (s).
pub const TRANSIENT_DISCARD: f64 = 0.01;
/// Peak level clips are normalized to; leaves quantization headroom.
pub const NORMALIZED_PEAK: f64 = 0.9;
/// Pre-normalization peak (V) below which a clip counts as silent.
pub const SILENCE_PEAK: f64 = 1e-9;

/// Coupling-resistor modulation program.
#[derive(Debug, Clone, PartialEq)]
pub enum ModulationKind {
    /// Cycle through resistance levels, each held 1/(freq * levels.len()).
    Staircase { levels: Vec<f64>, freq: f64 },
    /// r0(t) = center + depth * sin(2π f t).
    Sine { center: f64, depth: f64, freq: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Modulation {
    pub kind: ModulationKind,
    pub duration: f64,
}

impl Modulation {
    /// Default staircase: three levels spanning the periodic, chaotic, and
    /// double-scroll regimes at 100 Hz.
    pub fn default_staircase(duration: f64) -> Modulation {
        Modulation {
            kind: ModulationKind::Staircase {
                levels: vec![2000.0, 1800.0, 1600.0],
                freq: 100.0,
            },
            duration,
        }
    }

    /// Default sine: 1850 ± 150 Ω at 100 Hz, sweeping across the regime map.
    pub fn default_sine(duration: f64) -> Modulation {
        Modulation {
            kind: ModulationKind::Sine {
                center: 1850.0,
                depth: 150.0,
                freq: 100.0,
            },
            duration,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration >= 0.01) {
            return Err(Error::InvalidParam(format!(
                "modulation duration must be >= 10 ms, got {}",
                self.duration
            )));
        }
        match &self.kind {
            ModulationKind::Staircase { levels, freq } => {
                if levels.is_empty() {
                    return Err(Error::InvalidParam(
                        "staircase needs at least one level".to_string(),
                    ));
                }
                if levels.iter().any(|r| !r.is_finite() || *r <= 0.0) {
                    return Err(Error::InvalidParam(format!(
                        "staircase levels must be > 0, got {levels:?}"
                    )));
                }
                if !(freq.is_finite() && *freq > 0.0) {
                    return Err(Error::InvalidParam(format!(
                        "staircase frequency must be > 0, got {freq}"
                    )));
                }
            }
            ModulationKind::Sine {
                center,
                depth,
                freq,
            } => {
                if !(center.is_finite() && *center > 0.0) {
                    return Err(Error::InvalidParam(format!(
                        "sine center must be > 0, got {center}"
                    )));
                }
                if !(depth.is_finite() && *depth >= 0.0 && depth < center) {
                    return Err(Error::InvalidParam(format!(
                        "sine depth must satisfy 0 <= depth < center, got {depth}"
                    )));
                }
                if !(freq.is_finite() && *freq > 0.0) {
                    return Err(Error::InvalidParam(format!(
                        "sine frequency must be > 0, got {freq}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Which recorded node becomes the audio signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputNode {
    /// Nonlinear-node voltage; largest dynamic range across regimes.
    #[default]
    VC1,
    VC2,
    IL,
}

impl OutputNode {
    fn pick(self, s: &State) -> f64 {
        match self {
            OutputNode::VC1 => s.v_c1,
            OutputNode::VC2 => s.v_c2,
            OutputNode::IL => s.i_l,
        }
    }
}

impl std::str::FromStr for OutputNode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v_c1" => Ok(OutputNode::VC1),
            "v_c2" => Ok(OutputNode::VC2),
            "i_l" => Ok(OutputNode::IL),
            other => Err(Error::InvalidParam(format!(
                "unknown output node {other:?}; expected v_c1, v_c2 or i_l"
            ))),
        }
    }
}

/// Build the coupling-resistor schedule for a modulation program.
pub fn modulation_schedule(m: &Modulation) -> Result<Schedule> {
    m.validate()?;
    match &m.kind {
        ModulationKind::Staircase { levels, freq } => {
            let hold = 1.0 / (freq * levels.len() as f64);
            let mut events = Vec::new();
            let mut i = 0usize;
            loop {
                let t = i as f64 * hold;
                if t >= m.duration {
                    break;
                }
                events.push((t, Action::SetR0(levels[i % levels.len()])));
                i += 1;
            }
            Ok(Schedule {
                events,
                r0_waveform: None,
            })
        }
        ModulationKind::Sine {
            center,
            depth,
            freq,
        } => Ok(Schedule {
            events: Vec::new(),
            r0_waveform: Some(R0Waveform::Sine {
                center: *center,
                depth: *depth,
                freq: *freq,
            }),
        }),
    }
}

/// Normalized mono audio.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub rate: u32,
    /// Samples in [-1, 1].
    pub samples: Vec<f64>,
}

impl AudioClip {
    pub fn validate(&self) -> Result<()> {
        if self.rate == 0 {
            return Err(Error::InvalidParam("audio rate must be > 0".to_string()));
        }
        if self.samples.iter().any(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(Error::InvalidParam(
                "audio samples must be finite and within [-1, 1]".to_string(),
            ));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate as f64
    }
}

/// Simulate under the modulation, discard the transient, decimate the chosen
/// node to `rate`, remove the DC offset, and normalize the peak to 0.9.
///
/// A pre-normalization peak under 1e-9 V (an equilibrium regime, after the
/// transient dies) is a degenerate-audio error: there is nothing to hear.
pub fn synthesize(
    p: &CircuitParams,
    m: &Modulation,
    rate: u32,
    node: OutputNode,
) -> Result<AudioClip> {
    m.validate()?;
    let dt = crate::integrate::DEFAULT_DT;
    let record_every = crate::integrate::DEFAULT_RECORD_EVERY;
    let record_rate = 1.0 / (dt * record_every as f64);
    if rate == 0 || rate as f64 > record_rate {
        return Err(Error::InvalidParam(format!(
            "audio rate {rate} Hz must be positive and at most the recording rate {record_rate} Hz"
        )));
    }
    let sched = modulation_schedule(m)?;
    let tr = simulate(
        p,
        &State::new(0.1, 0.0, 0.0),
        m.duration,
        dt,
        &sched,
        record_every,
    )?;
    let audible = tr.discard_before(TRANSIENT_DISCARD);
    let series: Vec<f64> = audible.samples.iter().map(|s| node.pick(s)).collect();
    let decimated = decimate_series(&series, record_rate, rate as f64)?;
    if decimated.is_empty() {
        return Err(Error::EmptyWindow(
            "no audio samples after transient discard".to_string(),
        ));
    }
    let mean = decimated.iter().sum::<f64>() / decimated.len() as f64;
    let peak = decimated
        .iter()
        .map(|x| (x - mean).abs())
        .fold(0.0f64, f64::max);
    if peak < SILENCE_PEAK {
        return Err(Error::DegenerateAudio { peak });
    }
    let gain = NORMALIZED_PEAK / peak;
    Ok(AudioClip {
        rate,
        samples: decimated.iter().map(|x| (x - mean) * gain).collect(),
    })
}

/// Write a 44-byte RIFF/WAVE header plus 16-bit little-endian PCM samples
/// (value v maps to round(v * 32767)). Returns the byte count written.
pub fn write_wav<W: std::io::Write>(clip: &AudioClip, w: &mut W) -> Result<u64> {
    clip.validate()?;
    let bytes = wav_bytes(clip);
    w.write_all(&bytes)?;
    Ok(bytes.len() as u64)
}

/// The exact bytes `write_wav` produces.
pub fn wav_bytes(clip: &AudioClip) -> Vec<u8> {
    let data_len = (clip.samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes()); // PCM fmt chunk size
    out.extend_from_slice(&1u16.to_le_bytes()); // format code 1 = PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&clip.rate.to_le_bytes());
    out.extend_from_slice(&(clip.rate * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &clip.samples {
        let q = (s * 32767.0).round() as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}

/// Parse a WAV produced by `write_wav`; samples come back dequantized.
pub fn read_wav<R: std::io::Read>(r: &mut R) -> Result<AudioClip> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let bad = |msg: &str| Error::InvalidParam(format!("invalid wav: {msg}"));
    if bytes.len() < 44 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(bad("missing RIFF/WAVE header"));
    }
    if &bytes[12..16] != b"fmt " || &bytes[36..40] != b"data" {
        return Err(bad("expected canonical fmt/data layout"));
    }
    let format = u16::from_le_bytes([bytes[20], bytes[21]]);
    let channels = u16::from_le_bytes([bytes[22], bytes[23]]);
    let bits = u16::from_le_bytes([bytes[34], bytes[35]]);
    if format != 1 || channels != 1 || bits != 16 {
        return Err(bad("expected 16-bit mono PCM"));
    }
    let rate = u32::from_le_bytes([bytes[24], bytes[25], bytes[26], bytes[27]]);
    let data_len = u32::from_le_bytes([bytes[40], bytes[41], bytes[42], bytes[43]]) as usize;
    if bytes.len() < 44 + data_len || !data_len.is_multiple_of(2) {
        return Err(bad("truncated data chunk"));
    }
    let samples = bytes[44..44 + data_len]
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32767.0)
        .collect();
    Ok(AudioClip { rate, samples })
}
