//! TOML experiment configuration: circuit component values plus
//! command-specific sections, with strict validation (unknown keys are
//! rejected) and a serializer used to echo the effective configuration of a
//! run for exact reproduction.

use crate::analysis::{ClassifyConfig, LyapunovConfig};
use crate::audio::{Modulation, ModulationKind, OutputNode};
use crate::circuit::{build_diode, CellParams, CircuitParams};
use crate::error::{Error, Result};
use crate::sync::{Coupling, DriveVar, Mismatch, SyncConfig};
use serde::{Deserialize, Serialize};

/// One op-amp cell's resistors (Ω). When a cell table appears in a config
/// file all three resistors must be given; the two cells have different
/// standard values, so there is no shared per-field default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSection {
    pub r_in: f64,
    pub r_fb: f64,
    pub r_gnd: f64,
}

impl CellSection {
    fn cell(&self, e_sat: f64) -> Result<CellParams> {
        CellParams::new(self.r_in, self.r_fb, self.r_gnd, e_sat)
    }
}

/// Circuit component values, SI units. Defaults are the standard design:
/// L = 18 mH, C1 = 10 nF, C2 = 100 nF, cells 220/220/2.2k and 22k/22k/3.3k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitSection {
    pub l: f64,
    pub c1: f64,
    pub c2: f64,
    pub r0: f64,
    pub e_sat: f64,
    pub cell_a: CellSection,
    pub cell_b: CellSection,
}

impl Default for CircuitSection {
    fn default() -> Self {
        CircuitSection {
            l: 18e-3,
            c1: 10e-9,
            c2: 100e-9,
            r0: 1800.0,
            e_sat: CircuitParams::DEFAULT_E_SAT,
            cell_a: CellSection {
                r_in: 220.0,
                r_fb: 220.0,
                r_gnd: 2200.0,
            },
            cell_b: CellSection {
                r_in: 22_000.0,
                r_fb: 22_000.0,
                r_gnd: 3300.0,
            },
        }
    }
}

impl CircuitSection {
    pub fn to_params(&self) -> Result<CircuitParams> {
        let diode = build_diode(
            &self.cell_a.cell(self.e_sat)?,
            &self.cell_b.cell(self.e_sat)?,
        )?;
        CircuitParams::new(self.l, self.c1, self.c2, self.r0, diode)
    }
}

/// Integration settings shared by the commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: u32,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            dt: crate::integrate::DEFAULT_DT,
            t_end: 0.1,
            record_every: crate::integrate::DEFAULT_RECORD_EVERY,
        }
    }
}

/// Regime classification knobs; see the analysis module for semantics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub transient: f64,
    pub window: f64,
    pub cluster_tol_frac: f64,
    pub n_max: u32,
    pub lambda_periodic_max: f64,
    pub lambda_chaos_min: f64,
    pub lyapunov_d0: f64,
    pub lyapunov_renorm_interval: f64,
    pub lyapunov_total_time: f64,
    pub lyapunov_transient: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let c = ClassifyConfig::default();
        AnalysisSection {
            transient: c.transient,
            window: c.window,
            cluster_tol_frac: c.cluster_tol_frac,
            n_max: c.n_max,
            lambda_periodic_max: c.lambda_periodic_max,
            lambda_chaos_min: c.lambda_chaos_min,
            lyapunov_d0: c.lyapunov.d0,
            lyapunov_renorm_interval: c.lyapunov.renorm_interval,
            lyapunov_total_time: c.lyapunov.total_time,
            lyapunov_transient: c.lyapunov.transient,
        }
    }
}

impl AnalysisSection {
    pub fn to_classify_config(&self, sim: &SimSection) -> ClassifyConfig {
        ClassifyConfig {
            transient: self.transient,
            window: self.window,
            dt: sim.dt,
            record_every: sim.record_every,
            cluster_tol_frac: self.cluster_tol_frac,
            n_max: self.n_max,
            lambda_periodic_max: self.lambda_periodic_max,
            lambda_chaos_min: self.lambda_chaos_min,
            lyapunov: LyapunovConfig {
                d0: self.lyapunov_d0,
                renorm_interval: self.lyapunov_renorm_interval,
                total_time: self.lyapunov_total_time,
                transient: self.lyapunov_transient,
                dt: sim.dt,
            },
            ..ClassifyConfig::default()
        }
    }
}

/// Coupling-resistor values classified by the sweep command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub r0_values: Vec<f64>,
    /// Worker threads; 0 means one per logical core.
    pub workers: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            r0_values: vec![
                2200.0, 1900.0, 1870.0, 1850.0, 1800.0, 1700.0, 1500.0, 1000.0,
            ],
            workers: 0,
        }
    }
}

/// Switch-experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyncSection {
    pub r0: f64,
    pub t_sync: f64,
    pub t_end: f64,
    pub settle: f64,
    /// "resistive" or "substitution".
    pub coupling: String,
    /// Coupling resistance for the resistive mode (Ω).
    pub r_c: f64,
    /// "v_c1" or "v_c2".
    pub drive: String,
    /// Slave-side component mismatch: none, c=5%, r0=5%, l=5%.
    pub mismatch: String,
}

impl Default for SyncSection {
    fn default() -> Self {
        SyncSection {
            r0: 1800.0,
            t_sync: 0.1,
            t_end: 0.2,
            settle: 0.02,
            coupling: "resistive".to_string(),
            r_c: crate::sync::DEFAULT_COUPLING_R,
            drive: "v_c2".to_string(),
            mismatch: "none".to_string(),
        }
    }
}

fn parse_drive(s: &str) -> Result<DriveVar> {
    match s {
        "v_c1" => Ok(DriveVar::VC1),
        "v_c2" => Ok(DriveVar::VC2),
        other => Err(Error::InvalidParam(format!(
            "unknown drive variable {other:?}; expected v_c1 or v_c2"
        ))),
    }
}

impl SyncSection {
    pub fn to_sync_config(&self, circuit: &CircuitSection, sim: &SimSection) -> Result<SyncConfig> {
        let mut section = circuit.clone();
        section.r0 = self.r0;
        let master = section.to_params()?;
        let mismatch: Mismatch = self.mismatch.parse()?;
        let slave = mismatch.apply(&master)?;
        let coupling = match self.coupling.as_str() {
            "substitution" => Coupling::Substitution,
            "resistive" => Coupling::Resistive { r_c: self.r_c },
            other => {
                return Err(Error::InvalidParam(format!(
                    "unknown coupling {other:?}; expected substitution or resistive"
                )))
            }
        };
        let cfg = SyncConfig {
            master,
            slave,
            t_sync: self.t_sync,
            t_end: self.t_end,
            settle: self.settle,
            drive: parse_drive(&self.drive)?,
            coupling,
            dt: sim.dt,
            record_every: sim.record_every,
            ..SyncConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Masking communication settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommSection {
    pub r0: f64,
    pub t_sync: f64,
    pub t_end: f64,
    pub settle: f64,
    pub mask_ratio: f64,
    /// Built-in tone generator; used when no message file is given.
    pub tone_freq: f64,
    /// Tone amplitude as a fraction of the carrier RMS.
    pub tone_ratio: f64,
    /// Message CSV path (`t,value` rows); overrides the tone when set.
    pub message_file: Option<String>,
    pub regen_tap: f64,
    pub mismatch: String,
}

impl Default for CommSection {
    fn default() -> Self {
        CommSection {
            r0: crate::sync::DEFAULT_MASKING_R0,
            t_sync: 0.1,
            t_end: 0.2,
            settle: 0.02,
            mask_ratio: crate::sync::DEFAULT_MASK_RATIO,
            tone_freq: 500.0,
            tone_ratio: 0.02,
            message_file: None,
            regen_tap: crate::sync::DEFAULT_REGEN_TAP,
            mismatch: "none".to_string(),
        }
    }
}

impl CommSection {
    pub fn to_sync_config(&self, circuit: &CircuitSection, sim: &SimSection) -> Result<SyncConfig> {
        let mut section = circuit.clone();
        section.r0 = self.r0;
        let master = section.to_params()?;
        let mismatch: Mismatch = self.mismatch.parse()?;
        let slave = mismatch.apply(&master)?;
        let cfg = SyncConfig {
            master,
            slave,
            t_sync: self.t_sync,
            t_end: self.t_end,
            settle: self.settle,
            dt: sim.dt,
            regen_tap: self.regen_tap,
            ..SyncConfig::masking()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Sound synthesis settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AudioSection {
    /// "staircase" or "sine".
    pub mode: String,
    pub levels: Vec<f64>,
    pub center: f64,
    pub depth: f64,
    pub freq: f64,
    pub duration: f64,
    pub rate: u32,
    /// v_c1, v_c2 or i_l.
    pub node: String,
}

impl Default for AudioSection {
    fn default() -> Self {
        AudioSection {
            mode: "staircase".to_string(),
            levels: vec![2000.0, 1800.0, 1600.0],
            center: 1850.0,
            depth: 150.0,
            freq: 100.0,
            duration: 1.0,
            rate: 44_100,
            node: "v_c1".to_string(),
        }
    }
}

impl AudioSection {
    pub fn to_modulation(&self) -> Result<Modulation> {
        let kind = match self.mode.as_str() {
            "staircase" => ModulationKind::Staircase {
                levels: self.levels.clone(),
                freq: self.freq,
            },
            "sine" => ModulationKind::Sine {
                center: self.center,
                depth: self.depth,
                freq: self.freq,
            },
            other => {
                return Err(Error::InvalidParam(format!(
                    "unknown modulation mode {other:?}; expected staircase or sine"
                )))
            }
        };
        let m = Modulation {
            kind,
            duration: self.duration,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn to_node(&self) -> Result<OutputNode> {
        self.node.parse()
    }
}

/// Whole experiment file. Every section has defaults, so an empty file is a
/// valid configuration of the reference circuit.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub circuit: CircuitSection,
    pub sim: SimSection,
    pub analysis: AnalysisSection,
    pub sweep: SweepSection,
    pub sync: SyncSection,
    pub comm: CommSection,
    pub audio: AudioSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::InvalidParam(format!("config parse: {e}")))?;
        cfg.circuit.to_params()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_config_is_reference_circuit() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        let p = cfg.circuit.to_params().unwrap();
        assert_eq!(p, CircuitParams::default());
    }

    #[test]
    fn dotted_keys_reach_cells() {
        let cfg = ExperimentConfig::from_toml_str(
            "circuit.r0 = 2200.0\n\
             circuit.cell_a = { r_in = 220.0, r_fb = 220.0, r_gnd = 2000.0 }\n",
        )
        .unwrap();
        assert_eq!(cfg.circuit.r0, 2200.0);
        assert_eq!(cfg.circuit.cell_a.r_gnd, 2000.0);
        let p = cfg.circuit.to_params().unwrap();
        // Knee of cell A moves with r_gnd: 2000/2220 * 8.3.
        assert_relative_eq!(
            p.diode.breakpoints()[1],
            2000.0 / 2220.0 * 8.3,
            max_relative = 1e-12
        );
    }

    #[test]
    fn partial_cell_spec_rejected() {
        assert!(ExperimentConfig::from_toml_str("circuit.cell_a.r_gnd = 2000.0").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml_str("circuit.resistance = 5.0").is_err());
        assert!(ExperimentConfig::from_toml_str("[nosuch]\nx = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("sim.dt_record = 1e-6").is_err());
    }

    #[test]
    fn invalid_component_values_rejected() {
        assert!(ExperimentConfig::from_toml_str("circuit.r0 = 0.0").is_err());
        assert!(ExperimentConfig::from_toml_str("circuit.l = -1.0").is_err());
    }

    #[test]
    fn toml_roundtrip_preserves_config() {
        let mut cfg = ExperimentConfig::default();
        cfg.circuit.r0 = 1234.5;
        cfg.sweep.r0_values = vec![2000.0, 1900.0];
        cfg.sync.mismatch = "c=5%".to_string();
        let text = cfg.to_toml_string();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn sync_section_builds_mismatched_slave() {
        let mut cfg = ExperimentConfig::default();
        cfg.sync.mismatch = "r0=5%".to_string();
        let sc = cfg.sync.to_sync_config(&cfg.circuit, &cfg.sim).unwrap();
        assert_relative_eq!(sc.slave.r0, 1800.0 * 1.05, max_relative = 1e-12);
        assert_eq!(sc.master.r0, 1800.0);
    }

    #[test]
    fn mismatch_parser_forms() {
        use crate::sync::Mismatch;
        assert_eq!("none".parse::<Mismatch>().unwrap(), Mismatch::None);
        assert_eq!("c=5%".parse::<Mismatch>().unwrap(), Mismatch::C(0.05));
        assert_eq!("r0=0.05".parse::<Mismatch>().unwrap(), Mismatch::R0(0.05));
        assert_eq!("l = 2%".parse::<Mismatch>().unwrap(), Mismatch::L(0.02));
        assert!("q=5%".parse::<Mismatch>().is_err());
        assert!("c~5".parse::<Mismatch>().is_err());
    }

    #[test]
    fn audio_section_modes() {
        let mut cfg = ExperimentConfig::default();
        assert!(matches!(
            cfg.audio.to_modulation().unwrap().kind,
            ModulationKind::Staircase { .. }
        ));
        cfg.audio.mode = "sine".to_string();
        assert!(matches!(
            cfg.audio.to_modulation().unwrap().kind,
            ModulationKind::Sine { .. }
        ));
        cfg.audio.mode = "square".to_string();
        assert!(cfg.audio.to_modulation().is_err());
    }
}
