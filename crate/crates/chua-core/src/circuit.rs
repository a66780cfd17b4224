//! Circuit parameter types, the saturating op-amp cell, the composite
//! piecewise-linear diode, and the state equations.
//!
//! All quantities are strict SI (V, A, s, Ω, F, H). The nonlinear resistor is
//! built from two op-amp negative-resistance cells; each cell contributes a
//! three-segment odd I-V curve and their sum is the canonical five-segment
//! diode the rest of the crate works with.

use crate::error::{Error, Result};

/// One op-amp negative-resistance cell: input resistor, feedback resistor,
/// ground-leg resistor, and the output saturation level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    /// Input resistor (Ω), in series with the driven node.
    pub r_in: f64,
    /// Feedback resistor (Ω), output to inverting input.
    pub r_fb: f64,
    /// Ground-leg resistor (Ω), inverting input to ground.
    pub r_gnd: f64,
    /// Op-amp output saturation level (V).
    pub e_sat: f64,
}

impl CellParams {
    pub fn new(r_in: f64, r_fb: f64, r_gnd: f64, e_sat: f64) -> Result<Self> {
        let cell = CellParams {
            r_in,
            r_fb,
            r_gnd,
            e_sat,
        };
        cell.validate()?;
        Ok(cell)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("r_in", self.r_in),
            ("r_fb", self.r_fb),
            ("r_gnd", self.r_gnd),
            ("e_sat", self.e_sat),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParam(format!(
                    "cell {name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Incremental conductance (S) while the op-amp is linear. Negative: the
    /// cell behaves as a negative resistor.
    pub fn inner_slope(&self) -> f64 {
        -self.r_fb / (self.r_in * self.r_gnd)
    }

    /// Incremental conductance (S) once the output saturates; the cell turns
    /// into a plain resistor to a fixed rail.
    pub fn outer_slope(&self) -> f64 {
        1.0 / self.r_in
    }

    /// Input voltage (V) at which the output hits the saturation level.
    pub fn knee(&self) -> f64 {
        self.r_gnd / (self.r_fb + self.r_gnd) * self.e_sat
    }
}

/// Current (A) into one op-amp cell at input voltage `v`.
///
/// Three-segment odd curve: slope `-r_fb/(r_in*r_gnd)` up to the knee,
/// slope `+1/r_in` beyond it, continuous at the corner.
pub fn cell_current(v: f64, cell: &CellParams) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::NonFinite("cell_current"));
    }
    cell.validate()?;
    Ok(cell_current_unchecked(v, cell))
}

fn cell_current_unchecked(v: f64, cell: &CellParams) -> f64 {
    let knee = cell.knee();
    let mag = v.abs();
    let i = if mag <= knee {
        cell.inner_slope() * mag
    } else {
        cell.inner_slope() * knee + cell.outer_slope() * (mag - knee)
    };
    if v < 0.0 {
        -i
    } else {
        i
    }
}

/// Canonical odd piecewise-linear I-V curve: positive breakpoints in
/// ascending order and one conductance per region, innermost first.
#[derive(Debug, Clone, PartialEq)]
pub struct DiodeModel {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
}

impl DiodeModel {
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if slopes.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidParam(format!(
                "diode needs {} slopes for {} breakpoints, got {}",
                breakpoints.len() + 1,
                breakpoints.len(),
                slopes.len()
            )));
        }
        let mut prev = 0.0;
        for &b in &breakpoints {
            if !b.is_finite() || b <= prev {
                return Err(Error::InvalidParam(format!(
                    "diode breakpoints must be finite, positive, strictly ascending, got {breakpoints:?}"
                )));
            }
            prev = b;
        }
        if slopes.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "diode slopes must be finite, got {slopes:?}"
            )));
        }
        Ok(DiodeModel {
            breakpoints,
            slopes,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Conductance (S) of the region containing voltage magnitude `mag`.
    pub fn slope_at(&self, mag: f64) -> f64 {
        let idx = self.breakpoints.iter().take_while(|&&b| mag > b).count();
        self.slopes[idx]
    }

    /// Evaluate the curve. Infallible; callers guarantee `v` is finite.
    /// The curve is continuous by construction (each segment integrates its
    /// slope from the previous corner) and odd: `g(-v) = -g(v)`, `g(0) = 0`.
    pub fn g(&self, v: f64) -> f64 {
        let mag = v.abs();
        let mut i = 0.0;
        let mut start = 0.0;
        for (k, &slope) in self.slopes.iter().enumerate() {
            let end = self.breakpoints.get(k).copied().unwrap_or(f64::INFINITY);
            if mag <= end {
                i += slope * (mag - start);
                break;
            }
            i += slope * (end - start);
            start = end;
        }
        if v < 0.0 {
            -i
        } else {
            i
        }
    }
}

/// Sum the I-V curves of two op-amp cells into one five-segment diode.
///
/// The cell with the smaller knee saturates first, so between the two knees
/// the composite slope mixes one saturated and one linear cell.
pub fn build_diode(cell_a: &CellParams, cell_b: &CellParams) -> Result<DiodeModel> {
    cell_a.validate()?;
    cell_b.validate()?;
    let ka = cell_a.knee();
    let kb = cell_b.knee();
    // Relative knee separation below 1e-9 leaves no middle region to speak of.
    if (ka - kb).abs() <= 1e-9 * ka.max(kb) {
        return Err(Error::DegenerateDiode(format!(
            "cells share a knee at {ka:.6} V; two distinct knees are required"
        )));
    }
    let (first, second) = if kb < ka {
        ((kb, cell_b), (ka, cell_a))
    } else {
        ((ka, cell_a), (kb, cell_b))
    };
    let inner = cell_a.inner_slope() + cell_b.inner_slope();
    let middle = first.1.outer_slope() + second.1.inner_slope();
    let outer = cell_a.outer_slope() + cell_b.outer_slope();
    DiodeModel::new(vec![first.0, second.0], vec![inner, middle, outer])
}

/// Current (A) through the composite diode at voltage `v`.
pub fn diode_current(v: f64, d: &DiodeModel) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::NonFinite("diode_current"));
    }
    Ok(d.g(v))
}

/// Component values of one circuit instance.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitParams {
    /// Inductance (H).
    pub l: f64,
    /// Capacitance at the nonlinear node (F).
    pub c1: f64,
    /// Capacitance at the tank node (F).
    pub c2: f64,
    /// Coupling resistor (Ω) between the two capacitor nodes.
    pub r0: f64,
    /// Composite nonlinear resistor.
    pub diode: DiodeModel,
}

impl CircuitParams {
    pub fn new(l: f64, c1: f64, c2: f64, r0: f64, diode: DiodeModel) -> Result<Self> {
        let p = CircuitParams {
            l,
            c1,
            c2,
            r0,
            diode,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l", self.l),
            ("c1", self.c1),
            ("c2", self.c2),
            ("r0", self.r0),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParam(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Same circuit with a different coupling resistor.
    pub fn with_r0(&self, r0: f64) -> Result<Self> {
        CircuitParams::new(self.l, self.c1, self.c2, r0, self.diode.clone())
    }

    /// Saturation level used by the standard cells (V).
    pub const DEFAULT_E_SAT: f64 = 8.3;

    /// Standard fast cell of the dual-op-amp realization: 220 Ω / 220 Ω / 2.2 kΩ.
    pub fn standard_cell_a(e_sat: f64) -> Result<CellParams> {
        CellParams::new(220.0, 220.0, 2200.0, e_sat)
    }

    /// Standard slow cell of the dual-op-amp realization: 22 kΩ / 22 kΩ / 3.3 kΩ.
    pub fn standard_cell_b(e_sat: f64) -> Result<CellParams> {
        CellParams::new(22_000.0, 22_000.0, 3300.0, e_sat)
    }

    /// The reference design: L = 18 mH, C1 = 10 nF, C2 = 100 nF plus the two
    /// standard cells. `r0` is the knob everything else sweeps.
    pub fn standard(r0: f64, e_sat: f64) -> Result<Self> {
        let diode = build_diode(
            &Self::standard_cell_a(e_sat)?,
            &Self::standard_cell_b(e_sat)?,
        )?;
        CircuitParams::new(18e-3, 10e-9, 100e-9, r0, diode)
    }
}

impl Default for CircuitParams {
    fn default() -> Self {
        CircuitParams::standard(1800.0, Self::DEFAULT_E_SAT).expect("standard values are valid")
    }
}

/// Instantaneous circuit state: the two capacitor voltages and the inductor
/// current. Also reused as the componentwise time-derivative in the
/// integrator (V/s, V/s, A/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub v_c1: f64,
    pub v_c2: f64,
    pub i_l: f64,
}

impl State {
    pub fn new(v_c1: f64, v_c2: f64, i_l: f64) -> Self {
        State { v_c1, v_c2, i_l }
    }

    pub fn is_finite(&self) -> bool {
        self.v_c1.is_finite() && self.v_c2.is_finite() && self.i_l.is_finite()
    }

    pub fn scaled(&self, k: f64) -> State {
        State::new(self.v_c1 * k, self.v_c2 * k, self.i_l * k)
    }

    pub fn plus(&self, other: &State) -> State {
        State::new(
            self.v_c1 + other.v_c1,
            self.v_c2 + other.v_c2,
            self.i_l + other.i_l,
        )
    }

    pub fn minus(&self, other: &State) -> State {
        State::new(
            self.v_c1 - other.v_c1,
            self.v_c2 - other.v_c2,
            self.i_l - other.i_l,
        )
    }

    pub fn neg(&self) -> State {
        State::new(-self.v_c1, -self.v_c2, -self.i_l)
    }
}

/// Right-hand side of the state equations:
///
/// ```text
/// dV_c1/dt = ((v_c2 - v_c1)/r0 - g(v_c1)) / c1
/// dV_c2/dt = ((v_c1 - v_c2)/r0 + i_l) / c2
/// dI_l/dt  = -v_c2 / l
/// ```
pub fn vector_field(s: &State, p: &CircuitParams) -> State {
    let g = p.diode.g(s.v_c1);
    State {
        v_c1: ((s.v_c2 - s.v_c1) / p.r0 - g) / p.c1,
        v_c2: ((s.v_c1 - s.v_c2) / p.r0 + s.i_l) / p.c2,
        i_l: -s.v_c2 / p.l,
    }
}
