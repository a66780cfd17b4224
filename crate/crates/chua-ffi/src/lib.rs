//! C ABI for the circuit laboratory. Handles are opaque pointers created and
//! released here; every fallible call returns a `ChuaStatus` and writes its
//! result through out-pointers. The header is generated by cbindgen into
//! `include/chua.h` at build time.

use std::ffi::c_char;

use chua_core::analysis::{
    classify_regime, largest_lyapunov, ClassifyConfig, LyapunovConfig, RegimeTag,
};
use chua_core::circuit::{build_diode, CellParams, CircuitParams, State};
use chua_core::error::Error;
use chua_core::integrate::{simulate, Schedule, Trajectory};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChuaStatus {
    Ok = 0,
    /// A parameter failed validation (non-positive component, bad rate, ...).
    InvalidArgument = 1,
    /// A required pointer was null.
    NullPointer = 2,
    /// The trajectory left the physical range.
    Divergence = 3,
    /// Classification evidence was contradictory; try a longer window.
    Inconclusive = 4,
    /// Synthesized audio had no signal content.
    DegenerateAudio = 5,
    Io = 6,
}

impl From<&Error> for ChuaStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Divergence { .. } => ChuaStatus::Divergence,
            Error::Inconclusive(_) => ChuaStatus::Inconclusive,
            Error::DegenerateAudio { .. } => ChuaStatus::DegenerateAudio,
            Error::Io(_) => ChuaStatus::Io,
            _ => ChuaStatus::InvalidArgument,
        }
    }
}

/// Long-run behavior classes; `Periodic` carries its period separately.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChuaRegime {
    Equilibrium = 0,
    Periodic = 1,
    SpiralChaos = 2,
    DoubleScroll = 3,
    SaturatedCycle = 4,
}

/// Circuit state: the two capacitor voltages (V) and inductor current (A).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChuaState {
    pub v_c1: f64,
    pub v_c2: f64,
    pub i_l: f64,
}

impl From<ChuaState> for State {
    fn from(s: ChuaState) -> State {
        State::new(s.v_c1, s.v_c2, s.i_l)
    }
}

impl From<State> for ChuaState {
    fn from(s: State) -> ChuaState {
        ChuaState {
            v_c1: s.v_c1,
            v_c2: s.v_c2,
            i_l: s.i_l,
        }
    }
}

/// Opaque circuit handle.
pub struct ChuaCircuit {
    inner: CircuitParams,
}

/// Opaque recorded-trajectory handle.
pub struct ChuaTrajectory {
    inner: Trajectory,
}

/// NUL-terminated library version string; static storage, do not free.
#[no_mangle]
pub extern "C" fn chua_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Create the reference design (L = 18 mH, C1 = 10 nF, C2 = 100 nF, standard
/// op-amp cells) with the given coupling resistance and saturation level.
///
/// # Safety
/// `out` must be a valid pointer; the returned handle must be released with
/// `chua_circuit_free`.
#[no_mangle]
pub unsafe extern "C" fn chua_circuit_standard(
    r0: f64,
    e_sat: f64,
    out: *mut *mut ChuaCircuit,
) -> ChuaStatus {
    if out.is_null() {
        return ChuaStatus::NullPointer;
    }
    match CircuitParams::standard(r0, e_sat) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(ChuaCircuit { inner }));
            ChuaStatus::Ok
        }
        Err(e) => (&e).into(),
    }
}

/// Create a circuit from explicit component values: reactive elements, the
/// coupling resistor, the op-amp saturation level, and both cells' resistors.
///
/// # Safety
/// `out` must be a valid pointer; release the handle with `chua_circuit_free`.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn chua_circuit_new(
    l: f64,
    c1: f64,
    c2: f64,
    r0: f64,
    e_sat: f64,
    cell_a_r_in: f64,
    cell_a_r_fb: f64,
    cell_a_r_gnd: f64,
    cell_b_r_in: f64,
    cell_b_r_fb: f64,
    cell_b_r_gnd: f64,
    out: *mut *mut ChuaCircuit,
) -> ChuaStatus {
    if out.is_null() {
        return ChuaStatus::NullPointer;
    }
    let build = || -> Result<CircuitParams, Error> {
        let a = CellParams::new(cell_a_r_in, cell_a_r_fb, cell_a_r_gnd, e_sat)?;
        let b = CellParams::new(cell_b_r_in, cell_b_r_fb, cell_b_r_gnd, e_sat)?;
        CircuitParams::new(l, c1, c2, r0, build_diode(&a, &b)?)
    };
    match build() {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(ChuaCircuit { inner }));
            ChuaStatus::Ok
        }
        Err(e) => (&e).into(),
    }
}

/// Swap the coupling resistor of an existing circuit.
///
/// # Safety
/// `circuit` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn chua_circuit_set_r0(circuit: *mut ChuaCircuit, r0: f64) -> ChuaStatus {
    let Some(circuit) = circuit.as_mut() else {
        return ChuaStatus::NullPointer;
    };
    match circuit.inner.with_r0(r0) {
        Ok(updated) => {
            circuit.inner = updated;
            ChuaStatus::Ok
        }
        Err(e) => (&e).into(),
    }
}

/// Release a circuit handle. Null is ignored.
///
/// # Safety
/// `circuit` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn chua_circuit_free(circuit: *mut ChuaCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Current (A) through the composite nonlinear resistor at voltage `v`.
///
/// # Safety
/// `circuit` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn chua_diode_current(
    circuit: *const ChuaCircuit,
    v: f64,
    out: *mut f64,
) -> ChuaStatus {
    let (Some(circuit), false) = (circuit.as_ref(), out.is_null()) else {
        return ChuaStatus::NullPointer;
    };
    match chua_core::diode_current(v, &circuit.inner.diode) {
        Ok(i) => {
            *out = i;
            ChuaStatus::Ok
        }
        Err(e) => (&e).into(),
    }
}

/// Time-derivative of the state under the circuit equations.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chua_vector_field(
    circuit: *const ChuaCircuit,
    state: *const ChuaState,
    out: *mut ChuaState,
) -> ChuaStatus {
    let (Some(circuit), Some(state), false) = (circuit.as_ref(), state.as_ref(), out.is_null())
    else {
        return ChuaStatus::NullPointer;
    };
    let s: State = (*state).into();
    if !s.is_finite() {
        return ChuaStatus::InvalidArgument;
    }
    *out = chua_core::vector_field(&s, &circuit.inner).into();
    ChuaStatus::Ok
}

/// Integrate from `init` over `t_end` seconds with fixed step `dt`, recording
/// every `record_every`-th step.
///
/// # Safety
/// Pointers must be valid; release the trajectory with `chua_trajectory_free`.
#[no_mangle]
pub unsafe extern "C" fn chua_simulate(
    circuit: *const ChuaCircuit,
    init: *const ChuaState,
    t_end: f64,
    dt: f64,
    record_every: u32,
    out: *mut *mut ChuaTrajectory,
) -> ChuaStatus {
    let (Some(circuit), Some(init), false) = (circuit.as_ref(), init.as_ref(), out.is_null())
    else {
        return ChuaStatus::NullPointer;
    };
    match simulate(
        &circuit.inner,
        &(*init).into(),
        t_end,
        dt,
        &Schedule::empty(),
        record_every,
    ) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(ChuaTrajectory { inner }));
            ChuaStatus::Ok
        }
        Err(e) => (&e).into(),
    }
}

/// Number of recorded samples.
///
/// # Safety
/// `trajectory` must be a live handle; null yields 0.
#[no_mangle]
pub unsafe extern "C" fn chua_trajectory_len(trajectory: *const ChuaTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.inner.len())
}

/// Spacing between recorded samples (s).
///
/// # Safety
/// `trajectory` must be a live handle; null yields 0.
#[no_mangle]
pub unsafe extern "C" fn chua_trajectory_dt(trajectory: *const ChuaTrajectory) -> f64 {
    trajectory.as_ref().map_or(0.0, |t| t.inner.dt_record)
}

/// Copy one recorded sample.
///
/// # Safety
/// Pointers must be valid; `index` must be below `chua_trajectory_len`.
#[no_mangle]
pub unsafe extern "C" fn chua_trajectory_sample(
    trajectory: *const ChuaTrajectory,
    index: usize,
    out: *mut ChuaState,
) -> ChuaStatus {
    let (Some(trajectory), false) = (trajectory.as_ref(), out.is_null()) else {
        return ChuaStatus::NullPointer;
    };
    match trajectory.inner.samples.get(index) {
        Some(s) => {
            *out = (*s).into();
            ChuaStatus::Ok
        }
        None => ChuaStatus::InvalidArgument,
    }
}

/// Release a trajectory handle. Null is ignored.
///
/// # Safety
/// `trajectory` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn chua_trajectory_free(trajectory: *mut ChuaTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Largest Lyapunov exponent (1/s) from `init` with the default two-
/// trajectory settings (1e-8 V offset, 0.1 ms renormalization, 400 ms
/// average after a 100 ms transient).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chua_largest_lyapunov(
    circuit: *const ChuaCircuit,
    init: *const ChuaState,
    out: *mut f64,
) -> ChuaStatus {
    let (Some(circuit), Some(init), false) = (circuit.as_ref(), init.as_ref(), out.is_null())
    else {
        return ChuaStatus::NullPointer;
    };
    match largest_lyapunov(&circuit.inner, &(*init).into(), &LyapunovConfig::default()) {
        Ok(lambda) => {
            *out = lambda;
            ChuaStatus::Ok
        }
        Err(e) => (&e).into(),
    }
}

/// Classify the long-run behavior from `init` with the default window
/// settings. On success `regime` holds the class, `period` the cycle count
/// for periodic regimes (0 otherwise), and `lambda1` the largest Lyapunov
/// exponent backing the verdict.
///
/// # Safety
/// `circuit` and `init` must be valid; each out-pointer may be null if that
/// result is not wanted.
#[no_mangle]
pub unsafe extern "C" fn chua_classify_regime(
    circuit: *const ChuaCircuit,
    init: *const ChuaState,
    regime: *mut ChuaRegime,
    period: *mut u32,
    lambda1: *mut f64,
) -> ChuaStatus {
    let (Some(circuit), Some(init)) = (circuit.as_ref(), init.as_ref()) else {
        return ChuaStatus::NullPointer;
    };
    match classify_regime(&circuit.inner, &(*init).into(), &ClassifyConfig::default()) {
        Ok(class) => {
            let (tag, n) = match class.tag {
                RegimeTag::Equilibrium => (ChuaRegime::Equilibrium, 0),
                RegimeTag::PeriodN(n) => (ChuaRegime::Periodic, n),
                RegimeTag::SpiralChaos => (ChuaRegime::SpiralChaos, 0),
                RegimeTag::DoubleScroll => (ChuaRegime::DoubleScroll, 0),
                RegimeTag::SaturatedCycle => (ChuaRegime::SaturatedCycle, 0),
            };
            if !regime.is_null() {
                *regime = tag;
            }
            if !period.is_null() {
                *period = n;
            }
            if !lambda1.is_null() {
                *lambda1 = class.evidence.lambda1;
            }
            ChuaStatus::Ok
        }
        Err(e) => (&e).into(),
    }
}
