//! A desk-scale numerical laboratory for Chua's circuit with a dual-op-amp
//! nonlinear resistor: transient simulation, equilibrium and eigenvalue
//! analysis, the coupling-resistor route to chaos, drive-response
//! synchronization with chaotic masking, and sound synthesis by resistor
//! modulation.

pub mod analysis;
pub mod audio;
pub mod circuit;
pub mod config;
pub mod error;
pub mod integrate;
pub mod sync;

pub use analysis::{
    analyze_window, classify_regime, eigenvalues3, equilibria, jacobian, largest_lyapunov,
    region_eigen, sweep_bifurcation, ClassifyConfig, EigenReport, LyapunovConfig, Matrix3,
    RegimeClass, RegimeTag, Region,
};
pub use audio::{
    modulation_schedule, read_wav, synthesize, write_wav, AudioClip, Modulation, ModulationKind,
    OutputNode,
};
pub use circuit::{
    build_diode, cell_current, diode_current, vector_field, CellParams, CircuitParams, DiodeModel,
    State,
};
pub use error::{Error, Result};
pub use integrate::{
    decimate, decimate_series, simulate, step_rk4, Action, R0Waveform, Schedule, Trajectory,
};
pub use sync::{
    correlation, mask_transmit, master_drive, recover_message, run_synchronization,
    sync_error_metrics, Coupling, DriveVar, MaskedChannel, Mismatch, SyncConfig, SyncMetrics,
    SyncResult, Waveform,
};
