/* C interface to the Chua's circuit laboratory. */

#ifndef CHUA_H
#define CHUA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Long-run behavior classes; `Periodic` carries its period separately.
typedef enum ChuaRegime {
  CHUA_REGIME_EQUILIBRIUM = 0,
  CHUA_REGIME_PERIODIC = 1,
  CHUA_REGIME_SPIRAL_CHAOS = 2,
  CHUA_REGIME_DOUBLE_SCROLL = 3,
  CHUA_REGIME_SATURATED_CYCLE = 4,
} ChuaRegime;

// Result of every fallible call.
typedef enum ChuaStatus {
  CHUA_STATUS_OK = 0,
  // A parameter failed validation (non-positive component, bad rate, ...).
  CHUA_STATUS_INVALID_ARGUMENT = 1,
  // A required pointer was null.
  CHUA_STATUS_NULL_POINTER = 2,
  // The trajectory left the physical range.
  CHUA_STATUS_DIVERGENCE = 3,
  // Classification evidence was contradictory; try a longer window.
  CHUA_STATUS_INCONCLUSIVE = 4,
  // Synthesized audio had no signal content.
  CHUA_STATUS_DEGENERATE_AUDIO = 5,
  CHUA_STATUS_IO = 6,
} ChuaStatus;

// Opaque circuit handle.
typedef struct ChuaCircuit ChuaCircuit;

// Opaque recorded-trajectory handle.
typedef struct ChuaTrajectory ChuaTrajectory;

// Circuit state: the two capacitor voltages (V) and inductor current (A).
typedef struct ChuaState {
  double v_c1;
  double v_c2;
  double i_l;
} ChuaState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// NUL-terminated library version string; static storage, do not free.
const char *chua_version(void);

// Create the reference design (L = 18 mH, C1 = 10 nF, C2 = 100 nF, standard
// op-amp cells) with the given coupling resistance and saturation level.
//
// # Safety
// `out` must be a valid pointer; the returned handle must be released with
// `chua_circuit_free`.
enum ChuaStatus chua_circuit_standard(double r0, double e_sat, struct ChuaCircuit **out);

// Create a circuit from explicit component values: reactive elements, the
// coupling resistor, the op-amp saturation level, and both cells' resistors.
//
// # Safety
// `out` must be a valid pointer; release the handle with `chua_circuit_free`.
enum ChuaStatus chua_circuit_new(double l,
                                 double c1,
                                 double c2,
                                 double r0,
                                 double e_sat,
                                 double cell_a_r_in,
                                 double cell_a_r_fb,
                                 double cell_a_r_gnd,
                                 double cell_b_r_in,
                                 double cell_b_r_fb,
                                 double cell_b_r_gnd,
                                 struct ChuaCircuit **out);

// Swap the coupling resistor of an existing circuit.
//
// # Safety
// `circuit` must be a live handle from this library.
enum ChuaStatus chua_circuit_set_r0(struct ChuaCircuit *circuit, double r0);

// Release a circuit handle. Null is ignored.
//
// # Safety
// `circuit` must be null or a live handle from this library.
void chua_circuit_free(struct ChuaCircuit *circuit);

// Current (A) through the composite nonlinear resistor at voltage `v`.
//
// # Safety
// `circuit` must be a live handle; `out` must be valid.
enum ChuaStatus chua_diode_current(const struct ChuaCircuit *circuit, double v, double *out);

// Time-derivative of the state under the circuit equations.
//
// # Safety
// All pointers must be valid.
enum ChuaStatus chua_vector_field(const struct ChuaCircuit *circuit,
                                  const struct ChuaState *state,
                                  struct ChuaState *out);

// Integrate from `init` over `t_end` seconds with fixed step `dt`, recording
// every `record_every`-th step.
//
// # Safety
// Pointers must be valid; release the trajectory with `chua_trajectory_free`.
enum ChuaStatus chua_simulate(const struct ChuaCircuit *circuit,
                              const struct ChuaState *init,
                              double t_end,
                              double dt,
                              uint32_t record_every,
                              struct ChuaTrajectory **out);

// Number of recorded samples.
//
// # Safety
// `trajectory` must be a live handle; null yields 0.
uintptr_t chua_trajectory_len(const struct ChuaTrajectory *trajectory);

// Spacing between recorded samples (s).
//
// # Safety
// `trajectory` must be a live handle; null yields 0.
double chua_trajectory_dt(const struct ChuaTrajectory *trajectory);

// Copy one recorded sample.
//
// # Safety
// Pointers must be valid; `index` must be below `chua_trajectory_len`.
enum ChuaStatus chua_trajectory_sample(const struct ChuaTrajectory *trajectory,
                                       uintptr_t index,
                                       struct ChuaState *out);

// Release a trajectory handle. Null is ignored.
//
// # Safety
// `trajectory` must be null or a live handle from this library.
void chua_trajectory_free(struct ChuaTrajectory *trajectory);

// Largest Lyapunov exponent (1/s) from `init` with the default two-
// trajectory settings (1e-8 V offset, 0.1 ms renormalization, 400 ms
// average after a 100 ms transient).
//
// # Safety
// Pointers must be valid.
enum ChuaStatus chua_largest_lyapunov(const struct ChuaCircuit *circuit,
                                      const struct ChuaState *init,
                                      double *out);

// Classify the long-run behavior from `init` with the default window
// settings. On success `regime` holds the class, `period` the cycle count
// for periodic regimes (0 otherwise), and `lambda1` the largest Lyapunov
// exponent backing the verdict.
//
// # Safety
// `circuit` and `init` must be valid; each out-pointer may be null if that
// result is not wanted.
enum ChuaStatus chua_classify_regime(const struct ChuaCircuit *circuit,
                                     const struct ChuaState *init,
                                     enum ChuaRegime *regime,
                                     uint32_t *period,
                                     double *lambda1);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHUA_H */
