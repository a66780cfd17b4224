//! Equilibrium and eigenvalue analysis per piecewise-linear region, largest
//! Lyapunov exponent estimation, long-run regime classification, and the
//! coupling-resistor bifurcation sweep.

use crate::circuit::{vector_field, CircuitParams, State};
use crate::error::{Error, Result};
use crate::integrate::{simulate, Schedule};
use num_complex::Complex64;
use rayon::prelude::*;

/// Default initial state for sweeps: a small symmetry-breaking kick.
pub const DEFAULT_SWEEP_INIT: State = State {
    v_c1: 0.1,
    v_c2: 0.0,
    i_l: 0.0,
};

/// 3x3 real matrix (mixed units per Jacobian row).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix3(pub [[f64; 3]; 3]);

impl Matrix3 {
    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Sum of the principal 2x2 minors (the quadratic characteristic coefficient).
    pub fn minor_sum(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
            + m[1][1] * m[2][2]
            - m[1][2] * m[2][1]
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
    }
}

/// Eigenvalues of a real 3x3 matrix via the scaled characteristic cubic.
///
/// The depressed cubic is solved in closed form (Cardano for one real root,
/// the trigonometric method for three) and each root gets a Newton polish.
/// Non-real eigenvalues are returned as an exact conjugate pair.
pub fn eigenvalues3(m: &Matrix3) -> [Complex64; 3] {
    let scale = m.max_abs();
    if scale == 0.0 {
        return [Complex64::new(0.0, 0.0); 3];
    }
    let mut s = *m;
    for row in s.0.iter_mut() {
        for x in row.iter_mut() {
            *x /= scale;
        }
    }
    // Monic characteristic polynomial x^3 + a x^2 + b x + c of the scaled matrix.
    let a = -s.trace();
    let b = s.minor_sum();
    let c = -s.det();

    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);

    let mut roots = if p == 0.0 && q == 0.0 {
        [Complex64::new(shift, 0.0); 3]
    } else if disc > 0.0 {
        // One real root; pick the cancellation-free Cardano branch.
        let half = -q / 2.0;
        let r = disc.sqrt();
        let u = if half >= 0.0 {
            (half + r).cbrt()
        } else {
            (half - r).cbrt()
        };
        let v = -p / (3.0 * u);
        let x1 = u + v;
        let re = -x1 / 2.0;
        let im = (3.0f64).sqrt() / 2.0 * (u - v).abs();
        [
            Complex64::new(x1 + shift, 0.0),
            Complex64::new(re + shift, im),
            Complex64::new(re + shift, -im),
        ]
    } else {
        // Three real roots.
        let rho = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p * rho)).clamp(-1.0, 1.0);
        let theta = arg.acos();
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let x = 2.0 * rho * (theta / 3.0 - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
            *slot = Complex64::new(x + shift, 0.0);
        }
        out
    };

    // Newton polish on the monic cubic; real roots stay on the real axis.
    let poly = |x: Complex64| ((x + a) * x + b) * x + c;
    let dpoly = |x: Complex64| (3.0 * x + 2.0 * a) * x + b;
    for root in roots.iter_mut() {
        for _ in 0..2 {
            let d = dpoly(*root);
            if d.norm() > 1e-30 {
                *root -= poly(*root) / d;
            }
        }
    }
    // Re-pair the complex roots exactly after polishing.
    if roots[1].im != 0.0 {
        let z = (roots[1] + roots[2].conj()) * 0.5;
        roots[1] = z;
        roots[2] = z.conj();
    }
    roots.map(|r| r * scale)
}

/// Piecewise-linear region of the five-segment diode, innermost first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Inner,
    Middle,
    Outer,
}

impl Region {
    pub fn slope_index(self) -> usize {
        match self {
            Region::Inner => 0,
            Region::Middle => 1,
            Region::Outer => 2,
        }
    }

    fn from_segment(idx: usize) -> Region {
        match idx {
            0 => Region::Inner,
            1 => Region::Middle,
            _ => Region::Outer,
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Region::Inner => "inner",
            Region::Middle => "middle",
            Region::Outer => "outer",
        })
    }
}

/// Eigenvalues of one region's linearization plus the stability verdict.
#[derive(Debug, Clone, Copy)]
pub struct EigenReport {
    pub eigenvalues: [Complex64; 3],
    pub stable: bool,
    pub region: Region,
}

/// Linearization of the vector field with g'(v) frozen to the region's slope.
pub fn jacobian(p: &CircuitParams, region: Region) -> Result<Matrix3> {
    p.validate()?;
    let idx = region.slope_index();
    let slopes = p.diode.slopes();
    let Some(&slope) = slopes.get(idx) else {
        return Err(Error::InvalidParam(format!(
            "region {region} has no slope in a {}-segment diode",
            slopes.len()
        )));
    };
    Ok(Matrix3([
        [(-1.0 / p.r0 - slope) / p.c1, 1.0 / (p.r0 * p.c1), 0.0],
        [1.0 / (p.r0 * p.c2), -1.0 / (p.r0 * p.c2), 1.0 / p.c2],
        [0.0, -1.0 / p.l, 0.0],
    ]))
}

/// Eigenvalues and stability of one region's Jacobian.
pub fn region_eigen(p: &CircuitParams, region: Region) -> Result<EigenReport> {
    let eig = eigenvalues3(&jacobian(p, region)?);
    Ok(EigenReport {
        eigenvalues: eig,
        stable: eig.iter().all(|z| z.re < 0.0),
        region,
    })
}

/// All equilibria of the circuit: states where the field vanishes.
///
/// At an equilibrium v_c2 = 0, i_l = -v_c1/r0, and v_c1 solves
/// g(v) + v/r0 = 0; the line intersects each linear segment at most once, so
/// the solve is exact per segment. The origin always qualifies since g(0)=0,
/// and nonzero solutions come in ± pairs by odd symmetry.
pub fn equilibria(p: &CircuitParams) -> Vec<(State, Region)> {
    let mut found: Vec<(f64, Region)> = vec![(0.0, Region::Inner)];
    let slopes = p.diode.slopes();
    let bps = p.diode.breakpoints();
    let mut start = 0.0;
    let mut g_start = 0.0;
    for (j, &s) in slopes.iter().enumerate() {
        let end = bps.get(j).copied().unwrap_or(f64::INFINITY);
        let denom = s + 1.0 / p.r0;
        if j > 0 && denom != 0.0 {
            let v = (s * start - g_start) / denom;
            if v >= start && v < end && v > 0.0 {
                let dup = found
                    .iter()
                    .any(|&(x, _)| (x - v).abs() <= 1e-9 * v.max(1.0));
                if !dup {
                    found.push((v, Region::from_segment(j)));
                }
            }
        }
        g_start += s * (end - start);
        start = end;
    }
    let mut out = Vec::with_capacity(found.len() * 2 - 1);
    for (v, region) in found {
        out.push((State::new(v, 0.0, -v / p.r0), region));
        if v != 0.0 {
            out.push((State::new(-v, 0.0, v / p.r0), region));
        }
    }
    out
}

/// Settings for the two-trajectory largest-Lyapunov estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovConfig {
    /// Initial and renormalized separation (V).
    pub d0: f64,
    /// Renormalization interval (s).
    pub renorm_interval: f64,
    /// Averaging time after the transient (s).
    pub total_time: f64,
    /// Transient discard before the estimate starts (s).
    pub transient: f64,
    /// Integration step (s).
    pub dt: f64,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        LyapunovConfig {
            d0: 1e-8,
            renorm_interval: 1e-4,
            total_time: 0.4,
            transient: 0.1,
            dt: crate::integrate::DEFAULT_DT,
        }
    }
}

/// Distance with the inductor current expressed in volts through r0, so all
/// three components share a scale.
fn scaled_distance(a: &State, b: &State, r0: f64) -> f64 {
    let dv1 = a.v_c1 - b.v_c1;
    let dv2 = a.v_c2 - b.v_c2;
    let dil = (a.i_l - b.i_l) * r0;
    (dv1 * dv1 + dv2 * dv2 + dil * dil).sqrt()
}

/// Largest Lyapunov exponent (1/s) by the two-trajectory method: evolve a
/// fiducial and a perturbed copy, renormalize their separation to `d0` every
/// `renorm_interval`, and average the log expansion factors.
pub fn largest_lyapunov(p: &CircuitParams, init: &State, cfg: &LyapunovConfig) -> Result<f64> {
    p.validate()?;
    if !(cfg.d0 > 0.0 && cfg.renorm_interval > 0.0 && cfg.total_time > 0.0 && cfg.dt > 0.0) {
        return Err(Error::InvalidParam(
            "lyapunov config values must be > 0".to_string(),
        ));
    }
    let mut fiducial = *init;
    let transient_steps = crate::integrate::step_count(cfg.transient, cfg.dt);
    for k in 0..transient_steps {
        fiducial = crate::integrate::step_rk4(&fiducial, k as f64 * cfg.dt, cfg.dt, p)?;
    }

    let mut perturbed = fiducial;
    perturbed.v_c1 += cfg.d0;
    let steps_per_interval = crate::integrate::step_count(cfg.renorm_interval, cfg.dt).max(1);
    let intervals = crate::integrate::step_count(cfg.total_time, cfg.renorm_interval).max(1);

    let mut sum_log = 0.0;
    let mut t = cfg.transient;
    for _ in 0..intervals {
        for _ in 0..steps_per_interval {
            fiducial = crate::integrate::step_rk4(&fiducial, t, cfg.dt, p)?;
            perturbed = crate::integrate::step_rk4(&perturbed, t, cfg.dt, p)?;
            t += cfg.dt;
        }
        let d = scaled_distance(&fiducial, &perturbed, p.r0).max(1e-300);
        sum_log += (d / cfg.d0).ln();
        let k = cfg.d0 / d;
        perturbed = State::new(
            fiducial.v_c1 + (perturbed.v_c1 - fiducial.v_c1) * k,
            fiducial.v_c2 + (perturbed.v_c2 - fiducial.v_c2) * k,
            fiducial.i_l + (perturbed.i_l - fiducial.i_l) * k,
        );
    }
    let effective_time = intervals as f64 * cfg.renorm_interval;
    Ok(sum_log / effective_time)
}

/// Long-run behavior classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    Equilibrium,
    PeriodN(u32),
    SpiralChaos,
    DoubleScroll,
    SaturatedCycle,
}

impl std::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegimeTag::Equilibrium => f.write_str("equilibrium"),
            RegimeTag::PeriodN(n) => write!(f, "period-{n}"),
            RegimeTag::SpiralChaos => f.write_str("spiral-chaos"),
            RegimeTag::DoubleScroll => f.write_str("double-scroll"),
            RegimeTag::SaturatedCycle => f.write_str("saturated-cycle"),
        }
    }
}

/// Numbers backing a classification verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evidence {
    /// Largest Lyapunov exponent (1/s). For equilibria this is the largest
    /// Jacobian eigenvalue real part at the settled point.
    pub lambda1: f64,
    pub distinct_maxima: usize,
    pub visited_positive: bool,
    pub visited_negative: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeClass {
    pub tag: RegimeTag,
    pub evidence: Evidence,
}

/// Classification settings. The thresholds separate estimator noise from
/// genuine exponential divergence: the characteristic rate scale is
/// 2π·3.75 kHz ≈ 2.4e4 1/s, so +200 1/s is about 1% of it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyConfig {
    pub transient: f64,
    pub window: f64,
    pub dt: f64,
    pub record_every: u32,
    /// Amplitude cluster tolerance as a fraction of peak-to-peak.
    pub cluster_tol_frac: f64,
    /// Largest period the maxima sequence is tested for.
    pub n_max: u32,
    /// PeriodN verdicts require lambda1 at or below this (1/s).
    pub lambda_periodic_max: f64,
    /// Chaos verdicts require lambda1 at or above this (1/s).
    pub lambda_chaos_min: f64,
    /// Terminal |dv/dt| below this counts as settled (V/s).
    pub rate_tol_v: f64,
    /// Terminal |di/dt| below this counts as settled (A/s).
    pub rate_tol_i: f64,
    /// Peak-to-peak below this over the window tail also counts as settled (V).
    pub settle_amp_tol: f64,
    /// Scroll-visit ball radius as a fraction of the first breakpoint.
    pub scroll_ball_frac: f64,
    /// Entries into each ball required to call a double scroll.
    pub scroll_min_visits: usize,
    pub lyapunov: LyapunovConfig,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            transient: 0.1,
            window: 0.1,
            dt: crate::integrate::DEFAULT_DT,
            record_every: crate::integrate::DEFAULT_RECORD_EVERY,
            cluster_tol_frac: 0.01,
            n_max: 16,
            lambda_periodic_max: 50.0,
            lambda_chaos_min: 200.0,
            rate_tol_v: 100.0,
            rate_tol_i: 0.1,
            settle_amp_tol: 1e-3,
            scroll_ball_frac: 0.5,
            scroll_min_visits: 5,
            lyapunov: LyapunovConfig::default(),
        }
    }
}

/// Amplitude statistics of one scalar window: local maxima, their clusters,
/// and the minimal period of the cluster-label sequence if one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowAnalysis {
    pub peak_to_peak: f64,
    pub max_abs: f64,
    /// Local maxima values, in time order.
    pub maxima: Vec<f64>,
    /// Cluster representative levels, ascending.
    pub cluster_levels: Vec<f64>,
    /// Cluster index per maximum, in time order.
    pub labels: Vec<usize>,
    /// Minimal period of the label sequence, when one <= n_max exists.
    pub period: Option<u32>,
}

/// Analyze a scalar series: collect strict local maxima, cluster them with a
/// tolerance of `cluster_tol_frac` of the peak-to-peak amplitude, and search
/// the label sequence for a minimal period up to `n_max`.
pub fn analyze_window(series: &[f64], cluster_tol_frac: f64, n_max: u32) -> WindowAnalysis {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut max_abs = 0.0f64;
    for &x in series {
        lo = lo.min(x);
        hi = hi.max(x);
        max_abs = max_abs.max(x.abs());
    }
    let peak_to_peak = if series.is_empty() { 0.0 } else { hi - lo };

    let mut maxima = Vec::new();
    for i in 1..series.len().saturating_sub(1) {
        if series[i] > series[i - 1] && series[i] >= series[i + 1] {
            maxima.push(series[i]);
        }
    }

    let tol = cluster_tol_frac * peak_to_peak;
    let mut sorted = maxima.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Greedy 1-D clustering over the sorted values; the representative is the
    // first (lowest) member of each cluster.
    let mut cluster_first: Vec<f64> = Vec::new();
    for v in sorted {
        let joins_last = matches!(cluster_first.last(), Some(&first) if v - first <= tol);
        if !joins_last {
            cluster_first.push(v);
        }
    }
    let cluster_levels = cluster_first.clone();
    let labels: Vec<usize> = maxima
        .iter()
        .map(|&v| {
            // Last cluster whose first element is <= v + tol and within tol below v.
            match cluster_first.binary_search_by(|probe| probe.partial_cmp(&v).unwrap()) {
                Ok(i) => i,
                Err(0) => 0,
                Err(i) => i - 1,
            }
        })
        .collect();

    let period = minimal_period(&labels, n_max);

    WindowAnalysis {
        peak_to_peak,
        max_abs,
        maxima,
        cluster_levels,
        labels,
        period,
    }
}

/// Minimal q <= n_max with labels[i] == labels[i+q] for all i, requiring at
/// least three repetitions of the pattern.
fn minimal_period(labels: &[usize], n_max: u32) -> Option<u32> {
    for q in 1..=n_max as usize {
        if labels.len() < 3 * q {
            return None;
        }
        if labels
            .iter()
            .zip(labels.iter().skip(q))
            .all(|(a, b)| a == b)
        {
            return Some(q as u32);
        }
    }
    None
}

fn count_ball_entries(samples: &[State], center: &State, radius: f64, r0: f64) -> usize {
    let mut entries = 0;
    let mut inside = false;
    for s in samples {
        let now_inside = scaled_distance(s, center, r0) < radius;
        if now_inside && !inside {
            entries += 1;
        }
        inside = now_inside;
    }
    entries
}

/// Classification plus the raw maxima that back it, for bifurcation export.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOutcome {
    pub regime: RegimeClass,
    pub maxima: Vec<f64>,
    pub cluster_levels: Vec<f64>,
}

/// Simulate, discard the transient, and classify the long-run behavior.
pub fn classify_detail(
    p: &CircuitParams,
    init: &State,
    cfg: &ClassifyConfig,
) -> Result<ClassifyOutcome> {
    let total = cfg.transient + cfg.window;
    let tr = simulate(p, init, total, cfg.dt, &Schedule::empty(), cfg.record_every)?;
    let win = tr.discard_before(cfg.transient);
    let series = win.v_c1_series();
    if series.len() < 8 {
        return Err(Error::Inconclusive(
            "window too short for analysis".to_string(),
        ));
    }

    let analysis = analyze_window(&series, cfg.cluster_tol_frac, cfg.n_max);

    // Settled? Check the terminal field rates, with the window tail's
    // amplitude as a fallback for slowly dying ring-down.
    let terminal = *win.terminal().expect("non-empty window");
    let rates = vector_field(&terminal, p);
    let tail_start = series.len() - (series.len() / 5).max(2);
    let tail = &series[tail_start..];
    let tail_p2p = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let settled = (rates.v_c1.abs() < cfg.rate_tol_v
        && rates.v_c2.abs() < cfg.rate_tol_v
        && rates.i_l.abs() < cfg.rate_tol_i)
        || tail_p2p < cfg.settle_amp_tol;
    if settled {
        // Contraction rate at the settled point, from the Jacobian of the
        // region the nearest equilibrium lives in.
        let eqs = equilibria(p);
        let nearest = eqs
            .iter()
            .min_by(|a, b| {
                scaled_distance(&a.0, &terminal, p.r0)
                    .partial_cmp(&scaled_distance(&b.0, &terminal, p.r0))
                    .unwrap()
            })
            .expect("origin always present");
        let lambda1 = eigenvalues3(&jacobian(p, nearest.1)?)
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(ClassifyOutcome {
            regime: RegimeClass {
                tag: RegimeTag::Equilibrium,
                evidence: Evidence {
                    lambda1,
                    distinct_maxima: analysis.cluster_levels.len(),
                    visited_positive: false,
                    visited_negative: false,
                },
            },
            maxima: analysis.maxima,
            cluster_levels: analysis.cluster_levels,
        });
    }

    let lambda1 = largest_lyapunov(p, init, &cfg.lyapunov)?;
    let distinct = analysis.cluster_levels.len();

    if let Some(q) = analysis.period {
        if lambda1 <= cfg.lambda_periodic_max {
            let outer_break = p
                .diode
                .breakpoints()
                .last()
                .copied()
                .unwrap_or(f64::INFINITY);
            let tag = if analysis.max_abs > outer_break {
                RegimeTag::SaturatedCycle
            } else {
                RegimeTag::PeriodN(q)
            };
            return Ok(ClassifyOutcome {
                regime: RegimeClass {
                    tag,
                    evidence: Evidence {
                        lambda1,
                        distinct_maxima: distinct,
                        visited_positive: false,
                        visited_negative: false,
                    },
                },
                maxima: analysis.maxima,
                cluster_levels: analysis.cluster_levels,
            });
        }
        return Err(Error::Inconclusive(format!(
            "maxima repeat with period {q} but lambda1 = {lambda1:.1} 1/s; try a longer window"
        )));
    }

    if lambda1 < cfg.lambda_chaos_min {
        return Err(Error::Inconclusive(format!(
            "no period <= {} found yet lambda1 = {lambda1:.1} 1/s is below the chaos threshold; try a longer window",
            cfg.n_max
        )));
    }

    // Chaotic: spiral around one outer equilibrium, or a double scroll
    // visiting both.
    let eqs = equilibria(p);
    let pair: Vec<&State> = eqs
        .iter()
        .filter(|(s, _)| s.v_c1 != 0.0)
        .map(|(s, _)| s)
        .collect();
    let first_break = p.diode.breakpoints().first().copied().unwrap_or(1.0);
    let radius = cfg.scroll_ball_frac * first_break;
    let fallback_pos = State::new(2.0 * first_break, 0.0, -2.0 * first_break / p.r0);
    let center_pos = pair
        .iter()
        .filter(|s| s.v_c1 > 0.0)
        .max_by(|a, b| a.v_c1.partial_cmp(&b.v_c1).unwrap())
        .copied()
        .unwrap_or(&fallback_pos);
    let center_neg = center_pos.neg();
    let visits_pos = count_ball_entries(&win.samples, center_pos, radius, p.r0);
    let visits_neg = count_ball_entries(&win.samples, &center_neg, radius, p.r0);
    let visited_positive = visits_pos >= cfg.scroll_min_visits;
    let visited_negative = visits_neg >= cfg.scroll_min_visits;
    let tag = if visited_positive && visited_negative {
        RegimeTag::DoubleScroll
    } else {
        RegimeTag::SpiralChaos
    };
    Ok(ClassifyOutcome {
        regime: RegimeClass {
            tag,
            evidence: Evidence {
                lambda1,
                distinct_maxima: distinct,
                visited_positive,
                visited_negative,
            },
        },
        maxima: analysis.maxima,
        cluster_levels: analysis.cluster_levels,
    })
}

/// Classify the long-run behavior starting from `init`.
pub fn classify_regime(
    p: &CircuitParams,
    init: &State,
    cfg: &ClassifyConfig,
) -> Result<RegimeClass> {
    classify_detail(p, init, cfg).map(|o| o.regime)
}

/// One sweep entry; failures are recorded so the sweep can continue.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub r0: f64,
    pub outcome: std::result::Result<ClassifyOutcome, String>,
}

/// Classify every coupling-resistor value independently (in parallel via the
/// global rayon pool) from the default sweep initial state.
pub fn sweep_bifurcation(
    p: &CircuitParams,
    r0_values: &[f64],
    cfg: &ClassifyConfig,
) -> Result<Vec<SweepPoint>> {
    if r0_values.is_empty() {
        return Err(Error::InvalidParam("sweep list is empty".to_string()));
    }
    Ok(r0_values
        .par_iter()
        .map(|&r0| {
            let outcome = p
                .with_r0(r0)
                .and_then(|pr| classify_detail(&pr, &DEFAULT_SWEEP_INIT, cfg))
                .map_err(|e| e.to_string());
            SweepPoint { r0, outcome }
        })
        .collect())
}

/// CSV rows `r0,regime,n,lambda1,maxima...` with the cluster levels as the
/// trailing columns. Failed points carry the error text in the regime column.
pub fn write_sweep_csv<W: std::io::Write>(points: &[SweepPoint], w: &mut W) -> Result<()> {
    w.write_all(b"r0,regime,n,lambda1,maxima...\n")?;
    for pt in points {
        match &pt.outcome {
            Ok(out) => {
                let n = match out.regime.tag {
                    RegimeTag::PeriodN(q) => q.to_string(),
                    _ => String::new(),
                };
                write!(
                    w,
                    "{},{},{},{}",
                    pt.r0, out.regime.tag, n, out.regime.evidence.lambda1
                )?;
                for level in &out.cluster_levels {
                    write!(w, ",{level}")?;
                }
                writeln!(w)?;
            }
            Err(msg) => {
                writeln!(w, "{},error: {},,", pt.r0, msg.replace(',', ";"))?;
            }
        }
    }
    Ok(())
}

/// CSV rows `r0,maximum_v_c1`, one row per recorded local maximum.
pub fn write_bifurcation_csv<W: std::io::Write>(points: &[SweepPoint], w: &mut W) -> Result<()> {
    w.write_all(b"r0,maximum_v_c1\n")?;
    for pt in points {
        if let Ok(out) = &pt.outcome {
            for m in &out.maxima {
                writeln!(w, "{},{}", pt.r0, m)?;
            }
        }
    }
    Ok(())
}
