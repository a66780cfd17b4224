//! Shared oracles for the integration suites: an RK4-independent matrix
//! exponential, spectrum helpers, and small statistics.

#![allow(dead_code)]

use num_complex::Complex;
use rustfft::FftPlanner;

/// exp(A*t) * s by scaling-and-squaring Taylor series; independent of both
/// the integrator and the eigenvalue solver.
pub fn expm_apply(a: &[[f64; 3]; 3], t: f64, s: [f64; 3]) -> [f64; 3] {
    let norm: f64 = a
        .iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        * t.abs();
    let k = norm.log2().ceil().max(0.0) as u32 + 1;
    let scale = t / f64::powi(2.0, k as i32);
    let mut m = identity();
    let mut term = identity();
    for n in 1..30 {
        term = mat_mul(&term, a);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x *= scale / n as f64;
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..k {
        m = mat_mul(&m, &m);
    }
    [
        m[0][0] * s[0] + m[0][1] * s[1] + m[0][2] * s[2],
        m[1][0] * s[0] + m[1][1] * s[1] + m[1][2] * s[2],
        m[2][0] * s[0] + m[2][1] * s[1] + m[2][2] * s[2],
    ]
}

fn identity() -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for (k, bk) in b.iter().enumerate() {
                c[i][j] += a[i][k] * bk[j];
            }
        }
    }
    c
}

/// Least-squares slope of log(y) against log(x).
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Magnitude spectrum of a real signal (DC bin dropped).
pub fn magnitude_spectrum(xs: &[f64]) -> Vec<f64> {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(xs.len());
    let mut buf: Vec<Complex<f64>> = xs.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fft.process(&mut buf);
    buf[1..xs.len() / 2].iter().map(|c| c.norm()).collect()
}

/// Geometric over arithmetic mean of the power spectrum inside a frequency
/// band: 1 for white noise, near 0 for a pure line. Bins are floored at
/// 1e-12 of the band peak so empty bins measure as lines, not as -inf.
pub fn spectral_flatness_band(xs: &[f64], rate: f64, f_lo: f64, f_hi: f64) -> f64 {
    let mags = magnitude_spectrum(xs);
    let df = rate / xs.len() as f64;
    let lo = (f_lo / df).ceil().max(1.0) as usize;
    let hi = ((f_hi / df).floor() as usize).min(mags.len());
    let band: Vec<f64> = mags[lo.min(hi)..hi].iter().map(|m| m * m).collect();
    let peak = band.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
    let powers: Vec<f64> = band.iter().map(|p| p.max(peak * 1e-12)).collect();
    let log_mean = powers.iter().map(|p| p.ln()).sum::<f64>() / powers.len() as f64;
    let mean = powers.iter().sum::<f64>() / powers.len() as f64;
    log_mean.exp() / mean
}

pub fn unit_normalized(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    v.iter().map(|x| x / norm).collect()
}

pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
