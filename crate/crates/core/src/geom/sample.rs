//! Seeded random inputs for identity tests.

use super::chart::{GridChart, ScalarField};
use super::estimates::ThirdOrder;
use super::linalg::CMat;
use super::spectral::Differentiator;
use super::GeomError;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// Random trigonometric potential with wave numbers `|m_a| ≤ max_mode` per axis,
/// rescaled so that every eigenvalue of the flat `∂∂̄φ` lies in
/// `[−strength, strength]`. With `strength < 1` the flat metric plus `∂∂̄φ` is
/// a Kähler metric.
pub fn random_potential<R: Rng>(
    rng: &mut R,
    diff: &Differentiator,
    max_mode: i32,
    strength: f64,
) -> Result<ScalarField, GeomError> {
    let chart = *diff.chart();
    let axes = chart.axes();
    let mut modes: Vec<([i32; 4], f64, f64)> = Vec::new();
    let span = 2 * max_mode + 1;
    let count = (span as usize).pow(axes as u32);
    for code in 0..count {
        let mut m = [0i32; 4];
        let mut c = code;
        for a in 0..axes {
            m[a] = (c % span as usize) as i32 - max_mode;
            c /= span as usize;
        }
        // Keep one of each ±m pair.
        let first_nonzero = m[..axes].iter().find(|&&v| v != 0);
        if !matches!(first_nonzero, Some(v) if *v > 0) {
            continue;
        }
        let norm2: i32 = m[..axes].iter().map(|v| v * v).sum();
        let decay = 1.0 / (1.0 + norm2 as f64);
        modes.push((m, decay * rng.gen_range(-1.0..1.0), decay * rng.gen_range(-1.0..1.0)));
    }
    let period = chart.period();
    let phi = ScalarField::from_fn(chart, |x| {
        modes
            .iter()
            .map(|(m, a, b)| {
                let arg: f64 = (0..axes).map(|k| 2.0 * PI * m[k] as f64 * x[k] / period).sum();
                a * arg.cos() + b * arg.sin()
            })
            .sum()
    });
    let dd = diff.ddbar(&phi)?;
    let n = chart.dim();
    let mut worst: f64 = 0.0;
    for p in 0..chart.len() {
        let m = CMat::from_fn(n, |i, j| dd[i * n + j].values()[p]);
        let ev = m.hermitian_eigenvalues();
        worst = worst.max(ev[0].abs()).max(ev[1].abs());
    }
    if worst == 0.0 {
        return Ok(phi);
    }
    let s = strength / worst;
    Ok(phi.map(|v| v * s))
}

/// Random Hermitian positive definite matrix with eigenvalues in `[lo, hi]`.
pub fn random_positive<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> CMat {
    let ev: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    let d = CMat::diag(&ev);
    if n == 1 {
        return d;
    }
    // Random unitary from a normalized complex vector pair.
    let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt().max(1e-12);
    let (a, b) = (a / norm, b / norm);
    let u = CMat::from_fn(2, |i, j| match (i, j) {
        (0, 0) => a,
        (0, 1) => -b.conj(),
        (1, 0) => b,
        _ => a.conj(),
    });
    let m = u * d * u.adjoint();
    // Remove rounding asymmetry.
    CMat::from_fn(2, |i, j| 0.5 * (m.get(i, j) + m.get(j, i).conj()))
}

/// Random third-order tensor symmetric in its first two indices.
pub fn random_symmetric_third<R: Rng>(rng: &mut R, n: usize, scale: f64) -> ThirdOrder {
    let mut t = ThirdOrder { n, t: [Complex64::new(0.0, 0.0); 8] };
    for i in 0..n {
        for k in i..n {
            for q in 0..n {
                let v = Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
                t.t[(i * n + k) * n + q] = v;
                t.t[(k * n + i) * n + q] = v;
            }
        }
    }
    t
}

/// Random smooth complex component field built from low modes.
pub fn random_smooth_complex<R: Rng>(rng: &mut R, chart: GridChart, max_mode: i32) -> super::chart::ComplexField {
    let axes = chart.axes();
    let terms: Vec<([i32; 4], Complex64)> = (0..6)
        .map(|_| {
            let mut m = [0i32; 4];
            for v in m.iter_mut().take(axes) {
                *v = rng.gen_range(-max_mode..=max_mode);
            }
            (m, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        })
        .collect();
    let period = chart.period();
    super::chart::ComplexField::from_fn(chart, |x| {
        terms
            .iter()
            .map(|(m, c)| {
                let arg: f64 = (0..axes).map(|k| 2.0 * PI * m[k] as f64 * x[k] / period).sum();
                c * Complex64::new(0.0, arg).exp()
            })
            .sum()
    })
}
