//! The rotation-invariant sphere solver against a direct evolution of the same
//! potential as a general field on the affine chart `z ∈ [−1, 1]²`, with
//! `√−1∂∂̄ = ¼Δ` by second-order finite differences and Dirichlet data taken
//! from the 1-D solution. Short time, interior comparison.

use kahler_flow::p1::chebyshev::legendre;
use kahler_flow::p1::{P1Flow, P1FlowConfig, P1State, Perturbation};
use nalgebra::DVector;

const AMPLITUDE: f64 = 0.08;
const T_END: f64 = 0.05;

fn tau_of(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    r2 / (1.0 + r2)
}

/// Max interior difference `|φ_chart − ψ_sphere|` over `|z| ≤ 0.5` at `T_END`.
fn chart_error(m: usize) -> f64 {
    let flow = P1Flow::new(P1FlowConfig {
        degree: 32,
        perturbation: Some(Perturbation { degree: 2, amplitude: AMPLITUDE }),
        ..Default::default()
    })
    .unwrap();
    let grid = &flow.chart().grid;
    let h = 2.0 / m as f64;
    let coord = |i: usize| -1.0 + h * i as f64;
    let n = m + 1;
    let idx = |i: usize, j: usize| i * n + j;

    // Data shared with the 1-D solver: initial metric and volume form,
    // evaluated from their closed forms / interpolants at chart points.
    let t0 = flow.collapse_time();
    let log_omega = flow.log_volume_ratio().clone();
    let mut rho0 = vec![0.0; n * n];
    let mut log_vol = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let tau = tau_of(coord(i), coord(j));
            let x = 2.0 * tau - 1.0;
            // h₀ = 2 + L(a P₂) = 2 − 6a P₂.
            let h0 = 2.0 - 6.0 * AMPLITUDE * legendre(2, x);
            let fs = (1.0 - tau).powi(2);
            rho0[idx(i, j)] = fs * h0;
            log_vol[idx(i, j)] = fs.ln() + grid.interpolate(&log_omega, x);
        }
    }

    let psi_at = |s: &P1State, i: usize, j: usize| grid.interpolate(&s.psi, 2.0 * tau_of(coord(i), coord(j)) - 1.0);
    let boundary = |i: usize, j: usize| i == 0 || j == 0 || i == m || j == m;

    // 1-D states at every half step, for the boundary data of each stage.
    let rho_min = rho0.iter().cloned().fold(f64::INFINITY, f64::min) * (1.0 - T_END / t0);
    let dt_limit = 0.5 * 2.785 * rho_min * h * h / 2.0;
    let steps = (T_END / dt_limit).ceil() as usize;
    let dt = T_END / steps as f64;
    let mut sphere = vec![flow.initial_state()];
    for _ in 0..2 * steps {
        let s = sphere.last().unwrap();
        sphere.push(flow.step(s, 0.5 * dt).unwrap());
    }

    let rhs = |phi: &DVector<f64>, t: f64| {
        let shrink = 1.0 - t / t0;
        let mut out = DVector::zeros(n * n);
        for i in 1..m {
            for j in 1..m {
                let lap = (phi[idx(i + 1, j)] + phi[idx(i - 1, j)] + phi[idx(i, j + 1)] + phi[idx(i, j - 1)]
                    - 4.0 * phi[idx(i, j)])
                    / (h * h);
                let g = shrink * rho0[idx(i, j)] + 0.25 * lap;
                assert!(g > 0.0);
                out[idx(i, j)] = g.ln() - log_vol[idx(i, j)] - shrink.ln();
            }
        }
        out
    };
    let with_boundary = |mut phi: DVector<f64>, s: &P1State| {
        for i in 0..n {
            for j in 0..n {
                if boundary(i, j) {
                    phi[idx(i, j)] = psi_at(s, i, j);
                }
            }
        }
        phi
    };

    let mut phi = DVector::zeros(n * n);
    for k in 0..steps {
        let t = k as f64 * dt;
        let (s0, sh, s1) = (&sphere[2 * k], &sphere[2 * k + 1], &sphere[2 * k + 2]);
        let phi0 = with_boundary(phi.clone(), s0);
        let k1 = rhs(&phi0, t);
        let k2 = rhs(&with_boundary(&phi0 + &k1 * (0.5 * dt), sh), t + 0.5 * dt);
        let k3 = rhs(&with_boundary(&phi0 + &k2 * (0.5 * dt), sh), t + 0.5 * dt);
        let k4 = rhs(&with_boundary(&phi0 + &k3 * dt, s1), t + dt);
        phi = with_boundary(&phi0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0), s1);
    }

    let last = sphere.last().unwrap();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (coord(i), coord(j));
            if x * x + y * y <= 0.25 {
                err = err.max((phi[idx(i, j)] - psi_at(last, i, j)).abs());
            }
        }
    }
    err
}

#[test]
fn sphere_solver_matches_chart_evolution() {
    let coarse = chart_error(32);
    let fine = chart_error(64);
    eprintln!("chart agreement: h=1/16 {coarse:.3e}, h=1/32 {fine:.3e}");
    assert!(fine < 1e-4, "{fine}");
    // Second-order differences: halving h cuts the gap about fourfold.
    let ratio = coarse / fine;
    assert!((2.0..8.0).contains(&ratio), "{ratio}");
}
