//! Adaptive embedded Runge–Kutta stepper (Dormand–Prince 5(4), FSAL) over a
//! flat real state vector, with PI step-size control. Plain and allocation-
//! free in the hot loop so ensemble runs stay cheap; results are bitwise
//! deterministic for a given right-hand side.

use crate::error::{Error, Result};

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
// 5th-order solution weights (also the last stage position: FSAL)
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// embedded 4th-order weights
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

// step-size controller (PI, Hairer-style)
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Integrate dy/dt = rhs(t, y) from `t0` to `t_end`, calling `observe`
/// after every accepted step (and once at the initial point). The integrator
/// never steps past `t_end` and honors an upper bound on the next step set by
/// `observe`'s return value (used to land exactly on sample times);
/// `f64::INFINITY` means unconstrained.
pub fn integrate_adaptive(
    mut rhs: impl FnMut(f64, &[f64], &mut [f64]),
    t0: f64,
    t_end: f64,
    y: &mut [f64],
    opts: &OdeOptions,
    mut observe: impl FnMut(f64, &[f64]) -> f64,
) -> Result<OdeStats> {
    if !(t_end >= t0) {
        return Err(Error::Integration(format!(
            "time window reversed: {t0} .. {t_end}"
        )));
    }
    let n = y.len();
    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; n]).collect();
    let mut y_new = vec![0.0; n];
    let mut y_stage = vec![0.0; n];

    let mut stats = OdeStats::default();
    let mut t = t0;
    rhs(t, y, &mut k[0]);
    stats.rhs_evals += 1;
    let mut t_cap = observe(t, y);

    // initial step: small fraction of the window, refined by the controller
    let mut h = ((t_end - t0) * 1e-4).min(1.0).max(1e-9);
    let mut facold: f64 = 1e-4;

    while t < t_end {
        if stats.steps + stats.rejected >= opts.max_steps {
            return Err(Error::Integration(format!(
                "step budget exhausted at t = {t} (rel_tol {}, abs_tol {})",
                opts.rel_tol, opts.abs_tol
            )));
        }
        h = h.min(t_end - t).min(t_cap - t).max(1e-14);

        // stages 2..6
        for i in 0..n {
            y_stage[i] = y[i] + h * A21 * k[0][i];
        }
        rhs(t + C[1] * h, &y_stage, &mut k[1]);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
        }
        rhs(t + C[2] * h, &y_stage, &mut k[2]);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        rhs(t + C[3] * h, &y_stage, &mut k[3]);
        for i in 0..n {
            y_stage[i] =
                y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        rhs(t + C[4] * h, &y_stage, &mut k[4]);
        for i in 0..n {
            y_stage[i] = y[i]
                + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i]
                    + A65 * k[4][i]);
        }
        rhs(t + C[5] * h, &y_stage, &mut k[5]);
        // 5th-order solution; its RHS evaluation is the FSAL stage
        for i in 0..n {
            y_new[i] = y[i]
                + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
        }
        rhs(t + h, &y_new, &mut k[6]);
        stats.rhs_evals += 6;

        // scaled error norm against the embedded 4th-order solution
        let mut err2 = 0.0;
        for i in 0..n {
            let e = h
                * ((B1 - E1) * k[0][i] + (B3 - E3) * k[2][i] + (B4 - E4) * k[3][i]
                    + (B5 - E5) * k[4][i]
                    + (B6 - E6) * k[5][i]
                    - E7 * k[6][i]);
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err2 += (e / sc) * (e / sc);
        }
        let err = (err2 / n as f64).sqrt();

        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&y_new);
            k.swap(0, 6); // FSAL: last stage becomes the first of the next step
            stats.steps += 1;
            t_cap = observe(t, y);

            let fac11 = err.max(1e-16).powf(EXPO);
            let fac = (fac11 / facold.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            h /= fac;
            facold = err.max(1e-16);
        } else {
            stats.rejected += 1;
            let fac11 = err.powf(EXPO);
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::Integration(format!("step size collapsed at t = {t}")));
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let mut y = vec![1.0];
        integrate_adaptive(
            |_t, y, dy| dy[0] = -0.37 * y[0],
            0.0,
            10.0,
            &mut y,
            &OdeOptions::default(),
            |_, _| f64::INFINITY,
        )
        .unwrap();
        assert_relative_eq!(y[0], (-3.7f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn harmonic_oscillator_energy_and_phase() {
        let mut y = vec![1.0, 0.0];
        let w = 2.5;
        integrate_adaptive(
            |_t, y, dy| {
                dy[0] = y[1];
                dy[1] = -w * w * y[0];
            },
            0.0,
            20.0,
            &mut y,
            &OdeOptions::default(),
            |_, _| f64::INFINITY,
        )
        .unwrap();
        assert_relative_eq!(y[0], (w * 20.0f64).cos(), epsilon = 1e-7);
        assert_relative_eq!(y[1], -w * (w * 20.0f64).sin(), epsilon = 1e-6);
    }

    #[test]
    fn observer_cap_lands_on_sample_times() {
        // request a stop exactly at t = 0.5; the observer must see it
        let mut y = vec![1.0];
        let mut hits = Vec::new();
        integrate_adaptive(
            |_t, y, dy| dy[0] = -y[0],
            0.0,
            1.0,
            &mut y,
            &OdeOptions::default(),
            |t, _| {
                hits.push(t);
                if t < 0.5 {
                    0.5
                } else {
                    f64::INFINITY
                }
            },
        )
        .unwrap();
        assert!(hits.iter().any(|&t| (t - 0.5).abs() < 1e-12));
    }

    #[test]
    fn tolerance_controls_error() {
        let run = |rtol: f64| {
            let mut y = vec![1.0, 0.0];
            integrate_adaptive(
                |_t, y, dy| {
                    dy[0] = y[1];
                    dy[1] = -y[0];
                },
                0.0,
                30.0,
                &mut y,
                &OdeOptions {
                    rel_tol: rtol,
                    abs_tol: rtol * 1e-3,
                    max_steps: 10_000_000,
                },
                |_, _| f64::INFINITY,
            )
            .unwrap();
            (y[0] - 30.0f64.cos()).abs()
        };
        assert!(run(1e-10) < run(1e-5));
        assert!(run(1e-10) < 1e-8);
    }
}
