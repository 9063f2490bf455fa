//! Derivative-free minimization with the Nelder–Mead simplex method
//! (standard coefficients: reflection 1, expansion 2, contraction ½,
//! shrink ½). Used for tuning working points against simulated objectives,
//! where gradients are unavailable.

/// Options for [`minimize`].
#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    /// Stop when both the simplex diameter and the spread of objective
    /// values fall below these thresholds.
    pub x_tol: f64,
    pub f_tol: f64,
    /// Hard cap on objective evaluations.
    pub max_evals: usize,
    /// Relative size of the initial simplex around the seed (absolute step
    /// `init_step` is used for coordinates near zero).
    pub init_scale: f64,
    pub init_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            x_tol: 1e-10,
            f_tol: 1e-12,
            max_evals: 20_000,
            init_scale: 0.05,
            init_step: 0.1,
        }
    }
}

/// Result of a simplex minimization.
#[derive(Debug, Clone)]
pub struct MinimumFound {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// Whether the tolerances were met before `max_evals` ran out.
    pub converged: bool,
}

/// Minimize `f` starting from `x0`.
pub fn minimize(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> MinimumFound {
    let n = x0.len();
    assert!(n >= 1, "need at least one coordinate");
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    // initial simplex: seed plus one perturbed vertex per coordinate
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let fx0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), fx0));
    for i in 0..n {
        let mut v = x0.to_vec();
        let step = if v[i].abs() > 1e-8 {
            opts.init_scale * v[i].abs()
        } else {
            opts.init_step
        };
        v[i] += step;
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }

    let centroid = |s: &[(Vec<f64>, f64)]| {
        // centroid of all vertices except the worst (last)
        let mut c = vec![0.0; n];
        for (v, _) in &s[..n] {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi / n as f64;
            }
        }
        c
    };
    let blend = |a: &[f64], b: &[f64], w: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(ai, bi)| ai + w * (bi - ai)).collect()
    };

    let mut converged = false;
    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_spread = simplex[n].1 - simplex[0].1;
        let x_diam = simplex[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if f_spread <= opts.f_tol && x_diam <= opts.x_tol {
            converged = true;
            break;
        }

        let c = centroid(&simplex);
        let worst = simplex[n].clone();
        let reflected = blend(&c, &worst.0, -1.0);
        let f_r = eval(&reflected, &mut evals);

        if f_r < simplex[0].1 {
            // try to expand further along the same direction
            let expanded = blend(&c, &worst.0, -2.0);
            let f_e = eval(&expanded, &mut evals);
            simplex[n] = if f_e < f_r {
                (expanded, f_e)
            } else {
                (reflected, f_r)
            };
        } else if f_r < simplex[n - 1].1 {
            simplex[n] = (reflected, f_r);
        } else {
            // contract toward the centroid, outside or inside
            let (anchor, f_anchor) = if f_r < worst.1 {
                (reflected.clone(), f_r)
            } else {
                (worst.0.clone(), worst.1)
            };
            let contracted = blend(&c, &anchor, 0.5);
            let f_c = eval(&contracted, &mut evals);
            if f_c < f_anchor {
                simplex[n] = (contracted, f_c);
            } else {
                // shrink everything toward the best vertex
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    entry.0 = blend(&best, &entry.0, 0.5);
                    entry.1 = eval(&entry.0, &mut evals);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    MinimumFound {
        x: simplex[0].0.clone(),
        f: simplex[0].1,
        evals,
        converged,
    }
}
