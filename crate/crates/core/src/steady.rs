//! Monochromatic (continuous-wave) scattering: drive the system with a unit
//! carrier at the probe frequency and solve the linear steady state. This is
//! the κ_s → 0 limit of the pulsed problem and the numerically exact
//! counterpart of the closed-form transmission/reflection expressions in
//! `analytic`, valid for every scheme, including backscattering and
//! impurity couplings.

use crate::error::Result;
use crate::expm::lu_solve;
use crate::generator::Generator;
use crate::scheme::Mode;
use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Steady-state output-channel probabilities under unit input flux.
/// Per-ground entries follow the scheme's ground ordering; `spontaneous`
/// follows the excited ordering. `transmission[initial]` includes the
/// interference of the direct carrier with the cavity re-emission.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub transmission: Vec<f64>,
    pub reflection: Vec<f64>,
    pub intrinsic: Vec<f64>,
    pub spontaneous: Vec<f64>,
    /// Complex transmitted amplitude in the carrier channel.
    pub t_amplitude: Complex64,
    /// Intracavity + excited steady-state amplitudes (system slots, i.e.
    /// basis slots 1.. of the generator).
    pub amplitudes: Array1<Complex64>,
}

impl SteadyState {
    pub fn total_transmission(&self) -> f64 {
        self.transmission.iter().sum()
    }
    pub fn total_reflection(&self) -> f64 {
        self.reflection.iter().sum()
    }
    pub fn total_loss(&self) -> f64 {
        self.intrinsic.iter().sum::<f64>() + self.spontaneous.iter().sum::<f64>()
    }
    /// |1 − (T + R + losses)|; zero up to roundoff for any parameters.
    pub fn conservation_defect(&self) -> f64 {
        (1.0 - self.total_transmission() - self.total_reflection() - self.total_loss()).abs()
    }
}

/// Solve the steady state of the coherently driven system. The unit-flux
/// carrier a_in enters the mode-a equation of the initial ground state as
/// −√(2κ_ex)·a_in, so the system amplitudes obey M·u = √(2κ_ex)·e_drive and
/// the carrier output is a_out = a_in + √(2κ_ex)·u_drive.
pub fn steady_state(gen: &Generator) -> Result<SteadyState> {
    let dim = gen.dim();
    let n = dim - 1; // system block: everything but the source slot
    let m = gen.matrix();
    let mut sys = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            sys[[i, j]] = m[[i + 1, j + 1]];
        }
    }
    let root_ex = (2.0 * gen.kappa_ex).sqrt();
    let mut rhs = Array1::<Complex64>::zeros(n);
    rhs[gen.drive_slot - 1] = Complex64::new(root_ex, 0.0);
    let u = lu_solve(&sys, &rhs)?;

    let basis = &gen.basis;
    let n_g = basis.n_grounds();
    let n_e = basis.n_excited();
    let at = |slot: usize| u[slot - 1];

    let init = gen
        .scheme
        .ground_index(gen.scheme.initial_ground)
        .expect("initial ground state present");
    let t_amplitude = Complex64::new(1.0, 0.0) + root_ex * at(gen.drive_slot);

    let mut transmission = vec![0.0; n_g];
    let mut reflection = vec![0.0; n_g];
    let mut intrinsic = vec![0.0; n_g];
    for k in 0..n_g {
        let alpha = at(basis.photon_slot(Mode::A, k));
        let beta = at(basis.photon_slot(Mode::B, k));
        transmission[k] = if k == init {
            t_amplitude.norm_sqr()
        } else {
            2.0 * gen.kappa_ex * alpha.norm_sqr()
        };
        reflection[k] = 2.0 * gen.kappa_ex * beta.norm_sqr();
        intrinsic[k] = 2.0 * gen.kappa_i * (alpha.norm_sqr() + beta.norm_sqr());
    }
    let mut spontaneous = vec![0.0; n_e];
    for j in 0..n_e {
        spontaneous[j] = 2.0 * gen.gamma_of(j) * at(basis.excited_slot(j)).norm_sqr();
    }

    Ok(SteadyState {
        transmission,
        reflection,
        intrinsic,
        spontaneous,
        t_amplitude,
        amplitudes: u,
    })
}
