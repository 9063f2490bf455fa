//! Non-Hermitian evolution generator for the single-excitation state.
//!
//! The state vector ψ collects the source amplitude, one photon amplitude per
//! (mode, ground state), and the excited-state amplitudes. Between quantum
//! jumps it evolves as dψ/dt = M ψ plus the source→mode-a drive; the lost
//! norm is accounted per decay channel by the flux integrals in `dynamics`.
//!
//! Couplings follow one uniform rule fixed by the written Hamiltonian: a row
//! with complex coupling G = coeff · g_base contributes, on the a leg,
//! −i·conj(G) to the photon equation and −i·G to the excited equation; on the
//! b leg the conjugation is reversed. Either way the coherent part of M stays
//! anti-Hermitian, so all norm loss comes from the diagonal decay terms.

use crate::error::{Error, Result};
use crate::params::{ang, SystemParams};
use crate::scheme::{BasisIndex, LevelScheme, Mode};
use ndarray::{Array1, Array2};
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The assembled generator: coupling/decay matrix, drive bookkeeping, and the
/// channel rates needed to turn amplitudes into output fluxes.
#[derive(Debug, Clone)]
pub struct Generator {
    pub basis: BasisIndex,
    pub scheme: LevelScheme,
    /// Coupling + decay matrix in rad/ns. The source row and column are zero
    /// here; source decay and drive are applied from the pulse schedule.
    m: Array2<Complex64>,
    /// Reference source decay rate, rad/ns (used by the constant-schedule
    /// closed forms; time-varying schedules override it).
    pub kappa_s_ref: f64,
    /// External coupling rate, rad/ns.
    pub kappa_ex: f64,
    /// Intrinsic loss rate, rad/ns.
    pub kappa_i: f64,
    /// Polarization decay rate per excited state (scheme order), rad/ns.
    gamma_exc: Vec<f64>,
    /// Basis slot the drive feeds: the mode-a photon with the atom in the
    /// initial ground state.
    pub drive_slot: usize,
}

/// Build the generator for `scheme` at source decay rate `kappa_s` (MHz).
pub fn build_generator(
    params: &SystemParams,
    scheme: &LevelScheme,
    kappa_s: f64,
) -> Result<Generator> {
    params.validate()?;
    if !(kappa_s >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa_s must be >= 0, got {kappa_s}"
        )));
    }
    let basis = BasisIndex::new(scheme);
    let dim = basis.dim();
    let mut m = Array2::<Complex64>::zeros((dim, dim));

    let kappa = Complex64::new(ang(params.kappa()), ang(params.delta_c));
    let h = Complex64::new(ang(params.h), 0.0);
    for k in 0..basis.n_grounds() {
        let a = basis.photon_slot(Mode::A, k);
        let b = basis.photon_slot(Mode::B, k);
        m[[a, a]] = -kappa;
        m[[b, b]] = -kappa;
        // elastic backscattering exchanges the two modes, atom untouched
        m[[a, b]] += -I * h;
        m[[b, a]] += -I * h;
    }

    let mut gamma_exc = Vec::with_capacity(basis.n_excited());
    for (j, &e) in scheme.excited.iter().enumerate() {
        let (gam, det) = if e.primed() {
            (params.gamma_prime, params.delta_a_prime)
        } else {
            (params.gamma, params.delta_a)
        };
        let slot = basis.excited_slot(j);
        m[[slot, slot]] = -Complex64::new(ang(gam), ang(det));
        gamma_exc.push(ang(gam));
    }

    let g_base = Complex64::from_polar(ang(params.g_mag), params.g_phase);
    for row in &scheme.rows {
        let k = scheme.ground_index(row.ground).ok_or_else(|| {
            Error::InvalidParameter(format!("row references ground {:?} missing from scheme", row.ground))
        })?;
        let j = scheme.excited_index(row.excited).ok_or_else(|| {
            Error::InvalidParameter(format!("row references excited {:?} missing from scheme", row.excited))
        })?;
        let g_row = row.coeff * g_base;
        let e = basis.excited_slot(j);
        match row.mode {
            Mode::A => {
                let a = basis.photon_slot(Mode::A, k);
                m[[a, e]] += -I * g_row.conj();
                m[[e, a]] += -I * g_row;
            }
            Mode::B => {
                let b = basis.photon_slot(Mode::B, k);
                m[[b, e]] += -I * g_row;
                m[[e, b]] += -I * g_row.conj();
            }
        }
    }

    let init_idx = scheme.ground_index(scheme.initial_ground).ok_or_else(|| {
        Error::InvalidParameter("initial ground state missing from scheme".into())
    })?;
    Ok(Generator {
        drive_slot: basis.photon_slot(Mode::A, init_idx),
        basis,
        scheme: scheme.clone(),
        m,
        kappa_s_ref: ang(kappa_s),
        kappa_ex: ang(params.kappa_ex),
        kappa_i: ang(params.kappa_i),
        gamma_exc,
    })
}

impl Generator {
    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Coupling/decay matrix without source decay or drive (source row and
    /// column zero), rad/ns.
    #[inline]
    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.m
    }

    /// Decay rate of excited state number `j` (scheme order), rad/ns.
    #[inline]
    pub fn gamma_of(&self, j: usize) -> f64 {
        self.gamma_exc[j]
    }

    /// Drive amplitude −2·√(κ_s·κ_ex) for a given source rate (rad/ns units in,
    /// rad/ns out).
    #[inline]
    pub fn drive_amplitude(&self, kappa_s: f64) -> f64 {
        -2.0 * (kappa_s * self.kappa_ex).sqrt()
    }

    /// Full constant-rate matrix: `matrix()` plus source decay at the
    /// reference κ_s and the drive folded into the source column. The whole
    /// cascaded system is then the autonomous linear ODE dψ/dt = M̃ψ.
    pub fn full_matrix(&self) -> Array2<Complex64> {
        let mut full = self.m.clone();
        full[[0, 0]] = Complex64::new(-self.kappa_s_ref, 0.0);
        full[[self.drive_slot, 0]] += Complex64::new(self.drive_amplitude(self.kappa_s_ref), 0.0);
        full
    }

    /// The drive column at the reference κ_s: a single entry at the mode-a
    /// slot of the initial ground state.
    pub fn drive_vector(&self) -> Array1<Complex64> {
        let mut d = Array1::zeros(self.dim());
        d[self.drive_slot] = Complex64::new(self.drive_amplitude(self.kappa_s_ref), 0.0);
        d
    }

    /// Initial state: all amplitude in the source slot.
    pub fn initial_amplitudes(&self) -> Array1<Complex64> {
        let mut psi = Array1::zeros(self.dim());
        psi[0] = Complex64::new(1.0, 0.0);
        psi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::Ground;

    fn three_level_params(g: f64, kex: f64, ki: f64, gamma: f64) -> SystemParams {
        SystemParams {
            kappa_ex: kex,
            kappa_i: ki,
            delta_c: 0.0,
            g_mag: g,
            g_phase: 0.0,
            gamma,
            delta_a: 0.0,
            h: 0.0,
            r_sigma: 0.0,
            r_pi: 0.0,
            ..SystemParams::default()
        }
    }

    /// The three-level generator must literally reproduce the coupled
    /// amplitude equations: dα = −κα − i g*ξ, dβ = −κβ − i gξ,
    /// dξ = −i gα − i g*β − γξ (plus the source drive into α).
    #[test]
    fn three_level_matrix_matches_written_equations() {
        let p = three_level_params(16.0, 30.0, 6.0, 3.0);
        let s = LevelScheme::three_level(Ground::G1);
        let gen = build_generator(&p, &s, 0.1).unwrap();
        let m = gen.matrix();
        let b = &gen.basis;
        let (a1, b2, e) = (
            b.photon_slot(Mode::A, 0),
            b.photon_slot(Mode::B, 1),
            b.excited_slot(0),
        );
        let g = Complex64::from_polar(ang(16.0), 0.0);
        let kap = Complex64::new(ang(36.0), 0.0);
        let gam = Complex64::new(ang(3.0), 0.0);
        assert!((m[[a1, a1]] + kap).norm() < 1e-15);
        assert!((m[[a1, e]] + I * g.conj()).norm() < 1e-15);
        assert!((m[[b2, e]] + I * g).norm() < 1e-15);
        assert!((m[[e, a1]] + I * g).norm() < 1e-15);
        assert!((m[[e, b2]] + I * g.conj()).norm() < 1e-15);
        assert!((m[[e, e]] + gam).norm() < 1e-15);
        // drive lands on the mode-a slot of the initial ground state
        assert_eq!(gen.drive_slot, a1);
        let d = gen.drive_vector();
        assert!((d[a1].re + 2.0 * (ang(0.1) * ang(30.0)).sqrt()).abs() < 1e-15);
    }

    /// Conjugation placement with a complex coupling phase: the a-leg photon
    /// equation sees conj(G), the b-leg sees G, and the excited equation the
    /// mirror of each.
    #[test]
    fn conjugation_convention_with_phase() {
        let mut p = three_level_params(16.0, 30.0, 6.0, 3.0);
        p.g_phase = 0.7;
        let s = LevelScheme::three_level(Ground::G1);
        let gen = build_generator(&p, &s, 0.1).unwrap();
        let m = gen.matrix();
        let b = &gen.basis;
        let g = Complex64::from_polar(ang(16.0), 0.7);
        let (a1, b2, e) = (
            b.photon_slot(Mode::A, 0),
            b.photon_slot(Mode::B, 1),
            b.excited_slot(0),
        );
        assert!((m[[a1, e]] - (-I * g.conj())).norm() < 1e-15);
        assert!((m[[e, a1]] - (-I * g)).norm() < 1e-15);
        assert!((m[[b2, e]] - (-I * g)).norm() < 1e-15);
        assert!((m[[e, b2]] - (-I * g.conj())).norm() < 1e-15);
    }

    /// The non-source block must satisfy M + M† = −2·diag(losses): the
    /// coherent part is anti-Hermitian for any phases and coefficients.
    #[test]
    fn coherent_part_anti_hermitian_all_schemes() {
        let mut p = SystemParams::default();
        p.g_phase = 1.234;
        p.delta_c = -7.0;
        for scheme in [
            LevelScheme::three_level(Ground::G1),
            LevelScheme::four_level(&p, -1, Ground::G1),
            LevelScheme::four_level(&p, 1, Ground::G2),
            LevelScheme::rb87(&p, Ground::G1),
        ] {
            let gen = build_generator(&p, &scheme, 0.2).unwrap();
            let m = gen.matrix();
            let b = &gen.basis;
            for i in 1..gen.dim() {
                for j in 1..gen.dim() {
                    let s = m[[i, j]] + m[[j, i]].conj();
                    if i == j {
                        let loss = match b.slots[i] {
                            crate::scheme::Slot::Photon(..) => gen.kappa_ex + gen.kappa_i,
                            crate::scheme::Slot::Excited(e) => {
                                let j = scheme.excited_index(e).unwrap();
                                gen.gamma_of(j)
                            }
                            crate::scheme::Slot::Source => unreachable!(),
                        };
                        assert!((s - Complex64::new(-2.0 * loss, 0.0)).norm() < 1e-14);
                    } else {
                        assert!(s.norm() < 1e-14, "off-diagonal ({i},{j}) not anti-Hermitian");
                    }
                }
            }
        }
    }

    /// With impurities and backscattering off, the ⁸⁷Rb generator restricted
    /// to the four-level slots equals the four-level generator, and every
    /// entry touching the extra slots vanishes.
    #[test]
    fn rb87_reduces_to_four_level_minus() {
        let mut p = SystemParams::default();
        p.r_sigma = 0.0;
        p.r_pi = 0.0;
        p.h = 0.0;
        let rb = build_generator(&p, &LevelScheme::rb87(&p, Ground::G1), 0.1).unwrap();
        let fl = build_generator(&p, &LevelScheme::four_level(&p, -1, Ground::G1), 0.1).unwrap();
        // slots of the reduced system inside the full basis:
        // src, (a,G1), (a,G2), (b,G1), (b,G2), e, e'
        let keep = [0usize, 1, 3, 4, 6, 7, 9];
        let mf = fl.full_matrix();
        let mr = rb.full_matrix();
        for (ri, &i) in keep.iter().enumerate() {
            for (rj, &j) in keep.iter().enumerate() {
                assert!(
                    (mr[[i, j]] - mf[[ri, rj]]).norm() < 1e-15,
                    "mismatch at kept slot ({i},{j})"
                );
            }
        }
        // the pruned slots may couple among themselves (G0 ↔ edge states) but
        // must be disconnected from the kept subspace
        for i in 0..rb.dim() {
            for j in 0..rb.dim() {
                if keep.contains(&i) != keep.contains(&j) {
                    assert!(
                        mr[[i, j]].norm() == 0.0,
                        "pruned slot coupled to kept subspace at ({i},{j})"
                    );
                }
            }
        }
    }

    /// Relabeling a↔b, G1↔G2 maps the symmetric three-level generator onto
    /// itself (as a basis permutation).
    #[test]
    fn relabeling_symmetry_three_level() {
        let p = three_level_params(16.0, 30.0, 6.0, 3.0);
        let s = LevelScheme::three_level(Ground::G1);
        let gen = build_generator(&p, &s, 0.1).unwrap();
        let gen_m = build_generator(&p, &s.mirrored(), 0.1).unwrap();
        // permutation: src→src, (a,G1)↔(b,G2), (a,G2)↔(b,G1), e→e
        let perm = [0usize, 4, 3, 2, 1, 5];
        let m = gen.matrix();
        let mm = gen_m.matrix();
        for i in 0..6 {
            for j in 0..6 {
                assert!((m[[i, j]] - mm[[perm[i], perm[j]]]).norm() < 1e-15);
            }
        }
    }
}
