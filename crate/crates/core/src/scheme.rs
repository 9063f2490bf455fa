//! Level schemes: which ground and excited states exist and how the two
//! counterpropagating modes couple them.
//!
//! The single excitation lives in exactly one of: the source cavity, mode a
//! (the driven, forward-propagating mode) with the atom in some ground state,
//! mode b (backward) with the atom in some ground state, or an atomic excited
//! state. Ground states are the F=1 Zeeman sublevels m = −1, 0, +1, written
//! G1, G0, G2; excited states are the m′ = 0 levels of the two hyperfine
//! manifolds (e unprimed, e′ primed) plus the primed m′ = ∓1 edge states
//! e1′, e2′ reachable only through impurity π/σ couplings.

use crate::params::SystemParams;
use num_complex::Complex64;

/// Which resonator mode a transition row couples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
}

/// Atomic ground states (F=1 Zeeman sublevels m = −1, 0, +1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ground {
    G1,
    G0,
    G2,
}

impl Ground {
    /// The mirror partner under a↔b / left↔right relabeling. G0 is its own mirror.
    pub fn opposite(self) -> Ground {
        match self {
            Ground::G1 => Ground::G2,
            Ground::G0 => Ground::G0,
            Ground::G2 => Ground::G1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Ground::G1 => "G1",
            Ground::G0 => "G0",
            Ground::G2 => "G2",
        }
    }
}

/// Atomic excited states. `E` is the unprimed m′=0 level; the primed manifold
/// holds `E1Prime` (m′=−1), `EPrime` (m′=0), `E2Prime` (m′=+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Excited {
    E,
    E1Prime,
    EPrime,
    E2Prime,
}

impl Excited {
    /// Does this state belong to the primed manifold (γ′, δ_a′, g′)?
    pub fn primed(self) -> bool {
        !matches!(self, Excited::E)
    }

    pub fn label(self) -> &'static str {
        match self {
            Excited::E => "e",
            Excited::E1Prime => "e1'",
            Excited::EPrime => "e'",
            Excited::E2Prime => "e2'",
        }
    }
}

/// One coupling term: `coeff * g_base` connects (mode photon, `ground`) with
/// `excited`, where `g_base` is the complex base coupling `g_mag·e^{iφ}`.
/// Primed rows bake `g_prime_ratio` into `coeff`. Written against mode a the
/// photon-creation term carries the conjugate coupling, against mode b the
/// plain one; the generator applies that convention uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionRow {
    pub mode: Mode,
    pub ground: Ground,
    pub excited: Excited,
    pub coeff: Complex64,
}

/// Preset scheme families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Ideal Λ system: G1 —a→ e ←b— G2.
    ThreeLevel,
    /// Λ system plus a second shared excited level e′ whose b-leg carries the
    /// relative sign `s` (+1 symmetric, −1 antisymmetric).
    FourLevel { s: i8 },
    /// Full ⁸⁷Rb F=1 model: three grounds, four excited states, impurity
    /// σ/π rows weighted by r_σ, r_π.
    Rb87,
}

/// A concrete level scheme: state lists, coupling rows, and which ground
/// state the atom starts in (also the ground state the source photon is
/// correlated with).
#[derive(Debug, Clone, PartialEq)]
pub struct LevelScheme {
    pub kind: SchemeKind,
    pub grounds: Vec<Ground>,
    pub excited: Vec<Excited>,
    pub rows: Vec<TransitionRow>,
    pub initial_ground: Ground,
}

fn row(mode: Mode, ground: Ground, excited: Excited, coeff: f64) -> TransitionRow {
    TransitionRow {
        mode,
        ground,
        excited,
        coeff: Complex64::new(coeff, 0.0),
    }
}

impl LevelScheme {
    /// Ideal Λ system; two grounds, one excited state, unit coefficients.
    pub fn three_level(initial_ground: Ground) -> LevelScheme {
        use {Excited::*, Ground::*, Mode::*};
        assert!(initial_ground != G0, "the ideal Λ system has no G0");
        LevelScheme {
            kind: SchemeKind::ThreeLevel,
            grounds: vec![G1, G2],
            excited: vec![E],
            rows: vec![row(A, G1, E, 1.0), row(B, G2, E, 1.0)],
            initial_ground,
        }
    }

    /// Λ system with a second excited level e′ of coupling ratio
    /// `params.g_prime_ratio` and relative b-leg sign `s` ∈ {+1, −1}.
    pub fn four_level(params: &SystemParams, s: i8, initial_ground: Ground) -> LevelScheme {
        use {Excited::*, Ground::*, Mode::*};
        assert!(s == 1 || s == -1, "relative sign must be ±1");
        assert!(initial_ground != G0, "the four-level system has no G0");
        let eta = params.g_prime_ratio;
        LevelScheme {
            kind: SchemeKind::FourLevel { s },
            grounds: vec![G1, G2],
            excited: vec![E, EPrime],
            rows: vec![
                row(A, G1, E, 1.0),
                row(B, G2, E, 1.0),
                row(A, G1, EPrime, eta),
                row(B, G2, EPrime, s as f64 * eta),
            ],
            initial_ground,
        }
    }

    /// Full ⁸⁷Rb F=1 scheme. The ideal rows drive G1 —a→ e,e′ and G2 —b→ e,e′
    /// (with the antisymmetric sign on the primed b-leg); the impurity rows
    /// add the residual σ couplings (cross-ground, ratio r_σ) and π couplings
    /// (same-m, ratio r_π), including the edge states e1′, e2′. The relative
    /// signs are the F=1→F′ Clebsch–Gordan signs.
    pub fn rb87(params: &SystemParams, initial_ground: Ground) -> LevelScheme {
        use {Excited::*, Ground::*, Mode::*};
        let eta = params.g_prime_ratio;
        let (rs, rp) = (params.r_sigma, params.r_pi);
        LevelScheme {
            kind: SchemeKind::Rb87,
            grounds: vec![G1, G0, G2],
            excited: vec![E, E1Prime, EPrime, E2Prime],
            rows: vec![
                // ideal Λ legs
                row(A, G1, E, 1.0),
                row(B, G2, E, 1.0),
                row(A, G1, EPrime, eta),
                row(B, G2, EPrime, -eta),
                // residual σ into the unprimed and primed m′=0 levels
                row(A, G2, E, rs),
                row(B, G1, E, rs),
                row(A, G2, EPrime, -rs * eta),
                row(B, G1, EPrime, rs * eta),
                // residual π: G0 to e, and G1/G2 to the primed edge states
                row(A, G0, E, rp),
                row(B, G0, E, rp),
                row(A, G1, E1Prime, -rp * eta),
                row(B, G1, E1Prime, -rp * eta),
                row(A, G2, E2Prime, rp * eta),
                row(B, G2, E2Prime, rp * eta),
                // ideal σ legs out of G0 into the edge states
                row(A, G0, E2Prime, eta),
                row(B, G0, E1Prime, -eta),
                // residual σ out of G0 into the "wrong" edge states
                row(A, G0, E1Prime, -rs * eta),
                row(B, G0, E2Prime, rs * eta),
            ],
            initial_ground,
        }
    }

    /// Attach an extra phase to the coupling row matching (mode, ground,
    /// excited). Defaults to zero everywhere; panics if the row is absent.
    pub fn with_row_phase(mut self, mode: Mode, ground: Ground, excited: Excited, phase: f64) -> Self {
        let r = self
            .rows
            .iter_mut()
            .find(|r| r.mode == mode && r.ground == ground && r.excited == excited)
            .expect("no such transition row in this scheme");
        r.coeff *= Complex64::from_polar(1.0, phase);
        self
    }

    /// The mirrored experiment: swap modes a↔b and grounds G1↔G2 everywhere,
    /// including the initial ground state. For a left-incident photon on the
    /// original system this describes a right-incident photon, expressed in
    /// the left-incident convention.
    pub fn mirrored(&self) -> LevelScheme {
        let flip_mode = |m| match m {
            Mode::A => Mode::B,
            Mode::B => Mode::A,
        };
        LevelScheme {
            kind: self.kind,
            grounds: self.grounds.clone(),
            excited: self.excited.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| TransitionRow {
                    mode: flip_mode(r.mode),
                    ground: r.ground.opposite(),
                    excited: r.excited,
                    coeff: r.coeff,
                })
                .collect(),
            initial_ground: self.initial_ground.opposite(),
        }
    }

    pub fn ground_index(&self, g: Ground) -> Option<usize> {
        self.grounds.iter().position(|&x| x == g)
    }

    pub fn excited_index(&self, e: Excited) -> Option<usize> {
        self.excited.iter().position(|&x| x == e)
    }
}

/// One slot of the single-excitation basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    /// Photon still in the source cavity, atom in the initial ground state.
    Source,
    /// Photon in a resonator mode, atom in `Ground`.
    Photon(Mode, Ground),
    /// Atom excited, no photon.
    Excited(Excited),
}

/// Basis ordering: slot 0 the source, then mode-a photon slots over grounds
/// in scheme order, then mode-b, then the excited states in scheme order.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisIndex {
    pub slots: Vec<Slot>,
    n_grounds: usize,
    n_excited: usize,
}

impl BasisIndex {
    pub fn new(scheme: &LevelScheme) -> BasisIndex {
        let mut slots = vec![Slot::Source];
        for &m in &[Mode::A, Mode::B] {
            for &g in &scheme.grounds {
                slots.push(Slot::Photon(m, g));
            }
        }
        for &e in &scheme.excited {
            slots.push(Slot::Excited(e));
        }
        BasisIndex {
            slots,
            n_grounds: scheme.grounds.len(),
            n_excited: scheme.excited.len(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.slots.len()
    }

    #[inline]
    pub fn n_grounds(&self) -> usize {
        self.n_grounds
    }

    #[inline]
    pub fn n_excited(&self) -> usize {
        self.n_excited
    }

    /// Slot of the mode-`m` photon with the atom in ground state number `k`
    /// (scheme ordering).
    #[inline]
    pub fn photon_slot(&self, m: Mode, k: usize) -> usize {
        debug_assert!(k < self.n_grounds);
        1 + k + if m == Mode::B { self.n_grounds } else { 0 }
    }

    /// Slot of excited state number `j` (scheme ordering).
    #[inline]
    pub fn excited_slot(&self, j: usize) -> usize {
        debug_assert!(j < self.n_excited);
        1 + 2 * self.n_grounds + j
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_dimensions() {
        let p = SystemParams::default();
        assert_eq!(BasisIndex::new(&LevelScheme::three_level(Ground::G1)).dim(), 6);
        assert_eq!(
            BasisIndex::new(&LevelScheme::four_level(&p, -1, Ground::G1)).dim(),
            7
        );
        assert_eq!(BasisIndex::new(&LevelScheme::rb87(&p, Ground::G1)).dim(), 11);
    }

    #[test]
    fn basis_ordering_source_a_b_excited() {
        let p = SystemParams::default();
        let s = LevelScheme::rb87(&p, Ground::G1);
        let b = BasisIndex::new(&s);
        assert_eq!(b.slots[0], Slot::Source);
        assert_eq!(b.slots[1], Slot::Photon(Mode::A, Ground::G1));
        assert_eq!(b.slots[2], Slot::Photon(Mode::A, Ground::G0));
        assert_eq!(b.slots[3], Slot::Photon(Mode::A, Ground::G2));
        assert_eq!(b.slots[4], Slot::Photon(Mode::B, Ground::G1));
        assert_eq!(b.slots[7], Slot::Excited(Excited::E));
        assert_eq!(b.slots[10], Slot::Excited(Excited::E2Prime));
        assert_eq!(b.photon_slot(Mode::B, 2), 6);
        assert_eq!(b.excited_slot(3), 10);
    }

    #[test]
    fn rb87_with_zero_impurities_matches_four_level_rows() {
        let mut p = SystemParams::default();
        p.r_sigma = 0.0;
        p.r_pi = 0.0;
        let rb = LevelScheme::rb87(&p, Ground::G1);
        let active: Vec<_> = rb
            .rows
            .iter()
            .filter(|r| r.coeff.norm() > 0.0 && r.ground != Ground::G0)
            .cloned()
            .collect();
        let fl = LevelScheme::four_level(&p, -1, Ground::G1);
        assert_eq!(active.len(), fl.rows.len());
        for (a, b) in active.iter().zip(&fl.rows) {
            assert_eq!(a.mode, b.mode);
            assert_eq!(a.ground, b.ground);
            assert_eq!(a.excited, b.excited);
            assert!((a.coeff - b.coeff).norm() < 1e-15);
        }
    }

    #[test]
    fn mirrored_swaps_modes_and_outer_grounds() {
        let s = LevelScheme::three_level(Ground::G1);
        let m = s.mirrored();
        assert_eq!(m.initial_ground, Ground::G2);
        assert!(m
            .rows
            .iter()
            .any(|r| r.mode == Mode::B && r.ground == Ground::G2 && r.excited == Excited::E));
        // mirroring twice restores the original
        assert_eq!(m.mirrored(), s);
    }
}
