//! Lindblad generator for the eight-level system in the rotating frame.
//!
//! Density matrices are vectorized row-major: `vec(ρ)[8·i + j] = ρ_ij`.

use nalgebra::{DMatrix, DVector, SMatrix, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ExperimentGeometry;
use crate::atom::{
    coupling_coefficient, rabi_frequency, term_indices, zeeman_shift, LaserField, LevelScheme,
    PhysicalConstants, Term, Transition, STATES,
};
use crate::error::{Error, Result};

pub const DIM: usize = 8;
pub const SUPER_DIM: usize = DIM * DIM;

pub type Matrix8 = SMatrix<Complex64, DIM, DIM>;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub(crate) fn vec_index(i: usize, j: usize) -> usize {
    i * DIM + j
}

/// How spontaneous emission is split into jump operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// One jump operator per (lower term, photon polarization q), summing all
    /// sublevel pairs with that q. Transfers Zeeman coherences of P1/2 to the
    /// lower manifold.
    #[default]
    Collective,
    /// One jump operator per (upper sublevel, lower sublevel) pair with rate
    /// Γ_t·c². Populations evolve identically; coherence transfer is dropped.
    PerChannel,
}

/// Superoperator acting on vectorized density matrices.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub matrix: DMatrix<Complex64>,
}

impl Liouvillian {
    pub fn apply(&self, rho: &Matrix8) -> Matrix8 {
        unvec(&(&self.matrix * vectorize(rho)))
    }

    /// Frobenius norm of the superoperator.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// ‖L·vec(ρ)‖.
    pub fn residual(&self, rho: &Matrix8) -> f64 {
        (&self.matrix * vectorize(rho)).norm()
    }

    /// Largest |Tr(L E_kl)| over the matrix units; zero for a trace-preserving
    /// generator.
    pub fn trace_defect(&self) -> f64 {
        (0..SUPER_DIM)
            .map(|col| {
                (0..DIM)
                    .map(|i| self.matrix[(vec_index(i, i), col)])
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

pub fn vectorize(rho: &Matrix8) -> DVector<Complex64> {
    DVector::from_fn(SUPER_DIM, |k, _| rho[(k / DIM, k % DIM)])
}

pub fn unvec(v: &DVector<Complex64>) -> Matrix8 {
    Matrix8::from_fn(|i, j| v[vec_index(i, j)])
}

/// Orthonormal frame (x̂', ŷ', ẑ') with ẑ' along the quantization axis.
fn quantization_frame(b_direction: &Vector3<f64>) -> [Vector3<f64>; 3] {
    let z = b_direction.normalize();
    // seed with the lab axis least aligned with z
    let seed = [Vector3::x(), Vector3::y(), Vector3::z()]
        .into_iter()
        .min_by(|a, b| a.dot(&z).abs().total_cmp(&b.dot(&z).abs()))
        .unwrap();
    let x = (seed - z * seed.dot(&z)).normalize();
    let y = z.cross(&x);
    [x, y, z]
}

/// Amplitude (−1)^q ε_{−q} with which a field of polarization ε drives a
/// Δm = q transition, for q = −1, 0, +1.
pub fn polarization_components(
    polarization: &Vector3<f64>,
    b_direction: &Vector3<f64>,
) -> [Complex64; 3] {
    let [x, y, z] = quantization_frame(b_direction);
    let (ex, ey, ez) = (polarization.dot(&x), polarization.dot(&y), polarization.dot(&z));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        Complex64::new(ex, ey) * s,
        Complex64::new(ez, 0.0),
        -Complex64::new(ex, -ey) * s,
    ]
}

/// Assigns each laser to the transition it drives; at most one laser per
/// transition.
pub(crate) fn assign_lasers<'a>(
    scheme: &LevelScheme,
    lasers: &'a [LaserField],
) -> Result<[Option<&'a LaserField>; 2]> {
    let mut slots: [Option<&LaserField>; 2] = [None, None];
    for laser in lasers {
        laser.validate()?;
        let slot = match scheme.transition_for(laser.wavelength)? {
            Transition::Cooling => 0,
            Transition::Repump => 1,
        };
        if slots[slot].is_some() {
            return Err(Error::UnsupportedConfiguration(
                "two lasers drive the same transition".into(),
            ));
        }
        slots[slot] = Some(laser);
    }
    Ok(slots)
}

/// Rotating-frame Hamiltonian (units of ħ, rad/s).
///
/// Frame energies: S1/2 at 0, P1/2 at −Δ₄₉₃, D3/2 at −Δ₄₉₃ + Δ₆₅₀, plus the
/// linear Zeeman shift of each sublevel along `geometry.b_direction`.
pub fn hamiltonian(
    scheme: &LevelScheme,
    constants: &PhysicalConstants,
    lasers: &[LaserField],
    b_field: f64,
    geometry: &ExperimentGeometry,
) -> Result<Matrix8> {
    let [cooling, repump] = assign_lasers(scheme, lasers)?;
    let d1 = cooling.map_or(0.0, |l| l.detuning);
    let d2 = repump.map_or(0.0, |l| l.detuning);

    let mut h = Matrix8::zeros();
    for (i, s) in STATES.iter().enumerate() {
        let offset = match s.term {
            Term::S12 => 0.0,
            Term::P12 => -d1,
            Term::D32 => -d1 + d2,
        };
        h[(i, i)] = Complex64::new(offset + zeeman_shift(scheme, constants, *s, b_field)?, 0.0);
    }

    for (transition, laser) in [(Transition::Cooling, cooling), (Transition::Repump, repump)] {
        let Some(laser) = laser else { continue };
        let omega = rabi_frequency(scheme, constants, laser, transition)?;
        if omega == 0.0 {
            continue;
        }
        let pol = polarization_components(&laser.polarization, &geometry.b_direction);
        for g in term_indices(transition.lower_term()) {
            for e in term_indices(Term::P12) {
                let dq = STATES[e].twice_m - STATES[g].twice_m;
                if dq.abs() > 2 {
                    continue;
                }
                let q = dq / 2;
                let c = coupling_coefficient(STATES[g], STATES[e], q)?;
                let amp = pol[(q + 1) as usize] * (0.5 * omega * c);
                h[(e, g)] += amp;
                h[(g, e)] += amp.conj();
            }
        }
    }
    Ok(h)
}

/// Superoperator of ρ ↦ −i[H, ρ].
pub fn commutator_superop(h: &Matrix8) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(SUPER_DIM, SUPER_DIM);
    for i in 0..DIM {
        for j in 0..DIM {
            let row = vec_index(i, j);
            for k in 0..DIM {
                // H_ik ρ_kj
                m[(row, vec_index(k, j))] += -I * h[(i, k)];
                // ρ_ik H_kj
                m[(row, vec_index(i, k))] += I * h[(k, j)];
            }
        }
    }
    m
}

/// Adds rate·D[L] to `m`, with D[L]ρ = LρL† − ½{L†L, ρ}.
fn add_lindblad_term(m: &mut DMatrix<Complex64>, jump: &Matrix8, rate: f64) {
    if rate == 0.0 {
        return;
    }
    let ldl = jump.adjoint() * jump;
    for i in 0..DIM {
        for j in 0..DIM {
            let row = vec_index(i, j);
            for k in 0..DIM {
                for l in 0..DIM {
                    let v = jump[(i, k)] * jump[(j, l)].conj();
                    if v != Complex64::ZERO {
                        m[(row, vec_index(k, l))] += v * rate;
                    }
                }
                m[(row, vec_index(k, j))] -= ldl[(i, k)] * (0.5 * rate);
                m[(row, vec_index(i, k))] -= ldl[(k, j)] * (0.5 * rate);
            }
        }
    }
}

/// Spontaneous emission from P1/2 plus laser phase diffusion. Independent of
/// detunings, intensities and field strength, so fits can reuse it.
pub fn dissipator_superop(
    scheme: &LevelScheme,
    decay: DecayModel,
    cooling_linewidth: f64,
    repump_linewidth: f64,
) -> Result<DMatrix<Complex64>> {
    let mut m = DMatrix::zeros(SUPER_DIM, SUPER_DIM);
    for transition in [Transition::Cooling, Transition::Repump] {
        let gamma = scheme.partial_rate(transition);
        let lower: Vec<usize> = term_indices(transition.lower_term()).collect();
        match decay {
            DecayModel::Collective => {
                for q in -1..=1 {
                    let mut jump = Matrix8::zeros();
                    for &g in &lower {
                        for e in term_indices(Term::P12) {
                            let c = coupling_coefficient(STATES[g], STATES[e], q)?;
                            jump[(g, e)] = Complex64::new(c, 0.0);
                        }
                    }
                    add_lindblad_term(&mut m, &jump, gamma);
                }
            }
            DecayModel::PerChannel => {
                for &g in &lower {
                    for e in term_indices(Term::P12) {
                        let dq = STATES[e].twice_m - STATES[g].twice_m;
                        if dq.abs() > 2 {
                            continue;
                        }
                        let c = coupling_coefficient(STATES[g], STATES[e], dq / 2)?;
                        let mut jump = Matrix8::zeros();
                        jump[(g, e)] = Complex64::ONE;
                        add_lindblad_term(&mut m, &jump, gamma * c * c);
                    }
                }
            }
        }
    }

    // The cooling-laser phase rides on P and D, the repumper phase on D only.
    let mut proj_pd = Matrix8::zeros();
    let mut proj_d = Matrix8::zeros();
    for p in term_indices(Term::P12) {
        proj_pd[(p, p)] = Complex64::ONE;
    }
    for d in term_indices(Term::D32) {
        proj_pd[(d, d)] = Complex64::ONE;
        proj_d[(d, d)] = Complex64::ONE;
    }
    add_lindblad_term(&mut m, &proj_pd, cooling_linewidth);
    add_lindblad_term(&mut m, &proj_d, repump_linewidth);
    Ok(m)
}

/// L = −i[H, ·] + Σ D[L_k] for the given lasers, field magnitude (tesla) and
/// geometry, with collective spontaneous emission.
pub fn build_liouvillian(
    scheme: &LevelScheme,
    constants: &PhysicalConstants,
    lasers: &[LaserField],
    b_field: f64,
    geometry: &ExperimentGeometry,
) -> Result<Liouvillian> {
    build_liouvillian_with(scheme, constants, lasers, b_field, geometry, DecayModel::default())
}

pub fn build_liouvillian_with(
    scheme: &LevelScheme,
    constants: &PhysicalConstants,
    lasers: &[LaserField],
    b_field: f64,
    geometry: &ExperimentGeometry,
    decay: DecayModel,
) -> Result<Liouvillian> {
    scheme.validate()?;
    geometry.validate()?;
    let [cooling, repump] = assign_lasers(scheme, lasers)?;
    let h = hamiltonian(scheme, constants, lasers, b_field, geometry)?;
    let diss = dissipator_superop(
        scheme,
        decay,
        cooling.map_or(0.0, |l| l.linewidth),
        repump.map_or(0.0, |l| l.linewidth),
    )?;
    Ok(Liouvillian {
        matrix: commutator_superop(&h) + diss,
    })
}
