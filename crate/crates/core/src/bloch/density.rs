use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::liouvillian::{unvec, vec_index, Liouvillian, Matrix8, DIM, SUPER_DIM};
use crate::atom::{term_indices, Term};
use crate::error::{Error, Result};

/// Relative size below which an LU pivot triggers the SVD rank check.
const PIVOT_TOLERANCE: f64 = 1e-11;
/// Singular values below this fraction of the largest span the null space.
const NULL_SPACE_TOLERANCE: f64 = 1e-10;

/// 8×8 density matrix in the [`crate::atom::STATES`] basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(pub Matrix8);

/// Largest violations of the density-matrix invariants.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Validity {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl Validity {
    pub fn ok(&self) -> bool {
        self.hermiticity <= 1e-12 && self.trace_error <= 1e-10 && self.min_eigenvalue >= -1e-9
    }
}

impl DensityMatrix {
    /// Diagonal mixture with the given populations (normalized to unit trace).
    pub fn from_populations(pops: &[f64; DIM]) -> Self {
        let total: f64 = pops.iter().sum();
        let mut m = Matrix8::zeros();
        for (i, p) in pops.iter().enumerate() {
            m[(i, i)] = Complex64::new(p / total, 0.0);
        }
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix8 {
        &self.0
    }

    pub fn populations(&self) -> [f64; DIM] {
        std::array::from_fn(|i| self.0[(i, i)].re)
    }

    pub fn term_population(&self, term: Term) -> f64 {
        term_indices(term).map(|i| self.0[(i, i)].re).sum()
    }

    /// P_P, the total P1/2 population.
    pub fn p_population(&self) -> f64 {
        self.term_population(Term::P12)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn validity(&self) -> Validity {
        let scale = self.0.norm().max(f64::MIN_POSITIVE);
        let hermiticity = (self.0 - self.0.adjoint()).norm() / scale;
        let trace_error = (self.trace() - Complex64::ONE).norm();
        let herm = (self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eigenvalue = herm
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        Validity {
            hermiticity,
            trace_error,
            min_eigenvalue,
        }
    }
}

/// Number of (numerically) zero singular values of L.
pub fn null_space_dimension(l: &Liouvillian) -> usize {
    let sv = l.matrix.clone().singular_values();
    let max = sv.max();
    sv.iter().filter(|&&s| s <= NULL_SPACE_TOLERANCE * max).count()
}

/// Stationary state of `l`: solves L·vec(ρ) = 0 with the ρ₀₀ row replaced by
/// Tr ρ = 1.
///
/// Fails with [`Error::NonUniqueSteadyState`] when the null space of L has
/// more than one dimension.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let mut a: DMatrix<Complex64> = l.matrix.clone();
    let trace_row = vec_index(0, 0);
    for col in 0..SUPER_DIM {
        a[(trace_row, col)] = Complex64::ZERO;
    }
    for i in 0..DIM {
        a[(trace_row, vec_index(i, i))] = Complex64::ONE;
    }
    let mut rhs = DVector::zeros(SUPER_DIM);
    rhs[trace_row] = Complex64::ONE;

    let lu = a.lu();
    let u = lu.u();
    let pivots = u.diagonal().map(|z| z.norm());
    let suspicious = pivots.min() <= PIVOT_TOLERANCE * pivots.max();
    if suspicious {
        let dim = null_space_dimension(l);
        if dim > 1 {
            return Err(Error::NonUniqueSteadyState { dimension: dim });
        }
    }
    let x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("steady-state system is singular".into()))?;

    let raw = unvec(&x);
    let herm = (raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    let tr = herm.trace();
    Ok(DensityMatrix(herm / tr))
}
