use nalgebra::DMatrix;

use super::basis::{Basis, C64};
use super::state::{LocalUnitary, OutcomeDistribution, StateVector, NORM_TOLERANCE};
use crate::error::{Error, Result};

/// Density operator over the same labeled tensor basis as [`StateVector`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    bases: Vec<Basis>,
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    /// Validates hermiticity, unit trace and positivity (eigenvalues ≥ −1e-12).
    pub fn new(matrix: DMatrix<C64>, bases: Vec<Basis>) -> Result<Self> {
        let dim = 1usize << bases.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        let rho = DensityOperator { bases, matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
        DensityOperator { bases: state.bases().to_vec(), matrix: &psi * psi.adjoint() }
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        let herm_err = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > NORM_TOLERANCE {
            return Err(Error::InvalidDensity(format!("not hermitian (deviation {herm_err:e})")));
        }
        let trace = m.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > NORM_TOLERANCE {
            return Err(Error::InvalidDensity(format!("trace {trace}")));
        }
        let min_eig = m.clone().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -NORM_TOLERANCE {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    fn full_operator(&self, unitary: &LocalUnitary) -> DMatrix<C64> {
        let n = self.bases.len();
        let m = unitary.matrix();
        let local = DMatrix::from_fn(2, 2, |i, j| m[i][j]);
        (0..n).fold(DMatrix::identity(1, 1), |acc, site| {
            if site == unitary.system() {
                acc.kronecker(&local)
            } else {
                acc.kronecker(&DMatrix::<C64>::identity(2, 2))
            }
        })
    }

    pub fn apply_local(&self, unitary: &LocalUnitary) -> Result<Self> {
        let sites = self.bases.len();
        if unitary.system() >= sites {
            return Err(Error::SystemOutOfRange { index: unitary.system(), sites });
        }
        if self.bases[unitary.system()] != unitary.from_basis() {
            return Err(Error::BasisMismatch(format!(
                "site {} is in {}, unitary expects {}",
                unitary.system(),
                self.bases[unitary.system()],
                unitary.from_basis()
            )));
        }
        let u = self.full_operator(unitary);
        let mut bases = self.bases.clone();
        bases[unitary.system()] = unitary.to_basis();
        Ok(DensityOperator { bases, matrix: &u * &self.matrix * u.adjoint() })
    }

    pub fn rebase(&self, system: usize, basis: Basis) -> Result<Self> {
        let sites = self.bases.len();
        if system >= sites {
            return Err(Error::SystemOutOfRange { index: system, sites });
        }
        if self.bases[system] == basis {
            return Ok(self.clone());
        }
        self.apply_local(&LocalUnitary::basis_change(system, self.bases[system], basis)?)
    }

    /// Zeroes every coherence between the two `basis` sectors of `system`.
    /// The result is expressed in `basis` on that site.
    pub fn dephase(&self, system: usize, basis: Basis) -> Result<Self> {
        let rho = self.rebase(system, basis)?;
        let bit = 1usize << (self.bases.len() - 1 - system);
        let mut matrix = rho.matrix.clone();
        for i in 0..matrix.nrows() {
            for j in 0..matrix.ncols() {
                if (i & bit) != (j & bit) {
                    matrix[(i, j)] = C64::new(0.0, 0.0);
                }
            }
        }
        Ok(DensityOperator { bases: rho.bases, matrix })
    }

    pub fn max_abs_diff(&self, other: &DensityOperator) -> Result<f64> {
        let other = self
            .bases
            .iter()
            .enumerate()
            .try_fold(other.clone(), |acc, (site, b)| acc.rebase(site, *b))?;
        Ok((&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

/// Dephases `density` on `system` in `basis`.
pub fn dephase(density: &DensityOperator, system: usize, basis: Basis) -> Result<DensityOperator> {
    density.dephase(system, basis)
}

/// Born-rule table of a density operator, `⟨b|ρ|b⟩` for every product vector of
/// `context`.
pub fn born_distribution_mixed(rho: &DensityOperator, context: &[Basis]) -> Result<OutcomeDistribution> {
    let n = rho.bases.len();
    if context.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: context.len() });
    }
    let in_context = context
        .iter()
        .enumerate()
        .try_fold(rho.clone(), |acc, (site, b)| acc.rebase(site, *b))?;
    let probs: Vec<f64> = (0..1usize << n).map(|i| in_context.matrix[(i, i)].re).collect();
    Ok(OutcomeDistribution::from_parts(context.to_vec(), probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{born_distribution, make_state, Outcome};

    fn hardy_density() -> DensityOperator {
        let a = C64::new(1.0 / 3f64.sqrt(), 0.0);
        let z = C64::new(0.0, 0.0);
        DensityOperator::from_pure(&make_state(&[a, z, a, a], &[Basis::Zbar, Basis::Z]).unwrap())
    }

    #[test]
    fn pure_hardy_density_is_valid() {
        let rho = hardy_density();
        rho.validate().unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dephasing_both_gives_diagonal_mixture() {
        let rho = hardy_density().dephase(0, Basis::Zbar).unwrap().dephase(1, Basis::Z).unwrap();
        rho.validate().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j && i != 1 { 1.0 / 3.0 } else { 0.0 };
                assert!((rho.matrix()[(i, j)].re - expect).abs() < 1e-15, "({i},{j})");
                assert!(rho.matrix()[(i, j)].im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dephasing_a_diagonal_state_is_a_fixed_point() {
        let rho = DensityOperator::from_pure(&StateVector::basis_state(&[Outcome::T, Outcome::UP]));
        let out = rho.dephase(1, Basis::Z).unwrap();
        assert!(out.max_abs_diff(&rho).unwrap() < 1e-15);
    }

    #[test]
    fn dephased_then_measured_in_w_contexts_is_uniform() {
        let rho = hardy_density().dephase(0, Basis::Zbar).unwrap().dephase(1, Basis::Z).unwrap();
        let table = born_distribution_mixed(&rho, &[Basis::Wbar, Basis::W]).unwrap();
        for p in table.probabilities() {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_density_born_matches_state_born() {
        let a = C64::new(1.0 / 3f64.sqrt(), 0.0);
        let z = C64::new(0.0, 0.0);
        let psi = make_state(&[a, z, a, a], &[Basis::Zbar, Basis::Z]).unwrap();
        let rho = DensityOperator::from_pure(&psi);
        for ctx in [[Basis::Wbar, Basis::W], [Basis::Zbar, Basis::W], [Basis::Wbar, Basis::Z]] {
            let d1 = born_distribution(&psi, &ctx).unwrap();
            let d2 = born_distribution_mixed(&rho, &ctx).unwrap();
            assert!(d1.max_abs_diff(&d2).unwrap() < 1e-12);
        }
    }

    #[test]
    fn invalid_matrices_rejected() {
        let m = DMatrix::from_diagonal_element(4, 4, C64::new(0.5, 0.0));
        assert!(matches!(
            DensityOperator::new(m, vec![Basis::Zbar, Basis::Z]),
            Err(Error::InvalidDensity(_))
        ));
        let mut m = DMatrix::from_diagonal_element(4, 4, C64::new(0.25, 0.0));
        m[(0, 1)] = C64::new(0.5, 0.0);
        assert!(DensityOperator::new(m, vec![Basis::Zbar, Basis::Z]).is_err());
    }
}
