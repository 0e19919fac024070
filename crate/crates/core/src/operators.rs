//! Right-hand side of the Galerkin system `dc/dt = -A c - N(c) + F(c)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::forcing::ForcingSpec;
use crate::galerkin;
use crate::geometry::{SurfaceGrid, ViscosityField};
use crate::harmonics::{index_to_lm, n_coeffs, SpectralState};
use crate::killing::KillingBasis;

/// Assembled weak-form Stokes operator `A_ij = ∫ 2ν ε(Φ_i):ε(Φ_j) dS`.
#[derive(Debug, Clone)]
pub struct StokesForm {
    grid_id: u64,
    degree: usize,
    matrix: DMatrix<f64>,
    // constant-viscosity eigenvalue per degree, index l
    lambda: Vec<f64>,
    nu_star: f64,
    nu_max: f64,
    // A - ν_* D, absent for constant viscosity
    remainder: Option<DMatrix<f64>>,
}

/// Minimal sphere-grid degree that integrates the weighted strain products of
/// degree-`L` fields exactly for a viscosity of harmonic degree `nu_degree`.
pub fn stokes_grid_degree(degree: usize, nu_degree: usize) -> usize {
    degree + 1 + nu_degree.div_ceil(2)
}

pub fn assemble_stokes(grid: &SurfaceGrid, nu: &ViscosityField, degree: usize) -> Result<StokesForm> {
    if nu.grid_id() != grid.id() {
        return Err(Error::GridMismatch);
    }
    if !(nu.lower_bound() > 0.0) {
        return Err(Error::InvalidParameter("viscosity lower bound must be positive".into()));
    }
    let k = grid
        .sphere_degree()
        .ok_or(Error::UnsupportedGeometry("Stokes assembly needs a sphere grid"))?;
    let need = stokes_grid_degree(degree, nu.degree().unwrap_or(0));
    if k < need {
        return Err(Error::InvalidParameter(format!(
            "grid degree {k} too small for Stokes assembly at L={degree} (needs {need})"
        )));
    }
    let grads = galerkin::basis_gradients(grid, degree, 0)?;
    let two_nu: Vec<f64> = nu.values().iter().map(|v| 2.0 * v).collect();
    let matrix = galerkin::gram(&galerkin::strain_columns(grid, &grads, Some(&two_nu)));

    let two = vec![2.0; grid.len()];
    let mut lambda = vec![0.0; degree + 1];
    for (l, lam) in lambda.iter_mut().enumerate().skip(1) {
        let single = [grads[l * l - 1].clone()];
        let col = galerkin::strain_columns(grid, &single, Some(&two));
        *lam = col.norm_squared();
    }

    let nu_star = nu.min();
    let remainder = if nu.is_constant() {
        None
    } else {
        let mut r = matrix.clone();
        for i in 0..r.nrows() {
            let (l, _) = index_to_lm(i);
            r[(i, i)] -= nu_star * lambda[l];
        }
        Some(r)
    };
    Ok(StokesForm {
        grid_id: grid.id(),
        degree,
        matrix,
        lambda,
        nu_star,
        nu_max: nu.max(),
        remainder,
    })
}

impl StokesForm {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `λ_l` for `l = 0..=L` (entry 0 unused).
    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    pub fn lambda(&self, l: usize) -> f64 {
        self.lambda[l]
    }

    /// Implicit viscosity `ν_* = min ν`.
    pub fn nu_star(&self) -> f64 {
        self.nu_star
    }

    pub fn nu_max(&self) -> f64 {
        self.nu_max
    }

    pub fn has_remainder(&self) -> bool {
        self.remainder.is_some()
    }

    /// Diagonal entry `λ_l` of the constant-viscosity part for storage index `i`.
    pub fn diagonal(&self, i: usize) -> f64 {
        self.lambda[index_to_lm(i).0]
    }

    /// `A' c = (A - ν_* D) c`.
    pub fn remainder_apply(&self, c: &[f64]) -> Vec<f64> {
        match &self.remainder {
            Some(r) => (r * DVector::from_column_slice(c)).as_slice().to_vec(),
            None => vec![0.0; c.len()],
        }
    }

    /// Sorted eigenvalues of `A`.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `cᵀ A c = ∫ 2ν |ε_Γ(u)|² dS`.
    pub fn dissipation(&self, s: &SpectralState) -> Result<f64> {
        Ok(s.dot(&stokes_apply(self, s)?))
    }

    fn check(&self, s: &SpectralState) -> Result<()> {
        if s.degree() != self.degree {
            return Err(Error::ShapeMismatch {
                expected: n_coeffs(self.degree),
                actual: s.len(),
            });
        }
        Ok(())
    }
}

pub fn stokes_apply(form: &StokesForm, s: &SpectralState) -> Result<SpectralState> {
    form.check(s)?;
    let out = &form.matrix * DVector::from_column_slice(&s.coeffs);
    let mut r = SpectralState::from_coeffs(form.degree, out.as_slice().to_vec())?;
    r.time = s.time;
    Ok(r)
}

/// `P₀[(u·∇_Γ)u]` evaluated pseudospectrally on a dealiased grid.
///
/// Each Cartesian component `u_a` is a polynomial of degree `≤ L`, so its
/// surface gradient is exact from a degree-`L` scalar analysis. The
/// tangential projection of `u_θ ∂_θ u_a + u_φ ∂_φ u_a` is then analyzed
/// onto the toroidal basis, which discards the gradient part.
pub fn convective_term(grid: &SurfaceGrid, s: &SpectralState) -> Result<SpectralState> {
    let lay = grid
        .sphere_layout()
        .ok_or(Error::UnsupportedGeometry("convective term needs a sphere grid"))?;
    let degree = s.degree();
    if lay.degree < crate::harmonics::dealias_rule(degree).degree {
        return Err(Error::InvalidParameter(format!(
            "grid degree {} is not dealiased for L={degree}",
            lay.degree
        )));
    }
    let uc = lay.toroidal_synthesis(&s.coeffs, degree);
    let amb = grid.coord_to_ambient(&uc);
    let n = amb.len();
    let mut w = vec![[0.0; 3]; n];
    let mut comp = vec![0.0; n];
    for a in 0..3 {
        for (c, v) in comp.iter_mut().zip(&amb) {
            *c = v[a];
        }
        let coeffs = lay.scalar_analysis(&comp, degree);
        let g = lay.scalar_gradient(&coeffs, degree);
        for ((wi, gi), ui) in w.iter_mut().zip(&g).zip(&uc) {
            wi[a] = ui[0] * gi[0] + ui[1] * gi[1];
        }
    }
    let wc = grid.ambient_to_coord(&w);
    let mut out = SpectralState::from_coeffs(degree, lay.toroidal_analysis(&wc, degree))?;
    out.time = s.time;
    Ok(out)
}

/// Leray-projected forcing `P₀ f(·, u)` in toroidal coefficients.
pub fn forcing_apply(
    spec: &ForcingSpec,
    grid: &SurfaceGrid,
    basis: &KillingBasis,
    s: &SpectralState,
) -> Result<SpectralState> {
    spec.apply(grid, basis, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_sphere_grid, rate_of_strain, tensor_inner};
    use crate::harmonics::{coeff_index, dealias_rule, synthesize};

    fn pseudo_random(degree: usize, seed: u64) -> SpectralState {
        let mut x = seed;
        let coeffs = (0..n_coeffs(degree))
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect();
        SpectralState::from_coeffs(degree, coeffs).unwrap()
    }

    #[test]
    fn constant_viscosity_is_diagonal() {
        let g = build_sphere_grid(8, 1.0).unwrap();
        let nu = ViscosityField::constant(&g, 1.0).unwrap();
        let f = assemble_stokes(&g, &nu, 6).unwrap();
        assert!(f.lambda(1).abs() < 1e-10);
        for l in 1..=6 {
            let ll = (l * (l + 1)) as f64;
            assert!((f.lambda(l) - (ll - 2.0)).abs() < 1e-10);
        }
        let a = f.matrix();
        let mut off: f64 = 0.0;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if i != j {
                    off = off.max(a[(i, j)].abs());
                }
            }
            assert!((a[(i, i)] - f.diagonal(i)).abs() < 1e-10);
        }
        assert!(off < 1e-10);
        assert!(!f.has_remainder());
    }

    #[test]
    fn linear_in_constant_viscosity() {
        let g = build_sphere_grid(7, 1.0).unwrap();
        let a1 = assemble_stokes(&g, &ViscosityField::constant(&g, 1.0).unwrap(), 5).unwrap();
        let a3 = assemble_stokes(&g, &ViscosityField::constant(&g, 3.0).unwrap(), 5).unwrap();
        let d = a3.matrix() - a1.matrix() * 3.0;
        assert!(d.abs().max() <= 1e-12 * a3.matrix().abs().max());
    }

    #[test]
    fn radius_scaling_of_eigenvalues() {
        let g = build_sphere_grid(6, 2.0).unwrap();
        let f = assemble_stokes(&g, &ViscosityField::constant(&g, 1.0).unwrap(), 4).unwrap();
        assert!((f.lambda(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn variable_viscosity_form_is_psd_with_killing_kernel() {
        let g = build_sphere_grid(9, 1.0).unwrap();
        let nu = ViscosityField::linear_x3(&g, 1.0, 0.5).unwrap();
        let f = assemble_stokes(&g, &nu, 6).unwrap();
        let a = f.matrix();
        assert!((a - a.transpose()).abs().max() <= 1e-12 * a.abs().max());
        let ev = f.spectrum();
        assert!(ev[0] > -1e-10 && ev[2].abs() < 1e-10 && ev[3] > 0.1);
        for i in 0..3 {
            for j in 0..a.ncols() {
                assert!(a[(i, j)].abs() < 1e-10);
            }
        }
        // A' = A - ν_* D is positive semidefinite
        let r = a - DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
            if i == j {
                f.nu_star() * f.diagonal(i)
            } else {
                0.0
            }
        });
        let min = SymmetricEigen::new(r).eigenvalues.min();
        assert!(min > -1e-10);
    }

    #[test]
    fn apply_matches_quadrature_of_strain() {
        let g = build_sphere_grid(9, 1.0).unwrap();
        let nu = ViscosityField::linear_x3(&g, 1.0, 0.5).unwrap();
        let f = assemble_stokes(&g, &nu, 6).unwrap();
        let s = pseudo_random(6, 7);
        let u = synthesize(&g, &s).unwrap();
        let e = rate_of_strain(&g, &u).unwrap();
        let two_nu: Vec<f64> = nu.values().iter().map(|v| 2.0 * v).collect();
        let q = tensor_inner(&g, &e, &e, Some(&two_nu)).unwrap();
        assert!((f.dissipation(&s).unwrap() - q).abs() < 1e-10 * q);
        let mut k = SpectralState::zeros(6);
        k.coeffs[..3].copy_from_slice(&[0.3, -0.2, 1.0]);
        assert!(stokes_apply(&f, &k).unwrap().norm() < 1e-10);
    }

    #[test]
    fn single_mode_is_eigenvector() {
        let g = build_sphere_grid(8, 1.0).unwrap();
        let f = assemble_stokes(&g, &ViscosityField::constant(&g, 1.0).unwrap(), 5).unwrap();
        let s = SpectralState::unit_mode(5, 2, 0).unwrap();
        let out = stokes_apply(&f, &s).unwrap();
        assert!((out.get(2, 0) - f.lambda(2)).abs() < 1e-12);
        assert!(out.axpy(-f.lambda(2), &s).unwrap().norm() < 1e-10);
    }

    #[test]
    fn too_coarse_grid_is_rejected() {
        let g = build_sphere_grid(6, 1.0).unwrap();
        let nu = ViscosityField::constant(&g, 1.0).unwrap();
        assert!(assemble_stokes(&g, &nu, 6).is_err());
    }

    #[test]
    fn convection_examples() {
        let l = 8;
        let g = build_sphere_grid(dealias_rule(l).degree, 1.0).unwrap();
        assert!(convective_term(&g, &SpectralState::zeros(l)).unwrap().norm() == 0.0);
        let zonal = SpectralState::unit_mode(l, 2, 0).unwrap();
        assert!(convective_term(&g, &zonal).unwrap().norm() < 1e-9);
        let mut k = SpectralState::zeros(l);
        k.coeffs[0] = 1.0;
        let n = convective_term(&g, &k).unwrap();
        assert!(n.dot(&k).abs() < 1e-12);
        let s = pseudo_random(l, 3);
        let n = convective_term(&g, &s).unwrap();
        assert!(n.dot(&s).abs() < 1e-11 * s.norm_sq() * s.norm().max(1.0));
        assert!(n.killing_norm_sq().sqrt() < 1e-11 * s.norm_sq());
        assert!(n.coeffs[coeff_index(2, 0)].is_finite());
    }

    #[test]
    fn convection_needs_dealiased_grid() {
        let g = build_sphere_grid(8, 1.0).unwrap();
        assert!(convective_term(&g, &SpectralState::zeros(8)).is_err());
    }
}
