//! Dense Galerkin assembly shared by the Stokes form and the Korn estimates.
//!
//! Each basis field contributes one column holding its weighted tensor
//! entries at every node, so a quadratic form is the Gram matrix `BᵀB`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::SurfaceGrid;
use crate::harmonics::n_coeffs;

/// Covariant derivatives (coordinate frame) of `Φ_i` for every toroidal index
/// `first..n_coeffs(degree)`.
pub(crate) fn basis_gradients(
    grid: &SurfaceGrid,
    degree: usize,
    first: usize,
) -> Result<Vec<Vec<[[f64; 2]; 2]>>> {
    let lay = grid
        .sphere_layout()
        .ok_or(Error::UnsupportedGeometry("toroidal basis needs a sphere grid"))?;
    if lay.degree < degree + 1 {
        return Err(Error::InvalidParameter(format!(
            "grid degree {} cannot integrate strain products of degree-{degree} fields",
            lay.degree
        )));
    }
    Ok((first..n_coeffs(degree))
        .into_par_iter()
        .map(|i| {
            let mut c = vec![0.0; n_coeffs(degree)];
            c[i] = 1.0;
            let coord = lay.toroidal_synthesis(&c, degree);
            let amb = grid.coord_to_ambient(&coord);
            grid.coord_covariant(&amb)
        })
        .collect())
}

/// Columns `sqrt(w·ν) ε(u)` with the off-diagonal entry counted twice.
pub(crate) fn strain_columns(
    grid: &SurfaceGrid,
    grads: &[Vec<[[f64; 2]; 2]>],
    weight: Option<&[f64]>,
) -> DMatrix<f64> {
    let scale: Vec<f64> = grid
        .weights()
        .iter()
        .enumerate()
        .map(|(i, w)| (w * weight.map_or(1.0, |v| v[i])).sqrt())
        .collect();
    let n = grid.len();
    let data: Vec<f64> = grads
        .par_iter()
        .flat_map_iter(|t| {
            let mut col = Vec::with_capacity(3 * n);
            for (t, s) in t.iter().zip(&scale) {
                col.push(s * t[0][0]);
                col.push(s * std::f64::consts::SQRT_2 * 0.5 * (t[0][1] + t[1][0]));
                col.push(s * t[1][1]);
            }
            col
        })
        .collect();
    DMatrix::from_vec(3 * n, grads.len(), data)
}

/// Columns `sqrt(w) ∇u` with all four entries.
pub(crate) fn gradient_columns(grid: &SurfaceGrid, grads: &[Vec<[[f64; 2]; 2]>]) -> DMatrix<f64> {
    let n = grid.len();
    let data: Vec<f64> = grads
        .par_iter()
        .flat_map_iter(|t| {
            let mut col = Vec::with_capacity(4 * n);
            for (t, w) in t.iter().zip(grid.weights()) {
                let s = w.sqrt();
                col.extend_from_slice(&[s * t[0][0], s * t[0][1], s * t[1][0], s * t[1][1]]);
            }
            col
        })
        .collect();
    DMatrix::from_vec(4 * n, grads.len(), data)
}

/// `BᵀB`, symmetrized.
pub(crate) fn gram(b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut g = b.transpose() * b;
    symmetrize(&mut g);
    g
}

pub(crate) fn symmetrize(g: &mut DMatrix<f64>) {
    let n = g.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
}

/// Eigenvalues of the pencil `H x = μ E x` with `E` positive definite, ascending.
pub(crate) fn generalized_eigenvalues(h: &DMatrix<f64>, e: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = e.clone().cholesky().ok_or_else(|| {
        Error::Consistency("strain form is singular on the non-Killing block".into())
    })?;
    let l = chol.l();
    // C = L⁻¹ H L⁻ᵀ
    let y = l
        .solve_lower_triangular(h)
        .ok_or_else(|| Error::Consistency("triangular solve failed".into()))?;
    let mut c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::Consistency("triangular solve failed".into()))?;
    symmetrize(&mut c);
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Orthonormalizing map `W` with `Wᵀ G W = I` on the numerically nonsingular
/// part of the Gram matrix `G`.
pub(crate) fn whitening(g: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(g.clone());
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..g.nrows())
        .filter(|&i| eig.eigenvalues[i] > rel_tol * max)
        .collect();
    DMatrix::from_fn(g.nrows(), keep.len(), |r, c| {
        let k = keep[c];
        eig.eigenvectors[(r, k)] / eig.eigenvalues[k].sqrt()
    })
}
