//! Killing fields, the projector `P_𝒦` and discrete Korn constants.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::galerkin;
use crate::geometry::{
    build_sphere_grid, cross3, l2_inner, l2_norm, SurfaceGrid, SurfaceKind, TangentialField,
};
use crate::harmonics::{synthesize, SpectralState};

/// L²-orthonormal basis `v_1..v_n` of the Killing fields of a grid.
#[derive(Debug, Clone)]
pub struct KillingBasis {
    grid_id: u64,
    kind: SurfaceKind,
    fields: Vec<TangentialField>,
    // t[j][k] = (v_j, Φ_1k) on the sphere
    spectral: Option<[[f64; 3]; 3]>,
}

/// Sphere: orthonormalized `P_Γ(e_k × x)`, `k = 1, 2, 3`.
/// Torus: the normalized rotation `e₃ × x` about the symmetry axis.
pub fn killing_basis(grid: &SurfaceGrid) -> Result<KillingBasis> {
    let axes: &[[f64; 3]] = match grid.kind() {
        SurfaceKind::Sphere { .. } => &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        SurfaceKind::Torus { .. } => &[[0.0, 0.0, 1.0]],
    };
    let mut fields: Vec<TangentialField> = Vec::with_capacity(axes.len());
    for axis in axes {
        let amb: Vec<[f64; 3]> = grid.nodes().iter().map(|x| cross3(axis, x)).collect();
        let mut v = crate::geometry::tangential_project(grid, &amb)?;
        for prev in &fields {
            let c = l2_inner(grid, &v, prev)?;
            v = v.axpy(-c, prev)?;
        }
        let nrm = l2_norm(grid, &v)?;
        if nrm < 1e-12 {
            return Err(Error::Consistency("degenerate rotation field".into()));
        }
        fields.push(v.scaled(1.0 / nrm));
    }
    let spectral = match grid.kind() {
        SurfaceKind::Sphere { .. } => {
            let mut t = [[0.0; 3]; 3];
            for k in 0..3 {
                let mut s = SpectralState::zeros(1);
                s.coeffs[k] = 1.0;
                let phi = synthesize(grid, &s)?;
                for (j, v) in fields.iter().enumerate() {
                    t[j][k] = l2_inner(grid, v, &phi)?;
                }
            }
            Some(t)
        }
        SurfaceKind::Torus { .. } => None,
    };
    Ok(KillingBasis {
        grid_id: grid.id(),
        kind: grid.kind(),
        fields,
        spectral,
    })
}

impl KillingBasis {
    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[TangentialField] {
        &self.fields
    }

    pub fn field(&self, j: usize) -> &TangentialField {
        &self.fields[j]
    }

    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    /// Orthogonal matrix `T_jk = (v_j, Φ_1k)` relating the two Killing bases.
    pub fn spectral_map(&self) -> Option<&[[f64; 3]; 3]> {
        self.spectral.as_ref()
    }

    /// `α_j = (u, v_j)` read off the degree-1 block of a state.
    pub fn alpha_from_state(&self, s: &SpectralState) -> Result<Vec<f64>> {
        let t = self
            .spectral
            .as_ref()
            .ok_or(Error::UnsupportedGeometry("spectral Killing map needs a sphere"))?;
        let c = s.killing_block();
        Ok((0..3)
            .map(|j| t[j][0] * c[0] + t[j][1] * c[1] + t[j][2] * c[2])
            .collect())
    }

    /// Degree-1 coefficients of `Σ_j α_j v_j`.
    pub fn state_from_alpha(&self, alpha: &[f64], degree: usize) -> Result<SpectralState> {
        let t = self
            .spectral
            .as_ref()
            .ok_or(Error::UnsupportedGeometry("spectral Killing map needs a sphere"))?;
        if alpha.len() != 3 {
            return Err(Error::ShapeMismatch {
                expected: 3,
                actual: alpha.len(),
            });
        }
        let mut s = SpectralState::zeros(degree);
        for k in 0..3 {
            s.coeffs[k] = (0..3).map(|j| t[j][k] * alpha[j]).sum();
        }
        Ok(s)
    }

    fn check(&self, grid: &SurfaceGrid) -> Result<()> {
        if grid.id() != self.grid_id {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// `α_j = (u, v_j)`.
pub fn killing_coefficients(
    basis: &KillingBasis,
    grid: &SurfaceGrid,
    u: &TangentialField,
) -> Result<Vec<f64>> {
    basis.check(grid)?;
    basis.fields.iter().map(|v| l2_inner(grid, u, v)).collect()
}

/// `(u_K, u_NK)` with `u_K = Σ_j (u, v_j) v_j`.
pub fn pk_project(
    basis: &KillingBasis,
    grid: &SurfaceGrid,
    u: &TangentialField,
) -> Result<(TangentialField, TangentialField)> {
    let alpha = killing_coefficients(basis, grid, u)?;
    let mut uk = grid.zero_field();
    for (a, v) in alpha.iter().zip(&basis.fields) {
        uk = uk.axpy(*a, v)?;
    }
    let unk = u.axpy(-1.0, &uk)?;
    Ok((uk, unk))
}

/// Discrete Korn constant on the non-Killing divergence-free subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct KornEstimate {
    /// Truncation: harmonic degree on the sphere, stream-function wavenumber on the torus.
    pub truncation: usize,
    /// `C_P = sqrt(max ‖v‖²_{H¹} / ‖ε_Γ(v)‖²)` over the discrete space.
    pub constant: f64,
    /// `(l, ‖Φ_l0‖²_{H¹} / ‖ε_Γ(Φ_l0)‖²)` per degree (sphere only).
    pub per_degree: Vec<(usize, f64)>,
    /// Dimension of the discrete space after removing Killing and null directions.
    pub dimension: usize,
}

/// Korn constant of `‖v‖_{H¹} ≤ C_P ‖ε_Γ(v)‖` on the truncated space.
///
/// On the sphere the space is `span{Φ_lm : 2 ≤ l ≤ L}` on a grid of degree
/// `L + 1`, which integrates both quadratic forms exactly. On the torus it is
/// spanned by stream-function fields `n × ∇ψ`, `ψ = trig(jφ) trig(kθ)` with
/// `j, k ≤ L`, plus the two harmonic fields, evaluated on `grid`.
pub fn korn_constant(grid: &SurfaceGrid, truncation: usize) -> Result<KornEstimate> {
    match grid.kind() {
        SurfaceKind::Sphere { radius } => sphere_korn(radius, truncation),
        SurfaceKind::Torus { .. } => torus_korn(grid, truncation),
    }
}

fn sphere_korn(radius: f64, degree: usize) -> Result<KornEstimate> {
    if !(2..=64).contains(&degree) {
        return Err(Error::InvalidParameter(format!(
            "Korn truncation degree must lie in 2..=64, got {degree}"
        )));
    }
    let grid = build_sphere_grid(degree + 1, radius)?;
    let grads = galerkin::basis_gradients(&grid, degree, 3)?;
    let dim = grads.len();
    let mut h = galerkin::gram(&galerkin::gradient_columns(&grid, &grads));
    for i in 0..dim {
        h[(i, i)] += 1.0;
    }
    let e = galerkin::gram(&galerkin::strain_columns(&grid, &grads, None));
    let per_degree = (2..=degree)
        .map(|l| {
            let i = l * l - 4;
            (l, h[(i, i)] / e[(i, i)])
        })
        .collect();
    let ev = galerkin::generalized_eigenvalues(&h, &e)?;
    Ok(KornEstimate {
        truncation: degree,
        constant: ev.last().copied().unwrap_or(f64::NAN).sqrt(),
        per_degree,
        dimension: dim,
    })
}

fn torus_korn(grid: &SurfaceGrid, max_wave: usize) -> Result<KornEstimate> {
    let t = grid
        .torus_layout()
        .ok_or(Error::UnsupportedGeometry("torus Korn estimate needs a torus grid"))?;
    if max_wave == 0 || 4 * max_wave > t.n_pol.min(t.n_tor) {
        return Err(Error::InvalidParameter(format!(
            "stream wavenumber {max_wave} must lie in 1..={}",
            t.n_pol.min(t.n_tor) / 4
        )));
    }
    let basis = killing_basis(grid)?;
    let (major, minor) = (t.major, t.minor);
    let angles: Vec<(f64, f64)> = grid
        .nodes()
        .iter()
        .zip(grid.normals())
        .map(|(x, _)| {
            let phi = x[2].atan2((x[0] * x[0] + x[1] * x[1]).sqrt() - major);
            (phi, x[1].atan2(x[0]))
        })
        .collect();

    let mut fields: Vec<Vec<[f64; 3]>> = Vec::new();
    let trig = |k: usize, sine: bool, a: f64| if sine { (k as f64 * a).sin() } else { (k as f64 * a).cos() };
    for j in 0..=max_wave {
        for k in 0..=max_wave {
            for (sj, sk) in [(false, false), (false, true), (true, false), (true, true)] {
                if (j == 0 && sj) || (k == 0 && sk) || (j == 0 && k == 0) {
                    continue;
                }
                let psi: Vec<f64> = angles
                    .iter()
                    .map(|&(p, th)| trig(j, sj, p) * trig(k, sk, th))
                    .collect();
                let grad = grid.coord_to_ambient(&grid.coord_gradient(&psi));
                fields.push(
                    grad.iter()
                        .zip(grid.normals())
                        .map(|(g, n)| cross3(n, g))
                        .collect(),
                );
            }
        }
    }
    // harmonic fields ∇θ and n × ∇θ
    let harm: Vec<[f64; 3]> = grid
        .frame()
        .iter()
        .zip(&angles)
        .map(|(f, &(p, _))| {
            let rho = major + minor * p.cos();
            [f[1][0] / rho, f[1][1] / rho, f[1][2] / rho]
        })
        .collect();
    fields.push(harm.iter().zip(grid.normals()).map(|(h, n)| cross3(n, h)).collect());
    fields.push(harm);

    // remove the Killing component
    let v = grid.frame_to_ambient(&basis.field(0).comps);
    for f in fields.iter_mut() {
        let c: f64 = f
            .iter()
            .zip(&v)
            .zip(grid.weights())
            .map(|((a, b), w)| w * crate::geometry::dot3(a, b))
            .sum();
        for (a, b) in f.iter_mut().zip(&v) {
            for d in 0..3 {
                a[d] -= c * b[d];
            }
        }
    }

    let n = grid.len();
    let l2_cols = DMatrix::from_fn(3 * n, fields.len(), |r, c| {
        grid.weights()[r / 3].sqrt() * fields[c][r / 3][r % 3]
    });
    let g = galerkin::gram(&l2_cols);
    let grads: Vec<Vec<[[f64; 2]; 2]>> = fields.iter().map(|f| grid.coord_covariant(f)).collect();
    let mut h = galerkin::gram(&galerkin::gradient_columns(grid, &grads));
    h += &g;
    let e = galerkin::gram(&galerkin::strain_columns(grid, &grads, None));
    let w = galerkin::whitening(&g, 1e-10);
    let mut hw = w.transpose() * &h * &w;
    let mut ew = w.transpose() * &e * &w;
    galerkin::symmetrize(&mut hw);
    galerkin::symmetrize(&mut ew);
    let ev = galerkin::generalized_eigenvalues(&hw, &ew)?;
    Ok(KornEstimate {
        truncation: max_wave,
        constant: ev.last().copied().unwrap_or(f64::NAN).sqrt(),
        per_degree: Vec::new(),
        dimension: w.ncols(),
    })
}
