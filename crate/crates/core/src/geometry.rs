//! Closed surfaces, their quadrature grids and tangential calculus.
//!
//! A [`SurfaceGrid`] is either a sphere of radius `R` sampled on
//! Gauss-Legendre colatitudes times uniform longitudes, or an embedded torus
//! with major radius `R` and minor radius `r` on a uniform
//! poloidal x toroidal grid. Tangential fields carry two components per node
//! in the grid's orthonormal frame `(e₁, e₂)`.
//!
//! Derivatives are spectral: on the sphere nodal data is expanded in scalar
//! harmonics up to the grid degree, on the torus it is differentiated with
//! FFTs in both angles. Vector fields are differentiated through their
//! ambient Cartesian components, `∇_Γu = P_Γ (∇_Γ u_a)`, which keeps the
//! operators exact on band-limited input.

use std::f64::consts::PI;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::sht::SphereLayout;

static NEXT_GRID_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceKind {
    Sphere { radius: f64 },
    Torus { major: f64, minor: f64 },
}

impl SurfaceKind {
    pub fn area(&self) -> f64 {
        match *self {
            SurfaceKind::Sphere { radius } => 4.0 * PI * radius * radius,
            SurfaceKind::Torus { major, minor } => 4.0 * PI * PI * major * minor,
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, SurfaceKind::Sphere { .. })
    }
}

#[derive(Clone)]
pub(crate) struct TorusLayout {
    pub major: f64,
    pub minor: f64,
    pub n_pol: usize,
    pub n_tor: usize,
    pub phi: Vec<f64>,
    fft_pol: Arc<dyn Fft<f64>>,
    ifft_pol: Arc<dyn Fft<f64>>,
    fft_tor: Arc<dyn Fft<f64>>,
    ifft_tor: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusLayout")
            .field("major", &self.major)
            .field("minor", &self.minor)
            .field("n_pol", &self.n_pol)
            .field("n_tor", &self.n_tor)
            .finish()
    }
}

impl TorusLayout {
    /// Spectral derivative of periodic data along one axis of the
    /// `n_pol x n_tor` array (row-major in the poloidal index).
    fn derivative(&self, values: &[f64], poloidal: bool) -> Vec<f64> {
        let (n, count, fwd, inv) = if poloidal {
            (self.n_pol, self.n_tor, &self.fft_pol, &self.ifft_pol)
        } else {
            (self.n_tor, self.n_pol, &self.fft_tor, &self.ifft_tor)
        };
        let mut out = vec![0.0; values.len()];
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        for line in 0..count {
            let at = |i: usize| {
                if poloidal {
                    i * self.n_tor + line
                } else {
                    line * self.n_tor + i
                }
            };
            for (i, b) in buf.iter_mut().enumerate() {
                *b = Complex::new(values[at(i)], 0.0);
            }
            fwd.process(&mut buf);
            for (k, b) in buf.iter_mut().enumerate() {
                let wave = if 2 * k < n {
                    k as f64
                } else if 2 * k == n {
                    0.0
                } else {
                    k as f64 - n as f64
                };
                *b *= Complex::new(0.0, wave);
            }
            inv.process(&mut buf);
            let scale = 1.0 / n as f64;
            for (i, b) in buf.iter().enumerate() {
                out[at(i)] = b.re * scale;
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Layout {
    Sphere(Arc<SphereLayout>),
    Torus(Arc<TorusLayout>),
}

/// Quadrature grid on a closed surface together with its tangent frames.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    id: u64,
    kind: SurfaceKind,
    n_lat: usize,
    n_lon: usize,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
    normals: Vec<[f64; 3]>,
    frame: Vec<[[f64; 3]; 2]>,
    // coordinate unit vectors in which the spectral derivatives are produced
    coord: Vec<[[f64; 3]; 2]>,
    canonical_frame: bool,
    layout: Layout,
}

/// Tangential vector field stored as frame components `(c₁, c₂)` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentialField {
    grid_id: u64,
    pub comps: Vec<[f64; 2]>,
}

/// 2x2 tangential tensor per node in the grid frame, `t[i][j] = e_i · T e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentialTensor {
    grid_id: u64,
    pub comps: Vec<[[f64; 2]; 2]>,
    pub symmetric: bool,
}

/// Strictly positive viscosity sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscosityField {
    grid_id: u64,
    values: Vec<f64>,
    lower_bound: f64,
    gradient_bound: f64,
    degree: Option<usize>,
}

#[inline]
pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Sphere grid resolving scalar harmonics up to `degree`: `degree + 1`
/// Gauss-Legendre colatitudes and `2 degree + 2` longitudes.
pub fn build_sphere_grid(degree: usize, radius: f64) -> Result<SurfaceGrid> {
    if degree < 2 {
        return Err(Error::InvalidParameter(format!(
            "sphere grid degree must be at least 2, got {degree}"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sphere radius must be positive, got {radius}"
        )));
    }
    let layout = SphereLayout::new(degree, radius);
    let (n_lat, n_lon) = (layout.n_lat, layout.n_lon);
    let n = n_lat * n_lon;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut frame = Vec::with_capacity(n);
    for j in 0..n_lat {
        let (ct, st) = (layout.cos_theta[j], layout.sin_theta[j]);
        let w = radius * radius * layout.gl_weights[j] * layout.dphi;
        for k in 0..n_lon {
            let (sp, cp) = layout.phi[k].sin_cos();
            let nrm = [st * cp, st * sp, ct];
            nodes.push([radius * nrm[0], radius * nrm[1], radius * nrm[2]]);
            normals.push(nrm);
            weights.push(w);
            frame.push([[ct * cp, ct * sp, -st], [-sp, cp, 0.0]]);
        }
    }
    Ok(SurfaceGrid {
        id: NEXT_GRID_ID.fetch_add(1, Ordering::Relaxed),
        kind: SurfaceKind::Sphere { radius },
        n_lat,
        n_lon,
        nodes,
        weights,
        normals,
        coord: frame.clone(),
        frame,
        canonical_frame: true,
        layout: Layout::Sphere(Arc::new(layout)),
    })
}

/// Torus grid with `n_pol` poloidal (`φ`) and `n_tor` toroidal (`θ`) points.
///
/// The embedding is `x = ((R + r cos φ) cos θ, (R + r cos φ) sin θ, r sin φ)`
/// and the area element `r (R + r cos φ) dφ dθ` is folded into the weights.
/// The frame is `e₁ = ∂_φx/|∂_φx|`, `e₂ = ∂_θx/|∂_θx|`.
pub fn build_torus_grid(n_pol: usize, n_tor: usize, major: f64, minor: f64) -> Result<SurfaceGrid> {
    if !(minor > 0.0 && minor.is_finite() && major.is_finite()) {
        return Err(Error::Geometry(format!(
            "torus radii must be positive and finite, got R={major}, r={minor}"
        )));
    }
    if minor >= major {
        return Err(Error::Geometry(format!(
            "torus needs r < R, got R={major}, r={minor}"
        )));
    }
    for (name, n) in [("n_pol", n_pol), ("n_tor", n_tor)] {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "{name} must be even and at least 8, got {n}"
            )));
        }
    }
    let dphi = 2.0 * PI / n_pol as f64;
    let dtheta = 2.0 * PI / n_tor as f64;
    let phi: Vec<f64> = (0..n_pol).map(|i| i as f64 * dphi).collect();
    let theta: Vec<f64> = (0..n_tor).map(|k| k as f64 * dtheta).collect();
    let n = n_pol * n_tor;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut frame = Vec::with_capacity(n);
    for &p in &phi {
        let (sp, cp) = p.sin_cos();
        let rho = major + minor * cp;
        for &t in &theta {
            let (st, ct) = t.sin_cos();
            nodes.push([rho * ct, rho * st, minor * sp]);
            normals.push([cp * ct, cp * st, sp]);
            weights.push(minor * rho * dphi * dtheta);
            frame.push([[-sp * ct, -sp * st, cp], [-st, ct, 0.0]]);
        }
    }
    let mut planner = FftPlanner::new();
    let layout = TorusLayout {
        major,
        minor,
        n_pol,
        n_tor,
        phi,
        fft_pol: planner.plan_fft_forward(n_pol),
        ifft_pol: planner.plan_fft_inverse(n_pol),
        fft_tor: planner.plan_fft_forward(n_tor),
        ifft_tor: planner.plan_fft_inverse(n_tor),
    };
    Ok(SurfaceGrid {
        id: NEXT_GRID_ID.fetch_add(1, Ordering::Relaxed),
        kind: SurfaceKind::Torus { major, minor },
        n_lat: n_pol,
        n_lon: n_tor,
        nodes,
        weights,
        normals,
        coord: frame.clone(),
        frame,
        canonical_frame: true,
        layout: Layout::Torus(Arc::new(layout)),
    })
}

impl SurfaceGrid {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    /// Colatitude (sphere) or poloidal (torus) resolution.
    pub fn n_lat(&self) -> usize {
        self.n_lat
    }

    /// Longitude (sphere) or toroidal (torus) resolution.
    pub fn n_lon(&self) -> usize {
        self.n_lon
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn normals(&self) -> &[[f64; 3]] {
        &self.normals
    }

    pub fn frame(&self) -> &[[[f64; 3]; 2]] {
        &self.frame
    }

    /// Harmonic degree resolved by a sphere grid.
    pub fn sphere_degree(&self) -> Option<usize> {
        match &self.layout {
            Layout::Sphere(s) => Some(s.degree),
            Layout::Torus(_) => None,
        }
    }

    pub(crate) fn sphere_layout(&self) -> Option<&SphereLayout> {
        match &self.layout {
            Layout::Sphere(s) => Some(s),
            Layout::Torus(_) => None,
        }
    }

    pub(crate) fn torus_layout(&self) -> Option<&TorusLayout> {
        match &self.layout {
            Layout::Torus(t) => Some(t),
            Layout::Sphere(_) => None,
        }
    }

    /// Quadrature of nodal scalar values over the surface.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        self.check_len(values.len())?;
        Ok(values.iter().zip(&self.weights).map(|(v, w)| v * w).sum())
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                actual: len,
            });
        }
        Ok(())
    }

    pub(crate) fn check_field(&self, u: &TangentialField) -> Result<()> {
        if u.grid_id != self.id {
            return Err(Error::GridMismatch);
        }
        self.check_len(u.comps.len())
    }

    fn check_tensor(&self, t: &TangentialTensor) -> Result<()> {
        if t.grid_id != self.id {
            return Err(Error::GridMismatch);
        }
        self.check_len(t.comps.len())
    }

    /// Smallest chordal distance between neighbouring nodes along either grid
    /// direction (periodic in the second one).
    pub fn min_spacing(&self) -> f64 {
        let (nl, nk) = (self.n_lat, self.n_lon);
        let dist = |a: usize, b: usize| {
            let (p, q) = (self.nodes[a], self.nodes[b]);
            ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
        };
        let mut h = f64::INFINITY;
        for j in 0..nl {
            for k in 0..nk {
                let i = j * nk + k;
                h = h.min(dist(i, j * nk + (k + 1) % nk));
                if j + 1 < nl {
                    h = h.min(dist(i, i + nk));
                }
            }
        }
        h
    }

    /// Same surface and nodes with the tangent frame at node `i` rotated by
    /// `angles[i]` about the normal.
    pub fn with_rotated_frame(&self, angles: &[f64]) -> Result<SurfaceGrid> {
        self.check_len(angles.len())?;
        let frame = self
            .frame
            .iter()
            .zip(angles)
            .map(|(f, &a)| {
                let (s, c) = a.sin_cos();
                let mut e1 = [0.0; 3];
                let mut e2 = [0.0; 3];
                for d in 0..3 {
                    e1[d] = c * f[0][d] + s * f[1][d];
                    e2[d] = -s * f[0][d] + c * f[1][d];
                }
                [e1, e2]
            })
            .collect();
        let mut g = self.clone();
        g.id = NEXT_GRID_ID.fetch_add(1, Ordering::Relaxed);
        g.frame = frame;
        g.canonical_frame = false;
        Ok(g)
    }

    /// Wraps frame components as a field on this grid.
    pub fn field(&self, comps: Vec<[f64; 2]>) -> Result<TangentialField> {
        self.check_len(comps.len())?;
        if comps.iter().any(|c| !c[0].is_finite() || !c[1].is_finite()) {
            return Err(Error::InvalidParameter("non-finite field component".into()));
        }
        Ok(TangentialField {
            grid_id: self.id,
            comps,
        })
    }

    pub fn zero_field(&self) -> TangentialField {
        TangentialField {
            grid_id: self.id,
            comps: vec![[0.0; 2]; self.len()],
        }
    }

    /// Ambient reconstruction `c₁e₁ + c₂e₂` at every node.
    pub fn ambient(&self, u: &TangentialField) -> Result<Vec<[f64; 3]>> {
        self.check_field(u)?;
        Ok(self.frame_to_ambient(&u.comps))
    }

    pub(crate) fn frame_to_ambient(&self, comps: &[[f64; 2]]) -> Vec<[f64; 3]> {
        comps
            .iter()
            .zip(&self.frame)
            .map(|(c, f)| {
                [
                    c[0] * f[0][0] + c[1] * f[1][0],
                    c[0] * f[0][1] + c[1] * f[1][1],
                    c[0] * f[0][2] + c[1] * f[1][2],
                ]
            })
            .collect()
    }

    pub(crate) fn coord_to_ambient(&self, comps: &[[f64; 2]]) -> Vec<[f64; 3]> {
        comps
            .iter()
            .zip(&self.coord)
            .map(|(c, f)| {
                [
                    c[0] * f[0][0] + c[1] * f[1][0],
                    c[0] * f[0][1] + c[1] * f[1][1],
                    c[0] * f[0][2] + c[1] * f[1][2],
                ]
            })
            .collect()
    }

    pub(crate) fn ambient_to_coord(&self, v: &[[f64; 3]]) -> Vec<[f64; 2]> {
        v.iter()
            .zip(&self.coord)
            .map(|(v, f)| [dot3(v, &f[0]), dot3(v, &f[1])])
            .collect()
    }

    /// Grid-frame components from coordinate-frame components.
    pub(crate) fn coord_to_frame(&self, comps: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
        if self.canonical_frame {
            return comps;
        }
        comps
            .iter()
            .zip(self.frame.iter().zip(&self.coord))
            .map(|(c, (f, q))| {
                let r = self.rotation(f, q);
                [r[0][0] * c[0] + r[0][1] * c[1], r[1][0] * c[0] + r[1][1] * c[1]]
            })
            .collect()
    }

    pub(crate) fn frame_to_coord(&self, comps: &[[f64; 2]]) -> Vec<[f64; 2]> {
        if self.canonical_frame {
            return comps.to_vec();
        }
        comps
            .iter()
            .zip(self.frame.iter().zip(&self.coord))
            .map(|(c, (f, q))| {
                let r = self.rotation(f, q);
                [r[0][0] * c[0] + r[1][0] * c[1], r[0][1] * c[0] + r[1][1] * c[1]]
            })
            .collect()
    }

    #[inline]
    fn rotation(&self, f: &[[f64; 3]; 2], q: &[[f64; 3]; 2]) -> [[f64; 2]; 2] {
        [
            [dot3(&f[0], &q[0]), dot3(&f[0], &q[1])],
            [dot3(&f[1], &q[0]), dot3(&f[1], &q[1])],
        ]
    }

    /// Surface gradient in the coordinate frame.
    pub(crate) fn coord_gradient(&self, p: &[f64]) -> Vec<[f64; 2]> {
        match &self.layout {
            Layout::Sphere(s) => {
                let coeffs = s.scalar_analysis(p, s.degree);
                s.scalar_gradient(&coeffs, s.degree)
            }
            Layout::Torus(t) => {
                let dp = t.derivative(p, true);
                let dt = t.derivative(p, false);
                let mut out = Vec::with_capacity(p.len());
                for i in 0..t.n_pol {
                    let rho = t.major + t.minor * t.phi[i].cos();
                    for k in 0..t.n_tor {
                        let idx = i * t.n_tor + k;
                        out.push([dp[idx] / t.minor, dt[idx] / rho]);
                    }
                }
                out
            }
        }
    }

    /// Covariant derivative of an ambient tangential field, coordinate frame.
    pub(crate) fn coord_covariant(&self, u: &[[f64; 3]]) -> Vec<[[f64; 2]; 2]> {
        let mut t = vec![[[0.0; 2]; 2]; u.len()];
        let mut comp = vec![0.0; u.len()];
        for a in 0..3 {
            for (c, v) in comp.iter_mut().zip(u) {
                *c = v[a];
            }
            let g = self.coord_gradient(&comp);
            for (node, (tn, gn)) in t.iter_mut().zip(&g).enumerate() {
                let q = &self.coord[node];
                for i in 0..2 {
                    for j in 0..2 {
                        tn[i][j] += q[i][a] * gn[j];
                    }
                }
            }
        }
        t
    }

    pub(crate) fn coord_tensor_to_frame(&self, t: Vec<[[f64; 2]; 2]>) -> Vec<[[f64; 2]; 2]> {
        if self.canonical_frame {
            return t;
        }
        t.iter()
            .zip(self.frame.iter().zip(&self.coord))
            .map(|(t, (f, q))| {
                let r = self.rotation(f, q);
                let mut out = [[0.0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        for a in 0..2 {
                            for b in 0..2 {
                                out[i][j] += r[i][a] * t[a][b] * r[j][b];
                            }
                        }
                    }
                }
                out
            })
            .collect()
    }
}

impl TangentialField {
    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn scaled(&self, a: f64) -> TangentialField {
        TangentialField {
            grid_id: self.grid_id,
            comps: self.comps.iter().map(|c| [a * c[0], a * c[1]]).collect(),
        }
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &TangentialField) -> Result<TangentialField> {
        if self.grid_id != other.grid_id || self.len() != other.len() {
            return Err(Error::GridMismatch);
        }
        Ok(TangentialField {
            grid_id: self.grid_id,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(x, y)| [x[0] + a * y[0], x[1] + a * y[1]])
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| c[0].abs().max(c[1].abs()))
            .fold(0.0, f64::max)
    }
}

impl TangentialTensor {
    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    pub fn trace(&self) -> Vec<f64> {
        self.comps.iter().map(|t| t[0][0] + t[1][1]).collect()
    }
}

/// Frame components of `(I - n⊗n) v` for an ambient field `v`.
pub fn tangential_project(grid: &SurfaceGrid, v: &[[f64; 3]]) -> Result<TangentialField> {
    grid.check_len(v.len())?;
    let comps = v
        .iter()
        .zip(&grid.frame)
        .map(|(v, f)| [dot3(v, &f[0]), dot3(v, &f[1])])
        .collect();
    grid.field(comps)
}

/// Spectrally exact surface gradient `∇_Γp` of nodal scalar data.
pub fn surface_gradient(grid: &SurfaceGrid, p: &[f64]) -> Result<TangentialField> {
    grid.check_len(p.len())?;
    let g = grid.coord_gradient(p);
    Ok(TangentialField {
        grid_id: grid.id,
        comps: grid.coord_to_frame(g),
    })
}

/// Covariant derivative `∇_Γu = P_Γ (∇u) P_Γ` in frame components.
pub fn covariant_derivative(grid: &SurfaceGrid, u: &TangentialField) -> Result<TangentialTensor> {
    grid.check_field(u)?;
    let amb = grid.frame_to_ambient(&u.comps);
    let t = grid.coord_covariant(&amb);
    Ok(TangentialTensor {
        grid_id: grid.id,
        comps: grid.coord_tensor_to_frame(t),
        symmetric: false,
    })
}

pub fn surface_divergence(grid: &SurfaceGrid, u: &TangentialField) -> Result<Vec<f64>> {
    Ok(covariant_derivative(grid, u)?.trace())
}

/// Surface rate-of-strain tensor `ε_Γ(u) = (∇_Γu + ∇_Γᵀu)/2`.
pub fn rate_of_strain(grid: &SurfaceGrid, u: &TangentialField) -> Result<TangentialTensor> {
    let g = covariant_derivative(grid, u)?;
    Ok(symmetric_part(g))
}

pub(crate) fn symmetric_part(g: TangentialTensor) -> TangentialTensor {
    TangentialTensor {
        grid_id: g.grid_id,
        comps: g
            .comps
            .iter()
            .map(|t| {
                let off = 0.5 * (t[0][1] + t[1][0]);
                [[t[0][0], off], [off, t[1][1]]]
            })
            .collect(),
        symmetric: true,
    }
}

pub fn l2_inner(grid: &SurfaceGrid, u: &TangentialField, v: &TangentialField) -> Result<f64> {
    grid.check_field(u)?;
    grid.check_field(v)?;
    Ok(u
        .comps
        .iter()
        .zip(&v.comps)
        .zip(&grid.weights)
        .map(|((a, b), w)| w * (a[0] * b[0] + a[1] * b[1]))
        .sum())
}

pub fn l2_norm(grid: &SurfaceGrid, u: &TangentialField) -> Result<f64> {
    Ok(l2_inner(grid, u, u)?.sqrt())
}

/// `∫ weight · A:B dS`, with unit weight when `weight` is `None`.
pub fn tensor_inner(
    grid: &SurfaceGrid,
    a: &TangentialTensor,
    b: &TangentialTensor,
    weight: Option<&[f64]>,
) -> Result<f64> {
    grid.check_tensor(a)?;
    grid.check_tensor(b)?;
    if let Some(w) = weight {
        grid.check_len(w.len())?;
    }
    let mut s = 0.0;
    for (i, (x, y)) in a.comps.iter().zip(&b.comps).enumerate() {
        let contraction =
            x[0][0] * y[0][0] + x[0][1] * y[0][1] + x[1][0] * y[1][0] + x[1][1] * y[1][1];
        let nu = weight.map_or(1.0, |w| w[i]);
        s += grid.weights[i] * nu * contraction;
    }
    Ok(s)
}

pub fn tensor_l2_norm(grid: &SurfaceGrid, t: &TangentialTensor) -> Result<f64> {
    Ok(tensor_inner(grid, t, t, None)?.sqrt())
}

/// `‖u‖_{H¹} = (‖u‖² + ‖∇_Γu‖²)^{1/2}` with the Frobenius norm on the tensor.
pub fn h1_norm(grid: &SurfaceGrid, u: &TangentialField) -> Result<f64> {
    let g = covariant_derivative(grid, u)?;
    Ok((l2_inner(grid, u, u)? + tensor_inner(grid, &g, &g, None)?).sqrt())
}

impl ViscosityField {
    pub fn constant(grid: &SurfaceGrid, value: f64) -> Result<Self> {
        Self::from_nodal(grid, vec![value; grid.len()], value, Some(0))
    }

    /// `ν(x) = base + slope · x₃ / s`, with `s` the sphere radius or the torus
    /// minor radius so that `x₃/s ∈ [-1, 1]`.
    pub fn linear_x3(grid: &SurfaceGrid, base: f64, slope: f64) -> Result<Self> {
        let scale = match grid.kind() {
            SurfaceKind::Sphere { radius } => radius,
            SurfaceKind::Torus { minor, .. } => minor,
        };
        let values = grid.nodes.iter().map(|x| base + slope * x[2] / scale).collect();
        Self::from_nodal(grid, values, base - slope.abs(), Some(1))
    }

    /// Nodal viscosity with a declared lower bound `ν_* > 0`.
    ///
    /// `degree` is the harmonic band-limit of `ν` when known; assembly uses it
    /// to check the grid integrates the weighted strain products exactly.
    pub fn from_nodal(
        grid: &SurfaceGrid,
        values: Vec<f64>,
        lower_bound: f64,
        degree: Option<usize>,
    ) -> Result<Self> {
        grid.check_len(values.len())?;
        if !(lower_bound > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "viscosity lower bound must be positive, got {lower_bound}"
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < lower_bound)
        {
            return Err(Error::InvalidParameter(format!(
                "viscosity {v} at node {i} is below the declared bound {lower_bound}"
            )));
        }
        let grad = surface_gradient(grid, &values)?;
        let gradient_bound = grad
            .comps
            .iter()
            .map(|c| (c[0] * c[0] + c[1] * c[1]).sqrt())
            .fold(0.0, f64::max);
        Ok(Self {
            grid_id: grid.id,
            values,
            lower_bound,
            gradient_bound,
            degree,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    /// Declared `ν_*`.
    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest nodal `|∇_Γν|`, reported but not enforced.
    pub fn gradient_bound(&self) -> f64 {
        self.gradient_bound
    }

    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    pub fn is_constant(&self) -> bool {
        self.degree == Some(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation_field(grid: &SurfaceGrid, axis: [f64; 3]) -> TangentialField {
        let amb: Vec<[f64; 3]> = grid.nodes().iter().map(|x| cross3(&axis, x)).collect();
        tangential_project(grid, &amb).unwrap()
    }

    #[test]
    fn sphere_area_and_moments() {
        let g = build_sphere_grid(8, 1.0).unwrap();
        let area: f64 = g.weights().iter().sum();
        assert!((area - 4.0 * PI).abs() < 1e-12);
        let g2 = build_sphere_grid(8, 2.0).unwrap();
        let area2: f64 = g2.weights().iter().sum();
        assert!((area2 - 16.0 * PI).abs() < 1e-12);
        let g16 = build_sphere_grid(16, 1.0).unwrap();
        let x3sq: Vec<f64> = g16.nodes().iter().map(|x| x[2] * x[2]).collect();
        assert!((g16.integrate(&x3sq).unwrap() - 4.0 * PI / 3.0).abs() < 1e-12);
        assert_eq!((g.n_lat(), g.n_lon()), (9, 18));
    }

    #[test]
    fn sphere_grid_rejects_bad_parameters() {
        assert!(matches!(build_sphere_grid(1, 1.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(build_sphere_grid(8, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(build_sphere_grid(8, -1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn torus_area_and_symmetry() {
        let g = build_torus_grid(64, 64, 2.0, 0.5).unwrap();
        let area: f64 = g.weights().iter().sum();
        assert!((area - 4.0 * PI * PI).abs() < 1e-10);
        let x3: Vec<f64> = g.nodes().iter().map(|x| x[2]).collect();
        assert!(g.integrate(&x3).unwrap().abs() < 1e-12);
        let g = build_torus_grid(32, 32, 3.0, 1.0).unwrap();
        let area: f64 = g.weights().iter().sum();
        assert!((area - 12.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn torus_grid_rejects_bad_parameters() {
        assert!(matches!(build_torus_grid(16, 16, 1.0, 1.0), Err(Error::Geometry(_))));
        assert!(matches!(build_torus_grid(16, 16, 1.0, 2.0), Err(Error::Geometry(_))));
        assert!(build_torus_grid(6, 16, 2.0, 1.0).is_err());
        assert!(build_torus_grid(16, 15, 2.0, 1.0).is_err());
    }

    #[test]
    fn frames_are_orthonormal() {
        for g in [build_sphere_grid(12, 1.7).unwrap(), build_torus_grid(16, 24, 2.0, 0.7).unwrap()] {
            for (n, f) in g.normals().iter().zip(g.frame()) {
                assert!((dot3(n, n) - 1.0).abs() < 1e-12);
                assert!(dot3(&f[0], &f[1]).abs() < 1e-12);
                assert!(dot3(&f[0], n).abs() < 1e-12);
                assert!(dot3(&f[1], n).abs() < 1e-12);
                assert!((dot3(&f[0], &f[0]) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn projection_examples() {
        let g = build_sphere_grid(6, 1.0).unwrap();
        let amb: Vec<[f64; 3]> = g.normals().to_vec();
        let u = tangential_project(&g, &amb).unwrap();
        assert!(u.max_abs() < 1e-15);
        let amb: Vec<[f64; 3]> = g.frame().iter().map(|f| f[0]).collect();
        let u = tangential_project(&g, &amb).unwrap();
        for c in &u.comps {
            assert!((c[0] - 1.0).abs() < 1e-15 && c[1].abs() < 1e-15);
        }
        // ambient (1,2,3) against a frame whose normal is e₃: tangential part (1,2,0)
        let v = [1.0, 2.0, 3.0];
        let f = g.frame()[0];
        let n = g.normals()[0];
        let proj = [
            v[0] - dot3(&v, &n) * n[0],
            v[1] - dot3(&v, &n) * n[1],
            v[2] - dot3(&v, &n) * n[2],
        ];
        let c = [dot3(&v, &f[0]), dot3(&v, &f[1])];
        for d in 0..3 {
            assert!((c[0] * f[0][d] + c[1] * f[1][d] - proj[d]).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        for g in [build_sphere_grid(10, 1.0).unwrap(), build_torus_grid(16, 16, 2.0, 0.5).unwrap()] {
            let p = vec![3.5; g.len()];
            assert!(surface_gradient(&g, &p).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_height_matches_finite_differences() {
        let g = build_sphere_grid(10, 1.0).unwrap();
        let p: Vec<f64> = g.nodes().iter().map(|x| x[2]).collect();
        let grad = surface_gradient(&g, &p).unwrap();
        let lay = g.sphere_layout().unwrap();
        let h = 1e-6;
        for j in 0..g.n_lat() {
            let theta = lay.cos_theta[j].acos();
            let fd = ((theta + h).cos() - (theta - h).cos()) / (2.0 * h);
            for k in 0..g.n_lon() {
                let c = grad.comps[j * g.n_lon() + k];
                assert!((c[0] - fd).abs() < 1e-9);
                assert!(c[1].abs() < 1e-13);
                assert!(((c[0] * c[0] + c[1] * c[1]).sqrt() - lay.sin_theta[j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn torus_gradient_matches_closed_form() {
        let g = build_torus_grid(32, 32, 2.0, 0.5).unwrap();
        // p = x₃ = r sin φ: ∇_Γp = cos φ e_φ
        let p: Vec<f64> = g.nodes().iter().map(|x| x[2]).collect();
        let grad = surface_gradient(&g, &p).unwrap();
        for (c, n) in grad.comps.iter().zip(g.normals()) {
            // n₃ = sin φ, so cos φ = sqrt(n₁² + n₂²) with the sign of ρ - R
            let cos_phi = (n[0] * n[0] + n[1] * n[1]).sqrt();
            assert!((c[0].abs() - cos_phi).abs() < 1e-12);
            assert!(c[1].abs() < 1e-12);
        }
    }

    #[test]
    fn killing_rotations_have_no_strain() {
        let g = build_sphere_grid(12, 1.0).unwrap();
        let u = rotation_field(&g, [0.0, 0.0, 1.0]);
        let eps = rate_of_strain(&g, &u).unwrap();
        assert!(tensor_l2_norm(&g, &eps).unwrap() < 1e-10);
        assert!((l2_inner(&g, &u, &u).unwrap() - 8.0 * PI / 3.0).abs() < 1e-10);
        let t = build_torus_grid(32, 32, 2.0, 0.5).unwrap();
        let u = rotation_field(&t, [0.0, 0.0, 1.0]);
        assert!(tensor_l2_norm(&t, &rate_of_strain(&t, &u).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn divergence_of_gradient_of_height() {
        let g = build_sphere_grid(10, 1.0).unwrap();
        let p: Vec<f64> = g.nodes().iter().map(|x| x[2]).collect();
        let u = surface_gradient(&g, &p).unwrap();
        let div = surface_divergence(&g, &u).unwrap();
        for (d, x) in div.iter().zip(g.nodes()) {
            assert!((d + 2.0 * x[2]).abs() < 1e-8);
        }
    }

    #[test]
    fn gradient_bilinear_form_is_symmetric() {
        let g = build_sphere_grid(10, 1.0).unwrap();
        let p: Vec<f64> = g.nodes().iter().map(|x| x[0] * x[2] + x[1]).collect();
        let q: Vec<f64> = g.nodes().iter().map(|x| x[0] * x[0] - x[1] * x[2]).collect();
        let gp = surface_gradient(&g, &p).unwrap();
        let gq = surface_gradient(&g, &q).unwrap();
        let a = l2_inner(&g, &gp, &gq).unwrap();
        let b = l2_inner(&g, &gq, &gp).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let g1 = build_sphere_grid(6, 1.0).unwrap();
        let g2 = build_sphere_grid(6, 1.0).unwrap();
        let u = g1.zero_field();
        assert_eq!(l2_inner(&g2, &u, &u), Err(Error::GridMismatch));
        assert!(matches!(g1.integrate(&[1.0, 2.0]), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn l2_inner_is_positive_definite() {
        let g = build_sphere_grid(6, 1.0).unwrap();
        let u = rotation_field(&g, [0.3, -0.2, 0.9]);
        assert!(l2_inner(&g, &u, &u).unwrap() > 0.0);
        assert_eq!(l2_inner(&g, &g.zero_field(), &g.zero_field()).unwrap(), 0.0);
    }

    #[test]
    fn viscosity_validation() {
        let g = build_sphere_grid(6, 1.0).unwrap();
        assert!(ViscosityField::constant(&g, 0.0).is_err());
        assert!(ViscosityField::constant(&g, -1.0).is_err());
        let nu = ViscosityField::linear_x3(&g, 1.0, 0.5).unwrap();
        assert_eq!(nu.lower_bound(), 0.5);
        assert!(nu.min() >= 0.5);
        assert!(nu.gradient_bound() > 0.0 && nu.gradient_bound() <= 0.5 + 1e-12);
        assert!(ViscosityField::linear_x3(&g, 1.0, 1.5).is_err());
    }
}
