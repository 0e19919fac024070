//! Divergence-free toroidal vector harmonics on the sphere.
//!
//! `Φ_lm = R n × ∇_Γ Y_lm / sqrt(l(l+1))` with `Y_lm` orthonormal on the
//! sphere of radius `R`, so `{Φ_lm}` is L²-orthonormal. Coefficients are
//! stored in real form per degree, `[m=0, (cos 1, sin 1), ...]`, starting at
//! degree 1; the first three entries are the Killing block. The complex view
//! uses `c_l0 = a_0`, `c_lm = (a_c - i a_s)/√2`, `c_l,-m = (-1)^m conj(c_lm)`.

use std::f64::consts::FRAC_1_SQRT_2;

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::{SurfaceGrid, TangentialField};
use crate::sht::{toroidal_index, SphereLayout};

/// Number of real toroidal coefficients up to degree `L`.
#[inline]
pub fn n_coeffs(degree: usize) -> usize {
    degree * degree + 2 * degree
}

/// Real-storage index of `(l, m)`; negative `m` selects the sine member.
pub fn coeff_index(l: usize, m: i64) -> usize {
    toroidal_index(l, m.unsigned_abs() as usize, m < 0)
}

/// Inverse of [`coeff_index`].
pub fn index_to_lm(i: usize) -> (usize, i64) {
    let mut l = 1;
    while n_coeffs(l) <= i {
        l += 1;
    }
    let slot = i + 1 - l * l;
    if slot == 0 {
        (l, 0)
    } else if slot % 2 == 1 {
        (l, slot.div_ceil(2) as i64)
    } else {
        (l, -((slot / 2) as i64))
    }
}

/// Toroidal coefficients of a divergence-free field at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    degree: usize,
    pub coeffs: Vec<f64>,
    pub time: f64,
}

impl SpectralState {
    pub fn zeros(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![0.0; n_coeffs(degree)],
            time: 0.0,
        }
    }

    pub fn from_coeffs(degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidParameter("truncation degree must be at least 1".into()));
        }
        if coeffs.len() != n_coeffs(degree) {
            return Err(Error::ShapeMismatch {
                expected: n_coeffs(degree),
                actual: coeffs.len(),
            });
        }
        Ok(Self {
            degree,
            coeffs,
            time: 0.0,
        })
    }

    /// State with a single unit real-form mode.
    pub fn unit_mode(degree: usize, l: usize, m: i64) -> Result<Self> {
        check_lm(l, m, degree)?;
        let mut s = Self::zeros(degree);
        s.coeffs[coeff_index(l, m)] = 1.0;
        Ok(s)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        self.coeffs[coeff_index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, value: f64) {
        self.coeffs[coeff_index(l, m)] = value;
    }

    /// Complex coefficient `c_lm` for `-l ≤ m ≤ l`.
    pub fn complex(&self, l: usize, m: i64) -> Complex<f64> {
        let am = m.unsigned_abs() as usize;
        if am == 0 {
            return Complex::new(self.coeffs[toroidal_index(l, 0, false)], 0.0);
        }
        let c = self.coeffs[toroidal_index(l, am, false)];
        let s = self.coeffs[toroidal_index(l, am, true)];
        let pos = Complex::new(c, -s) * FRAC_1_SQRT_2;
        if m > 0 {
            pos
        } else if am % 2 == 0 {
            pos.conj()
        } else {
            -pos.conj()
        }
    }

    /// The degree-1 (Killing) block in storage order `(m=0, cos 1, sin 1)`.
    pub fn killing_block(&self) -> [f64; 3] {
        [self.coeffs[0], self.coeffs[1], self.coeffs[2]]
    }

    pub fn killing_part(&self) -> SpectralState {
        let mut s = SpectralState::zeros(self.degree);
        s.coeffs[..3].copy_from_slice(&self.coeffs[..3]);
        s.time = self.time;
        s
    }

    pub fn non_killing_part(&self) -> SpectralState {
        let mut s = self.clone();
        s.coeffs[..3].iter_mut().for_each(|c| *c = 0.0);
        s
    }

    /// `‖u‖²` by Parseval.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn killing_norm_sq(&self) -> f64 {
        self.coeffs[..3].iter().map(|c| c * c).sum()
    }

    pub fn non_killing_norm_sq(&self) -> f64 {
        self.coeffs[3..].iter().map(|c| c * c).sum()
    }

    pub fn dot(&self, other: &SpectralState) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, a: f64) -> SpectralState {
        SpectralState {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
            time: self.time,
        }
    }

    /// `self + a·other`, keeping the time of `self`.
    pub fn axpy(&self, a: f64, other: &SpectralState) -> Result<SpectralState> {
        if self.degree != other.degree {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(SpectralState {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x + a * y)
                .collect(),
            time: self.time,
        })
    }

    /// Copy truncated or zero-padded to degree `degree`.
    pub fn resized(&self, degree: usize) -> SpectralState {
        let mut s = SpectralState::zeros(degree);
        let n = s.len().min(self.len());
        s.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        s.time = self.time;
        s
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Largest violation of `c_l,-m = (-1)^m conj(c_lm)` in the complex view.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for l in 1..=self.degree {
            for m in 0..=l as i64 {
                let plus = self.complex(l, m);
                let minus = self.complex(l, -m);
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                worst = worst.max((minus - plus.conj() * sign).norm());
            }
        }
        worst
    }
}

fn check_lm(l: usize, m: i64, degree: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::InvalidParameter("no toroidal field of degree 0".into()));
    }
    if l > degree || m.unsigned_abs() as usize > l {
        return Err(Error::InvalidParameter(format!(
            "mode (l={l}, m={m}) outside truncation degree {degree}"
        )));
    }
    Ok(())
}

fn layout_for(grid: &SurfaceGrid, degree: usize) -> Result<&SphereLayout> {
    let lay = grid
        .sphere_layout()
        .ok_or(Error::UnsupportedGeometry("toroidal harmonics need a sphere grid"))?;
    if degree > lay.degree {
        return Err(Error::InvalidParameter(format!(
            "degree {degree} exceeds grid degree {}",
            lay.degree
        )));
    }
    Ok(lay)
}

/// Nodal real-form basis field `Φ_lm`; `m < 0` selects the sine member.
pub fn toroidal_basis_field(grid: &SurfaceGrid, l: usize, m: i64) -> Result<TangentialField> {
    let degree = grid.sphere_degree().unwrap_or(0);
    if grid.sphere_layout().is_none() {
        return Err(Error::UnsupportedGeometry("toroidal harmonics need a sphere grid"));
    }
    check_lm(l, m, degree)?;
    let s = SpectralState::unit_mode(l, l, m)?;
    synthesize(grid, &s)
}

/// Toroidal coefficients up to `degree` by quadrature projection.
pub fn analyze(grid: &SurfaceGrid, u: &TangentialField, degree: usize) -> Result<SpectralState> {
    grid.check_field(u)?;
    if degree == 0 {
        return Err(Error::InvalidParameter("truncation degree must be at least 1".into()));
    }
    let lay = layout_for(grid, degree)?;
    let coord = grid.frame_to_coord(&u.comps);
    SpectralState::from_coeffs(degree, lay.toroidal_analysis(&coord, degree))
}

pub fn synthesize(grid: &SurfaceGrid, s: &SpectralState) -> Result<TangentialField> {
    let lay = layout_for(grid, s.degree())?;
    let coord = lay.toroidal_synthesis(&s.coeffs, s.degree());
    grid.field(grid.coord_to_frame(coord))
}

/// Divergence-free part of an arbitrary tangential field.
///
/// On the sphere the spheroidal fields `∇_ΓY` are orthogonal to every
/// `Φ_lm`, so the projection is the toroidal analysis truncated at `degree`.
pub fn leray_project(grid: &SurfaceGrid, v: &TangentialField, degree: usize) -> Result<SpectralState> {
    analyze(grid, v, degree)
}

/// Grid resolution for exact quadrature of quadratic products of degree-`L` fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DealiasRule {
    pub degree: usize,
    pub n_lat: usize,
    pub n_lon: usize,
}

pub fn dealias_rule(degree: usize) -> DealiasRule {
    let k = (3 * degree).div_ceil(2).max(2);
    DealiasRule {
        degree: k,
        n_lat: k + 1,
        n_lon: 2 * k + 2,
    }
}
