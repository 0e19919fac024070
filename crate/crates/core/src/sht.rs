//! Separable direct transforms on a Gauss-Legendre x uniform-longitude grid.
//!
//! All vector quantities here are expressed in the coordinate frame
//! `(e_θ, e_φ)`; conversion to a grid's own tangent frame happens in
//! [`crate::geometry`]. Real harmonics are stored per degree as
//! `[m=0, (cos 1, sin 1), (cos 2, sin 2), ...]`.

use std::f64::consts::{PI, SQRT_2};

use crate::legendre::LegendreTable;
use crate::quadrature::gauss_legendre;

/// Offset of the `(m, kind)` slot inside a degree block: 0 for `m = 0`,
/// `2m - 1` for the cosine and `2m` for the sine member.
#[inline]
pub(crate) fn block_slot(m: usize, sine: bool) -> usize {
    if m == 0 {
        0
    } else if sine {
        2 * m
    } else {
        2 * m - 1
    }
}

/// Index of a real scalar harmonic, degrees starting at 0.
#[inline]
pub(crate) fn scalar_index(l: usize, m: usize, sine: bool) -> usize {
    l * l + block_slot(m, sine)
}

/// Index of a real toroidal harmonic, degrees starting at 1.
#[inline]
pub(crate) fn toroidal_index(l: usize, m: usize, sine: bool) -> usize {
    l * l - 1 + block_slot(m, sine)
}

#[derive(Debug, Clone)]
pub(crate) struct SphereLayout {
    pub radius: f64,
    pub degree: usize,
    pub n_lat: usize,
    pub n_lon: usize,
    pub cos_theta: Vec<f64>,
    pub sin_theta: Vec<f64>,
    pub gl_weights: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: f64,
    pub legendre: LegendreTable,
    cos_mphi: Vec<f64>,
    sin_mphi: Vec<f64>,
}

impl SphereLayout {
    pub fn new(degree: usize, radius: f64) -> Self {
        let n_lat = degree + 1;
        let n_lon = 2 * degree + 2;
        let (cos_theta, gl_weights) = gauss_legendre(n_lat);
        let sin_theta: Vec<f64> = cos_theta
            .iter()
            .map(|x| ((1.0 - x) * (1.0 + x)).sqrt())
            .collect();
        let dphi = 2.0 * PI / n_lon as f64;
        let phi: Vec<f64> = (0..n_lon).map(|k| k as f64 * dphi).collect();
        let legendre = LegendreTable::new(degree, &cos_theta, &sin_theta);
        let mut cos_mphi = vec![0.0; (degree + 1) * n_lon];
        let mut sin_mphi = vec![0.0; (degree + 1) * n_lon];
        for m in 0..=degree {
            for k in 0..n_lon {
                // reduce m*k modulo n_lon so the tables are exactly periodic
                let arg = 2.0 * PI * ((m * k) % n_lon) as f64 / n_lon as f64;
                cos_mphi[m * n_lon + k] = arg.cos();
                sin_mphi[m * n_lon + k] = arg.sin();
            }
        }
        Self {
            radius,
            degree,
            n_lat,
            n_lon,
            cos_theta,
            sin_theta,
            gl_weights,
            phi,
            dphi,
            legendre,
            cos_mphi,
            sin_mphi,
        }
    }

    #[inline]
    fn cos_m(&self, m: usize) -> &[f64] {
        &self.cos_mphi[m * self.n_lon..(m + 1) * self.n_lon]
    }

    #[inline]
    fn sin_m(&self, m: usize) -> &[f64] {
        &self.sin_mphi[m * self.n_lon..(m + 1) * self.n_lon]
    }

    /// Cosine and sine sums `Σ_k f_k cos(mφ_k)`, `Σ_k f_k sin(mφ_k)` of one latitude row.
    fn row_forward(&self, row: &[f64], mmax: usize, a: &mut [f64], b: &mut [f64]) {
        for m in 0..=mmax {
            let (c, s) = (self.cos_m(m), self.sin_m(m));
            let mut sa = 0.0;
            let mut sb = 0.0;
            for k in 0..self.n_lon {
                sa += row[k] * c[k];
                sb += row[k] * s[k];
            }
            a[m] = sa;
            b[m] = sb;
        }
    }

    /// `f_k = Σ_m a_m cos(mφ_k) + b_m sin(mφ_k)` written into `row`.
    fn row_inverse(&self, a: &[f64], b: &[f64], mmax: usize, row: &mut [f64]) {
        row.iter_mut().for_each(|v| *v = 0.0);
        for m in 0..=mmax {
            let (c, s) = (self.cos_m(m), self.sin_m(m));
            let (am, bm) = (a[m], b[m]);
            for k in 0..self.n_lon {
                row[k] += am * c[k] + bm * s[k];
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_lat * self.n_lon
    }

    /// Quadrature projection of nodal values onto real scalar harmonics up to `lmax`.
    pub fn scalar_analysis(&self, values: &[f64], lmax: usize) -> Vec<f64> {
        debug_assert!(lmax <= self.degree);
        let mut out = vec![0.0; (lmax + 1) * (lmax + 1)];
        let mut a = vec![0.0; lmax + 1];
        let mut b = vec![0.0; lmax + 1];
        let r = self.radius;
        for j in 0..self.n_lat {
            let row = &values[j * self.n_lon..(j + 1) * self.n_lon];
            self.row_forward(row, lmax, &mut a, &mut b);
            let wj = r * self.dphi * self.gl_weights[j];
            for m in 0..=lmax {
                let sm = if m == 0 { 1.0 } else { SQRT_2 };
                for l in m..=lmax {
                    let q = self.legendre.q(l, m)[j] * sm * wj;
                    out[scalar_index(l, m, false)] += q * a[m];
                    if m > 0 {
                        out[scalar_index(l, m, true)] += q * b[m];
                    }
                }
            }
        }
        out
    }

    #[cfg(test)]
    pub fn scalar_synthesis(&self, coeffs: &[f64], lmax: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_nodes()];
        let mut a = vec![0.0; lmax + 1];
        let mut b = vec![0.0; lmax + 1];
        let inv_r = 1.0 / self.radius;
        for j in 0..self.n_lat {
            for m in 0..=lmax {
                let sm = if m == 0 { inv_r } else { SQRT_2 * inv_r };
                let (mut sa, mut sb) = (0.0, 0.0);
                for l in m..=lmax {
                    let q = self.legendre.q(l, m)[j] * sm;
                    sa += q * coeffs[scalar_index(l, m, false)];
                    if m > 0 {
                        sb += q * coeffs[scalar_index(l, m, true)];
                    }
                }
                a[m] = sa;
                b[m] = sb;
            }
            self.row_inverse(&a, &b, lmax, &mut out[j * self.n_lon..(j + 1) * self.n_lon]);
        }
        out
    }

    /// Surface gradient of a scalar expansion, `(e_θ, e_φ)` components.
    pub fn scalar_gradient(&self, coeffs: &[f64], lmax: usize) -> Vec<[f64; 2]> {
        let n = self.n_nodes();
        let mut gt = vec![0.0; n];
        let mut gp = vec![0.0; n];
        let mut at = vec![0.0; lmax + 1];
        let mut bt = vec![0.0; lmax + 1];
        let mut ap = vec![0.0; lmax + 1];
        let mut bp = vec![0.0; lmax + 1];
        let inv_r2 = 1.0 / (self.radius * self.radius);
        for j in 0..self.n_lat {
            for m in 0..=lmax {
                let sm = if m == 0 { inv_r2 } else { SQRT_2 * inv_r2 };
                let (mut c_d, mut s_d, mut c_q, mut s_q) = (0.0, 0.0, 0.0, 0.0);
                for l in m..=lmax {
                    let cc = coeffs[scalar_index(l, m, false)];
                    let cs = if m > 0 { coeffs[scalar_index(l, m, true)] } else { 0.0 };
                    let d = self.legendre.dq(l, m)[j] * sm;
                    let q = self.legendre.mq_sin(l, m)[j] * sm;
                    c_d += d * cc;
                    s_d += d * cs;
                    c_q += q * cc;
                    s_q += q * cs;
                }
                at[m] = c_d;
                bt[m] = s_d;
                // ∂_φ (C cos mφ + S sin mφ) = m (S cos mφ - C sin mφ)
                ap[m] = s_q;
                bp[m] = -c_q;
            }
            let rows = j * self.n_lon..(j + 1) * self.n_lon;
            self.row_inverse(&at, &bt, lmax, &mut gt[rows.clone()]);
            self.row_inverse(&ap, &bp, lmax, &mut gp[rows]);
        }
        gt.into_iter().zip(gp).map(|(a, b)| [a, b]).collect()
    }

    /// Nodal `(e_θ, e_φ)` components of `Σ c_i Φ_i` over degrees `1..=lmax`.
    pub fn toroidal_synthesis(&self, coeffs: &[f64], lmax: usize) -> Vec<[f64; 2]> {
        let n = self.n_nodes();
        let mut ut = vec![0.0; n];
        let mut up = vec![0.0; n];
        let mut at = vec![0.0; lmax + 1];
        let mut bt = vec![0.0; lmax + 1];
        let mut ap = vec![0.0; lmax + 1];
        let mut bp = vec![0.0; lmax + 1];
        for j in 0..self.n_lat {
            for m in 0..=lmax {
                let (mut tc, mut ts, mut pc, mut ps) = (0.0, 0.0, 0.0, 0.0);
                for l in m.max(1)..=lmax {
                    let f = self.toroidal_factor(l);
                    let d = self.legendre.dq(l, m)[j] * f;
                    if m == 0 {
                        pc += d * coeffs[toroidal_index(l, 0, false)];
                    } else {
                        let q = self.legendre.mq_sin(l, m)[j] * f * SQRT_2;
                        let cc = coeffs[toroidal_index(l, m, false)];
                        let cs = coeffs[toroidal_index(l, m, true)];
                        tc -= q * cs;
                        ts += q * cc;
                        pc += SQRT_2 * d * cc;
                        ps += SQRT_2 * d * cs;
                    }
                }
                at[m] = tc;
                bt[m] = ts;
                ap[m] = pc;
                bp[m] = ps;
            }
            let rows = j * self.n_lon..(j + 1) * self.n_lon;
            self.row_inverse(&at, &bt, lmax, &mut ut[rows.clone()]);
            self.row_inverse(&ap, &bp, lmax, &mut up[rows]);
        }
        ut.into_iter().zip(up).map(|(a, b)| [a, b]).collect()
    }

    /// Quadrature projections `∫ v·Φ_i dS` for degrees `1..=lmax`.
    pub fn toroidal_analysis(&self, comps: &[[f64; 2]], lmax: usize) -> Vec<f64> {
        let mut out = vec![0.0; (lmax + 1) * (lmax + 1) - 1];
        let mut vt = vec![0.0; self.n_lon];
        let mut vp = vec![0.0; self.n_lon];
        let mut at = vec![0.0; lmax + 1];
        let mut bt = vec![0.0; lmax + 1];
        let mut ap = vec![0.0; lmax + 1];
        let mut bp = vec![0.0; lmax + 1];
        let r2 = self.radius * self.radius;
        for j in 0..self.n_lat {
            for k in 0..self.n_lon {
                let c = comps[j * self.n_lon + k];
                vt[k] = c[0];
                vp[k] = c[1];
            }
            self.row_forward(&vt, lmax, &mut at, &mut bt);
            self.row_forward(&vp, lmax, &mut ap, &mut bp);
            let wj = r2 * self.dphi * self.gl_weights[j];
            for m in 0..=lmax {
                for l in m.max(1)..=lmax {
                    let f = self.toroidal_factor(l) * wj;
                    let d = self.legendre.dq(l, m)[j] * f;
                    if m == 0 {
                        out[toroidal_index(l, 0, false)] += d * ap[0];
                    } else {
                        let q = self.legendre.mq_sin(l, m)[j] * f * SQRT_2;
                        out[toroidal_index(l, m, false)] += q * bt[m] + SQRT_2 * d * ap[m];
                        out[toroidal_index(l, m, true)] += -q * at[m] + SQRT_2 * d * bp[m];
                    }
                }
            }
        }
        out
    }

    #[inline]
    fn toroidal_factor(&self, l: usize) -> f64 {
        let lf = l as f64;
        1.0 / (self.radius * (lf * (lf + 1.0)).sqrt())
    }
}
