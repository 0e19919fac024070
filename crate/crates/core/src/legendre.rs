//! Orthonormalized associated Legendre functions on a set of colatitudes.
//!
//! `Q_lm(cos θ) = sqrt((2l+1)/(4π) (l-m)!/(l+m)!) P_l^m(cos θ)` without the
//! Condon-Shortley phase, so that `Q_lm(cos θ) e^{imφ}` is orthonormal on the
//! unit sphere. Values are generated column by column in `m` with the
//! normalized three-term recurrence, which stays well conditioned for
//! degrees of a few hundred.

use std::f64::consts::PI;

/// Tabulated `Q_lm`, `dQ_lm/dθ` and `m Q_lm / sin θ` for `0 ≤ m ≤ l ≤ degree`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    degree: usize,
    n_lat: usize,
    q: Vec<f64>,
    dq: Vec<f64>,
    mq_sin: Vec<f64>,
}

#[inline]
pub(crate) fn tri_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

impl LegendreTable {
    /// Builds the table for colatitudes given by `cos θ` and `sin θ` (poles excluded).
    pub fn new(degree: usize, cos_theta: &[f64], sin_theta: &[f64]) -> Self {
        assert_eq!(cos_theta.len(), sin_theta.len());
        let n_lat = cos_theta.len();
        let n_entries = tri_index(degree, degree) + 1;
        let mut q = vec![0.0; n_entries * n_lat];
        let mut dq = vec![0.0; n_entries * n_lat];
        let mut mq_sin = vec![0.0; n_entries * n_lat];

        for j in 0..n_lat {
            let x = cos_theta[j];
            let s = sin_theta[j];
            let mut qmm = 1.0 / (4.0 * PI).sqrt();
            for m in 0..=degree {
                if m > 0 {
                    let mf = m as f64;
                    qmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
                }
                q[tri_index(m, m) * n_lat + j] = qmm;
                if m < degree {
                    q[tri_index(m + 1, m) * n_lat + j] = (2.0 * m as f64 + 3.0).sqrt() * x * qmm;
                }
                for l in (m + 2)..=degree {
                    let lf = l as f64;
                    let mf = m as f64;
                    let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                    let b = (((lf - 1.0) * (lf - 1.0) - mf * mf)
                        / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                        .sqrt();
                    let v = a
                        * (x * q[tri_index(l - 1, m) * n_lat + j]
                            - b * q[tri_index(l - 2, m) * n_lat + j]);
                    q[tri_index(l, m) * n_lat + j] = v;
                }
            }
        }

        for l in 0..=degree {
            let lf = l as f64;
            for m in 0..=l {
                let mf = m as f64;
                for j in 0..n_lat {
                    let up = if m < l {
                        q[tri_index(l, m + 1) * n_lat + j]
                    } else {
                        0.0
                    };
                    let d = if m == 0 {
                        -(lf * (lf + 1.0)).sqrt() * up
                    } else {
                        let down = q[tri_index(l, m - 1) * n_lat + j];
                        0.5 * (((lf + mf) * (lf - mf + 1.0)).sqrt() * down
                            - ((lf - mf) * (lf + mf + 1.0)).sqrt() * up)
                    };
                    dq[tri_index(l, m) * n_lat + j] = d;
                    mq_sin[tri_index(l, m) * n_lat + j] =
                        mf * q[tri_index(l, m) * n_lat + j] / sin_theta[j];
                }
            }
        }

        Self {
            degree,
            n_lat,
            q,
            dq,
            mq_sin,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_lat(&self) -> usize {
        self.n_lat
    }

    /// `Q_lm` at every colatitude.
    #[inline]
    pub fn q(&self, l: usize, m: usize) -> &[f64] {
        let o = tri_index(l, m) * self.n_lat;
        &self.q[o..o + self.n_lat]
    }

    /// `dQ_lm/dθ` at every colatitude.
    #[inline]
    pub fn dq(&self, l: usize, m: usize) -> &[f64] {
        let o = tri_index(l, m) * self.n_lat;
        &self.dq[o..o + self.n_lat]
    }

    /// `m Q_lm / sin θ` at every colatitude.
    #[inline]
    pub fn mq_sin(&self, l: usize, m: usize) -> &[f64] {
        let o = tri_index(l, m) * self.n_lat;
        &self.mq_sin[o..o + self.n_lat]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    fn table(degree: usize, thetas: &[f64]) -> LegendreTable {
        let c: Vec<f64> = thetas.iter().map(|t| t.cos()).collect();
        let s: Vec<f64> = thetas.iter().map(|t| t.sin()).collect();
        LegendreTable::new(degree, &c, &s)
    }

    #[test]
    fn low_degree_closed_forms() {
        let th = [0.3, 1.1, 2.5];
        let t = table(2, &th);
        for (j, &x) in th.iter().enumerate() {
            let (c, s) = (x.cos(), x.sin());
            let q10 = (3.0 / (4.0 * PI)).sqrt() * c;
            let q11 = (3.0 / (8.0 * PI)).sqrt() * s;
            let q20 = (5.0 / (16.0 * PI)).sqrt() * (3.0 * c * c - 1.0);
            let q21 = (15.0 / (8.0 * PI)).sqrt() * s * c;
            let q22 = (15.0 / (32.0 * PI)).sqrt() * s * s;
            assert!((t.q(1, 0)[j] - q10).abs() < 1e-15);
            assert!((t.q(1, 1)[j] - q11).abs() < 1e-15);
            assert!((t.q(2, 0)[j] - q20).abs() < 1e-15);
            assert!((t.q(2, 1)[j] - q21).abs() < 1e-15);
            assert!((t.q(2, 2)[j] - q22).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let h = 1e-5;
        let th = [0.2, 0.9, 1.7, 2.8];
        let plus: Vec<f64> = th.iter().map(|t| t + h).collect();
        let minus: Vec<f64> = th.iter().map(|t| t - h).collect();
        let (t0, tp, tm) = (table(12, &th), table(12, &plus), table(12, &minus));
        for l in 0..=12 {
            for m in 0..=l {
                for j in 0..th.len() {
                    let fd = (tp.q(l, m)[j] - tm.q(l, m)[j]) / (2.0 * h);
                    assert!(
                        (t0.dq(l, m)[j] - fd).abs() < 1e-7 * (1.0 + fd.abs()),
                        "l={l} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn orthonormal_under_gauss_legendre() {
        let n = 40;
        let (x, w) = gauss_legendre(n);
        let s: Vec<f64> = x.iter().map(|x| ((1.0 - x) * (1.0 + x)).sqrt()).collect();
        let t = LegendreTable::new(39, &x, &s);
        for m in 0..=5 {
            for l1 in m..=39 {
                for l2 in m..=39 {
                    let ip: f64 = (0..n)
                        .map(|j| 2.0 * PI * w[j] * t.q(l1, m)[j] * t.q(l2, m)[j])
                        .sum();
                    let expect = if l1 == l2 { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-12, "m={m} l1={l1} l2={l2} {ip}");
                }
            }
        }
    }
}
