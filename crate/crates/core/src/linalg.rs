//! Dense SPD state for ridge regression: `M`, its maintained inverse, and
//! the handful of products the learner needs.
//!
//! `M` starts at the identity and only ever receives PSD rank-1 terms, so its
//! eigenvalues stay ≥ 1. The inverse is updated with Sherman–Morrison and
//! recomputed from `M` by Cholesky every [`DEFAULT_REBUILD_EVERY`] updates.

use crate::error::{Error, Result};

pub const DEFAULT_REBUILD_EVERY: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SpdState {
    dim: usize,
    m: Vec<f64>,
    m_inv: Vec<f64>,
    since_rebuild: usize,
    rebuild_every: usize,
}

impl SpdState {
    /// `M = I`.
    pub fn identity(dim: usize) -> Self {
        let mut m = vec![0.0; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = 1.0;
        }
        SpdState {
            dim,
            m_inv: m.clone(),
            m,
            since_rebuild: 0,
            rebuild_every: DEFAULT_REBUILD_EVERY,
        }
    }

    /// Rebuild cadence; `0` disables rebuilds.
    pub fn with_rebuild_every(mut self, every: usize) -> Self {
        self.rebuild_every = every;
        self
    }

    pub(crate) fn from_raw(
        dim: usize,
        m: Vec<f64>,
        m_inv: Vec<f64>,
        since_rebuild: usize,
        rebuild_every: usize,
    ) -> Result<Self> {
        for len in [m.len(), m_inv.len()] {
            if len != dim * dim {
                return Err(Error::DimensionMismatch {
                    expected: dim * dim,
                    actual: len,
                });
            }
        }
        Ok(SpdState {
            dim,
            m,
            m_inv,
            since_rebuild,
            rebuild_every,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major `M`.
    pub fn matrix(&self) -> &[f64] {
        &self.m
    }

    /// Row-major maintained `M⁻¹`.
    pub fn inverse(&self) -> &[f64] {
        &self.m_inv
    }

    pub(crate) fn since_rebuild(&self) -> usize {
        self.since_rebuild
    }

    pub(crate) fn rebuild_every(&self) -> usize {
        self.rebuild_every
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            })
        } else {
            Ok(())
        }
    }

    /// `M⁻¹ x`.
    pub fn inv_mul(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|i| {
                let row = &self.m_inv[i * d..(i + 1) * d];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// `M ← M + scale · x xᵀ`, with the inverse kept in step.
    pub fn rank1_update(&mut self, x: &[f64], scale: f64) -> Result<()> {
        self.check_dim(x)?;
        if !(scale >= 0.0) || !scale.is_finite() {
            return Err(Error::Parameter(format!(
                "rank-1 scale {scale} must be finite and ≥ 0"
            )));
        }
        if scale == 0.0 {
            return Ok(());
        }
        let d = self.dim;
        for i in 0..d {
            let sx = scale * x[i];
            for j in 0..d {
                self.m[i * d + j] += sx * x[j];
            }
        }
        // M⁻¹ is symmetric, so M⁻¹ x xᵀ M⁻¹ = u uᵀ with u = M⁻¹ x.
        let u = self.inv_mul(x);
        let quad: f64 = u.iter().zip(x).map(|(a, b)| a * b).sum();
        let coef = scale / (1.0 + scale * quad);
        for i in 0..d {
            let cu = coef * u[i];
            for j in 0..d {
                self.m_inv[i * d + j] -= cu * u[j];
            }
        }
        self.since_rebuild += 1;
        if self.rebuild_every > 0 && self.since_rebuild >= self.rebuild_every {
            self.rebuild_inverse()?;
        }
        Ok(())
    }

    /// Recomputes `M⁻¹` from `M` by Cholesky factorization.
    pub fn rebuild_inverse(&mut self) -> Result<()> {
        self.m_inv = cholesky_inverse(&self.m, self.dim)?;
        self.since_rebuild = 0;
        Ok(())
    }

    /// `‖x‖_{M⁻¹} = √(xᵀ M⁻¹ x)`.
    pub fn mahalanobis_inv_norm(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.inv_quad(x))
    }

    /// Unchecked `‖x‖_{M⁻¹}`, clamped at 0 against rounding.
    pub(crate) fn inv_quad(&self, x: &[f64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            let row = &self.m_inv[i * d..(i + 1) * d];
            let ri: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            acc += x[i] * ri;
        }
        acc.max(0.0).sqrt()
    }

    /// `θ̂ = σ⁻² M⁻¹ b`.
    pub fn solve_theta(&self, b: &[f64], sigma: f64) -> Result<Vec<f64>> {
        self.check_dim(b)?;
        if !(sigma > 0.0) {
            return Err(Error::Parameter(format!("sigma {sigma} must be positive")));
        }
        let scale = 1.0 / (sigma * sigma);
        Ok(self.inv_mul(b).into_iter().map(|v| scale * v).collect())
    }

    /// `‖M · M⁻¹ − I‖_∞` (max absolute row sum).
    pub fn inverse_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            let mut row_sum = 0.0;
            for j in 0..d {
                let mut acc = 0.0;
                for k in 0..d {
                    acc += self.m[i * d + k] * self.m_inv[k * d + j];
                }
                if i == j {
                    acc -= 1.0;
                }
                row_sum += acc.abs();
            }
            worst = worst.max(row_sum);
        }
        worst
    }
}

/// Inverse of a row-major SPD matrix via `A = L Lᵀ`.
pub fn cholesky_inverse(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[i * d + j];
            for k in 0..j {
                sum -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::Parameter("matrix is not positive definite".into()));
                }
                l[i * d + i] = sum.sqrt();
            } else {
                l[i * d + j] = sum / l[j * d + j];
            }
        }
    }
    // Solve L Lᵀ X = I column by column.
    let mut inv = vec![0.0; d * d];
    let mut y = vec![0.0; d];
    for col in 0..d {
        for i in 0..d {
            let mut sum = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                sum -= l[i * d + k] * y[k];
            }
            y[i] = sum / l[i * d + i];
        }
        for i in (0..d).rev() {
            let mut sum = y[i];
            for k in i + 1..d {
                sum -= l[k * d + i] * inv[k * d + col];
            }
            inv[i * d + col] = sum / l[i * d + i];
        }
    }
    // Symmetrize.
    for i in 0..d {
        for j in 0..i {
            let avg = 0.5 * (inv[i * d + j] + inv[j * d + i]);
            inv[i * d + j] = avg;
            inv[j * d + i] = avg;
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_scale_is_noop() {
        let mut s = SpdState::identity(3);
        let before = s.clone();
        s.rank1_update(&[0.5, 0.5, 0.0], 0.0).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn basis_update() {
        let mut s = SpdState::identity(2);
        s.rank1_update(&[1.0, 0.0], 1.0).unwrap();
        assert_eq!(s.matrix(), &[2.0, 0.0, 0.0, 1.0]);
        assert_eq!(s.inverse(), &[0.5, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn negative_scale_rejected() {
        let mut s = SpdState::identity(2);
        assert!(s.rank1_update(&[1.0, 0.0], -0.1).is_err());
        assert!(s.rank1_update(&[1.0], 0.1).is_err());
    }

    #[test]
    fn norm_at_identity_and_zero() {
        let s = SpdState::identity(3);
        let x = [0.6, 0.0, 0.8];
        assert!((s.mahalanobis_inv_norm(&x).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(s.mahalanobis_inv_norm(&[0.0; 3]).unwrap(), 0.0);
        assert!(s.mahalanobis_inv_norm(&[0.0; 2]).is_err());
    }

    #[test]
    fn diagonal_solve() {
        let mut s = SpdState::identity(2);
        s.rank1_update(&[1.0, 0.0], 1.0).unwrap();
        assert_eq!(s.solve_theta(&[1.0, 0.0], 1.0).unwrap(), vec![0.5, 0.0]);
        assert_eq!(s.solve_theta(&[0.0, 0.0], 2.0).unwrap(), vec![0.0, 0.0]);
        assert!(s.solve_theta(&[1.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn cholesky_inverse_of_known_matrix() {
        // [[4, 2], [2, 3]]⁻¹ = [[3, -2], [-2, 4]] / 8.
        let inv = cholesky_inverse(&[4.0, 2.0, 2.0, 3.0], 2).unwrap();
        let want = [0.375, -0.25, -0.25, 0.5];
        for (a, b) in inv.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(cholesky_inverse(&[1.0, 2.0, 2.0, 1.0], 2).is_err());
    }

    #[test]
    fn rebuild_resets_counter() {
        let mut s = SpdState::identity(2).with_rebuild_every(3);
        for _ in 0..3 {
            s.rank1_update(&[0.6, 0.8], 0.5).unwrap();
        }
        assert_eq!(s.since_rebuild(), 0);
        assert!(s.inverse_residual() < 1e-12);
    }
}
