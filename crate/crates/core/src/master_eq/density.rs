use crate::error::{invalid, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

pub type Matrix2 = [[Complex64; 2]; 2];

const STATE_TOLERANCE: f64 = 1e-12;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Molecular density matrix in the channel basis |1⟩, |2⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix2 {
    m: Matrix2,
}

impl DensityMatrix2 {
    /// Checks Hermiticity, unit trace and positivity to 1e-12.
    pub fn new(m: Matrix2) -> Result<Self> {
        let rho = Self { m };
        if m.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(invalid("density matrix entries must be finite"));
        }
        if rho.hermiticity_residual() > STATE_TOLERANCE {
            return Err(invalid("density matrix must be Hermitian"));
        }
        if (rho.trace() - 1.0).abs() > STATE_TOLERANCE {
            return Err(invalid(format!("density matrix must have unit trace, got {}", rho.trace())));
        }
        if rho.min_eigenvalue() < -STATE_TOLERANCE {
            return Err(invalid("density matrix must be positive semidefinite"));
        }
        Ok(rho)
    }

    /// Wraps a matrix without validation; used for states produced by
    /// integration, whose invariants are monitored instead.
    pub fn from_matrix_unchecked(m: Matrix2) -> Self {
        Self { m }
    }

    /// |ψ⟩⟨ψ| for ψ = c₁|1⟩ + c₂|2⟩, normalized.
    pub fn pure(c1: Complex64, c2: Complex64) -> Result<Self> {
        let n = (c1.norm_sqr() + c2.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(invalid("state amplitudes must not both vanish"));
        }
        let (a, b) = (c1 / n, c2 / n);
        Ok(Self {
            m: [[a * a.conj(), a * b.conj()], [b * a.conj(), b * b.conj()]],
        })
    }

    /// (|1⟩ + |2⟩)/√2.
    pub fn plus() -> Self {
        let h = Complex64::new(0.5, 0.0);
        Self { m: [[h, h], [h, h]] }
    }

    pub fn diagonal(p1: f64, p2: f64) -> Result<Self> {
        Self::new([[Complex64::new(p1, 0.0), zero()], [zero(), Complex64::new(p2, 0.0)]])
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j]
    }

    pub fn populations(&self) -> [f64; 2] {
        [self.m[0][0].re, self.m[1][1].re]
    }

    pub fn coherence(&self) -> Complex64 {
        self.m[0][1]
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0].re + self.m[1][1].re
    }

    /// max |ρ − ρ†| over entries.
    pub fn hermiticity_residual(&self) -> f64 {
        let off = (self.m[0][1] - self.m[1][0].conj()).norm();
        let d = self.m[0][0].im.abs().max(self.m[1][1].im.abs());
        off.max(d)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = 0.5 * (self.m[0][1] + self.m[1][0].conj());
        let disc = ((a - d) * (a - d) + 4.0 * b.norm_sqr()).sqrt();
        0.5 * (a + d - disc)
    }

    /// tr ρ².
    pub fn purity(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += (self.m[i][j] * self.m[j][i]).re;
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisDirection {
    ToChiral,
    ToEnergy,
}

/// Change of basis to |L/R⟩ = (|1⟩ ± |2⟩)/√2 or back. The transform is its
/// own inverse, so both directions apply the same matrix.
pub fn chiral_basis_transform(rho: &DensityMatrix2, _direction: BasisDirection) -> DensityMatrix2 {
    let h = [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]];
    let mut out = [[zero(); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let mut s = zero();
            for a in 0..2 {
                for b in 0..2 {
                    s += h[i][a] * rho.m[a][b] * h[b][j];
                }
            }
            *slot = s;
        }
    }
    DensityMatrix2 { m: out }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DensityMatrix2, b: &DensityMatrix2, tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a.get(i, j) - b.get(i, j)).norm() <= tol))
    }

    #[test]
    fn ground_state_in_chiral_basis() {
        let g = DensityMatrix2::diagonal(1.0, 0.0).unwrap();
        let c = chiral_basis_transform(&g, BasisDirection::ToChiral);
        assert!((c.populations()[0] - 0.5).abs() < 1e-15);
        assert!((c.populations()[1] - 0.5).abs() < 1e-15);
        assert!((c.coherence().re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn left_state_round_trip() {
        let left = DensityMatrix2::pure(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).unwrap();
        let energy = chiral_basis_transform(&left, BasisDirection::ToEnergy);
        assert!(close(&energy, &DensityMatrix2::plus(), 1e-15));
        let back = chiral_basis_transform(&energy, BasisDirection::ToChiral);
        assert!(close(&back, &left, 1e-15));
    }

    #[test]
    fn mixed_state_is_basis_independent() {
        let mixed = DensityMatrix2::diagonal(0.5, 0.5).unwrap();
        let c = chiral_basis_transform(&mixed, BasisDirection::ToChiral);
        assert!(close(&c, &mixed, 1e-15));
        assert_eq!(c.coherence().norm(), 0.0);
    }

    #[test]
    fn validation() {
        let bad = [[Complex64::new(0.7, 0.0), zero()], [zero(), Complex64::new(0.7, 0.0)]];
        assert!(DensityMatrix2::new(bad).is_err());
        let non_herm = [[Complex64::new(0.5, 0.0), Complex64::new(0.1, 0.0)], [zero(), Complex64::new(0.5, 0.0)]];
        assert!(DensityMatrix2::new(non_herm).is_err());
        let negative = [[Complex64::new(0.5, 0.0), Complex64::new(0.8, 0.0)], [Complex64::new(0.8, 0.0), Complex64::new(0.5, 0.0)]];
        assert!(DensityMatrix2::new(negative).is_err());
        let p = DensityMatrix2::plus();
        assert!((p.purity() - 1.0).abs() < 1e-15);
        assert!(p.min_eigenvalue().abs() < 1e-15);
    }
}
