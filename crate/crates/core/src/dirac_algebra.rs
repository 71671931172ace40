//! Fixed-size complex 4x4 algebra for Dirac matrices in the standard
//! representation and the Minkowski metric with signature (+,-,-,-).
//!
//! Latin indices run over 0..=3, Greek indices over 1..=3. Matrix entries of
//! the gamma matrices are exactly 0, ±1 or ±i, so products and
//! anticommutators built from them are bit-exact.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("spacetime index {0} out of range 0..=3")]
    IndexOutOfRange(usize),
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 4x4 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix4(pub [[Complex64; 4]; 4]);

impl ComplexMatrix4 {
    pub const fn zero() -> Self {
        Self([[ZERO; 4]; 4])
    }

    pub const fn identity() -> Self {
        Self([
            [ONE, ZERO, ZERO, ZERO],
            [ZERO, ONE, ZERO, ZERO],
            [ZERO, ZERO, ONE, ZERO],
            [ZERO, ZERO, ZERO, ONE],
        ])
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for entry in row.iter_mut() {
                *entry *= factor;
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for r in 0..4 {
            for c in 0..4 {
                out.0[c][r] = self.0[r][c].conj();
            }
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.adjoint()
    }

    pub fn apply(&self, v: &Bispinor) -> Bispinor {
        let mut out = Bispinor::zero();
        for (r, row) in self.0.iter().enumerate() {
            out.0[r] = row.iter().zip(v.0.iter()).map(|(m, x)| m * x).sum();
        }
        out
    }

    /// `self * other + other * self`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }
}

impl Default for ComplexMatrix4 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Index<(usize, usize)> for ComplexMatrix4 {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix4 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.0[r][c]
    }
}

impl Mul for ComplexMatrix4 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for r in 0..4 {
            for c in 0..4 {
                out.0[r][c] = (0..4).map(|k| self.0[r][k] * rhs.0[k][c]).sum();
            }
        }
        out
    }
}

impl Add for ComplexMatrix4 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for r in 0..4 {
            for c in 0..4 {
                out.0[r][c] += rhs.0[r][c];
            }
        }
        out
    }
}

impl Sub for ComplexMatrix4 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for ComplexMatrix4 {
    type Output = Self;
    fn neg(self) -> Self {
        let mut out = self;
        for entry in out.0.iter_mut().flatten() {
            *entry = -*entry;
        }
        out
    }
}

/// Four complex components of a Dirac bispinor.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Bispinor(pub [Complex64; 4]);

impl Bispinor {
    pub const fn zero() -> Self {
        Self([ZERO; 4])
    }

    pub fn new(c0: Complex64, c1: Complex64, c2: Complex64, c3: Complex64) -> Self {
        Self([c0, c1, c2, c3])
    }

    pub fn from_real(values: [f64; 4]) -> Self {
        Self(values.map(|v| Complex64::new(v, 0.0)))
    }

    /// `ψ*ψ`, the squared Hermitian norm.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.is_finite())
    }
}

impl Index<usize> for Bispinor {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Bispinor {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for Bispinor {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for Bispinor {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Neg for Bispinor {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|z| -z))
    }
}

impl Mul<Complex64> for Bispinor {
    type Output = Self;
    fn mul(self, rhs: Complex64) -> Self {
        self.scale(rhs)
    }
}

/// Minkowski metric `diag(1, -1, -1, -1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MinkowskiMetric;

impl MinkowskiMetric {
    pub const DIAGONAL: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

    /// `g_{ik}` (equal to `g^{ik}` for this metric).
    pub fn component(&self, i: usize, k: usize) -> Result<f64, AlgebraError> {
        check_index(i)?;
        check_index(k)?;
        Ok(if i == k { Self::DIAGONAL[i] } else { 0.0 })
    }

    /// Lorentzian inner product `g_{ik} a^i b^k`.
    pub fn dot(&self, a: &[f64; 4], b: &[f64; 4]) -> f64 {
        (0..4).map(|i| Self::DIAGONAL[i] * a[i] * b[i]).sum()
    }
}

/// The contravariant gamma matrices `γ^(0)..γ^(3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaMatrices {
    pub upper: [ComplexMatrix4; 4],
}

impl GammaMatrices {
    pub fn upper(&self, i: usize) -> Result<&ComplexMatrix4, AlgebraError> {
        check_index(i)?;
        Ok(&self.upper[i])
    }

    /// `γ_i = g_{ik} γ^(k)`.
    pub fn lower(&self, i: usize) -> Result<ComplexMatrix4, AlgebraError> {
        lower_index(self, i)
    }

    /// `γ^(0) γ^(k)`, the matrix of the Dirac current bilinear.
    pub fn current_matrix(&self, k: usize) -> Result<ComplexMatrix4, AlgebraError> {
        check_index(k)?;
        Ok(self.upper[0] * self.upper[k])
    }

    /// `γ^(0) γ_i`, the matrix of the energy-momentum bilinear.
    pub fn tensor_matrix(&self, i: usize) -> Result<ComplexMatrix4, AlgebraError> {
        Ok(self.upper[0] * self.lower(i)?)
    }
}

fn check_index(i: usize) -> Result<(), AlgebraError> {
    if i < 4 {
        Ok(())
    } else {
        Err(AlgebraError::IndexOutOfRange(i))
    }
}

/// Dirac matrices in the standard representation:
/// `γ^(0) = [[I, 0], [0, -I]]`, `γ^(α) = [[0, σ_α], [-σ_α, 0]]`.
pub fn standard_gammas() -> GammaMatrices {
    let o = ZERO;
    let p = ONE;
    let m = -ONE;
    let pi = I;
    let mi = -I;
    let g0 = ComplexMatrix4([[p, o, o, o], [o, p, o, o], [o, o, m, o], [o, o, o, m]]);
    let g1 = ComplexMatrix4([[o, o, o, p], [o, o, p, o], [o, m, o, o], [m, o, o, o]]);
    let g2 = ComplexMatrix4([[o, o, o, mi], [o, o, pi, o], [o, pi, o, o], [mi, o, o, o]]);
    let g3 = ComplexMatrix4([[o, o, p, o], [o, o, o, m], [m, o, o, o], [o, p, o, o]]);
    GammaMatrices {
        upper: [g0, g1, g2, g3],
    }
}

/// Lowers a gamma index with the (diagonal) Minkowski metric.
pub fn lower_index(gammas: &GammaMatrices, i: usize) -> Result<ComplexMatrix4, AlgebraError> {
    check_index(i)?;
    Ok(gammas.upper[i].scale(Complex64::new(MinkowskiMetric::DIAGONAL[i], 0.0)))
}

/// `Σ_{a,b} conj(psi_a) M_{ab} phi_b`.
pub fn sesquilinear_form(psi: &Bispinor, m: &ComplexMatrix4, phi: &Bispinor) -> Complex64 {
    let mut acc = ZERO;
    for a in 0..4 {
        let row: Complex64 = (0..4).map(|b| m.0[a][b] * phi.0[b]).sum();
        acc += psi.0[a].conj() * row;
    }
    acc
}
