//! Full 2^M density-matrix pipeline for small blocks.
//!
//! Each qubit gets its own Kraus channel built from Kronecker products, so this
//! path shares no algebra with the scalar coherence pipeline it checks.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use super::Dephasing;
use crate::protocol::ReadoutSign;

/// Largest block the dense oracle accepts.
pub const MAX_DENSE_QUBITS: u32 = 6;

/// Density matrix of an M-qubit block, kept in full.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBlockState {
    qubits: u32,
    rho: DMatrix<Complex64>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn embed(single: &Matrix2<Complex64>, qubit: u32, qubits: u32) -> DMatrix<Complex64> {
    let id = DMatrix::<Complex64>::identity(2, 2);
    let op = DMatrix::from_iterator(2, 2, single.iter().copied());
    // Qubit 0 is the most significant bit of the basis index.
    let mut acc = if qubit == 0 { op.clone() } else { id.clone() };
    for q in 1..qubits {
        let factor = if q == qubit { &op } else { &id };
        acc = acc.kronecker(factor);
    }
    acc
}

impl DenseBlockState {
    /// (|0...0> + |1...1>)/sqrt(2) on `qubits` qubits.
    pub fn ghz(qubits: u32) -> Self {
        Self::with_coherence(qubits, c(1.0))
    }

    /// GHZ-form state 1/2 (|0..0><0..0| + |1..1><1..1| + c |0..0><1..1| + h.c.).
    pub fn with_coherence(qubits: u32, coherence: Complex64) -> Self {
        assert!(
            (1..=MAX_DENSE_QUBITS).contains(&qubits),
            "dense oracle supports 1..={MAX_DENSE_QUBITS} qubits"
        );
        let dim = 1usize << qubits;
        let mut rho = DMatrix::zeros(dim, dim);
        rho[(0, 0)] = c(0.5);
        rho[(dim - 1, dim - 1)] = c(0.5);
        rho[(0, dim - 1)] = coherence * 0.5;
        rho[(dim - 1, 0)] = coherence.conj() * 0.5;
        Self { qubits, rho }
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    /// Restriction to the {|0...0>, |1...1>} subspace.
    pub fn effective(&self) -> Matrix2<Complex64> {
        let last = self.rho.nrows() - 1;
        Matrix2::new(
            self.rho[(0, 0)],
            self.rho[(0, last)],
            self.rho[(last, 0)],
            self.rho[(last, last)],
        )
    }

    /// 2 <0...0| rho |1...1>
    pub fn coherence(&self) -> Complex64 {
        self.rho[(0, self.rho.ncols() - 1)] * 2.0
    }

    /// Free evolution for `tau`: on every qubit the unitary
    /// exp(-i omega tau sigma_z / 2) followed by a sigma_z flip with weight
    /// (1 - e^{-gamma^2 tau^2 - Gamma tau}) / 2.
    pub fn evolve_segment(&mut self, noise: &Dephasing, tau: f64) {
        let half = Complex64::from_polar(1.0, -noise.omega * tau / 2.0);
        let u = Matrix2::new(half, c(0.0), c(0.0), half.conj());
        let z = Matrix2::new(c(1.0), c(0.0), c(0.0), c(-1.0));
        let keep =
            0.5 * (1.0 + (-(noise.gamma * noise.gamma * tau * tau) - noise.big_gamma * tau).exp());
        for q in 0..self.qubits {
            let uq = embed(&u, q, self.qubits);
            let zq = embed(&z, q, self.qubits);
            let rotated = &uq * &self.rho * uq.adjoint();
            let flipped = &zq * &rotated * &zq;
            self.rho = rotated * c(keep) + flipped * c(1.0 - keep);
        }
    }

    /// Imperfect teleportation of the block: with probability (1 - p)^M the
    /// state arrives intact, otherwise as the fully dephased GHZ mixture.
    pub fn apply_teleport(&mut self, p: f64) {
        let ok = (1.0 - p).powi(self.qubits as i32);
        let error = Self::with_coherence(self.qubits, c(0.0)).rho;
        self.rho = &self.rho * c(ok) + error * c(1.0 - ok);
    }

    /// <psi_pm| rho |psi_pm> with |psi_pm> = (|0...0> pm i |1...1>)/sqrt(2)
    /// built explicitly in the full space.
    pub fn projector_expectation(&self, sign: ReadoutSign) -> f64 {
        let dim = self.rho.nrows();
        let mut psi = DVector::<Complex64>::zeros(dim);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        psi[0] = c(s);
        psi[dim - 1] = Complex64::new(0.0, sign.factor() * s);
        (psi.adjoint() * &self.rho * &psi)[(0, 0)].re
    }

    /// Hermitian, unit trace and positive semidefinite within `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        let herm = (&self.rho - self.rho.adjoint()).iter().all(|z| z.norm() <= tol);
        let trace = (self.rho.trace() - c(1.0)).norm() <= tol;
        let eig = self.rho.clone().symmetric_eigenvalues();
        herm && trace && eig.iter().all(|&e| e >= -1e-12)
    }
}
