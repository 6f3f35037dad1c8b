//! Dense statevector simulation.
//!
//! Qubit 0 is the leftmost character of a ket label and the most significant
//! bit of an amplitude index.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliMasks, PauliSum, PauliTerm};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Imaginary parts of expectation values above this are reported as a bug.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state from a label such as `"1000"`.
    pub fn basis_state(label: &str) -> Result<Self> {
        let bits = label
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::BadLabel(label.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        if bits.is_empty() {
            return Err(Error::BadLabel(label.to_string()));
        }
        Ok(Self::from_bits(&bits))
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let n = bits.len();
        let index = bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        Self::from_index(n, index)
    }

    pub fn from_index(n: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    /// Wraps raw amplitudes; the caller is responsible for normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        Ok(Self {
            n: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = self.bit(q);
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn h(&mut self, q: usize) {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_1q(q, [[s, s], [s, -s]]);
    }

    /// `Rx(φ) = exp(-iφX/2)`.
    pub fn rx(&mut self, q: usize, phi: f64) {
        let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
        let c = Complex64::new(c, 0.0);
        let mis = Complex64::new(0.0, -s);
        self.apply_1q(q, [[c, mis], [mis, c]]);
    }

    /// `Ry(φ) = exp(-iφY/2)`.
    pub fn ry(&mut self, q: usize, phi: f64) {
        let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
        let (c, s) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0));
        self.apply_1q(q, [[c, -s], [s, c]]);
    }

    /// `Rz(φ) = exp(-iφZ/2)`.
    pub fn rz(&mut self, q: usize, phi: f64) {
        let bit = self.bit(q);
        let lo = Complex64::from_polar(1.0, -phi / 2.0);
        let hi = Complex64::from_polar(1.0, phi / 2.0);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & bit == 0 { lo } else { hi };
        }
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        let (cb, tb) = (self.bit(control), self.bit(target));
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    /// `exp(-iθP)` for the bare Pauli string `p` (its coefficient is ignored),
    /// realized as a basis-change / CNOT-parity / `Rz(2θ)` ladder over the
    /// non-identity qubits. The all-identity string contributes `e^{-iθ}`.
    pub fn apply_pauli_exponential(&mut self, p: &PauliTerm, theta: f64) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::StateMismatch {
                left: self.n,
                right: p.n(),
            });
        }
        let active = p.support();
        let Some(&last) = active.last() else {
            let phase = Complex64::from_polar(1.0, -theta);
            self.amps.iter_mut().for_each(|a| *a *= phase);
            return Ok(());
        };
        let axes = p.axes();
        for &q in &active {
            match axes[q] {
                Pauli::X => self.h(q),
                Pauli::Y => self.rx(q, FRAC_PI_2),
                _ => {}
            }
        }
        for w in active.windows(2) {
            self.cnot(w[0], w[1]);
        }
        self.rz(last, 2.0 * theta);
        for w in active.windows(2).rev() {
            self.cnot(w[0], w[1]);
        }
        for &q in &active {
            match axes[q] {
                Pauli::X => self.h(q),
                Pauli::Y => self.rx(q, -FRAC_PI_2),
                _ => {}
            }
        }
        Ok(())
    }

    /// `P|ψ>` including the term coefficient.
    pub fn apply_pauli(&self, p: &PauliTerm) -> Result<StateVector> {
        if p.n() != self.n {
            return Err(Error::StateMismatch {
                left: self.n,
                right: p.n(),
            });
        }
        let m = p.masks();
        let mut out = vec![ZERO; self.amps.len()];
        for (b, &a) in self.amps.iter().enumerate() {
            out[b ^ m.x_mask] = p.coeff() * m.phase(b) * a;
        }
        Ok(StateVector { n: self.n, amps: out })
    }

    pub fn expectation(&self, obs: &PauliSum) -> Result<f64> {
        CompiledObservable::new(obs)?.expectation(self)
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::StateMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// A Hermitian Pauli sum pre-reduced to bit masks for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledObservable {
    n: usize,
    terms: Vec<(PauliMasks, f64)>,
}

impl CompiledObservable {
    pub fn new(obs: &PauliSum) -> Result<Self> {
        obs.ensure_hermitian()?;
        Ok(Self {
            n: obs.n(),
            terms: obs.terms().map(|t| (t.masks(), t.coeff().re)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn expectation(&self, s: &StateVector) -> Result<f64> {
        if s.n != self.n {
            return Err(Error::StateMismatch {
                left: s.n,
                right: self.n,
            });
        }
        let mut total = ZERO;
        for (m, c) in &self.terms {
            let mut acc = ZERO;
            for (b, &a) in s.amps.iter().enumerate() {
                if a != ZERO {
                    acc += s.amps[b ^ m.x_mask].conj() * m.phase(b) * a;
                }
            }
            total += acc * *c;
        }
        if total.im.abs() > IMAGINARY_TOLERANCE {
            return Err(Error::NotHermitian(total.im.abs()));
        }
        Ok(total.re)
    }
}
