//! UCCSD excitation generators and their Trotterized product.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::{encode, Encoding, FermionOperator, Ladder};
use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::simulator::StateVector;

pub const DEFAULT_DEPTH: usize = 2;

/// Annihilate the `from` spin orbitals, create the `to` ones.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Excitation {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
}

impl Excitation {
    pub fn rank(&self) -> usize {
        self.from.len()
    }

    /// Orientation-free key: `t - t†` and its reverse differ only by sign.
    fn key(&self) -> (usize, Vec<usize>, Vec<usize>) {
        let (a, b) = if self.from <= self.to {
            (self.from.clone(), self.to.clone())
        } else {
            (self.to.clone(), self.from.clone())
        };
        (self.rank(), a, b)
    }

    /// `t = a†_{to...} a_{from...}`, with creators in ascending order and
    /// annihilators in descending order.
    pub fn operator(&self, n_modes: usize) -> Result<FermionOperator> {
        let mut ops: Vec<Ladder> = self.to.iter().map(|&m| Ladder::create(m)).collect();
        ops.extend(self.from.iter().rev().map(|&m| Ladder::annihilate(m)));
        let mut t = FermionOperator::zero(n_modes);
        t.push(ops, Complex64::new(1.0, 0.0))?;
        Ok(t)
    }
}

/// Spin-conserving singles and doubles out of `occupation`; singles first in
/// lexicographic `(occupied, virtual)` order, then doubles.
pub fn excitations(occupation: &[bool]) -> Result<Vec<Excitation>> {
    let occ: Vec<usize> = (0..occupation.len()).filter(|&i| occupation[i]).collect();
    let virt: Vec<usize> = (0..occupation.len()).filter(|&i| !occupation[i]).collect();
    if occ.is_empty() || virt.is_empty() {
        return Err(Error::EmptyExcitationSpace(format!(
            "{} occupied, {} virtual",
            occ.len(),
            virt.len()
        )));
    }
    let spin_up = |idx: &[usize]| idx.iter().filter(|&&m| m % 2 == 0).count();
    let mut out = Vec::new();
    for &j in &occ {
        for &k in &virt {
            if j % 2 == k % 2 {
                out.push(Excitation { from: vec![j], to: vec![k] });
            }
        }
    }
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in virt.iter().enumerate() {
                for &b in &virt[y + 1..] {
                    if spin_up(&[i, j]) == spin_up(&[a, b]) {
                        out.push(Excitation { from: vec![i, j], to: vec![a, b] });
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct AnsatzSpec {
    n_qubits: usize,
    excitations: Vec<Excitation>,
    generators: Vec<PauliSum>,
    depth: usize,
}

impl AnsatzSpec {
    pub fn from_excitations(
        n_spin_orbitals: usize,
        excitations: Vec<Excitation>,
        encoding: Encoding,
        depth: usize,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidConfig("Trotter depth must be at least 1".into()));
        }
        let generators = excitations
            .iter()
            .map(|e| {
                let t = e.operator(n_spin_orbitals)?;
                let g = t.add(&t.adjoint().scale(Complex64::new(-1.0, 0.0)));
                encode(&g, n_spin_orbitals, encoding)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_qubits: n_spin_orbitals,
            excitations,
            generators,
            depth,
        })
    }

    /// Union of several specs' excitations, dropping ones equal up to sign.
    pub fn union(specs: &[&AnsatzSpec], encoding: Encoding) -> Result<Self> {
        let first = specs
            .first()
            .ok_or_else(|| Error::InvalidConfig("empty ansatz union".into()))?;
        let mut seen = BTreeSet::new();
        let mut merged = Vec::new();
        for s in specs {
            for e in &s.excitations {
                if seen.insert(e.key()) {
                    merged.push(e.clone());
                }
            }
        }
        Self::from_excitations(first.n_qubits, merged, encoding, first.depth)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn parameter_count(&self) -> usize {
        self.generators.len()
    }

    pub fn excitations(&self) -> &[Excitation] {
        &self.excitations
    }

    pub fn generators(&self) -> &[PauliSum] {
        &self.generators
    }

    pub fn with_depth(mut self, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidConfig("Trotter depth must be at least 1".into()));
        }
        self.depth = depth;
        Ok(self)
    }

    pub fn apply(&self, state: &StateVector, theta: &[f64]) -> Result<StateVector> {
        apply_ansatz(state, self, theta)
    }
}

pub fn uccsd_generators(n_spin_orbitals: usize, occupation: &[bool], encoding: Encoding) -> Result<AnsatzSpec> {
    if occupation.len() != n_spin_orbitals {
        return Err(Error::RegisterMismatch {
            left: n_spin_orbitals,
            right: occupation.len(),
        });
    }
    AnsatzSpec::from_excitations(n_spin_orbitals, excitations(occupation)?, encoding, DEFAULT_DEPTH)
}

/// `U(θ)|state>` as `depth` repetitions of `Π_k Π_terms exp(θ_k/depth · term)`.
pub fn apply_ansatz(state: &StateVector, spec: &AnsatzSpec, theta: &[f64]) -> Result<StateVector> {
    if theta.len() != spec.parameter_count() {
        return Err(Error::ParameterLength {
            got: theta.len(),
            expected: spec.parameter_count(),
        });
    }
    if state.n() != spec.n_qubits {
        return Err(Error::StateMismatch {
            left: state.n(),
            right: spec.n_qubits,
        });
    }
    let mut out = state.clone();
    let scale = 1.0 / spec.depth as f64;
    for _ in 0..spec.depth {
        for (g, &t) in spec.generators.iter().zip(theta) {
            if t == 0.0 {
                continue;
            }
            for term in g.terms() {
                // exp(i c θ P) = exp(-i φ P) with φ = -cθ
                out.apply_pauli_exponential(&term, -term.coeff().im * t * scale)?;
            }
        }
    }
    Ok(out)
}
