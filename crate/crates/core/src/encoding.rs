//! Fermion-to-qubit encodings.
//!
//! Both encodings act on spin orbitals interleaved as `0↑, 0↓, 1↑, 1↓, …`
//! with mode `j` stored on qubit `j`. Jordan–Wigner stores occupations
//! directly; Bravyi–Kitaev stores the partial sums `b = β f (mod 2)` of the
//! Fenwick-tree matrix `β`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrals::MolecularProblem;
use crate::pauli::{Pauli, PauliSum, PauliTerm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Encoding {
    #[serde(rename = "jw")]
    JordanWigner,
    #[default]
    #[serde(rename = "bk")]
    BravyiKitaev,
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jw" | "jordan-wigner" => Ok(Encoding::JordanWigner),
            "bk" | "bravyi-kitaev" => Ok(Encoding::BravyiKitaev),
            other => Err(Error::InvalidConfig(format!("unknown encoding `{other}`"))),
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::JordanWigner => "jw",
            Encoding::BravyiKitaev => "bk",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self {
            mode,
            dagger: false,
        }
    }
}

/// A linear combination of products of ladder operators, each product read
/// left to right as an operator product.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionOperator {
    n_modes: usize,
    terms: Vec<(Vec<Ladder>, Complex64)>,
}

impl FermionOperator {
    pub fn zero(n_modes: usize) -> Self {
        Self {
            n_modes,
            terms: Vec::new(),
        }
    }

    pub fn identity(n_modes: usize, coeff: f64) -> Self {
        let mut f = Self::zero(n_modes);
        f.terms.push((Vec::new(), Complex64::new(coeff, 0.0)));
        f
    }

    pub fn number(n_modes: usize, mode: usize) -> Result<Self> {
        let mut f = Self::zero(n_modes);
        f.push(vec![Ladder::create(mode), Ladder::annihilate(mode)], 1.0.into())?;
        Ok(f)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn terms(&self) -> &[(Vec<Ladder>, Complex64)] {
        &self.terms
    }

    pub fn push(&mut self, ops: Vec<Ladder>, coeff: Complex64) -> Result<()> {
        if let Some(l) = ops.iter().find(|l| l.mode >= self.n_modes) {
            return Err(Error::IndexOutOfRange {
                index: l.mode,
                n: self.n_modes,
            });
        }
        self.terms.push((ops, coeff));
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_modes: self.n_modes,
            terms: self
                .terms
                .iter()
                .map(|(ops, c)| {
                    let ops = ops
                        .iter()
                        .rev()
                        .map(|l| Ladder {
                            mode: l.mode,
                            dagger: !l.dagger,
                        })
                        .collect();
                    (ops, c.conj())
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &FermionOperator) -> Self {
        let mut out = self.clone();
        out.n_modes = out.n_modes.max(other.n_modes);
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            n_modes: self.n_modes,
            terms: self.terms.iter().map(|(o, c)| (o.clone(), c * factor)).collect(),
        }
    }

    pub fn mul(&self, other: &FermionOperator) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mut ops = a.clone();
                ops.extend_from_slice(b);
                terms.push((ops, ca * cb));
            }
        }
        Self {
            n_modes: self.n_modes.max(other.n_modes),
            terms,
        }
    }

    /// Hermiticity judged on the (faithful) Jordan–Wigner image.
    pub fn is_hermitian(&self) -> Result<bool> {
        Ok(jordan_wigner(self, self.n_modes)?.is_hermitian())
    }
}

/// `a_j -> Z_0 … Z_{j-1} (X_j + iY_j)/2`, `a_j† -> Z_0 … Z_{j-1} (X_j - iY_j)/2`.
pub fn jordan_wigner(f: &FermionOperator, n: usize) -> Result<PauliSum> {
    let images = (0..n)
        .map(|j| {
            let mut x = vec![Pauli::Z; j];
            x.push(Pauli::X);
            x.resize(n, Pauli::I);
            let mut y = x.clone();
            y[j] = Pauli::Y;
            let half = Complex64::new(0.5, 0.0);
            let ihalf = Complex64::new(0.0, 0.5);
            let annihilate = PauliSum::from_terms(
                n,
                [PauliTerm::new(x.clone(), half), PauliTerm::new(y.clone(), ihalf)],
            )?;
            let create =
                PauliSum::from_terms(n, [PauliTerm::new(x, half), PauliTerm::new(y, -ihalf)])?;
            Ok((annihilate, create))
        })
        .collect::<Result<Vec<_>>>()?;
    encode_with(f, n, &images)
}

pub fn bravyi_kitaev(f: &FermionOperator, n: usize) -> Result<PauliSum> {
    let images = BkTransform::new(n).ladder_images()?;
    encode_with(f, n, &images)
}

pub fn encode(f: &FermionOperator, n: usize, encoding: Encoding) -> Result<PauliSum> {
    match encoding {
        Encoding::JordanWigner => jordan_wigner(f, n),
        Encoding::BravyiKitaev => bravyi_kitaev(f, n),
    }
}

fn encode_with(f: &FermionOperator, n: usize, images: &[(PauliSum, PauliSum)]) -> Result<PauliSum> {
    let mut out = PauliSum::zero(n);
    for (ops, coeff) in &f.terms {
        let mut prod = PauliSum::identity(n, 1.0).scale(*coeff);
        for l in ops {
            if l.mode >= n {
                return Err(Error::IndexOutOfRange { index: l.mode, n });
            }
            let (a, ad) = &images[l.mode];
            prod = prod.mul(if l.dagger { ad } else { a })?;
            if prod.is_empty() {
                break;
            }
        }
        out = out.add(&prod)?;
    }
    Ok(out)
}

/// The Bravyi–Kitaev basis change `b = β f` over GF(2) and its inverse.
#[derive(Clone, Debug)]
pub struct BkTransform {
    n: usize,
    beta: Vec<Vec<bool>>,
    beta_inv: Vec<Vec<bool>>,
}

impl BkTransform {
    pub fn new(n: usize) -> Self {
        let size = n.max(1).next_power_of_two();
        let mut beta = vec![vec![true]];
        while beta.len() < size {
            let m = beta.len();
            let mut next = vec![vec![false; 2 * m]; 2 * m];
            for i in 0..m {
                for j in 0..m {
                    next[i][j] = beta[i][j];
                    next[m + i][m + j] = beta[i][j];
                }
            }
            for j in 0..m {
                next[2 * m - 1][j] = true;
            }
            beta = next;
        }
        // β is unit lower triangular, so the leading n x n block stays invertible.
        let beta: Vec<Vec<bool>> = beta.into_iter().take(n).map(|r| r[..n].to_vec()).collect();
        let beta_inv = invert_lower_gf2(&beta);
        Self { n, beta, beta_inv }
    }

    pub fn matrix(&self) -> &[Vec<bool>] {
        &self.beta
    }

    pub fn apply(&self, occupation: &[bool]) -> Vec<bool> {
        gf2_apply(&self.beta, occupation)
    }

    pub fn invert(&self, qubits: &[bool]) -> Vec<bool> {
        gf2_apply(&self.beta_inv, qubits)
    }

    /// Qubits flipped when the occupation of `mode` changes (includes `mode`).
    pub fn flip_targets(&self, mode: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.beta[i][mode]).collect()
    }

    /// Qubits whose parity equals the parity of modes `0..mode`.
    pub fn parity_set(&self, mode: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| (0..mode).filter(|&k| self.beta_inv[k][i]).count() % 2 == 1)
            .collect()
    }

    /// Qubits whose parity equals the occupation of `mode` (includes `mode`).
    pub fn occupation_set(&self, mode: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.beta_inv[mode][i]).collect()
    }

    /// `a_j = X_A Z_P (I - Z_F)/2` and `a_j† = X_A Z_P (I + Z_F)/2`, where
    /// `A` flips the stored sums, `P` yields the parity sign of the lower
    /// modes and `F` reads the occupation of mode `j`.
    pub fn ladder_images(&self) -> Result<Vec<(PauliSum, PauliSum)>> {
        let n = self.n;
        (0..n)
            .map(|j| {
                let flip = string_on(n, &self.flip_targets(j), Pauli::X);
                let parity = string_on(n, &self.parity_set(j), Pauli::Z);
                let occ = PauliSum::from_term(string_on(n, &self.occupation_set(j), Pauli::Z));
                let half = Complex64::new(0.5, 0.0);
                let id = PauliSum::identity(n, 0.5);
                let head = PauliSum::from_term(flip.multiply(&parity)?);
                let annihilate = head.mul(&id.sub(&occ.scale(half))?)?;
                let create = head.mul(&id.add(&occ.scale(half))?)?;
                Ok((annihilate, create))
            })
            .collect()
    }
}

fn string_on(n: usize, qubits: &[usize], p: Pauli) -> PauliTerm {
    let mut axes = vec![Pauli::I; n];
    for &q in qubits {
        axes[q] = p;
    }
    PauliTerm::new(axes, Complex64::new(1.0, 0.0))
}

fn gf2_apply(m: &[Vec<bool>], v: &[bool]) -> Vec<bool> {
    m.iter()
        .map(|row| row.iter().zip(v).filter(|(&a, &b)| a && b).count() % 2 == 1)
        .collect()
}

fn invert_lower_gf2(m: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = m.len();
    let mut inv = vec![vec![false; n]; n];
    // column by column forward substitution of m x = e_c
    for c in 0..n {
        let mut x = vec![false; n];
        for i in 0..n {
            let mut s = i == c;
            for (k, xk) in x.iter().enumerate().take(i) {
                s ^= m[i][k] && *xk;
            }
            x[i] = s;
        }
        for i in 0..n {
            inv[i][c] = x[i];
        }
    }
    inv
}

/// Maps an occupation-number vector to computational-basis qubit values.
pub fn occupation_to_qubits(occupation: &[bool], encoding: Encoding) -> Vec<bool> {
    match encoding {
        Encoding::JordanWigner => occupation.to_vec(),
        Encoding::BravyiKitaev => BkTransform::new(occupation.len()).apply(occupation),
    }
}

pub fn qubits_to_occupation(qubits: &[bool], encoding: Encoding) -> Vec<bool> {
    match encoding {
        Encoding::JordanWigner => qubits.to_vec(),
        Encoding::BravyiKitaev => BkTransform::new(qubits.len()).invert(qubits),
    }
}

/// `H = E_nuc + Σ h_pq a_p† a_q + ¼ Σ <pq||rs> a_p† a_q† a_s a_r`.
pub fn fermion_hamiltonian(problem: &MolecularProblem) -> FermionOperator {
    let n = problem.n_spin_orbitals();
    let mut f = FermionOperator::identity(n, problem.e_nuc);
    for p in 0..n {
        for q in 0..n {
            let h = problem.h(p, q);
            if h != 0.0 {
                f.terms
                    .push((vec![Ladder::create(p), Ladder::annihilate(q)], h.into()));
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = problem.anti(p, q, r, s);
                    if v != 0.0 && p != q && r != s {
                        f.terms.push((
                            vec![
                                Ladder::create(p),
                                Ladder::create(q),
                                Ladder::annihilate(s),
                                Ladder::annihilate(r),
                            ],
                            (0.25 * v).into(),
                        ));
                    }
                }
            }
        }
    }
    f
}

pub fn qubit_hamiltonian(problem: &MolecularProblem, encoding: Encoding) -> Result<PauliSum> {
    let n = problem.n_spin_orbitals();
    encode(&fermion_hamiltonian(problem), n, encoding)
}

/// Particle number, spin projection and total spin, encoded alike.
#[derive(Clone, Debug)]
pub struct Observables {
    pub number: PauliSum,
    pub sz: PauliSum,
    pub s2: PauliSum,
}

pub fn fermion_observables(n_spatial: usize) -> Result<(FermionOperator, FermionOperator, FermionOperator)> {
    let n = 2 * n_spatial;
    let mut number = FermionOperator::zero(n);
    let mut sz = FermionOperator::zero(n);
    let mut s_plus = FermionOperator::zero(n);
    for i in 0..n_spatial {
        let (up, down) = (2 * i, 2 * i + 1);
        for m in [up, down] {
            number.push(vec![Ladder::create(m), Ladder::annihilate(m)], 1.0.into())?;
        }
        sz.push(vec![Ladder::create(up), Ladder::annihilate(up)], 0.5.into())?;
        sz.push(vec![Ladder::create(down), Ladder::annihilate(down)], (-0.5).into())?;
        s_plus.push(vec![Ladder::create(up), Ladder::annihilate(down)], 1.0.into())?;
    }
    let s_minus = s_plus.adjoint();
    let s2 = s_minus
        .mul(&s_plus)
        .add(&sz.mul(&sz))
        .add(&sz);
    Ok((number, sz, s2))
}

pub fn build_observables(n_spatial: usize, encoding: Encoding) -> Result<Observables> {
    let n = 2 * n_spatial;
    let (number, sz, s2) = fermion_observables(n_spatial)?;
    Ok(Observables {
        number: encode(&number, n, encoding)?,
        sz: encode(&sz, n, encoding)?,
        s2: encode(&s2, n, encoding)?,
    })
}
