use nalgebra::{DMatrix, SymmetricEigen};

use super::AoIntegrals;
use crate::error::{Error, Result};

pub const SCF_MAX_ITERATIONS: usize = 200;
const DENSITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitalMethod {
    /// Closed-shell restricted Hartree-Fock.
    RestrictedScf,
    /// Core Hamiltonian diagonalized in the Löwdin-orthogonalized AO basis.
    LowdinCore,
}

#[derive(Clone, Debug)]
pub struct ReferenceOrbitals {
    /// Columns are molecular orbitals in ascending energy order.
    pub coefficients: DMatrix<f64>,
    pub energies: Vec<f64>,
    pub method: OrbitalMethod,
    /// Total (electronic + nuclear) SCF energy; `None` for core orbitals.
    pub scf_energy: Option<f64>,
    /// Total energy after each SCF iteration.
    pub energy_history: Vec<f64>,
}

/// Closed-shell systems get a converged RHF; open-shell ones get core
/// orbitals in the Löwdin basis. Any orthonormal set leaves FCI unchanged.
pub fn reference_orbitals(ints: &AoIntegrals) -> Result<ReferenceOrbitals> {
    if ints.n_electrons.is_multiple_of(2) {
        restricted_scf(ints)
    } else {
        lowdin_core(ints)
    }
}

fn lowdin_core(ints: &AoIntegrals) -> Result<ReferenceOrbitals> {
    let x = inverse_sqrt(&ints.overlap);
    let (energies, c) = solve_fock(&ints.core_hamiltonian(), &x);
    Ok(ReferenceOrbitals {
        coefficients: c,
        energies,
        method: OrbitalMethod::LowdinCore,
        scf_energy: None,
        energy_history: Vec::new(),
    })
}

fn restricted_scf(ints: &AoIntegrals) -> Result<ReferenceOrbitals> {
    let n = ints.n();
    let n_occ = ints.n_electrons / 2;
    let h = ints.core_hamiltonian();
    let x = inverse_sqrt(&ints.overlap);

    let mut density = DMatrix::<f64>::zeros(n, n);
    let mut history = Vec::new();
    for _ in 0..SCF_MAX_ITERATIONS {
        let fock = &h + two_electron_part(ints, &density);
        let (energies, c) = solve_fock(&fock, &x);
        let mut next = DMatrix::<f64>::zeros(n, n);
        for mu in 0..n {
            for nu in 0..n {
                next[(mu, nu)] = 2.0 * (0..n_occ).map(|a| c[(mu, a)] * c[(nu, a)]).sum::<f64>();
            }
        }
        let new_fock = &h + two_electron_part(ints, &next);
        let e_elec = 0.5 * next.component_mul(&(&h + &new_fock)).sum();
        history.push(e_elec + ints.e_nuc);
        let change = (&next - &density).amax();
        density = next;
        if change < DENSITY_TOLERANCE {
            let (energies, c) = if history.len() > 1 {
                (energies, c)
            } else {
                solve_fock(&new_fock, &x)
            };
            return Ok(ReferenceOrbitals {
                coefficients: c,
                energies,
                method: OrbitalMethod::RestrictedScf,
                scf_energy: history.last().copied(),
                energy_history: history,
            });
        }
    }
    Err(Error::ScfNotConverged(SCF_MAX_ITERATIONS))
}

fn two_electron_part(ints: &AoIntegrals, density: &DMatrix<f64>) -> DMatrix<f64> {
    let n = ints.n();
    DMatrix::from_fn(n, n, |mu, nu| {
        let mut g = 0.0;
        for lam in 0..n {
            for sig in 0..n {
                g += density[(lam, sig)]
                    * (ints.eri(mu, nu, sig, lam) - 0.5 * ints.eri(mu, lam, sig, nu));
            }
        }
        g
    })
}

/// Solves `F C = S C e` through `X = S^{-1/2}`; eigenpairs ascending with the
/// largest-magnitude coefficient of each column made positive.
fn solve_fock(fock: &DMatrix<f64>, x: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let fp = x.transpose() * fock * x;
    let (vals, vecs) = sorted_eigen(&fp);
    let mut c = x * vecs;
    fix_signs(&mut c);
    (vals, c)
}

pub(crate) fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

fn inverse_sqrt(s: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(s.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Ties in magnitude go to the lowest row index.
fn fix_signs(c: &mut DMatrix<f64>) {
    for j in 0..c.ncols() {
        let max = c.column(j).amax();
        let lead = (0..c.nrows())
            .find(|&i| c[(i, j)].abs() >= max - 1e-12)
            .unwrap_or(0);
        if c[(lead, j)] < 0.0 {
            c.column_mut(j).neg_mut();
        }
    }
}
