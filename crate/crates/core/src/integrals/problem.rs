use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ao_integrals, reference_orbitals, AoIntegrals, Geometry, ReferenceOrbitals};
use crate::error::Result;

/// Spin-orbital `2i + s` is spatial orbital `i` with spin `s` (0 up, 1 down).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpinOrbitalOrdering {
    Interleaved,
}

/// Molecular-orbital integrals in both spatial (chemists') and spin-orbital
/// (physicists', antisymmetrized) form.
#[derive(Clone, Debug)]
pub struct MolecularProblem {
    pub n_spatial: usize,
    pub n_electrons: usize,
    pub e_nuc: f64,
    pub ordering: SpinOrbitalOrdering,
    h_spatial: DMatrix<f64>,
    eri_spatial: Vec<f64>,
    h_spin: DMatrix<f64>,
    anti: Vec<f64>,
}

impl MolecularProblem {
    /// `eri` is `(pq|rs)` in chemists' notation, flattened row-major.
    pub fn from_spatial(h: DMatrix<f64>, eri: Vec<f64>, e_nuc: f64, n_electrons: usize) -> Self {
        let n = h.nrows();
        assert_eq!(eri.len(), n.pow(4), "two-electron tensor has wrong size");
        let ns = 2 * n;
        let sidx = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;
        let h_spin = DMatrix::from_fn(ns, ns, |p, q| {
            if p % 2 == q % 2 {
                h[(p / 2, q / 2)]
            } else {
                0.0
            }
        });
        // <pq|rs> = (pr|qs) with spin deltas
        let phys = |p: usize, q: usize, r: usize, s: usize| {
            if p % 2 == r % 2 && q % 2 == s % 2 {
                eri[sidx(p / 2, r / 2, q / 2, s / 2)]
            } else {
                0.0
            }
        };
        let mut anti = vec![0.0; ns.pow(4)];
        for p in 0..ns {
            for q in 0..ns {
                for r in 0..ns {
                    for s in 0..ns {
                        anti[((p * ns + q) * ns + r) * ns + s] = phys(p, q, r, s) - phys(p, q, s, r);
                    }
                }
            }
        }
        Self {
            n_spatial: n,
            n_electrons,
            e_nuc,
            ordering: SpinOrbitalOrdering::Interleaved,
            h_spatial: h,
            eri_spatial: eri,
            h_spin,
            anti,
        }
    }

    /// Integrals, reference orbitals and MO transformation in one go.
    pub fn from_geometry(g: &Geometry) -> Result<(Self, ReferenceOrbitals)> {
        let ints = ao_integrals(g)?;
        let orbitals = reference_orbitals(&ints)?;
        let problem = spin_orbital_coefficients(&ints, &orbitals.coefficients);
        Ok((problem, orbitals))
    }

    pub fn n_spin_orbitals(&self) -> usize {
        2 * self.n_spatial
    }

    pub fn h_spatial(&self) -> &DMatrix<f64> {
        &self.h_spatial
    }

    /// Chemists' `(pq|rs)` over spatial MOs.
    pub fn eri_spatial(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_spatial;
        self.eri_spatial[((p * n + q) * n + r) * n + s]
    }

    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.h_spin[(p, q)]
    }

    /// `<pq||rs> = <pq|rs> - <pq|sr>` over spin orbitals.
    pub fn anti(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_spin_orbitals();
        self.anti[((p * n + q) * n + r) * n + s]
    }
}

/// Transforms AO integrals into the MO basis given by the columns of `c`.
pub fn spin_orbital_coefficients(ints: &AoIntegrals, c: &DMatrix<f64>) -> MolecularProblem {
    let n = ints.n();
    let h = c.transpose() * ints.core_hamiltonian() * c;
    let idx = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;

    // quarter transformations, one index at a time
    let mut cur = ints.eri.clone();
    for axis in 0..4 {
        let mut next = vec![0.0; n.pow(4)];
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let mut v = 0.0;
                        for k in 0..n {
                            let (a, coef) = match axis {
                                0 => (idx(k, q, r, s), c[(k, p)]),
                                1 => (idx(p, k, r, s), c[(k, q)]),
                                2 => (idx(p, q, k, s), c[(k, r)]),
                                _ => (idx(p, q, r, k), c[(k, s)]),
                            };
                            v += coef * cur[a];
                        }
                        next[idx(p, q, r, s)] = v;
                    }
                }
            }
        }
        cur = next;
    }
    // restore exact 8-fold symmetry lost to rounding in the transformation
    let pair = |a: usize, b: usize| if a >= b { (a, b) } else { (b, a) };
    let mut sym = vec![0.0; n.pow(4)];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let (a, b) = pair(p, q);
                    let (c, d) = pair(r, s);
                    let canonical = if a * (a + 1) / 2 + b >= c * (c + 1) / 2 + d {
                        idx(a, b, c, d)
                    } else {
                        idx(c, d, a, b)
                    };
                    sym[idx(p, q, r, s)] = cur[canonical];
                }
            }
        }
    }
    MolecularProblem::from_spatial(h, sym, ints.e_nuc, ints.n_electrons)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::Element;

    #[test]
    fn spin_blocks_and_antisymmetry() {
        let g = Geometry::diatomic(Element::He, Element::H, 1.1, 0).unwrap();
        let (p, _) = MolecularProblem::from_geometry(&g).unwrap();
        assert_eq!(p.n_spin_orbitals(), 4);
        let n = p.n_spin_orbitals();
        for a in 0..n {
            for b in 0..n {
                if a % 2 != b % 2 {
                    assert_eq!(p.h(a, b), 0.0);
                }
                assert!((p.h(a, b) - p.h(b, a)).abs() < 1e-10);
                for c in 0..n {
                    for d in 0..n {
                        let v = p.anti(a, b, c, d);
                        assert_eq!(v, -p.anti(b, a, c, d));
                        assert_eq!(v, -p.anti(a, b, d, c));
                        assert!((v - p.anti(c, d, a, b)).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn mo_eri_keeps_eightfold_symmetry() {
        let g = Geometry::diatomic(Element::H, Element::H, 0.9, 0).unwrap();
        let (p, _) = MolecularProblem::from_geometry(&g).unwrap();
        let n = p.n_spatial;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = p.eri_spatial(a, b, c, d);
                        assert!((v - p.eri_spatial(b, a, c, d)).abs() < 1e-10);
                        assert!((v - p.eri_spatial(c, d, a, b)).abs() < 1e-10);
                        assert!((v - p.eri_spatial(a, b, d, c)).abs() < 1e-10);
                    }
                }
            }
        }
    }
}
