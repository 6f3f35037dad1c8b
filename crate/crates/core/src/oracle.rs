//! Exact diagonalization with symmetry labels; the reference every accuracy
//! number is measured against.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::Observables;
use crate::error::{Error, Result};
use crate::pauli::PauliSum;

/// Eigenvalues closer than this are treated as one degenerate subspace.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

/// Tolerance when matching a level's labels against requested quantum numbers.
pub const LABEL_TOLERANCE: f64 = 1e-4;

/// Floor applied to `log10|E - E_FCI|`.
pub const ACCURACY_FLOOR: f64 = -12.0;

#[derive(Clone, Debug)]
pub struct Level {
    pub energy: f64,
    pub number: f64,
    pub sz: f64,
    pub s2: f64,
    pub vector: DVector<Complex64>,
}

#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    pub levels: Vec<Level>,
}

/// Quantum numbers to select a sector; `None` matches anything.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SectorQuery {
    pub number: Option<f64>,
    pub sz: Option<f64>,
    pub s2: Option<f64>,
}

impl SectorQuery {
    pub fn new(number: Option<f64>, sz: Option<f64>, s2: Option<f64>) -> Self {
        Self { number, sz, s2 }
    }

    pub fn matches(&self, level: &Level) -> bool {
        let ok = |want: Option<f64>, got: f64| want.is_none_or(|w| (w - got).abs() <= LABEL_TOLERANCE);
        ok(self.number, level.number) && ok(self.sz, level.sz) && ok(self.s2, level.s2)
    }
}

impl SectorSpectrum {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn ground(&self) -> f64 {
        self.levels[0].energy
    }

    /// `rank`-th lowest energy among levels matching `query`.
    pub fn target_level(&self, query: &SectorQuery, rank: usize) -> Result<f64> {
        self.levels
            .iter()
            .filter(|l| query.matches(l))
            .nth(rank)
            .map(|l| l.energy)
            .ok_or_else(|| Error::EmptySector(format!("{query:?}, rank {rank}")))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,energy,number,sz,s2\n");
        for (i, l) in self.levels.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i},{:.12},{:.6},{:.6},{:.6}",
                l.energy,
                clean(l.number),
                clean(l.sz),
                clean(l.s2)
            );
        }
        out
    }
}

pub fn target_level(spectrum: &SectorSpectrum, query: &SectorQuery, rank: usize) -> Result<f64> {
    spectrum.target_level(query, rank)
}

fn clean(x: f64) -> f64 {
    if x.abs() < 5e-7 {
        0.0
    } else {
        x
    }
}

/// Full eigendecomposition of `h`; degenerate subspaces are rotated to
/// diagonalize `N`, `S_z` and `S²` simultaneously before labelling. Within a
/// degenerate group levels are ordered by `S²`, then `S_z`.
pub fn fci_spectrum(h: &PauliSum, obs: &Observables) -> Result<SectorSpectrum> {
    h.ensure_hermitian()?;
    let hm = h.to_matrix()?;
    let nm = obs.number.to_matrix()?;
    let szm = obs.sz.to_matrix()?;
    let s2m = obs.s2.to_matrix()?;

    let (vals, vecs) = hermitian_eigen(&hm);
    let dim = vals.len();
    // incommensurate weights separate every joint (N, S_z, S²) label
    let probe = &nm + &szm * Complex64::new(0.1 * std::f64::consts::SQRT_2, 0.0)
        + &s2m * Complex64::new(std::f64::consts::PI / 10.0, 0.0);

    let mut levels = Vec::with_capacity(dim);
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && vals[end] - vals[end - 1] < DEGENERACY_THRESHOLD {
            end += 1;
        }
        let block = vecs.columns(start, end - start).into_owned();
        let rotated = if end - start > 1 {
            let small = block.adjoint() * &probe * &block;
            let (_, u) = hermitian_eigen(&small);
            &block * u
        } else {
            block
        };
        let mut group: Vec<Level> = rotated
            .column_iter()
            .map(|c| {
                let v: DVector<Complex64> = c.into_owned();
                Level {
                    energy: quad(&v, &hm),
                    number: quad(&v, &nm),
                    sz: quad(&v, &szm),
                    s2: quad(&v, &s2m),
                    vector: v,
                }
            })
            .collect();
        group.sort_by(|a, b| {
            round_label(a.s2)
                .total_cmp(&round_label(b.s2))
                .then(round_label(a.sz).total_cmp(&round_label(b.sz)))
                .then(a.energy.total_cmp(&b.energy))
        });
        levels.extend(group);
        start = end;
    }
    Ok(SectorSpectrum { levels })
}

fn round_label(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn quad(v: &DVector<Complex64>, m: &DMatrix<Complex64>) -> f64 {
    (v.adjoint() * m * v)[(0, 0)].re
}

/// Eigenpairs of a Hermitian matrix in ascending eigenvalue order.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// `log10|E - E_FCI|`, floored at [`ACCURACY_FLOOR`].
pub fn accuracy(energy: f64, reference: f64) -> f64 {
    let d = (energy - reference).abs();
    if d <= 0.0 {
        ACCURACY_FLOOR
    } else {
        d.log10().max(ACCURACY_FLOOR)
    }
}
