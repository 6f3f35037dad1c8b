//! STO-3G integrals for diatomics built from hydrogen and helium.
//!
//! Every basis function is a contraction of three s-type Gaussians, so all
//! one- and two-electron integrals have closed forms in terms of the zeroth
//! Boys function.

mod fcidump;
mod problem;
mod scf;

pub use fcidump::{load_fcidump, parse_fcidump, write_fcidump};
pub use problem::{spin_orbital_coefficients, MolecularProblem, SpinOrbitalOrdering};
pub use scf::{reference_orbitals, ReferenceOrbitals, SCF_MAX_ITERATIONS};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BOHR_PER_ANGSTROM: f64 = 1.8897259886;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Element {
    H,
    He,
}

impl Element {
    pub fn atomic_number(self) -> u32 {
        match self {
            Element::H => 1,
            Element::He => 2,
        }
    }
}

impl FromStr for Element {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" => Ok(Element::H),
            "He" => Ok(Element::He),
            other => Err(Error::UnsupportedElement(other.to_string())),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Element::H => "H",
            Element::He => "He",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    /// Cartesian position in Bohr.
    pub position: [f64; 3],
}

/// Nuclear framework plus total charge and spin multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub charge: i32,
    #[serde(default = "default_multiplicity")]
    pub multiplicity: u32,
}

fn default_multiplicity() -> u32 {
    1
}

impl Geometry {
    pub fn new(atoms: Vec<Atom>, charge: i32, multiplicity: u32) -> Result<Self> {
        let g = Self {
            atoms,
            charge,
            multiplicity,
        };
        g.validate()?;
        Ok(g)
    }

    /// Two atoms on the z axis separated by `r_angstrom`.
    pub fn diatomic(a: Element, b: Element, r_angstrom: f64, charge: i32) -> Result<Self> {
        if !(r_angstrom > 0.0 && r_angstrom.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "bond length must be positive, got {r_angstrom}"
            )));
        }
        let r = r_angstrom * BOHR_PER_ANGSTROM;
        let nuclear = a.atomic_number() + b.atomic_number();
        let electrons = nuclear as i64 - charge as i64;
        let multiplicity = if electrons % 2 == 0 { 1 } else { 2 };
        Self::new(
            vec![
                Atom {
                    element: a,
                    position: [0.0, 0.0, 0.0],
                },
                Atom {
                    element: b,
                    position: [0.0, 0.0, r],
                },
            ],
            charge,
            multiplicity,
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: Geometry = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.len() != 2 {
            return Err(Error::InvalidGeometry(format!(
                "exactly two atoms are supported, got {}",
                self.atoms.len()
            )));
        }
        if self.atoms.iter().any(|a| a.position.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidGeometry("non-finite coordinate".into()));
        }
        if distance(&self.atoms[0].position, &self.atoms[1].position) < 1e-8 {
            return Err(Error::InvalidGeometry("coincident nuclei".into()));
        }
        if self.n_electrons_signed() < 1 {
            return Err(Error::InvalidGeometry(format!(
                "electron count must be at least 1, got {}",
                self.n_electrons_signed()
            )));
        }
        Ok(())
    }

    fn n_electrons_signed(&self) -> i64 {
        self.atoms
            .iter()
            .map(|a| a.element.atomic_number() as i64)
            .sum::<i64>()
            - self.charge as i64
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons_signed().max(0) as usize
    }

    pub fn nuclear_repulsion(&self) -> f64 {
        let mut e = 0.0;
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[i + 1..] {
                e += (a.element.atomic_number() * b.element.atomic_number()) as f64
                    / distance(&a.position, &b.position);
            }
        }
        e
    }

    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let mut g = self.clone();
        for a in &mut g.atoms {
            for k in 0..3 {
                a.position[k] += shift[k];
            }
        }
        g
    }
}

/// One normalized-primitive Gaussian `exp(-exponent r^2)` with its
/// contraction coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub exponent: f64,
    pub coefficient: f64,
}

const STO3G_COEFFICIENTS: [f64; 3] = [0.15432897, 0.53532814, 0.44463454];
const STO3G_H_EXPONENTS: [f64; 3] = [3.42525091, 0.62391373, 0.16885540];
const STO3G_HE_EXPONENTS: [f64; 3] = [6.36242139, 1.15892300, 0.31364979];

/// STO-3G 1s contraction. The returned coefficients include the primitive
/// normalization and a final rescaling so that the contracted function has
/// unit self-overlap.
pub fn sto3g_basis(element: Element) -> Vec<Primitive> {
    let exponents = match element {
        Element::H => STO3G_H_EXPONENTS,
        Element::He => STO3G_HE_EXPONENTS,
    };
    let mut prims: Vec<Primitive> = exponents
        .iter()
        .zip(STO3G_COEFFICIENTS)
        .map(|(&a, d)| Primitive {
            exponent: a,
            coefficient: d * (2.0 * a / PI).powf(0.75),
        })
        .collect();
    let norm = contracted_overlap(&prims, [0.0; 3], &prims, [0.0; 3]);
    for p in &mut prims {
        p.coefficient /= norm.sqrt();
    }
    prims
}

/// Parses an element symbol and returns its STO-3G contraction.
pub fn sto3g_basis_for(symbol: &str) -> Result<Vec<Primitive>> {
    Ok(sto3g_basis(symbol.parse()?))
}

/// A contracted s function placed on a center.
#[derive(Clone, Debug)]
pub struct BasisFunction {
    pub center: [f64; 3],
    pub primitives: Vec<Primitive>,
}

/// Atomic-orbital integrals over the contracted basis (one function per atom).
#[derive(Clone, Debug)]
pub struct AoIntegrals {
    pub overlap: DMatrix<f64>,
    pub kinetic: DMatrix<f64>,
    pub nuclear: DMatrix<f64>,
    /// Chemists' notation `(pq|rs)`, flattened row-major over `n^4`.
    pub eri: Vec<f64>,
    pub e_nuc: f64,
    pub n_electrons: usize,
}

impl AoIntegrals {
    pub fn n(&self) -> usize {
        self.overlap.nrows()
    }

    pub fn core_hamiltonian(&self) -> DMatrix<f64> {
        &self.kinetic + &self.nuclear
    }

    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n();
        self.eri[((p * n + q) * n + r) * n + s]
    }
}

pub fn basis_functions(g: &Geometry) -> Vec<BasisFunction> {
    g.atoms
        .iter()
        .map(|a| BasisFunction {
            center: a.position,
            primitives: sto3g_basis(a.element),
        })
        .collect()
}

pub fn ao_integrals(g: &Geometry) -> Result<AoIntegrals> {
    g.validate()?;
    let basis = basis_functions(g);
    let n = basis.len();
    let mut overlap = DMatrix::zeros(n, n);
    let mut kinetic = DMatrix::zeros(n, n);
    let mut nuclear = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let (bi, bj) = (&basis[i], &basis[j]);
            let s = contracted_overlap(&bi.primitives, bi.center, &bj.primitives, bj.center);
            let t = contract2(bi, bj, primitive_kinetic);
            let v: f64 = g
                .atoms
                .iter()
                .map(|atom| {
                    let z = atom.element.atomic_number() as f64;
                    contract2(bi, bj, |a, ca, b, cb| {
                        primitive_nuclear(a, ca, b, cb, atom.position, z)
                    })
                })
                .sum();
            overlap[(i, j)] = s;
            overlap[(j, i)] = s;
            kinetic[(i, j)] = t;
            kinetic[(j, i)] = t;
            nuclear[(i, j)] = v;
            nuclear[(j, i)] = v;
        }
    }

    let mut eri = vec![0.0; n * n * n * n];
    let idx = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if p * (p + 1) / 2 + q < r * (r + 1) / 2 + s {
                        continue;
                    }
                    let v = contracted_eri(&basis[p], &basis[q], &basis[r], &basis[s]);
                    for (a, b, c, d) in [
                        (p, q, r, s),
                        (q, p, r, s),
                        (p, q, s, r),
                        (q, p, s, r),
                        (r, s, p, q),
                        (s, r, p, q),
                        (r, s, q, p),
                        (s, r, q, p),
                    ] {
                        eri[idx(a, b, c, d)] = v;
                    }
                }
            }
        }
    }

    Ok(AoIntegrals {
        overlap,
        kinetic,
        nuclear,
        eri,
        e_nuc: g.nuclear_repulsion(),
        n_electrons: g.n_electrons(),
    })
}

/// Zeroth Boys function `F0(x) = 1/2 sqrt(pi/x) erf(sqrt(x))`, `F0(0) = 1`.
pub fn boys_f0(x: f64) -> f64 {
    if x < 1e-8 {
        1.0 - x / 3.0 + x * x / 10.0
    } else {
        0.5 * (PI / x).sqrt() * libm::erf(x.sqrt())
    }
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    dist2(a, b).sqrt()
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

fn gaussian_center(a: f64, ca: [f64; 3], b: f64, cb: [f64; 3]) -> [f64; 3] {
    let p = a + b;
    [
        (a * ca[0] + b * cb[0]) / p,
        (a * ca[1] + b * cb[1]) / p,
        (a * ca[2] + b * cb[2]) / p,
    ]
}

fn primitive_overlap(a: f64, ca: [f64; 3], b: f64, cb: [f64; 3]) -> f64 {
    let p = a + b;
    (PI / p).powf(1.5) * (-a * b / p * dist2(&ca, &cb)).exp()
}

fn primitive_kinetic(a: f64, ca: [f64; 3], b: f64, cb: [f64; 3]) -> f64 {
    let p = a + b;
    let mu = a * b / p;
    let r2 = dist2(&ca, &cb);
    mu * (3.0 - 2.0 * mu * r2) * (PI / p).powf(1.5) * (-mu * r2).exp()
}

fn primitive_nuclear(a: f64, ca: [f64; 3], b: f64, cb: [f64; 3], c: [f64; 3], z: f64) -> f64 {
    let p = a + b;
    let pc = gaussian_center(a, ca, b, cb);
    -z * 2.0 * PI / p * (-a * b / p * dist2(&ca, &cb)).exp() * boys_f0(p * dist2(&pc, &c))
}

#[allow(clippy::too_many_arguments)]
fn primitive_eri(
    a: f64,
    ca: [f64; 3],
    b: f64,
    cb: [f64; 3],
    c: f64,
    cc: [f64; 3],
    d: f64,
    cd: [f64; 3],
) -> f64 {
    let p = a + b;
    let q = c + d;
    let pc = gaussian_center(a, ca, b, cb);
    let qc = gaussian_center(c, cc, d, cd);
    let k = (-a * b / p * dist2(&ca, &cb) - c * d / q * dist2(&cc, &cd)).exp();
    2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt()) * k * boys_f0(p * q / (p + q) * dist2(&pc, &qc))
}

fn contracted_overlap(pa: &[Primitive], ca: [f64; 3], pb: &[Primitive], cb: [f64; 3]) -> f64 {
    let mut s = 0.0;
    for x in pa {
        for y in pb {
            s += x.coefficient * y.coefficient * primitive_overlap(x.exponent, ca, y.exponent, cb);
        }
    }
    s
}

fn contract2<F>(bi: &BasisFunction, bj: &BasisFunction, f: F) -> f64
where
    F: Fn(f64, [f64; 3], f64, [f64; 3]) -> f64,
{
    let mut s = 0.0;
    for x in &bi.primitives {
        for y in &bj.primitives {
            s += x.coefficient * y.coefficient * f(x.exponent, bi.center, y.exponent, bj.center);
        }
    }
    s
}

fn contracted_eri(
    bp: &BasisFunction,
    bq: &BasisFunction,
    br: &BasisFunction,
    bs: &BasisFunction,
) -> f64 {
    let mut v = 0.0;
    for w in &bp.primitives {
        for x in &bq.primitives {
            for y in &br.primitives {
                for z in &bs.primitives {
                    v += w.coefficient
                        * x.coefficient
                        * y.coefficient
                        * z.coefficient
                        * primitive_eri(
                            w.exponent, bp.center, x.exponent, bq.center, y.exponent, br.center,
                            z.exponent, bs.center,
                        );
                }
            }
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h2_bohr(r: f64) -> Geometry {
        Geometry::new(
            vec![
                Atom {
                    element: Element::H,
                    position: [0.0, 0.0, 0.0],
                },
                Atom {
                    element: Element::H,
                    position: [0.0, 0.0, r],
                },
            ],
            0,
            1,
        )
        .unwrap()
    }

    #[test]
    fn contracted_functions_are_normalized() {
        for e in [Element::H, Element::He] {
            let b = sto3g_basis(e);
            assert_eq!(b.len(), 3);
            let s = contracted_overlap(&b, [0.0; 3], &b, [0.0; 3]);
            assert!((s - 1.0).abs() < 1e-10, "{e}: {s}");
        }
    }

    #[test]
    fn unsupported_element() {
        assert!(matches!(
            sto3g_basis_for("Li"),
            Err(Error::UnsupportedElement(_))
        ));
    }

    #[test]
    fn overlap_tends_to_one_at_short_distance() {
        let ints = ao_integrals(&h2_bohr(1e-4)).unwrap();
        assert!((ints.overlap[(0, 1)] - 1.0).abs() < 1e-6);
        assert!((ints.overlap[(0, 0)] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn nuclear_repulsion_unit_distance() {
        assert!((h2_bohr(1.0).nuclear_repulsion() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn textbook_h2_integrals() {
        // Reference values for STO-3G H2 at R = 1.4 bohr, quoted to 4 decimals
        // in standard quantum-chemistry textbooks.
        let ints = ao_integrals(&h2_bohr(1.4)).unwrap();
        let h = ints.core_hamiltonian();
        assert!((ints.overlap[(0, 1)] - 0.6593).abs() < 1e-4);
        assert!((ints.kinetic[(0, 0)] - 0.7600).abs() < 1e-4);
        assert!((ints.kinetic[(0, 1)] - 0.2365).abs() < 1e-4);
        assert!((h[(0, 0)] + 1.1204).abs() < 1e-4);
        assert!((h[(0, 1)] + 0.9584).abs() < 1e-4);
        assert!((ints.eri(0, 0, 0, 0) - 0.7746).abs() < 1e-4);
        assert!((ints.eri(0, 0, 1, 1) - 0.5697).abs() < 1e-4);
        assert!((ints.eri(1, 0, 0, 0) - 0.4441).abs() < 1e-4);
        assert!((ints.eri(1, 0, 1, 0) - 0.2970).abs() < 1e-4);
    }

    #[test]
    fn integrals_are_symmetric() {
        let g = Geometry::diatomic(Element::He, Element::H, 0.772, 0).unwrap();
        let ints = ao_integrals(&g).unwrap();
        for m in [&ints.overlap, &ints.kinetic, &ints.nuclear] {
            assert!((m - m.transpose()).amax() < 1e-10);
        }
        let n = ints.n();
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = ints.eri(p, q, r, s);
                        for w in [
                            ints.eri(q, p, r, s),
                            ints.eri(p, q, s, r),
                            ints.eri(r, s, p, q),
                            ints.eri(s, r, q, p),
                        ] {
                            assert!((v - w).abs() < 1e-10);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn translation_invariance() {
        let g = Geometry::diatomic(Element::He, Element::H, 0.9, 0).unwrap();
        let a = ao_integrals(&g).unwrap();
        let b = ao_integrals(&g.translated([0.3, -1.7, 2.2])).unwrap();
        assert!((&a.overlap - &b.overlap).amax() < 1e-10);
        assert!((&a.kinetic - &b.kinetic).amax() < 1e-10);
        assert!((&a.nuclear - &b.nuclear).amax() < 1e-10);
        for (x, y) in a.eri.iter().zip(&b.eri) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn geometry_validation() {
        assert!(Geometry::new(vec![], 0, 1).is_err());
        assert!(Geometry::diatomic(Element::H, Element::H, 0.7, 2).is_err());
        assert!(Geometry::diatomic(Element::H, Element::H, -1.0, 0).is_err());
        let heh = Geometry::diatomic(Element::He, Element::H, 1.0, 0).unwrap();
        assert_eq!(heh.n_electrons(), 3);
        assert_eq!(heh.multiplicity, 2);
        let g = Geometry::from_json(
            r#"{ "atoms": [ {"element": "He", "position": [0,0,0]},
                            {"element": "H", "position": [0,0,1.5]} ],
                 "charge": 0, "multiplicity": 2 }"#,
        )
        .unwrap();
        assert_eq!(g.n_electrons(), 3);
    }

    #[test]
    fn boys_small_argument_continuity() {
        assert_eq!(boys_f0(0.0), 1.0);
        for x in [0.5e-8, 0.99e-8] {
            let closed = 0.5 * (PI / x).sqrt() * libm::erf(x.sqrt());
            assert!((boys_f0(x) - closed).abs() < 1e-12);
        }
        assert!((boys_f0(1.0) - 0.746824132812427).abs() < 1e-14);
    }
}
