//! Pauli strings and complex-weighted sums of them.
//!
//! Qubit 0 is the leftmost tensor factor and the leftmost character of a ket
//! label, so in a register of `n` qubits it occupies bit `n - 1` of a basis
//! index. Every module in the crate relies on this ordering.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients with modulus below this are dropped by [`PauliSum::simplify`].
pub const PRUNE_TOLERANCE: f64 = 1e-12;

/// Largest register [`PauliSum::to_matrix`] will densify.
pub const MAX_DENSE_QUBITS: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const IM: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Single-qubit product `self * other` as `(phase, result)`.
    pub fn mul(self, other: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (ONE, p),
            (a, b) if a == b => (ONE, I),
            (X, Y) => (IM, Z),
            (Y, X) => (-IM, Z),
            (Y, Z) => (IM, X),
            (Z, Y) => (-IM, X),
            (Z, X) => (IM, Y),
            (X, Z) => (-IM, Y),
            _ => unreachable!(),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_symbol(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Bit masks describing how a Pauli string acts on computational basis states:
/// `P|b> = i^{y_count} (-1)^{popcount(b & z_mask)} |b ^ x_mask>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliMasks {
    pub x_mask: usize,
    pub z_mask: usize,
    pub y_count: u32,
}

impl PauliMasks {
    /// Phase picked up by basis state `b` (before the bit flip).
    #[inline]
    pub fn phase(&self, b: usize) -> Complex64 {
        let base = match self.y_count % 4 {
            0 => ONE,
            1 => IM,
            2 => -ONE,
            _ => -IM,
        };
        if (b & self.z_mask).count_ones() % 2 == 1 {
            -base
        } else {
            base
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    axes: Vec<Pauli>,
    coeff: Complex64,
}

impl PauliTerm {
    pub fn new(axes: Vec<Pauli>, coeff: Complex64) -> Self {
        Self { axes, coeff }
    }

    pub fn identity(n: usize, coeff: Complex64) -> Self {
        Self {
            axes: vec![Pauli::I; n],
            coeff,
        }
    }

    /// Builds a term from `(qubit, axis)` pairs; unspecified qubits are identity.
    pub fn from_sparse(n: usize, ops: &[(usize, Pauli)], coeff: Complex64) -> Result<Self> {
        let mut axes = vec![Pauli::I; n];
        for &(q, p) in ops {
            if q >= n {
                return Err(Error::IndexOutOfRange { index: q, n });
            }
            axes[q] = p;
        }
        Ok(Self { axes, coeff })
    }

    /// Parses a compact string such as `"XZIY"` (qubit 0 first).
    pub fn from_label(label: &str, coeff: Complex64) -> Result<Self> {
        let axes = label
            .chars()
            .map(|c| Pauli::from_symbol(c).ok_or_else(|| Error::BadLabel(label.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { axes, coeff })
    }

    pub fn n(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Pauli] {
        &self.axes
    }

    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    pub fn with_coeff(&self, coeff: Complex64) -> Self {
        Self {
            axes: self.axes.clone(),
            coeff,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.axes.iter().all(|&p| p == Pauli::I)
    }

    pub fn label(&self) -> String {
        self.axes.iter().map(|p| p.symbol()).collect()
    }

    /// Qubits carrying a non-identity axis, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.axes
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    /// Operator product `self * other` with the phase folded into the coefficient.
    pub fn multiply(&self, other: &PauliTerm) -> Result<PauliTerm> {
        if self.n() != other.n() {
            return Err(Error::RegisterMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        let mut coeff = self.coeff * other.coeff;
        let axes = self
            .axes
            .iter()
            .zip(&other.axes)
            .map(|(&a, &b)| {
                let (phase, p) = a.mul(b);
                coeff *= phase;
                p
            })
            .collect();
        Ok(PauliTerm { axes, coeff })
    }

    pub fn masks(&self) -> PauliMasks {
        let n = self.n();
        let mut m = PauliMasks {
            x_mask: 0,
            z_mask: 0,
            y_count: 0,
        };
        for (q, &p) in self.axes.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => m.x_mask |= bit,
                Pauli::Y => {
                    m.x_mask |= bit;
                    m.z_mask |= bit;
                    m.y_count += 1;
                }
                Pauli::Z => m.z_mask |= bit,
            }
        }
        m
    }

    /// `true` when the two strings commute as operators.
    pub fn commutes_with(&self, other: &PauliTerm) -> bool {
        let anti = self
            .axes
            .iter()
            .zip(&other.axes)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }
}

/// A sum of Pauli strings on a fixed register, keyed by axes so that equal
/// strings merge on insertion.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<Vec<Pauli>, Complex64>,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize, coeff: f64) -> Self {
        let mut s = Self::zero(n);
        s.terms.insert(vec![Pauli::I; n], Complex64::new(coeff, 0.0));
        s.simplify()
    }

    pub fn from_term(term: PauliTerm) -> Self {
        let mut s = Self::zero(term.n());
        s.terms.insert(term.axes, term.coeff);
        s
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = PauliTerm>,
    {
        let mut s = Self::zero(n);
        for t in terms {
            s.add_term(t)?;
        }
        Ok(s.simplify())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, term: PauliTerm) -> Result<()> {
        if term.n() != self.n {
            return Err(Error::RegisterMismatch {
                left: self.n,
                right: term.n(),
            });
        }
        *self.terms.entry(term.axes).or_insert(ZERO) += term.coeff;
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = PauliTerm> + '_ {
        self.terms.iter().map(|(axes, &coeff)| PauliTerm {
            axes: axes.clone(),
            coeff,
        })
    }

    pub fn coefficient(&self, axes: &[Pauli]) -> Complex64 {
        self.terms.get(axes).copied().unwrap_or(ZERO)
    }

    /// Coefficient of the all-identity string.
    pub fn constant(&self) -> Complex64 {
        self.coefficient(&vec![Pauli::I; self.n])
    }

    /// Drops terms whose coefficient modulus is below [`PRUNE_TOLERANCE`].
    pub fn simplify(mut self) -> Self {
        self.terms.retain(|_, c| c.norm() >= PRUNE_TOLERANCE);
        self
    }

    /// Largest imaginary part among the coefficients.
    pub fn max_imaginary(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// Largest real part among the coefficients.
    pub fn max_real(&self) -> f64 {
        self.terms.values().map(|c| c.re.abs()).fold(0.0, f64::max)
    }

    /// A sum of Pauli strings is Hermitian iff every coefficient is real.
    pub fn is_hermitian(&self) -> bool {
        self.max_imaginary() <= PRUNE_TOLERANCE
    }

    pub fn is_anti_hermitian(&self) -> bool {
        self.max_real() <= PRUNE_TOLERANCE
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NotHermitian(self.max_imaginary()))
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c.conj())).collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(a, &c)| (a.clone(), c * factor)).collect(),
        }
        .simplify()
    }

    pub fn add(&self, other: &PauliSum) -> Result<Self> {
        self.check_size(other)?;
        let mut out = self.clone();
        for (a, &c) in &other.terms {
            *out.terms.entry(a.clone()).or_insert(ZERO) += c;
        }
        Ok(out.simplify())
    }

    pub fn sub(&self, other: &PauliSum) -> Result<Self> {
        self.add(&other.scale(-ONE))
    }

    /// Distributes the product over both sums and merges equal strings.
    pub fn mul(&self, other: &PauliSum) -> Result<Self> {
        self.check_size(other)?;
        let mut out = Self::zero(self.n);
        for p in self.terms() {
            for q in other.terms() {
                out.add_term(p.multiply(&q)?)?;
            }
        }
        Ok(out.simplify())
    }

    pub fn commutator(&self, other: &PauliSum) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Dense `2^n x 2^n` matrix, qubit 0 the leftmost Kronecker factor.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(Error::RegisterTooLarge(self.n));
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for t in self.terms() {
            let masks = t.masks();
            for col in 0..dim {
                m[(col ^ masks.x_mask, col)] += t.coeff * masks.phase(col);
            }
        }
        Ok(m)
    }

    /// One term per line: `±d.dddddddddddddddde±ee [±d.dddde±eei] X0 Z2 Y3`.
    /// The imaginary token is present only for non-real coefficients and
    /// identity axes are omitted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (axes, c) in &self.terms {
            out.push_str(&format_coefficient(c.re));
            if c.im != 0.0 {
                out.push(' ');
                out.push_str(&format_coefficient(c.im));
                out.push('i');
            }
            for (q, p) in axes.iter().enumerate() {
                if *p != Pauli::I {
                    out.push_str(&format!(" {}{}", p.symbol(), q));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, n: usize) -> Result<Self> {
        let mut s = Self::zero(n);
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| Error::PauliParse {
                line: line_no,
                reason,
            };
            let mut tokens = line.split_whitespace().peekable();
            let re_tok = tokens.next().ok_or_else(|| err("missing coefficient".into()))?;
            let re: f64 = re_tok
                .parse()
                .map_err(|_| err(format!("bad coefficient `{re_tok}`")))?;
            let mut im = 0.0;
            if let Some(tok) = tokens.peek() {
                if let Some(stripped) = tok.strip_suffix('i') {
                    im = stripped
                        .parse()
                        .map_err(|_| err(format!("bad imaginary part `{tok}`")))?;
                    tokens.next();
                }
            }
            let mut axes = vec![Pauli::I; n];
            for tok in tokens {
                let mut chars = tok.chars();
                let p = chars
                    .next()
                    .and_then(Pauli::from_symbol)
                    .ok_or_else(|| err(format!("bad axis `{tok}`")))?;
                let q: usize = chars
                    .as_str()
                    .parse()
                    .map_err(|_| err(format!("bad qubit index in `{tok}`")))?;
                if q >= n {
                    return Err(err(format!("qubit {q} outside register of {n}")));
                }
                if axes[q] != Pauli::I {
                    return Err(err(format!("qubit {q} given twice")));
                }
                axes[q] = p;
            }
            *s.terms.entry(axes).or_insert(ZERO) += Complex64::new(re, im);
        }
        Ok(s)
    }

    fn check_size(&self, other: &PauliSum) -> Result<()> {
        if self.n != other.n {
            Err(Error::RegisterMismatch {
                left: self.n,
                right: other.n,
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Sum of absolute Pauli coefficients of `[a, b]`; zero iff the sums commute.
pub fn commutator_norm(a: &PauliSum, b: &PauliSum) -> Result<f64> {
    Ok(a.commutator(b)?.terms.values().map(|c| c.norm()).sum())
}

/// Scientific notation with a 17-digit mantissa and an explicit signed
/// two-digit exponent, e.g. `-1.2500000000000000e-01`. Parses back exactly.
fn format_coefficient(x: f64) -> String {
    let s = format!("{:.16e}", x.abs());
    let (mantissa, exp) = s.split_once('e').expect("`e` format always has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if x.is_sign_negative() { '-' } else { '+' };
    let esign = if exp < 0 { '-' } else { '+' };
    format!("{sign}{mantissa}e{esign}{:02}", exp.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn term(label: &str, coeff: Complex64) -> PauliTerm {
        PauliTerm::from_label(label, coeff).unwrap()
    }

    #[test]
    fn single_qubit_products() {
        let xy = term("X", ONE).multiply(&term("Y", ONE)).unwrap();
        assert_eq!(xy.axes(), &[Pauli::Z]);
        assert_eq!(xy.coeff(), IM);

        let zz = term("Z", ONE).multiply(&term("Z", ONE)).unwrap();
        assert!(zz.is_identity());
        assert_eq!(zz.coeff(), ONE);
    }

    #[test]
    fn two_qubit_product_matches_dense() {
        let p = term("XZ", c(2.0, 0.0));
        let q = term("YZ", c(3.0, 0.0));
        let r = p.multiply(&q).unwrap();
        assert_eq!(r.label(), "ZI");
        assert!((r.coeff() - c(0.0, 6.0)).norm() < 1e-15);

        let dense = PauliSum::from_term(p).to_matrix().unwrap()
            * PauliSum::from_term(q).to_matrix().unwrap();
        let expected = PauliSum::from_term(r).to_matrix().unwrap();
        assert!(max_abs(&(dense - expected)) < 1e-12);
    }

    #[test]
    fn multiply_rejects_size_mismatch() {
        let e = term("X", ONE).multiply(&term("XX", ONE));
        assert!(matches!(e, Err(Error::RegisterMismatch { .. })));
    }

    #[test]
    fn commutator_norms() {
        let z0 = PauliSum::from_term(term("ZI", ONE));
        let z0z1 = PauliSum::from_term(term("ZZ", ONE));
        assert_eq!(commutator_norm(&z0, &z0z1).unwrap(), 0.0);

        // [X, Z] = -2iY: one surviving string with |coefficient| = 2.
        let x = PauliSum::from_term(term("X", ONE));
        let z = PauliSum::from_term(term("Z", ONE));
        let comm = x.commutator(&z).unwrap();
        assert_eq!(comm.len(), 1);
        assert!((comm.coefficient(&[Pauli::Y]) - c(0.0, -2.0)).norm() < 1e-15);
        assert!((commutator_norm(&x, &z).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn dense_matrices() {
        let id = PauliSum::identity(1, 1.0).to_matrix().unwrap();
        assert_eq!(id, DMatrix::identity(2, 2));

        let z = PauliSum::from_term(term("Z", ONE)).to_matrix().unwrap();
        assert_eq!(z[(0, 0)], ONE);
        assert_eq!(z[(1, 1)], -ONE);
        assert_eq!(z[(0, 1)], ZERO);

        // X (x) Y by explicit Kronecker product.
        let xm = DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let ym = DMatrix::from_row_slice(2, 2, &[ZERO, -IM, IM, ZERO]);
        let kron = xm.kronecker(&ym);
        let xy = PauliSum::from_term(term("XY", ONE)).to_matrix().unwrap();
        assert!(max_abs(&(kron.clone() - xy)) < 1e-15);
        // anti-diagonal with entries -i, i, -i, i reading down
        assert_eq!(kron[(0, 3)], -IM);
        assert_eq!(kron[(1, 2)], IM);
        assert_eq!(kron[(2, 1)], -IM);
        assert_eq!(kron[(3, 0)], IM);
    }

    #[test]
    fn register_too_large() {
        let s = PauliSum::identity(13, 1.0);
        assert!(matches!(s.to_matrix(), Err(Error::RegisterTooLarge(13))));
    }

    #[test]
    fn simplify_prunes_and_merges() {
        let s = PauliSum::from_terms(
            2,
            vec![
                term("XZ", c(1.0, 0.0)),
                term("XZ", c(-1.0, 0.0)),
                term("ZZ", c(1e-14, 0.0)),
                term("YY", c(0.5, 0.0)),
                term("YY", c(0.25, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.coefficient(&[Pauli::Y, Pauli::Y]), c(0.75, 0.0));
    }

    #[test]
    fn text_format() {
        let s = PauliSum::from_terms(
            4,
            vec![
                term("IIII", c(-0.5, 0.0)),
                term("XIZY", c(0.125, 0.0)),
                term("ZIII", c(0.0, 2.5e-3)),
            ],
        )
        .unwrap();
        let text = s.to_text();
        assert!(text.contains("-5.0000000000000000e-01\n"));
        assert!(text.contains("+1.2500000000000000e-01 X0 Z2 Y3\n"));
        assert!(text.contains("+0.0000000000000000e+00 +2.5000000000000001e-03i Z0\n"));
        let back = PauliSum::from_text(&text, 4).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn text_parse_errors_carry_line() {
        let e = PauliSum::from_text("+1.0 X0\n+1.0 Q1\n", 2).unwrap_err();
        assert!(matches!(e, Error::PauliParse { line: 2, .. }));
        let e = PauliSum::from_text("+1.0 X5\n", 2).unwrap_err();
        assert!(matches!(e, Error::PauliParse { line: 1, .. }));
    }
}
