use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vqx_core::encoding::{build_observables, qubit_hamiltonian, Encoding};
use vqx_core::integrals::{Element, Geometry, MolecularProblem};
use vqx_core::oracle::{fci_spectrum, hermitian_eigen};
use vqx_core::pauli::{Pauli, PauliSum, PauliTerm};
use vqx_core::simulator::StateVector;

fn all_strings(n: usize) -> Vec<Vec<Pauli>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| {
                [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z].into_iter().map(move |p| {
                    let mut t = s.clone();
                    t.push(p);
                    t
                })
            })
            .collect();
    }
    out
}

// exp(-iθP) = cos θ · 1 - i sin θ · P for any Pauli string
fn dense_exponential(p: &PauliTerm, theta: f64) -> DMatrix<Complex64> {
    let m = PauliSum::from_term(p.with_coeff(1.0.into())).to_matrix().unwrap();
    let dim = m.nrows();
    DMatrix::identity(dim, dim) * Complex64::new(theta.cos(), 0.0) - m * Complex64::new(0.0, theta.sin())
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps: Vec<Complex64> = (0..1 << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn check_ladder(axes: Vec<Pauli>, theta: f64, s: &StateVector) {
    let p = PauliTerm::new(axes, 1.0.into());
    let want = dense_exponential(&p, theta) * DVector::from_column_slice(s.amplitudes());
    let mut got = s.clone();
    got.apply_pauli_exponential(&p, theta).unwrap();
    let err = got
        .amplitudes()
        .iter()
        .zip(want.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-12, "{} at θ={theta}: {err}", p.label());
}

#[test]
fn ladder_matches_dense_exponential_exhaustively() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=3 {
        for axes in all_strings(n) {
            for theta in [0.1, std::f64::consts::PI / 3.0, 2.7] {
                let s = random_state(n, &mut rng);
                check_ladder(axes.clone(), theta, &s);
            }
        }
    }
}

#[test]
fn ladder_matches_dense_exponential_on_four_qubits() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let strings = all_strings(4);
    for _ in 0..60 {
        let axes = strings[rng.gen_range(0..strings.len())].clone();
        let theta = rng.gen_range(-3.0..3.0);
        let s = random_state(4, &mut rng);
        check_ladder(axes, theta, &s);
    }
}

#[test]
fn exponentials_compose_additively() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = PauliTerm::from_label("XYZY", 1.0.into()).unwrap();
    let s = random_state(4, &mut rng);
    let mut a = s.clone();
    a.apply_pauli_exponential(&p, 0.4).unwrap();
    a.apply_pauli_exponential(&p, 0.9).unwrap();
    let mut b = s.clone();
    b.apply_pauli_exponential(&p, 1.3).unwrap();
    let ov = a.overlap(&b).unwrap();
    assert!((ov - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    assert!((a.norm() - 1.0).abs() < 1e-12);
}

fn problem(a: Element, b: Element, r: f64) -> MolecularProblem {
    let g = Geometry::diatomic(a, b, r, 0).unwrap();
    MolecularProblem::from_geometry(&g).unwrap().0
}

fn sorted_eigenvalues(h: &PauliSum) -> Vec<f64> {
    hermitian_eigen(&h.to_matrix().unwrap()).0
}

#[test]
fn jordan_wigner_and_bravyi_kitaev_are_isospectral() {
    for (a, b) in [(Element::H, Element::H), (Element::He, Element::H)] {
        for r in [0.5, 0.7, 1.0, 1.5, 2.5] {
            let p = problem(a, b, r);
            let jw = sorted_eigenvalues(&qubit_hamiltonian(&p, Encoding::JordanWigner).unwrap());
            let bk = sorted_eigenvalues(&qubit_hamiltonian(&p, Encoding::BravyiKitaev).unwrap());
            for (x, y) in jw.iter().zip(&bk) {
                assert!((x - y).abs() < 1e-10, "{a}{b} r={r}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn hamiltonian_commutes_with_symmetries() {
    for (a, b) in [(Element::H, Element::H), (Element::He, Element::H)] {
        for enc in [Encoding::JordanWigner, Encoding::BravyiKitaev] {
            let h = qubit_hamiltonian(&problem(a, b, 0.9), enc).unwrap();
            let obs = build_observables(2, enc).unwrap();
            for o in [&obs.number, &obs.sz, &obs.s2] {
                let c = h.commutator(o).unwrap();
                assert!(c.terms().all(|t| t.coeff().norm() < 1e-10), "{a}{b} {enc}");
            }
        }
    }
}

#[test]
fn number_operator_has_integer_spectrum() {
    for enc in [Encoding::JordanWigner, Encoding::BravyiKitaev] {
        let obs = build_observables(2, enc).unwrap();
        let mut ev = sorted_eigenvalues(&obs.number);
        ev.iter_mut().for_each(|x| assert!((*x - x.round()).abs() < 1e-12));
        let counts: Vec<usize> = (0..=4)
            .map(|k| ev.iter().filter(|x| (**x - k as f64).abs() < 1e-9).count())
            .collect();
        assert_eq!(counts, vec![1, 4, 6, 4, 1]);
    }
}

#[test]
fn labelled_spectrum_has_physical_quantum_numbers() {
    let p = problem(Element::H, Element::H, 0.7);
    for enc in [Encoding::JordanWigner, Encoding::BravyiKitaev] {
        let h = qubit_hamiltonian(&p, enc).unwrap();
        let spec = fci_spectrum(&h, &build_observables(2, enc).unwrap()).unwrap();
        assert_eq!(spec.levels.len(), 16);
        for l in &spec.levels {
            assert!((l.number - l.number.round()).abs() < 1e-6);
            assert!((2.0 * l.sz - (2.0 * l.sz).round()).abs() < 1e-6);
            let s = (-1.0 + (1.0 + 4.0 * l.s2).sqrt()) / 2.0;
            assert!((2.0 * s - (2.0 * s).round()).abs() < 1e-5, "S² = {}", l.s2);
        }
        for w in spec.levels.windows(2) {
            assert!(w[0].energy <= w[1].energy + 1e-9);
        }
    }
}
