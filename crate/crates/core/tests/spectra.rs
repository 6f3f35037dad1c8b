use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vqx_core::ansatz::{uccsd_generators, AnsatzSpec};
use vqx_core::encoding::{build_observables, occupation_to_qubits, qubit_hamiltonian, Encoding, Observables};
use vqx_core::integrals::{Element, Geometry, MolecularProblem};
use vqx_core::objectives::{evaluate_ssvqe, evaluate_vqe, ObjectiveContext, Penalty, StateObjective, Symmetry};
use vqx_core::optimizer::{powell_minimize, OptimizerConfig};
use vqx_core::oracle::{fci_spectrum, SectorQuery, SectorSpectrum};
use vqx_core::pauli::PauliSum;
use vqx_core::simulator::StateVector;
use vqx_core::Error;

const BOHR_PER_ANGSTROM: f64 = 1.8897259886;

struct System {
    h: PauliSum,
    obs: Observables,
    spectrum: SectorSpectrum,
}

fn system(a: Element, b: Element, r_angstrom: f64, enc: Encoding) -> System {
    let (problem, _) = MolecularProblem::from_geometry(&Geometry::diatomic(a, b, r_angstrom, 0).unwrap()).unwrap();
    let h = qubit_hamiltonian(&problem, enc).unwrap();
    let obs = build_observables(2, enc).unwrap();
    let spectrum = fci_spectrum(&h, &obs).unwrap();
    System { h, obs, spectrum }
}

fn h2(r: f64) -> System {
    system(Element::H, Element::H, r, Encoding::BravyiKitaev)
}

fn ket(occ: &str) -> StateVector {
    let bits: Vec<bool> = occ.chars().map(|c| c == '1').collect();
    StateVector::from_bits(&occupation_to_qubits(&bits, Encoding::BravyiKitaev))
}

fn ansatz(occs: &[&str]) -> AnsatzSpec {
    let specs: Vec<AnsatzSpec> = occs
        .iter()
        .map(|o| {
            let bits: Vec<bool> = o.chars().map(|c| c == '1').collect();
            uccsd_generators(4, &bits, Encoding::BravyiKitaev).unwrap()
        })
        .collect();
    if specs.len() == 1 {
        specs.into_iter().next().unwrap()
    } else {
        AnsatzSpec::union(&specs.iter().collect::<Vec<_>>(), Encoding::BravyiKitaev).unwrap()
    }
}

fn singlet(s2: f64) -> SectorQuery {
    SectorQuery::new(Some(2.0), Some(0.0), Some(s2))
}

fn minimize(ctx: &ObjectiveContext) -> Vec<f64> {
    let cfg = OptimizerConfig::default();
    let theta0 = cfg.initial_parameters(ctx.parameter_count(), 0);
    powell_minimize(|t| ctx.objective(t), &theta0, &cfg).unwrap().theta
}

#[test]
fn eigenvalues_sum_to_trace() {
    for (a, b) in [(Element::H, Element::H), (Element::He, Element::H)] {
        for enc in [Encoding::JordanWigner, Encoding::BravyiKitaev] {
            let s = system(a, b, 1.1, enc);
            let sum: f64 = s.spectrum.eigenvalues().iter().sum();
            assert!((sum - 16.0 * s.h.constant().re).abs() < 1e-8);
            assert_eq!(s.spectrum.levels.len(), 16);
        }
    }
}

#[test]
fn h2_labels_at_equilibrium() {
    let s = system(Element::H, Element::H, 1.4 / BOHR_PER_ANGSTROM, Encoding::JordanWigner);
    let g = &s.spectrum.levels[0];
    assert!((g.number - 2.0).abs() < 1e-6 && g.sz.abs() < 1e-6 && g.s2.abs() < 1e-6);
    // one-electron doublets lie between; the lowest two-electron excitation is the triplet
    let first_excited: Vec<_> = s.spectrum.levels[1..].iter().filter(|l| (l.number - 2.0).abs() < 1e-6).take(3).collect();
    assert!(first_excited.iter().all(|l| (l.s2 - 2.0).abs() < 1e-6));
    let mut sz: Vec<f64> = first_excited.iter().map(|l| l.sz).collect();
    sz.sort_by(f64::total_cmp);
    for (x, y) in sz.iter().zip([-1.0, 0.0, 1.0]) {
        assert!((x - y).abs() < 1e-6);
    }
}

#[test]
fn encodings_give_identical_labelled_spectra() {
    for r in [0.5, 1.0, 2.0] {
        let jw = system(Element::He, Element::H, r, Encoding::JordanWigner).spectrum;
        let bk = system(Element::He, Element::H, r, Encoding::BravyiKitaev).spectrum;
        for (a, b) in jw.levels.iter().zip(&bk.levels) {
            assert!((a.energy - b.energy).abs() < 1e-10);
            assert!((a.number - b.number).abs() < 1e-6);
            assert!((a.sz - b.sz).abs() < 1e-6);
            assert!((a.s2 - b.s2).abs() < 1e-6);
        }
    }
}

#[test]
fn target_levels() {
    let s = h2(0.7);
    assert_eq!(s.spectrum.target_level(&singlet(0.0), 0).unwrap(), s.spectrum.ground());
    let triplet = s.spectrum.target_level(&singlet(2.0), 0).unwrap();
    let want = s
        .spectrum
        .levels
        .iter()
        .filter(|l| (l.s2 - 2.0).abs() < 1e-4 && l.sz.abs() < 1e-4 && (l.number - 2.0).abs() < 1e-4)
        .map(|l| l.energy)
        .next()
        .unwrap();
    assert_eq!(triplet, want);
    let e = s.spectrum.target_level(&SectorQuery::new(Some(7.0), None, None), 0).unwrap_err();
    assert!(matches!(e, Error::EmptySector(_)));
    assert!(s.spectrum.target_level(&singlet(0.0), 3).is_err());
}

#[test]
fn labelling_is_reproducible() {
    let a = h2(0.9).spectrum.to_csv();
    let b = h2(0.9).spectrum.to_csv();
    assert_eq!(a, b);
}

#[test]
fn reference_energy_at_zero_parameters() {
    let s = h2(0.7);
    let init = ket("1100");
    let want = init.expectation(&s.h).unwrap();
    let ctx = ObjectiveContext::new(&s.h, ansatz(&["1100"]), vec![StateObjective::new(init)], vec![1.0]).unwrap();
    assert_eq!(evaluate_vqe(&[0.0; 3], &ctx).unwrap(), want);
}

#[test]
fn satisfied_penalties_leave_energy_unchanged() {
    let s = h2(0.7);
    let init = ket("1100");
    let plain = init.expectation(&s.h).unwrap();
    let obj = StateObjective::with_penalties(
        init,
        &s.obs,
        &[Penalty::new(Symmetry::Number, 2.0), Penalty::new(Symmetry::Sz, 0.0), Penalty::new(Symmetry::S2, 0.0)],
        &[Penalty::new(Symmetry::Number, 10000.0)],
    )
    .unwrap();
    let mut ctx = ObjectiveContext::new(&s.h, ansatz(&["1100"]), vec![obj], vec![1.0]).unwrap();
    ctx.previous = vec![ket("0011")];
    let v = evaluate_vqe(&[0.0; 3], &ctx).unwrap();
    assert!((v - plain).abs() < 1e-12);
}

#[test]
fn ssvqe_is_linear_at_zero_parameters() {
    let s = h2(1.0);
    let (a, b) = (ket("1100"), ket("0110"));
    let want = 2.0 * a.expectation(&s.h).unwrap() + b.expectation(&s.h).unwrap();
    let ctx = ObjectiveContext::new(
        &s.h,
        ansatz(&["1100", "0110"]),
        vec![StateObjective::new(a), StateObjective::new(b)],
        vec![2.0, 1.0],
    )
    .unwrap();
    let v = evaluate_ssvqe(&vec![0.0; ctx.parameter_count()], &ctx).unwrap();
    assert!((v - want).abs() < 1e-12);
}

#[test]
fn single_state_ssvqe_is_vqe() {
    let s = h2(1.0);
    let ctx = ObjectiveContext::new(&s.h, ansatz(&["1100"]), vec![StateObjective::new(ket("1100"))], vec![1.0]).unwrap();
    let theta = [0.3, -0.2, 0.5];
    assert_eq!(evaluate_ssvqe(&theta, &ctx).unwrap(), evaluate_vqe(&theta, &ctx).unwrap());
}

#[test]
fn ssvqe_outputs_stay_orthogonal_and_above_ground() {
    let s = h2(0.7);
    let ctx = ObjectiveContext::new(
        &s.h,
        ansatz(&["1100", "0110", "1001", "0011"]),
        ["1100", "0110", "1001", "0011"].iter().map(|o| StateObjective::new(ket(o))).collect(),
        vec![4.0, 3.0, 2.0, 1.0],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let theta: Vec<f64> = (0..ctx.parameter_count()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let ev = ctx.evaluate(&theta).unwrap();
        for e in &ev.energies {
            assert!(*e >= s.spectrum.ground() - 1e-10);
        }
    }
    assert!(ctx.max_output_overlap() < 1e-10);
}

#[test]
fn ssvqe_pair_finds_ground_and_triplet() {
    let s = h2(0.7);
    let ctx = ObjectiveContext::new(
        &s.h,
        ansatz(&["1100", "0110"]),
        vec![StateObjective::new(ket("1100")), StateObjective::new(ket("0110"))],
        vec![2.0, 1.0],
    )
    .unwrap();
    let ev = ctx.evaluate(&minimize(&ctx)).unwrap();
    let ground = s.spectrum.target_level(&singlet(0.0), 0).unwrap();
    let triplet = s.spectrum.target_level(&singlet(2.0), 0).unwrap();
    assert!((ev.energies[0] - ground).abs() < 1e-6, "{:?}", ev.energies);
    assert!((ev.energies[1] - triplet).abs() < 1e-6, "{:?}", ev.energies);
    assert!(ev.energies[0] < ev.energies[1]);
}

#[test]
fn constrained_vqe_ground_and_singlet() {
    let s = h2(0.7);
    let constraints = [Penalty::new(Symmetry::S2, 0.0), Penalty::new(Symmetry::Sz, 0.0), Penalty::new(Symmetry::Number, 2.0)];
    let obj = StateObjective::with_penalties(ket("1100"), &s.obs, &constraints, &[]).unwrap();
    let ctx = ObjectiveContext::new(&s.h, ansatz(&["1100"]), vec![obj], vec![1.0]).unwrap();
    let ev = ctx.evaluate(&minimize(&ctx)).unwrap();
    assert!((ev.energies[0] - s.spectrum.ground()).abs() < 1e-4);

    // singlet above the triplet at a bond length where the gap to ground is below A
    let s = h2(1.5);
    let ground = s.spectrum.levels[0].vector.iter().copied().collect();
    let ground = StateVector::from_amplitudes(ground).unwrap();
    let obj = StateObjective::with_penalties(ket("1001"), &s.obs, &constraints, &[]).unwrap();
    let mut ctx = ObjectiveContext::new(&s.h, ansatz(&["1001"]), vec![obj], vec![1.0]).unwrap();
    ctx.previous = vec![ground];
    let ev = ctx.evaluate(&minimize(&ctx)).unwrap();
    assert!(ev.constraint[0] < 1e-3, "penalty {}", ev.constraint[0]);
    let target = s.spectrum.target_level(&singlet(0.0), 1).unwrap();
    assert!((ev.energies[0] - target).abs() < 1e-4, "{} vs {target}", ev.energies[0]);
}

#[test]
fn large_deflation_climbs_to_next_level() {
    for r in [0.7, 1.0, 1.5] {
        let s = h2(r);
        let sector = SectorQuery::new(Some(2.0), Some(0.0), None);
        let levels: Vec<_> = s.spectrum.levels.iter().filter(|l| sector.matches(l)).collect();
        let ground = StateVector::from_amplitudes(levels[0].vector.iter().copied().collect()).unwrap();
        let constraints = [Penalty::new(Symmetry::S2, 0.0)];
        let obj = StateObjective::with_penalties(ket("1001"), &s.obs, &constraints, &[]).unwrap();
        let mut ctx = ObjectiveContext::new(&s.h, ansatz(&["1001"]), vec![obj], vec![1.0]).unwrap();
        ctx.previous = vec![ground];
        ctx.deflation_coefficient = 10.0;
        let ev = ctx.evaluate(&minimize(&ctx)).unwrap();
        let want = s.spectrum.target_level(&singlet(0.0), 1).unwrap();
        assert!((ev.energies[0] - want).abs() < 1e-5, "r = {r}: {} vs {want}", ev.energies[0]);
    }
}

#[test]
fn unpenalized_objective_is_variational() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for r in [0.5, 1.2, 2.0] {
        let s = h2(r);
        let ctx = ObjectiveContext::new(&s.h, ansatz(&["1100"]), vec![StateObjective::new(ket("1100"))], vec![1.0]).unwrap();
        for _ in 0..50 {
            let theta: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
            assert!(ctx.objective(&theta).unwrap() >= s.spectrum.ground() - 1e-10);
        }
    }
}

