//! Evaluation functions: energy plus deflation, constraint and tabu terms,
//! for single-state VQE and weighted-subspace SSVQE.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::ansatz::{apply_ansatz, AnsatzSpec};
use crate::encoding::Observables;
use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::simulator::{CompiledObservable, StateVector};

/// Initial states whose mutual overlap exceeds this are rejected by SSVQE.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Vqe,
    Ssvqe,
}

/// One of the conserved quantities used in penalty terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    #[serde(rename = "N")]
    Number,
    #[serde(rename = "Sz")]
    Sz,
    #[serde(rename = "S2")]
    S2,
}

impl Symmetry {
    pub fn select(self, obs: &Observables) -> &PauliSum {
        match self {
            Symmetry::Number => &obs.number,
            Symmetry::Sz => &obs.sz,
            Symmetry::S2 => &obs.s2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Penalty {
    pub observable: Symmetry,
    pub value: f64,
}

impl Penalty {
    pub fn new(observable: Symmetry, value: f64) -> Self {
        Self { observable, value }
    }
}

/// Parameters of the bond-length-gated deflation variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothDeflation {
    #[serde(default = "one")]
    pub a: f64,
    pub b: f64,
    #[serde(default = "hundred")]
    pub alpha: f64,
    pub r_d: f64,
}

fn one() -> f64 {
    1.0
}

fn hundred() -> f64 {
    100.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub group_size: usize,
    /// SSVQE weights; empty means `N_d - j`.
    pub weights: Vec<f64>,
    pub deflation_coefficient: f64,
    pub tabu_width: f64,
    pub tabu_amplitude: f64,
    /// Subtract the ground estimate from the energy term.
    pub deflation_shift: bool,
    pub smooth_deflation: Option<SmoothDeflation>,
}

impl Default for ObjectiveSpec {
    fn default() -> Self {
        Self {
            group_size: 2,
            weights: Vec::new(),
            deflation_coefficient: 1.0,
            tabu_width: 100.0,
            tabu_amplitude: 100.0,
            deflation_shift: false,
            smooth_deflation: None,
        }
    }
}

impl ObjectiveSpec {
    pub fn resolved_weights(&self) -> Vec<f64> {
        if self.weights.is_empty() {
            (0..self.group_size).map(|j| (self.group_size - j) as f64).collect()
        } else {
            self.weights.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidObjective(m));
        if self.group_size == 0 {
            return bad("group_size must be at least 1".into());
        }
        let w = self.resolved_weights();
        if w.len() != self.group_size {
            return bad(format!("{} weights for group size {}", w.len(), self.group_size));
        }
        if w.iter().any(|&x| !(x > 0.0 && x.is_finite())) || w.windows(2).any(|p| p[1] >= p[0]) {
            return bad(format!("weights must be positive and strictly decreasing: {w:?}"));
        }
        if !(self.tabu_width > 0.0) {
            return bad(format!("tabu width must be positive, got {}", self.tabu_width));
        }
        if !(self.tabu_amplitude >= 0.0) {
            return bad(format!("tabu amplitude must be non-negative, got {}", self.tabu_amplitude));
        }
        if !(self.deflation_coefficient >= 0.0) {
            return bad(format!("deflation coefficient must be non-negative, got {}", self.deflation_coefficient));
        }
        if let Some(s) = &self.smooth_deflation {
            if !(s.r_d > 0.0) {
                return bad(format!("r_d must be positive, got {}", s.r_d));
            }
        }
        Ok(())
    }
}

/// `Σ |<U_j> - target_j|`.
pub fn constraint_penalty(state: &StateVector, targets: &[(CompiledObservable, f64)]) -> Result<f64> {
    targets
        .iter()
        .map(|(o, t)| Ok((o.expectation(state)? - t).abs()))
        .sum()
}

/// `Σ a·exp(-μ(<U_j> - avoided_j)²)`.
pub fn tabu_penalty(state: &StateVector, targets: &[(CompiledObservable, f64)], mu: f64, a: f64) -> Result<f64> {
    targets
        .iter()
        .map(|(o, t)| {
            let d = o.expectation(state)? - t;
            Ok(a * (-mu * d * d).exp())
        })
        .sum()
}

/// `A·Σ_j |<prev_j|state>|²`.
pub fn deflation_term(state: &StateVector, previous: &[StateVector], a: f64) -> Result<f64> {
    let mut total = 0.0;
    for p in previous {
        total += p.overlap(state)?.norm_sqr();
    }
    Ok(a * total)
}

/// Overlap polynomial of the smooth deflation term.
pub fn overlap_polynomial(x: f64, r: f64, r_d: f64, e_p: f64) -> f64 {
    let k = 2.0 * (5f64.sqrt() + 1.0);
    let c = (r / r_d).powi(4) * e_p / 4.0;
    (1.0 + k) * c * x * x + k * c * x
}

/// `(a·f + b(1-f)) · Σ_j [g·x_j + (1-g)·poly(x_j)]` with `x_j = |<prev_j|state>|²`,
/// `f = 1/(exp(α(r - r_d)) + 1)` and `g = 1/(exp(r - r_d/4) + 1)`.
pub fn smooth_deflation_term(
    state: &StateVector,
    previous: &[StateVector],
    r: f64,
    e_p: f64,
    params: &SmoothDeflation,
) -> Result<f64> {
    let f = 1.0 / ((params.alpha * (r - params.r_d)).exp() + 1.0);
    let g = 1.0 / ((r - 0.25 * params.r_d).exp() + 1.0);
    let mut sum = 0.0;
    for p in previous {
        let x = p.overlap(state)?.norm_sqr();
        sum += g * x + (1.0 - g) * overlap_polynomial(x, r, params.r_d, e_p);
    }
    Ok((params.a * f + params.b * (1.0 - f)) * sum)
}

/// One optimized state: where it starts and what it is penalized for.
#[derive(Clone, Debug)]
pub struct StateObjective {
    pub initial: StateVector,
    pub constraints: Vec<(CompiledObservable, f64)>,
    pub tabu: Vec<(CompiledObservable, f64)>,
}

impl StateObjective {
    pub fn new(initial: StateVector) -> Self {
        Self {
            initial,
            constraints: Vec::new(),
            tabu: Vec::new(),
        }
    }

    pub fn with_penalties(
        initial: StateVector,
        observables: &Observables,
        constraints: &[Penalty],
        tabu: &[Penalty],
    ) -> Result<Self> {
        let compile = |ps: &[Penalty]| {
            ps.iter()
                .map(|p| Ok((CompiledObservable::new(p.observable.select(observables))?, p.value)))
                .collect::<Result<Vec<_>>>()
        };
        Ok(Self {
            initial,
            constraints: compile(constraints)?,
            tabu: compile(tabu)?,
        })
    }
}

/// Extra inputs for the smooth deflation variant.
#[derive(Clone, Debug)]
pub struct SmoothContext {
    pub params: SmoothDeflation,
    pub r: f64,
    pub e_p: f64,
}

/// Everything an objective evaluation needs besides `θ`.
#[derive(Debug)]
pub struct ObjectiveContext {
    pub hamiltonian: CompiledObservable,
    pub ansatz: AnsatzSpec,
    pub states: Vec<StateObjective>,
    pub weights: Vec<f64>,
    pub previous: Vec<StateVector>,
    pub deflation_coefficient: f64,
    pub tabu_width: f64,
    pub tabu_amplitude: f64,
    pub energy_shift: f64,
    pub smooth: Option<SmoothContext>,
    max_overlap: AtomicU64,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub objective: f64,
    pub energies: Vec<f64>,
    pub states: Vec<StateVector>,
    pub deflation: Vec<f64>,
    pub constraint: Vec<f64>,
    pub tabu: Vec<f64>,
}

impl ObjectiveContext {
    /// A context with plain deflation only and no penalties; refine with the
    /// public fields.
    pub fn new(
        hamiltonian: &PauliSum,
        ansatz: AnsatzSpec,
        states: Vec<StateObjective>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if states.is_empty() || weights.len() != states.len() {
            return Err(Error::InvalidObjective(format!(
                "{} states with {} weights",
                states.len(),
                weights.len()
            )));
        }
        for (i, a) in states.iter().enumerate() {
            for b in &states[i + 1..] {
                let ov = a.initial.overlap(&b.initial)?.norm();
                if ov > ORTHOGONALITY_TOLERANCE {
                    return Err(Error::NonOrthogonalInitialStates(ov));
                }
            }
        }
        Ok(Self {
            hamiltonian: CompiledObservable::new(hamiltonian)?,
            ansatz,
            states,
            weights,
            previous: Vec::new(),
            deflation_coefficient: 1.0,
            tabu_width: 100.0,
            tabu_amplitude: 100.0,
            energy_shift: 0.0,
            smooth: None,
            max_overlap: AtomicU64::new(0f64.to_bits()),
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.ansatz.parameter_count()
    }

    /// Largest pairwise `|<Φ_i|Φ_j>|` among output states over every
    /// evaluation so far.
    pub fn max_output_overlap(&self) -> f64 {
        f64::from_bits(self.max_overlap.load(Ordering::Relaxed))
    }

    pub fn evaluate(&self, theta: &[f64]) -> Result<Evaluation> {
        let k = self.states.len();
        let mut ev = Evaluation {
            objective: 0.0,
            energies: Vec::with_capacity(k),
            states: Vec::with_capacity(k),
            deflation: Vec::with_capacity(k),
            constraint: Vec::with_capacity(k),
            tabu: Vec::with_capacity(k),
        };
        for (s, w) in self.states.iter().zip(&self.weights) {
            let phi = apply_ansatz(&s.initial, &self.ansatz, theta)?;
            let e = self.hamiltonian.expectation(&phi)?;
            let def = match &self.smooth {
                Some(sc) => smooth_deflation_term(&phi, &self.previous, sc.r, sc.e_p, &sc.params)?,
                None => deflation_term(&phi, &self.previous, self.deflation_coefficient)?,
            };
            let con = constraint_penalty(&phi, &s.constraints)?;
            let tabu = tabu_penalty(&phi, &s.tabu, self.tabu_width, self.tabu_amplitude)?;
            ev.objective += w * (e - self.energy_shift) + def + con + tabu;
            ev.energies.push(e);
            ev.states.push(phi);
            ev.deflation.push(def);
            ev.constraint.push(con);
            ev.tabu.push(tabu);
        }
        if k > 1 {
            let mut worst = 0f64;
            for i in 0..k {
                for j in i + 1..k {
                    worst = worst.max(ev.states[i].overlap(&ev.states[j])?.norm());
                }
            }
            self.max_overlap.fetch_max(worst.to_bits(), Ordering::Relaxed);
        }
        Ok(ev)
    }

    pub fn objective(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.evaluate(theta)?.objective)
    }
}

/// Single-state objective: energy plus enabled penalty terms.
pub fn evaluate_vqe(theta: &[f64], ctx: &ObjectiveContext) -> Result<f64> {
    if ctx.states.len() != 1 {
        return Err(Error::InvalidObjective(format!("VQE needs one state, got {}", ctx.states.len())));
    }
    ctx.objective(theta)
}

/// Weighted energy sum over the group plus per-state penalty terms.
pub fn evaluate_ssvqe(theta: &[f64], ctx: &ObjectiveContext) -> Result<f64> {
    ctx.objective(theta)
}
