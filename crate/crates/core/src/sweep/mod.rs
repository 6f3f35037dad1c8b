//! Bond-length sweeps over the twelve experiment cases.

mod plot;
mod tables;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{uccsd_generators, AnsatzSpec, DEFAULT_DEPTH};
use crate::encoding::{build_observables, occupation_to_qubits, qubit_hamiltonian, Encoding, Observables};
use crate::error::{Error, Result};
use crate::integrals::{Element, Geometry, MolecularProblem};
use crate::objectives::{Mode, ObjectiveContext, ObjectiveSpec, Penalty, SmoothContext, StateObjective, Symmetry};
use crate::optimizer::{powell_minimize, OptimizerConfig, Trace};
use crate::oracle::{accuracy, fci_spectrum, SectorQuery, SectorSpectrum};
use crate::pauli::PauliSum;
use crate::simulator::StateVector;

pub use plot::{emit_plots, render_convergence, render_curves};
pub use tables::{emit_tables, load_records, load_traces, ConvergenceRow, TraceTable};

/// Objective window used by the updates-to-convergence statistic.
pub const CONVERGENCE_WINDOW: f64 = 1e-4;

/// Largest tolerated output overlap inside an SSVQE group.
pub const GROUP_OVERLAP_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Molecule {
    H2,
    HeH,
}

impl Molecule {
    pub fn atoms(self) -> (Element, Element) {
        match self {
            Molecule::H2 => (Element::H, Element::H),
            Molecule::HeH => (Element::He, Element::H),
        }
    }

    pub fn geometry(self, r: f64) -> Result<Geometry> {
        let (a, b) = self.atoms();
        Geometry::diatomic(a, b, r, 0)
    }

    pub fn default_bond_lengths(self) -> Vec<f64> {
        match self {
            Molecule::H2 => grid(0.3, 2.0, 0.1),
            Molecule::HeH => grid(0.5, 2.0, 0.1),
        }
    }

    /// Ground, triplet, singlet and doubly excited for H₂; the two doublet
    /// pairs for HeH. Occupations are spin-orbital strings (`0↑ 0↓ 1↑ 1↓`).
    pub fn default_states(self) -> Vec<StateTarget> {
        use Symmetry::*;
        match self {
            Molecule::H2 => {
                let tabu = vec![Penalty::new(S2, 0.75), Penalty::new(Sz, 10000.0), Penalty::new(Number, 10000.0)];
                let state = |label: &str, occ: &str, s2: f64, rank: usize| StateTarget {
                    label: label.into(),
                    occupation: occ.into(),
                    constraints: vec![Penalty::new(S2, s2), Penalty::new(Sz, 0.0), Penalty::new(Number, 2.0)],
                    tabu: tabu.clone(),
                    sector: SectorQuery::new(Some(2.0), Some(0.0), Some(s2)),
                    rank,
                };
                vec![
                    state("ground", "1100", 0.0, 0),
                    state("triplet", "0110", 2.0, 0),
                    state("singlet", "1001", 0.0, 1),
                    state("doubly", "0011", 0.0, 2),
                ]
            }
            Molecule::HeH => {
                let state = |label: &str, occ: &str, sz: f64, rank: usize| StateTarget {
                    label: label.into(),
                    occupation: occ.into(),
                    constraints: vec![Penalty::new(Number, 3.0), Penalty::new(Sz, sz)],
                    tabu: vec![Penalty::new(Number, 10000.0)],
                    sector: SectorQuery::new(Some(3.0), Some(sz), None),
                    rank,
                };
                vec![
                    state("ground_1", "1110", 0.5, 0),
                    state("ground_2", "1101", -0.5, 0),
                    state("excited_1", "1011", 0.5, 1),
                    state("excited_2", "0111", -0.5, 1),
                ]
            }
        }
    }
}

impl fmt::Display for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Molecule::H2 => "H2",
            Molecule::HeH => "HeH",
        })
    }
}

impl FromStr for Molecule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H2" | "h2" => Ok(Molecule::H2),
            "HeH" | "heh" => Ok(Molecule::HeH),
            _ => Err(Error::InvalidConfig(format!("unknown molecule '{s}'"))),
        }
    }
}

/// `start, start + step, ...` up to `stop` inclusive, rounded to 1e-10.
pub fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return Vec::new();
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| ((start + i as f64 * step) * 1e10).round() / 1e10)
        .collect()
}

/// One target state of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateTarget {
    pub label: String,
    /// Spin-orbital occupation, encoded into a qubit ket per the run encoding.
    pub occupation: String,
    #[serde(default)]
    pub constraints: Vec<Penalty>,
    #[serde(default)]
    pub tabu: Vec<Penalty>,
    pub sector: SectorQuery,
    #[serde(default)]
    pub rank: usize,
}

impl StateTarget {
    pub fn occupation_bits(&self) -> Result<Vec<bool>> {
        self.occupation
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::BadLabel(self.occupation.clone())),
            })
            .collect()
    }

    pub fn initial_state(&self, encoding: Encoding) -> Result<StateVector> {
        Ok(StateVector::from_bits(&occupation_to_qubits(&self.occupation_bits()?, encoding)))
    }

    /// Query for the `(N, S_z)` sector alone.
    pub fn floor_sector(&self) -> SectorQuery {
        SectorQuery::new(self.sector.number, self.sector.sz, None)
    }
}

/// Experiment case numbers: 1-6 for H₂, 7-12 for HeH, in the order VQE,
/// constrained VQE, constrained VQE with tabu, then the same for SSVQE.
pub fn case_id(molecule: Molecule, method: Mode, constraints: bool, tabu: bool) -> Result<u8> {
    let within = match (method, constraints, tabu) {
        (Mode::Vqe, false, false) => 1,
        (Mode::Vqe, true, false) => 2,
        (Mode::Vqe, true, true) => 3,
        (Mode::Ssvqe, false, false) => 4,
        (Mode::Ssvqe, true, false) => 5,
        (Mode::Ssvqe, true, true) => 6,
        (_, false, true) => {
            return Err(Error::InvalidConfig("tabu terms require constraints".into()));
        }
    };
    Ok(match molecule {
        Molecule::H2 => within,
        Molecule::HeH => within + 6,
    })
}

pub fn case_settings(case: u8) -> Result<(Molecule, Mode, bool, bool)> {
    if !(1..=12).contains(&case) {
        return Err(Error::InvalidConfig(format!("case must be 1-12, got {case}")));
    }
    let molecule = if case <= 6 { Molecule::H2 } else { Molecule::HeH };
    let within = (case - 1) % 6;
    let method = if within < 3 { Mode::Vqe } else { Mode::Ssvqe };
    Ok((molecule, method, within % 3 >= 1, within % 3 == 2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub molecule: Molecule,
    pub method: Mode,
    #[serde(default)]
    pub constraints: bool,
    #[serde(default)]
    pub tabu: bool,
    #[serde(default)]
    pub encoding: Encoding,
    #[serde(default)]
    pub bond_lengths: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub objective: ObjectiveSpec,
    /// Overrides the molecule's default target states.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<StateTarget>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_samples() -> usize {
    10
}

fn default_depth() -> usize {
    DEFAULT_DEPTH
}

impl RunConfig {
    pub fn for_case(case: u8) -> Result<Self> {
        let (molecule, method, constraints, tabu) = case_settings(case)?;
        Ok(Self {
            molecule,
            method,
            constraints,
            tabu,
            encoding: Encoding::default(),
            bond_lengths: molecule.default_bond_lengths(),
            samples: default_samples(),
            depth: DEFAULT_DEPTH,
            optimizer: OptimizerConfig::default(),
            objective: ObjectiveSpec::default(),
            states: None,
            output: None,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text)?;
        if cfg.bond_lengths.is_empty() {
            cfg.bond_lengths = cfg.molecule.default_bond_lengths();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn case(&self) -> Result<u8> {
        case_id(self.molecule, self.method, self.constraints, self.tabu)
    }

    pub fn states(&self) -> Vec<StateTarget> {
        self.states.clone().unwrap_or_else(|| self.molecule.default_states())
    }

    pub fn validate(&self) -> Result<()> {
        self.case()?;
        self.optimizer.validate()?;
        self.objective.validate()?;
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if self.depth == 0 {
            return Err(Error::InvalidConfig("depth must be at least 1".into()));
        }
        if self.bond_lengths.is_empty() {
            return Err(Error::InvalidConfig("no bond lengths".into()));
        }
        if let Some(r) = self.bond_lengths.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidConfig(format!("bad bond length {r}")));
        }
        let states = self.states();
        if states.is_empty() {
            return Err(Error::InvalidConfig("no target states".into()));
        }
        for s in &states {
            let bits = s.occupation_bits()?;
            if bits.len() != 4 {
                return Err(Error::BadLabel(s.occupation.clone()));
            }
        }
        if self.method == Mode::Ssvqe && !states.len().is_multiple_of(self.objective.group_size) {
            return Err(Error::InvalidConfig(format!(
                "{} states do not split into groups of {}",
                states.len(),
                self.objective.group_size
            )));
        }
        Ok(())
    }
}

/// One optimized state at one bond length and sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub molecule: Molecule,
    pub case: u8,
    pub r: f64,
    pub state: usize,
    pub label: String,
    pub sample: usize,
    pub energy: f64,
    pub e_fci: f64,
    pub accuracy: f64,
    /// Ground energy of the state's `(N, S_z)` sector.
    pub sector_floor: f64,
    pub updates_to_convergence: usize,
    pub updates_used: usize,
    pub converged: bool,
    /// Largest overlap between group outputs seen during the run.
    pub group_overlap: f64,
    #[serde(skip)]
    pub wall_seconds: f64,
}

/// Trace of one optimizer run: one VQE state or one SSVQE group.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub case: u8,
    pub r: f64,
    pub sample: usize,
    pub run: usize,
    pub states: Vec<usize>,
    pub trace: Trace,
    /// Energies of `states` at every trace row.
    pub energies: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellFailure {
    pub r: f64,
    pub sample: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct SweepResult {
    pub records: Vec<RunRecord>,
    pub traces: Vec<RunTrace>,
    pub failures: Vec<CellFailure>,
}

/// Reference data shared by every sample at one bond length.
#[derive(Clone, Debug)]
pub struct PreparedPoint {
    pub r: f64,
    pub hamiltonian: PauliSum,
    pub observables: Observables,
    pub spectrum: SectorSpectrum,
    pub targets: Vec<f64>,
    pub floors: Vec<f64>,
}

pub fn prepare_point(molecule: Molecule, r: f64, encoding: Encoding, states: &[StateTarget]) -> Result<PreparedPoint> {
    let (problem, _) = MolecularProblem::from_geometry(&molecule.geometry(r)?)?;
    let hamiltonian = qubit_hamiltonian(&problem, encoding)?;
    let observables = build_observables(problem.n_spatial, encoding)?;
    let spectrum = fci_spectrum(&hamiltonian, &observables)?;
    let targets = states
        .iter()
        .map(|s| spectrum.target_level(&s.sector, s.rank))
        .collect::<Result<Vec<_>>>()?;
    let floors = states
        .iter()
        .map(|s| spectrum.target_level(&s.floor_sector(), 0))
        .collect::<Result<Vec<_>>>()?;
    Ok(PreparedPoint {
        r,
        hamiltonian,
        observables,
        spectrum,
        targets,
        floors,
    })
}

/// First update after which the objective stays within
/// [`CONVERGENCE_WINDOW`] of its final value.
pub fn updates_to_convergence(objectives: &[f64]) -> usize {
    let Some(&last) = objectives.last() else {
        return 0;
    };
    let mut first = objectives.len();
    for (i, &v) in objectives.iter().enumerate().rev() {
        if v - last > CONVERGENCE_WINDOW {
            break;
        }
        first = i;
    }
    first + 1
}

/// Optimizes every target state at one bond length for one sample.
pub fn run_cell(cfg: &RunConfig, point: &PreparedPoint, sample: usize) -> Result<(Vec<RunRecord>, Vec<RunTrace>)> {
    let case = cfg.case()?;
    let states = cfg.states();
    let groups: Vec<Vec<usize>> = match cfg.method {
        Mode::Vqe => (0..states.len()).map(|i| vec![i]).collect(),
        Mode::Ssvqe => (0..states.len())
            .collect::<Vec<_>>()
            .chunks(cfg.objective.group_size)
            .map(<[usize]>::to_vec)
            .collect(),
    };
    let weights = cfg.objective.resolved_weights();

    let mut solved: Vec<StateVector> = Vec::new();
    let mut solved_energies: Vec<f64> = Vec::new();
    let mut records = Vec::new();
    let mut traces = Vec::new();
    for (run, group) in groups.iter().enumerate() {
        let started = Instant::now();
        let specs = group
            .iter()
            .map(|&i| {
                uccsd_generators(4, &states[i].occupation_bits()?, cfg.encoding)?.with_depth(cfg.depth)
            })
            .collect::<Result<Vec<_>>>()?;
        let ansatz = if specs.len() == 1 {
            specs.into_iter().next().expect("one spec")
        } else {
            AnsatzSpec::union(&specs.iter().collect::<Vec<_>>(), cfg.encoding)?
        };
        let objectives = group
            .iter()
            .map(|&i| {
                let s = &states[i];
                let initial = s.initial_state(cfg.encoding)?;
                let constraints: &[Penalty] = if cfg.constraints { &s.constraints } else { &[] };
                let tabu: &[Penalty] = if cfg.tabu { &s.tabu } else { &[] };
                StateObjective::with_penalties(initial, &point.observables, constraints, tabu)
            })
            .collect::<Result<Vec<_>>>()?;
        let w = if group.len() == 1 { vec![1.0] } else { weights.clone() };
        let mut ctx = ObjectiveContext::new(&point.hamiltonian, ansatz, objectives, w)?;
        ctx.previous = solved.clone();
        ctx.deflation_coefficient = cfg.objective.deflation_coefficient;
        ctx.tabu_width = cfg.objective.tabu_width;
        ctx.tabu_amplitude = cfg.objective.tabu_amplitude;
        if cfg.objective.deflation_shift {
            ctx.energy_shift = solved_energies.iter().copied().fold(0.0, f64::min);
        }
        if let Some(params) = &cfg.objective.smooth_deflation {
            ctx.smooth = Some(SmoothContext {
                params: params.clone(),
                r: point.r,
                e_p: solved_energies.last().copied().unwrap_or(0.0),
            });
        }

        let stream = ((sample as u64) << 8) | run as u64;
        let theta0 = cfg.optimizer.initial_parameters(ctx.parameter_count(), stream);
        let min = powell_minimize(|t| ctx.objective(t), &theta0, &cfg.optimizer)?;
        let ev = ctx.evaluate(&min.theta)?;
        let energies = min
            .trace
            .rows
            .iter()
            .map(|row| Ok(ctx.evaluate(&row.theta)?.energies))
            .collect::<Result<Vec<_>>>()?;
        let objective_path: Vec<f64> = min.trace.rows.iter().map(|r| r.objective).collect();
        let conv = updates_to_convergence(&objective_path);
        let overlap = ctx.max_output_overlap();
        let wall = started.elapsed().as_secs_f64();
        for (slot, &i) in group.iter().enumerate() {
            records.push(RunRecord {
                molecule: cfg.molecule,
                case,
                r: point.r,
                state: i,
                label: states[i].label.clone(),
                sample,
                energy: ev.energies[slot],
                e_fci: point.targets[i],
                accuracy: accuracy(ev.energies[slot], point.targets[i]),
                sector_floor: point.floors[i],
                updates_to_convergence: conv,
                updates_used: min.trace.updates_used(),
                converged: min.trace.converged,
                group_overlap: overlap,
                wall_seconds: wall,
            });
        }
        traces.push(RunTrace {
            case,
            r: point.r,
            sample,
            run,
            states: group.clone(),
            trace: min.trace,
            energies,
        });
        solved.extend(ev.states);
        solved_energies.extend(ev.energies);
    }
    Ok((records, traces))
}

/// Worker pool bounded by `VQX_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("VQX_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("VQX_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(Error::InvalidConfig("VQX_THREADS must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::InvalidConfig(e.to_string()))
}

/// Runs every `(bond length, sample)` cell; failed cells are reported and
/// skipped. Records come back sorted by `(r, state, sample)`.
pub fn run_case(cfg: &RunConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let states = cfg.states();
    let pool = thread_pool()?;
    pool.install(|| {
        let points: Vec<Result<PreparedPoint>> = cfg
            .bond_lengths
            .par_iter()
            .map(|&r| prepare_point(cfg.molecule, r, cfg.encoding, &states))
            .collect();
        let cells: Vec<(usize, usize)> = (0..points.len())
            .flat_map(|p| (0..cfg.samples).map(move |s| (p, s)))
            .collect();
        let outcomes: Vec<_> = cells
            .par_iter()
            .map(|&(p, s)| match &points[p] {
                Ok(point) => run_cell(cfg, point, s),
                Err(e) => Err(Error::InvalidConfig(e.to_string())),
            })
            .collect();
        let mut out = SweepResult::default();
        for (&(p, s), o) in cells.iter().zip(outcomes) {
            match o {
                Ok((recs, traces)) => {
                    out.records.extend(recs);
                    out.traces.extend(traces);
                }
                Err(e) => out.failures.push(CellFailure {
                    r: cfg.bond_lengths[p],
                    sample: s,
                    message: e.to_string(),
                }),
            }
        }
        out.records.sort_by(|a, b| a.r.total_cmp(&b.r).then((a.state, a.sample).cmp(&(b.state, b.sample))));
        out.traces
            .sort_by(|a, b| a.r.total_cmp(&b.r).then((a.sample, a.run).cmp(&(b.sample, b.run))));
        Ok(out)
    })
}
