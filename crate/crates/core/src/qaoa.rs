//! Level-p QAOA runs, figures of merit, landscape scans and the tail bound.

use std::collections::BTreeSet;
use std::io::Write;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::encoding::{
    build_cost_diagonal, build_phase_separator_diagonal_in, decode_feasible, feasible_index, ColoringProblem,
    DiagonalOperator, PenaltyUnits, SpaceKind,
};
use crate::error::{Error, Result};
use crate::graphs::automorphisms;
use crate::mixers::{apply_mixer, color_symmetries, MixerSpec};
use crate::par::{self, Mode};
use crate::statesim::{init_state, InitKind, StateVector};

/// Angles of a level-p circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::arg(format!(
                "{} gammas but {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        if gammas.iter().chain(&betas).any(|x| !x.is_finite()) {
            return Err(Error::arg("angles must be finite"));
        }
        Ok(QaoaParams { gammas, betas })
    }

    pub fn zeros(p: usize) -> Self {
        QaoaParams {
            gammas: vec![0.0; p],
            betas: vec![0.0; p],
        }
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    /// γ₁…γ_p followed by β₁…β_p.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if x.len() % 2 != 0 {
            return Err(Error::arg("flat parameter vector must have even length"));
        }
        let p = x.len() / 2;
        QaoaParams::new(x[..p].to_vec(), x[p..].to_vec())
    }
}

#[derive(Debug, Clone)]
pub struct QaoaRunSpec {
    pub problem: ColoringProblem,
    pub mixer: MixerSpec,
    pub init: InitKind,
    pub space: SpaceKind,
    /// Penalty weight; only the full binary space carries a penalty.
    pub alpha: f64,
    pub units: PenaltyUnits,
}

impl QaoaRunSpec {
    pub fn new(problem: ColoringProblem, mixer: MixerSpec, init: InitKind, space: SpaceKind) -> Result<Self> {
        let spec = QaoaRunSpec {
            problem,
            mixer,
            init,
            space,
            alpha: 0.0,
            units: PenaltyUnits::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_units(mut self, units: PenaltyUnits) -> Self {
        self.units = units;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.mixer.check_space(self.space)?;
        if self.mixer.kappa != self.problem.kappa() {
            return Err(Error::SpaceMismatch {
                expected: format!("mixer with κ = {}", self.problem.kappa()),
                actual: format!("κ = {}", self.mixer.kappa),
            });
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::arg(format!("penalty weight must be finite and ≥ 0, got {}", self.alpha)));
        }
        if self.problem.c_max() == 0 {
            return Err(Error::arg("approximation ratio is undefined for a graph without edges"));
        }
        Ok(())
    }
}

/// Probability of each properly-colored-edge count, with infeasible strings
/// collected separately.
#[derive(Debug, Clone, PartialEq)]
pub struct CostDistribution {
    pub by_cost: Vec<f64>,
    pub infeasible: f64,
}

impl CostDistribution {
    /// Mean cost with infeasible outcomes valued zero.
    pub fn mean(&self) -> f64 {
        self.by_cost.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn total(&self) -> f64 {
        self.by_cost.iter().sum::<f64>() + self.infeasible
    }

    /// Cost values 0..=m as reals, the support used by the tail bound.
    pub fn support(&self) -> Vec<f64> {
        (0..self.by_cost.len()).map(|k| k as f64).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "cost,probability")?;
        for (k, p) in self.by_cost.iter().enumerate() {
            writeln!(out, "{k},{p:?}")?;
        }
        writeln!(out, "infeasible,{:?}", self.infeasible)?;
        Ok(())
    }
}

impl Serialize for CostDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.by_cost.len() + 1))?;
        for (k, p) in self.by_cost.iter().enumerate() {
            map.serialize_entry(&k.to_string(), p)?;
        }
        map.serialize_entry("infeasible", &self.infeasible)?;
        map.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub p: usize,
    pub params: QaoaParams,
    pub approximation_ratio: f64,
    pub prob_optimal: f64,
    pub feasible_probability: f64,
    pub c_max: usize,
    pub cost_distribution: CostDistribution,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_state: Option<Vec<[f64; 2]>>,
}

impl RunResult {
    pub fn mean_cost(&self) -> f64 {
        self.cost_distribution.mean()
    }
}

/// Per-index cost labels: the properly-colored-edge count, or `None` off the feasible subspace.
fn cost_labels(problem: &ColoringProblem, kind: SpaceKind) -> Result<Vec<Option<u32>>> {
    let costs = build_cost_diagonal(problem, kind)?;
    let (n, kappa) = (problem.n(), problem.kappa());
    let mask = (1u64 << kappa) - 1;
    Ok(costs
        .values()
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let feasible = kind == SpaceKind::Feasible
                || (0..n).all(|v| ((i as u64) >> (v * kappa) & mask).count_ones() == 1);
            feasible.then_some(c.round() as u32)
        })
        .collect())
}

fn distribution(labels: &[Option<u32>], m: usize, state: &StateVector) -> CostDistribution {
    let mut by_cost = vec![0.0; m + 1];
    let mut infeasible = 0.0;
    for (label, a) in labels.iter().zip(state.amplitudes()) {
        let p = a.norm_sqr();
        match label {
            Some(c) => by_cost[*c as usize] += p,
            None => infeasible += p,
        }
    }
    CostDistribution { by_cost, infeasible }
}

fn check_state(state: &StateVector, problem: &ColoringProblem) -> Result<()> {
    let space = state.space();
    if space.n != problem.n() || space.kappa != problem.kappa() {
        return Err(Error::SpaceMismatch {
            expected: format!("n = {}, κ = {}", problem.n(), problem.kappa()),
            actual: format!("n = {}, κ = {}", space.n, space.kappa),
        });
    }
    if problem.c_max() == 0 {
        return Err(Error::arg("approximation ratio is undefined for a graph without edges"));
    }
    Ok(())
}

/// Σ over feasible strings of P(i)·cost(i), divided by C_max.
pub fn approximation_ratio(state: &StateVector, problem: &ColoringProblem) -> Result<f64> {
    check_state(state, problem)?;
    let labels = cost_labels(problem, state.space().kind)?;
    Ok(distribution(&labels, problem.m(), state).mean() / problem.c_max() as f64)
}

/// Probability of measuring a feasible string with cost C_max.
pub fn prob_optimal(state: &StateVector, problem: &ColoringProblem) -> Result<f64> {
    check_state(state, problem)?;
    let labels = cost_labels(problem, state.space().kind)?;
    Ok(distribution(&labels, problem.m(), state).by_cost[problem.c_max()])
}

/// A [`QaoaRunSpec`] with its diagonals and initial state built once.
#[derive(Debug, Clone)]
pub struct Evaluator {
    spec: QaoaRunSpec,
    phase: DiagonalOperator,
    labels: Vec<Option<u32>>,
    initial: StateVector,
}

impl Evaluator {
    pub fn new(spec: QaoaRunSpec) -> Result<Self> {
        spec.validate()?;
        let phase = build_phase_separator_diagonal_in(&spec.problem, spec.alpha, spec.units, spec.space)?;
        let labels = cost_labels(&spec.problem, spec.space)?;
        let initial = init_state(&spec.problem, &spec.init, spec.space)?;
        Ok(Evaluator {
            spec,
            phase,
            labels,
            initial,
        })
    }

    pub fn spec(&self) -> &QaoaRunSpec {
        &self.spec
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial
    }

    /// Evolves the initial state: phase separator then mixer, p times.
    pub fn state(&self, params: &QaoaParams) -> Result<StateVector> {
        let mut state = self.initial.clone();
        for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
            state.apply_diagonal_phase(&self.phase, gamma)?;
            apply_mixer(&mut state, &self.spec.mixer, beta)?;
        }
        Ok(state)
    }

    pub fn distribution(&self, state: &StateVector) -> CostDistribution {
        distribution(&self.labels, self.spec.problem.m(), state)
    }

    pub fn ratio(&self, params: &QaoaParams) -> Result<f64> {
        let state = self.state(params)?;
        Ok(self.distribution(&state).mean() / self.spec.problem.c_max() as f64)
    }

    pub fn run(&self, params: &QaoaParams) -> Result<RunResult> {
        let state = self.state(params)?;
        Ok(self.result(params, &state))
    }

    fn result(&self, params: &QaoaParams, state: &StateVector) -> RunResult {
        let dist = self.distribution(state);
        let c_max = self.spec.problem.c_max();
        RunResult {
            p: params.p(),
            params: params.clone(),
            approximation_ratio: dist.mean() / c_max as f64,
            prob_optimal: dist.by_cost[c_max],
            feasible_probability: dist.by_cost.iter().sum(),
            c_max,
            cost_distribution: dist,
            final_state: None,
        }
    }

    /// Like [`Evaluator::run`], keeping the final amplitudes as (re, im) pairs.
    pub fn run_with_state(&self, params: &QaoaParams) -> Result<RunResult> {
        let state = self.state(params)?;
        let mut result = self.result(params, &state);
        result.final_state = Some(state.amplitudes().iter().map(|a| [a.re, a.im]).collect());
        Ok(result)
    }
}

pub fn run_qaoa(spec: &QaoaRunSpec, params: &QaoaParams) -> Result<RunResult> {
    Evaluator::new(spec.clone())?.run(params)
}

/// `points` evenly spaced values from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![start],
        _ => (0..points)
            .map(|i| start + (end - start) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// r over a (γ, β) grid at p = 1; `values[i * betas.len() + j]` is cell (γ_i, β_j).
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub values: Vec<f64>,
}

impl Landscape {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.betas.len() + j]
    }

    /// Cell with the largest r as (γ, β, r).
    pub fn best(&self) -> (f64, f64, f64) {
        let (k, &r) = self
            .values
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let nb = self.betas.len();
        (self.gammas[k / nb], self.betas[k % nb], r)
    }

    /// Interior cells strictly above their four neighbors.
    pub fn local_maxima(&self) -> Vec<(usize, usize)> {
        let (ng, nb) = (self.gammas.len(), self.betas.len());
        let mut out = Vec::new();
        for i in 1..ng.saturating_sub(1) {
            for j in 1..nb.saturating_sub(1) {
                let v = self.get(i, j);
                if v > self.get(i - 1, j) && v > self.get(i + 1, j) && v > self.get(i, j - 1) && v > self.get(i, j + 1) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "gamma,beta,r")?;
        for (i, g) in self.gammas.iter().enumerate() {
            for (j, b) in self.betas.iter().enumerate() {
                writeln!(out, "{g:?},{b:?},{:?}", self.get(i, j))?;
            }
        }
        Ok(())
    }
}

pub fn landscape_scan(spec: &QaoaRunSpec, gammas: &[f64], betas: &[f64]) -> Result<Landscape> {
    landscape_scan_with(spec, gammas, betas, Mode::default())
}

pub fn landscape_scan_with(spec: &QaoaRunSpec, gammas: &[f64], betas: &[f64], mode: Mode) -> Result<Landscape> {
    let eval = Evaluator::new(spec.clone())?;
    let nb = betas.len();
    let values = par::try_map(mode, (0..gammas.len() * nb).collect(), |k| {
        eval.ratio(&QaoaParams::new(vec![gammas[k / nb]], vec![betas[k % nb]])?)
    })?;
    Ok(Landscape {
        gammas: gammas.to_vec(),
        betas: betas.to_vec(),
        values,
    })
}

/// Lower bound on Pr(X > l) for X on the sorted support `values` with mean μ:
/// (μ − l)/(a_K − l), clamped to [0, 1].
pub fn tail_bound(mu: f64, l: f64, values: &[f64]) -> Result<f64> {
    let (Some(&lo), Some(&hi)) = (values.first(), values.last()) else {
        return Err(Error::arg("empty value set"));
    };
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::arg("value set must be strictly increasing"));
    }
    if !values.iter().any(|&a| (a - l).abs() < 1e-12) {
        return Err(Error::arg(format!("threshold {l} is not in the value set")));
    }
    let tol = 1e-12 * (1.0 + hi.abs());
    if mu < l - tol {
        return Err(Error::arg(format!("mean {mu} is below the threshold {l}")));
    }
    if mu < lo - tol || mu > hi + tol {
        return Err(Error::arg(format!("mean {mu} lies outside [{lo}, {hi}]")));
    }
    if hi == l {
        return Ok(0.0);
    }
    Ok(((mu - l) / (hi - l)).clamp(0.0, 1.0))
}

/// Exact Pr(cost > l); infeasible outcomes count as cost 0.
pub fn tail_probability(dist: &CostDistribution, l: f64) -> f64 {
    let above: f64 = dist
        .by_cost
        .iter()
        .enumerate()
        .filter(|(k, _)| *k as f64 > l)
        .map(|(_, p)| p)
        .sum();
    if l < 0.0 {
        above + dist.infeasible
    } else {
        above
    }
}

/// Classical colorings grouped into orbits of graph automorphisms combined
/// with the color permutations that commute with the mixer. Along an orbit the
/// QAOA figures of merit are constant. Returns (representative, orbit size).
pub fn classical_orbits(problem: &ColoringProblem, mixer: &MixerSpec) -> Result<Vec<(Vec<usize>, usize)>> {
    let (n, kappa) = (problem.n(), problem.kappa());
    let dim = problem.space(SpaceKind::Feasible)?.dimension;
    let node_perms = automorphisms(problem.graph())?;
    let color_perms = color_symmetries(mixer)?;
    let mut seen = vec![false; dim];
    let mut orbits = Vec::new();
    for start in 0..dim {
        if seen[start] {
            continue;
        }
        let coloring = decode_feasible(start, n, kappa);
        let mut orbit = BTreeSet::new();
        for pi in &node_perms {
            for sigma in &color_perms {
                let image: Vec<usize> = (0..n).map(|v| sigma[coloring[pi[v]]]).collect();
                orbit.insert(feasible_index(&image, kappa));
            }
        }
        for &i in &orbit {
            seen[i] = true;
        }
        orbits.push((coloring, orbit.len()));
    }
    Ok(orbits)
}
