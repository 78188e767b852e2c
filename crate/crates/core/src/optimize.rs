//! Parameter search: BFGS ascent with finite-difference gradients, monotone
//! basin hopping, penalty sweeps and level curves.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::encoding::{ColoringProblem, PenaltyUnits, SpaceKind};
use crate::error::{Error, Result};
use crate::mixers::MixerSpec;
use crate::par::{self, Mode};
use crate::qaoa::{Evaluator, QaoaParams, QaoaRunSpec};
use crate::statesim::InitKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalConfig {
    pub max_iters: usize,
    /// Central-difference step on each angle.
    pub gradient_step: f64,
    /// Stop once the gradient norm falls below this.
    pub tol: f64,
}

impl Default for LocalConfig {
    fn default() -> Self {
        LocalConfig {
            max_iters: 200,
            gradient_step: 1e-5,
            tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub seed: u64,
    pub hops: usize,
    /// Standard deviation of the Gaussian hop, in radians.
    pub step_scale: f64,
    pub local: LocalConfig,
    pub restarts: usize,
    /// Start level p from the interpolated level p−1 optimum in level curves.
    pub warm_start: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            seed: 0,
            hops: 10,
            step_scale: 0.5,
            local: LocalConfig::default(),
            restarts: 1,
            warm_start: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.step_scale) || !positive(self.local.gradient_step) || !positive(self.local.tol) {
            return Err(Error::Config("step_scale, gradient_step and tol must be positive".into()));
        }
        if self.local.max_iters == 0 || self.restarts == 0 {
            return Err(Error::Config("max_iters and restarts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub restart: usize,
    pub hop: usize,
    /// r after the local search of this hop.
    pub r: f64,
    pub accepted: bool,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    pub best_params: QaoaParams,
    pub best_r: f64,
    pub trace: Vec<TraceEntry>,
    pub evaluations: usize,
}

impl OptResult {
    /// Running maximum of r along the trace.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.trace
            .iter()
            .scan(f64::NEG_INFINITY, |best, e| {
                *best = best.max(e.r);
                Some(*best)
            })
            .collect()
    }

    /// Columns: restart, hop, r, accepted, then γ₁…γ_p, β₁…β_p.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let p = self.best_params.p();
        let mut header = String::from("restart,hop,r,accepted");
        (1..=p).for_each(|j| header.push_str(&format!(",gamma{j}")));
        (1..=p).for_each(|j| header.push_str(&format!(",beta{j}")));
        writeln!(out, "{header}")?;
        for e in &self.trace {
            let params: Vec<String> = e.params.iter().map(|x| format!("{x:?}")).collect();
            writeln!(out, "{},{},{:?},{},{}", e.restart, e.hop, e.r, e.accepted, params.join(","))?;
        }
        Ok(())
    }
}

/// Objective wrapper counting calls and rejecting non-finite values.
struct Counted<F> {
    f: F,
    calls: usize,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.calls += 1;
        let v = (self.f)(x)?;
        if !v.is_finite() {
            return Err(Error::NonFinite(x.to_vec()));
        }
        Ok(v)
    }

    fn gradient(&mut self, x: &[f64], h: f64) -> Result<Vec<f64>> {
        let mut probe = x.to_vec();
        let mut g = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            probe[i] = x[i] + h;
            let up = self.eval(&probe)?;
            probe[i] = x[i] - h;
            let down = self.eval(&probe)?;
            probe[i] = x[i];
            g.push((up - down) / (2.0 * h));
        }
        Ok(g)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quasi-Newton ascent from `start`. Returns the final point, its value and
/// the number of objective calls. Only improving steps are taken, so the
/// value never drops below the value at `start`.
pub fn local_search<F>(objective: F, start: &[f64], cfg: &LocalConfig) -> Result<(Vec<f64>, f64, usize)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut obj = Counted { f: objective, calls: 0 };
    let d = start.len();
    let mut x = start.to_vec();
    let mut fx = obj.eval(&x)?;
    if d == 0 {
        return Ok((x, fx, obj.calls));
    }
    let mut g = obj.gradient(&x, cfg.gradient_step)?;
    // inverse Hessian of −f, kept positive definite by the curvature check
    let mut h = vec![vec![0.0; d]; d];
    let reset = |h: &mut Vec<Vec<f64>>| {
        for (i, row) in h.iter_mut().enumerate() {
            row.iter_mut().enumerate().for_each(|(j, v)| *v = if i == j { 1.0 } else { 0.0 });
        }
    };
    reset(&mut h);
    for _ in 0..cfg.max_iters {
        if dot(&g, &g).sqrt() < cfg.tol {
            break;
        }
        let mut dir: Vec<f64> = h.iter().map(|row| dot(row, &g)).collect();
        if dot(&dir, &g) <= 0.0 {
            reset(&mut h);
            dir = g.clone();
        }
        let slope = dot(&dir, &g);
        let mut step = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let ft = obj.eval(&trial)?;
            if ft >= fx + 1e-4 * step * slope && ft > fx {
                break Some((trial, ft));
            }
            step *= 0.5;
            if step < 1e-12 {
                break None;
            }
        };
        let Some((x_new, f_new)) = accepted else { break };
        let g_new = obj.gradient(&x_new, cfg.gradient_step)?;
        // BFGS on −f: s = Δx, y = −Δg
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g.iter().zip(&g_new).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 {
            let hy: Vec<f64> = h.iter().map(|row| dot(row, &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..d {
                for j in 0..d {
                    h[i][j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }
    Ok((x, fx, obj.calls))
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn one_restart(
    eval: &Evaluator,
    start: Option<&[f64]>,
    p: usize,
    cfg: &OptimizerConfig,
    restart: usize,
) -> Result<(Vec<f64>, f64, Vec<TraceEntry>, usize)> {
    let mut rng = restart_rng(cfg.seed, restart);
    let x0: Vec<f64> = match start {
        Some(x) if restart == 0 => x.to_vec(),
        _ => (0..2 * p).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect(),
    };
    let objective = |x: &[f64]| eval.ratio(&QaoaParams::from_flat(x)?);
    let (mut best_x, mut best_r, mut evaluations) = local_search(objective, &x0, &cfg.local)?;
    let mut trace = vec![TraceEntry {
        restart,
        hop: 0,
        r: best_r,
        accepted: true,
        params: best_x.clone(),
    }];
    let normal = Normal::new(0.0, cfg.step_scale).map_err(|e| Error::Config(e.to_string()))?;
    for hop in 1..=cfg.hops {
        let trial: Vec<f64> = best_x.iter().map(|x| x + normal.sample(&mut rng)).collect();
        let (x, r, calls) = local_search(objective, &trial, &cfg.local)?;
        evaluations += calls;
        let accepted = r > best_r;
        if accepted {
            best_x = x.clone();
            best_r = r;
        }
        trace.push(TraceEntry {
            restart,
            hop,
            r,
            accepted,
            params: x,
        });
    }
    Ok((best_x, best_r, trace, evaluations))
}

/// Monotone basin hopping at level p from random starts.
pub fn basin_hopping(eval: &Evaluator, p: usize, cfg: &OptimizerConfig) -> Result<OptResult> {
    basin_hopping_from(eval, p, None, cfg)
}

/// Basin hopping where restart 0 begins at `start` (flat γ…β layout).
/// Restarts run in parallel with RNG streams split from the seed.
pub fn basin_hopping_from(eval: &Evaluator, p: usize, start: Option<&QaoaParams>, cfg: &OptimizerConfig) -> Result<OptResult> {
    basin_hopping_with(eval, p, start, cfg, Mode::default())
}

pub fn basin_hopping_with(
    eval: &Evaluator,
    p: usize,
    start: Option<&QaoaParams>,
    cfg: &OptimizerConfig,
    mode: Mode,
) -> Result<OptResult> {
    cfg.validate()?;
    if let Some(s) = start {
        if s.p() != p {
            return Err(Error::arg(format!("start has level {}, expected {p}", s.p())));
        }
    }
    let flat = start.map(QaoaParams::to_flat);
    let runs = par::try_map(mode, (0..cfg.restarts).collect(), |r| one_restart(eval, flat.as_deref(), p, cfg, r))?;
    let mut trace = Vec::new();
    let mut evaluations = 0;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (x, r, t, calls) in runs {
        trace.extend(t);
        evaluations += calls;
        if best.as_ref().map_or(true, |b| r > b.1) {
            best = Some((x, r));
        }
    }
    let (x, best_r) = best.expect("at least one restart");
    Ok(OptResult {
        best_params: QaoaParams::from_flat(&x)?,
        best_r,
        trace,
        evaluations,
    })
}

/// Best r of the X-mixer full-binary run for each penalty weight; α = 0 is
/// always included.
pub fn penalty_sweep(
    problem: &ColoringProblem,
    alphas: &[f64],
    p: usize,
    init: &InitKind,
    units: PenaltyUnits,
    cfg: &OptimizerConfig,
) -> Result<Vec<(f64, f64)>> {
    let mut sweep: Vec<f64> = alphas.to_vec();
    if !sweep.contains(&0.0) {
        sweep.insert(0, 0.0);
    }
    let mixer = MixerSpec::x(problem.kappa())?;
    sweep
        .into_iter()
        .map(|alpha| {
            let spec = QaoaRunSpec::new(problem.clone(), mixer, init.clone(), SpaceKind::FullBinary)?
                .with_units(units)
                .with_alpha(alpha)?;
            let eval = Evaluator::new(spec)?;
            Ok((alpha, basin_hopping(&eval, p, cfg)?.best_r))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelPoint {
    pub p: usize,
    pub best_r: f64,
    pub prob_optimal: f64,
    pub params: QaoaParams,
}

/// Level p+1 starting guess from a level-p optimum by linear interpolation.
pub fn interpolate_params(params: &QaoaParams) -> QaoaParams {
    let p = params.p();
    let lift = |v: &[f64]| -> Vec<f64> {
        (0..=p)
            .map(|i| {
                let prev = if i == 0 { 0.0 } else { v[i - 1] };
                let here = if i == p { 0.0 } else { v[i] };
                if p == 0 {
                    0.0
                } else {
                    (i as f64 / p as f64) * prev + ((p - i) as f64 / p as f64) * here
                }
            })
            .collect()
    };
    QaoaParams {
        gammas: lift(&params.gammas),
        betas: lift(&params.betas),
    }
}

/// Independent optimization at each level 0..=p_max, level p seeded with
/// `cfg.seed + p`. Row 0 is the initial state.
pub fn level_curve(eval: &Evaluator, p_max: usize, cfg: &OptimizerConfig) -> Result<Vec<LevelPoint>> {
    if p_max > 10 {
        return Err(Error::arg(format!("level curves stop at p = 10, got {p_max}")));
    }
    let base = eval.run(&QaoaParams::zeros(0))?;
    let mut points = vec![LevelPoint {
        p: 0,
        best_r: base.approximation_ratio,
        prob_optimal: base.prob_optimal,
        params: QaoaParams::zeros(0),
    }];
    for p in 1..=p_max {
        let level_cfg = OptimizerConfig {
            seed: cfg.seed.wrapping_add(p as u64),
            ..*cfg
        };
        let start = (cfg.warm_start && p > 1).then(|| interpolate_params(&points[p - 1].params));
        let opt = basin_hopping_from(eval, p, start.as_ref(), &level_cfg)?;
        let run = eval.run(&opt.best_params)?;
        points.push(LevelPoint {
            p,
            best_r: opt.best_r,
            prob_optimal: run.prob_optimal,
            params: opt.best_params,
        });
    }
    Ok(points)
}
