//! Run-to-run adaptation: the acoustic cost of one operation and a
//! Nelder-Mead search over the log-parameters that proposes exactly one
//! candidate per relay operation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::AudioRecord;
use crate::relay::ParamVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostConfig {
    pub window_start: f64,
    pub window_length: f64,
    /// Median cost of standard operations at nominal resistance; `None`
    /// until a baseline has been run.
    #[serde(default)]
    pub baseline_median: Option<f64>,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self { window_start: 0.0, window_length: 15e-3, baseline_median: None }
    }
}

/// `J = Σ u² / fs` over the samples in `[t0, t0 + Δt)`.
pub fn cost_from_audio(audio: &AudioRecord, cfg: &CostConfig) -> Result<f64> {
    let fs = audio.sample_rate;
    let (start, end) = (cfg.window_start, cfg.window_start + cfg.window_length);
    if !(cfg.window_length > 0.0) {
        return Err(Error::InvalidParameter(format!("cost window length {} must be positive", cfg.window_length)));
    }
    let half = 0.5 / fs;
    if start < audio.start_time - half || end > audio.end_time() + half {
        return Err(Error::WindowNotCovered { start, end });
    }
    let first = ((start - audio.start_time) * fs).round() as usize;
    let count = (cfg.window_length * fs).round() as usize;
    let last = (first + count).min(audio.samples.len());
    Ok(audio.samples[first..last].iter().map(|u| u * u).sum::<f64>() / fs)
}

pub fn normalize_cost(cost: f64, cfg: &CostConfig) -> Result<f64> {
    match cfg.baseline_median {
        Some(m) if m > 0.0 => Ok(cost / m),
        _ => Err(Error::MissingBaseline),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NelderMeadConfig {
    /// Initial log-space step along each coordinate.
    pub relative_step: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Operations between forced re-evaluations of the incumbent best.
    pub reeval_period: usize,
    /// Proposals must stay within `[1/guard, guard]` times nominal.
    pub divergence_guard: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            relative_step: 0.15,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            reeval_period: 25,
            divergence_guard: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    /// Log-parameters.
    pub x: Vec<f64>,
    /// Mean of all costs observed at this vertex; NaN until evaluated.
    pub cost: f64,
    pub evaluations: u32,
    /// Updates since the vertex last received a cost.
    pub age: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Phase {
    /// Evaluating the initial vertices in order.
    Fill { next: usize },
    Reflect,
    Expand { reflected: Vec<f64>, reflected_cost: f64 },
    ContractOutside { reflected: Vec<f64>, reflected_cost: f64 },
    ContractInside,
    /// Re-evaluating the best vertex in place of a shrink.
    Reevaluate,
    /// Evaluating the vertices of a real shrink, best excluded.
    Shrink { pending: Vec<usize> },
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Fill { .. } => "fill",
            Phase::Reflect => "reflect",
            Phase::Expand { .. } => "expand",
            Phase::ContractOutside { .. } => "contract_outside",
            Phase::ContractInside => "contract_inside",
            Phase::Reevaluate => "reevaluate",
            Phase::Shrink { .. } => "shrink",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Pending {
    /// Candidate produced by the phase machine.
    Step(Vec<f64>),
    /// Periodic re-evaluation of a vertex, outside the phase machine.
    Periodic(usize),
}

/// Nelder-Mead in log space, driven one evaluation at a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexState {
    pub cfg: NelderMeadConfig,
    pub nominal: Vec<f64>,
    pub vertices: Vec<Vertex>,
    pub phase: Phase,
    pending: Option<Pending>,
    pub evaluations: u64,
    since_reeval: usize,
    failed_contractions: u32,
}

pub fn encode(p: &[f64]) -> Vec<f64> {
    p.iter().map(|v| v.ln()).collect()
}

pub fn decode(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.exp()).collect()
}

fn lin(a: &[f64], wa: f64, b: &[f64], wb: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect()
}

impl SimplexState {
    /// Simplex around `nominal`: vertex 0 is the nominal point, vertex `i`
    /// moves log-coordinate `i − 1` by `relative_step`.
    pub fn new(nominal: &[f64], cfg: NelderMeadConfig) -> Result<Self> {
        if nominal.is_empty() || nominal.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Optimizer("nominal point must be non-empty and positive".into()));
        }
        if !(cfg.relative_step.is_finite() && cfg.relative_step != 0.0) {
            return Err(Error::Optimizer(format!("degenerate simplex step {}", cfg.relative_step)));
        }
        if cfg.reeval_period == 0 || !(cfg.divergence_guard > 1.0) {
            return Err(Error::Optimizer("invalid re-evaluation period or divergence guard".into()));
        }
        let x0 = encode(nominal);
        let vertices = (0..=x0.len())
            .map(|i| {
                let mut x = x0.clone();
                if i > 0 {
                    x[i - 1] += cfg.relative_step;
                }
                Vertex { x, cost: f64::NAN, evaluations: 0, age: 0 }
            })
            .collect();
        Ok(Self {
            cfg,
            nominal: nominal.to_vec(),
            vertices,
            phase: Phase::Fill { next: 0 },
            pending: None,
            evaluations: 0,
            since_reeval: 0,
            failed_contractions: 0,
        })
    }

    pub fn dimension(&self) -> usize {
        self.nominal.len()
    }

    /// Vertex indices sorted by cost, best first.
    fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.vertices.len()).collect();
        idx.sort_by(|&a, &b| self.vertices[a].cost.total_cmp(&self.vertices[b].cost));
        idx
    }

    fn filled(&self) -> bool {
        !matches!(self.phase, Phase::Fill { .. })
    }

    pub fn best_index(&self) -> Option<usize> {
        self.filled().then(|| self.order()[0])
    }

    /// Best vertex and its averaged cost, once the simplex is filled.
    pub fn best(&self) -> Option<(Vec<f64>, f64)> {
        self.best_index().map(|i| (decode(&self.vertices[i].x), self.vertices[i].cost))
    }

    fn centroid_without(&self, worst: usize) -> Vec<f64> {
        let n = self.vertices.len() - 1;
        let mut c = vec![0.0; self.dimension()];
        for (i, v) in self.vertices.iter().enumerate() {
            if i != worst {
                for (cj, xj) in c.iter_mut().zip(&v.x) {
                    *cj += xj / n as f64;
                }
            }
        }
        c
    }

    fn reflected(&self) -> (Vec<f64>, Vec<f64>, usize) {
        let worst = *self.order().last().expect("non-empty simplex");
        let c = self.centroid_without(worst);
        let a = self.cfg.reflection;
        let xr = lin(&c, 1.0 + a, &self.vertices[worst].x, -a);
        (c, xr, worst)
    }

    fn phase_candidate(&self) -> Vec<f64> {
        match &self.phase {
            Phase::Fill { next } => self.vertices[*next].x.clone(),
            Phase::Reflect => self.reflected().1,
            Phase::Expand { reflected, .. } => {
                let (c, _, _) = self.reflected();
                lin(&c, 1.0 - self.cfg.expansion, reflected, self.cfg.expansion)
            }
            Phase::ContractOutside { reflected, .. } => {
                let (c, _, _) = self.reflected();
                lin(&c, 1.0 - self.cfg.contraction, reflected, self.cfg.contraction)
            }
            Phase::ContractInside => {
                let (c, _, worst) = self.reflected();
                lin(&c, 1.0 - self.cfg.contraction, &self.vertices[worst].x, self.cfg.contraction)
            }
            Phase::Reevaluate => self.vertices[self.order()[0]].x.clone(),
            Phase::Shrink { pending } => self.vertices[pending[0]].x.clone(),
        }
    }

    /// Encoded point the next operation must evaluate.
    pub fn next_candidate(&mut self) -> Result<Vec<f64>> {
        if self.pending.is_some() {
            return Err(Error::Optimizer("candidate requested twice without an update".into()));
        }
        // only between complete moves, so the centroid of a move in progress
        // never sees reordered costs
        let periodic = self.since_reeval >= self.cfg.reeval_period && self.phase == Phase::Reflect;
        let (pending, x) = if periodic {
            let best = self.order()[0];
            (Pending::Periodic(best), self.vertices[best].x.clone())
        } else {
            let x = self.phase_candidate();
            (Pending::Step(x.clone()), x)
        };
        self.check_guard(&x)?;
        self.pending = Some(pending);
        Ok(x)
    }

    fn check_guard(&self, x: &[f64]) -> Result<()> {
        let limit = self.cfg.divergence_guard.ln();
        for (k, (xi, nom)) in x.iter().zip(&self.nominal).enumerate() {
            let r = xi - nom.ln();
            if !(r.abs() <= limit) {
                return Err(Error::Divergence {
                    operation: self.evaluations as usize + 1,
                    reason: format!("entry {k} at {:.3e} times nominal", r.exp()),
                });
            }
        }
        Ok(())
    }

    fn record(&mut self, i: usize, cost: f64) {
        let v = &mut self.vertices[i];
        v.evaluations += 1;
        v.cost = if v.evaluations == 1 || v.cost.is_nan() {
            cost
        } else {
            v.cost + (cost - v.cost) / v.evaluations as f64
        };
        v.age = 0;
    }

    fn replace(&mut self, i: usize, x: Vec<f64>, cost: f64) {
        self.vertices[i] = Vertex { x, cost, evaluations: 1, age: 0 };
    }

    fn failed_contraction(&mut self) -> Phase {
        self.failed_contractions += 1;
        if self.failed_contractions >= 2 {
            self.failed_contractions = 0;
            let order = self.order();
            let best = order[0];
            let xb = self.vertices[best].x.clone();
            for &i in &order[1..] {
                let x = lin(&xb, 1.0 - self.cfg.shrink, &self.vertices[i].x, self.cfg.shrink);
                self.vertices[i] = Vertex { x, cost: f64::NAN, evaluations: 0, age: 0 };
            }
            Phase::Shrink { pending: order[1..].to_vec() }
        } else {
            Phase::Reevaluate
        }
    }

    /// Feed back the cost of the last candidate.
    pub fn update(&mut self, cost: f64) -> Result<()> {
        let pending = self.pending.take().ok_or_else(|| Error::Optimizer("no pending candidate".into()))?;
        if !cost.is_finite() {
            self.pending = Some(pending);
            return Err(Error::Optimizer(format!("non-finite cost {cost}")));
        }
        self.evaluations += 1;
        for v in &mut self.vertices {
            v.age += 1;
        }
        let x = match pending {
            Pending::Periodic(i) => {
                self.record(i, cost);
                self.since_reeval = 0;
                return Ok(());
            }
            Pending::Step(x) => x,
        };
        self.since_reeval += 1;

        let phase = std::mem::replace(&mut self.phase, Phase::Reflect);
        self.phase = match phase {
            Phase::Fill { next } => {
                self.record(next, cost);
                if next + 1 < self.vertices.len() {
                    Phase::Fill { next: next + 1 }
                } else {
                    Phase::Reflect
                }
            }
            Phase::Reflect => {
                let order = self.order();
                let (best, second_worst, worst) =
                    (order[0], order[order.len() - 2], order[order.len() - 1]);
                let (fb, fsw, fw) =
                    (self.vertices[best].cost, self.vertices[second_worst].cost, self.vertices[worst].cost);
                if cost < fb {
                    Phase::Expand { reflected: x, reflected_cost: cost }
                } else if cost < fsw {
                    self.replace(worst, x, cost);
                    Phase::Reflect
                } else if cost < fw {
                    Phase::ContractOutside { reflected: x, reflected_cost: cost }
                } else {
                    Phase::ContractInside
                }
            }
            Phase::Expand { reflected, reflected_cost } => {
                let worst = *self.order().last().expect("non-empty");
                if cost < reflected_cost {
                    self.replace(worst, x, cost);
                } else {
                    self.replace(worst, reflected, reflected_cost);
                }
                self.failed_contractions = 0;
                Phase::Reflect
            }
            Phase::ContractOutside { reflected_cost, .. } => {
                let worst = *self.order().last().expect("non-empty");
                if cost <= reflected_cost {
                    self.replace(worst, x, cost);
                    self.failed_contractions = 0;
                    Phase::Reflect
                } else {
                    self.failed_contraction()
                }
            }
            Phase::ContractInside => {
                let worst = *self.order().last().expect("non-empty");
                if cost < self.vertices[worst].cost {
                    self.replace(worst, x, cost);
                    self.failed_contractions = 0;
                    Phase::Reflect
                } else {
                    self.failed_contraction()
                }
            }
            Phase::Reevaluate => {
                let best = self.order()[0];
                self.record(best, cost);
                Phase::Reflect
            }
            Phase::Shrink { mut pending } => {
                let i = pending.remove(0);
                self.record(i, cost);
                if pending.is_empty() {
                    Phase::Reflect
                } else {
                    Phase::Shrink { pending }
                }
            }
        };
        Ok(())
    }

    /// Name of the phase the pending (or next) candidate belongs to.
    pub fn pending_label(&self) -> &'static str {
        match self.pending {
            Some(Pending::Periodic(_)) => "periodic_reevaluate",
            _ => self.phase.name(),
        }
    }
}

/// Simplex around the nominal parameter vector.
pub fn nm_init(p_nominal: &ParamVector, cfg: NelderMeadConfig) -> Result<SimplexState> {
    SimplexState::new(p_nominal.entries(), cfg)
}

/// Parameter vector the next relay operation must use.
pub fn nm_next_candidate(state: &mut SimplexState) -> Result<ParamVector> {
    let x = state.next_candidate()?;
    let p: [f64; 8] = decode(&x)
        .try_into()
        .map_err(|_| Error::Optimizer("simplex dimension is not that of the parameter vector".into()))?;
    ParamVector::new(p)
}

pub fn nm_update(state: &mut SimplexState, cost: f64) -> Result<()> {
    state.update(cost)
}
