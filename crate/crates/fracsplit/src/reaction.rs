//! Reaction vector fields and the pointwise nonlinear flow.
//!
//! The model suite covers the scalar Fisher-KPP logistic reaction, the
//! complex Ginzburg-Landau cubic nonlinearity, the FitzHugh-Nagumo
//! two-component system, and a trait-structured population model whose
//! state is a density over discretized trait nodes. The nonlinear flow
//! ż = factor·F(t, z) is integrated with classical fixed-step RK4, which
//! keeps runs deterministic and the order testable.

use crate::grid::Field;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Whether the flow integrates F or the doubled field 2F.
///
/// The splitting advances the reaction with 2F on half-periods so the
/// time-averaged dynamics match the original equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowFactor {
    Single,
    Doubled,
}

impl FlowFactor {
    pub fn value(self) -> f64 {
        match self {
            FlowFactor::Single => 1.0,
            FlowFactor::Doubled => 2.0,
        }
    }
}

/// Fixed-step integration control for the nonlinear flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// RK4 substep density: steps = max(1, ceil(Δt · substeps_per_unit)).
    pub substeps_per_unit: f64,
    /// Absolute tolerance used when cross-checking against closed forms.
    pub check_tolerance: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { substeps_per_unit: 64.0, check_tolerance: 1e-8 }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.substeps_per_unit.is_finite() && self.substeps_per_unit >= 1.0) {
            return Err(Error::Parameter(format!(
                "substeps_per_unit must be >= 1, got {}",
                self.substeps_per_unit
            )));
        }
        Ok(())
    }
}

/// Any state component leaving this range aborts the flow as a blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

/// Piecewise-constant-in-time table of kernel samples.
///
/// `values[i]` applies on \[times\[i\], times\[i+1\]); lookups before the
/// first sample clamp to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTable<T> {
    times: Vec<f64>,
    values: Vec<T>,
}

impl<T> TimeTable<T> {
    pub fn new(times: Vec<f64>, values: Vec<T>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::Parameter(
                "time table needs matching, nonempty times/values".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::Parameter("time table must start at t = 0".into()));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Parameter("time table times must be strictly increasing".into()));
        }
        Ok(Self { times, values })
    }

    pub fn constant(value: T) -> Self {
        Self { times: vec![0.0], values: vec![value] }
    }

    pub fn at(&self, t: f64) -> &T {
        let idx = self.times.iter().rposition(|&s| s <= t).unwrap_or(0);
        &self.values[idx]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn is_constant(&self) -> bool {
        self.times.len() == 1
    }

    /// Indices of all samples active somewhere on [0, t].
    pub fn indices_up_to(&self, t: f64) -> std::ops::RangeInclusive<usize> {
        let last = self.times.iter().rposition(|&s| s <= t).unwrap_or(0);
        0..=last
    }
}

/// Trait-structured population model: selection k, mutation kernel M,
/// competition kernel C over quadrature nodes θ_j with weights w_j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationModel {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// k(t, θ_j): per sample, a vector of length m.
    growth: TimeTable<Vec<f64>>,
    /// M(t, θ_i, θ_j) ≥ 0: per sample, an m×m row-major matrix.
    mutation: TimeTable<Vec<f64>>,
    /// C(t, θ_i, θ_j) > 0: per sample, an m×m row-major matrix.
    competition: TimeTable<Vec<f64>>,
}

impl PopulationModel {
    pub fn new(
        nodes: Vec<f64>,
        weights: Vec<f64>,
        growth: TimeTable<Vec<f64>>,
        mutation: TimeTable<Vec<f64>>,
        competition: TimeTable<Vec<f64>>,
    ) -> Result<Self> {
        let m = nodes.len();
        if m == 0 || weights.len() != m {
            return Err(Error::Parameter("population nodes/weights mismatch".into()));
        }
        if !weights.iter().all(|&w| w.is_finite() && w > 0.0) {
            return Err(Error::Parameter("population weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!(
                "population weights must sum to 1 (probability measure), got {total}"
            )));
        }
        for k in growth.values() {
            if k.len() != m {
                return Err(Error::Parameter("growth table entries must have length m".into()));
            }
        }
        for mat in mutation.values() {
            if mat.len() != m * m {
                return Err(Error::Parameter("mutation table entries must be m x m".into()));
            }
            if !mat.iter().all(|&v| v.is_finite() && v >= 0.0) {
                return Err(Error::Parameter("mutation kernel must be >= 0 entrywise".into()));
            }
        }
        for mat in competition.values() {
            if mat.len() != m * m {
                return Err(Error::Parameter("competition table entries must be m x m".into()));
            }
            if !mat.iter().all(|&v| v.is_finite() && v > 0.0) {
                return Err(Error::Parameter("competition kernel must be > 0 entrywise".into()));
            }
        }
        Ok(Self { nodes, weights, growth, mutation, competition })
    }

    /// Default trait discretization: `m` uniform nodes on [0, 1] with
    /// uniform weights summing to one.
    pub fn uniform_nodes(m: usize) -> (Vec<f64>, Vec<f64>) {
        let nodes = (0..m).map(|j| (j as f64 + 0.5) / m as f64).collect();
        let weights = vec![1.0 / m as f64; m];
        (nodes, weights)
    }

    pub fn trait_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn growth(&self) -> &TimeTable<Vec<f64>> {
        &self.growth
    }

    pub fn mutation(&self) -> &TimeTable<Vec<f64>> {
        &self.mutation
    }

    pub fn competition(&self) -> &TimeTable<Vec<f64>> {
        &self.competition
    }

    pub fn is_autonomous(&self) -> bool {
        self.growth.is_constant() && self.mutation.is_constant() && self.competition.is_constant()
    }

    /// Weighted trait mass Σ_j w_j z_j of one state vector.
    pub fn mass(&self, z: &[f64]) -> f64 {
        self.weights.iter().zip(z).map(|(w, v)| w * v).sum()
    }

    /// Running max over [0, t] and traits of k(θ) + Σ_i w_i M(θ_i, θ).
    ///
    /// The mutation kernel enters through its weighted column sums: mass
    /// growth pairs M with the *first* trait argument integrated out.
    /// Both tables are piecewise constant, so the max over [0, t] is the
    /// max over the union of their breakpoints up to t.
    pub fn k_plus(&self, t: f64) -> f64 {
        let m = self.trait_count();
        let mut best = f64::NEG_INFINITY;
        let samples = self
            .growth
            .times()
            .iter()
            .chain(self.mutation.times())
            .copied()
            .filter(|&s| s <= t)
            .chain(std::iter::once(0.0));
        for s in samples {
            let k = self.growth.at(s);
            let mat = self.mutation.at(s);
            for j in 0..m {
                let col: f64 = (0..m).map(|i| self.weights[i] * mat[i * m + j]).sum();
                best = best.max(k[j] + col);
            }
        }
        best
    }

    /// Running min over [0, t] and trait pairs of C.
    pub fn c_minus(&self, t: f64) -> f64 {
        let mut best = f64::INFINITY;
        for ci in self.competition.indices_up_to(t) {
            for &v in &self.competition.values()[ci] {
                best = best.min(v);
            }
        }
        best
    }
}

/// Signature of a user-supplied reaction field: (t, state, out).
pub type ReactionFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// User-supplied reaction field for models outside the built-in suite.
#[derive(Clone)]
pub struct CustomReaction {
    pub state_dim: usize,
    pub complex: bool,
    pub autonomous: bool,
    pub eval: ReactionFn,
}

impl fmt::Debug for CustomReaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomReaction")
            .field("state_dim", &self.state_dim)
            .field("complex", &self.complex)
            .field("autonomous", &self.autonomous)
            .finish()
    }
}

/// Time-dependent reaction vector field F(t, z) on the state space.
#[derive(Debug, Clone)]
pub enum ReactionModel {
    /// Logistic growth χ u (1 − u).
    Fisher { chi: f64 },
    /// F(u) = (1 + ia)u − (1 + ib)|u|²u on ℂ, stored as (re, im).
    Cgl { a: f64, b: f64 },
    /// F(u, v) = ((a−u)(u−1)u − v, e(bu − v)).
    FitzHughNagumo { a: f64, e: f64, b: f64 },
    Population(PopulationModel),
    Custom(CustomReaction),
}

impl ReactionModel {
    pub fn fisher(chi: f64) -> Result<Self> {
        if !(chi.is_finite() && chi > 0.0) {
            return Err(Error::Parameter(format!("fisher growth rate must be > 0, got {chi}")));
        }
        Ok(ReactionModel::Fisher { chi })
    }

    pub fn cgl(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Parameter("cgl parameters must be finite".into()));
        }
        Ok(ReactionModel::Cgl { a, b })
    }

    pub fn fitzhugh_nagumo(a: f64, e: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::Parameter(format!("fhn requires 0 < a < 1, got {a}")));
        }
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::Parameter(format!("fhn requires e > 0, got {e}")));
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::Parameter(format!("fhn requires b >= 0, got {b}")));
        }
        Ok(ReactionModel::FitzHughNagumo { a, e, b })
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            ReactionModel::Fisher { .. } => "fisher",
            ReactionModel::Cgl { .. } => "cgl",
            ReactionModel::FitzHughNagumo { .. } => "fhn",
            ReactionModel::Population(_) => "population",
            ReactionModel::Custom(_) => "custom",
        }
    }

    /// Number of stored real components of the state.
    pub fn state_dim(&self) -> usize {
        match self {
            ReactionModel::Fisher { .. } => 1,
            ReactionModel::Cgl { .. } => 2,
            ReactionModel::FitzHughNagumo { .. } => 2,
            ReactionModel::Population(p) => p.trait_count(),
            ReactionModel::Custom(c) => c.state_dim,
        }
    }

    /// Number of semigroup components: complex pairs diffuse jointly.
    pub fn diffusion_components(&self) -> usize {
        if self.is_complex() {
            self.state_dim() / 2
        } else {
            self.state_dim()
        }
    }

    pub fn is_complex(&self) -> bool {
        match self {
            ReactionModel::Cgl { .. } => true,
            ReactionModel::Custom(c) => c.complex,
            _ => false,
        }
    }

    pub fn is_autonomous(&self) -> bool {
        match self {
            ReactionModel::Population(p) => p.is_autonomous(),
            ReactionModel::Custom(c) => c.autonomous,
            _ => true,
        }
    }

    /// Evaluate F(t, z) into `out`.
    pub fn evaluate(&self, t: f64, z: &[f64], out: &mut [f64]) -> Result<()> {
        let m = self.state_dim();
        if z.len() != m || out.len() != m {
            return Err(Error::Data(format!(
                "state dimension mismatch: model expects {m}, got {} (out {})",
                z.len(),
                out.len()
            )));
        }
        match self {
            ReactionModel::Fisher { chi } => {
                out[0] = chi * z[0] * (1.0 - z[0]);
            }
            ReactionModel::Cgl { a, b } => {
                let (ur, ui) = (z[0], z[1]);
                let eta = ur * ur + ui * ui;
                out[0] = (ur - a * ui) - eta * (ur - b * ui);
                out[1] = (ui + a * ur) - eta * (ui + b * ur);
            }
            ReactionModel::FitzHughNagumo { a, e, b } => {
                let (u, v) = (z[0], z[1]);
                out[0] = (a - u) * (u - 1.0) * u - v;
                out[1] = e * (b * u - v);
            }
            ReactionModel::Population(p) => {
                let k = p.growth.at(t);
                let mu = p.mutation.at(t);
                let c = p.competition.at(t);
                let n = p.trait_count();
                for i in 0..n {
                    let mut mutation = 0.0;
                    let mut competition = 0.0;
                    for j in 0..n {
                        let wz = p.weights[j] * z[j];
                        mutation += mu[i * n + j] * wz;
                        competition += c[i * n + j] * wz;
                    }
                    out[i] = k[i] * z[i] + mutation - competition * z[i];
                }
            }
            ReactionModel::Custom(cr) => (cr.eval)(t, z, out),
        }
        Ok(())
    }
}

fn state_in_range(z: &[f64]) -> bool {
    z.iter().all(|v| v.is_finite() && v.abs() <= BLOW_UP_THRESHOLD)
}

/// Integrate ż = factor·F(t, z) from (t0, z0) to t1 with classical RK4.
///
/// Uses max(1, ceil((t1−t0)·substeps_per_unit)) uniform steps; t1 = t0
/// returns z0 exactly. Divergence beyond [`BLOW_UP_THRESHOLD`] aborts
/// with the last in-range time (the finite-T* alternative, observably).
pub fn nonlinear_flow(
    model: &ReactionModel,
    t0: f64,
    t1: f64,
    z0: &[f64],
    factor: FlowFactor,
    cfg: &FlowConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(Error::Parameter(format!("flow needs t1 >= t0, got [{t0}, {t1}]")));
    }
    if z0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("flow initial state contains non-finite values".into()));
    }
    let m = self_dim_check(model, z0)?;
    if t1 == t0 {
        return Ok(z0.to_vec());
    }
    let span = t1 - t0;
    let steps = (span * cfg.substeps_per_unit).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let scale = factor.value();

    let mut y = z0.to_vec();
    let mut k1 = vec![0.0; m];
    let mut k2 = vec![0.0; m];
    let mut k3 = vec![0.0; m];
    let mut k4 = vec![0.0; m];
    let mut stage = vec![0.0; m];

    for step in 0..steps {
        let t = t0 + step as f64 * dt;
        model.evaluate(t, &y, &mut k1)?;
        for i in 0..m {
            stage[i] = y[i] + 0.5 * dt * scale * k1[i];
        }
        model.evaluate(t + 0.5 * dt, &stage, &mut k2)?;
        for i in 0..m {
            stage[i] = y[i] + 0.5 * dt * scale * k2[i];
        }
        model.evaluate(t + 0.5 * dt, &stage, &mut k3)?;
        for i in 0..m {
            stage[i] = y[i] + dt * scale * k3[i];
        }
        model.evaluate(t + dt, &stage, &mut k4)?;
        for i in 0..m {
            y[i] += dt * scale / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !state_in_range(&y) {
            return Err(Error::BlowUp { time: t, grid_index: None });
        }
    }
    Ok(y)
}

fn self_dim_check(model: &ReactionModel, z: &[f64]) -> Result<usize> {
    let m = model.state_dim();
    if z.len() != m {
        return Err(Error::Data(format!(
            "state dimension mismatch: model expects {m}, got {}",
            z.len()
        )));
    }
    Ok(m)
}

/// Apply [`nonlinear_flow`] independently at every grid point.
///
/// Points are independent, so the parallel map is schedule-invariant;
/// a blow-up reports the smallest offending grid index.
pub fn pointwise_flow(
    field: &Field,
    model: &ReactionModel,
    t0: f64,
    t1: f64,
    factor: FlowFactor,
    cfg: &FlowConfig,
) -> Result<Field> {
    if field.state_dim() != model.state_dim() {
        return Err(Error::Data(format!(
            "field has {} components but model expects {}",
            field.state_dim(),
            model.state_dim()
        )));
    }
    let npts = field.grid().len();
    let results: Vec<Result<Vec<f64>>> = (0..npts)
        .into_par_iter()
        .map(|p| nonlinear_flow(model, t0, t1, field.state(p), factor, cfg))
        .collect();
    let mut out = Field::zeros(field.grid().clone(), field.state_dim(), field.is_complex())?;
    let m = field.state_dim();
    for (p, res) in results.into_iter().enumerate() {
        match res {
            Ok(z) => out.values_mut()[p * m..(p + 1) * m].copy_from_slice(&z),
            Err(Error::BlowUp { time, .. }) => {
                return Err(Error::BlowUp { time, grid_index: Some(p) })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Closed-form logistic trajectory z(t) = z0 e^{χt} / (1 + z0(e^{χt} − 1)),
/// written in the overflow-safe form z0 / (z0 + (1−z0)e^{−χt}).
pub fn logistic_closed_form(z0: f64, chi: f64, t: f64) -> f64 {
    z0 / (z0 + (1.0 - z0) * (-chi * t).exp())
}
