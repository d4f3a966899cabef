//! The Lie-Trotter splitting driver.
//!
//! The linear term is switched on and off by the h-periodic schedule
//! α_h(t) ∈ {0, 2}: on during the first half of each period, off during
//! the second. Its integral τ_h(t, t′) is evaluated in closed form, and
//! the recursion samples the period boundaries:
//!
//!   V_{k+1} = S(h) U_k,
//!   U_{k+1} = flow of ż = 2F over [kh + h/2, kh + h] from V_{k+1}.
//!
//! Per-component kernel specs give the product-space form: component j
//! diffuses with its own (σ_j, β_j); complex pairs share one spec.

use crate::asymptotics::AsymptoteProbe;
use crate::grid::Field;
use crate::kernel::{self, KernelSpec, SpectralMultiplier};
use crate::reaction::{pointwise_flow, FlowConfig, FlowFactor, ReactionModel};
use crate::regions::{RegionFamily, SnapshotAudit};
use crate::{Error, Result};
use serde::Serialize;

/// On/off weight of the linear term: 2 on [kh, kh + h/2), 0 after.
///
/// Exactly h-periodic; period starts are on (α_h(kh) = 2).
pub fn alpha(h: f64, t: f64) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Parameter(format!("schedule period must be > 0, got {h}")));
    }
    let s = t / h;
    let frac = s - s.floor();
    Ok(if frac < 0.5 { 2.0 } else { 0.0 })
}

/// Antiderivative A(t) = ∫₀^t α_h: piecewise-linear, slope 2 then 0.
fn alpha_antiderivative(h: f64, t: f64) -> f64 {
    let s = t / h;
    let k = s.floor();
    let frac = s - k;
    h * (k + (2.0 * frac).min(1.0))
}

/// τ_h(t, t′) = ∫_{t′}^{t} α_h, evaluated in closed form.
///
/// Satisfies 0 ≤ τ_h ≤ 2(t−t′), exact additivity, kh-shift invariance,
/// τ_h(t′+kh, t′) = kh, and |(t−t′) − τ_h| ≤ h (up to rounding).
pub fn tau(h: f64, t: f64, t_prev: f64) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Parameter(format!("schedule period must be > 0, got {h}")));
    }
    if !(t.is_finite() && t_prev.is_finite() && t_prev <= t) {
        return Err(Error::Parameter(format!("tau needs t' <= t, got t' = {t_prev}, t = {t}")));
    }
    Ok(alpha_antiderivative(h, t) - alpha_antiderivative(h, t_prev))
}

/// Splitting period h and the number of whole periods n; T = n·h always.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitSchedule {
    h: f64,
    n: usize,
}

impl SplitSchedule {
    pub fn new(h: f64, n: usize) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Parameter(format!("splitting period must be > 0, got {h}")));
        }
        if n == 0 {
            return Err(Error::Parameter("schedule needs at least one period".into()));
        }
        Ok(Self { h, n })
    }

    /// Schedule with n = T/h periods; T must be an exact multiple of h.
    pub fn for_total_time(h: f64, total_time: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Parameter(format!("splitting period must be > 0, got {h}")));
        }
        let ratio = total_time / h;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Parameter(format!(
                "total time {total_time} is not a whole multiple of h = {h}"
            )));
        }
        Self::new(h, n as usize)
    }

    pub fn period(&self) -> f64 {
        self.h
    }

    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn total_time(&self) -> f64 {
        self.h * self.n as f64
    }

    pub fn time_at(&self, k: usize) -> f64 {
        k as f64 * self.h
    }
}

/// Optional per-snapshot instrumentation for [`simulate`].
#[derive(Default)]
pub struct Monitors {
    /// Regions to evaluate at every period boundary.
    pub regions: Vec<RegionFamily>,
    /// Edge-band probe recording boundary values (1-D grids).
    pub asymptote: Option<AsymptoteProbe>,
    /// Keep the half-step fields V_{h,k} (off by default).
    pub record_half_steps: bool,
}

/// Monitor series recorded at the period boundaries kh.
#[derive(Debug, Clone, Default, Serialize)]
pub struct MonitorSeries {
    pub sup_norm: Vec<f64>,
    /// One audit row per region per snapshot.
    pub region_audits: Vec<Vec<SnapshotAudit>>,
    /// Band means per snapshot: (left, right) state vectors.
    pub boundary_values: Option<Vec<(Vec<f64>, Vec<f64>)>>,
}

/// Snapshots U_{h,k} at times kh, with optional half-step fields V_{h,k}.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    /// V_{h,k+1} for k = 0..n−1 when half-step recording is on.
    pub half_snapshots: Option<Vec<Field>>,
    pub monitors: MonitorSeries,
}

impl Trajectory {
    pub fn final_field(&self) -> &Field {
        self.snapshots.last().expect("trajectory holds at least the initial snapshot")
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}

/// Blow-up mid-run, carrying the trajectory computed so far.
#[derive(Debug)]
pub struct SimulationBlowUp {
    pub step: usize,
    pub time: f64,
    pub grid_index: Option<usize>,
    pub partial: Box<Trajectory>,
}

impl From<SimulationBlowUp> for Error {
    fn from(b: SimulationBlowUp) -> Self {
        Error::BlowUp { time: b.time, grid_index: b.grid_index }
    }
}

/// Why [`simulate`] stopped: bad inputs (no run happened) or a genuine
/// finite-time blow-up (partial trajectory available).
#[derive(Debug)]
pub enum SimulationFailure {
    Invalid(Error),
    BlowUp(SimulationBlowUp),
}

impl SimulationFailure {
    /// The partial trajectory, when the run got far enough to have one.
    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            SimulationFailure::BlowUp(b) => Some(&b.partial),
            SimulationFailure::Invalid(_) => None,
        }
    }
}

impl From<SimulationFailure> for Error {
    fn from(f: SimulationFailure) -> Self {
        match f {
            SimulationFailure::Invalid(e) => e,
            SimulationFailure::BlowUp(b) => b.into(),
        }
    }
}

fn multiplier_set(
    specs: &[KernelSpec],
    model: &ReactionModel,
    field: &Field,
    t: f64,
) -> Result<Vec<SpectralMultiplier>> {
    let comps = model.diffusion_components();
    if specs.is_empty() || (specs.len() != 1 && specs.len() != comps) {
        return Err(Error::Parameter(format!(
            "need 1 or {comps} kernel specs, got {}",
            specs.len()
        )));
    }
    let m = field.state_dim();
    let mut per_component = Vec::with_capacity(m);
    for c in 0..m {
        let state_comp = if model.is_complex() { c / 2 } else { c };
        let spec = if specs.len() == 1 { &specs[0] } else { &specs[state_comp] };
        per_component.push(kernel::semigroup_multiplier(spec, field.grid(), t)?);
    }
    Ok(per_component)
}

/// One Lie-Trotter period: V = S(h)U_k, then the doubled reaction flow
/// over the second half-period.
pub fn lie_trotter_step(
    u_k: &Field,
    k: usize,
    sched: &SplitSchedule,
    specs: &[KernelSpec],
    model: &ReactionModel,
    cfg: &FlowConfig,
) -> Result<(Field, Field)> {
    u_k.ensure_finite()?;
    if u_k.state_dim() != model.state_dim() {
        return Err(Error::Data(format!(
            "field has {} components but model expects {}",
            u_k.state_dim(),
            model.state_dim()
        )));
    }
    let h = sched.period();
    let multipliers = multiplier_set(specs, model, u_k, h)?;
    let v = kernel::apply_multiplier(u_k, &multipliers)?;
    let t_half = sched.time_at(k) + 0.5 * h;
    let t_end = sched.time_at(k + 1);
    let u_next = pointwise_flow(&v, model, t_half, t_end, FlowFactor::Doubled, cfg)?;
    Ok((v, u_next))
}

fn record(monitors: &Monitors, series: &mut MonitorSeries, t: f64, field: &Field) -> Result<()> {
    series.sup_norm.push(field.sup_norm());
    for (ri, region) in monitors.regions.iter().enumerate() {
        let audit = region.audit_snapshot(t, field)?;
        series.region_audits[ri].push(audit);
    }
    if let Some(probe) = &monitors.asymptote {
        let (left, right) = probe.boundary_values(field)?;
        series
            .boundary_values
            .as_mut()
            .expect("boundary series allocated with probe")
            .push((left, right));
    }
    Ok(())
}

/// Run the splitting for n periods, recording monitors at every kh.
///
/// Deterministic: the recursion is sequential in k and all per-step
/// parallelism is schedule-invariant. Bad inputs (dimension mismatches,
/// non-finite data) fail fast as [`SimulationFailure::Invalid`]; only a
/// genuine finite-time blow-up carries a partial trajectory.
pub fn simulate(
    u0: &Field,
    model: &ReactionModel,
    specs: &[KernelSpec],
    sched: &SplitSchedule,
    monitors: &Monitors,
    cfg: &FlowConfig,
) -> std::result::Result<Trajectory, SimulationFailure> {
    // Validate everything the loop relies on before stepping.
    let validate = || -> Result<()> {
        u0.ensure_finite()?;
        cfg.validate()?;
        if u0.state_dim() != model.state_dim() {
            return Err(Error::Data(format!(
                "field has {} components but model expects {}",
                u0.state_dim(),
                model.state_dim()
            )));
        }
        multiplier_set(specs, model, u0, 0.0)?;
        for region in &monitors.regions {
            region.contains(0.0, u0.state(0))?;
        }
        if let Some(probe) = &monitors.asymptote {
            probe.boundary_values(u0)?;
        }
        Ok(())
    };
    if let Err(e) = validate() {
        return Err(SimulationFailure::Invalid(e));
    }

    let build = |e: Error, step: usize, time: f64, partial: Trajectory| {
        SimulationFailure::BlowUp(SimulationBlowUp {
            step,
            time: match &e {
                Error::BlowUp { time, .. } => *time,
                _ => time,
            },
            grid_index: match &e {
                Error::BlowUp { grid_index, .. } => *grid_index,
                _ => None,
            },
            partial: Box::new(partial),
        })
    };

    let mut series = MonitorSeries {
        sup_norm: Vec::new(),
        region_audits: vec![Vec::new(); monitors.regions.len()],
        boundary_values: monitors.asymptote.as_ref().map(|_| Vec::new()),
    };
    let mut times = vec![0.0];
    let mut snapshots = vec![u0.clone()];
    let mut halves = if monitors.record_half_steps { Some(Vec::new()) } else { None };

    if let Err(e) = record(monitors, &mut series, 0.0, u0) {
        let partial = Trajectory { times, snapshots, half_snapshots: halves, monitors: series };
        return Err(build(e, 0, 0.0, partial));
    }

    for k in 0..sched.steps() {
        let step_result =
            lie_trotter_step(&snapshots[k], k, sched, specs, model, cfg).and_then(|(v, u)| {
                let t = sched.time_at(k + 1);
                if let Some(hs) = halves.as_mut() {
                    hs.push(v);
                }
                times.push(t);
                record(monitors, &mut series, t, &u)?;
                snapshots.push(u);
                Ok(())
            });
        if let Err(e) = step_result {
            let t = sched.time_at(k);
            let partial = Trajectory { times, snapshots, half_snapshots: halves, monitors: series };
            return Err(build(e, k, t, partial));
        }
    }

    Ok(Trajectory { times, snapshots, half_snapshots: halves, monitors: series })
}

/// One row of a self-convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub error: f64,
    /// log(e_{i−1}/e_i) / log(h_{i−1}/h_i); absent on the first row.
    pub order: Option<f64>,
}

/// Self-convergence study against a 4x-finer reference run.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub total_time: f64,
    pub reference_h: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Study-level order estimate: mean of the successive-ratio slopes.
    pub fn mean_order(&self) -> Option<f64> {
        let orders: Vec<f64> = self.rows.iter().filter_map(|r| r.order).collect();
        if orders.is_empty() {
            None
        } else {
            Some(orders.iter().sum::<f64>() / orders.len() as f64)
        }
    }

    pub fn errors_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }
}

/// Run the splitting at every h in `h_list` (decreasing, each dividing T)
/// and report sup-norm errors at T against the h_min/4 reference run.
pub fn self_convergence(
    u0: &Field,
    model: &ReactionModel,
    specs: &[KernelSpec],
    total_time: f64,
    h_list: &[f64],
    cfg: &FlowConfig,
) -> Result<ConvergenceTable> {
    if h_list.len() < 3 {
        return Err(Error::Parameter("self-convergence needs at least three step sizes".into()));
    }
    if !h_list.windows(2).all(|w| w[1] < w[0]) {
        return Err(Error::Parameter("h list must be strictly decreasing".into()));
    }
    let mut schedules = Vec::with_capacity(h_list.len());
    for &h in h_list {
        schedules.push(SplitSchedule::for_total_time(h, total_time)?);
    }
    let h_ref = h_list.last().unwrap() / 4.0;
    let ref_sched = SplitSchedule::for_total_time(h_ref, total_time)?;
    let monitors = Monitors::default();
    let reference = simulate(u0, model, specs, &ref_sched, &monitors, cfg)?;
    let ref_final = reference.final_field();

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(h_list.len());
    for sched in &schedules {
        let traj = simulate(u0, model, specs, sched, &monitors, cfg)?;
        let error = traj.final_field().sup_distance(ref_final)?;
        let order = rows
            .last()
            .map(|prev: &ConvergenceRow| (prev.error / error).ln() / (prev.h / sched.period()).ln());
        rows.push(ConvergenceRow { h: sched.period(), error, order });
    }
    Ok(ConvergenceTable { total_time, reference_h: h_ref, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::reaction::logistic_closed_form;
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(0.1, 0.12).unwrap(), 2.0); // frac 0.2
        assert_eq!(alpha(0.1, 0.17).unwrap(), 0.0); // frac 0.7
        for k in [-3i32, 0, 1, 7] {
            // Left-closed half-period: period starts switch the term on.
            assert_eq!(alpha(1.0, k as f64).unwrap(), 2.0);
        }
        assert!(alpha(0.0, 1.0).is_err());
    }

    #[test]
    fn tau_examples() {
        // Five whole periods: τ = kh.
        assert!((tau(0.1, 0.53, 0.03).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(tau(0.25, 1.3, 1.3).unwrap(), 0.0);
        // Piecewise integration: four active half-periods of 2 × 0.05.
        let v = tau(0.1, 0.35, 0.0).unwrap();
        assert!((v - 0.4).abs() < 1e-12);
        assert!((0.35 - v).abs() <= 0.1 + 1e-12);
        assert!(tau(0.1, 0.0, 0.5).is_err());
    }

    #[test]
    fn schedule_requires_exact_multiples() {
        assert!(SplitSchedule::for_total_time(0.25, 1.0).is_ok());
        assert!(SplitSchedule::for_total_time(0.3, 1.0).is_err());
        let s = SplitSchedule::for_total_time(0.125, 2.0).unwrap();
        assert_eq!(s.steps(), 16);
        assert_eq!(s.total_time(), 2.0);
    }

    fn fisher_setup(n: usize) -> (Field, ReactionModel, Vec<KernelSpec>) {
        let grid = GridSpec::line(2.0 * PI, n).unwrap();
        let u0 = Field::from_fn(grid, 1, false, |x, _| 0.5 + 0.3 * x[0].cos()).unwrap();
        let model = ReactionModel::fisher(1.0).unwrap();
        let specs = vec![KernelSpec::new(1.0, 0.75, 1).unwrap()];
        (u0, model, specs)
    }

    #[test]
    fn constant_step_reduces_to_ode() {
        // Constant data: V = c, and the doubled half-period flow equals
        // the plain flow over the full period for autonomous F.
        let grid = GridSpec::line(2.0 * PI, 32).unwrap();
        let u0 = Field::constant(grid, &[0.5], false).unwrap();
        let model = ReactionModel::fisher(1.0).unwrap();
        let specs = vec![KernelSpec::new(1.0, 0.75, 1).unwrap()];
        let sched = SplitSchedule::new(LN_2, 1).unwrap();
        let cfg = FlowConfig::default();
        let (v, u1) = lie_trotter_step(&u0, 0, &sched, &specs, &model, &cfg).unwrap();
        assert!(v.sup_distance(&u0).unwrap() <= 1e-12);
        let expect = logistic_closed_form(0.5, 1.0, LN_2);
        for p in 0..u1.grid().len() {
            assert!((u1.value(p, 0) - expect).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_reaction_reduces_to_pure_heat() {
        use crate::reaction::CustomReaction;
        use std::sync::Arc;
        let grid = GridSpec::line(2.0 * PI, 64).unwrap();
        let k = 2.0;
        let u0 = Field::from_fn(grid, 1, false, |x, _| (k * x[0]).cos()).unwrap();
        let model = ReactionModel::Custom(CustomReaction {
            state_dim: 1,
            complex: false,
            autonomous: true,
            eval: Arc::new(|_, _, out| out[0] = 0.0),
        });
        let spec = KernelSpec::new(1.3, 0.6, 1).unwrap();
        let sched = SplitSchedule::new(0.25, 8).unwrap();
        let traj =
            simulate(&u0, &model, &[spec], &sched, &Monitors::default(), &FlowConfig::default())
                .unwrap();
        let t_final = sched.total_time();
        let decay = (-spec.sigma * t_final * (k * k).powf(spec.beta)).exp();
        let expect =
            Field::from_fn(u0.grid().clone(), 1, false, |x, _| decay * (k * x[0]).cos()).unwrap();
        let err = traj.final_field().sup_distance(&expect).unwrap();
        assert!(err <= 1e-12, "pure heat error {err}");
    }

    #[test]
    fn zero_sigma_reduces_to_pure_ode() {
        let (u0, model, _) = fisher_setup(32);
        let specs = vec![KernelSpec::new(0.0, 0.75, 1).unwrap()];
        let sched = SplitSchedule::new(0.125, 8).unwrap();
        let cfg = FlowConfig::default();
        let traj = simulate(&u0, &model, &specs, &sched, &Monitors::default(), &cfg).unwrap();
        let t_final = sched.total_time();
        for p in 0..u0.grid().len() {
            let exact = logistic_closed_form(u0.value(p, 0), 1.0, t_final);
            let got = traj.final_field().value(p, 0);
            assert!((got - exact).abs() < 1e-8, "point {p}: {got} vs {exact}");
        }
    }

    #[test]
    fn constant_data_is_h_independent() {
        let grid = GridSpec::line(2.0 * PI, 16).unwrap();
        let u0 = Field::constant(grid, &[0.5], false).unwrap();
        let model = ReactionModel::fisher(1.0).unwrap();
        let specs = vec![KernelSpec::new(2.0, 0.9, 1).unwrap()];
        let cfg = FlowConfig::default();
        let expect = 2.0 / 3.0;
        for n in [1usize, 4, 16] {
            let sched = SplitSchedule::new(LN_2 / n as f64, n).unwrap();
            let traj = simulate(&u0, &model, &specs, &sched, &Monitors::default(), &cfg).unwrap();
            let got = traj.final_field().value(0, 0);
            assert!((got - expect).abs() < 1e-8, "n={n}: {got}");
        }
    }

    #[test]
    fn simulate_records_monitors() {
        let (u0, model, specs) = fisher_setup(32);
        let sched = SplitSchedule::new(0.25, 4).unwrap();
        let monitors = Monitors { record_half_steps: true, ..Default::default() };
        let traj =
            simulate(&u0, &model, &specs, &sched, &monitors, &FlowConfig::default()).unwrap();
        assert_eq!(traj.times.len(), 5);
        assert_eq!(traj.snapshots.len(), 5);
        assert_eq!(traj.monitors.sup_norm.len(), 5);
        assert_eq!(traj.half_snapshots.as_ref().unwrap().len(), 4);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn blow_up_carries_partial_trajectory() {
        use crate::reaction::CustomReaction;
        use std::sync::Arc;
        let grid = GridSpec::line(2.0 * PI, 8).unwrap();
        let u0 = Field::constant(grid, &[1.0], false).unwrap();
        let model = ReactionModel::Custom(CustomReaction {
            state_dim: 1,
            complex: false,
            autonomous: true,
            eval: Arc::new(|_, z, out| out[0] = z[0] * z[0]),
        });
        let specs = vec![KernelSpec::new(0.0, 1.0, 1).unwrap()];
        let sched = SplitSchedule::new(1.0, 4).unwrap();
        let err =
            simulate(&u0, &model, &specs, &sched, &Monitors::default(), &FlowConfig::default())
                .unwrap_err();
        match err {
            SimulationFailure::BlowUp(b) => {
                assert!(!b.partial.snapshots.is_empty());
                assert!(b.step < 4);
                assert!(b.grid_index.is_some());
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn bad_monitor_dimensions_fail_fast_as_invalid() {
        use crate::regions::TimeFn;
        let (u0, model, specs) = fisher_setup(16);
        let sched = SplitSchedule::new(0.25, 2).unwrap();
        // Two-component rectangle against a scalar model.
        let monitors = Monitors {
            regions: vec![RegionFamily::rectangle(vec![1.0, 1.0]).unwrap()],
            ..Default::default()
        };
        let err = simulate(&u0, &model, &specs, &sched, &monitors, &FlowConfig::default())
            .unwrap_err();
        assert!(matches!(err, SimulationFailure::Invalid(_)), "{err:?}");
        assert!(err.partial().is_none());
        // Sanity: a compatible interval region is fine.
        let monitors = Monitors {
            regions: vec![RegionFamily::interval(
                TimeFn::constant(-10.0),
                TimeFn::constant(10.0),
            )],
            ..Default::default()
        };
        assert!(simulate(&u0, &model, &specs, &sched, &monitors, &FlowConfig::default()).is_ok());
    }

    #[test]
    fn self_convergence_zero_reaction_is_exact() {
        use crate::reaction::CustomReaction;
        use std::sync::Arc;
        let grid = GridSpec::line(2.0 * PI, 64).unwrap();
        let u0 =
            Field::from_fn(grid, 1, false, |x, _| x[0].cos() + 0.2 * (3.0 * x[0]).sin()).unwrap();
        let model = ReactionModel::Custom(CustomReaction {
            state_dim: 1,
            complex: false,
            autonomous: true,
            eval: Arc::new(|_, _, out| out[0] = 0.0),
        });
        let specs = vec![KernelSpec::new(1.0, 0.75, 1).unwrap()];
        let table = self_convergence(
            &u0,
            &model,
            &specs,
            1.0,
            &[0.25, 0.125, 0.0625],
            &FlowConfig::default(),
        )
        .unwrap();
        for row in &table.rows {
            assert!(row.error <= 1e-12, "h = {}: error {}", row.h, row.error);
        }
    }

    #[test]
    fn self_convergence_fisher_first_order() {
        let (u0, model, specs) = fisher_setup(64);
        let table = self_convergence(
            &u0,
            &model,
            &specs,
            1.0,
            &[0.125, 0.0625, 0.03125],
            &FlowConfig::default(),
        )
        .unwrap();
        assert!(table.errors_strictly_decreasing(), "{:?}", table.rows);
        let order = table.mean_order().unwrap();
        assert!((0.8..=1.2).contains(&order), "order {order}");
    }

    #[test]
    fn self_convergence_validates_input() {
        let (u0, model, specs) = fisher_setup(16);
        let cfg = FlowConfig::default();
        assert!(self_convergence(&u0, &model, &specs, 1.0, &[0.5, 0.25], &cfg).is_err());
        assert!(self_convergence(&u0, &model, &specs, 1.0, &[0.25, 0.5, 0.125], &cfg).is_err());
        assert!(self_convergence(&u0, &model, &specs, 1.0, &[0.5, 0.25, 0.15], &cfg).is_err());
    }

    #[test]
    fn propagator_composition_at_spectral_level() {
        // S_h(t, t'') = S_h(t, t') S_h(t', t''): multipliers built from
        // tau compose mode-wise to machine precision.
        let grid = GridSpec::line(2.0 * PI, 64).unwrap();
        let spec = KernelSpec::new(1.3, 0.7, 1).unwrap();
        let h = 0.37;
        for (t2, t1, t0) in [(1.91, 1.2, 0.31), (0.9, 0.47, 0.0), (5.5, 2.25, 2.2)] {
            let full = kernel::semigroup_multiplier(&spec, &grid, tau(h, t2, t0).unwrap()).unwrap();
            let right = kernel::semigroup_multiplier(&spec, &grid, tau(h, t1, t0).unwrap()).unwrap();
            let left = kernel::semigroup_multiplier(&spec, &grid, tau(h, t2, t1).unwrap()).unwrap();
            for i in 0..grid.len() {
                let composed = left.factor(i) * right.factor(i);
                assert!(
                    (composed - full.factor(i)).abs() <= 1e-12 * (1.0 + full.factor(i)),
                    "mode {i} at ({t2}, {t1}, {t0})"
                );
            }
        }
    }

    #[test]
    fn step_keeps_fisher_unit_interval() {
        // Sup-norm control: U_k in [0, 1] implies U_{k+1} in [0, 1] + 1e-9.
        let grid = GridSpec::line(2.0 * PI, 64).unwrap();
        let u0 = Field::from_fn(grid, 1, false, |x, _| 0.5 + 0.5 * (3.0 * x[0]).sin()).unwrap();
        let model = ReactionModel::fisher(2.0).unwrap();
        let specs = vec![KernelSpec::new(1.0, 0.6, 1).unwrap()];
        let sched = SplitSchedule::new(0.25, 1).unwrap();
        let (_, u1) =
            lie_trotter_step(&u0, 0, &sched, &specs, &model, &FlowConfig::default()).unwrap();
        for p in 0..u1.grid().len() {
            let v = u1.value(p, 0);
            assert!((-1e-9..=1.0 + 1e-9).contains(&v), "point {p}: {v}");
        }
    }

    #[test]
    fn pure_heat_trajectory_stays_in_initial_region() {
        // Convolution preserves the interval hull: with F = 0, the audit
        // against the t = 0 region passes for all snapshots.
        use crate::reaction::CustomReaction;
        use crate::regions::{audit_trajectory, TimeFn};
        use std::sync::Arc;
        let grid = GridSpec::line(2.0 * PI, 64).unwrap();
        let u0 = Field::from_fn(grid, 1, false, |x, _| {
            0.3 + 0.2 * x[0].cos() + 0.1 * (5.0 * x[0]).sin()
        })
        .unwrap();
        let lo = (0..u0.grid().len()).map(|p| u0.value(p, 0)).fold(f64::INFINITY, f64::min);
        let hi = (0..u0.grid().len()).map(|p| u0.value(p, 0)).fold(f64::NEG_INFINITY, f64::max);
        let model = ReactionModel::Custom(CustomReaction {
            state_dim: 1,
            complex: false,
            autonomous: true,
            eval: Arc::new(|_, _, out| out[0] = 0.0),
        });
        let specs = vec![KernelSpec::new(1.0, 0.75, 1).unwrap()];
        let sched = SplitSchedule::new(0.25, 8).unwrap();
        let traj =
            simulate(&u0, &model, &specs, &sched, &Monitors::default(), &FlowConfig::default())
                .unwrap();
        let region =
            RegionFamily::interval(TimeFn::constant(lo), TimeFn::constant(hi));
        let report = audit_trajectory(&traj, &region).unwrap();
        assert!(report.pass, "pure-heat audit failed: {:?}", report.snapshots.last());
    }

    #[test]
    fn fisher_envelope_containment_during_simulation() {
        // u0 in [0.2, 0.8] stays within the logistic envelopes.
        let grid = GridSpec::line(40.0, 128).unwrap();
        let u0 =
            Field::from_fn(grid, 1, false, |x, _| 0.5 + 0.3 * (2.0 * PI * x[0] / 40.0).cos())
                .unwrap();
        let model = ReactionModel::fisher(1.0).unwrap();
        let specs = vec![KernelSpec::new(1.0, 0.75, 1).unwrap()];
        let sched = SplitSchedule::new(0.125, 16).unwrap();
        let traj =
            simulate(&u0, &model, &specs, &sched, &Monitors::default(), &FlowConfig::default())
                .unwrap();
        for (k, snap) in traj.snapshots.iter().enumerate() {
            let t = traj.times[k];
            let a = logistic_closed_form(0.2, 1.0, t);
            let b = logistic_closed_form(0.8, 1.0, t);
            for p in 0..snap.grid().len() {
                let v = snap.value(p, 0);
                assert!(v >= a - 1e-6 && v <= b + 1e-6, "t={t}: value {v} outside [{a}, {b}]");
            }
        }
    }
}
