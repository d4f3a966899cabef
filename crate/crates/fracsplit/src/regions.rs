//! Time-indexed convex region families and trajectory audits.
//!
//! A region family K(t) traps solutions of ż = F(t, z): the semigroup
//! preserves closed convex sets under convolution and the reaction flow
//! is checked numerically via signed membership margins. Audits report
//! the worst margin per snapshot; a run passes when every margin stays
//! above −tolerance.

use crate::grid::Field;
use crate::reaction::PopulationModel;
use crate::splitting::Trajectory;
use crate::{Error, Result};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// Default absolute membership tolerance on margins.
///
/// Splitting and RK4 introduce O(h) boundary grazing; the invariance
/// theorems are exact but the discretization is not.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Componentwise slack for nonnegativity checks: RK4 can undershoot
/// an exact zero by round-off.
pub const NONNEG_SLACK: f64 = 1e-9;

/// A time-dependent scalar (radius or interval endpoint).
#[derive(Clone)]
pub struct TimeFn(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl TimeFn {
    pub fn constant(value: f64) -> Self {
        Self(Arc::new(move |_| value))
    }

    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    /// Lower Fisher envelope a(t) (logistic from a0 toward 1).
    pub fn fisher_lower(a0: f64, chi: f64) -> Result<Self> {
        fisher_envelopes(a0, 1.0, chi, 0.0)?; // validate parameters once
        Ok(Self(Arc::new(move |t| fisher_envelopes(a0, 1.0, chi, t).expect("validated").0)))
    }

    /// Upper Fisher envelope b(t) (logistic from b0 toward 1).
    pub fn fisher_upper(b0: f64, chi: f64) -> Result<Self> {
        fisher_envelopes(0.5, b0, chi, 0.0)?;
        Ok(Self(Arc::new(move |t| fisher_envelopes(0.5, b0, chi, t).expect("validated").1)))
    }

    /// Population mass radius λ(t) = max{u0_mass, k₊(t)/c₋(t)}.
    pub fn population_lambda(model: PopulationModel, u0_mass: f64) -> Result<Self> {
        population_lambda(&model, u0_mass, 0.0)?;
        Ok(Self(Arc::new(move |t| population_lambda(&model, u0_mass, t).expect("validated"))))
    }

    pub fn at(&self, t: f64) -> f64 {
        (self.0)(t)
    }
}

impl fmt::Debug for TimeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TimeFn(..)")
    }
}

/// Membership verdict with a signed distance surrogate (negative outside).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub inside: bool,
    pub margin: f64,
}

/// Closed convex region family variants of the model suite.
#[derive(Debug, Clone)]
pub enum RegionFamily {
    /// |z − center| ≤ radius(t) in the (possibly complex) state space.
    Ball { center: Vec<f64>, radius: TimeFn, tolerance: f64 },
    /// Scalar interval [lower(t), upper(t)].
    Interval { lower: TimeFn, upper: TimeFn, tolerance: f64 },
    /// Product of symmetric intervals |z_j| ≤ bounds\[j\] (constant).
    Rectangle { bounds: Vec<f64>, tolerance: f64 },
    /// z ≥ 0 componentwise and Σ_j w_j z_j ≤ radius(t).
    PositiveMassBall { weights: Vec<f64>, radius: TimeFn, tolerance: f64 },
}

impl RegionFamily {
    pub fn ball(center: Vec<f64>, radius: TimeFn) -> Self {
        RegionFamily::Ball { center, radius, tolerance: DEFAULT_TOLERANCE }
    }

    pub fn interval(lower: TimeFn, upper: TimeFn) -> Self {
        RegionFamily::Interval { lower, upper, tolerance: DEFAULT_TOLERANCE }
    }

    pub fn rectangle(bounds: Vec<f64>) -> Result<Self> {
        if !bounds.iter().all(|&r| r.is_finite() && r > 0.0) {
            return Err(Error::Parameter("rectangle bounds must be positive".into()));
        }
        Ok(RegionFamily::Rectangle { bounds, tolerance: DEFAULT_TOLERANCE })
    }

    pub fn positive_mass_ball(weights: Vec<f64>, radius: TimeFn) -> Result<Self> {
        if !weights.iter().all(|&w| w.is_finite() && w > 0.0) {
            return Err(Error::Parameter("mass-ball weights must be positive".into()));
        }
        Ok(RegionFamily::PositiveMassBall { weights, radius, tolerance: DEFAULT_TOLERANCE })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        match &mut self {
            RegionFamily::Ball { tolerance, .. }
            | RegionFamily::Interval { tolerance, .. }
            | RegionFamily::Rectangle { tolerance, .. }
            | RegionFamily::PositiveMassBall { tolerance, .. } => *tolerance = tol,
        }
        self
    }

    pub fn tolerance(&self) -> f64 {
        match self {
            RegionFamily::Ball { tolerance, .. }
            | RegionFamily::Interval { tolerance, .. }
            | RegionFamily::Rectangle { tolerance, .. }
            | RegionFamily::PositiveMassBall { tolerance, .. } => *tolerance,
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            RegionFamily::Ball { .. } => "ball",
            RegionFamily::Interval { .. } => "interval",
            RegionFamily::Rectangle { .. } => "rectangle",
            RegionFamily::PositiveMassBall { .. } => "positive-mass-ball",
        }
    }

    fn expected_dim(&self) -> Option<usize> {
        match self {
            RegionFamily::Ball { center, .. } => Some(center.len()),
            RegionFamily::Interval { .. } => Some(1),
            RegionFamily::Rectangle { bounds, .. } => Some(bounds.len()),
            RegionFamily::PositiveMassBall { weights, .. } => Some(weights.len()),
        }
    }

    /// Signed margin of a state vector at time t; true iff inside within
    /// the family's tolerance.
    pub fn contains(&self, t: f64, z: &[f64]) -> Result<Membership> {
        if let Some(d) = self.expected_dim() {
            if z.len() != d {
                return Err(Error::Data(format!(
                    "region expects state dimension {d}, got {}",
                    z.len()
                )));
            }
        }
        let margin = match self {
            RegionFamily::Ball { center, radius, .. } => {
                let dist =
                    z.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
                radius.at(t) - dist
            }
            RegionFamily::Interval { lower, upper, .. } => {
                let v = z[0];
                (v - lower.at(t)).min(upper.at(t) - v)
            }
            RegionFamily::Rectangle { bounds, .. } => {
                z.iter().zip(bounds).map(|(v, r)| r - v.abs()).fold(f64::INFINITY, f64::min)
            }
            RegionFamily::PositiveMassBall { weights, radius, .. } => {
                let min_comp = z.iter().fold(f64::INFINITY, |m, &v| m.min(v));
                let mass: f64 = weights.iter().zip(z).map(|(w, v)| w * v).sum();
                (min_comp + NONNEG_SLACK).min(radius.at(t) - mass)
            }
        };
        Ok(Membership { inside: margin >= -self.tolerance(), margin })
    }

    /// Worst margin over all grid points of one snapshot.
    ///
    /// Parallel over points; ties broken toward the smallest index so
    /// the report is schedule-independent.
    pub fn audit_snapshot(&self, t: f64, field: &Field) -> Result<SnapshotAudit> {
        use rayon::prelude::*;
        let npts = field.grid().len();
        let (worst, worst_point) = (0..npts)
            .into_par_iter()
            .map(|p| self.contains(t, field.state(p)).map(|m| (m.margin, p)))
            .try_reduce(
                || (f64::INFINITY, usize::MAX),
                |a, b| Ok(if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a }),
            )?;
        Ok(SnapshotAudit {
            time: t,
            worst_margin: worst,
            worst_point_index: worst_point.min(npts.saturating_sub(1)),
            pass: worst >= -self.tolerance(),
        })
    }
}

/// Per-snapshot audit row (serialized as the audit JSON report).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SnapshotAudit {
    pub time: f64,
    pub worst_margin: f64,
    pub worst_point_index: usize,
    pub pass: bool,
}

/// Whole-trajectory audit against one region family.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub region: String,
    pub tolerance: f64,
    pub snapshots: Vec<SnapshotAudit>,
    pub pass: bool,
}

/// Evaluate the worst margin of every snapshot; pass iff all margins
/// stay above −tolerance.
pub fn audit_trajectory(traj: &Trajectory, region: &RegionFamily) -> Result<AuditReport> {
    let mut snapshots = Vec::with_capacity(traj.snapshots.len());
    let mut pass = true;
    for (t, field) in traj.times.iter().zip(&traj.snapshots) {
        let audit = region.audit_snapshot(*t, field)?;
        pass &= audit.pass;
        snapshots.push(audit);
    }
    Ok(AuditReport {
        region: region.describe().to_string(),
        tolerance: region.tolerance(),
        snapshots,
        pass,
    })
}

/// Ball-family radius λ(t) = (λ₀ + ∫₀^t a) · exp(∫₀^t b) by composite
/// Simpson with `nodes` subintervals (rounded up to even).
pub fn ball_family_lambda(
    lambda0: f64,
    a: impl Fn(f64) -> f64,
    b: impl Fn(f64) -> f64,
    t: f64,
    nodes: usize,
) -> Result<f64> {
    if !(lambda0.is_finite() && lambda0 >= 0.0) {
        return Err(Error::Parameter(format!("lambda0 must be >= 0, got {lambda0}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Parameter(format!("time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(lambda0);
    }
    let n = nodes.max(2).next_multiple_of(2);
    let h = t / n as f64;
    let mut int_a = 0.0;
    let mut int_b = 0.0;
    for i in 0..=n {
        let s = i as f64 * h;
        let (va, vb) = (a(s), b(s));
        if !(va >= 0.0 && vb >= 0.0) {
            return Err(Error::Parameter(format!(
                "ball-family bound functions must be >= 0 (a({s}) = {va}, b({s}) = {vb})"
            )));
        }
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        int_a += w * va;
        int_b += w * vb;
    }
    int_a *= h / 3.0;
    int_b *= h / 3.0;
    Ok((lambda0 + int_a) * int_b.exp())
}

/// Fisher envelopes: logistic trajectories a(t) from a0 and b(t) from b0.
///
/// a0 ∈ [0, 1] (a0 = 0 yields the one-sided family [0, b(t)]), b0 ≥ 1,
/// χ > 0. a is nondecreasing toward 1; b nonincreasing toward 1.
pub fn fisher_envelopes(a0: f64, b0: f64, chi: f64, t: f64) -> Result<(f64, f64)> {
    if !(chi.is_finite() && chi > 0.0) {
        return Err(Error::Parameter(format!("fisher growth rate must be > 0, got {chi}")));
    }
    if !(0.0..=1.0).contains(&a0) {
        return Err(Error::Parameter(format!(
            "lower envelope start must lie in [0, 1], got {a0}"
        )));
    }
    if !(b0.is_finite() && b0 >= 1.0) {
        return Err(Error::Parameter(format!("upper envelope start must be >= 1, got {b0}")));
    }
    let logistic = |z0: f64| z0 / (z0 + (1.0 - z0) * (-chi * t).exp());
    Ok((logistic(a0), logistic(b0)))
}

/// FitzHugh-Nagumo invariant rectangle with its boundary certificate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FhnRectangle {
    pub r1: f64,
    pub r2: f64,
    /// Worst outward field component per face (u = +R1, u = −R1,
    /// v = +R2, v = −R2); all strictly negative certifies inward flow.
    pub face_margins: [f64; 4],
    pub worst_margin: f64,
    pub samples: usize,
}

/// Pick the invariant rectangle for the FHN reaction and certify it.
///
/// R1 = max{4, √(2b)} + 1 and R2 at the midpoint of the admissible
/// interval (bR1, R1³/2). The certificate samples the four faces and
/// reports the worst sign margin of the outward field component.
pub fn fhn_rectangle(a: f64, e: f64, b: f64) -> Result<FhnRectangle> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Parameter(format!("fhn requires 0 < a < 1, got {a}")));
    }
    if !(e.is_finite() && e > 0.0) {
        return Err(Error::Parameter(format!("fhn requires e > 0, got {e}")));
    }
    if !(b.is_finite() && b >= 0.0) {
        return Err(Error::Parameter(format!("fhn requires b >= 0, got {b}")));
    }
    let r1 = 4.0f64.max((2.0 * b).sqrt()) + 1.0;
    let lo = b * r1;
    let hi = r1 * r1 * r1 / 2.0;
    assert!(lo < hi, "admissible interval empty for valid parameters");
    let r2 = 0.5 * (lo + hi);

    let f1 = |u: f64, v: f64| (a - u) * (u - 1.0) * u - v;
    let f2 = |u: f64, v: f64| e * (b * u - v);
    let samples = 201usize;
    let mut face_margins = [f64::NEG_INFINITY; 4];
    for i in 0..samples {
        let s = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
        let v = s * r2;
        let u = s * r1;
        face_margins[0] = face_margins[0].max(f1(r1, v));
        face_margins[1] = face_margins[1].max(-f1(-r1, v));
        face_margins[2] = face_margins[2].max(f2(u, r2));
        face_margins[3] = face_margins[3].max(-f2(u, -r2));
    }
    let worst_margin = face_margins.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    Ok(FhnRectangle { r1, r2, face_margins, worst_margin, samples })
}

/// Population mass radius λ(t) = max{u0_mass, k₊(t)/c₋(t)}, with the
/// running extrema taken over stored time samples on [0, t] and traits.
pub fn population_lambda(model: &PopulationModel, u0_mass: f64, t: f64) -> Result<f64> {
    if !(u0_mass.is_finite() && u0_mass >= 0.0) {
        return Err(Error::Parameter(format!("initial mass must be >= 0, got {u0_mass}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Parameter(format!("time must be >= 0, got {t}")));
    }
    let c_minus = model.c_minus(t);
    if !(c_minus.is_finite() && c_minus > 0.0) {
        return Err(Error::Parameter(
            "population bound needs strictly positive competition (c_- > 0)".into(),
        ));
    }
    Ok(u0_mass.max(model.k_plus(t) / c_minus))
}
