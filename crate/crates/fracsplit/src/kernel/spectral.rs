//! Spectral application of the fractional heat semigroup on periodic grids.
//!
//! On the torus the semigroup acts exactly per Fourier mode:
//! (S(t)u)^(ξ) = e^{−σt|ξ|^{2β}} û(ξ). Multipliers are cached per
//! (σ, β, grid, t) since the splitting reuses a single t = h; the cache
//! is safe for concurrent readers with exclusive insertion.

use crate::grid::{Field, GridSpec};
use crate::kernel::KernelSpec;
use crate::{Error, Result};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

/// Per-mode factors m(t, ξ) = e^{−σt|ξ|^{2β}} in FFT index order.
#[derive(Debug, Clone)]
pub struct SpectralMultiplier {
    grid: GridSpec,
    sigma: f64,
    beta: f64,
    t: f64,
    factors: Arc<Vec<f64>>,
}

impl SpectralMultiplier {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Factors in row-major FFT index order (length = grid point count).
    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    pub fn factor(&self, idx: usize) -> f64 {
        self.factors[idx]
    }
}

#[derive(PartialEq, Eq, Hash)]
struct MultiplierKey {
    sigma: u64,
    beta: u64,
    t: u64,
    extents: Vec<u64>,
    points: Vec<usize>,
}

impl MultiplierKey {
    fn new(spec: &KernelSpec, grid: &GridSpec, t: f64) -> Self {
        Self {
            sigma: spec.sigma.to_bits(),
            beta: spec.beta.to_bits(),
            t: t.to_bits(),
            extents: grid.extents().iter().map(|l| l.to_bits()).collect(),
            points: grid.points().to_vec(),
        }
    }
}

fn multiplier_cache() -> &'static RwLock<HashMap<MultiplierKey, Arc<Vec<f64>>>> {
    static CACHE: OnceLock<RwLock<HashMap<MultiplierKey, Arc<Vec<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

const CACHE_CAP: usize = 512;

/// Build (or fetch from cache) the semigroup multiplier for time t ≥ 0.
///
/// |ξ|^{2β} is computed as (|ξ|²)^β, so β = 1 reproduces the exact
/// Gaussian multiplier e^{−σt|ξ|²}. t = 0 (or σ = 0) yields all-ones.
pub fn semigroup_multiplier(
    spec: &KernelSpec,
    grid: &GridSpec,
    t: f64,
) -> Result<SpectralMultiplier> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Parameter(format!("semigroup time must be >= 0, got {t}")));
    }
    if spec.dim != grid.dim() {
        return Err(Error::Parameter(format!(
            "kernel dim {} does not match grid dim {}",
            spec.dim,
            grid.dim()
        )));
    }
    let key = MultiplierKey::new(spec, grid, t);
    if let Some(hit) = multiplier_cache().read().unwrap().get(&key) {
        return Ok(SpectralMultiplier {
            grid: grid.clone(),
            sigma: spec.sigma,
            beta: spec.beta,
            t,
            factors: Arc::clone(hit),
        });
    }
    let n = grid.len();
    let mut factors = Vec::with_capacity(n);
    for idx in 0..n {
        let xi = grid.mode_magnitude(idx);
        let symbol = (xi * xi).powf(spec.beta);
        factors.push((-spec.sigma * t * symbol).exp());
    }
    let factors = Arc::new(factors);
    {
        let mut cache = multiplier_cache().write().unwrap();
        if cache.len() >= CACHE_CAP {
            cache.clear();
        }
        cache.insert(key, Arc::clone(&factors));
    }
    Ok(SpectralMultiplier {
        grid: grid.clone(),
        sigma: spec.sigma,
        beta: spec.beta,
        t,
        factors,
    })
}

fn fft_planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = fft_planner().lock().unwrap();
    if inverse {
        planner.plan_fft_inverse(len)
    } else {
        planner.plan_fft_forward(len)
    }
}

/// In-place multi-dimensional FFT over a row-major complex buffer.
fn fft_nd(buf: &mut [Complex64], grid: &GridSpec, inverse: bool) {
    let total = grid.len();
    debug_assert_eq!(buf.len(), total);
    let d = grid.dim();
    for axis in 0..d {
        let n = grid.points()[axis];
        let stride: usize = grid.points()[axis + 1..].iter().product();
        let fft = plan(n, inverse);
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let lines = total / n;
        for l in 0..lines {
            let pre = l / stride;
            let post = l % stride;
            let base = pre * n * stride + post;
            if stride == 1 {
                fft.process_with_scratch(&mut buf[base..base + n], &mut scratch);
            } else {
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = buf[base + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    buf[base + j * stride] = *v;
                }
            }
        }
    }
}

fn apply_multiplier_component(
    values: &[f64],
    grid: &GridSpec,
    factors: &[f64],
    stride: usize,
    offset: usize,
) -> Result<Vec<f64>> {
    let n = grid.len();
    let mut buf: Vec<Complex64> = (0..n)
        .map(|p| Complex64::new(values[p * stride + offset], 0.0))
        .collect();
    fft_nd(&mut buf, grid, false);
    for (v, m) in buf.iter_mut().zip(factors) {
        *v *= *m;
    }
    fft_nd(&mut buf, grid, true);
    let scale = 1.0 / n as f64;
    let sup: f64 = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = vec![0.0; n];
    let mut residue = 0.0f64;
    for (p, v) in buf.iter().enumerate() {
        out[p] = v.re * scale;
        residue = residue.max((v.im * scale).abs());
    }
    if residue > 1e-12 * (1.0 + sup) {
        return Err(Error::Data(format!(
            "imaginary residue {residue:.3e} exceeds tolerance after real transform"
        )));
    }
    Ok(out)
}

/// Apply the semigroup S(t) to every state component of a field.
///
/// Components are transformed independently (the multiplier is real, so
/// complex models stored as (re, im) pairs are handled exactly); t = 0
/// and σ = 0 return the field unchanged.
pub fn apply_semigroup(field: &Field, spec: &KernelSpec, t: f64) -> Result<Field> {
    field.ensure_finite()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Parameter(format!("semigroup time must be >= 0, got {t}")));
    }
    if t == 0.0 || spec.sigma == 0.0 {
        return Ok(field.clone());
    }
    let multiplier = semigroup_multiplier(spec, field.grid(), t)?;
    apply_multiplier(field, std::slice::from_ref(&multiplier))
}

/// Apply one multiplier per state component (len 1 broadcasts to all).
pub fn apply_multiplier(field: &Field, multipliers: &[SpectralMultiplier]) -> Result<Field> {
    let m = field.state_dim();
    if multipliers.is_empty() || (multipliers.len() != 1 && multipliers.len() != m) {
        return Err(Error::Parameter(format!(
            "need 1 or {m} multipliers, got {}",
            multipliers.len()
        )));
    }
    for mult in multipliers {
        if mult.grid() != field.grid() {
            return Err(Error::Parameter("multiplier grid does not match field grid".into()));
        }
    }
    let grid = field.grid().clone();
    let values = field.values();
    let components: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|c| {
            let mult = if multipliers.len() == 1 { &multipliers[0] } else { &multipliers[c] };
            apply_multiplier_component(values, &grid, mult.factors(), m, c)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Field::zeros(grid, m, field.is_complex())?;
    let out_values = out.values_mut();
    for (c, comp) in components.iter().enumerate() {
        for (p, v) in comp.iter().enumerate() {
            out_values[p * m + c] = *v;
        }
    }
    Ok(out)
}
