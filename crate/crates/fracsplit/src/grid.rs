//! Periodic grids and spatial fields.
//!
//! A [`GridSpec`] describes an origin-centered periodic box of side `L`
//! per axis with an even number of points per axis, so the fractional
//! Laplacian acts exactly on the discrete Fourier modes 2πk/L,
//! k ∈ {−N/2, …, N/2−1}. A [`Field`] holds one state vector per grid
//! point; complex-valued models store (re, im) pairs as two real
//! components.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Periodic box: extent (side length) and point count per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    extents: Vec<f64>,
    points: Vec<usize>,
}

impl GridSpec {
    /// One axis per entry; every `points[i]` must be even and positive.
    pub fn new(extents: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        if extents.is_empty() || extents.len() != points.len() {
            return Err(Error::Parameter(format!(
                "grid needs matching, nonempty extent/point lists (got {} / {})",
                extents.len(),
                points.len()
            )));
        }
        if extents.len() > 3 {
            return Err(Error::Parameter(
                "grids with more than 3 axes are not supported".into(),
            ));
        }
        for (&l, &n) in extents.iter().zip(&points) {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Parameter(format!("grid extent must be positive, got {l}")));
            }
            if n == 0 || n % 2 != 0 {
                return Err(Error::Parameter(format!("grid points must be even and positive, got {n}")));
            }
        }
        Ok(Self { extents, points })
    }

    /// 1-D convenience constructor.
    pub fn line(extent: f64, points: usize) -> Result<Self> {
        Self::new(vec![extent], vec![points])
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extents[axis] / self.points[axis] as f64
    }

    /// Physical coordinate of index `i` on `axis`: x = −L/2 + i·L/N.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        -0.5 * self.extents[axis] + i as f64 * self.spacing(axis)
    }

    /// Coordinates of a row-major point index (axis 0 major).
    pub fn coords(&self, mut point: usize) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for axis in (0..d).rev() {
            let n = self.points[axis];
            out[axis] = self.coord(axis, point % n);
            point /= n;
        }
        out
    }

    /// Signed integer frequency of FFT bin `i` on an axis with `n` points.
    fn signed_freq(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Angular wavenumber ξ = 2πk/L of FFT bin `i` on `axis`.
    pub fn wavenumber(&self, axis: usize, i: usize) -> f64 {
        2.0 * PI * Self::signed_freq(i, self.points[axis]) as f64 / self.extents[axis]
    }

    /// |ξ| of the mode with row-major FFT index `idx`.
    pub fn mode_magnitude(&self, mut idx: usize) -> f64 {
        let d = self.dim();
        let mut sq = 0.0;
        for axis in (0..d).rev() {
            let n = self.points[axis];
            let xi = self.wavenumber(axis, idx % n);
            sq += xi * xi;
            idx /= n;
        }
        sq.sqrt()
    }
}

/// Spatial samples of the state vector on a periodic grid.
///
/// Layout: `values[point * state_dim + comp]` with the row-major point
/// index of the grid; this is also the on-disk snapshot layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    state_dim: usize,
    complex: bool,
    values: Vec<f64>,
}

impl Field {
    /// Zero-filled field with `state_dim` stored (real) components.
    ///
    /// For complex models the stored components are (re, im) pairs, so
    /// `state_dim` must be even when `complex` is set.
    pub fn zeros(grid: GridSpec, state_dim: usize, complex: bool) -> Result<Self> {
        if state_dim == 0 {
            return Err(Error::Parameter("state dimension must be positive".into()));
        }
        if complex && !state_dim.is_multiple_of(2) {
            return Err(Error::Parameter(
                "complex fields store (re, im) pairs; state dimension must be even".into(),
            ));
        }
        let n = grid.len() * state_dim;
        Ok(Self { grid, state_dim, complex, values: vec![0.0; n] })
    }

    /// Build from a closure mapping (coordinates, component) to a value.
    pub fn from_fn(
        grid: GridSpec,
        state_dim: usize,
        complex: bool,
        f: impl Fn(&[f64], usize) -> f64,
    ) -> Result<Self> {
        let mut field = Self::zeros(grid, state_dim, complex)?;
        let npts = field.grid.len();
        for p in 0..npts {
            let x = field.grid.coords(p);
            for c in 0..state_dim {
                field.values[p * state_dim + c] = f(&x, c);
            }
        }
        Ok(field)
    }

    /// Constant field with the given state vector.
    pub fn constant(grid: GridSpec, state: &[f64], complex: bool) -> Result<Self> {
        Self::from_fn(grid, state.len(), complex, |_, c| state[c])
    }

    /// Wrap raw values (row-major over grid, then components).
    pub fn from_values(
        grid: GridSpec,
        state_dim: usize,
        complex: bool,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != grid.len() * state_dim {
            return Err(Error::Data(format!(
                "value count {} does not match grid*state_dim = {}",
                values.len(),
                grid.len() * state_dim
            )));
        }
        let mut field = Self::zeros(grid, state_dim, complex)?;
        field.values = values;
        Ok(field)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn is_complex(&self) -> bool {
        self.complex
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// State vector at a row-major point index.
    pub fn state(&self, point: usize) -> &[f64] {
        &self.values[point * self.state_dim..(point + 1) * self.state_dim]
    }

    pub fn value(&self, point: usize, comp: usize) -> f64 {
        self.values[point * self.state_dim + comp]
    }

    pub fn set(&mut self, point: usize, comp: usize, v: f64) {
        self.values[point * self.state_dim + comp] = v;
    }

    /// Max absolute value over all points and components.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Max over points and components of |self − other|.
    pub fn sup_distance(&self, other: &Field) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::Data("field size mismatch in sup_distance".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.all_finite() {
            Ok(())
        } else {
            Err(Error::Data("field contains non-finite values".into()))
        }
    }
}
