//! JSON run configuration for the CLI.
//!
//! One config document drives a whole experiment: grid, per-component
//! kernel specs, model parameters, splitting schedule, initial condition,
//! monitors, and the convergence-study section. Population kernels may be
//! given inline or as CSV file paths resolved relative to the config file.

use crate::asymptotics::AsymptoteProbe;
use crate::grid::{Field, GridSpec};
use crate::kernel::KernelSpec;
use crate::reaction::{FlowConfig, PopulationModel, ReactionModel, TimeTable};
use crate::regions::{self, RegionFamily, TimeFn};
use crate::splitting::{Monitors, SplitSchedule};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    pub extent: Vec<f64>,
    pub points: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelConfig {
    pub sigma: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub h: f64,
    pub steps: usize,
}

/// Table data inline or in a CSV file (first column time, then values).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableSource {
    File { file: PathBuf },
    InlineVector { times: Vec<f64>, values: Vec<Vec<f64>> },
    InlineMatrix { times: Vec<f64>, values: Vec<Vec<Vec<f64>>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ModelConfig {
    Fisher {
        chi: f64,
    },
    Cgl {
        a: f64,
        b: f64,
    },
    Fhn {
        a: f64,
        e: f64,
        b: f64,
    },
    Population {
        #[serde(default)]
        nodes: Option<Vec<f64>>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
        growth: TableSource,
        mutation: TableSource,
        competition: TableSource,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ScalarInitConfig {
    Constant { value: f64 },
    /// offset + amplitude · Π_axis cos(2π · mode_a · x_a / L_a)
    Cosine { offset: f64, amplitude: f64, modes: Vec<i64> },
    /// background + amplitude · Π_axis cos²(π x_a / (L_a/2)) on the
    /// middle half of the box, background outside.
    Bump { background: f64, amplitude: f64 },
    /// Periodic double front: `high` plateau on the middle half, `low`
    /// outside, logistic transitions of the given width (1-D only).
    Front { low: f64, high: f64, width: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum InitialConfig {
    Constant { values: Vec<f64> },
    Components { fields: Vec<ScalarInitConfig> },
    /// Complex field with the given modulus and i.i.d. uniform phases.
    RandomPhase { modulus: f64 },
    /// Raw little-endian float64 snapshot file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum RegionConfig {
    /// [a(t), b(t)] Fisher envelopes; χ comes from the model.
    FisherEnvelope {
        a0: f64,
        b0: f64,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    /// Ball with radius λ(t) = (λ0 + a·t)·e^{b·t} (constant bounds).
    BallGrowth {
        lambda0: f64,
        a: f64,
        b: f64,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    Rectangle {
        bounds: Vec<f64>,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    /// Rectangle generated from the FHN model parameters.
    FhnRectangle {
        #[serde(default)]
        tolerance: Option<f64>,
    },
    /// Positive-mass ball with λ(t) from the population model and the
    /// initial field's worst-case trait mass.
    PopulationMass {
        #[serde(default)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoteConfig {
    #[serde(default = "default_band_fraction")]
    pub band_fraction: f64,
    pub background: Vec<f64>,
}

fn default_band_fraction() -> f64 {
    crate::asymptotics::DEFAULT_BAND_FRACTION
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MonitorsConfig {
    #[serde(default)]
    pub region: Option<RegionConfig>,
    /// Treat a failed region audit as a fatal run error (exit code 4).
    #[serde(default)]
    pub region_fatal: bool,
    #[serde(default)]
    pub asymptote: Option<AsymptoteConfig>,
    #[serde(default)]
    pub record_half_steps: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergeConfig {
    pub total_time: f64,
    pub h_list: Vec<f64>,
}

fn default_flow() -> FlowConfig {
    FlowConfig::default()
}

/// The single config document driving every CLI experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub kernel: Vec<KernelConfig>,
    pub model: ModelConfig,
    pub schedule: ScheduleConfig,
    pub initial: InitialConfig,
    #[serde(default = "default_flow")]
    pub flow: FlowConfig,
    #[serde(default)]
    pub monitors: MonitorsConfig,
    #[serde(default)]
    pub converge: Option<ConvergeConfig>,
    #[serde(default)]
    pub seed: u64,
}

/// Everything needed to run: validated domain objects built from a config.
pub struct RunPlan {
    pub config: RunConfig,
    pub grid: GridSpec,
    pub specs: Vec<KernelSpec>,
    pub model: ReactionModel,
    pub schedule: SplitSchedule,
    pub initial: Field,
    pub flow: FlowConfig,
    pub monitors: Monitors,
    pub region_fatal: bool,
    pub probe: Option<AsymptoteProbe>,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Load from a file; relative table paths resolve against its parent.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.resolve_paths(base)?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) -> Result<()> {
        let fix = |p: &mut PathBuf| -> Result<()> {
            if p.is_relative() {
                *p = base.join(&*p);
            }
            if !p.exists() {
                return Err(Error::Config(format!("referenced file {} does not exist", p.display())));
            }
            Ok(())
        };
        if let ModelConfig::Population { growth, mutation, competition, .. } = &mut self.model {
            for src in [growth, mutation, competition] {
                if let TableSource::File { file } = src {
                    fix(file)?;
                }
            }
        }
        if let InitialConfig::File { path } = &mut self.initial {
            fix(path)?;
        }
        Ok(())
    }

    /// Validate and build all domain objects. `seed_override` takes
    /// precedence over the config seed (CLI --seed).
    pub fn build(&self, seed_override: Option<u64>) -> Result<RunPlan> {
        let grid = GridSpec::new(self.grid.extent.clone(), self.grid.points.clone())?;
        let model = self.build_model()?;
        let dim = grid.dim();

        let comps = model.diffusion_components();
        if self.kernel.is_empty() || (self.kernel.len() != 1 && self.kernel.len() != comps) {
            return Err(Error::Config(format!(
                "kernel list must have 1 or {comps} entries, got {}",
                self.kernel.len()
            )));
        }
        let specs: Vec<KernelSpec> = self
            .kernel
            .iter()
            .map(|k| KernelSpec::new(k.sigma, k.beta, dim))
            .collect::<Result<_>>()?;

        let schedule = SplitSchedule::new(self.schedule.h, self.schedule.steps)?;
        self.flow.validate()?;
        let seed = seed_override.unwrap_or(self.seed);
        let initial = self.build_initial(&grid, &model, seed)?;
        let (monitors, probe, region_fatal) = self.build_monitors(&model, &initial)?;

        Ok(RunPlan {
            config: self.clone(),
            grid,
            specs,
            model,
            schedule,
            initial,
            flow: self.flow,
            monitors,
            region_fatal,
            probe,
            seed,
        })
    }

    fn build_model(&self) -> Result<ReactionModel> {
        match &self.model {
            ModelConfig::Fisher { chi } => ReactionModel::fisher(*chi),
            ModelConfig::Cgl { a, b } => ReactionModel::cgl(*a, *b),
            ModelConfig::Fhn { a, e, b } => ReactionModel::fitzhugh_nagumo(*a, *e, *b),
            ModelConfig::Population { nodes, weights, growth, mutation, competition } => {
                let (default_nodes, default_weights) = PopulationModel::uniform_nodes(32);
                let nodes = nodes.clone().unwrap_or(default_nodes);
                let weights = weights.clone().unwrap_or_else(|| {
                    if nodes.len() == default_weights.len() {
                        default_weights
                    } else {
                        vec![1.0 / nodes.len() as f64; nodes.len()]
                    }
                });
                let m = nodes.len();
                let growth = load_vector_table(growth, m)?;
                let mutation = load_matrix_table(mutation, m)?;
                let competition = load_matrix_table(competition, m)?;
                Ok(ReactionModel::Population(PopulationModel::new(
                    nodes,
                    weights,
                    growth,
                    mutation,
                    competition,
                )?))
            }
        }
    }

    fn build_initial(&self, grid: &GridSpec, model: &ReactionModel, seed: u64) -> Result<Field> {
        let m = model.state_dim();
        let complex = model.is_complex();
        match &self.initial {
            InitialConfig::Constant { values } => {
                if values.len() != m {
                    return Err(Error::Config(format!(
                        "constant initial condition has {} values but model expects {m}",
                        values.len()
                    )));
                }
                Field::constant(grid.clone(), values, complex)
            }
            InitialConfig::Components { fields } => {
                if fields.len() != m {
                    return Err(Error::Config(format!(
                        "initial condition lists {} components but model expects {m}",
                        fields.len()
                    )));
                }
                Field::from_fn(grid.clone(), m, complex, |x, c| scalar_init(&fields[c], grid, x))
            }
            InitialConfig::RandomPhase { modulus } => {
                if !complex || m != 2 {
                    return Err(Error::Config(
                        "random-phase initial data applies to complex scalar models".into(),
                    ));
                }
                if !(modulus.is_finite() && *modulus >= 0.0) {
                    return Err(Error::Config(format!("modulus must be >= 0, got {modulus}")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut field = Field::zeros(grid.clone(), 2, true)?;
                for p in 0..grid.len() {
                    let phase: f64 = rng.gen_range(0.0..(2.0 * PI));
                    field.set(p, 0, modulus * phase.cos());
                    field.set(p, 1, modulus * phase.sin());
                }
                Ok(field)
            }
            InitialConfig::File { path } => {
                let field = crate::io::read_field(path, grid.clone(), m, complex)?;
                field.ensure_finite()?;
                Ok(field)
            }
        }
    }

    fn build_monitors(
        &self,
        model: &ReactionModel,
        initial: &Field,
    ) -> Result<(Monitors, Option<AsymptoteProbe>, bool)> {
        let mut monitors = Monitors {
            record_half_steps: self.monitors.record_half_steps,
            ..Default::default()
        };
        if let Some(region_cfg) = &self.monitors.region {
            monitors.regions.push(build_region(region_cfg, model, initial)?);
        }
        let probe = match &self.monitors.asymptote {
            Some(a) => {
                let probe = AsymptoteProbe::new(a.band_fraction, a.background.clone())?;
                monitors.asymptote = Some(probe.clone());
                Some(probe)
            }
            None => None,
        };
        Ok((monitors, probe, self.monitors.region_fatal))
    }
}

fn scalar_init(cfg: &ScalarInitConfig, grid: &GridSpec, x: &[f64]) -> f64 {
    match cfg {
        ScalarInitConfig::Constant { value } => *value,
        ScalarInitConfig::Cosine { offset, amplitude, modes } => {
            let mut v = *amplitude;
            for (axis, &mode) in modes.iter().enumerate().take(grid.dim()) {
                let l = grid.extents()[axis];
                v *= (2.0 * PI * mode as f64 * x[axis] / l).cos();
            }
            offset + v
        }
        ScalarInitConfig::Bump { background, amplitude } => {
            let mut v = *amplitude;
            for (axis, &l) in grid.extents().iter().enumerate() {
                if x[axis].abs() < l / 4.0 {
                    let c = (PI * x[axis] / (l / 2.0)).cos();
                    v *= c * c;
                } else {
                    v = 0.0;
                }
            }
            background + v
        }
        ScalarInitConfig::Front { low, high, width } => {
            let l = grid.extents()[0];
            let w = width.max(1e-12);
            let up = 1.0 / (1.0 + ((-(x[0] + l / 4.0)) / w).exp());
            let down = 1.0 / (1.0 + ((x[0] - l / 4.0) / w).exp());
            low + (high - low) * up * down
        }
    }
}

fn build_region(
    cfg: &RegionConfig,
    model: &ReactionModel,
    initial: &Field,
) -> Result<RegionFamily> {
    let with_tol = |region: RegionFamily, tol: &Option<f64>| match tol {
        Some(t) => region.with_tolerance(*t),
        None => region,
    };
    match cfg {
        RegionConfig::FisherEnvelope { a0, b0, tolerance } => {
            let chi = match model {
                ReactionModel::Fisher { chi } => *chi,
                _ => {
                    return Err(Error::Config(
                        "fisher-envelope region requires the fisher model".into(),
                    ))
                }
            };
            let lower = TimeFn::fisher_lower(*a0, chi)?;
            let upper = TimeFn::fisher_upper(*b0, chi)?;
            Ok(with_tol(RegionFamily::interval(lower, upper), tolerance))
        }
        RegionConfig::Ball { center, radius, tolerance } => {
            if !(radius.is_finite() && *radius >= 0.0) {
                return Err(Error::Config(format!("ball radius must be >= 0, got {radius}")));
            }
            Ok(with_tol(
                RegionFamily::ball(center.clone(), TimeFn::constant(*radius)),
                tolerance,
            ))
        }
        RegionConfig::BallGrowth { lambda0, a, b, tolerance } => {
            let (l0, a, b) = (*lambda0, *a, *b);
            regions::ball_family_lambda(l0, |_| a, |_| b, 1.0, 16)?; // validate once
            let radius =
                TimeFn::from_fn(move |t| {
                    regions::ball_family_lambda(l0, |_| a, |_| b, t, 256).expect("validated")
                });
            let dim = initial.state_dim();
            Ok(with_tol(RegionFamily::ball(vec![0.0; dim], radius), tolerance))
        }
        RegionConfig::Rectangle { bounds, tolerance } => {
            Ok(with_tol(RegionFamily::rectangle(bounds.clone())?, tolerance))
        }
        RegionConfig::FhnRectangle { tolerance } => {
            let rect = match model {
                ReactionModel::FitzHughNagumo { a, e, b } => regions::fhn_rectangle(*a, *e, *b)?,
                _ => {
                    return Err(Error::Config(
                        "fhn-rectangle region requires the fhn model".into(),
                    ))
                }
            };
            Ok(with_tol(RegionFamily::rectangle(vec![rect.r1, rect.r2])?, tolerance))
        }
        RegionConfig::PopulationMass { tolerance } => {
            let pop = match model {
                ReactionModel::Population(p) => p.clone(),
                _ => {
                    return Err(Error::Config(
                        "population-mass region requires the population model".into(),
                    ))
                }
            };
            let mut u0_mass = 0.0f64;
            for p in 0..initial.grid().len() {
                u0_mass = u0_mass.max(pop.mass(initial.state(p)));
            }
            let weights = pop.weights().to_vec();
            let radius = TimeFn::population_lambda(pop, u0_mass)?;
            Ok(with_tol(RegionFamily::positive_mass_ball(weights, radius)?, tolerance))
        }
    }
}

fn load_vector_table(src: &TableSource, m: usize) -> Result<TimeTable<Vec<f64>>> {
    match src {
        TableSource::InlineVector { times, values } => {
            for row in values {
                if row.len() != m {
                    return Err(Error::Config(format!(
                        "table row has {} entries, expected {m}",
                        row.len()
                    )));
                }
            }
            TimeTable::new(times.clone(), values.clone())
        }
        TableSource::InlineMatrix { .. } => {
            Err(Error::Config("expected a vector-valued table, got a matrix table".into()))
        }
        TableSource::File { file } => {
            let (times, rows) = read_csv_rows(file, m)?;
            TimeTable::new(times, rows)
        }
    }
}

fn load_matrix_table(src: &TableSource, m: usize) -> Result<TimeTable<Vec<f64>>> {
    match src {
        TableSource::InlineMatrix { times, values } => {
            let mut flat = Vec::with_capacity(values.len());
            for mat in values {
                if mat.len() != m || mat.iter().any(|row| row.len() != m) {
                    return Err(Error::Config(format!("matrix table entries must be {m}x{m}")));
                }
                flat.push(mat.iter().flatten().copied().collect());
            }
            TimeTable::new(times.clone(), flat)
        }
        TableSource::InlineVector { times, values } => {
            // A flat m·m row per sample is accepted as well.
            for row in values {
                if row.len() != m * m {
                    return Err(Error::Config(format!(
                        "flat matrix row has {} entries, expected {}",
                        row.len(),
                        m * m
                    )));
                }
            }
            TimeTable::new(times.clone(), values.clone())
        }
        TableSource::File { file } => {
            let (times, rows) = read_csv_rows(file, m * m)?;
            TimeTable::new(times, rows)
        }
    }
}

/// CSV rows "t,v0,v1,...": returns times and value rows of width `width`.
fn read_csv_rows(path: &Path, width: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',');
        let t: f64 = fields
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Config(format!("{}:{}: bad time field", path.display(), lineno + 1)))?;
        let vals: Vec<f64> = fields
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        if vals.len() != width {
            return Err(Error::Config(format!(
                "{}:{}: expected {} values, got {}",
                path.display(),
                lineno + 1,
                width,
                vals.len()
            )));
        }
        times.push(t);
        rows.push(vals);
    }
    Ok((times, rows))
}
