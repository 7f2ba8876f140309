//! TOML experiment configuration and the built-in presets.
//!
//! A file is layered over the built-in defaults, or over `preset = "<name>"`
//! when given. Tables merge key by key; arrays and scalars replace. Changing
//! `disturbance.kind` replaces the whole disturbance table.

use std::path::{Path, PathBuf};

use nalgebra::{DVector, RowDVector};
use serde::Deserialize;
use toml::{Table, Value};

use crate::beam_model::{nondimensionalize, BeamParams, ModeIndex, PhysicalBeam};
use crate::error::{Error, Result};
use crate::modal_system::{assemble, residual_block, DampingModel, ModalSystem, Placement};
use crate::signals::{DisturbanceSpec, Harmonic, NoiseSpec, NoiseWaveform};
use crate::simulator::{auto_dt, random_unit_state, step_cap, SimConfig, SpilloverCoupling};
use crate::synthesis::{GainSet, PolePattern};

const DEFAULTS: &str = r#"
name = "custom"
modes = 3
seed = 1
damping = "structural"

[placement]
patch = [0.0, 0.1]
sensor = 0.095
weights = [0.0, 1.0]

[disturbance]
kind = "polyharmonic"
driven_modes = 3
harmonics = 11
bound = 11.0

[noise]
waveform = "uniform-hold"
bound = 0.01

[gains]
strategy = "tune"
observer_grid = [34.0]
spread = 1.0

[simulation]
t_final = 20.0
residual_modes = 3
coupling = "paper-mode"
record_every = 1
"#;

const PRESETS: &[(&str, &str)] = &[
    ("fig1", "name = \"fig1\"\n"),
    ("fig2", "name = \"fig2\"\n[gains]\nobserver_grid = [64.0]\n"),
    (
        "fig3",
        "name = \"fig3\"\n[sweep]\nparameter = \"sensor\"\nvalues = [0.095, 0.6, 0.98]\n",
    ),
    ("fig4", "name = \"fig4\"\n[placement]\nsensor = 0.98\n"),
    ("fig5", "name = \"fig5\"\n[placement]\nsensor = 0.6\n"),
    ("fig6", "name = \"fig6\"\n[placement]\npatch = [0.0, 1e-8]\nsensor = 0.6\n"),
    (
        "fig7",
        "name = \"fig7\"\nmodes = 5\n[placement]\nsensor = 0.98\n[simulation]\nt_final = 40.0\n",
    ),
    (
        "residual-smooth",
        "name = \"residual-smooth\"\n\
         [disturbance]\nkind = \"self-resonant\"\nprofile = \"smooth\"\nf0 = 11.0\n\
         [noise]\nbound = 0.0\n\
         [simulation]\nt_final = 40.0\nresidual_modes = 8\nrecord_every = 20\n",
    ),
    (
        "residual-uniform",
        "name = \"residual-uniform\"\n\
         [disturbance]\nkind = \"self-resonant\"\nprofile = \"uniform\"\nf0 = 11.0\n\
         [noise]\nbound = 0.0\n\
         [simulation]\nt_final = 40.0\nresidual_modes = 8\nrecord_every = 20\n",
    ),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    preset: Option<String>,
    name: String,
    modes: usize,
    seed: u64,
    damping: DampingModel,
    #[serde(default)]
    beam: Option<RawBeam>,
    #[serde(default)]
    physical: Option<PhysicalBeam>,
    placement: RawPlacement,
    disturbance: RawDisturbance,
    noise: RawNoise,
    gains: RawGains,
    simulation: RawSimulation,
    #[serde(default)]
    sweep: Option<RawSweep>,
    #[serde(default)]
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeam {
    a1: Option<f64>,
    a2: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlacement {
    patch: [f64; 2],
    sensor: f64,
    weights: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForceProfile {
    /// `||f_k|| = f0`.
    Uniform,
    /// `||f_k|| = f0 / k^2`.
    Smooth,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawDisturbance {
    None,
    Polyharmonic {
        driven_modes: usize,
        harmonics: usize,
        bound: f64,
    },
    Constant {
        forces: Vec<f64>,
    },
    SelfResonant {
        profile: ForceProfile,
        f0: f64,
        first: Option<usize>,
        last: Option<usize>,
    },
    Explicit {
        bound: f64,
        modes: Vec<Vec<Harmonic>>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum RawWaveform {
    UniformHold,
    Sinusoidal,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    waveform: RawWaveform,
    bound: f64,
    hold: Option<f64>,
    frequency: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum RawStrategy {
    Tune,
    Explicit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGains {
    strategy: RawStrategy,
    observer_grid: Vec<f64>,
    controller_grid: Option<Vec<f64>>,
    spread: f64,
    k: Option<Vec<f64>>,
    l: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    t_final: f64,
    dt: Option<f64>,
    residual_modes: usize,
    coupling: SpilloverCoupling,
    record_every: usize,
    z0: Option<Vec<f64>>,
    zhat0: Option<Vec<f64>>,
    residual0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    Sensor,
    PatchRight,
    ObserverRate,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Sensor => "sensor",
            SweepParameter::PatchRight => "patch_right",
            SweepParameter::ObserverRate => "observer_rate",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: SweepParameter,
    values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseKind {
    /// Hold interval; `None` means ten integration steps.
    UniformHold(Option<f64>),
    Sinusoidal(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSettings {
    pub bound: f64,
    pub kind: NoiseKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GainStrategy {
    Explicit {
        k: RowDVector<f64>,
        l: DVector<f64>,
    },
    Tune {
        observer_grid: Vec<f64>,
        controller_grid: Option<Vec<f64>>,
        pattern: PolePattern,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSettings {
    pub t_final: f64,
    pub dt: Option<f64>,
    pub residual_modes: usize,
    pub coupling: SpilloverCoupling,
    pub record_every: usize,
    pub z0: Option<Vec<f64>>,
    pub zhat0: Option<Vec<f64>>,
    pub residual0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Fully validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub params: BeamParams,
    pub modes: usize,
    pub placement: Placement,
    pub damping: DampingModel,
    pub disturbance: DisturbanceSpec,
    pub noise: NoiseSettings,
    pub gains: GainStrategy,
    pub simulation: SimulationSettings,
    pub sweep: Option<SweepSpec>,
    pub output_dir: Option<PathBuf>,
}

fn base_table(src: &str) -> Table {
    src.parse::<Table>().expect("built-in TOML is valid")
}

fn merge(base: &mut Table, over: Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => {
                let kind_changed = key == "disturbance" && o.get("kind").is_some_and(|k| Some(k) != b.get("kind"));
                if kind_changed {
                    *b = o;
                } else {
                    merge(b, o);
                }
            }
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// 1-based line of `key` (dotted path, optional `[i]` suffixes) in `src`.
pub fn line_of(src: &str, key: &str) -> Option<usize> {
    let path: String = key.split('[').next().unwrap_or(key).to_string();
    let mut header = String::new();
    let mut header_line = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.starts_with('[') {
            header = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if header == path {
                header_line = Some(i + 1);
            }
            continue;
        }
        if let Some((k, _)) = line.split_once('=') {
            let k = k.trim().trim_matches('"');
            let full = if header.is_empty() { k.to_string() } else { format!("{header}.{k}") };
            if full == path || path.starts_with(&format!("{full}.")) {
                return Some(i + 1);
            }
        }
    }
    header_line
}

fn line_at(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    fn err(&self, key: &str, msg: impl Into<String>) -> Error {
        Error::Config {
            key: key.to_string(),
            line: line_of(self.src, key),
            msg: msg.into(),
        }
    }

    fn wrap<T>(&self, key: &str, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::Config { .. } => e,
            other => self.err(key, other.to_string()),
        })
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::Config {
        key: "file".into(),
        line: None,
        msg: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&src)
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    parse_config(&format!("preset = \"{name}\"\n"))
}

pub fn parse_config(src: &str) -> Result<ExperimentConfig> {
    let user: Table = src.parse().map_err(|e: toml::de::Error| Error::Config {
        key: "syntax".into(),
        line: e.span().map(|s| line_at(src, s.start)),
        msg: e.message().to_string(),
    })?;
    let ctx = Ctx { src };
    let mut table = base_table(DEFAULTS);
    if let Some(p) = user.get("preset") {
        let name = p.as_str().ok_or_else(|| ctx.err("preset", "preset must be a string"))?;
        let (_, body) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| ctx.err("preset", format!("unknown preset {name:?}; known: {}", preset_names().join(", "))))?;
        merge(&mut table, base_table(body));
    }
    merge(&mut table, user);
    let raw: RawConfig = serde_path_to_error::deserialize(Value::Table(table)).map_err(|e| {
        let key = e.path().to_string();
        ctx.err(&key, e.into_inner().to_string())
    })?;
    resolve(raw, &ctx)
}

fn resolve(raw: RawConfig, ctx: &Ctx) -> Result<ExperimentConfig> {
    let _ = raw.preset;
    let n = raw.modes;
    if n == 0 {
        return Err(ctx.err("modes", "at least one controlled mode is required"));
    }

    let mut params = match &raw.physical {
        Some(phys) => ctx.wrap("physical", nondimensionalize(phys))?,
        None => BeamParams::dimensionless(0.01, 1.0)?,
    };
    if let Some(b) = &raw.beam {
        if let Some(a1) = b.a1 {
            params.a1 = a1;
        }
        if let Some(a2) = b.a2 {
            params.a2 = a2;
        }
        if raw.physical.is_none() {
            params = ctx.wrap("beam", BeamParams::dimensionless(params.a1, params.a2))?;
        }
    }
    if !(params.a1.is_finite() && params.a1 > 0.0) {
        return Err(ctx.err("beam.a1", format!("a1 must be > 0, got {}", params.a1)));
    }
    if !(params.a2.is_finite() && params.a2 >= 0.0) {
        return Err(ctx.err("beam.a2", format!("a2 must be >= 0, got {}", params.a2)));
    }

    let [x1, x2] = raw.placement.patch;
    if !(x1 < x2) {
        return Err(ctx.err("placement.patch", format!("patch needs x1 < x2, got [{x1}, {x2}]")));
    }
    if !(0.0..=1.0).contains(&x1) || !(0.0..=1.0).contains(&x2) {
        return Err(ctx.err("placement.patch", format!("patch must lie in [0, 1], got [{x1}, {x2}]")));
    }
    let x0 = raw.placement.sensor;
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(ctx.err("placement.sensor", format!("sensor must lie in (0, 1), got {x0}")));
    }
    let [s1, s2] = raw.placement.weights;
    let placement = Placement {
        patch_left: x1,
        patch_right: x2,
        sensor: x0,
        weight_s1: s1,
        weight_s2: s2,
    };
    ctx.wrap("placement.weights", placement.validate())?;

    let r = raw.simulation.residual_modes;
    let disturbance = ctx.wrap(
        "disturbance",
        match raw.disturbance {
            RawDisturbance::None => Ok(DisturbanceSpec::none()),
            RawDisturbance::Polyharmonic {
                driven_modes,
                harmonics,
                bound,
            } => DisturbanceSpec::polyharmonic(&params, driven_modes, harmonics, bound),
            RawDisturbance::Constant { forces } => DisturbanceSpec::constant(&forces),
            RawDisturbance::SelfResonant { profile, f0, first, last } => {
                let first = first.unwrap_or(n + 1);
                let last = last.unwrap_or(n + r);
                if first == 0 || last < first {
                    return Err(ctx.err("disturbance.first", format!("empty mode range {first}..={last}")));
                }
                DisturbanceSpec::self_resonant(&params, raw.damping, first, last, |k| match profile {
                    ForceProfile::Uniform => f0,
                    ForceProfile::Smooth => f0 / (k * k) as f64,
                })
            }
            RawDisturbance::Explicit { bound, modes } => DisturbanceSpec::new(modes, bound, false),
        },
    )?;

    let noise = NoiseSettings {
        bound: raw.noise.bound,
        kind: match raw.noise.waveform {
            RawWaveform::UniformHold => {
                if raw.noise.frequency.is_some() {
                    return Err(ctx.err("noise.frequency", "frequency only applies to the sinusoidal waveform"));
                }
                NoiseKind::UniformHold(raw.noise.hold)
            }
            RawWaveform::Sinusoidal => {
                if raw.noise.hold.is_some() {
                    return Err(ctx.err("noise.hold", "hold only applies to the uniform-hold waveform"));
                }
                NoiseKind::Sinusoidal(
                    raw.noise
                        .frequency
                        .ok_or_else(|| ctx.err("noise.frequency", "sinusoidal noise needs a frequency"))?,
                )
            }
        },
    };
    let probe = NoiseSpec {
        bound: noise.bound,
        seed: raw.seed,
        waveform: match noise.kind {
            NoiseKind::UniformHold(h) => NoiseWaveform::UniformRandomHold { hold: h.unwrap_or(1.0) },
            NoiseKind::Sinusoidal(f) => NoiseWaveform::Sinusoidal { frequency: f },
        },
    };
    ctx.wrap("noise", probe.validate())?;

    let gains = match raw.gains.strategy {
        RawStrategy::Explicit => {
            let k = raw.gains.k.ok_or_else(|| ctx.err("gains.k", "explicit gains need k"))?;
            let l = raw.gains.l.ok_or_else(|| ctx.err("gains.l", "explicit gains need l"))?;
            if k.len() != 2 * n {
                return Err(ctx.err("gains.k", format!("k needs {} entries, got {}", 2 * n, k.len())));
            }
            if l.len() != 2 * n {
                return Err(ctx.err("gains.l", format!("l needs {} entries, got {}", 2 * n, l.len())));
            }
            GainStrategy::Explicit {
                k: RowDVector::from_vec(k),
                l: DVector::from_vec(l),
            }
        }
        RawStrategy::Tune => {
            if raw.gains.k.is_some() || raw.gains.l.is_some() {
                return Err(ctx.err("gains.strategy", "k and l are only used with strategy = \"explicit\""));
            }
            let positive = |v: &[f64]| v.iter().all(|x| x.is_finite() && *x > 0.0);
            if raw.gains.observer_grid.is_empty() || !positive(&raw.gains.observer_grid) {
                return Err(ctx.err("gains.observer_grid", "observer grid must be a non-empty list of positive rates"));
            }
            if let Some(g) = &raw.gains.controller_grid {
                if g.is_empty() || !positive(g) {
                    return Err(ctx.err(
                        "gains.controller_grid",
                        "controller grid must be a non-empty list of positive rates",
                    ));
                }
            }
            if !(raw.gains.spread.is_finite() && raw.gains.spread >= 0.0) {
                return Err(ctx.err("gains.spread", "spread must be >= 0"));
            }
            GainStrategy::Tune {
                observer_grid: raw.gains.observer_grid,
                controller_grid: raw.gains.controller_grid,
                pattern: PolePattern {
                    spread: raw.gains.spread,
                },
            }
        }
    };

    let s = raw.simulation;
    if !(s.t_final.is_finite() && s.t_final >= 0.0) {
        return Err(ctx.err("simulation.t_final", format!("t_final must be >= 0, got {}", s.t_final)));
    }
    if let Some(dt) = s.dt {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ctx.err("simulation.dt", format!("dt must be > 0, got {dt}")));
        }
        if s.t_final > 0.0 && s.t_final < dt {
            return Err(ctx.err("simulation.t_final", "t_final must be at least dt"));
        }
    }
    if s.record_every == 0 {
        return Err(ctx.err("simulation.record_every", "record_every must be >= 1"));
    }
    for (key, v, len) in [
        ("simulation.z0", &s.z0, 2 * n),
        ("simulation.zhat0", &s.zhat0, 2 * n),
        ("simulation.residual0", &s.residual0, 2 * r),
    ] {
        if let Some(v) = v {
            if v.len() != len {
                return Err(ctx.err(key, format!("expected {len} entries, got {}", v.len())));
            }
        }
    }

    let sweep = match raw.sweep {
        Some(sw) => {
            if sw.values.is_empty() {
                return Err(ctx.err("sweep.values", "sweep needs at least one value"));
            }
            Some(SweepSpec {
                parameter: sw.parameter,
                values: sw.values,
            })
        }
        None => None,
    };

    let cfg = ExperimentConfig {
        name: raw.name,
        seed: raw.seed,
        params,
        modes: n,
        placement,
        damping: raw.damping,
        disturbance,
        noise,
        gains,
        simulation: SimulationSettings {
            t_final: s.t_final,
            dt: s.dt,
            residual_modes: r,
            coupling: s.coupling,
            record_every: s.record_every,
            z0: s.z0,
            zhat0: s.zhat0,
            residual0: s.residual0,
        },
        sweep,
        output_dir: raw.output.and_then(|o| o.dir),
    };
    if let Some(sw) = &cfg.sweep {
        for &v in &sw.values {
            cfg.with_sweep_value(sw.parameter, v).map_err(|e| ctx.err("sweep.values", e.to_string()))?;
        }
    }
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn system(&self) -> Result<ModalSystem> {
        assemble(&self.params, self.modes, &self.placement, self.damping)
    }

    /// Copy with one sweep parameter replaced.
    pub fn with_sweep_value(&self, parameter: SweepParameter, value: f64) -> Result<Self> {
        let mut c = self.clone();
        match parameter {
            SweepParameter::Sensor => c.placement.sensor = value,
            SweepParameter::PatchRight => c.placement.patch_right = value,
            SweepParameter::ObserverRate => match &mut c.gains {
                GainStrategy::Tune { observer_grid, .. } => {
                    if !(value.is_finite() && value > 0.0) {
                        return Err(Error::InvalidInput(format!("observer rate must be > 0, got {value}")));
                    }
                    *observer_grid = vec![value];
                }
                GainStrategy::Explicit { .. } => {
                    return Err(Error::InvalidInput("observer-rate sweeps need strategy = \"tune\"".into()));
                }
            },
        }
        c.placement.validate()?;
        Ok(c)
    }

    /// Step size actually used: the configured one, or the largest step
    /// dividing `t_final` that respects the stability cap.
    pub fn step(&self, system: &ModalSystem, gains: &GainSet) -> Result<f64> {
        if let Some(dt) = self.simulation.dt {
            return Ok(dt);
        }
        let block = residual_block(
            &self.params,
            &self.placement,
            self.modes,
            self.simulation.residual_modes,
            self.damping,
        )?;
        let cap = step_cap(system, gains, &block, self.simulation.coupling)?;
        Ok(auto_dt(self.simulation.t_final, cap))
    }

    pub fn noise_spec(&self, dt: f64) -> NoiseSpec {
        NoiseSpec {
            bound: self.noise.bound,
            seed: self.seed,
            waveform: match self.noise.kind {
                NoiseKind::UniformHold(h) => NoiseWaveform::UniformRandomHold {
                    hold: h.unwrap_or(10.0 * dt),
                },
                NoiseKind::Sinusoidal(f) => NoiseWaveform::Sinusoidal { frequency: f },
            },
        }
    }

    /// Initial plant state defaults to a seeded unit vector; observer and
    /// residual states default to zero.
    pub fn sim_config(&self, system: &ModalSystem, gains: &GainSet) -> Result<SimConfig> {
        let s = &self.simulation;
        let dt = self.step(system, gains)?;
        let mut cfg = SimConfig::new(system, s.t_final, dt, s.residual_modes);
        cfg.coupling = s.coupling;
        cfg.record_every = s.record_every;
        cfg.z0 = match &s.z0 {
            Some(v) => DVector::from_column_slice(v),
            None => random_unit_state(system.dim(), self.seed),
        };
        if let Some(v) = &s.zhat0 {
            cfg.zhat0 = DVector::from_column_slice(v);
        }
        if let Some(v) = &s.residual0 {
            cfg.residual0 = v.clone();
        }
        Ok(cfg)
    }

    /// `sup ||F_N||` used when tuning.
    pub fn force_bound(&self) -> f64 {
        self.disturbance.vector_bound(&self.params, self.modes)
    }

    /// A priori `sup |r + xi|`: noise bound plus the per-mode residual bounds
    /// at the true under-damped rate, weighted by the sensor gains.
    pub fn eps_bound(&self) -> f64 {
        let (s1, s2) = (self.placement.weight_s1.abs(), self.placement.weight_s2.abs());
        let spill: f64 = (self.modes + 1..=self.modes + self.simulation.residual_modes)
            .map(|k| {
                let n = ModeIndex::new(k).expect("k >= 1");
                let f = self.disturbance.mode_bound(n);
                if f == 0.0 {
                    return 0.0;
                }
                let sigma2 = n.sigma().powi(2);
                let v = 2.0 * self.params.a2 * f / (self.params.a1 * sigma2);
                let psi = (crate::beam_model::mode_shape(n, self.placement.sensor).unwrap_or(0.0)).abs();
                psi * (s1 * v / sigma2 + s2 * v)
            })
            .sum();
        self.noise.bound + spill
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_err(src: &str) -> (String, Option<usize>, String) {
        match parse_config(src) {
            Err(Error::Config { key, line, msg }) => (key, line, msg),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse_config("modes = 3\n").unwrap();
        assert_eq!(c.modes, 3);
        assert_eq!(c.params.a1, 0.01);
        assert_eq!(c.params.a2, 1.0);
        assert_eq!(c.placement.patch_right, 0.1);
        assert_eq!(c.disturbance.driven_mode_count(), 3);
        assert_eq!(c.disturbance.amplitude_bound(), 11.0);
        assert!(c.disturbance.is_resonant());
    }

    #[test]
    fn fig1_preset() {
        let c = preset("fig1").unwrap();
        assert_eq!(c.modes, 3);
        assert_eq!(c.params.a1, 0.01);
        assert_eq!((c.placement.patch_left, c.placement.patch_right), (0.0, 0.1));
        assert_eq!(c.placement.sensor, 0.095);
        match &c.gains {
            GainStrategy::Tune { observer_grid, .. } => assert_eq!(observer_grid, &vec![34.0]),
            g => panic!("{g:?}"),
        }
    }

    #[test]
    fn presets_differ_where_expected() {
        assert_eq!(preset("fig4").unwrap().placement.sensor, 0.98);
        assert_eq!(preset("fig5").unwrap().placement.sensor, 0.6);
        assert_eq!(preset("fig6").unwrap().placement.patch_right, 1e-8);
        assert_eq!(preset("fig7").unwrap().modes, 5);
        assert_eq!(preset("fig3").unwrap().sweep.unwrap().values, vec![0.095, 0.6, 0.98]);
        for name in preset_names() {
            preset(name).unwrap();
        }
    }

    #[test]
    fn file_overrides_preset() {
        let c = parse_config("preset = \"fig2\"\n[placement]\nsensor = 0.6\n").unwrap();
        assert_eq!(c.placement.sensor, 0.6);
        assert_eq!(c.name, "fig2");
    }

    #[test]
    fn reversed_patch_names_patch() {
        let (key, line, msg) = config_err("modes = 3\n\n[placement]\npatch = [0.5, 0.2]\n");
        assert!(key.contains("patch"));
        assert!(msg.contains("patch"));
        assert_eq!(line, Some(4));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let (key, line, _) = config_err("modes = 3\n[simulation]\nt_final = 1.0\nstep = 0.1\n");
        assert_eq!(key, "simulation.step");
        assert_eq!(line, Some(4));
        let (key, _, _) = config_err("colour = 1\n");
        assert_eq!(key, "colour");
    }

    #[test]
    fn unknown_preset() {
        let (key, line, msg) = config_err("preset = \"fig9\"\n");
        assert_eq!(key, "preset");
        assert_eq!(line, Some(1));
        assert!(msg.contains("fig1"));
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let (key, line, _) = config_err("modes = 3\nseed = = 1\n");
        assert_eq!(key, "syntax");
        assert_eq!(line, Some(2));
    }

    #[test]
    fn type_errors_name_the_key() {
        let (key, _, _) = config_err("modes = \"three\"\n");
        assert_eq!(key, "modes");
    }

    #[test]
    fn disturbance_kind_switch_replaces_table() {
        let c = parse_config("[disturbance]\nkind = \"constant\"\nforces = [1.0, 2.0]\n").unwrap();
        assert_eq!(c.disturbance.driven_mode_count(), 2);
        let c = preset("residual-smooth").unwrap();
        assert!(c.disturbance.harmonics(ModeIndex::new(3).unwrap()).is_empty());
        let h = c.disturbance.harmonics(ModeIndex::new(5).unwrap());
        assert_eq!(h[0].amplitude, 11.0 / 25.0);
    }

    #[test]
    fn explicit_gains_need_right_sizes() {
        let (key, _, _) = config_err("[gains]\nstrategy = \"explicit\"\nk = [1.0]\nl = [1.0]\n");
        assert_eq!(key, "gains.k");
        let c = parse_config("modes = 1\n[gains]\nstrategy = \"explicit\"\nk = [1.0, 2.0]\nl = [3.0, 4.0]\n").unwrap();
        assert!(matches!(c.gains, GainStrategy::Explicit { .. }));
    }

    #[test]
    fn physical_beam_is_nondimensionalised() {
        let src = "[physical]\nlength = 1.0\nhalf_height = 0.01\nwidth = 0.1\ndensity = 1.0\n\
                   elastic_modulus = 1.0\ninertia_moment = 1.0\ndamping = 0.0\npiezo_constant = 1.0\n\
                   patch_height = 0.001\n[beam]\na1 = 0.02\n";
        let c = parse_config(src).unwrap();
        assert_eq!(c.params.a1, 0.02);
    }

    #[test]
    fn bad_sweep_value_is_reported() {
        let (key, _, _) = config_err("[sweep]\nparameter = \"sensor\"\nvalues = [0.5, 1.5]\n");
        assert_eq!(key, "sweep.values");
    }

    #[test]
    fn line_lookup() {
        let src = "a = 1\n[b]\nc = 2 # x\n[d.e]\nf = [1]\n";
        assert_eq!(line_of(src, "a"), Some(1));
        assert_eq!(line_of(src, "b.c"), Some(3));
        assert_eq!(line_of(src, "d.e.f[0]"), Some(5));
        assert_eq!(line_of(src, "d.e"), Some(4));
        assert_eq!(line_of(src, "zz"), None);
    }

    #[test]
    fn eps_bound_counts_forced_residual_modes() {
        let c = preset("fig1").unwrap();
        assert_eq!(c.eps_bound(), 0.01);
        let r = preset("residual-uniform").unwrap();
        assert!(r.eps_bound() > 0.0);
    }
}
