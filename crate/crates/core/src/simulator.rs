//! Fixed-step RK4 integration of plant, observer and residual modes:
//!
//! ```text
//! z'    = A z + B V + F_N(t)                 V = -K zh
//! zh'   = (A - B K) zh + L (y - C zh)        y = C z + r(t) + xi(t)
//! q_k'' = -d_k q_k' - s_k q_k + a2 f_k(t) [+ b_k V]
//! ```

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beam_model::{modal_roots, ModeIndex};
use crate::error::{Error, Result};
use crate::linalg::eigenvalues;
use crate::modal_system::{residual_block, ModalSystem, ResidualBlock};
use crate::signals::{modal_force, noise_sample, residual_output, DisturbanceSpec, NoiseSpec};
use crate::synthesis::GainSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpilloverCoupling {
    /// Residual modes see only the disturbance.
    #[default]
    PaperMode,
    /// Residual modes are also driven by the patch voltage through `b_k`.
    FullCoupling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t_final: f64,
    pub dt: f64,
    pub residual_modes: usize,
    pub coupling: SpilloverCoupling,
    pub z0: DVector<f64>,
    pub zhat0: DVector<f64>,
    /// `[w_k.., w_k'..]` of the residual modes.
    pub residual0: Vec<f64>,
    /// Store every `record_every`-th step (the last step is always stored).
    pub record_every: usize,
}

impl SimConfig {
    /// Zero initial conditions.
    pub fn new(system: &ModalSystem, t_final: f64, dt: f64, residual_modes: usize) -> Self {
        SimConfig {
            t_final,
            dt,
            residual_modes,
            coupling: SpilloverCoupling::PaperMode,
            z0: DVector::zeros(system.dim()),
            zhat0: DVector::zeros(system.dim()),
            residual0: vec![0.0; 2 * residual_modes],
            record_every: 1,
        }
    }

    pub fn steps(&self) -> usize {
        if self.t_final == 0.0 {
            0
        } else {
            (self.t_final / self.dt).round() as usize
        }
    }

    fn validate(&self, system: &ModalSystem) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && (self.t_final == 0.0 || self.t_final >= self.dt)) {
            return Err(Error::InvalidInput(format!(
                "t_final must be 0 or at least dt, got {}",
                self.t_final
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidInput("record_every must be >= 1".into()));
        }
        let d = system.dim();
        if self.z0.len() != d || self.zhat0.len() != d {
            return Err(Error::InvalidInput(format!("initial plant and observer states need {d} entries")));
        }
        if self.residual0.len() != 2 * self.residual_modes {
            return Err(Error::InvalidInput(format!(
                "initial residual state needs {} entries",
                2 * self.residual_modes
            )));
        }
        let finite = self.z0.iter().chain(self.zhat0.iter()).chain(self.residual0.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("initial state must be finite".into()));
        }
        Ok(())
    }
}

/// Deterministic random vector of unit Euclidean norm.
pub fn random_unit_state(dim: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
    let n = v.norm();
    if n == 0.0 {
        let mut e = DVector::zeros(dim);
        if dim > 0 {
            e[0] = 1.0;
        }
        e
    } else {
        v / n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub z: DVector<f64>,
    pub zhat: DVector<f64>,
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub dt: f64,
    pub steps: usize,
    pub times: Vec<f64>,
    pub z: Vec<DVector<f64>>,
    pub zhat: Vec<DVector<f64>>,
    pub e: Vec<DVector<f64>>,
    pub residual: Vec<Vec<f64>>,
    pub control: Vec<f64>,
    pub output: Vec<f64>,
    pub norm_e: Vec<f64>,
    pub norm_z: Vec<f64>,
    pub norm_residual: Vec<f64>,
    /// `||F_N(t)||` on the stored grid.
    pub force_norm: Vec<f64>,
    /// Largest `|F_N(t)|` seen at any step.
    pub force_sup: f64,
    /// Largest `|r(t) + xi(t)|` seen at any step.
    pub eps_sup: f64,
    /// Per residual mode, `sup_t ||(w_k, w_k')||` over every step.
    pub residual_sup: Vec<f64>,
    pub residual_first_mode: usize,
}

/// Precomputed closed-loop data for one run.
pub struct Simulation<'a> {
    system: &'a ModalSystem,
    gains: &'a GainSet,
    block: ResidualBlock,
    disturbance: &'a DisturbanceSpec,
    noise: &'a NoiseSpec,
    config: &'a SimConfig,
    observer: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Outputs {
    control: f64,
    output: f64,
    eps: f64,
}

impl<'a> Simulation<'a> {
    pub fn new(
        system: &'a ModalSystem,
        gains: &'a GainSet,
        disturbance: &'a DisturbanceSpec,
        noise: &'a NoiseSpec,
        config: &'a SimConfig,
    ) -> Result<Self> {
        config.validate(system)?;
        noise.validate()?;
        if gains.k.len() != system.dim() || gains.l.len() != system.dim() {
            return Err(Error::InvalidInput("gain dimensions do not match the system".into()));
        }
        let block = residual_block(
            &system.params,
            &system.placement,
            system.modes,
            config.residual_modes,
            system.damping_model,
        )?;
        let cap = step_cap(system, gains, &block, config.coupling)?;
        if config.dt > cap * (1.0 + 1e-9) {
            return Err(Error::InvalidInput(format!(
                "dt = {} exceeds the step cap {cap:e} set by the fastest closed-loop or residual mode",
                config.dt
            )));
        }
        let observer = &system.a - &system.b * &gains.k - &gains.l * &system.c;
        Ok(Simulation {
            system,
            gains,
            block,
            disturbance,
            noise,
            config,
            observer,
        })
    }

    pub fn residual_block(&self) -> &ResidualBlock {
        &self.block
    }

    fn dims(&self) -> (usize, usize) {
        (self.system.dim(), self.block.len())
    }

    fn outputs(&self, t: f64, x: &[f64]) -> Outputs {
        let (d, _) = self.dims();
        let z = &x[..d];
        let zh = &x[d..2 * d];
        let q = &x[2 * d..];
        let control = -dot(self.gains.k.as_slice(), zh);
        let r = residual_output(q, &self.block, &self.system.placement);
        let eps = r + noise_sample(self.noise, t);
        let output = dot(self.system.c.as_slice(), z) + eps;
        Outputs { control, output, eps }
    }

    fn derivative(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let (d, r) = self.dims();
        let n = self.system.modes;
        let a2 = self.system.params.a2;
        let Outputs { control, output, .. } = self.outputs(t, x);
        let (z, rest) = x.split_at(d);
        let (zh, q) = rest.split_at(d);
        let (dz, rest) = out.split_at_mut(d);
        let (dzh, dq) = rest.split_at_mut(d);

        matvec(&self.system.a, z, dz);
        for i in 0..d {
            dz[i] += self.system.b[i] * control;
        }
        for i in 0..n {
            let mode = ModeIndex::new(i + 1).expect("i + 1 >= 1");
            dz[n + i] += a2 * modal_force(self.disturbance, mode, t);
        }

        matvec(&self.observer, zh, dzh);
        for i in 0..d {
            dzh[i] += self.gains.l[i] * output;
        }

        let couple = self.config.coupling == SpilloverCoupling::FullCoupling;
        for (i, m) in self.block.modes.iter().enumerate() {
            let (w, v) = (q[i], q[r + i]);
            dq[i] = v;
            let mut acc = -m.damping * v - m.stiffness * w + a2 * modal_force(self.disturbance, m.mode, t);
            if couple {
                acc += m.actuator_gain * control;
            }
            dq[r + i] = acc;
        }
    }

    fn rk4(&self, t: f64, x: &[f64], buf: &mut Rk4Buffers) -> Vec<f64> {
        let h = self.config.dt;
        let len = x.len();
        let Rk4Buffers { k1, k2, k3, k4, tmp } = buf;
        self.derivative(t, x, k1);
        for i in 0..len {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        self.derivative(t + 0.5 * h, tmp, k2);
        for i in 0..len {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        self.derivative(t + 0.5 * h, tmp, k3);
        for i in 0..len {
            tmp[i] = x[i] + h * k3[i];
        }
        self.derivative(t + h, tmp, k4);
        (0..len)
            .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    }

    /// One RK4 step from `state` at time `t`.
    pub fn step(&self, state: &SimState, t: f64) -> Result<SimState> {
        let x = self.pack(state)?;
        let mut buf = Rk4Buffers::new(x.len());
        let next = self.rk4(t, &x, &mut buf);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: 1, t: t + self.config.dt });
        }
        Ok(self.unpack(&next))
    }

    fn pack(&self, state: &SimState) -> Result<Vec<f64>> {
        let (d, r) = self.dims();
        if state.z.len() != d || state.zhat.len() != d || state.residual.len() != 2 * r {
            return Err(Error::InvalidInput("state dimensions do not match the simulation".into()));
        }
        if state.z.iter().chain(state.zhat.iter()).chain(state.residual.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("state must be finite".into()));
        }
        let mut x = Vec::with_capacity(2 * d + 2 * r);
        x.extend(state.z.iter());
        x.extend(state.zhat.iter());
        x.extend(state.residual.iter());
        Ok(x)
    }

    fn unpack(&self, x: &[f64]) -> SimState {
        let (d, _) = self.dims();
        SimState {
            z: DVector::from_column_slice(&x[..d]),
            zhat: DVector::from_column_slice(&x[d..2 * d]),
            residual: x[2 * d..].to_vec(),
        }
    }

    fn force_norm(&self, t: f64) -> f64 {
        let a2 = self.system.params.a2;
        (0..self.system.modes)
            .map(|i| (a2 * modal_force(self.disturbance, ModeIndex::new(i + 1).expect("i + 1 >= 1"), t)).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn run(&self) -> Result<SimulationResult> {
        let cfg = self.config;
        let (d, r) = self.dims();
        let steps = cfg.steps();
        let stored = steps / cfg.record_every + 2;
        let mut res = SimulationResult {
            dt: cfg.dt,
            steps,
            times: Vec::with_capacity(stored),
            z: Vec::with_capacity(stored),
            zhat: Vec::with_capacity(stored),
            e: Vec::with_capacity(stored),
            residual: Vec::with_capacity(stored),
            control: Vec::with_capacity(stored),
            output: Vec::with_capacity(stored),
            norm_e: Vec::with_capacity(stored),
            norm_z: Vec::with_capacity(stored),
            norm_residual: Vec::with_capacity(stored),
            force_norm: Vec::with_capacity(stored),
            force_sup: 0.0,
            eps_sup: 0.0,
            residual_sup: vec![0.0; r],
            residual_first_mode: self.block.first_mode,
        };
        let initial = SimState {
            z: cfg.z0.clone(),
            zhat: cfg.zhat0.clone(),
            residual: cfg.residual0.clone(),
        };
        let mut x = self.pack(&initial)?;
        let mut buf = Rk4Buffers::new(x.len());
        for step in 0..=steps {
            let t = step as f64 * cfg.dt;
            let outs = self.outputs(t, &x);
            let fnorm = self.force_norm(t);
            res.force_sup = res.force_sup.max(fnorm);
            res.eps_sup = res.eps_sup.max(outs.eps.abs());
            for i in 0..r {
                let amp = x[2 * d + i].hypot(x[2 * d + r + i]);
                res.residual_sup[i] = res.residual_sup[i].max(amp);
            }
            if step % cfg.record_every == 0 || step == steps {
                let z = DVector::from_column_slice(&x[..d]);
                let zh = DVector::from_column_slice(&x[d..2 * d]);
                let e = &z - &zh;
                let q = x[2 * d..].to_vec();
                res.times.push(t);
                res.norm_e.push(e.norm());
                res.norm_z.push(z.norm());
                res.norm_residual.push(q.iter().map(|v| v * v).sum::<f64>().sqrt());
                res.force_norm.push(fnorm);
                res.control.push(outs.control);
                res.output.push(outs.output);
                res.z.push(z);
                res.zhat.push(zh);
                res.e.push(e);
                res.residual.push(q);
            }
            if step == steps {
                break;
            }
            let next = self.rk4(t, &x, &mut buf);
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence {
                    step: step + 1,
                    t: (step + 1) as f64 * cfg.dt,
                });
            }
            x = next;
        }
        Ok(res)
    }
}

struct Rk4Buffers {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Buffers {
    fn new(len: usize) -> Self {
        Rk4Buffers {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            tmp: vec![0.0; len],
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn matvec(m: &DMatrix<f64>, x: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        for (o, &mij) in out.iter_mut().zip(m.column(j).iter()) {
            *o += mij * xj;
        }
    }
}

/// One RK4 step of the coupled dynamics.
pub fn step_dynamics(
    state: &SimState,
    t: f64,
    system: &ModalSystem,
    gains: &GainSet,
    disturbance: &DisturbanceSpec,
    noise: &NoiseSpec,
    config: &SimConfig,
) -> Result<SimState> {
    Simulation::new(system, gains, disturbance, noise, config)?.step(state, t)
}

pub fn simulate(
    system: &ModalSystem,
    gains: &GainSet,
    disturbance: &DisturbanceSpec,
    noise: &NoiseSpec,
    config: &SimConfig,
) -> Result<SimulationResult> {
    Simulation::new(system, gains, disturbance, noise, config)?.run()
}

/// `[[A - B K, B K], [0, A - L C]]` acting on `(z, e)`.
pub fn closed_loop_matrix(system: &ModalSystem, gains: &GainSet) -> DMatrix<f64> {
    let d = system.dim();
    let bk = &system.b * &gains.k;
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(&(&system.a - &bk));
    m.view_mut((0, d), (d, d)).copy_from(&bk);
    m.view_mut((d, d), (d, d)).copy_from(&(&system.a - &gains.l * &system.c));
    m
}

/// Largest admissible step: `min(0.1 / max|Re|, 2 pi / (20 max|Im|))` over the
/// closed-loop spectrum and the residual-mode roots (the full coupled
/// spectrum under [`SpilloverCoupling::FullCoupling`]).
pub fn step_cap(
    system: &ModalSystem,
    gains: &GainSet,
    block: &ResidualBlock,
    coupling: SpilloverCoupling,
) -> Result<f64> {
    let mut eigs = eigenvalues(&closed_loop_matrix(system, gains))?;
    match coupling {
        SpilloverCoupling::PaperMode => {
            for m in &block.modes {
                let (r1, r2) = modal_roots(m.stiffness, m.damping);
                eigs.push(r1);
                eigs.push(r2);
            }
        }
        SpilloverCoupling::FullCoupling if !block.is_empty() => {
            eigs = eigenvalues(&coupled_matrix(system, gains, block))?;
        }
        SpilloverCoupling::FullCoupling => {}
    }
    let max_re = eigs.iter().map(|e| e.re.abs()).fold(0.0, f64::max);
    let max_im = eigs.iter().map(|e| e.im.abs()).fold(0.0, f64::max);
    let mut cap = f64::INFINITY;
    if max_re > 0.0 {
        cap = cap.min(0.1 / max_re);
    }
    if max_im > 0.0 {
        cap = cap.min(2.0 * std::f64::consts::PI / (20.0 * max_im));
    }
    Ok(cap)
}

/// Linear part of the full `(z, zh, q)` dynamics with the voltage fed back
/// into the residual modes.
fn coupled_matrix(system: &ModalSystem, gains: &GainSet, block: &ResidualBlock) -> DMatrix<f64> {
    let d = system.dim();
    let r = block.len();
    let size = 2 * d + 2 * r;
    let mut m = DMatrix::zeros(size, size);
    let bk = &system.b * &gains.k;
    let lc = &gains.l * &system.c;
    m.view_mut((0, 0), (d, d)).copy_from(&system.a);
    m.view_mut((0, d), (d, d)).copy_from(&(-&bk));
    m.view_mut((d, 0), (d, d)).copy_from(&lc);
    m.view_mut((d, d), (d, d)).copy_from(&(&system.a - &bk - &lc));
    let (s1, s2) = (system.placement.weight_s1, system.placement.weight_s2);
    for (i, mode) in block.modes.iter().enumerate() {
        let (w, v) = (2 * d + i, 2 * d + r + i);
        for row in 0..d {
            m[(d + row, w)] = gains.l[row] * s1 * mode.sensor_shape;
            m[(d + row, v)] = gains.l[row] * s2 * mode.sensor_shape;
        }
        m[(w, v)] = 1.0;
        m[(v, w)] = -mode.stiffness;
        m[(v, v)] = -mode.damping;
        for col in 0..d {
            m[(v, d + col)] = -mode.actuator_gain * gains.k[col];
        }
    }
    m
}

/// Step that divides `t_final` evenly and respects `cap`.
pub fn auto_dt(t_final: f64, cap: f64) -> f64 {
    if t_final <= 0.0 {
        return cap;
    }
    let steps = (t_final / cap).ceil().max(1.0);
    t_final / steps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam_model::BeamParams;
    use crate::linalg::spectrum_mismatch;
    use crate::modal_system::{assemble, modal_energy, static_gain, DampingModel, Placement};
    use crate::synthesis::{collocated_rate_feedback, place_observer_poles, place_poles, PolePattern};
    use approx::assert_relative_eq;

    fn system(n: usize, a1: f64) -> ModalSystem {
        let p = BeamParams::dimensionless(a1, 1.0).unwrap();
        assemble(&p, n, &Placement::velocity_sensor(0.0, 0.1, 0.6).unwrap(), DampingModel::Structural).unwrap()
    }

    fn tuned(system: &ModalSystem, lk: f64, ll: f64) -> GainSet {
        let pat = PolePattern::default();
        let k = place_poles(&system.a, &system.b, &pat.targets(system, lk)).unwrap();
        let l = place_observer_poles(&system.a, &system.c, &pat.targets(system, ll)).unwrap();
        GainSet::new(system, k, l).unwrap()
    }

    fn capped(system: &ModalSystem, gains: &GainSet, t_final: f64, r: usize) -> SimConfig {
        let block = residual_block(&system.params, &system.placement, system.modes, r, system.damping_model).unwrap();
        let cap = step_cap(system, gains, &block, SpilloverCoupling::PaperMode).unwrap();
        SimConfig::new(system, t_final, auto_dt(t_final, cap), r)
    }

    #[test]
    fn equilibrium_stays_at_rest() {
        let s = system(3, 0.01);
        let g = tuned(&s, 4.0, 34.0);
        let cfg = capped(&s, &g, 1.0, 2);
        let res = simulate(&s, &g, &DisturbanceSpec::none(), &NoiseSpec::silent(), &cfg).unwrap();
        assert!(res.norm_z.iter().chain(&res.norm_e).chain(&res.norm_residual).all(|&v| v == 0.0));
    }

    #[test]
    fn zero_horizon_keeps_initial_state() {
        let s = system(2, 0.01);
        let g = GainSet::open_loop(&s);
        let mut cfg = SimConfig::new(&s, 0.0, 1e-3, 0);
        cfg.z0 = random_unit_state(4, 1);
        let res = simulate(&s, &g, &DisturbanceSpec::none(), &NoiseSpec::silent(), &cfg).unwrap();
        assert_eq!(res.times, vec![0.0]);
        assert_eq!(res.z[0], cfg.z0);
    }

    #[test]
    fn single_mode_reaches_static_gain() {
        let s = system(1, 0.5);
        let g = GainSet::open_loop(&s);
        let cfg = capped(&s, &g, 8.0, 0);
        let f = DisturbanceSpec::constant(&[1.0]).unwrap();
        let res = simulate(&s, &g, &f, &NoiseSpec::silent(), &cfg).unwrap();
        let w = res.z.last().unwrap()[0];
        let expected = static_gain(&s.params, ModeIndex::new(1).unwrap());
        assert!((w - expected).abs() <= 1e-3 * expected, "{w} vs {expected}");
    }

    #[test]
    fn residual_is_independent_of_gains_in_paper_mode() {
        let s = system(3, 0.01);
        let f = DisturbanceSpec::polyharmonic(&s.params, 5, 11, 11.0).unwrap();
        let noise = NoiseSpec::silent();
        let tuned = tuned(&s, 4.0, 34.0);
        let open = GainSet::open_loop(&s);
        let mut cfg = capped(&s, &tuned, 2.0, 2);
        cfg.z0 = random_unit_state(6, 3);
        cfg.residual0 = vec![0.01, -0.02, 0.0, 0.3];
        let a = simulate(&s, &tuned, &f, &noise, &cfg).unwrap();
        let b = simulate(&s, &open, &f, &noise, &cfg).unwrap();
        assert_eq!(a.residual, b.residual);
        assert_ne!(a.z, b.z);
    }

    #[test]
    fn full_coupling_feeds_voltage_into_residual() {
        let s = system(3, 0.01);
        let g = tuned(&s, 4.0, 34.0);
        let mut cfg = capped(&s, &g, 0.5, 2);
        cfg.coupling = SpilloverCoupling::FullCoupling;
        let block = residual_block(&s.params, &s.placement, 3, 2, s.damping_model).unwrap();
        cfg.dt = auto_dt(0.5, step_cap(&s, &g, &block, SpilloverCoupling::FullCoupling).unwrap());
        cfg.z0 = random_unit_state(6, 3);
        let res = simulate(&s, &g, &DisturbanceSpec::none(), &NoiseSpec::silent(), &cfg).unwrap();
        assert!(res.norm_residual.last().unwrap() > &0.0);
    }

    #[test]
    fn step_matches_run() {
        let s = system(2, 0.01);
        let g = tuned(&s, 3.0, 20.0);
        let mut cfg = capped(&s, &g, 0.01, 1);
        cfg.z0 = random_unit_state(4, 9);
        let f = DisturbanceSpec::polyharmonic(&s.params, 2, 11, 11.0).unwrap();
        let noise = NoiseSpec::silent();
        let run = simulate(&s, &g, &f, &noise, &cfg).unwrap();
        let mut state = SimState {
            z: cfg.z0.clone(),
            zhat: cfg.zhat0.clone(),
            residual: cfg.residual0.clone(),
        };
        for k in 0..run.steps {
            state = step_dynamics(&state, k as f64 * cfg.dt, &s, &g, &f, &noise, &cfg).unwrap();
        }
        assert_eq!(&state.z, run.z.last().unwrap());
    }

    #[test]
    fn error_is_stored_difference() {
        let s = system(2, 0.01);
        let g = tuned(&s, 3.0, 20.0);
        let mut cfg = capped(&s, &g, 0.2, 0);
        cfg.z0 = random_unit_state(4, 2);
        let res = simulate(&s, &g, &DisturbanceSpec::none(), &NoiseSpec::silent(), &cfg).unwrap();
        for i in 0..res.times.len() {
            assert_eq!(res.e[i], &res.z[i] - &res.zhat[i]);
        }
    }

    #[test]
    fn rejects_oversized_step() {
        let s = system(3, 0.01);
        let g = tuned(&s, 4.0, 34.0);
        let cfg = SimConfig::new(&s, 1.0, 0.1, 0);
        assert!(matches!(
            simulate(&s, &g, &DisturbanceSpec::none(), &NoiseSpec::silent(), &cfg),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn closed_loop_matrix_structure() {
        let s = system(3, 0.01);
        let open = GainSet::open_loop(&s);
        let m = closed_loop_matrix(&s, &open);
        assert_eq!(m.view((0, 0), (6, 6)), s.a);
        assert_eq!(m.view((6, 6), (6, 6)), s.a);
        assert!(m.view((0, 6), (6, 6)).iter().all(|&v| v == 0.0));

        let g = tuned(&s, 4.0, 34.0);
        let m = closed_loop_matrix(&s, &g);
        assert_eq!(m.nrows(), 12);
        let eigs = eigenvalues(&m).unwrap();
        assert!(eigs.iter().all(|e| e.re < 0.0));
        let mut union = eigenvalues(&(&s.a - &s.b * &g.k)).unwrap();
        union.extend(eigenvalues(&(&s.a - &g.l * &s.c)).unwrap());
        assert!(spectrum_mismatch(&eigs, &union) < 1e-7);
    }

    #[test]
    fn open_loop_energy_is_non_increasing() {
        let s = system(3, 0.01);
        let g = GainSet::open_loop(&s);
        let mut cfg = capped(&s, &g, 3.0, 0);
        cfg.z0 = random_unit_state(6, 11);
        let res = simulate(&s, &g, &DisturbanceSpec::none(), &NoiseSpec::silent(), &cfg).unwrap();
        let energy: Vec<f64> = res.z.iter().map(|z| modal_energy(z.as_slice(), 1)).collect();
        assert!(energy.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn energy_rate_matches_dissipation() {
        let s = system(2, 0.05);
        let mut cfg = SimConfig::new(&s, 0.5, 1e-4, 0);
        cfg.z0 = random_unit_state(4, 5);
        cfg.zhat0 = cfg.z0.clone();
        let k = collocated_rate_feedback(&s, 2.0);
        let l = place_observer_poles(&s.a, &s.c, &PolePattern::default().targets(&s, 10.0)).unwrap();
        let g = GainSet::new(&s, k.clone(), l).unwrap();
        let res = simulate(&s, &g, &DisturbanceSpec::none(), &NoiseSpec::silent(), &cfg).unwrap();
        let n = s.modes;
        let rate: Vec<f64> = res
            .z
            .iter()
            .map(|z| {
                let mut r = 0.0;
                for j in 0..n {
                    let d = s.damping_model.coefficient(&s.params, s.mode(j));
                    r -= d * z[n + j] * z[n + j];
                }
                let bz = s.b.dot(z);
                r - 2.0 * bz * bz
            })
            .collect();
        let dissipated: f64 = rate.windows(2).map(|w| 0.5 * (w[0] + w[1]) * cfg.dt).sum();
        let e0 = modal_energy(res.z[0].as_slice(), 1);
        let e1 = modal_energy(res.z.last().unwrap().as_slice(), 1);
        assert!(e1 < e0);
        assert_relative_eq!(e1 - e0, dissipated, max_relative = 1e-4);
    }
}
