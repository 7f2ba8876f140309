//! Closed-form error/state/residual bounds and metrics computed from a
//! finished simulation.

use std::f64::consts::PI;

use serde::Serialize;

use crate::beam_model::{modal_roots, BeamParams, ModeIndex};
use crate::error::{Error, Result};
use crate::linalg::eigenbasis_condition;
use crate::modal_system::{stiffness, DampingModel, ModalSystem};
use crate::simulator::SimulationResult;
use crate::synthesis::GainSet;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub lambda_l: f64,
    pub lambda_k: f64,
    pub l_norm: f64,
    pub bk_norm: f64,
    pub f_bound: f64,
    pub eps_bound: f64,
    pub e_steady_bound: f64,
    /// Uniform estimate of `sup ||e||` fed into the state bound,
    /// `kappa_L (||e(0)|| + e_steady_bound)`.
    pub e_bound_used: f64,
    pub z_steady_bound: f64,
    pub kappa_l: f64,
    pub kappa_k: f64,
}

/// `F_bound` and `eps_bound` are sup-over-horizon values.
pub fn bound_report(system: &ModalSystem, gains: &GainSet, f_bound: f64, eps_bound: f64, e0_norm: f64) -> Result<BoundReport> {
    if !(f_bound >= 0.0 && eps_bound >= 0.0 && e0_norm >= 0.0) {
        return Err(Error::InvalidInput("bounds and initial norms must be non-negative".into()));
    }
    if !(gains.lambda_k > 0.0 && gains.lambda_l > 0.0) {
        return Err(Error::UnstableMatrix {
            re: -gains.lambda_k.min(gains.lambda_l),
        });
    }
    let kappa_l = eigenbasis_condition(&(&system.a - &gains.l * &system.c))?;
    let kappa_k = eigenbasis_condition(&(&system.a - &system.b * &gains.k))?;
    let bk_norm = gains.bk_norm(system);
    let e_steady_bound = (f_bound + gains.l_norm * eps_bound) / gains.lambda_l;
    let e_bound_used = kappa_l * (e0_norm + e_steady_bound);
    let z_steady_bound = (f_bound + bk_norm * e_bound_used) / gains.lambda_k;
    Ok(BoundReport {
        lambda_l: gains.lambda_l,
        lambda_k: gains.lambda_k,
        l_norm: gains.l_norm,
        bk_norm,
        f_bound,
        eps_bound,
        e_steady_bound,
        e_bound_used,
        z_steady_bound,
        kappa_l,
        kappa_k,
    })
}

/// `e^{-lambda_L t} ||e(0)|| + (F + ||L|| eps) / lambda_L`.
pub fn error_bound_curve(gains: &GainSet, f_bound: f64, eps_bound: f64, e0_norm: f64, times: &[f64]) -> Vec<f64> {
    let steady = (f_bound + gains.l_norm * eps_bound) / gains.lambda_l;
    times.iter().map(|&t| (-gains.lambda_l * t).exp() * e0_norm + steady).collect()
}

/// `e^{-lambda_K t} ||z(0)|| + (F + ||B K|| e_bound) / lambda_K`.
pub fn state_bound_curve(
    system: &ModalSystem,
    gains: &GainSet,
    f_bound: f64,
    e_bound: f64,
    z0_norm: f64,
    times: &[f64],
) -> Vec<f64> {
    let steady = (f_bound + gains.bk_norm(system) * e_bound) / gains.lambda_k;
    times.iter().map(|&t| (-gains.lambda_k * t).exp() * z0_norm + steady).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub report: BoundReport,
    /// `max_t ||e(t)|| / (kappa_L * curve(t))`; at most 1 when the bound holds.
    pub e_ratio: f64,
    pub z_ratio: f64,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.e_ratio <= 1.0 && self.z_ratio <= 1.0
    }
}

/// Relative resolution of `||e||` against `||z||` in [`check_bounds`].
pub const ROUNDOFF_FLOOR: f64 = 1e-10;

/// Pointwise comparison of a run against the kappa-qualified bound curves,
/// using the forcing and output-noise sups observed during the run.
pub fn check_bounds(system: &ModalSystem, gains: &GainSet, result: &SimulationResult) -> Result<BoundCheck> {
    let e0 = result.norm_e.first().copied().unwrap_or(0.0);
    let z0 = result.norm_z.first().copied().unwrap_or(0.0);
    let report = bound_report(system, gains, result.force_sup, result.eps_sup, e0)?;
    let e_curve = error_bound_curve(gains, report.f_bound, report.eps_bound, e0, &result.times);
    let z_curve = state_bound_curve(system, gains, report.f_bound, report.e_bound_used, z0, &result.times);
    // e is stored as a difference of two states of size ~||z||, so it cannot
    // resolve anything below a round-off floor proportional to ||z||.
    let floor: Vec<f64> = result.norm_z.iter().map(|z| ROUNDOFF_FLOOR * z).collect();
    let ratio = |sim: &[f64], curve: &[f64], kappa: f64, floor: &[f64]| {
        sim.iter()
            .zip(curve)
            .zip(floor)
            .map(|((&s, &c), &f)| if s == 0.0 { 0.0 } else { s / (kappa * c + f) })
            .fold(0.0, f64::max)
    };
    let none = vec![0.0; result.norm_z.len()];
    Ok(BoundCheck {
        e_ratio: ratio(&result.norm_e, &e_curve, report.kappa_l, &floor),
        z_ratio: ratio(&result.norm_z, &z_curve, report.kappa_k, &none),
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualModeBound {
    pub mode: usize,
    /// `a2 f0 / (a1 pi^2 k^2)` with `||f_k|| = f0`.
    pub uniform: f64,
    /// Same with `||f_k|| = f0 / k^2`.
    pub smooth: f64,
    /// `uniform` recomputed with the true under-damped rate `a1 sigma^2 / 2`.
    pub uniform_corrected: f64,
    pub smooth_corrected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub modes: usize,
    pub f0: f64,
    pub per_mode: Vec<ResidualModeBound>,
    pub tail_sum_uniform: f64,
    pub tail_sum_smooth: f64,
    /// Log-log slope of simulated residual amplitudes against mode number.
    pub simulated_exponent: Option<f64>,
}

impl ResidualReport {
    /// Attaches the decay exponent of `amplitudes[i]` for mode `first_mode + i`.
    pub fn with_simulated(mut self, first_mode: usize, amplitudes: &[f64]) -> Self {
        let ks: Vec<f64> = (0..amplitudes.len()).map(|i| (first_mode + i) as f64).collect();
        self.simulated_exponent = log_log_slope(&ks, amplitudes);
        self
    }
}

pub fn residual_bounds(params: &BeamParams, f0: f64, modes: usize, k_max: usize) -> Result<ResidualReport> {
    params.validate()?;
    if !(f0.is_finite() && f0 >= 0.0) {
        return Err(Error::InvalidInput(format!("f0 must be >= 0, got {f0}")));
    }
    if k_max <= modes {
        return Err(Error::InvalidInput(format!("K_max = {k_max} must exceed N = {modes}")));
    }
    let (a1, a2) = (params.a1, params.a2);
    let per_mode = (modes + 1..=k_max)
        .map(|k| {
            let k2 = (k * k) as f64;
            let uniform = a2 * f0 / (a1 * PI * PI * k2);
            ResidualModeBound {
                mode: k,
                uniform,
                smooth: uniform / k2,
                uniform_corrected: 2.0 * uniform,
                smooth_corrected: 2.0 * uniform / k2,
            }
        })
        .collect();
    let m = (modes + 1) as f64;
    Ok(ResidualReport {
        modes,
        f0,
        per_mode,
        tail_sum_uniform: a2 * f0 / (a1 * PI * PI * m),
        tail_sum_smooth: a2 * f0 / (3.0 * a1 * PI * PI * m.powi(3)),
        simulated_exponent: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRates {
    pub mode: usize,
    /// Real part of the root closest to the imaginary axis.
    pub slow: f64,
    pub fast: f64,
    /// Structural-damping rate as printed, `-a1 sigma^2` (ignores the factor 1/2).
    pub printed: f64,
}

pub fn damping_decay_rates(params: &BeamParams, model: DampingModel, ks: &[usize]) -> Result<Vec<DecayRates>> {
    if ks.is_empty() {
        return Err(Error::InvalidInput("mode range is empty".into()));
    }
    ks.iter()
        .map(|&k| {
            let n = ModeIndex::new(k)?;
            let (r1, r2) = modal_roots(stiffness(n), model.coefficient(params, n));
            Ok(DecayRates {
                mode: k,
                slow: r1.re.max(r2.re),
                fast: r1.re.min(r2.re),
                printed: -params.a1 * n.sigma().powi(2),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub peak_e: f64,
    pub peak_e_time: f64,
    pub settling_time: f64,
    /// Mean plus three standard deviations of `||e||` over the last 20%.
    pub steady_band: f64,
    pub steady_e: f64,
    pub steady_z: f64,
    pub force_sup: f64,
    /// `steady_z / sup ||F_N||`, 0 when there is no forcing.
    pub attenuation: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Requires `0.8 T >= 10 / lambda_K` so the averaging window is past the transient.
pub fn performance_metrics(result: &SimulationResult, lambda_k: f64) -> Result<Metrics> {
    let t_final = result.times.last().copied().unwrap_or(0.0);
    if !(lambda_k > 0.0) || 0.8 * t_final < 10.0 / lambda_k {
        return Err(Error::InsufficientHorizon(format!(
            "horizon {t_final} is shorter than 12.5 / lambda_K = {}",
            12.5 / lambda_k
        )));
    }
    let start = result.times.partition_point(|&t| t < 0.8 * t_final);
    let (steady_e, std_e) = mean_std(&result.norm_e[start..]);
    let (steady_z, _) = mean_std(&result.norm_z[start..]);
    let steady_band = steady_e + 3.0 * std_e;

    let (peak_i, peak_e) = result
        .norm_e
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    let threshold = 2.0 * steady_band;
    let settling_time = match result.norm_e.iter().rposition(|&v| v > threshold) {
        Some(i) if i + 1 < result.times.len() => result.times[i + 1],
        Some(_) => t_final,
        None => 0.0,
    };
    let attenuation = if result.force_sup > 0.0 { steady_z / result.force_sup } else { 0.0 };
    Ok(Metrics {
        peak_e,
        peak_e_time: result.times.get(peak_i).copied().unwrap_or(0.0),
        settling_time,
        steady_band,
        steady_e,
        steady_z,
        force_sup: result.force_sup,
        attenuation,
    })
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// usable points.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal_system::{assemble, Placement};
    use crate::signals::{DisturbanceSpec, NoiseSpec};
    use crate::simulator::{auto_dt, random_unit_state, simulate, step_cap, SimConfig};
    use crate::synthesis::{place_observer_poles, place_poles, PolePattern};
    use crate::modal_system::residual_block;
    use approx::assert_relative_eq;

    fn params() -> BeamParams {
        BeamParams::dimensionless(0.01, 1.0).unwrap()
    }

    fn preset() -> (ModalSystem, GainSet) {
        let s = assemble(&params(), 3, &Placement::velocity_sensor(0.0, 0.1, 0.095).unwrap(), DampingModel::Structural).unwrap();
        let pat = PolePattern::default();
        let k = place_poles(&s.a, &s.b, &pat.targets(&s, 4.0)).unwrap();
        let l = place_observer_poles(&s.a, &s.c, &pat.targets(&s, 34.0)).unwrap();
        let g = GainSet::new(&s, k, l).unwrap();
        (s, g)
    }

    #[test]
    fn error_curve_limits() {
        let (_, g) = preset();
        let c = error_bound_curve(&g, 0.0, 0.0, 2.0, &[0.0, 0.1, 1e3]);
        assert_eq!(c[0], 2.0);
        assert_relative_eq!(c[1], 2.0 * (-g.lambda_l * 0.1).exp());
        assert_eq!(c[2], 0.0);
        let steady = error_bound_curve(&g, 3.0, 0.5, 2.0, &[1e6])[0];
        assert_relative_eq!(steady, (3.0 + g.l_norm * 0.5) / g.lambda_l);
    }

    #[test]
    fn preset_steady_error_arithmetic() {
        let (s, g) = preset();
        let f = 11.0 * 3f64.sqrt();
        let r = bound_report(&s, &g, f, 0.01, 0.0).unwrap();
        assert_relative_eq!(r.e_steady_bound, (19.052_558_883_257_65 + g.l_norm * 0.01) / g.lambda_l, max_relative = 1e-14);
        assert_relative_eq!(r.e_bound_used, r.kappa_l * r.e_steady_bound);
        assert_relative_eq!(r.z_steady_bound, (f + r.bk_norm * r.e_bound_used) / g.lambda_k);
        assert!(r.kappa_l >= 1.0 && r.kappa_k >= 1.0);
    }

    #[test]
    fn state_curve_limits_and_monotonicity() {
        let (s, g) = preset();
        let c = state_bound_curve(&s, &g, 0.0, 0.0, 1.5, &[0.0, 1.0]);
        assert_eq!(c[0], 1.5);
        assert_relative_eq!(c[1], 1.5 * (-g.lambda_k).exp());
        let mut prev = f64::INFINITY;
        for lk in [1.0, 2.0, 4.0, 8.0] {
            let mut gk = g.clone();
            gk.lambda_k = lk;
            let v = state_bound_curve(&s, &gk, 1.0, 1.0, 0.0, &[0.0])[0];
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn residual_tails() {
        let r = residual_bounds(&params(), 11.0, 3, 12).unwrap();
        assert_relative_eq!(r.tail_sum_uniform, 27.863_325_501_642_887, max_relative = 1e-12);
        assert_relative_eq!(r.tail_sum_smooth, 0.580_485_947_950_893_6, max_relative = 1e-12);
        assert_eq!(r.per_mode.len(), 9);
        assert_relative_eq!(r.per_mode[0].uniform, 11.0 / (0.01 * PI * PI * 16.0));
        assert_eq!(r.per_mode[0].uniform_corrected, 2.0 * r.per_mode[0].uniform);

        let zero = residual_bounds(&params(), 0.0, 3, 12).unwrap();
        assert!(zero.per_mode.iter().all(|m| m.uniform == 0.0 && m.smooth == 0.0));
        assert_eq!(zero.tail_sum_uniform, 0.0);

        for n in 1..20 {
            let a = residual_bounds(&params(), 11.0, n, n + 1).unwrap();
            let b = residual_bounds(&params(), 11.0, n + 1, n + 2).unwrap();
            assert!(b.tail_sum_uniform < a.tail_sum_uniform);
            let ratio = a.tail_sum_smooth / b.tail_sum_smooth;
            assert_relative_eq!(ratio, ((n + 2) as f64 / (n + 1) as f64).powi(3), max_relative = 1e-12);
        }
        assert!(residual_bounds(&params(), 11.0, 3, 3).is_err());
    }

    #[test]
    fn structural_decay_rates() {
        let r = damping_decay_rates(&params(), DampingModel::Structural, &[4, 8]).unwrap();
        assert_relative_eq!(r[0].slow, -0.789_568_352_087_148_7, max_relative = 1e-12);
        assert_eq!(r[0].slow, r[0].fast);
        assert_relative_eq!(r[1].slow / r[0].slow, 4.0, max_relative = 1e-12);
        assert_relative_eq!(r[0].printed, 2.0 * r[0].slow, max_relative = 1e-12);
    }

    #[test]
    fn kelvin_voigt_slow_root_saturates() {
        let r = damping_decay_rates(&params(), DampingModel::KelvinVoigt, &[10, 20]).unwrap();
        assert!((r[0].slow - r[1].slow).abs() / r[1].slow.abs() < 0.05);
        assert_relative_eq!(r[1].slow, -100.0, max_relative = 1e-3);
        assert!(r[1].fast < r[0].fast);
        assert!(damping_decay_rates(&params(), DampingModel::KelvinVoigt, &[]).is_err());
    }

    #[test]
    fn quiet_run_metrics_are_zero() {
        let (s, g) = preset();
        let block = residual_block(&s.params, &s.placement, 3, 0, s.damping_model).unwrap();
        let cap = step_cap(&s, &g, &block, Default::default()).unwrap();
        let mut cfg = SimConfig::new(&s, 4.0, auto_dt(4.0, cap), 0);
        cfg.record_every = 10;
        let res = simulate(&s, &g, &DisturbanceSpec::none(), &NoiseSpec::silent(), &cfg).unwrap();
        let m = performance_metrics(&res, g.lambda_k).unwrap();
        assert_eq!(m.peak_e, 0.0);
        assert_eq!(m.attenuation, 0.0);
        assert_eq!(m.settling_time, 0.0);
        assert!(matches!(performance_metrics(&res, 1.0), Err(Error::InsufficientHorizon(_))));
    }

    #[test]
    fn homogeneous_run_respects_bounds() {
        let (s, g) = preset();
        let block = residual_block(&s.params, &s.placement, 3, 0, s.damping_model).unwrap();
        let cap = step_cap(&s, &g, &block, Default::default()).unwrap();
        let mut cfg = SimConfig::new(&s, 3.0, auto_dt(3.0, cap), 0);
        cfg.z0 = random_unit_state(6, 4);
        let res = simulate(&s, &g, &DisturbanceSpec::none(), &NoiseSpec::silent(), &cfg).unwrap();
        let check = check_bounds(&s, &g, &res).unwrap();
        assert!(check.holds(), "{check:?}");
        assert!(check.e_ratio > 0.0);
    }

    #[test]
    fn slope_fit() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-2.5)).collect();
        assert_relative_eq!(log_log_slope(&xs, &ys).unwrap(), -2.5, max_relative = 1e-12);
        assert_eq!(log_log_slope(&[1.0], &[1.0]), None);
    }
}
