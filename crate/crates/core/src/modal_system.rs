//! Truncated modal state-space model `z' = A z + B V + F`, `y = C z + eps`,
//! with state ordering `[w_1..w_N, w_1'..w_N']`, plus the block of
//! uncontrolled residual modes `k = N+1 ..`.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::beam_model::{mode_shape, sin_pi, BeamParams, ModeIndex};
use crate::error::{Error, Result};

/// Patch interval `[x1, x2]`, sensor position `x0` and output weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub patch_left: f64,
    pub patch_right: f64,
    pub sensor: f64,
    /// Weight on displacement `w(x0, t)`.
    pub weight_s1: f64,
    /// Weight on velocity `w'(x0, t)`.
    pub weight_s2: f64,
}

impl Placement {
    /// Velocity sensing only (`s1 = 0`, `s2 = 1`).
    pub fn velocity_sensor(patch_left: f64, patch_right: f64, sensor: f64) -> Result<Self> {
        let p = Placement {
            patch_left,
            patch_right,
            sensor,
            weight_s1: 0.0,
            weight_s2: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let Placement {
            patch_left: x1,
            patch_right: x2,
            sensor: x0,
            weight_s1,
            weight_s2,
        } = *self;
        if !(x1.is_finite() && x2.is_finite() && 0.0 <= x1 && x1 < x2 && x2 <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "patch must satisfy 0 <= x1 < x2 <= 1, got [{x1}, {x2}]"
            )));
        }
        if !(x0.is_finite() && 0.0 < x0 && x0 < 1.0) {
            return Err(Error::InvalidInput(format!("sensor must lie in (0, 1), got {x0}")));
        }
        if !(weight_s1.is_finite() && weight_s2.is_finite()) || (weight_s1 == 0.0 && weight_s2 == 0.0) {
            return Err(Error::InvalidInput("output weights (s1, s2) must not both be zero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DampingModel {
    /// `d_n = a1 sigma_n^2`
    #[default]
    Structural,
    /// `d_n = a1 sigma_n^4`
    KelvinVoigt,
}

impl DampingModel {
    pub fn coefficient(self, params: &BeamParams, n: ModeIndex) -> f64 {
        let s2 = n.sigma().powi(2);
        match self {
            DampingModel::Structural => params.a1 * s2,
            DampingModel::KelvinVoigt => params.a1 * s2 * s2,
        }
    }
}

/// Modal stiffness `sigma_n^4`.
pub fn stiffness(n: ModeIndex) -> f64 {
    n.sigma().powi(4)
}

/// `psi_n'(x2) - psi_n'(x1)`, evaluated through the product form
/// `-2 sin(n pi (x1 + x2) / 2) sin(n pi (x2 - x1) / 2)` so short patches keep
/// full relative precision.
pub fn actuator_gain(n: ModeIndex, placement: &Placement) -> f64 {
    let k = n.get() as f64;
    let (x1, x2) = (placement.patch_left, placement.patch_right);
    -2.0 * SQRT_2 * n.sigma() * sin_pi(k * (x1 + x2) / 2.0) * sin_pi(k * (x2 - x1) / 2.0)
}

/// Output weights `(s1 psi_n(x0), s2 psi_n(x0))` of mode `n`.
pub fn sensor_gains(n: ModeIndex, placement: &Placement) -> (f64, f64) {
    let psi = SQRT_2 * sin_pi(n.get() as f64 * placement.sensor);
    (placement.weight_s1 * psi, placement.weight_s2 * psi)
}

/// DC gain of a single mode: steady amplitude per unit constant modal force.
pub fn static_gain(params: &BeamParams, n: ModeIndex) -> f64 {
    params.a2 / stiffness(n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModalSystem {
    pub modes: usize,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub params: BeamParams,
    pub placement: Placement,
    pub damping_model: DampingModel,
}

pub fn assemble(
    params: &BeamParams,
    modes: usize,
    placement: &Placement,
    damping_model: DampingModel,
) -> Result<ModalSystem> {
    if modes < 1 {
        return Err(Error::InvalidInput("at least one mode is required".into()));
    }
    params.validate()?;
    placement.validate()?;
    let dim = 2 * modes;
    let mut a = DMatrix::zeros(dim, dim);
    let mut b = DVector::zeros(dim);
    let mut c = RowDVector::zeros(dim);
    for i in 0..modes {
        let n = ModeIndex::new(i + 1)?;
        a[(i, modes + i)] = 1.0;
        a[(modes + i, i)] = -stiffness(n);
        a[(modes + i, modes + i)] = -damping_model.coefficient(params, n);
        b[modes + i] = actuator_gain(n, placement);
        let (cw, cv) = sensor_gains(n, placement);
        c[i] = cw;
        c[modes + i] = cv;
    }
    Ok(ModalSystem {
        modes,
        a,
        b,
        c,
        params: *params,
        placement: *placement,
        damping_model,
    })
}

impl ModalSystem {
    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn mode(&self, i: usize) -> ModeIndex {
        ModeIndex::new(i + 1).expect("index offset by one")
    }

    /// Open-loop eigenvalue pair of each retained mode, mode order.
    pub fn open_loop_pairs(&self) -> Vec<(num_complex::Complex64, num_complex::Complex64)> {
        (0..self.modes)
            .map(|i| {
                let n = self.mode(i);
                crate::beam_model::modal_roots(stiffness(n), self.damping_model.coefficient(&self.params, n))
            })
            .collect()
    }

    /// Mode shape at the sensor, for output reconstruction.
    pub fn sensor_shape(&self, i: usize) -> f64 {
        mode_shape(self.mode(i), self.placement.sensor).expect("sensor validated in (0, 1)")
    }
}

/// Modal energy `1/2 sum (w_n'^2 + sigma_n^4 w_n^2)` of a state `[w.., w'..]`
/// whose first entry is mode `first_mode`.
pub fn modal_energy(state: &[f64], first_mode: usize) -> f64 {
    let m = state.len() / 2;
    (0..m)
        .map(|i| {
            let n = ModeIndex::new(first_mode + i).expect("first_mode >= 1");
            0.5 * (state[m + i].powi(2) + stiffness(n) * state[i].powi(2))
        })
        .sum()
}

/// Coefficients of one uncontrolled mode `w_k'' + d_k w_k' + s_k w_k = a2 f_k (+ b_k V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualMode {
    pub mode: ModeIndex,
    pub stiffness: f64,
    pub damping: f64,
    pub actuator_gain: f64,
    pub sensor_shape: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBlock {
    pub first_mode: usize,
    pub modes: Vec<ResidualMode>,
}

impl ResidualBlock {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

pub fn residual_block(
    params: &BeamParams,
    placement: &Placement,
    modes: usize,
    count: usize,
    damping_model: DampingModel,
) -> Result<ResidualBlock> {
    params.validate()?;
    placement.validate()?;
    let first_mode = modes + 1;
    let modes = (first_mode..first_mode + count)
        .map(|k| {
            let n = ModeIndex::new(k)?;
            Ok(ResidualMode {
                mode: n,
                stiffness: stiffness(n),
                damping: damping_model.coefficient(params, n),
                actuator_gain: actuator_gain(n, placement),
                sensor_shape: mode_shape(n, placement.sensor)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualBlock { first_mode, modes })
}
