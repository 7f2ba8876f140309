//! Disturbance and measurement-noise generators.
//!
//! All generators are stateless functions of `(spec, t)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beam_model::{continuous_eigenvalues, modal_roots, BeamParams, ModeIndex};
use crate::error::{Error, Result};
use crate::modal_system::{stiffness, DampingModel, Placement, ResidualBlock};

/// `amplitude * cos(frequency * t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Harmonic {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t + self.phase).cos()
    }
}

/// Modal forcing coefficients `f_n(t)`; entry `i` of `modes` drives mode `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceSpec {
    modes: Vec<Vec<Harmonic>>,
    amplitude_bound: f64,
    resonant: bool,
}

/// Lowest damped vibration frequency `|Im lambda_1|` (zero if overdamped).
pub fn fundamental_frequency(params: &BeamParams) -> f64 {
    continuous_eigenvalues(params, ModeIndex::new(1).expect("1 >= 1")).0.im.abs()
}

impl DisturbanceSpec {
    /// Checks `sum |A_j| <= amplitude_bound` on every mode, which bounds
    /// `sup_t |f_n(t)|`.
    pub fn new(modes: Vec<Vec<Harmonic>>, amplitude_bound: f64, resonant: bool) -> Result<Self> {
        if !(amplitude_bound.is_finite() && amplitude_bound >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "amplitude bound must be >= 0, got {amplitude_bound}"
            )));
        }
        for (i, harmonics) in modes.iter().enumerate() {
            let mut total = 0.0;
            for h in harmonics {
                if !(h.amplitude.is_finite() && h.frequency.is_finite() && h.phase.is_finite()) {
                    return Err(Error::InvalidInput(format!("mode {} has a non-finite harmonic", i + 1)));
                }
                if h.frequency < 0.0 {
                    return Err(Error::InvalidInput(format!("mode {} has a negative frequency", i + 1)));
                }
                total += h.amplitude.abs();
            }
            if total > amplitude_bound * (1.0 + 1e-12) {
                return Err(Error::InvalidInput(format!(
                    "mode {} amplitudes sum to {total}, above the bound {amplitude_bound}",
                    i + 1
                )));
            }
        }
        Ok(DisturbanceSpec {
            modes,
            amplitude_bound,
            resonant,
        })
    }

    /// Harmonics rescaled so their amplitude sum equals `amplitude_bound`.
    pub fn normalized(modes: Vec<Vec<Harmonic>>, amplitude_bound: f64, resonant: bool) -> Result<Self> {
        let modes = modes
            .into_iter()
            .map(|hs| {
                let total: f64 = hs.iter().map(|h| h.amplitude.abs()).sum();
                if total == 0.0 {
                    return hs;
                }
                let scale = amplitude_bound / total;
                hs.into_iter()
                    .map(|h| Harmonic {
                        amplitude: h.amplitude * scale,
                        ..h
                    })
                    .collect()
            })
            .collect();
        Self::new(modes, amplitude_bound, resonant)
    }

    pub fn none() -> Self {
        DisturbanceSpec {
            modes: Vec::new(),
            amplitude_bound: 0.0,
            resonant: false,
        }
    }

    /// Equal polyharmonic forcing on the first `driven_modes` modes:
    /// `harmonics` equal amplitudes summing to `bound`, frequencies
    /// `j |Im lambda_1| / 3`, zero phases. Harmonic `j = 3` sits on the
    /// fundamental when `harmonics >= 3`.
    pub fn polyharmonic(params: &BeamParams, driven_modes: usize, harmonics: usize, bound: f64) -> Result<Self> {
        if harmonics == 0 {
            return Err(Error::InvalidInput("at least one harmonic is required".into()));
        }
        let w1 = fundamental_frequency(params);
        let amp = bound / harmonics as f64;
        let row: Vec<Harmonic> = (1..=harmonics)
            .map(|j| Harmonic {
                amplitude: amp,
                frequency: if j == 3 { w1 } else { j as f64 * w1 / 3.0 },
                phase: 0.0,
            })
            .collect();
        Self::new(vec![row; driven_modes], bound, harmonics >= 3)
    }

    /// One constant force per mode, starting at mode 1.
    pub fn constant(forces: &[f64]) -> Result<Self> {
        let bound = forces.iter().fold(0.0f64, |m, f| m.max(f.abs()));
        let modes = forces
            .iter()
            .map(|&f| {
                vec![Harmonic {
                    amplitude: f,
                    frequency: 0.0,
                    phase: 0.0,
                }]
            })
            .collect();
        Self::new(modes, bound, false)
    }

    /// Each mode `k` in `first..=last` forced at its own damped frequency with
    /// amplitude `amplitude(k)`; lower modes unforced.
    pub fn self_resonant(
        params: &BeamParams,
        damping: DampingModel,
        first: usize,
        last: usize,
        amplitude: impl Fn(usize) -> f64,
    ) -> Result<Self> {
        let mut modes = vec![Vec::new(); last];
        let mut bound = 0.0f64;
        for k in first.max(1)..=last {
            let n = ModeIndex::new(k)?;
            let (root, _) = modal_roots(stiffness(n), damping.coefficient(params, n));
            let a = amplitude(k);
            bound = bound.max(a.abs());
            modes[k - 1].push(Harmonic {
                amplitude: a,
                frequency: root.im.abs(),
                phase: 0.0,
            });
        }
        Self::new(modes, bound, false)
    }

    pub fn driven_mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn amplitude_bound(&self) -> f64 {
        self.amplitude_bound
    }

    pub fn is_resonant(&self) -> bool {
        self.resonant
    }

    pub fn harmonics(&self, n: ModeIndex) -> &[Harmonic] {
        self.modes.get(n.get() - 1).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Sum of harmonic amplitudes of mode `n`, an upper bound on `|f_n|`.
    pub fn mode_bound(&self, n: ModeIndex) -> f64 {
        self.harmonics(n).iter().map(|h| h.amplitude.abs()).sum()
    }

    /// Checks the resonance flag: mode 1 must carry `|Im lambda_1|`.
    pub fn check_resonance(&self, params: &BeamParams) -> Result<()> {
        if !self.resonant {
            return Ok(());
        }
        let w1 = fundamental_frequency(params);
        let first = self.modes.first().map(Vec::as_slice).unwrap_or(&[]);
        if first.iter().any(|h| h.frequency == w1 && h.amplitude != 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "resonant disturbance must contain the fundamental frequency {w1}"
            )))
        }
    }

    /// Upper bound on `sup_t ||F_N(t)||` over modes `1..=modes`, including the
    /// `a2` scale.
    pub fn vector_bound(&self, params: &BeamParams, modes: usize) -> f64 {
        let sq: f64 = (1..=modes)
            .map(|n| self.mode_bound(ModeIndex::new(n).expect("n >= 1")).powi(2))
            .sum();
        params.a2 * sq.sqrt()
    }
}

/// `f_n(t)`; zero for modes beyond the driven count.
pub fn modal_force(spec: &DisturbanceSpec, n: ModeIndex, t: f64) -> f64 {
    spec.harmonics(n).iter().map(|h| h.eval(t)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseWaveform {
    /// Fresh uniform draw on `[-bound, bound]` per hold interval.
    UniformRandomHold { hold: f64 },
    /// `bound * sin(frequency t + phase)`, phase drawn from the seed.
    Sinusoidal { frequency: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub bound: f64,
    pub seed: u64,
    pub waveform: NoiseWaveform,
}

impl NoiseSpec {
    pub fn silent() -> Self {
        NoiseSpec {
            bound: 0.0,
            seed: 0,
            waveform: NoiseWaveform::UniformRandomHold { hold: 1.0 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bound.is_finite() && self.bound >= 0.0) {
            return Err(Error::InvalidInput(format!("noise bound must be >= 0, got {}", self.bound)));
        }
        match self.waveform {
            NoiseWaveform::UniformRandomHold { hold } if !(hold.is_finite() && hold > 0.0) => {
                Err(Error::InvalidInput(format!("noise hold interval must be > 0, got {hold}")))
            }
            NoiseWaveform::Sinusoidal { frequency } if !frequency.is_finite() => {
                Err(Error::InvalidInput("noise frequency must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Measurement noise `xi(t)`, a deterministic function of `(seed, t)`.
pub fn noise_sample(spec: &NoiseSpec, t: f64) -> f64 {
    if spec.bound == 0.0 {
        return 0.0;
    }
    match spec.waveform {
        NoiseWaveform::UniformRandomHold { hold } => {
            let slot = (t / hold).floor().max(0.0) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            // two 32-bit words per f64 draw
            rng.set_word_pos(u128::from(slot) * 2);
            let u: f64 = rng.random();
            (spec.bound * (2.0 * u - 1.0)).clamp(-spec.bound, spec.bound)
        }
        NoiseWaveform::Sinusoidal { frequency } => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let phase = 2.0 * PI * rng.random::<f64>();
            spec.bound * (frequency * t + phase).sin()
        }
    }
}

/// Observation spillover `r(t) = sum_k (s1 w_k + s2 w_k') psi_k(x0)` from the
/// residual state `[w_k.., w_k'..]`.
pub fn residual_output(state: &[f64], block: &ResidualBlock, placement: &Placement) -> f64 {
    let r = block.len();
    debug_assert_eq!(state.len(), 2 * r);
    block
        .modes
        .iter()
        .enumerate()
        .map(|(i, m)| (placement.weight_s1 * state[i] + placement.weight_s2 * state[r + i]) * m.sensor_shape)
        .sum()
}
