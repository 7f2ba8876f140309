//! Placement verdicts, single-input pole placement for the controller and
//! observer gains, and grid tuning of both against their steady-state bounds.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::beam_model::modal_roots;
use crate::error::{Error, Result};
use crate::linalg::{
    balance, eigenvalues, spectrum_mismatch, eigenvector_matrix, is_conjugate_closed, norm2, singular_values, to_complex, CMatrix,
};
use crate::modal_system::{stiffness, ModalSystem};

/// Relative size below which a closed-form input/output entry counts as zero.
pub const ZERO_ENTRY_TOL: f64 = 1e-9;
/// Relative smallest singular value below which the PBH matrix is rank deficient.
pub const PBH_RANK_TOL: f64 = 1e-11;
/// Closed-form metrics inside this band may legitimately disagree with the
/// numeric rank test; outside it a disagreement is an error.
const GRAY_BAND: (f64, f64) = (1e-12, 1e-6);

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementVerdict {
    pub observable: bool,
    pub controllable: bool,
    /// Modes failing either test, ascending.
    pub offending_modes: Vec<usize>,
    pub unobservable_modes: Vec<usize>,
    pub uncontrollable_modes: Vec<usize>,
    pub closed_form_reason: String,
    pub pbh_observable: bool,
    pub pbh_controllable: bool,
    pub warnings: Vec<String>,
}

impl PlacementVerdict {
    pub fn is_feasible(&self) -> bool {
        self.observable && self.controllable
    }
}

/// Per-mode closed-form metrics: sensor entry and actuator entry relative to
/// the largest entry of the same vector.
fn closed_form_metrics(system: &ModalSystem) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let n = system.modes;
    let c_mag: Vec<f64> = (0..n).map(|i| system.c[i].abs().max(system.c[n + i].abs())).collect();
    let b_mag: Vec<f64> = (0..n).map(|i| system.b[n + i].abs()).collect();
    let c_max = c_mag.iter().copied().fold(0.0, f64::max);
    let b_max = b_mag.iter().copied().fold(0.0, f64::max);
    let rel = |v: &[f64], max: f64| -> Vec<f64> {
        v.iter().map(|&x| if max > 0.0 { x / max } else { 0.0 }).collect()
    };
    // With mixed displacement/velocity sensing an overdamped root can cancel
    // the output polynomial s1 + s2 * lambda.
    let s1 = system.placement.weight_s1;
    let s2 = system.placement.weight_s2;
    let cancels = system
        .open_loop_pairs()
        .iter()
        .map(|&(r1, r2)| {
            [r1, r2].iter().any(|r| {
                let v = Complex64::new(s1, 0.0) + r * s2;
                let scale = s1.abs() + s2.abs() * r.norm();
                scale > 0.0 && v.norm() <= ZERO_ENTRY_TOL * scale
            })
        })
        .collect();
    (rel(&c_mag, c_max), rel(&b_mag, b_max), cancels)
}

/// Smallest singular value of each PBH pencil, relative to its largest,
/// keyed by the retained mode each numeric eigenvalue belongs to.
fn pbh_metrics(system: &ModalSystem) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = system.dim();
    let (ab, d) = balance(&system.a);
    let mut bb = DVector::from_iterator(dim, (0..dim).map(|i| system.b[i] / d[i]));
    let mut cb = RowDVector::from_iterator(dim, (0..dim).map(|i| system.c[i] * d[i]));
    let bn = bb.norm();
    let cn = cb.norm();
    if bn > 0.0 {
        bb /= bn;
    }
    if cn > 0.0 {
        cb /= cn;
    }
    let pairs = system.open_loop_pairs();
    let mut ctrl = vec![f64::INFINITY; system.modes];
    let mut obs = vec![f64::INFINITY; system.modes];
    let ac = to_complex(&ab);
    for mu in eigenvalues(&system.a)? {
        let owner = pairs
            .iter()
            .enumerate()
            .map(|(i, &(r1, r2))| (i, (mu - r1).norm().min((mu - r2).norm())))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let shifted = CMatrix::identity(dim, dim) * mu - &ac;
        let mut pc = CMatrix::zeros(dim, dim + 1);
        pc.view_mut((0, 0), (dim, dim)).copy_from(&shifted);
        for i in 0..dim {
            pc[(i, dim)] = Complex64::new(bb[i], 0.0);
        }
        let mut po = CMatrix::zeros(dim + 1, dim);
        po.view_mut((0, 0), (dim, dim)).copy_from(&shifted);
        for j in 0..dim {
            po[(dim, j)] = Complex64::new(cb[j], 0.0);
        }
        let ratio = |s: Vec<f64>| {
            let max = s.first().copied().unwrap_or(0.0).max(1.0);
            s.last().copied().unwrap_or(0.0) / max
        };
        ctrl[owner] = ctrl[owner].min(ratio(singular_values(pc)));
        obs[owner] = obs[owner].min(ratio(singular_values(po)));
    }
    Ok((obs, ctrl))
}

pub fn check_placement(system: &ModalSystem) -> Result<PlacementVerdict> {
    let (c_rel, b_rel, cancels) = closed_form_metrics(system);
    let (pbh_obs, pbh_ctrl) = pbh_metrics(system)?;
    let mut warnings = Vec::new();
    let mut unobservable = Vec::new();
    let mut uncontrollable = Vec::new();
    let mut reasons = Vec::new();
    let mut pbh_observable = true;
    let mut pbh_controllable = true;

    for i in 0..system.modes {
        let n = i + 1;
        let cf_obs = c_rel[i] > ZERO_ENTRY_TOL && !cancels[i];
        let cf_ctrl = b_rel[i] > ZERO_ENTRY_TOL;
        let num_obs = pbh_obs[i] > PBH_RANK_TOL;
        let num_ctrl = pbh_ctrl[i] > PBH_RANK_TOL;
        pbh_observable &= num_obs;
        pbh_controllable &= num_ctrl;

        if !cf_obs {
            unobservable.push(n);
            reasons.push(format!(
                "mode {n}: sensor at x0 = {} sits on a node of psi_{n} (x0 = k/{n})",
                system.placement.sensor
            ));
        }
        if !cf_ctrl {
            uncontrollable.push(n);
            reasons.push(format!(
                "mode {n}: cos({n} pi x2) = cos({n} pi x1), patch [{}, {}] does not excite it",
                system.placement.patch_left, system.placement.patch_right
            ));
        }
        for (label, cf, num, metric) in [
            ("observability", cf_obs, num_obs, c_rel[i]),
            ("controllability", cf_ctrl, num_ctrl, b_rel[i]),
        ] {
            if cf == num {
                continue;
            }
            if (GRAY_BAND.0..=GRAY_BAND.1).contains(&metric) || cancels[i] {
                warnings.push(format!(
                    "mode {n}: {label} is ill-conditioned (closed form {cf}, rank test {num}, relative entry {metric:e})"
                ));
            } else {
                return Err(Error::InternalConsistency(format!(
                    "mode {n}: closed-form {label} = {cf} but PBH rank test = {num} (relative entry {metric:e})"
                )));
            }
        }
        let abs_b = system.b[system.modes + i].abs() / (std::f64::consts::SQRT_2 * std::f64::consts::PI * n as f64);
        if cf_ctrl && abs_b < ZERO_ENTRY_TOL {
            warnings.push(format!(
                "mode {n}: actuator authority is tiny ({abs_b:e} of the unit-patch scale); gains will be large"
            ));
        }
    }

    let mut offending: Vec<usize> = unobservable.iter().chain(uncontrollable.iter()).copied().collect();
    offending.sort_unstable();
    offending.dedup();
    let closed_form_reason = if reasons.is_empty() {
        format!(
            "all {} sensor and actuator entries are nonzero",
            system.modes
        )
    } else {
        reasons.join("; ")
    };
    Ok(PlacementVerdict {
        observable: unobservable.is_empty(),
        controllable: uncontrollable.is_empty(),
        offending_modes: offending,
        unobservable_modes: unobservable,
        uncontrollable_modes: uncontrollable,
        closed_form_reason,
        pbh_observable,
        pbh_controllable,
        warnings,
    })
}

fn validate_targets(n: usize, targets: &[Complex64]) -> Result<()> {
    if targets.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {n} target poles, got {}",
            targets.len()
        )));
    }
    if targets.iter().any(|t| !(t.re.is_finite() && t.im.is_finite())) {
        return Err(Error::InvalidInput("target poles must be finite".into()));
    }
    if !is_conjugate_closed(targets, 1e-12) {
        return Err(Error::InvalidInput("target poles must be closed under conjugation".into()));
    }
    Ok(())
}

/// Real monic polynomial with the given roots, highest power first.
fn poly_from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        coeffs = next;
    }
    coeffs.iter().map(|c| c.re).collect()
}

/// Ackermann's formula `K = e_n^T W^-1 p(A)` with controllability matrix `W`.
pub fn ackermann(a: &DMatrix<f64>, b: &DVector<f64>, targets: &[Complex64]) -> Result<RowDVector<f64>> {
    let n = a.nrows();
    check_shapes(a, b.len())?;
    validate_targets(n, targets)?;
    let mut w = DMatrix::zeros(n, n);
    let mut col = b.clone();
    for j in 0..n {
        w.set_column(j, &col);
        col = a * col;
    }
    let s = singular_values(to_complex(&w));
    let (smax, smin) = (s[0], s[n - 1]);
    if smax == 0.0 || smin / smax < 1e-14 {
        return Err(Error::Uncontrollable(format!(
            "controllability matrix is singular (rcond {:e})",
            if smax == 0.0 { 0.0 } else { smin / smax }
        )));
    }
    let coeffs = poly_from_roots(targets);
    // Horner: p(A) = A^n + c1 A^{n-1} + ... + cn I
    let mut p = DMatrix::identity(n, n);
    for &c in &coeffs[1..] {
        p = a * p + DMatrix::identity(n, n) * c;
    }
    let mut e = DVector::zeros(n);
    e[n - 1] = 1.0;
    let x = w
        .transpose()
        .lu()
        .solve(&e)
        .ok_or_else(|| Error::Uncontrollable("controllability matrix is singular".into()))?;
    Ok(x.transpose() * p)
}

fn check_shapes(a: &DMatrix<f64>, b_len: usize) -> Result<()> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::InvalidInput("state matrix must be square and non-empty".into()));
    }
    if b_len != a.nrows() {
        return Err(Error::InvalidInput(format!(
            "input vector has {b_len} entries, state dimension is {}",
            a.nrows()
        )));
    }
    Ok(())
}

/// State feedback `K` with `eig(A - B K) = targets`.
///
/// With a diagonalisable `A` of distinct eigenvalues `mu_i`, the modal gains
/// follow from the residues of the closed-loop characteristic polynomial:
///
/// ```text
/// (K V)_i = prod_j (mu_i - t_j) / (b_i prod_{l != i} (mu_i - mu_l)),   b = V^-1 B
/// ```
///
/// which avoids forming the (badly conditioned) controllability matrix.
/// Repeated open-loop eigenvalues fall back to Ackermann's formula.
///
/// The gain is then refined by re-placing the poles of `A - B K`, whose
/// eigenvalues are already close to the targets; each correction is kept
/// only if it reduces the spectrum mismatch.
pub fn place_poles(a: &DMatrix<f64>, b: &DVector<f64>, targets: &[Complex64]) -> Result<RowDVector<f64>> {
    let n = a.nrows();
    check_shapes(a, b.len())?;
    validate_targets(n, targets)?;
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("input vector has non-finite entries".into()));
    }
    let mut k = residue_gain(a, b, targets)?;
    let mismatch = |k: &RowDVector<f64>| -> f64 {
        match eigenvalues(&(a - b * k)) {
            Ok(e) => spectrum_mismatch(&e, targets),
            Err(_) => f64::INFINITY,
        }
    };
    let mut err = mismatch(&k);
    for _ in 0..3 {
        if err <= 1e-14 {
            break;
        }
        let Ok(dk) = residue_gain(&(a - b * &k), b, targets) else {
            break;
        };
        let next = &k + dk;
        let next_err = mismatch(&next);
        if next_err >= err {
            break;
        }
        k = next;
        err = next_err;
    }
    Ok(k)
}

fn residue_gain(a: &DMatrix<f64>, b: &DVector<f64>, targets: &[Complex64]) -> Result<RowDVector<f64>> {
    let n = a.nrows();
    let mu = eigenvalues(a)?;
    let scale = mu.iter().map(|m| m.norm()).fold(1.0, f64::max);
    let distinct = (0..n).all(|i| (0..i).all(|j| (mu[i] - mu[j]).norm() > 1e-6 * scale));
    if !distinct {
        return ackermann(a, b, targets);
    }
    let v = eigenvector_matrix(a, &mu);
    let lu = v.clone().lu();
    let bc: DVector<Complex64> = b.map(|x| Complex64::new(x, 0.0));
    let bt = lu
        .solve(&bc)
        .ok_or_else(|| Error::InternalConsistency("eigenvector matrix is singular".into()))?;
    let bmax = bt.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if bmax == 0.0 {
        return Err(Error::Uncontrollable("input vector is zero".into()));
    }
    let mut kt = DVector::<Complex64>::zeros(n);
    for i in 0..n {
        if bt[i].norm() <= 1e-10 * bmax {
            return Err(Error::Uncontrollable(format!(
                "eigenvalue {:.6} is not reachable from the input",
                mu[i]
            )));
        }
        let mut r = mu[i] - targets[i];
        for j in 0..n {
            if j != i {
                r *= (mu[i] - targets[j]) / (mu[i] - mu[j]);
            }
        }
        kt[i] = r / bt[i];
    }
    // K = kt^T V^-1, i.e. solve V^T K^T = kt
    let k = v
        .transpose()
        .lu()
        .solve(&kt)
        .ok_or_else(|| Error::InternalConsistency("eigenvector matrix is singular".into()))?;
    let knorm = k.norm();
    let imag = k.iter().map(|x| x.im.abs()).fold(0.0, f64::max);
    if imag > 1e-6 * knorm.max(1e-300) {
        return Err(Error::InternalConsistency(format!(
            "placed gain has an imaginary part {imag:e} (norm {knorm:e})"
        )));
    }
    Ok(RowDVector::from_iterator(n, k.iter().map(|x| x.re)))
}

/// Observer gain `L` with `eig(A - L C) = targets`, by duality.
pub fn place_observer_poles(a: &DMatrix<f64>, c: &RowDVector<f64>, targets: &[Complex64]) -> Result<DVector<f64>> {
    match place_poles(&a.transpose(), &c.transpose(), targets) {
        Ok(k) => Ok(k.transpose()),
        Err(Error::Uncontrollable(msg)) => Err(Error::Unobservable(msg)),
        Err(e) => Err(e),
    }
}

/// `min |Re lambda|` over the spectrum of a Hurwitz matrix.
pub fn decay_rate(m: &DMatrix<f64>) -> Result<f64> {
    let eigs = eigenvalues(m)?;
    if let Some(bad) = eigs.iter().find(|e| e.re >= 0.0) {
        return Err(Error::UnstableMatrix { re: bad.re });
    }
    Ok(eigs.iter().map(|e| e.re.abs()).fold(f64::INFINITY, f64::min))
}

/// Controller and observer gains with their decay rates.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    pub k: RowDVector<f64>,
    pub l: DVector<f64>,
    pub lambda_k: f64,
    pub lambda_l: f64,
    pub k_norm: f64,
    pub l_norm: f64,
}

impl GainSet {
    /// Validates stability of `A - B K` and `A - L C` and records decay rates.
    pub fn new(system: &ModalSystem, k: RowDVector<f64>, l: DVector<f64>) -> Result<Self> {
        let dim = system.dim();
        if k.len() != dim || l.len() != dim {
            return Err(Error::InvalidInput(format!(
                "gains must have {dim} entries (K has {}, L has {})",
                k.len(),
                l.len()
            )));
        }
        let lambda_k = decay_rate(&(&system.a - &system.b * &k))?;
        let lambda_l = decay_rate(&(&system.a - &l * &system.c))?;
        Ok(GainSet {
            k_norm: k.norm(),
            l_norm: l.norm(),
            k,
            l,
            lambda_k,
            lambda_l,
        })
    }

    /// Zero gains; decay rates are those of the open-loop plant (zero when it
    /// is not strictly stable).
    pub fn open_loop(system: &ModalSystem) -> Self {
        let rate = decay_rate(&system.a).unwrap_or(0.0);
        GainSet {
            k: RowDVector::zeros(system.dim()),
            l: DVector::zeros(system.dim()),
            lambda_k: rate,
            lambda_l: rate,
            k_norm: 0.0,
            l_norm: 0.0,
        }
    }

    /// Spectral norm of the rank-one product `B K`.
    pub fn bk_norm(&self, system: &ModalSystem) -> f64 {
        system.b.norm() * self.k_norm
    }
}

/// Velocity feedback through the actuator's own adjoint, `K = g B^T`. The
/// plant energy is non-increasing under `V = -K z` for any `g >= 0`.
pub fn collocated_rate_feedback(system: &ModalSystem, gain: f64) -> RowDVector<f64> {
    system.b.transpose() * gain
}

/// Target spectrum for a decay rate `lambda`: mode `n` keeps its open-loop
/// damped frequency and moves its real part to `-lambda (1 + spread (n-1)/N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolePattern {
    pub spread: f64,
}

impl Default for PolePattern {
    fn default() -> Self {
        PolePattern { spread: 1.0 }
    }
}

impl PolePattern {
    pub fn targets(&self, system: &ModalSystem, lambda: f64) -> Vec<Complex64> {
        let n = system.modes as f64;
        let mut out = Vec::with_capacity(system.dim());
        for i in 0..system.modes {
            let mode = system.mode(i);
            let (root, _) = modal_roots(stiffness(mode), system.damping_model.coefficient(&system.params, mode));
            let re = -lambda * (1.0 + self.spread * i as f64 / n);
            if root.im.abs() > 0.0 {
                out.push(Complex64::new(re, root.im.abs()));
                out.push(Complex64::new(re, -root.im.abs()));
            } else {
                out.push(Complex64::new(re, 0.0));
                out.push(Complex64::new(-lambda * (1.0 + self.spread * (i as f64 + 0.5) / n), 0.0));
            }
        }
        out
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub lambda_nominal: f64,
    pub lambda_actual: f64,
    pub gain_norm: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneOutcome {
    pub gains: GainSet,
    /// Steady observer-error bound `(F + ||L|| eps) / lambda_L` of the chosen `L`.
    pub e_steady: f64,
    /// Steady state bound `(F + ||B K|| e_steady) / lambda_K` of the chosen `K`.
    pub z_steady: f64,
    pub observer_candidates: Vec<Candidate>,
    pub controller_candidates: Vec<Candidate>,
}

/// Controller grid used when none is given: the observer-grid values below
/// `lambda_L` together with `lambda_L / 2^j`, `j = 1..=6`.
pub fn default_controller_grid(observer_grid: &[f64], lambda_l: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = observer_grid.iter().copied().filter(|&x| x < lambda_l).collect();
    grid.extend((1..=6).map(|j| lambda_l / f64::from(1u32 << j)));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn first_argmin(cands: &[Option<Candidate>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in cands.iter().enumerate() {
        if let Some(c) = c {
            if best.is_none_or(|(_, b)| c.bound < b) {
                best = Some((i, c.bound));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Observer grid search followed by controller grid search, each minimising
/// its steady-state bound. The controller is restricted to `lambda_K < lambda_L`.
pub fn tune_gains_with(
    system: &ModalSystem,
    f_bound: f64,
    eps_bound: f64,
    observer_grid: &[f64],
    controller_grid: Option<&[f64]>,
    pattern: &PolePattern,
) -> Result<TuneOutcome> {
    if observer_grid.is_empty() {
        return Err(Error::NoFeasibleGain("observer grid is empty".into()));
    }
    if observer_grid.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return Err(Error::InvalidInput("grid decay rates must be positive".into()));
    }
    let ac = &system.a;

    let observers: Vec<Result<Option<(Candidate, DVector<f64>)>>> = observer_grid
        .par_iter()
        .map(|&lambda| {
            let l = place_observer_poles(ac, &system.c, &pattern.targets(system, lambda))?;
            match decay_rate(&(ac - &l * &system.c)) {
                Ok(rate) => {
                    let norm = l.norm();
                    let bound = (f_bound + norm * eps_bound) / rate;
                    Ok(Some((
                        Candidate {
                            lambda_nominal: lambda,
                            lambda_actual: rate,
                            gain_norm: norm,
                            bound,
                        },
                        l,
                    )))
                }
                Err(Error::UnstableMatrix { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let observers = observers.into_iter().collect::<Result<Vec<_>>>()?;
    let obs_cands: Vec<Option<Candidate>> = observers.iter().map(|o| o.as_ref().map(|(c, _)| c.clone())).collect();
    let best_l = first_argmin(&obs_cands).ok_or_else(|| Error::NoFeasibleGain("every observer candidate is unstable".into()))?;
    let (l_cand, l) = observers[best_l].clone().expect("argmin is feasible");
    let e_steady = l_cand.bound;
    let lambda_l = l_cand.lambda_actual;

    let grid: Vec<f64> = match controller_grid {
        Some(g) => g.to_vec(),
        None => default_controller_grid(observer_grid, l_cand.lambda_nominal),
    };
    let b_norm = system.b.norm();
    let controllers: Vec<Result<Option<(Candidate, RowDVector<f64>)>>> = grid
        .par_iter()
        .map(|&lambda| {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(Error::InvalidInput("grid decay rates must be positive".into()));
            }
            let k = place_poles(ac, &system.b, &pattern.targets(system, lambda))?;
            match decay_rate(&(ac - &system.b * &k)) {
                Ok(rate) if rate < lambda_l => {
                    let norm = k.norm();
                    let bound = (f_bound + b_norm * norm * e_steady) / rate;
                    Ok(Some((
                        Candidate {
                            lambda_nominal: lambda,
                            lambda_actual: rate,
                            gain_norm: norm,
                            bound,
                        },
                        k,
                    )))
                }
                Ok(_) | Err(Error::UnstableMatrix { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let controllers = controllers.into_iter().collect::<Result<Vec<_>>>()?;
    let ctrl_cands: Vec<Option<Candidate>> = controllers.iter().map(|o| o.as_ref().map(|(c, _)| c.clone())).collect();
    let best_k = first_argmin(&ctrl_cands).ok_or_else(|| {
        Error::NoFeasibleGain(format!("no stable controller candidate with lambda_K < lambda_L = {lambda_l}"))
    })?;
    let (k_cand, k) = controllers[best_k].clone().expect("argmin is feasible");

    let gains = GainSet {
        k_norm: k_cand.gain_norm,
        l_norm: l_cand.gain_norm,
        k,
        l,
        lambda_k: k_cand.lambda_actual,
        lambda_l,
    };
    Ok(TuneOutcome {
        gains,
        e_steady,
        z_steady: k_cand.bound,
        observer_candidates: obs_cands.into_iter().flatten().collect(),
        controller_candidates: ctrl_cands.into_iter().flatten().collect(),
    })
}

pub fn tune_gains(
    system: &ModalSystem,
    f_bound: f64,
    eps_bound: f64,
    lambda_grid: &[f64],
    pattern: &PolePattern,
) -> Result<GainSet> {
    tune_gains_with(system, f_bound, eps_bound, lambda_grid, None, pattern).map(|o| o.gains)
}

/// Norm of `B K`, exposed for analysis.
pub fn bk_norm(system: &ModalSystem, k: &RowDVector<f64>) -> f64 {
    norm2(&(&system.b * k))
}
