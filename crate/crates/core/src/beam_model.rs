//! Hinged-hinged Euler-Bernoulli beam with a symmetric piezo patch pair.
//!
//! Physical constants are mapped to the dimensionless bending equation
//!
//! ```text
//! w_tt + w_xxxx - a1 w_xxt = -V(t) (chi_omega)'' + a2 F(x, t),   x in [0, 1]
//! ```
//!
//! whose modal basis is `psi_n(x) = sqrt(2) sin(n pi x)` with `sigma_n = n pi`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Physical description of the beam and patches (SI units).
#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalBeam {
    pub length: f64,
    pub half_height: f64,
    pub width: f64,
    pub density: f64,
    pub elastic_modulus: f64,
    pub inertia_moment: f64,
    /// Damping parameter `c_D`; zero means undamped.
    pub damping: f64,
    pub piezo_constant: f64,
    pub patch_height: f64,
}

impl PhysicalBeam {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length", self.length),
            ("half_height", self.half_height),
            ("width", self.width),
            ("density", self.density),
            ("elastic_modulus", self.elastic_modulus),
            ("inertia_moment", self.inertia_moment),
            ("piezo_constant", self.piezo_constant),
            ("patch_height", self.patch_height),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be strictly positive, got {value}"
                )));
            }
        }
        if !(self.damping.is_finite() && self.damping >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "damping must be non-negative, got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

/// Dimensionless coefficients of the bending equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams {
    /// Structural damping coefficient.
    pub a1: f64,
    /// Disturbance force scale.
    pub a2: f64,
    /// Time scale: physical time = `alpha1` * dimensionless time.
    pub alpha1: f64,
    /// Displacement scale.
    pub alpha4: f64,
}

impl BeamParams {
    /// Dimensionless parameters given directly, with unit time and displacement scales.
    pub fn dimensionless(a1: f64, a2: f64) -> Result<Self> {
        let params = BeamParams {
            a1,
            a2,
            alpha1: 1.0,
            alpha4: 1.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a1.is_finite() && self.a1 >= 0.0) {
            return Err(Error::InvalidInput(format!("a1 must be >= 0, got {}", self.a1)));
        }
        // a2 = 0 is accepted: it switches the disturbance off.
        if !(self.a2.is_finite() && self.a2 >= 0.0) {
            return Err(Error::InvalidInput(format!("a2 must be >= 0, got {}", self.a2)));
        }
        if !(self.alpha1.is_finite() && self.alpha1 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "alpha1 must be > 0, got {}",
                self.alpha1
            )));
        }
        if !(self.alpha4.is_finite() && self.alpha4 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "alpha4 must be > 0, got {}",
                self.alpha4
            )));
        }
        Ok(())
    }
}

/// Mode number `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex(usize);

impl ModeIndex {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("mode index must be >= 1".into()));
        }
        Ok(ModeIndex(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// `sigma_n = n pi`.
    pub fn sigma(self) -> f64 {
        self.0 as f64 * PI
    }
}

impl TryFrom<usize> for ModeIndex {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        ModeIndex::new(n)
    }
}

pub fn nondimensionalize(phys: &PhysicalBeam) -> Result<BeamParams> {
    phys.validate()?;
    let PhysicalBeam {
        length,
        half_height,
        width,
        density,
        elastic_modulus,
        inertia_moment,
        damping,
        piezo_constant,
        ..
    } = *phys;
    let ei = elastic_modulus * inertia_moment;
    let l4hb = length.powi(4) * half_height * width;
    let alpha1 = (density * l4hb / ei).sqrt();
    let alpha4 = piezo_constant * l4hb / (2.0 * ei);
    let a1 = damping / (ei * density * half_height * width).sqrt();
    let a2 = alpha1 * alpha1 / (alpha4 * density);
    let params = BeamParams {
        a1,
        a2,
        alpha1,
        alpha4,
    };
    params.validate()?;
    Ok(params)
}

fn check_position(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain { x })
    }
}

/// `sin(pi t)`, exactly zero at integers.
pub(crate) fn sin_pi(t: f64) -> f64 {
    let r = t % 2.0;
    if r.fract() == 0.0 {
        0.0
    } else {
        (PI * r).sin()
    }
}

/// `cos(pi t)`, exactly zero at half-integers.
pub(crate) fn cos_pi(t: f64) -> f64 {
    let r = t % 2.0;
    if (r.abs() - 0.5).fract() == 0.0 {
        0.0
    } else {
        (PI * r).cos()
    }
}

/// `psi_n(x) = sqrt(2) sin(n pi x)`, orthonormal in L2(0, 1).
pub fn mode_shape(n: ModeIndex, x: f64) -> Result<f64> {
    check_position(x)?;
    Ok(SQRT_2 * sin_pi(n.get() as f64 * x))
}

/// `psi_n'(x) = sqrt(2) n pi cos(n pi x)`.
pub fn mode_shape_derivative(n: ModeIndex, x: f64) -> Result<f64> {
    check_position(x)?;
    Ok(SQRT_2 * n.sigma() * cos_pi(n.get() as f64 * x))
}

/// Roots of `lambda^2 + damping * lambda + stiffness = 0`.
///
/// Complex pairs are returned with the positive imaginary part first; real
/// pairs with the more negative root first. The real case avoids cancellation.
pub fn modal_roots(stiffness: f64, damping: f64) -> (Complex64, Complex64) {
    let disc = damping * damping - 4.0 * stiffness;
    if disc < 0.0 {
        let re = -damping / 2.0;
        let im = (-disc).sqrt() / 2.0;
        (Complex64::new(re, im), Complex64::new(re, -im))
    } else if disc == 0.0 {
        let r = Complex64::new(-damping / 2.0, 0.0);
        (r, r)
    } else {
        let q = -0.5 * (damping + damping.signum() * disc.sqrt());
        let (r1, r2) = if q == 0.0 {
            // damping == 0 and stiffness <= 0
            let s = disc.sqrt() / 2.0;
            (-s, s)
        } else {
            (q, stiffness / q)
        };
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        (Complex64::new(lo, 0.0), Complex64::new(hi, 0.0))
    }
}

/// Eigenvalue pair of the continuous operator on mode `n`:
/// the roots of `lambda^2 + a1 sigma_n^2 lambda + sigma_n^4 = 0`.
pub fn continuous_eigenvalues(params: &BeamParams, n: ModeIndex) -> (Complex64, Complex64) {
    let s2 = n.sigma().powi(2);
    modal_roots(s2 * s2, params.a1 * s2)
}

/// `sum_n w_n psi_n(x)`.
pub fn reconstruct_displacement(coeffs: &[(ModeIndex, f64)], x: f64) -> Result<f64> {
    check_position(x)?;
    coeffs.iter().try_fold(0.0, |acc, &(n, w)| {
        if !w.is_finite() {
            return Err(Error::InvalidInput(format!("coefficient of mode {} is not finite", n.get())));
        }
        Ok(acc + w * mode_shape(n, x)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(n: usize) -> ModeIndex {
        ModeIndex::new(n).unwrap()
    }

    fn unit_beam() -> PhysicalBeam {
        PhysicalBeam {
            length: 1.0,
            half_height: 1.0,
            width: 1.0,
            density: 1.0,
            elastic_modulus: 1.0,
            inertia_moment: 1.0,
            damping: 0.01,
            piezo_constant: 2.0,
            patch_height: 0.1,
        }
    }

    #[test]
    fn nondimensional_unit_beam() {
        let p = nondimensionalize(&unit_beam()).unwrap();
        assert_relative_eq!(p.a1, 0.01, epsilon = 1e-15);
        assert_relative_eq!(p.alpha1, 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.alpha4, 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.a2, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_damping_gives_zero_a1() {
        let mut beam = unit_beam();
        beam.damping = 0.0;
        beam.length = 0.7;
        beam.density = 2700.0;
        assert_eq!(nondimensionalize(&beam).unwrap().a1, 0.0);
    }

    #[test]
    fn non_positive_physical_field_rejected() {
        let mut beam = unit_beam();
        beam.width = 0.0;
        assert!(matches!(nondimensionalize(&beam), Err(Error::InvalidInput(_))));
        let mut beam = unit_beam();
        beam.damping = -1.0;
        assert!(nondimensionalize(&beam).is_err());
    }

    #[test]
    fn mode_shape_values() {
        assert_relative_eq!(mode_shape(m(1), 0.5).unwrap(), SQRT_2, epsilon = 1e-15);
        assert_eq!(mode_shape(m(2), 0.5).unwrap(), 0.0);
        assert_relative_eq!(mode_shape(m(1), 0.6).unwrap(), 1.344_997_023_927_915, epsilon = 1e-12);
        assert!(matches!(mode_shape(m(1), 1.5), Err(Error::Domain { .. })));
        assert!(mode_shape(m(1), -0.1).is_err());
    }

    #[test]
    fn mode_shape_derivative_values() {
        assert_relative_eq!(mode_shape_derivative(m(1), 0.0).unwrap(), 4.442_882_938_158_366, epsilon = 1e-12);
        assert_eq!(mode_shape_derivative(m(1), 0.5).unwrap(), 0.0);
        assert_eq!(mode_shape_derivative(m(2), 0.25).unwrap(), 0.0);
        assert!(mode_shape_derivative(m(3), 1.01).is_err());
    }

    #[test]
    fn derivative_matches_central_difference() {
        for n in 1..=6 {
            for &x in &[0.1, 0.33, 0.5, 0.77] {
                let h = 1e-6;
                let fd = (mode_shape(m(n), x + h).unwrap() - mode_shape(m(n), x - h).unwrap()) / (2.0 * h);
                assert_relative_eq!(mode_shape_derivative(m(n), x).unwrap(), fd, epsilon = 1e-6, max_relative = 1e-7);
            }
        }
    }

    /// Composite Simpson on [0, 1].
    fn simpson(f: impl Fn(f64) -> f64, intervals: usize) -> f64 {
        let n = intervals + intervals % 2;
        let h = 1.0 / n as f64;
        let mut acc = f(0.0) + f(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn modes_are_orthonormal() {
        for a in 1..=10 {
            for b in 1..=10 {
                let points = 10 * a.max(b) * a.max(b) + 200;
                let ip = simpson(
                    |x| mode_shape(m(a), x).unwrap() * mode_shape(m(b), x).unwrap(),
                    points,
                );
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-10, "<psi_{a}, psi_{b}> = {ip}");
            }
        }
    }

    fn residual(p: &BeamParams, n: ModeIndex, l: Complex64) -> f64 {
        let s2 = n.sigma().powi(2);
        (l * l + l * (p.a1 * s2) + s2 * s2).norm() / (s2 * s2)
    }

    #[test]
    fn eigenvalues_undamped() {
        let p = BeamParams::dimensionless(0.0, 1.0).unwrap();
        let (l1, l2) = continuous_eigenvalues(&p, m(1));
        assert_eq!(l1.re, 0.0);
        assert_relative_eq!(l1.im, 9.869_604_401_089_358, epsilon = 1e-12);
        assert_relative_eq!(l2.im, -9.869_604_401_089_358, epsilon = 1e-12);
    }

    #[test]
    fn eigenvalues_light_damping() {
        let p = BeamParams::dimensionless(0.01, 1.0).unwrap();
        let (l1, l2) = continuous_eigenvalues(&p, m(1));
        assert_relative_eq!(l1.re, -0.049_348_022_005_446_79, epsilon = 1e-12);
        assert_relative_eq!(l1.im, 9.869_481_030_263_271, epsilon = 1e-9);
        assert_eq!(l2, l1.conj());
        assert!(residual(&p, m(1), l1) < 1e-12);
    }

    #[test]
    fn eigenvalues_overdamped() {
        let p = BeamParams::dimensionless(3.0, 1.0).unwrap();
        let (l1, l2) = continuous_eigenvalues(&p, m(1));
        let pi2 = PI * PI;
        assert_relative_eq!(l1.re, pi2 * (-3.0 - 5f64.sqrt()) / 2.0, max_relative = 1e-14);
        assert_relative_eq!(l2.re, pi2 * (-3.0 + 5f64.sqrt()) / 2.0, max_relative = 1e-14);
        assert_eq!(l1.im, 0.0);
        assert_relative_eq!(l1.re * l2.re, pi2 * pi2, max_relative = 1e-14);
    }

    #[test]
    fn critical_damping_is_double_root() {
        let p = BeamParams::dimensionless(2.0, 1.0).unwrap();
        let (l1, l2) = continuous_eigenvalues(&p, m(2));
        let s2 = m(2).sigma().powi(2);
        assert_eq!(l1, l2);
        assert_relative_eq!(l1.re, -s2, max_relative = 1e-14);
    }

    #[test]
    fn reconstruct_sums() {
        assert_eq!(reconstruct_displacement(&[], 0.3).unwrap(), 0.0);
        assert_relative_eq!(reconstruct_displacement(&[(m(1), 1.0)], 0.5).unwrap(), SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(
            reconstruct_displacement(&[(m(1), 1.0), (m(2), 1.0)], 0.25).unwrap(),
            2.414_213_562_373_095,
            epsilon = 1e-12
        );
        assert!(reconstruct_displacement(&[(m(1), f64::NAN)], 0.25).is_err());
    }

    #[test]
    fn mode_index_rejects_zero() {
        assert!(ModeIndex::new(0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn roots_solve_characteristic_quadratic(a1 in 0.0f64..10.0, n in 1usize..25) {
                let p = BeamParams::dimensionless(a1, 1.0).unwrap();
                let (l1, l2) = continuous_eigenvalues(&p, m(n));
                prop_assert!(residual(&p, m(n), l1) <= 1e-9);
                prop_assert!(residual(&p, m(n), l2) <= 1e-9);
            }

            #[test]
            fn damped_roots_are_stable(a1 in 1e-4f64..10.0, n in 1usize..25) {
                let p = BeamParams::dimensionless(a1, 1.0).unwrap();
                let (l1, l2) = continuous_eigenvalues(&p, m(n));
                prop_assert!(l1.re < 0.0 && l2.re < 0.0);
            }

            #[test]
            fn underdamped_real_part(a1 in 0.0f64..1.999, n in 1usize..25) {
                let p = BeamParams::dimensionless(a1, 1.0).unwrap();
                let (l1, _) = continuous_eigenvalues(&p, m(n));
                prop_assert_eq!(l1.re, -a1 * m(n).sigma().powi(2) / 2.0);
            }
        }
    }
}
