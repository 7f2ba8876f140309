//! Small dense helpers on top of nalgebra: nonsymmetric spectra, eigenvectors,
//! eigenbasis conditioning and spectrum matching.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues of a real square matrix (real Schur form, Francis double shift).
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let (balanced, _) = balance(m);
    let schur = balanced
        .try_schur(f64::EPSILON, 100_000)
        .ok_or_else(|| Error::InternalConsistency("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Diagonal similarity `D^-1 M D` with power-of-two entries that equalises
/// row and column norms (the classic Parlett-Reinsch sweep). Returns the
/// balanced matrix and the diagonal of `D`.
pub fn balance(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut d = DVector::from_element(n, 1.0);
    const RADIX: f64 = 2.0;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            while cc < r / RADIX {
                f *= RADIX;
                cc *= RADIX * RADIX;
            }
            while cc > r * RADIX {
                f /= RADIX;
                cc /= RADIX * RADIX;
            }
            if (cc + r) / f < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
    (a, d)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Unit right null vector of `M - mu I` (smallest right singular vector).
pub fn eigenvector(m: &DMatrix<f64>, mu: Complex64) -> DVector<Complex64> {
    let n = m.nrows();
    let shifted = to_complex(m) - CMatrix::identity(n, n) * mu;
    smallest_right_singular_vector(shifted).0
}

/// Smallest singular value and its right singular vector.
pub fn smallest_right_singular_vector(m: CMatrix) -> (DVector<Complex64>, f64) {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let (idx, sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &s)| if s < best.1 { (i, s) } else { best });
    let v: DVector<Complex64> = v_t.row(idx).adjoint().into_owned();
    (v, sigma)
}

pub fn singular_values(m: CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Eigenvector matrix with unit columns, one column per eigenvalue.
pub fn eigenvector_matrix(m: &DMatrix<f64>, eigs: &[Complex64]) -> CMatrix {
    let n = m.nrows();
    let mut v = CMatrix::zeros(n, eigs.len());
    for (j, &mu) in eigs.iter().enumerate() {
        v.set_column(j, &eigenvector(m, mu));
    }
    v
}

/// Condition number of a complex matrix in the spectral norm; `inf` if singular.
pub fn condition_number(v: &CMatrix) -> f64 {
    let s = singular_values(v.clone());
    match (s.first(), s.last()) {
        (Some(&max), Some(&min)) if min > 0.0 => max / min,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// `cond(V)` for the unit-column eigenvector matrix of `m`, so that
/// `||exp(M t)|| <= kappa * exp(max Re(lambda) t)` when `m` is diagonalisable.
pub fn eigenbasis_condition(m: &DMatrix<f64>) -> Result<f64> {
    let eigs = eigenvalues(m)?;
    Ok(condition_number(&eigenvector_matrix(m, &eigs)))
}

/// Spectral norm of a real matrix.
pub fn norm2(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Largest relative deviation between two spectra after greedy nearest
/// matching: `max |a_i - b_pi(i)| / max(|b_pi(i)|, 1)`.
pub fn spectrum_mismatch(computed: &[Complex64], expected: &[Complex64]) -> f64 {
    if computed.len() != expected.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; computed.len()];
    let mut worst: f64 = 0.0;
    for &t in expected {
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for (i, &c) in computed.iter().enumerate() {
            if used[i] {
                continue;
            }
            let d = (c - t).norm();
            if d < best_d {
                best_d = d;
                best = Some(i);
            }
        }
        if let Some(i) = best {
            used[i] = true;
        }
        worst = worst.max(best_d / t.norm().max(1.0));
    }
    worst
}

/// True when `values` is closed under complex conjugation (as a multiset,
/// up to `tol` relative).
pub fn is_conjugate_closed(values: &[Complex64], tol: f64) -> bool {
    let conj: Vec<Complex64> = values.iter().map(|v| v.conj()).collect();
    spectrum_mismatch(values, &conj) <= tol
}
