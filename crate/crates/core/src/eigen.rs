//! Dense eigenvalue helpers: all eigenvalues from a real Schur form, then a
//! real eigenvector for one selected eigenvalue by shifted inverse iteration.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// All eigenvalues of a square real matrix.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::LinearAlgebra("matrix is not square".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearAlgebra("matrix has non-finite entries".into()));
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::LinearAlgebra("Schur iteration did not converge".into()))?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect())
}

/// Index of the eigenvalue closest to `target`; ties go to the larger modulus.
pub fn closest_to(eigs: &[Complex64], target: Complex64) -> Option<usize> {
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, z) in eigs.iter().enumerate() {
        let d = (z - target).norm();
        let m = z.norm();
        let better = match best {
            None => true,
            Some((_, bd, bm)) => d < bd || (d == bd && m > bm),
        };
        if better {
            best = Some((i, d, m));
        }
    }
    best.map(|(i, ..)| i)
}

/// Index of the eigenvalue of largest modulus; ties go to the larger real part.
pub fn largest_modulus(eigs: &[Complex64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, z) in eigs.iter().enumerate() {
        match best {
            None => best = Some(i),
            Some(b) => {
                let (m, bm) = (z.norm(), eigs[b].norm());
                if m > bm || (m == bm && z.re > eigs[b].re) {
                    best = Some(i);
                }
            }
        }
    }
    best
}

/// Right eigenvector for the real eigenvalue `lambda`, unit in the max norm,
/// largest-magnitude entry positive.
pub fn real_eigenvector(a: &DMatrix<f64>, lambda: f64) -> Result<DVector<f64>> {
    let n = a.nrows();
    // A shift exactly on the eigenvalue can leave an exactly singular LU.
    let shift = lambda + 64.0 * f64::EPSILON * lambda.abs().max(a.amax()).max(1e-300);
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] -= shift;
    }
    let lu = shifted.lu();
    let mut x = DVector::from_fn(n, |i, _| 1.0 + 0.1 * ((i * 7919) % 13) as f64);
    normalize_max(&mut x);
    for _ in 0..4 {
        let mut y = match lu.solve(&x) {
            Some(y) => y,
            None => return Err(Error::LinearAlgebra("singular shifted matrix".into())),
        };
        if y.iter().any(|v| !v.is_finite()) || y.amax() == 0.0 {
            return Err(Error::LinearAlgebra("inverse iteration broke down".into()));
        }
        normalize_max(&mut y);
        let settled = (&y - &x).amax() < 1e-15;
        x = y;
        if settled {
            break;
        }
    }
    Ok(x)
}

fn normalize_max(x: &mut DVector<f64>) {
    let imax = x.iamax();
    let pivot = x[imax];
    if pivot != 0.0 {
        *x /= pivot;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_eigenvalues() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, -3.0, 4.0, 0.0, 0.0, 0.5]);
        let mut eigs: Vec<f64> = eigenvalues(&a).unwrap().iter().map(|z| z.re).collect();
        eigs.sort_by(f64::total_cmp);
        assert!((eigs[0] + 3.0).abs() < 1e-14);
        assert!((eigs[1] - 0.5).abs() < 1e-14);
        assert!((eigs[2] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rotation_is_complex() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let eigs = eigenvalues(&a).unwrap();
        assert!(eigs.iter().all(|z| (z.im.abs() - 1.0).abs() < 1e-14));
        let i = closest_to(&eigs, Complex64::new(0.0, 2.0)).unwrap();
        assert!(eigs[i].im > 0.0);
    }

    #[test]
    fn selection_rules() {
        let eigs = [
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.25, 0.0),
        ];
        assert_eq!(closest_to(&eigs, Complex64::new(0.0, 0.0)), Some(2));
        // Equidistant from 0.625: 1.0 and 0.25; take the larger modulus.
        assert_eq!(closest_to(&eigs, Complex64::new(0.625, 0.0)), Some(0));
        assert_eq!(largest_modulus(&eigs), Some(0));
        assert_eq!(closest_to(&[], Complex64::new(0.0, 0.0)), None);
    }

    #[test]
    fn eigenvector_of_nonsymmetric_matrix() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 2.0, 0.5, 3.0, 1.0, 0.0, 1.0, 1.0]);
        let eigs = eigenvalues(&a).unwrap();
        let i = largest_modulus(&eigs).unwrap();
        let lambda = eigs[i].re;
        let v = real_eigenvector(&a, lambda).unwrap();
        let residual = (&a * &v - &v * lambda).amax();
        assert!(residual < 1e-12, "{residual}");
    }

    #[test]
    fn eigenvector_with_exact_eigenvalue() {
        let a = DMatrix::from_element(4, 4, 0.25);
        let v = real_eigenvector(&a, 1.0).unwrap();
        assert!(v.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }
}
