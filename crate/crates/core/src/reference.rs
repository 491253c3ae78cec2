//! High-resolution Nyström oracle for a simple eigenvalue of K and the
//! associated spectral projection.
//!
//! For a simple eigenvalue λ with right eigenfunction ψ and left
//! eigenfunction ψ* (eigenfunction of the adjoint kernel), the spectral
//! projection reduces to the rank-one map
//!
//! ```text
//! E φ = (⟨φ, ψ*⟩ / ⟨ψ, ψ*⟩) ψ
//! ```
//!
//! so no contour integral of the resolvent is ever formed.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::eigen;
use crate::error::{Error, Result};
use crate::function::RealFunction;
use crate::kernel::Kernel;
use crate::quadrature::{CompositeRule, GaussRule, IntegralTransform};

pub const DEFAULT_NYSTROM_POINTS: usize = 128;
pub const MIN_NYSTROM_POINTS: usize = 32;

/// Points used for sup-normalizing the reference eigenfunctions.
const NORMALIZATION_GRID: usize = 1025;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    LargestModulus,
    /// The eigenvalue closest to this hint.
    Near(f64),
}

#[derive(Debug, Clone)]
pub struct SpectralReference {
    kernel: Kernel,
    points: usize,
    lambda: f64,
    lambda_imag: f64,
    right: IntegralTransform,
    left: IntegralTransform,
    pairing: f64,
}

struct NystromPair {
    lambda: Complex64,
    function: IntegralTransform,
}

fn nystrom_eigenpair(kernel: &Kernel, rule: &GaussRule, target: Target) -> Result<NystromPair> {
    let x = rule.nodes();
    let w = rule.weights();
    let n = rule.len();
    let m = DMatrix::from_fn(n, n, |i, j| w[j] * kernel.eval(x[i], x[j]));
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Oracle(format!(
            "kernel `{}` is not finite on the Nyström nodes",
            kernel.name()
        )));
    }
    let eigs = eigen::eigenvalues(&m)?;
    let index = match target {
        Target::LargestModulus => eigen::largest_modulus(&eigs),
        Target::Near(hint) => eigen::closest_to(&eigs, Complex64::new(hint, 0.0)),
    }
    .ok_or_else(|| Error::Oracle("empty spectrum".into()))?;
    let lambda = eigs[index];
    if lambda.norm() == 0.0 {
        return Err(Error::Oracle("selected eigenvalue is zero".into()));
    }
    let v = eigen::real_eigenvector(&m, lambda.re)?;
    // Nyström extension ψ(s) = (1/λ) Σ_j w_j κ(s, x_j) v_j.
    let coeffs = (0..n).map(|j| w[j] * v[j] / lambda.re).collect();
    let mut function = IntegralTransform::from_parts(kernel.clone(), x.to_vec(), coeffs);
    let (peak, _) = (0..NORMALIZATION_GRID)
        .map(|i| {
            let s = i as f64 / (NORMALIZATION_GRID - 1) as f64;
            function.eval(s)
        })
        .fold((0.0_f64, 0.0_f64), |(best, abs), value| {
            if value.abs() > abs {
                (value, value.abs())
            } else {
                (best, abs)
            }
        });
    if peak == 0.0 || !peak.is_finite() {
        return Err(Error::Oracle("reference eigenfunction vanishes".into()));
    }
    function = function.scaled(1.0 / peak);
    Ok(NystromPair { lambda, function })
}

impl SpectralReference {
    /// Build the oracle from an `points`-point global Gauss–Legendre Nyström
    /// discretization of `kernel` and of its adjoint.
    pub fn nystrom(kernel: &Kernel, points: usize, target: Target) -> Result<SpectralReference> {
        if points < MIN_NYSTROM_POINTS {
            return Err(Error::InvalidArgument(format!(
                "Nyström reference needs at least {MIN_NYSTROM_POINTS} points, got {points}"
            )));
        }
        let rule = GaussRule::global(points)?;
        let right = nystrom_eigenpair(kernel, &rule, target)?;
        let lambda = right.lambda;
        if lambda.im.abs() > 1e-8 * (1.0 + lambda.norm()) {
            return Err(Error::Oracle(format!(
                "target eigenvalue {} + {}i is not real",
                lambda.re, lambda.im
            )));
        }
        let left = nystrom_eigenpair(&kernel.adjoint(), &rule, Target::Near(lambda.re))?;
        if (left.lambda - lambda).norm() > 1e-8 * (1.0 + lambda.norm()) {
            return Err(Error::Oracle(format!(
                "adjoint eigenvalue {} does not match {}",
                left.lambda.re, lambda.re
            )));
        }
        let pairing = rule.integrate(|t| right.function.eval(t) * left.function.eval(t));
        if pairing.is_nan() || pairing.abs() <= 1e-6 {
            return Err(Error::Oracle(format!(
                "degenerate pairing {pairing:e}; eigenvalue is not simple"
            )));
        }
        Ok(SpectralReference {
            kernel: kernel.clone(),
            points,
            lambda: lambda.re,
            lambda_imag: lambda.im,
            right: right.function,
            left: left.function,
            pairing,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_imag(&self) -> f64 {
        self.lambda_imag
    }

    /// Right eigenfunction, sup-normalized with a positive peak.
    pub fn right(&self) -> &IntegralTransform {
        &self.right
    }

    /// Left eigenfunction, sup-normalized with a positive peak.
    pub fn left(&self) -> &IntegralTransform {
        &self.left
    }

    /// ⟨ψ, ψ*⟩.
    pub fn pairing(&self) -> f64 {
        self.pairing
    }

    /// E φ. Inner products use a composite Gauss rule with at least 256
    /// points aligned with the uniform `mesh_n`-partition, so piecewise
    /// functions on that mesh are integrated piece by piece.
    pub fn project<F: RealFunction + ?Sized>(&self, phi: &F, mesh_n: usize) -> Result<Projected> {
        let rule = projection_rule(mesh_n)?;
        let phi_values = rule.sample(phi)?;
        let inner: f64 = phi_values
            .iter()
            .zip(rule.weights())
            .zip(rule.nodes())
            .map(|((v, w), &x)| v * w * self.left.eval(x))
            .sum();
        Ok(Projected {
            coeff: inner / self.pairing,
            basis: self.right.clone(),
        })
    }

    /// sup over 512 equispaced points of |Kψ − λψ| for the right eigenfunction,
    /// with K applied by an independent composite rule.
    pub fn residual(&self) -> Result<f64> {
        let rule = CompositeRule::new(4, &GaussRule::new(32)?)?;
        let k_psi = IntegralTransform::apply(&self.kernel, &self.right, &rule)?;
        let mut worst = 0.0_f64;
        for i in 0..512 {
            let s = i as f64 / 511.0;
            worst = worst.max((k_psi.eval(s) - self.lambda * self.right.eval(s)).abs());
        }
        Ok(worst)
    }
}

fn projection_rule(mesh_n: usize) -> Result<CompositeRule> {
    let n = mesh_n.max(1);
    let per = 256_usize.div_ceil(n).max(16);
    CompositeRule::new(n, &GaussRule::global(per)?)
}

/// E φ = c ψ.
#[derive(Debug, Clone)]
pub struct Projected {
    coeff: f64,
    basis: IntegralTransform,
}

impl Projected {
    pub fn coefficient(&self) -> f64 {
        self.coeff
    }
}

impl RealFunction for Projected {
    fn eval(&self, t: f64) -> f64 {
        self.coeff * self.basis.eval(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cos_pi_reference() {
        let r = SpectralReference::nystrom(&Kernel::cos_pi(), 64, Target::LargestModulus).unwrap();
        assert!((r.lambda() - 0.5).abs() < 1e-12);
        for i in 0..=100 {
            let s = i as f64 / 100.0;
            assert!((r.right().eval(s) - (PI * s).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn const_one_reference() {
        let r =
            SpectralReference::nystrom(&Kernel::const_one(), 32, Target::LargestModulus).unwrap();
        assert!((r.lambda() - 1.0).abs() < 1e-14);
        assert!((r.right().eval(0.3) - 1.0).abs() < 1e-14);
        assert!((r.pairing() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exp_st_reference() {
        let r = SpectralReference::nystrom(&Kernel::exp_st(), 128, Target::LargestModulus).unwrap();
        assert!((r.lambda() - 1.3530301647457353).abs() < 1e-12);
        assert!(r.residual().unwrap() < 1e-10);
    }

    #[test]
    fn too_few_points() {
        assert!(SpectralReference::nystrom(&Kernel::exp_st(), 16, Target::LargestModulus).is_err());
    }

    #[test]
    fn projection_examples() {
        let r = SpectralReference::nystrom(&Kernel::cos_pi(), 64, Target::LargestModulus).unwrap();
        let e = r.project(&|t: f64| (PI * t).sin(), 1).unwrap();
        assert!(e.coefficient().abs() < 1e-12);
        let e = r.project(r.right(), 1).unwrap();
        assert!((e.coefficient() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn target_hint_picks_second_eigenvalue() {
        let k = Kernel::exp_st();
        let first = SpectralReference::nystrom(&k, 64, Target::LargestModulus).unwrap();
        let second = SpectralReference::nystrom(&k, 64, Target::Near(0.1)).unwrap();
        assert!(second.lambda() < first.lambda());
        assert!((second.lambda() - 0.1).abs() < 0.1);
        assert!(second.residual().unwrap() < 1e-10);
    }
}
