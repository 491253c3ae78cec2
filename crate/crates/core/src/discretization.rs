//! Matrix eigenproblems for classical collocation QₙK and the modified
//! operator Kₙᴹ = QₙK + KQₙ − QₙKQₙ, plus reconstruction of the four
//! eigenfunction variants.
//!
//! # Reducing the modified operator to a matrix problem
//!
//! Apply Qₙ and I − Qₙ to Kₙᴹψ = λψ:
//!
//! ```text
//! λ Qₙψ       = QₙKψ
//! λ (I − Qₙ)ψ = (I − Qₙ) K Qₙψ
//! ```
//!
//! With u = Qₙψ the second line gives ψ = u + λ⁻¹ (I − Qₙ) K u, and
//! substituting into the first yields the quadratic problem
//!
//! ```text
//! λ² u = λ A u + B u,    B = Qₙ K (I − Qₙ) K = D − A²
//! ```
//!
//! in nodal coordinates, where A[p,q] = (Kℓ_q)(τ_p) and D[p,q] = (K²ℓ_q)(τ_p).
//! It is linearized through the companion matrix C = [[A, B], [I, 0]] acting
//! on (λu, u).

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen;
use crate::error::{Error, Result};
use crate::function::RealFunction;
use crate::kernel::Kernel;
use crate::mesh::{PiecewisePolynomial, ProjectionSpace};
use crate::quadrature::{CompositeRule, GaussRule, IntegralTransform};

/// Smallest |λ| accepted when dividing by an eigenvalue.
pub const MIN_INVERTIBLE_EIGENVALUE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Collocation,
    #[serde(rename = "iterated")]
    IteratedCollocation,
    Modified,
    IteratedModified,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Collocation,
        Method::IteratedCollocation,
        Method::Modified,
        Method::IteratedModified,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Collocation => "collocation",
            Method::IteratedCollocation => "iterated",
            Method::Modified => "modified",
            Method::IteratedModified => "iterated_modified",
        }
    }

    /// Short label used in table headers.
    pub fn label(self) -> &'static str {
        match self {
            Method::Collocation => "C",
            Method::IteratedCollocation => "IC",
            Method::Modified => "MC",
            Method::IteratedModified => "IMC",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == name)
    }

    /// The method whose eigenvalue this one reports (iteration leaves λ unchanged).
    pub fn eigenvalue_source(self) -> Method {
        match self {
            Method::Collocation | Method::IteratedCollocation => Method::Collocation,
            Method::Modified | Method::IteratedModified => Method::Modified,
        }
    }
}

/// A, the nodal matrix of QₙK on Xₙ.
#[derive(Debug, Clone)]
pub struct CollocationMatrix {
    pub space: Arc<ProjectionSpace>,
    pub a: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct ModifiedCompanion {
    pub space: Arc<ProjectionSpace>,
    pub a: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

/// ψ(s) = u(s) + λ⁻¹ [(Ku)(s) − (QₙKu)(s)].
#[derive(Debug, Clone)]
pub struct CorrectedFunction {
    base: PiecewisePolynomial,
    image: IntegralTransform,
    projected_image: PiecewisePolynomial,
    inv_lambda: f64,
}

impl CorrectedFunction {
    fn at(&self, t: f64, piece: usize) -> f64 {
        let n = self.base.space().n();
        self.base.eval_piece(piece, t)
            + self.inv_lambda
                * (self.image.eval(t) - self.projected_image.eval_on_piece(t, n, piece))
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Nodal(PiecewisePolynomial),
    Transform(IntegralTransform),
    Corrected(CorrectedFunction),
}

/// An approximate eigenfunction, evaluable anywhere on [0, 1].
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    repr: Repr,
    scale: f64,
}

impl Eigenfunction {
    fn new(repr: Repr) -> Eigenfunction {
        Eigenfunction { repr, scale: 1.0 }
    }

    /// Rescale so the max of |ψ| over the space's sample grid is 1.
    fn sup_normalized(mut self, space: &ProjectionSpace) -> Result<Eigenfunction> {
        let sup = space.sup_norm(&self)?;
        if sup.is_nan() || sup <= 0.0 {
            return Err(Error::SpuriousVector(sup));
        }
        self.scale /= sup;
        Ok(self)
    }

    /// Nodal values when the eigenfunction lives in Xₙ.
    pub fn as_piecewise(&self) -> Option<PiecewisePolynomial> {
        match &self.repr {
            Repr::Nodal(pp) => {
                let mut pp = pp.clone();
                pp.scale(self.scale);
                Some(pp)
            }
            _ => None,
        }
    }

    pub fn negated(&self) -> Eigenfunction {
        Eigenfunction {
            repr: self.repr.clone(),
            scale: -self.scale,
        }
    }
}

impl RealFunction for Eigenfunction {
    fn eval(&self, t: f64) -> f64 {
        let v = match &self.repr {
            Repr::Nodal(pp) => pp.eval(t),
            Repr::Transform(tr) => tr.eval(t),
            Repr::Corrected(c) => c.at(t, c.base.space().piece_of(t)),
        };
        self.scale * v
    }

    fn eval_on_piece(&self, t: f64, n: usize, piece: usize) -> f64 {
        let v = match &self.repr {
            Repr::Nodal(pp) => pp.eval_on_piece(t, n, piece),
            Repr::Transform(tr) => tr.eval(t),
            Repr::Corrected(c) => {
                if n == c.base.space().n() && piece < n {
                    c.at(t, piece)
                } else {
                    c.at(t, c.base.space().piece_of(t))
                }
            }
        };
        self.scale * v
    }
}

#[derive(Debug, Clone)]
pub struct EigenApproximation {
    pub method: Method,
    pub lambda: Complex64,
    pub eigenfunction: Eigenfunction,
}

impl EigenApproximation {
    /// Whether the imaginary part is negligible relative to `reference`.
    pub fn is_real(&self, reference: f64) -> bool {
        self.lambda.im.abs() < 1e-8 * (1.0 + reference.abs())
    }
}

/// Everything needed to discretize one kernel on one mesh.
#[derive(Debug, Clone)]
pub struct Discretization {
    kernel: Kernel,
    space: Arc<ProjectionSpace>,
    rule: GaussRule,
    composite: CompositeRule,
}

impl Discretization {
    pub fn new(kernel: Kernel, space: Arc<ProjectionSpace>, rule: GaussRule) -> Result<Self> {
        let composite = CompositeRule::new(space.n(), &rule)?;
        Ok(Discretization {
            kernel,
            space,
            rule,
            composite,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn space(&self) -> &Arc<ProjectionSpace> {
        &self.space
    }

    pub fn rule(&self) -> &GaussRule {
        &self.rule
    }

    pub fn composite(&self) -> &CompositeRule {
        &self.composite
    }

    /// L[k, q] = ℓ_q(x_k) over the composite nodes; block diagonal.
    fn basis_at_quadrature(&self) -> DMatrix<f64> {
        let per = self.space.nodes_per_piece();
        let g = self.rule.len();
        let mut local = vec![0.0; per];
        let mut l = DMatrix::zeros(self.composite.len(), self.space.dim());
        for (k, &xi) in self.rule.nodes().iter().enumerate() {
            self.space.lagrange_basis(xi, &mut local);
            for j in 0..self.space.n() {
                for (i, &v) in local.iter().enumerate() {
                    l[(j * g + k, j * per + i)] = v;
                }
            }
        }
        l
    }

    /// G[p, k] = w_k κ(τ_p, x_k).
    fn weighted_kernel_at_nodes(&self) -> DMatrix<f64> {
        let taus = self.space.nodes();
        let xs = self.composite.nodes();
        let ws = self.composite.weights();
        let rows: Vec<Vec<f64>> = taus
            .par_iter()
            .map(|&tau| {
                xs.iter()
                    .zip(ws)
                    .map(|(&x, &w)| w * self.kernel.eval(tau, x))
                    .collect()
            })
            .collect();
        DMatrix::from_fn(taus.len(), xs.len(), |p, k| rows[p][k])
    }

    /// W[k, l] = w_l κ(x_k, x_l).
    fn weighted_kernel_at_quadrature(&self) -> DMatrix<f64> {
        let xs = self.composite.nodes();
        let ws = self.composite.weights();
        let rows: Vec<Vec<f64>> = xs
            .par_iter()
            .map(|&s| {
                xs.iter()
                    .zip(ws)
                    .map(|(&x, &w)| w * self.kernel.eval(s, x))
                    .collect()
            })
            .collect();
        DMatrix::from_fn(xs.len(), xs.len(), |k, l| rows[k][l])
    }

    /// A[p, q] = ∫ κ(τ_p, t) ℓ_q(t) dt, subinterval by subinterval.
    pub fn collocation_matrix(&self) -> Result<CollocationMatrix> {
        let a = self.weighted_kernel_at_nodes() * self.basis_at_quadrature();
        check_finite(&a, "collocation matrix")?;
        Ok(CollocationMatrix {
            space: Arc::clone(&self.space),
            a,
        })
    }

    /// A, D = nodal K², B = D − A², and the companion C = [[A, B], [I, 0]].
    pub fn modified_companion(&self) -> Result<ModifiedCompanion> {
        let g = self.weighted_kernel_at_nodes();
        let l = self.basis_at_quadrature();
        let a = &g * &l;
        // (Kℓ_q)(x_k) by the same composite rule, then integrated against κ(τ_p, ·).
        let k_basis = self.weighted_kernel_at_quadrature() * &l;
        let d = &g * k_basis;
        check_finite(&a, "collocation matrix")?;
        check_finite(&d, "iterated kernel matrix")?;
        let b = &d - &a * &a;
        let m = a.nrows();
        let mut c = DMatrix::zeros(2 * m, 2 * m);
        c.view_mut((0, 0), (m, m)).copy_from(&a);
        c.view_mut((0, m), (m, m)).copy_from(&b);
        for i in 0..m {
            c[(m + i, i)] = 1.0;
        }
        Ok(ModifiedCompanion {
            space: Arc::clone(&self.space),
            a,
            d,
            b,
            c,
        })
    }

    /// Eigenpair of A closest to `target`; ψₙᶜ is the piecewise polynomial
    /// with the eigenvector as nodal values.
    pub fn collocation_eigenpair(
        &self,
        matrix: &CollocationMatrix,
        target: f64,
    ) -> Result<EigenApproximation> {
        let lambda = select(&matrix.a, target)?;
        let v = eigen::real_eigenvector(&matrix.a, lambda.re)?;
        let pp = PiecewisePolynomial::new(Arc::clone(&self.space), v.iter().copied().collect())?;
        let eigenfunction = Eigenfunction::new(Repr::Nodal(pp)).sup_normalized(&self.space)?;
        Ok(EigenApproximation {
            method: Method::Collocation,
            lambda,
            eigenfunction,
        })
    }

    /// ψₙˢ = λ⁻¹ K ψₙᶜ.
    pub fn sloan_iterate(&self, approx: &EigenApproximation) -> Result<EigenApproximation> {
        if approx.method != Method::Collocation {
            return Err(Error::InvalidArgument(format!(
                "Sloan iteration expects a collocation eigenpair, got {}",
                approx.method.name()
            )));
        }
        let eigenfunction = self.iterate(approx)?;
        Ok(EigenApproximation {
            method: Method::IteratedCollocation,
            lambda: approx.lambda,
            eigenfunction,
        })
    }

    /// Eigenpair of Kₙᴹ through the companion matrix, with
    /// ψₙᴹ = u + λ⁻¹ (I − Qₙ) K u.
    pub fn modified_eigenpair(
        &self,
        companion: &ModifiedCompanion,
        target: f64,
    ) -> Result<EigenApproximation> {
        let lambda = select(&companion.c, target)?;
        check_invertible(lambda.re)?;
        let x = eigen::real_eigenvector(&companion.c, lambda.re)?;
        let m = companion.a.nrows();
        let u: Vec<f64> = x.rows(m, m).iter().copied().collect();
        let u_norm = u.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if u_norm < 1e-12 {
            return Err(Error::SpuriousVector(u_norm));
        }
        let base = PiecewisePolynomial::new(Arc::clone(&self.space), u)?;
        let eigenfunction = self.corrected(base, lambda.re)?;
        Ok(EigenApproximation {
            method: Method::Modified,
            lambda,
            eigenfunction,
        })
    }

    /// ψ̃ₙᴹ = λ⁻¹ K ψₙᴹ.
    pub fn modified_iterate(&self, approx: &EigenApproximation) -> Result<EigenApproximation> {
        if approx.method != Method::Modified {
            return Err(Error::InvalidArgument(format!(
                "modified iteration expects a modified eigenpair, got {}",
                approx.method.name()
            )));
        }
        let eigenfunction = self.iterate(approx)?;
        Ok(EigenApproximation {
            method: Method::IteratedModified,
            lambda: approx.lambda,
            eigenfunction,
        })
    }

    /// Extend a nodal vector u ∈ Xₙ to u + λ⁻¹ (I − Qₙ) K u, sup-normalized.
    pub fn corrected(&self, base: PiecewisePolynomial, lambda: f64) -> Result<Eigenfunction> {
        check_invertible(lambda)?;
        let image = IntegralTransform::apply(&self.kernel, &base, &self.composite)?;
        let projected_image = self.space.interpolate(&image)?;
        Eigenfunction::new(Repr::Corrected(CorrectedFunction {
            base,
            image,
            projected_image,
            inv_lambda: 1.0 / lambda,
        }))
        .sup_normalized(&self.space)
    }

    fn iterate(&self, approx: &EigenApproximation) -> Result<Eigenfunction> {
        let lambda = approx.lambda.re;
        check_invertible(lambda)?;
        let transform =
            IntegralTransform::apply(&self.kernel, &approx.eigenfunction, &self.composite)?
                .scaled(1.0 / lambda);
        Eigenfunction::new(Repr::Transform(transform)).sup_normalized(&self.space)
    }

    /// Kₙᴹψ = QₙKψ + KQₙψ − QₙKQₙψ evaluated straight from the operator
    /// definition (quadrature and interpolation only, no matrices).
    pub fn apply_modified_operator<F: RealFunction + ?Sized>(
        &self,
        psi: &F,
    ) -> Result<ModifiedImage> {
        let k_psi = IntegralTransform::apply(&self.kernel, psi, &self.composite)?;
        let q_k_psi = self.space.interpolate(&k_psi)?;
        let q_psi = self.space.interpolate(psi)?;
        let k_q_psi = IntegralTransform::apply(&self.kernel, &q_psi, &self.composite)?;
        let q_k_q_psi = self.space.interpolate(&k_q_psi)?;
        Ok(ModifiedImage {
            q_k_psi,
            k_q_psi,
            q_k_q_psi,
        })
    }
}

/// The function Kₙᴹψ.
#[derive(Debug, Clone)]
pub struct ModifiedImage {
    q_k_psi: PiecewisePolynomial,
    k_q_psi: IntegralTransform,
    q_k_q_psi: PiecewisePolynomial,
}

impl RealFunction for ModifiedImage {
    fn eval(&self, t: f64) -> f64 {
        self.q_k_psi.eval(t) + self.k_q_psi.eval(t) - self.q_k_q_psi.eval(t)
    }

    fn eval_on_piece(&self, t: f64, n: usize, piece: usize) -> f64 {
        self.q_k_psi.eval_on_piece(t, n, piece) + self.k_q_psi.eval(t)
            - self.q_k_q_psi.eval_on_piece(t, n, piece)
    }
}

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if let Some(v) = m.iter().find(|v| !v.is_finite()) {
        return Err(Error::LinearAlgebra(format!(
            "{what} has non-finite entry {v}"
        )));
    }
    Ok(())
}

fn check_invertible(lambda: f64) -> Result<()> {
    if lambda.abs() < MIN_INVERTIBLE_EIGENVALUE {
        Err(Error::SmallEigenvalue(lambda))
    } else {
        Ok(())
    }
}

/// Eigenvalue of `m` closest to `target`, rejected if farther than |target|/2.
fn select(m: &DMatrix<f64>, target: f64) -> Result<Complex64> {
    let eigs = eigen::eigenvalues(m)?;
    let i = eigen::closest_to(&eigs, Complex64::new(target, 0.0))
        .ok_or_else(|| Error::LinearAlgebra("empty spectrum".into()))?;
    let radius = 0.5 * target.abs();
    let lambda = eigs[i];
    if (lambda - target).norm() > radius {
        return Err(Error::NoEigenvalue { target, radius });
    }
    Ok(lambda)
}
