//! Gauss–Legendre rules on [0, 1] and composite rules aligned with the
//! uniform partition.

use crate::error::{Error, Result};
use crate::function::RealFunction;
use crate::kernel::{check_unit, Kernel};

/// Largest point count accepted by [`GaussRule::new`].
pub const MAX_RULE_POINTS: usize = 64;

/// Largest point count accepted by [`GaussRule::global`].
pub const MAX_GLOBAL_POINTS: usize = 4096;

/// Quadrature order used per subinterval for operator integrals.
pub fn default_order(r: usize) -> usize {
    (2 * r + 6).max(10)
}

/// A Gauss–Legendre rule mapped to [0, 1]. Nodes ascend.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    /// Rule with `g` points, `1 <= g <= 64`.
    pub fn new(g: usize) -> Result<GaussRule> {
        if g == 0 || g > MAX_RULE_POINTS {
            return Err(Error::InvalidArgument(format!(
                "Gauss rule order {g} outside 1..={MAX_RULE_POINTS}"
            )));
        }
        Ok(Self::compute(g))
    }

    /// Large rules for global Nyström discretizations.
    pub fn global(g: usize) -> Result<GaussRule> {
        if g == 0 || g > MAX_GLOBAL_POINTS {
            return Err(Error::InvalidArgument(format!(
                "global Gauss rule order {g} outside 1..={MAX_GLOBAL_POINTS}"
            )));
        }
        Ok(Self::compute(g))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Newton iteration on the three-term Legendre recurrence, using the
    /// Tricomi-style initial guess for each root in the upper half.
    fn compute(g: usize) -> GaussRule {
        let mut nodes = vec![0.0; g];
        let mut weights = vec![0.0; g];
        let gf = g as f64;
        for i in 0..g.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (gf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(g, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            // Derivative at the converged root for the weight.
            let (_, d) = legendre_with_derivative(g, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Root x in (-1, 1) maps to (1 + x) / 2; the mirrored root to (1 - x) / 2.
            nodes[g - 1 - i] = 0.5 * (1.0 + x);
            nodes[i] = 0.5 * (1.0 - x);
            weights[g - 1 - i] = 0.5 * w;
            weights[i] = 0.5 * w;
        }
        if g % 2 == 1 {
            nodes[g / 2] = 0.5;
        }
        GaussRule { nodes, weights }
    }

    /// ∫₀¹ f.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn legendre_with_derivative(g: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=g {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if g == 0 {
        return (1.0, 0.0);
    }
    let d = g as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A Gauss rule replicated on each subinterval of the uniform n-partition.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    n: usize,
    per_piece: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(n: usize, rule: &GaussRule) -> Result<CompositeRule> {
        if n == 0 {
            return Err(Error::InvalidArgument("partition needs n >= 1".into()));
        }
        let g = rule.len();
        let nf = n as f64;
        let mut nodes = Vec::with_capacity(n * g);
        let mut weights = Vec::with_capacity(n * g);
        for j in 0..n {
            for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                nodes.push((j as f64 + x) / nf);
                weights.push(w / nf);
            }
        }
        Ok(CompositeRule {
            n,
            per_piece: g,
            nodes,
            weights,
        })
    }

    pub fn pieces(&self) -> usize {
        self.n
    }

    pub fn points_per_piece(&self) -> usize {
        self.per_piece
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn piece_of(&self, k: usize) -> usize {
        k / self.per_piece
    }

    /// Values of `f` at every node, checked for finiteness.
    pub fn sample<F: RealFunction + ?Sized>(&self, f: &F) -> Result<Vec<f64>> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let v = f.eval_on_piece(x, self.n, self.piece_of(k));
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite { at: x, value: v })
                }
            })
            .collect()
    }

    pub fn integrate<F: RealFunction + ?Sized>(&self, f: &F) -> Result<f64> {
        let values = self.sample(f)?;
        Ok(values.iter().zip(&self.weights).map(|(v, w)| v * w).sum())
    }
}

/// Σ_j Σ_k (w_k / n) f(t_{j-1} + x_k h).
pub fn integrate_composite<F: RealFunction + ?Sized>(
    f: &F,
    n: usize,
    rule: &GaussRule,
) -> Result<f64> {
    CompositeRule::new(n, rule)?.integrate(f)
}

/// (K x)(s) = ∫₀¹ κ(s, t) x(t) dt by the composite rule on the n-partition.
pub fn apply_operator<F: RealFunction + ?Sized>(
    kernel: &Kernel,
    x: &F,
    s: f64,
    n: usize,
    rule: &GaussRule,
) -> Result<f64> {
    check_unit("s", s)?;
    let composite = CompositeRule::new(n, rule)?;
    let transform = IntegralTransform::apply(kernel, x, &composite)?;
    let value = transform.eval(s);
    if !value.is_finite() {
        return Err(Error::NonFinite { at: s, value });
    }
    Ok(value)
}

/// The function s ↦ c · Σ_k w_k κ(s, x_k) f(x_k): the operator K applied to
/// `f` with the integral replaced by a composite rule, frozen so it can be
/// evaluated at any s.
#[derive(Debug, Clone)]
pub struct IntegralTransform {
    kernel: Kernel,
    nodes: Vec<f64>,
    coeffs: Vec<f64>,
}

impl IntegralTransform {
    pub fn apply<F: RealFunction + ?Sized>(
        kernel: &Kernel,
        f: &F,
        rule: &CompositeRule,
    ) -> Result<IntegralTransform> {
        let values = rule.sample(f)?;
        let coeffs = values
            .iter()
            .zip(rule.weights())
            .map(|(v, w)| v * w)
            .collect();
        Ok(IntegralTransform {
            kernel: kernel.clone(),
            nodes: rule.nodes().to_vec(),
            coeffs,
        })
    }

    /// Transform with explicit nodes and coefficients (weights already folded in).
    pub fn from_parts(kernel: Kernel, nodes: Vec<f64>, coeffs: Vec<f64>) -> IntegralTransform {
        assert_eq!(nodes.len(), coeffs.len());
        IntegralTransform {
            kernel,
            nodes,
            coeffs,
        }
    }

    pub fn scaled(mut self, c: f64) -> IntegralTransform {
        self.coeffs.iter_mut().for_each(|v| *v *= c);
        self
    }
}

impl RealFunction for IntegralTransform {
    fn eval(&self, s: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.coeffs)
            .map(|(&x, &c)| c * self.kernel.eval(s, x))
            .sum()
    }
}
