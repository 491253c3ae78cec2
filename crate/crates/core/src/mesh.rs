//! The uniform partition of [0, 1], the space Xₙ of discontinuous piecewise
//! polynomials of degree ≤ 2r, and the interpolatory projection Qₙ at 2r+1
//! equidistant nodes per subinterval.
//!
//! Subinterval `j` (0-based) is [j/n, (j+1)/n). Pointwise evaluation treats
//! every subinterval as half-open except the last, which is closed, so the
//! double-valued breakpoints of Xₙ get a deterministic value. Qₙ is only
//! applied to functions that can be evaluated pointwise.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function::RealFunction;
use crate::kernel::check_unit;

/// Points per subinterval of the grid used for sup norms and normalization.
pub const SAMPLES_PER_PIECE: usize = 17;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSpace {
    n: usize,
    r: usize,
    /// Local node positions in [0, 1].
    local: Vec<f64>,
    /// Barycentric weights for the local nodes.
    bary: Vec<f64>,
    nodes: Vec<f64>,
}

impl ProjectionSpace {
    pub fn new(n: usize, r: usize) -> Result<ProjectionSpace> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "number of subintervals must be >= 1".into(),
            ));
        }
        if r > 12 {
            return Err(Error::InvalidArgument(format!(
                "r = {r} exceeds the supported maximum of 12 (25 nodes per subinterval)"
            )));
        }
        let per = 2 * r + 1;
        let local: Vec<f64> = if r == 0 {
            vec![0.5]
        } else {
            (0..per).map(|i| i as f64 / (2 * r) as f64).collect()
        };
        // Equidistant barycentric weights: (-1)^i C(2r, i).
        let mut bary = Vec::with_capacity(per);
        let mut binom = 1.0;
        for i in 0..per {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            bary.push(sign * binom);
            binom = binom * (2 * r - i) as f64 / (i + 1) as f64;
        }
        let nf = n as f64;
        let mut nodes = Vec::with_capacity(n * per);
        for j in 0..n {
            for &x in &local {
                nodes.push(if x == 1.0 {
                    (j + 1) as f64 / nf
                } else {
                    (j as f64 + x) / nf
                });
            }
        }
        Ok(ProjectionSpace {
            n,
            r,
            local,
            bary,
            nodes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// 2r + 1.
    pub fn nodes_per_piece(&self) -> usize {
        self.local.len()
    }

    /// m = n(2r + 1).
    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn local_nodes(&self) -> &[f64] {
        &self.local
    }

    pub fn breakpoint(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.breakpoint(j)).collect()
    }

    /// Subinterval owning node `p`.
    pub fn piece_of_node(&self, p: usize) -> usize {
        p / self.nodes_per_piece()
    }

    /// Subinterval owning `t` under the half-open convention.
    pub fn piece_of(&self, t: f64) -> usize {
        let last = self.n - 1;
        let mut j = ((t * self.n as f64).floor().max(0.0) as usize).min(last);
        // t * n can round across an integer; settle against the breakpoints.
        if j < last && t >= self.breakpoint(j + 1) {
            j += 1;
        } else if j > 0 && t < self.breakpoint(j) {
            j -= 1;
        }
        j
    }

    /// Values of the 2r+1 local Lagrange basis functions at local coordinate `x`.
    pub fn lagrange_basis(&self, x: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.local.len());
        if let Some(i) = self.local.iter().position(|&xi| xi == x) {
            out.fill(0.0);
            out[i] = 1.0;
            return;
        }
        let mut denom = 0.0;
        for ((o, &xi), &w) in out.iter_mut().zip(&self.local).zip(&self.bary) {
            *o = w / (x - xi);
            denom += *o;
        }
        out.iter_mut().for_each(|o| *o /= denom);
    }

    fn local_coordinate(&self, t: f64, j: usize) -> f64 {
        t * self.n as f64 - j as f64
    }

    /// Sampling grid for sup norms: 17 equispaced points on each closed
    /// subinterval, tagged with the subinterval, so each breakpoint is seen
    /// from both sides.
    pub fn sample_grid(&self) -> Vec<(usize, f64)> {
        let nf = self.n as f64;
        let last = (SAMPLES_PER_PIECE - 1) as f64;
        (0..self.n)
            .flat_map(|j| {
                (0..SAMPLES_PER_PIECE).map(move |i| {
                    let t = if i + 1 == SAMPLES_PER_PIECE {
                        (j + 1) as f64 / nf
                    } else {
                        (j as f64 + i as f64 / last) / nf
                    };
                    (j, t)
                })
            })
            .collect()
    }

    /// Max of |f| over [`sample_grid`](Self::sample_grid).
    pub fn sup_norm<F: RealFunction + ?Sized>(&self, f: &F) -> Result<f64> {
        let mut worst = 0.0_f64;
        for (j, t) in self.sample_grid() {
            let v = f.eval_on_piece(t, self.n, j);
            if !v.is_finite() {
                return Err(Error::NonFinite { at: t, value: v });
            }
            worst = worst.max(v.abs());
        }
        Ok(worst)
    }

    /// Qₙ f: the element of Xₙ agreeing with `f` at every node. Nodes on a
    /// breakpoint take the branch of `f` belonging to their own subinterval.
    pub fn interpolate<F: RealFunction + ?Sized>(
        self: &Arc<Self>,
        f: &F,
    ) -> Result<PiecewisePolynomial> {
        let values = self
            .nodes
            .iter()
            .enumerate()
            .map(|(p, &t)| {
                let v = f.eval_on_piece(t, self.n, self.piece_of_node(p));
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite { at: t, value: v })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        PiecewisePolynomial::new(Arc::clone(self), values)
    }
}

/// An element of Xₙ stored by its values at the interpolation nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    space: Arc<ProjectionSpace>,
    values: Vec<f64>,
}

impl PiecewisePolynomial {
    pub fn new(space: Arc<ProjectionSpace>, values: Vec<f64>) -> Result<PiecewisePolynomial> {
        if values.len() != space.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} nodal values, got {}",
                space.dim(),
                values.len()
            )));
        }
        Ok(PiecewisePolynomial { space, values })
    }

    pub fn space(&self) -> &Arc<ProjectionSpace> {
        &self.space
    }

    pub fn nodal_values(&self) -> &[f64] {
        &self.values
    }

    /// Checked evaluation under the half-open convention.
    pub fn value(&self, t: f64) -> Result<f64> {
        check_unit("t", t)?;
        Ok(self.eval(t))
    }

    /// Evaluate the polynomial of subinterval `j` at `t` (extrapolating if
    /// `t` lies outside it).
    pub fn eval_piece(&self, j: usize, t: f64) -> f64 {
        let space = &*self.space;
        let per = space.nodes_per_piece();
        let nodes = &space.nodes[j * per..(j + 1) * per];
        let vals = &self.values[j * per..(j + 1) * per];
        if let Some(i) = nodes.iter().position(|&x| x == t) {
            return vals[i];
        }
        if per == 1 {
            return vals[0];
        }
        let x = space.local_coordinate(t, j);
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xi, &w), &v) in space.local.iter().zip(&space.bary).zip(vals) {
            let d = x - xi;
            if d == 0.0 {
                return v;
            }
            let c = w / d;
            num += c * v;
            den += c;
        }
        num / den
    }

    pub fn scale(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }
}

impl RealFunction for PiecewisePolynomial {
    fn eval(&self, t: f64) -> f64 {
        self.eval_piece(self.space.piece_of(t), t)
    }

    fn eval_on_piece(&self, t: f64, n: usize, piece: usize) -> f64 {
        if n == self.space.n && piece < n {
            self.eval_piece(piece, t)
        } else {
            self.eval(t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize, r: usize) -> Arc<ProjectionSpace> {
        Arc::new(ProjectionSpace::new(n, r).unwrap())
    }

    #[test]
    fn node_layouts() {
        assert_eq!(space(2, 0).nodes(), &[0.25, 0.75]);
        assert_eq!(space(1, 1).nodes(), &[0.0, 0.5, 1.0]);
        assert_eq!(space(2, 1).nodes(), &[0.0, 0.25, 0.5, 0.5, 0.75, 1.0]);
        assert!(ProjectionSpace::new(0, 1).is_err());
    }

    #[test]
    fn layout_invariants() {
        for n in 1..=256 {
            for r in 0..=3 {
                let sp = space(n, r);
                let per = 2 * r + 1;
                assert_eq!(sp.dim(), n * per);
                let nodes = sp.nodes();
                assert!(nodes.windows(2).all(|w| w[0] <= w[1]));
                assert!(nodes.iter().all(|&x| (0.0..=1.0).contains(&x)));
                for j in 0..n {
                    let piece = &nodes[j * per..(j + 1) * per];
                    assert!(piece.windows(2).all(|w| w[0] < w[1]));
                    if r >= 1 {
                        assert_eq!(piece[0], sp.breakpoint(j));
                        assert_eq!(piece[per - 1], sp.breakpoint(j + 1));
                    }
                }
                for (p, &x) in nodes.iter().enumerate() {
                    let j = sp.piece_of_node(p);
                    assert!(x >= sp.breakpoint(j) && x <= sp.breakpoint(j + 1));
                }
            }
        }
    }

    #[test]
    fn ownership_is_half_open() {
        for n in [1, 3, 10, 49, 100, 256] {
            let sp = space(n, 0);
            for j in 0..n {
                assert_eq!(sp.piece_of(sp.breakpoint(j)), j, "n={n} j={j}");
            }
            assert_eq!(sp.piece_of(1.0), n - 1);
        }
    }

    #[test]
    fn midpoint_interpolant_of_square() {
        let sp = space(2, 0);
        let pp = sp.interpolate(&|t: f64| t * t).unwrap();
        assert_eq!(pp.nodal_values(), &[0.0625, 0.5625]);
        assert_eq!(pp.value(0.0).unwrap(), 0.0625);
        assert_eq!(pp.value(0.49).unwrap(), 0.0625);
        assert_eq!(pp.value(0.5).unwrap(), 0.5625);
        assert_eq!(pp.value(1.0).unwrap(), 0.5625);
        assert!(pp.value(1.01).is_err());
        assert!(pp.value(-0.01).is_err());
    }

    #[test]
    fn constants_and_nodes_exact() {
        for r in 0..=3 {
            let sp = space(5, r);
            let pp = sp.interpolate(&|_t: f64| 1.0).unwrap();
            for i in 0..=100 {
                let t = i as f64 / 100.0;
                assert!((pp.value(t).unwrap() - 1.0).abs() < 1e-14);
            }
            let f = |t: f64| (7.0 * t).sin();
            let pp = sp.interpolate(&f).unwrap();
            for (p, &x) in sp.nodes().iter().enumerate() {
                let j = sp.piece_of_node(p);
                assert_eq!(pp.eval_piece(j, x), pp.nodal_values()[p]);
            }
        }
    }

    #[test]
    fn rejects_non_finite() {
        let sp = space(2, 0);
        assert!(matches!(
            sp.interpolate(&|t: f64| 1.0 / (t - 0.25)),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn sample_grid_sees_both_sides() {
        let sp = space(4, 0);
        let grid = sp.sample_grid();
        assert_eq!(grid.len(), 4 * SAMPLES_PER_PIECE);
        assert_eq!(grid[0], (0, 0.0));
        assert_eq!(grid[SAMPLES_PER_PIECE - 1], (0, 0.25));
        assert_eq!(grid[SAMPLES_PER_PIECE], (1, 0.25));
        assert_eq!(*grid.last().unwrap(), (3, 1.0));
    }
}
