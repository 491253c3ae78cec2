/// A real function on [0, 1] that can be evaluated pointwise.
///
/// Piecewise functions on a uniform partition are double-valued at the
/// breakpoints; `eval_on_piece` picks the branch belonging to a given
/// subinterval so one-sided limits can be sampled. Everything else ignores
/// the piece hint.
pub trait RealFunction: Sync {
    fn eval(&self, t: f64) -> f64;

    fn eval_on_piece(&self, t: f64, n: usize, piece: usize) -> f64 {
        let _ = (n, piece);
        self.eval(t)
    }
}

impl<F: Fn(f64) -> f64 + Sync> RealFunction for F {
    fn eval(&self, t: f64) -> f64 {
        self(t)
    }
}

/// Pointwise difference `f - g`, preserving piece hints.
pub struct Difference<'a, F: ?Sized, G: ?Sized>(pub &'a F, pub &'a G);

impl<F, G> RealFunction for Difference<'_, F, G>
where
    F: RealFunction + ?Sized,
    G: RealFunction + ?Sized,
{
    fn eval(&self, t: f64) -> f64 {
        self.0.eval(t) - self.1.eval(t)
    }

    fn eval_on_piece(&self, t: f64, n: usize, piece: usize) -> f64 {
        self.0.eval_on_piece(t, n, piece) - self.1.eval_on_piece(t, n, piece)
    }
}
