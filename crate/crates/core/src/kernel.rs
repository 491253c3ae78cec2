//! Smooth kernels κ(s, t) on the unit square.
//!
//! Smoothness of the kernel is assumed, not checked: the superconvergence
//! rates need κ to be 2r+2 times continuously differentiable.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{self, Expr};

/// Names accepted for builtin kernels.
pub const BUILTIN_NAMES: [&str; 3] = ["exp_st", "cos_pi", "const_one"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelSource {
    Builtin,
    Expression,
    Closure,
}

type KernelFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Repr {
    ExpSt,
    CosPi,
    ConstOne,
    Expr(Arc<Expr>),
    Closure(Arc<KernelFn>),
}

/// An immutable, cheaply clonable kernel.
#[derive(Clone)]
pub struct Kernel {
    name: String,
    source: KernelSource,
    repr: Repr,
    transposed: bool,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("source", &self.source)
            .field("transposed", &self.transposed)
            .finish()
    }
}

impl Kernel {
    pub fn builtin(name: &str) -> Result<Kernel> {
        let repr = match name {
            "exp_st" => Repr::ExpSt,
            "cos_pi" => Repr::CosPi,
            "const_one" => Repr::ConstOne,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown builtin kernel `{other}` (expected one of {})",
                    BUILTIN_NAMES.join(", ")
                )))
            }
        };
        Ok(Kernel {
            name: name.to_string(),
            source: KernelSource::Builtin,
            repr,
            transposed: false,
        })
    }

    pub fn exp_st() -> Kernel {
        Kernel::builtin("exp_st").expect("builtin")
    }

    pub fn cos_pi() -> Kernel {
        Kernel::builtin("cos_pi").expect("builtin")
    }

    pub fn const_one() -> Kernel {
        Kernel::builtin("const_one").expect("builtin")
    }

    /// Parse a kernel from an expression in `s` and `t`.
    pub fn parse(source: &str) -> Result<Kernel> {
        let ast = expr::parse(source)?;
        Ok(Kernel::from_expr(source.trim(), ast))
    }

    pub fn from_expr(name: impl Into<String>, ast: Expr) -> Kernel {
        Kernel {
            name: name.into(),
            source: KernelSource::Expression,
            repr: Repr::Expr(Arc::new(ast)),
            transposed: false,
        }
    }

    pub fn from_fn<F>(name: impl Into<String>, f: F) -> Kernel
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Kernel {
            name: name.into(),
            source: KernelSource::Closure,
            repr: Repr::Closure(Arc::new(f)),
            transposed: false,
        }
    }

    /// A builtin name selects the builtin; anything else is parsed as an expression.
    pub fn from_spec(spec: &str) -> Result<Kernel> {
        if BUILTIN_NAMES.contains(&spec.trim()) {
            Kernel::builtin(spec.trim())
        } else {
            Kernel::parse(spec)
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> KernelSource {
        self.source
    }

    /// The kernel κ*(s, t) = κ(t, s).
    pub fn adjoint(&self) -> Kernel {
        let name = match self.name.strip_suffix("^T") {
            Some(base) => base.to_string(),
            None => format!("{}^T", self.name),
        };
        Kernel {
            name,
            source: self.source,
            repr: self.repr.clone(),
            transposed: !self.transposed,
        }
    }

    /// Unchecked evaluation used on hot paths. Expression failures come back
    /// as NaN; callers assembling matrices check finiteness of the result.
    #[inline]
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        let (s, t) = if self.transposed { (t, s) } else { (s, t) };
        match &self.repr {
            Repr::ExpSt => (s * t).exp(),
            Repr::CosPi => (std::f64::consts::PI * s).cos() * (std::f64::consts::PI * t).cos(),
            Repr::ConstOne => 1.0,
            Repr::Expr(ast) => ast.eval(s, t).unwrap_or(f64::NAN),
            Repr::Closure(f) => f(s, t),
        }
    }

    /// Checked evaluation: rejects arguments outside [0, 1] and reports
    /// expression failures or non-finite values as errors.
    pub fn try_eval(&self, s: f64, t: f64) -> Result<f64> {
        check_unit("s", s)?;
        check_unit("t", t)?;
        let value = match &self.repr {
            Repr::Expr(ast) => {
                let (a, b) = if self.transposed { (t, s) } else { (s, t) };
                ast.eval(a, b)?
            }
            _ => self.eval(s, t),
        };
        if !value.is_finite() {
            return Err(Error::NonFinite { at: s, value });
        }
        Ok(value)
    }
}

pub(crate) fn check_unit(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain { what, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> impl Iterator<Item = (f64, f64)> {
        (0..=10).flat_map(|i| (0..=10).map(move |j| (i as f64 / 10.0, j as f64 / 10.0)))
    }

    #[test]
    fn builtin_values() {
        assert_eq!(Kernel::exp_st().try_eval(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(Kernel::cos_pi().try_eval(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(
            Kernel::exp_st().try_eval(1.0, 1.0).unwrap(),
            std::f64::consts::E
        );
        assert_eq!(Kernel::const_one().try_eval(0.3, 0.7).unwrap(), 1.0);
        for (s, t) in grid() {
            let pi = std::f64::consts::PI;
            assert_eq!(Kernel::exp_st().eval(s, t), (s * t).exp());
            assert_eq!(Kernel::cos_pi().eval(s, t), (pi * s).cos() * (pi * t).cos());
        }
    }

    #[test]
    fn domain_is_checked() {
        let k = Kernel::exp_st();
        assert!(matches!(
            k.try_eval(-0.1, 0.5),
            Err(Error::Domain { what: "s", .. })
        ));
        assert!(matches!(
            k.try_eval(0.5, 1.5),
            Err(Error::Domain { what: "t", .. })
        ));
        assert!(k.try_eval(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn adjoint_examples() {
        let c = Kernel::cos_pi();
        assert_eq!(c.adjoint().eval(0.3, 0.8), c.eval(0.8, 0.3));
        let k = Kernel::parse("s*t^2").unwrap();
        assert_eq!(k.adjoint().try_eval(0.5, 1.0).unwrap(), 0.25);
        for (s, t) in grid() {
            assert_eq!(
                Kernel::exp_st().adjoint().eval(s, t),
                Kernel::exp_st().eval(s, t)
            );
            assert_eq!(k.adjoint().adjoint().eval(s, t), k.eval(s, t));
            assert_eq!(k.adjoint().eval(s, t), k.eval(t, s));
        }
        assert_eq!(k.adjoint().adjoint().name(), k.name());
    }

    #[test]
    fn expression_failures_surface() {
        let k = Kernel::parse("1/(s-t)").unwrap();
        assert!(k.try_eval(0.5, 0.5).is_err());
        assert!(k.eval(0.5, 0.5).is_nan());
        assert!(Kernel::parse("s+*t").is_err());
    }

    #[test]
    fn from_spec_dispatch() {
        assert_eq!(
            Kernel::from_spec("cos_pi").unwrap().source(),
            KernelSource::Builtin
        );
        assert_eq!(
            Kernel::from_spec("s*t").unwrap().source(),
            KernelSource::Expression
        );
        assert!(Kernel::builtin("nope").is_err());
    }
}
