//! Linear differential and boundary operators as coefficient-weighted sums of
//! derivatives, and their application to kernel arguments.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::Kernel;

/// A coefficient `c_α(·)`: either constant or an arbitrary function on the
/// closed domain.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Function(f) => f(x),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(c: f64) -> Self {
        Coefficient::Constant(c)
    }
}

/// Which argument of `K(x, y)` an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelArg {
    First,
    Second,
}

static NEXT_TAG: AtomicU64 = AtomicU64::new(1);

/// The shared representation `Σ_α c_α(·) D^α` behind both operator kinds.
///
/// Each instance carries a unique tag so operator-applied kernel evaluations
/// can be memoized; tag 0 is reserved for the identity slot.
#[derive(Debug, Clone)]
pub struct DerivativeSum {
    terms: Vec<(u8, Coefficient)>,
    order: u8,
    tag: u64,
}

impl DerivativeSum {
    fn new(terms: Vec<(u8, Coefficient)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter(
                "operator needs at least one term".into(),
            ));
        }
        let mut order = 0;
        for &(alpha, ref c) in &terms {
            if alpha > 2 {
                return Err(Error::InvalidParameter(format!(
                    "derivative order {alpha} exceeds the supported maximum of 2"
                )));
            }
            let vanishes = matches!(c, Coefficient::Constant(v) if *v == 0.0);
            if !vanishes {
                order = order.max(alpha);
            }
        }
        Ok(Self {
            terms,
            order,
            tag: NEXT_TAG.fetch_add(1, Ordering::Relaxed),
        })
    }

    pub fn terms(&self) -> &[(u8, Coefficient)] {
        &self.terms
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub(crate) fn tag(&self) -> u64 {
        self.tag
    }

    /// Apply to a kernel argument: `Σ_α c_α(p) ∂^α_{arg} K(x, y)` where `p`
    /// is the point in the designated slot.
    pub fn apply_to_kernel<K: Kernel + ?Sized>(
        &self,
        kernel: &K,
        arg: KernelArg,
        x: f64,
        y: f64,
    ) -> Result<f64> {
        let point = match arg {
            KernelArg::First => x,
            KernelArg::Second => y,
        };
        let mut sum = 0.0;
        for (alpha, coefficient) in &self.terms {
            let derivative = match arg {
                KernelArg::First => kernel.eval(x, y, *alpha, 0)?,
                KernelArg::Second => kernel.eval(x, y, 0, *alpha)?,
            };
            sum += coefficient.eval(point) * derivative;
        }
        Ok(sum)
    }

    /// Apply to a function given an oracle for its derivatives:
    /// `derivatives(α, x)` must return `f^{(α)}(x)`.
    pub fn apply_with(&self, derivatives: impl Fn(u8, f64) -> f64, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|(alpha, c)| c.eval(x) * derivatives(*alpha, x))
            .sum()
    }
}

/// A differential operator `P = Σ c_α D^α` acting in the interior.
#[derive(Debug, Clone)]
pub struct DifferentialOperator {
    sum: DerivativeSum,
}

impl DifferentialOperator {
    pub fn new(terms: Vec<(u8, Coefficient)>) -> Result<Self> {
        Ok(Self {
            sum: DerivativeSum::new(terms)?,
        })
    }

    /// The identity `I` (a zeroth-order operator with unit coefficient).
    pub fn identity() -> Self {
        Self::new(vec![(0, Coefficient::Constant(1.0))]).expect("identity terms are valid")
    }

    /// The implicit-Euler step operator `P = I − δt·a·d²/dx²` for the
    /// diffusion `A = a·d²/dx²`.
    pub fn implicit_euler_step(delta_t: f64, diffusion_coefficient: f64) -> Result<Self> {
        if !(delta_t > 0.0) || !delta_t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive and finite, got {delta_t}"
            )));
        }
        Self::new(vec![
            (0, Coefficient::Constant(1.0)),
            (2, Coefficient::Constant(-delta_t * diffusion_coefficient)),
        ])
    }
}

/// A boundary operator `B = Σ b_α D^α` restricted to `∂D = {0, 1}`.
#[derive(Debug, Clone)]
pub struct BoundaryOperator {
    sum: DerivativeSum,
}

impl BoundaryOperator {
    pub fn new(terms: Vec<(u8, Coefficient)>) -> Result<Self> {
        Ok(Self {
            sum: DerivativeSum::new(terms)?,
        })
    }

    /// Dirichlet trace: the identity restricted to the boundary.
    pub fn dirichlet() -> Self {
        Self::new(vec![(0, Coefficient::Constant(1.0))]).expect("trace terms are valid")
    }
}

/// Common access to the underlying derivative sum.
pub trait LinearOperator {
    fn sum(&self) -> &DerivativeSum;

    fn order(&self) -> u8 {
        self.sum().order()
    }
}

impl LinearOperator for DifferentialOperator {
    fn sum(&self) -> &DerivativeSum {
        &self.sum
    }
}

impl LinearOperator for BoundaryOperator {
    fn sum(&self) -> &DerivativeSum {
        &self.sum
    }
}

/// Apply an operator to one argument of a kernel.
pub fn apply_to_kernel<K: Kernel + ?Sized>(
    op: &impl LinearOperator,
    kernel: &K,
    arg: KernelArg,
    x: f64,
    y: f64,
) -> Result<f64> {
    op.sum().apply_to_kernel(kernel, arg, x, y)
}
