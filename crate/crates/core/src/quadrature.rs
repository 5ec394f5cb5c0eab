//! Composite Gauss–Legendre quadrature on the unit interval.

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `(-1, 1)`,
/// found by Newton iteration on the Legendre recurrence.
fn gauss_legendre_reference(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A composite rule: `panels` equal subintervals of `(0,1)`, each carrying an
/// `n`-point Gauss–Legendre rule. Exact for polynomials of degree
/// `2·nodes_per_panel − 1` on every panel; extra breakpoints can be inserted
/// per integral to keep that accuracy across integrand kinks.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    panels: usize,
    nodes_per_panel: usize,
    ref_nodes: Vec<f64>,
    ref_weights: Vec<f64>,
}

/// Default assembly rule; generous for integrands that are analytic between
/// breakpoints.
pub const DEFAULT_PANELS: usize = 64;
pub const DEFAULT_NODES_PER_PANEL: usize = 10;

impl QuadratureRule {
    pub fn composite_gauss_legendre(panels: usize, nodes_per_panel: usize) -> Result<Self> {
        if panels == 0 || nodes_per_panel == 0 {
            return Err(Error::InvalidParameter(
                "quadrature needs at least one panel and one node".into(),
            ));
        }
        if nodes_per_panel > 64 {
            return Err(Error::InvalidParameter(
                "Gauss-Legendre order above 64 is not supported".into(),
            ));
        }
        let (ref_nodes, ref_weights) = gauss_legendre_reference(nodes_per_panel);
        Ok(Self {
            panels,
            nodes_per_panel,
            ref_nodes,
            ref_weights,
        })
    }

    pub fn default_rule() -> Self {
        Self::composite_gauss_legendre(DEFAULT_PANELS, DEFAULT_NODES_PER_PANEL)
            .expect("default rule parameters are valid")
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }

    /// Total weight over `(0,1)`; equals the domain length.
    pub fn weight_sum(&self) -> f64 {
        let mut total = 0.0;
        self.for_each_node(&[], |_, w| total += w);
        total
    }

    /// Integrate `f` over `(0,1)` on the base panels.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let mut total = 0.0;
        self.for_each_node(&[], |z, w| total += w * f(z));
        total
    }

    /// Integrate `f` over `(0,1)` with additional panel boundaries inserted at
    /// `breaks` (values outside `(0,1)` are ignored). Restores full accuracy
    /// when the integrand is only piecewise-smooth.
    pub fn integrate_split<F: FnMut(f64) -> f64>(&self, breaks: &[f64], mut f: F) -> f64 {
        let mut total = 0.0;
        self.for_each_node(breaks, |z, w| total += w * f(z));
        total
    }

    /// Visit every node/weight pair left to right. The traversal order is a
    /// pure function of `breaks` after sorting, which is what makes
    /// quadrature-built kernels symmetric to the last bit.
    fn for_each_node<F: FnMut(f64, f64)>(&self, breaks: &[f64], mut visit: F) {
        let mut bounds = Vec::with_capacity(self.panels + 1 + breaks.len());
        for i in 0..=self.panels {
            bounds.push(i as f64 / self.panels as f64);
        }
        for &b in breaks {
            if b > 0.0 && b < 1.0 && b.is_finite() {
                bounds.push(b);
            }
        }
        bounds.sort_by(|a, b| a.partial_cmp(b).expect("finite bounds"));
        bounds.dedup();
        for pair in bounds.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            for (z, w) in self.ref_nodes.iter().zip(&self.ref_weights) {
                visit(mid + half * z, half * w);
            }
        }
    }
}
