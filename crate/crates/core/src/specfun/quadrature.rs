//! Gauss-Laguerre quadrature for `∫_0^∞ f(t) e^{-t} dt`.
//!
//! Nodes are the eigenvalues of the Jacobi matrix of the Laguerre
//! recurrence (diagonal `2i+1`, off-diagonal `i`), isolated by Sturm-sequence
//! bisection and then polished with Newton steps on `L_D`. The weight of a
//! node is the squared first component of its normalized eigenvector, which
//! for the orthonormal Laguerre family equals `1 / Σ_{j<D} L_j(τ)^2`. That sum
//! is accumulated in log space, so weights far below `f64::MIN_POSITIVE`
//! (they reach `e^{-1100}` at `D = 300`) are still represented exactly.

use crate::error::{Error, Result};
use crate::specfun::log_sum_exp_iter;

/// Largest supported rule order.
pub const MAX_ORDER: usize = 512;

const RESCALE: f64 = 1e100;

/// An immutable `D`-point Gauss-Laguerre rule with log-domain weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    log_weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds the `order`-point rule, `1 <= order <= 512`.
    pub fn gauss_laguerre(order: usize) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::invalid(format!(
                "Gauss-Laguerre order must be in 1..={MAX_ORDER}, got {order}"
            )));
        }
        let mut nodes = Vec::with_capacity(order);
        let mut log_weights = Vec::with_capacity(order);
        for k in 0..order {
            let guess = bisect_eigenvalue(order, k);
            let node = newton_polish(order, guess);
            nodes.push(node);
            log_weights.push(-ln_christoffel_sum(order, node));
        }
        Ok(Self { nodes, log_weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes `τ_d`, strictly increasing.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `ln G_d`.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// `(τ_d, ln G_d)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + Clone + '_ {
        self.nodes.iter().copied().zip(self.log_weights.iter().copied())
    }

    /// `ln Σ_d G_d exp(ln_f(τ_d))`, the log of the rule applied to `f`.
    ///
    /// `ln_f` may return `-inf` for nodes where `f` vanishes.
    pub fn log_integrate<F>(&self, ln_f: F) -> f64
    where
        F: Fn(f64) -> f64,
    {
        let terms: Vec<f64> = self.iter().map(|(t, lw)| lw + ln_f(t)).collect();
        log_sum_exp_iter(terms.iter().copied())
    }

    /// `Σ_d G_d f(τ_d)` for ordinary (non log-domain) integrands.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(f64) -> f64,
    {
        self.iter().map(|(t, lw)| lw.exp() * f(t)).sum()
    }
}

/// Number of Jacobi-matrix eigenvalues strictly below `x`.
fn sturm_count(order: usize, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0 - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..order {
        let diag = (2 * i + 1) as f64;
        let off2 = (i * i) as f64;
        let denom = if q == 0.0 { f64::EPSILON } else { q };
        q = diag - x - off2 / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue (0-based) by bisection.
fn bisect_eigenvalue(order: usize, k: usize) -> f64 {
    // Gershgorin: every eigenvalue lies in (0, 4D)
    let mut lo = 0.0;
    let mut hi = 4.0 * order as f64 + 2.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(order, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(L_D(x) / L_{D-1}(x))`, computed with rescaling so that it never overflows.
fn laguerre_ratio(order: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    let mut cur = 1.0 - x;
    for j in 1..order {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 - x) * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
        }
    }
    cur / prev
}

fn newton_polish(order: usize, mut x: f64) -> f64 {
    if order == 1 {
        return 1.0;
    }
    let n = order as f64;
    for _ in 0..8 {
        let r = laguerre_ratio(order, x);
        // L_D' = D (L_D - L_{D-1}) / x
        let step = x * r / (n * (r - 1.0));
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.abs() <= 4.0 * f64::EPSILON * x {
            break;
        }
    }
    x
}

/// `ln Σ_{j<D} L_j(x)^2`.
fn ln_christoffel_sum(order: usize, x: f64) -> f64 {
    let mut log_scale = 0.0;
    let mut prev = 1.0f64;
    let mut cur = 1.0 - x;
    let mut terms = Vec::with_capacity(order);
    terms.push(0.0);
    if order > 1 {
        terms.push(2.0 * cur.abs().ln());
    }
    for j in 1..order.saturating_sub(1) {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 - x) * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
        terms.push(2.0 * (cur.abs().ln() + log_scale));
    }
    log_sum_exp_iter(terms.iter().copied())
}
