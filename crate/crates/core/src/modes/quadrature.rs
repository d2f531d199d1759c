//! Gauss–Legendre rules.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Nodes and weights of a quadrature rule on some interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]` (Newton iteration on the
/// three-term recurrence).
pub fn gauss_legendre(n: usize) -> Rule {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            derivative = dp;
            let dx = p / dp;
            x -= dx;
            if libm::fabs(dx) < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        if dp != 0.0 {
            derivative = dp;
        }
        let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule of `order` points mapped onto `[a, b]`.
pub fn mapped(order: usize, a: f64, b: f64) -> Rule {
    composite(order, 1, a, b)
}

/// Composite rule: `panels` equal panels on `[a, b]`, `order` points each.
pub fn composite(order: usize, panels: usize, a: f64, b: f64) -> Rule {
    let base = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(order * panels);
    let mut weights = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + width / 2.0;
        for (&t, &w) in base.nodes.iter().zip(&base.weights) {
            nodes.push(mid + t * width / 2.0);
            weights.push(w * width / 2.0);
        }
    }
    Rule { nodes, weights }
}
