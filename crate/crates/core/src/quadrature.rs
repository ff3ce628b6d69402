//! Gauss–Legendre quadrature on intervals.

use std::f64::consts::PI;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on [−1, 1],
/// found by Newton iteration on P_order from the Chebyshev guesses.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(order, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(order, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule: `panels` equal sub-intervals of [a, b], each with an
/// `order`-point Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let left = a + width * p as f64;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(left + 0.5 * width * (xi + 1.0));
                weights.push(0.5 * width * wi);
            }
        }
        CompositeRule { nodes, weights }
    }

    /// Same rule with panel breaks at the given points (sorted, inside [a, b]).
    pub fn with_breaks(a: f64, b: f64, breaks: &[f64], panels: usize, order: usize) -> Self {
        let mut cuts = vec![a];
        cuts.extend(breaks.iter().copied().filter(|&c| c > a && c < b));
        cuts.push(b);
        let mut rule = CompositeRule {
            nodes: Vec::new(),
            weights: Vec::new(),
        };
        for w in cuts.windows(2) {
            let part = CompositeRule::new(w[0], w[1], panels, order);
            rule.nodes.extend(part.nodes);
            rule.weights.extend(part.weights);
        }
        rule
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// ∫_a^b f with `panels` × 20-point Gauss–Legendre.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    CompositeRule::new(a, b, panels, 20).integrate(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_are_exact_for_polynomials() {
        for order in 1..=12 {
            let (x, w) = gauss_legendre(order);
            for deg in 0..2 * order {
                let q: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!((q - exact).abs() < 1e-13, "order {order} degree {deg}: {q}");
            }
        }
    }

    #[test]
    fn gaussian_integral() {
        let v = integrate(|t| (-t * t).exp(), -10.0, 10.0, 8);
        assert!((v - PI.sqrt()).abs() < 1e-14);
    }
}
