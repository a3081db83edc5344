//! Gauss–Legendre quadrature rules and composite panels.

use crate::error::{KrylovError, Result};

/// Legendre polynomial value and derivative at `x` by the three-term
/// recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
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

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending. Exact for polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(KrylovError::InvalidParameter(
            "quadrature rule needs at least one node".into(),
        ));
    }
    if n == 1 {
        return Ok((vec![0.0], vec![2.0]));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    Ok((nodes, weights))
}

/// The `n`-point Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, w) = gauss_legendre(n)?;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok((
        x.iter().map(|&t| half * t + mid).collect(),
        w.iter().map(|&u| half * u).collect(),
    ))
}

/// A composite Gauss–Legendre rule on `[a, b]` with equal panels.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub panel_edges: Vec<f64>,
    pub points_per_panel: usize,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize, points_per_panel: usize) -> Result<Self> {
        if panels == 0 {
            return Err(KrylovError::InvalidParameter(
                "composite rule needs at least one panel".into(),
            ));
        }
        let mut nodes = Vec::with_capacity(panels * points_per_panel);
        let mut weights = Vec::with_capacity(panels * points_per_panel);
        let mut panel_edges = Vec::with_capacity(panels + 1);
        let h = (b - a) / panels as f64;
        for p in 0..=panels {
            panel_edges.push(a + h * p as f64);
        }
        for p in 0..panels {
            let (x, w) = gauss_legendre_on(panel_edges[p], panel_edges[p + 1], points_per_panel)?;
            nodes.extend(x);
            weights.extend(w);
        }
        Ok(Self {
            nodes,
            weights,
            panel_edges,
            points_per_panel,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panel_of(&self, node_index: usize) -> usize {
        node_index / self.points_per_panel
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 5, 8, 16, 48] {
            let (_, w) = gauss_legendre(n).unwrap();
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}: weight sum {s}");
        }
    }

    #[test]
    fn nodes_symmetric_and_ascending() {
        let (x, _) = gauss_legendre(8).unwrap();
        for i in 1..8 {
            assert!(x[i] > x[i - 1]);
        }
        for i in 0..8 {
            assert!((x[i] + x[7 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        // Monomial moments over [-1,1]: 0 for odd k, 2/(k+1) for even k.
        let n = 8;
        let (x, w) = gauss_legendre(n).unwrap();
        for k in 0..(2 * n) {
            let q: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(k as i32)).sum();
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "degree {k}: {q} vs {exact}");
        }
    }

    #[test]
    fn composite_rule_integrates_smooth_function() {
        let rule = CompositeRule::new(0.0, 1.0, 4, 8).unwrap();
        let v = rule.integrate(|x| (3.0 * x).sin());
        let exact = (1.0 - (3.0f64).cos()) / 3.0;
        assert!((v - exact).abs() < 1e-13);
    }
}
