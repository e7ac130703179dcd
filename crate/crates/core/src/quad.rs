//! Composite Gauss-Legendre rules.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Fixed-order Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pairs: Vec<(f64, f64)>,
}

impl Rule {
    pub fn new(order: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(order.max(1)).unwrap());
        Self { pairs: gl.as_node_weight_pairs().to_vec() }
    }

    pub fn order(&self) -> usize {
        self.pairs.len()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.pairs.iter().map(move |&(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// `panels` equal panels on `[a, b]`.
    pub fn composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels).map(|i| self.integrate(a + i as f64 * h, a + (i + 1) as f64 * h, &mut f)).sum()
    }
}

/// Nodes/weights of a composite rule on `[a, b]` whose panels are geometrically
/// graded toward `a` (ratio `grade` between neighbouring panel widths).
pub fn graded_nodes(rule: &Rule, a: f64, b: f64, panels: usize, grade: f64) -> Vec<(f64, f64)> {
    let mut widths: Vec<f64> = (0..panels).map(|i| grade.powi(i as i32)).collect();
    let total: f64 = widths.iter().sum();
    widths.iter_mut().for_each(|w| *w *= (b - a) / total);
    let mut out = Vec::with_capacity(panels * rule.order());
    let mut lo = a;
    for w in widths {
        out.extend(rule.mapped(lo, lo + w));
        lo += w;
    }
    out
}
