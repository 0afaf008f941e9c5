//! Gauss-Legendre nodes and weights on [-1, 1].

/// Fixed-order Gauss-Legendre rule. Nodes are computed once by Newton
/// iteration on the Legendre polynomial and come out symmetric about zero.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Legendre P_n(x) and its derivative via the three-term recurrence.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let deriv = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, deriv)
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 2, "rule order must be at least 2");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton.
            let mut x =
                (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_deriv(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_deriv(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Enforce exact +- symmetry of the node set.
            nodes[i] = -x.abs();
            nodes[n - 1 - i] = x.abs();
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integral of `f` over [a, b] with this fixed rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, f: &mut F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        for order in [2, 5, 15, 31, 64] {
            let rule = GaussLegendre::new(order);
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "order {order}");
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_2n_minus_1() {
        let rule = GaussLegendre::new(8);
        // x^15 on [0, 1] = 1/16, the highest degree an 8-point rule handles.
        let v = rule.integrate(0.0, 1.0, &mut |x: f64| x.powi(15));
        assert!((v - 1.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn integrates_smooth_transcendental() {
        let rule = GaussLegendre::new(15);
        let v = rule.integrate(0.0, std::f64::consts::PI, &mut f64::sin);
        assert!((v - 2.0).abs() < 1e-13);
    }
}
