//! Natural cubic spline interpolation for table-defined kernel profiles.

use super::ModelError;

/// Natural cubic spline through strictly increasing knots.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots (natural: zero at both ends).
    y2: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, ModelError> {
        if x.len() != y.len() {
            return Err(ModelError::BadTable("x and y lengths differ".into()));
        }
        if x.len() < 2 {
            return Err(ModelError::BadTable("need at least two samples".into()));
        }
        for w in x.windows(2) {
            if !(w[1] > w[0]) {
                return Err(ModelError::BadTable(format!(
                    "abscissae must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
            return Err(ModelError::BadTable(format!("non-finite value {bad}")));
        }

        // Tridiagonal solve for the second derivatives (Thomas algorithm).
        let n = x.len();
        let mut y2 = vec![0.0; n];
        let mut u = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
            let p = sig * y2[i - 1] + 2.0;
            y2[i] = (sig - 1.0) / p;
            let dy = (y[i + 1] - y[i]) / (x[i + 1] - x[i])
                - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
            u[i] = (6.0 * dy / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
        }
        for i in (0..n - 1).rev() {
            y2[i] = y2[i] * y2[i + 1] + u[i];
        }
        Ok(Self { x, y, y2 })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    pub fn last_value(&self) -> f64 {
        *self.y.last().unwrap()
    }

    fn segment(&self, x: f64) -> usize {
        // partition_point returns the first knot > x; the segment is the one
        // ending there.
        let i = self.x.partition_point(|&k| k <= x);
        i.clamp(1, self.x.len() - 1) - 1
    }

    /// Value at `x`. Clamped to the first knot value below the domain and to
    /// zero above it (table kernels describe decaying profiles).
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.x[0] {
            return self.y[0];
        }
        if x > *self.x.last().unwrap() {
            return 0.0;
        }
        let i = self.segment(x);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - x) / h;
        let b = (x - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.y2[i] + (b * b * b - b) * self.y2[i + 1]) * h * h / 6.0
    }

    /// First derivative at `x` (zero outside the domain).
    pub fn deriv(&self, x: f64) -> f64 {
        if x < self.x[0] || x > *self.x.last().unwrap() {
            return 0.0;
        }
        let i = self.segment(x);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - x) / h;
        let b = (x - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((3.0 * b * b - 1.0) * self.y2[i + 1] - (3.0 * a * a - 1.0) * self.y2[i]) * h / 6.0
    }

    /// Second derivative at `x` (zero outside the domain).
    pub fn second_deriv(&self, x: f64) -> f64 {
        if x < self.x[0] || x > *self.x.last().unwrap() {
            return 0.0;
        }
        let i = self.segment(x);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - x) / h;
        let b = (x - self.x[i]) / h;
        a * self.y2[i] + b * self.y2[i + 1]
    }
}
