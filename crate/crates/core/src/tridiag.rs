/// Banded 3-diagonal matrix stored by diagonals. `lower[i]` is the entry at
/// `(i + 1, i)` and `upper[i]` the entry at `(i, i + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            upper: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.upper[i] * x[i + 1];
            }
            out[i] = v;
        }
    }

    /// Thomas algorithm. No pivoting: callers pass diagonally dominant
    /// systems.
    pub fn solve(&self, rhs: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
        let n = self.dim();
        scratch.clear();
        scratch.resize(n, 0.0);
        let c = scratch;
        let mut beta = self.diag[0];
        out[0] = rhs[0] / beta;
        for i in 1..n {
            c[i] = self.upper[i - 1] / beta;
            beta = self.diag[i] - self.lower[i - 1] * c[i];
            out[i] = (rhs[i] - self.lower[i - 1] * out[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            out[i] -= c[i + 1] * out[i + 1];
        }
    }
}
