//! Two-dimensional differential transform.
//!
//! The transform of `f(x, y)` about `(x0, y0)` is the table of scaled Taylor
//! coefficients `F(k, h) = (1 / k! h!) ∂^{k+h} f / ∂x^k ∂y^h`. For polynomial
//! input it is exact and the inverse series reproduces `f`.
//!
//! Applied to `u_t = -E u_x + D u_xx`, the transform turns the PDE into the
//! recurrence
//!
//! ```text
//! (h + 1) F(k, h + 1) = -E (k + 1) F(k + 1, h) + D (k + 1)(k + 2) F(k + 2, h)
//! ```
//!
//! which builds a truncated space-time series from a polynomial seed
//! `F(·, 0)`. Tables carry a center and a scale per axis; coefficients refer
//! to the scaled offsets `((x - x0) / sx, (y - y0) / sy)` so high orders stay
//! representable.

use serde::Serialize;

use crate::error::{Error, Result};

/// Bivariate polynomial `Σ c[a][b] x^a y^b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial2 {
    pub coeffs: Vec<Vec<f64>>,
}

impl Polynomial2 {
    pub fn new(coeffs: Vec<Vec<f64>>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![vec![c]])
    }

    /// Highest powers of `x` and `y` with a nonzero coefficient.
    pub fn degree(&self) -> (usize, usize) {
        let mut dx = 0;
        let mut dy = 0;
        for (a, row) in self.coeffs.iter().enumerate() {
            for (b, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    dx = dx.max(a);
                    dy = dy.max(b);
                }
            }
        }
        (dx, dy)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, row| acc * x + row.iter().rev().fold(0.0, |r, &c| r * y + c))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DtmTable {
    pub center: (f64, f64),
    pub scale: (f64, f64),
    /// `coeffs[k][h]`, `k <= n`, `h <= m`.
    pub coeffs: Vec<Vec<f64>>,
}

impl DtmTable {
    pub fn zeros(orders: (usize, usize)) -> Self {
        Self {
            center: (0.0, 0.0),
            scale: (1.0, 1.0),
            coeffs: vec![vec![0.0; orders.1 + 1]; orders.0 + 1],
        }
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.coeffs.len() - 1, self.coeffs.first().map_or(0, |r| r.len() - 1))
    }

    pub fn get(&self, k: usize, h: usize) -> f64 {
        self.coeffs.get(k).and_then(|r| r.get(h)).copied().unwrap_or(0.0)
    }
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    row
}

/// Transform of a polynomial about `center`, truncated at `orders = (n, m)`.
pub fn dtm_transform(f: &Polynomial2, orders: (usize, usize), center: (f64, f64)) -> Result<DtmTable> {
    let (n, m) = orders;
    let (deg_x, deg_y) = f.degree();
    if deg_x > n || deg_y > m {
        return Err(Error::TruncationOrder {
            degree_x: deg_x,
            degree_y: deg_y,
            order_x: n,
            order_y: m,
        });
    }
    let (x0, y0) = center;
    let mut table = DtmTable::zeros(orders);
    table.center = center;
    // x^a y^b = Σ_k Σ_h C(a,k) C(b,h) x0^(a-k) y0^(b-h) (x-x0)^k (y-y0)^h
    for (a, row) in f.coeffs.iter().enumerate() {
        let bx = binomial_row(a);
        for (b, &c) in row.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let by = binomial_row(b);
            for k in 0..=a {
                let px = bx[k] * x0.powi((a - k) as i32);
                for h in 0..=b {
                    table.coeffs[k][h] += c * px * by[h] * y0.powi((b - h) as i32);
                }
            }
        }
    }
    Ok(table)
}

/// Evaluates the truncated series `Σ F(k, h) X^k Y^h` at `(x, y)`, with
/// `X`, `Y` the scaled offsets from the table's center.
pub fn dtm_inverse(table: &DtmTable, x: f64, y: f64) -> f64 {
    let xs = (x - table.center.0) / table.scale.0;
    let ys = (y - table.center.1) / table.scale.1;
    table
        .coeffs
        .iter()
        .rev()
        .fold(0.0, |acc, row| acc * xs + row.iter().rev().fold(0.0, |r, &c| r * ys + c))
}

/// Series solution of `u_t = -drift u_x + diffusion u_xx` from the seed
/// `u(x, t0) = Σ seed[k] ((x - x0) / sx)^k`.
///
/// The seed needs at least `2 m` more terms than the spatial order wanted
/// in the final series; coefficients beyond the seed are treated as zero.
pub fn dtm_drift_diffusion(
    seed: &[f64],
    center: (f64, f64),
    scale: (f64, f64),
    drift: f64,
    diffusion: f64,
    time_order: usize,
) -> Result<DtmTable> {
    if seed.is_empty() {
        return Err(Error::InvalidInput("seed polynomial is empty".into()));
    }
    if !(scale.0 > 0.0 && scale.1 > 0.0) {
        return Err(Error::InvalidInput("scales must be positive".into()));
    }
    let n = seed.len() - 1;
    let mut table = DtmTable::zeros((n, time_order));
    table.center = center;
    table.scale = scale;
    let e = drift * scale.1 / scale.0;
    let d = diffusion * scale.1 / (scale.0 * scale.0);
    for (k, &c) in seed.iter().enumerate() {
        table.coeffs[k][0] = c;
    }
    for h in 0..time_order {
        for k in 0..=n {
            let first = if k + 1 <= n { table.coeffs[k + 1][h] } else { 0.0 };
            let second = if k + 2 <= n { table.coeffs[k + 2][h] } else { 0.0 };
            let kf = k as f64;
            table.coeffs[k][h + 1] =
                (-e * (kf + 1.0) * first + d * (kf + 1.0) * (kf + 2.0) * second) / (h as f64 + 1.0);
        }
    }
    Ok(table)
}

/// Taylor coefficients, in `ξ = (x - mean) / sigma`, of a unit-mass Gaussian
/// density, up to `ξ^order`.
pub fn gaussian_seed(sigma: f64, order: usize) -> Vec<f64> {
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let mut seed = vec![0.0; order + 1];
    let mut c = norm;
    for j in 0..=order / 2 {
        seed[2 * j] = c;
        c *= -0.5 / (j as f64 + 1.0);
    }
    seed
}
