//! Chebyshev–Gauss–Lobatto grids on an arbitrary interval: nodes, first
//! derivative matrix, Clenshaw–Curtis weights and barycentric interpolation.
//!
//! Nodes ascend: index 0 is the interval start `a`, index `N` is `b`.

use std::f64::consts::PI;
use std::ops::{Add, Div, Mul};

use num_traits::Zero;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CglGrid {
    n_order: usize,
    a: f64,
    b: f64,
    points: Vec<f64>,
}

impl CglGrid {
    pub fn n_order(&self) -> usize {
        self.n_order
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, z: f64) -> bool {
        z >= self.a && z <= self.b
    }
}

/// Dense first-derivative matrix on a [`CglGrid`], stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMatrix {
    grid: CglGrid,
    entries: Vec<f64>,
}

impl DiffMatrix {
    pub fn grid(&self) -> &CglGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.dim());
        (0..self.dim())
            .map(|i| self.row(i).iter().zip(values).map(|(d, v)| d * v).sum())
            .collect()
    }
}

/// `cos(j*pi/n)` evaluated through a sine so that symmetric nodes are exact
/// negatives of each other.
fn cheb_cos(j: usize, n: usize) -> f64 {
    let k = n as f64 - 2.0 * j as f64;
    (PI * k / (2.0 * n as f64)).sin()
}

pub fn cgl_points(n_order: usize, a: f64, b: f64) -> Result<CglGrid> {
    if n_order < 2 {
        return Err(Error::InvalidArgument(format!(
            "CGL order must be at least 2, got {n_order}"
        )));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "interval [{a}, {b}] must be finite with a < b"
        )));
    }
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut points: Vec<f64> = (0..=n_order)
        .map(|j| mid - half * cheb_cos(j, n_order))
        .collect();
    points[0] = a;
    points[n_order] = b;
    Ok(CglGrid {
        n_order,
        a,
        b,
        points,
    })
}

pub fn diff_matrix(grid: &CglGrid) -> DiffMatrix {
    let n = grid.n_order;
    let dim = n + 1;
    let scale = 2.0 / (grid.b - grid.a);
    let c = |i: usize| if i == 0 || i == n { 2.0 } else { 1.0 };
    let mut entries = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            if i == j {
                continue;
            }
            // t_i - t_j on the ascending reference nodes t_j = -cos(j*pi/n).
            let diff = 2.0
                * ((i + j) as f64 * PI / (2.0 * n as f64)).sin()
                * ((i as f64 - j as f64) * PI / (2.0 * n as f64)).sin();
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            entries[i * dim + j] = scale * sign * c(i) / (c(j) * diff);
        }
    }
    // Negative-sum trick for the diagonal.
    for i in 0..dim {
        let off: f64 = (0..dim).filter(|&j| j != i).map(|j| entries[i * dim + j]).sum();
        entries[i * dim + i] = -off;
    }
    DiffMatrix {
        grid: grid.clone(),
        entries,
    }
}

/// Clenshaw–Curtis weights for the CGL nodes of `grid`.
pub fn quad_weights(grid: &CglGrid) -> Vec<f64> {
    let n = grid.n_order;
    let nf = n as f64;
    let half = 0.5 * (grid.b - grid.a);
    let mut w = vec![0.0; n + 1];
    let end = if n.is_multiple_of(2) {
        1.0 / (nf * nf - 1.0)
    } else {
        1.0 / (nf * nf)
    };
    w[0] = end;
    w[n] = end;
    for (j, wj) in w.iter_mut().enumerate().take(n).skip(1) {
        let theta = j as f64 * PI / nf;
        let mut v = 1.0;
        if n.is_multiple_of(2) {
            for k in 1..n / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
            v -= (nf * theta).cos() / (nf * nf - 1.0);
        } else {
            for k in 1..=(n - 1) / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        *wj = 2.0 * v / nf;
    }
    w.iter().map(|x| x * half).collect()
}

/// Barycentric weights for CGL nodes: `(-1)^j`, halved at the ends.
fn bary_weight(j: usize, n: usize) -> f64 {
    let s = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    if j == 0 || j == n {
        0.5 * s
    } else {
        s
    }
}

/// Lagrange cardinal values `l_j(z)` at `z`, so that the interpolant is
/// `sum_j l_j(z) * values[j]`.
pub fn barycentric_coefficients(grid: &CglGrid, z: f64) -> Result<Vec<f64>> {
    if !grid.contains(z) {
        return Err(Error::OutOfDomain {
            what: "interpolation point",
            value: z,
            lo: grid.a,
            hi: grid.b,
        });
    }
    let n = grid.n_order;
    let mut coeffs = vec![0.0; n + 1];
    if let Some(k) = grid.points.iter().position(|&p| p == z) {
        coeffs[k] = 1.0;
        return Ok(coeffs);
    }
    let mut denom = 0.0;
    for (j, (&p, c)) in grid.points.iter().zip(coeffs.iter_mut()).enumerate() {
        *c = bary_weight(j, n) / (z - p);
        denom += *c;
    }
    coeffs.iter_mut().for_each(|c| *c /= denom);
    Ok(coeffs)
}

pub fn barycentric_interpolate<T>(grid: &CglGrid, values: &[T], z: f64) -> Result<T>
where
    T: Copy + Zero + Add<Output = T> + Mul<f64, Output = T> + Div<f64, Output = T>,
{
    if values.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} samples, got {}",
            grid.len(),
            values.len()
        )));
    }
    if !grid.contains(z) {
        return Err(Error::OutOfDomain {
            what: "interpolation point",
            value: z,
            lo: grid.a,
            hi: grid.b,
        });
    }
    if let Some(k) = grid.points.iter().position(|&p| p == z) {
        return Ok(values[k]);
    }
    let n = grid.n_order;
    let mut num = T::zero();
    let mut den = 0.0;
    for (j, (&p, &v)) in grid.points.iter().zip(values).enumerate() {
        let t = bary_weight(j, n) / (z - p);
        num = num + v * t;
        den += t;
    }
    Ok(num / den)
}
