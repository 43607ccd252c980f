//! Modal sum for the complex pressure and its transmission loss.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cheb;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::modal::ModeSet;
use crate::specfun::hankel1_0;

/// Reference pressure magnitude: the free-field point source at 1 m.
pub const P_REF: f64 = 1.0 / (4.0 * PI);

/// Mode values `psi_m(z)` for every mode, interpolated in the layer holding `z`.
/// The interface depth is taken from the water side.
pub fn mode_at_depth(ms: &ModeSet, z: f64) -> Result<Vec<Complex64>> {
    let total = ms.total_depth();
    if !(0.0..=total).contains(&z) {
        return Err(Error::OutOfDomain {
            what: "depth",
            value: z,
            lo: 0.0,
            hi: total,
        });
    }
    if z <= ms.interface_depth() {
        interpolate_columns(&ms.water_grid, &ms.modes_water, z)
    } else {
        interpolate_columns(&ms.bottom_grid, &ms.modes_bottom, z)
    }
}

/// Same as [`mode_at_depth`] but evaluated in the bottom layer at the interface.
pub fn mode_at_interface_from_bottom(ms: &ModeSet) -> Result<Vec<Complex64>> {
    interpolate_columns(&ms.bottom_grid, &ms.modes_bottom, ms.interface_depth())
}

fn interpolate_columns(grid: &cheb::CglGrid, modes: &CMatrix, z: f64) -> Result<Vec<Complex64>> {
    let coef = cheb::barycentric_coefficients(grid, z)?;
    let mut out = vec![Complex64::new(0.0, 0.0); modes.cols()];
    for (row, &c) in coef.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(modes.row(row)) {
            *o += v * c;
        }
    }
    Ok(out)
}

/// `H0(1)((a + ib) r)` approximated by `H0(1)(a r) exp(-b r)`.
pub fn hankel_lossy(kr: Complex64, r: f64) -> Result<Complex64> {
    Ok(hankel1_0(kr.re * r)? * (-kr.im * r).exp())
}

/// `p(r, z) = i / (4 rho(zs)) sum_m psi_m(zs) psi_m(z) H0(1)(kr_m r)`, as a
/// `depths x ranges` matrix.
pub fn pressure_field(ms: &ModeSet, zs: f64, ranges: &[f64], depths: &[f64]) -> Result<CMatrix> {
    if let Some(&r) = ranges.iter().find(|&&r| !(r > 0.0)) {
        return Err(Error::OutOfDomain {
            what: "range",
            value: r,
            lo: f64::MIN_POSITIVE,
            hi: f64::INFINITY,
        });
    }
    let source = mode_at_depth(ms, zs)?;
    let scale = Complex64::new(0.0, 0.25 / ms.density_at(zs)?);

    // h[m][j] = scale * psi_m(zs) * H0(kr_m r_j)
    let mut weighted = CMatrix::zeros(ms.len(), ranges.len());
    for (m, (&kr, &ps)) in ms.wavenumbers.iter().zip(&source).enumerate() {
        let row = weighted.row_mut(m);
        for (out, &r) in row.iter_mut().zip(ranges) {
            *out = scale * ps * hankel_lossy(kr, r)?;
        }
    }

    let mut p = CMatrix::zeros(depths.len(), ranges.len());
    for (i, &z) in depths.iter().enumerate() {
        let psi = mode_at_depth(ms, z)?;
        let row = p.row_mut(i);
        for (m, &v) in psi.iter().enumerate() {
            for (out, h) in row.iter_mut().zip(weighted.row(m)) {
                *out += v * h;
            }
        }
    }
    Ok(p)
}

/// Transmission loss on a receiver lattice.
#[derive(Debug, Clone)]
pub struct TlGrid {
    pub ranges_m: Vec<f64>,
    pub depths_m: Vec<f64>,
    /// `depths x ranges`.
    pub pressure: CMatrix,
    /// Row-major `depths x ranges`; `+inf` where the pressure vanishes.
    pub tl_db: Vec<f64>,
}

impl TlGrid {
    pub fn tl(&self, depth_index: usize, range_index: usize) -> f64 {
        self.tl_db[depth_index * self.ranges_m.len() + range_index]
    }
}

/// `-20 log10(|p| / p_ref)`, `+inf` for zero pressure.
pub fn tl_db(p: Complex64) -> f64 {
    let mag = p.norm();
    if mag == 0.0 {
        f64::INFINITY
    } else {
        -20.0 * (mag / P_REF).log10()
    }
}

pub fn transmission_loss(ranges: &[f64], depths: &[f64], pressure: CMatrix) -> Result<TlGrid> {
    if pressure.rows() != depths.len() || pressure.cols() != ranges.len() {
        return Err(Error::InvalidArgument(format!(
            "pressure is {}x{}, expected {}x{}",
            pressure.rows(),
            pressure.cols(),
            depths.len(),
            ranges.len()
        )));
    }
    if !pressure.is_finite() {
        return Err(Error::InvalidArgument("pressure contains non-finite values".into()));
    }
    Ok(TlGrid {
        ranges_m: ranges.to_vec(),
        depths_m: depths.to_vec(),
        tl_db: pressure.as_slice().iter().map(|&p| tl_db(p)).collect(),
        pressure,
    })
}
