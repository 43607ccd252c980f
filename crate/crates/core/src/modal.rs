//! Two-layer collocation eigenproblem for the depth-separated Helmholtz
//! equation `rho (psi' / rho)' + k^2 psi = kr^2 psi`.
//!
//! The unknown vector stacks the water nodes (surface to interface) followed
//! by the bottom nodes (interface to floor). Four rows of the block-diagonal
//! operator are replaced by boundary and interface conditions:
//!
//! | row            | condition                                      |
//! |----------------|------------------------------------------------|
//! | `0`            | `psi(0) = 0`                                   |
//! | `Nw`           | `psi(h-) - psi(h+) = 0`                        |
//! | `Nw + 1`       | `psi'(h-) / rho(h-) - psi'(h+) / rho(h+) = 0`  |
//! | `Nw + Nb + 1`  | `psi(H) = 0` or `psi'(H) = 0`                  |
//!
//! The matching columns are the four boundary unknowns, which are eliminated
//! by a Schur complement before the dense eigen solve.

use num_complex::Complex64;

use crate::cheb::{self, CglGrid, DiffMatrix};
use crate::eigen::HessenbergEigen;
use crate::env::{complex_wavenumber, eval_profile, BottomBc, EnvironmentSpec, Layer, Profile};
use crate::error::{Error, Result};
use crate::linalg::{norm_one, CMatrix, Lu};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Condition-number ceiling for the 4x4 boundary block.
pub const MAX_BOUNDARY_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct DiscretizedLayer {
    pub grid: CglGrid,
    pub diff: DiffMatrix,
    pub rho: Vec<f64>,
    /// Squared complex wavenumber at each node.
    pub k2: Vec<Complex64>,
    /// `C_rho D C_(1/rho) D + C_(k^2)`.
    pub operator: CMatrix,
}

impl DiscretizedLayer {
    pub fn dim(&self) -> usize {
        self.grid.len()
    }
}

pub fn discretize_layer(layer: &Layer, a: f64, b: f64, n: usize, omega: f64) -> Result<DiscretizedLayer> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "layer truncation order must be at least 4, got {n}"
        )));
    }
    let grid = cheb::cgl_points(n, a, b)?;
    let diff = cheb::diff_matrix(&grid);
    let dim = grid.len();

    let mut rho = Vec::with_capacity(dim);
    let mut k2 = Vec::with_capacity(dim);
    for &z in grid.points() {
        let r = eval_profile(&layer.rho, z)?;
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "density must be positive, got {r} at z = {z}"
            )));
        }
        let c = eval_profile(&layer.ssp, z)?;
        let alpha = eval_profile(&layer.alpha, z)?;
        let k = complex_wavenumber(c, alpha, omega)?;
        rho.push(r);
        k2.push(k * k);
    }

    // second[i][j] = rho_i * sum_l D_il / rho_l * D_lj
    let mut second = vec![0.0; dim * dim];
    for i in 0..dim {
        let out = &mut second[i * dim..(i + 1) * dim];
        for l in 0..dim {
            let f = diff.get(i, l) / rho[l];
            if f == 0.0 {
                continue;
            }
            for (o, d) in out.iter_mut().zip(diff.row(l)) {
                *o += f * d;
            }
        }
        out.iter_mut().for_each(|o| *o *= rho[i]);
    }
    let mut operator = CMatrix::from_real(dim, dim, &second);
    for (i, &k) in k2.iter().enumerate() {
        operator[(i, i)] += k;
    }

    Ok(DiscretizedLayer {
        grid,
        diff,
        rho,
        k2,
        operator,
    })
}

/// Block-diagonal layer operators with the four constraint rows in place.
#[derive(Debug, Clone)]
pub struct ConstrainedSystem {
    pub matrix: CMatrix,
    /// Rows replaced by constraints, which are also the indices of the
    /// boundary unknowns: surface, water side of the interface, bottom side
    /// of the interface, floor.
    pub constraint_rows: [usize; 4],
}

impl ConstrainedSystem {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Right-hand-side mask: `0` at constrained positions, `1` elsewhere.
    pub fn rhs_mask(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| if self.constraint_rows.contains(&i) { 0.0 } else { 1.0 })
            .collect()
    }
}

pub fn apply_constraints(w: &DiscretizedLayer, b: &DiscretizedLayer, bc: BottomBc) -> ConstrainedSystem {
    let nw = w.dim();
    let nb = b.dim();
    let dim = nw + nb;
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..nw {
        m.row_mut(i)[..nw].copy_from_slice(w.operator.row(i));
    }
    for i in 0..nb {
        m.row_mut(nw + i)[nw..].copy_from_slice(b.operator.row(i));
    }

    let surface = 0;
    let cont = nw - 1;
    let flux = nw;
    let floor = dim - 1;

    let row = m.row_mut(surface);
    row.fill(ZERO);
    row[0] = ONE;

    let row = m.row_mut(cont);
    row.fill(ZERO);
    row[nw - 1] = ONE;
    row[nw] = -ONE;

    let gamma_w = 1.0 / w.rho[nw - 1];
    let gamma_b = 1.0 / b.rho[0];
    let row = m.row_mut(flux);
    row.fill(ZERO);
    for (dst, &d) in row[..nw].iter_mut().zip(w.diff.row(nw - 1)) {
        *dst = Complex64::new(gamma_w * d, 0.0);
    }
    for (dst, &d) in row[nw..].iter_mut().zip(b.diff.row(0)) {
        *dst = Complex64::new(-gamma_b * d, 0.0);
    }

    let row = m.row_mut(floor);
    row.fill(ZERO);
    match bc {
        BottomBc::Free => row[dim - 1] = ONE,
        BottomBc::Rigid => {
            for (dst, &d) in row[nw..].iter_mut().zip(b.diff.row(nb - 1)) {
                *dst = Complex64::new(d, 0.0);
            }
        }
    }

    ConstrainedSystem {
        matrix: m,
        constraint_rows: [surface, cont, flux, floor],
    }
}

/// Data needed to rebuild the four boundary values from interior values.
#[derive(Debug, Clone)]
pub struct RecoveryPair {
    pub l21: CMatrix,
    pub l22: CMatrix,
    l22_lu: Lu,
    pub interior: Vec<usize>,
    pub boundary: [usize; 4],
    pub condition: f64,
}

#[derive(Debug, Clone)]
pub struct SchurReduction {
    /// `L11 - L12 L22^-1 L21`, of order `Nw + Nb - 2`.
    pub reduced: CMatrix,
    pub recovery: RecoveryPair,
}

pub fn schur_reduce(sys: &ConstrainedSystem) -> Result<SchurReduction> {
    let dim = sys.dim();
    let boundary = sys.constraint_rows;
    let interior: Vec<usize> = (0..dim).filter(|i| !boundary.contains(i)).collect();
    let n1 = interior.len();
    let m = &sys.matrix;

    let l22 = CMatrix::from_fn(4, 4, |i, j| m[(boundary[i], boundary[j])]);
    let l21 = CMatrix::from_fn(4, n1, |i, j| m[(boundary[i], interior[j])]);
    let lu = Lu::factor(&l22).ok_or(Error::DegenerateConstraints {
        cond: f64::INFINITY,
        limit: MAX_BOUNDARY_CONDITION,
    })?;
    let condition = norm_one(&l22) * norm_one(&lu.inverse());
    if !(condition <= MAX_BOUNDARY_CONDITION) {
        return Err(Error::DegenerateConstraints {
            cond: condition,
            limit: MAX_BOUNDARY_CONDITION,
        });
    }

    // X = L22^-1 L21, column by column.
    let mut x = CMatrix::zeros(4, n1);
    for j in 0..n1 {
        let col = lu.solve(&l21.column(j));
        x.set_column(j, &col);
    }

    let mut reduced = CMatrix::zeros(n1, n1);
    for (ri, &i) in interior.iter().enumerate() {
        let src = m.row(i);
        let l12: [Complex64; 4] = [src[boundary[0]], src[boundary[1]], src[boundary[2]], src[boundary[3]]];
        let out = reduced.row_mut(ri);
        for (o, &j) in out.iter_mut().zip(&interior) {
            *o = src[j];
        }
        for (k, &l) in l12.iter().enumerate() {
            if l == ZERO {
                continue;
            }
            for (o, &xv) in out.iter_mut().zip(x.row(k)) {
                *o -= l * xv;
            }
        }
    }

    Ok(SchurReduction {
        reduced,
        recovery: RecoveryPair {
            l21,
            l22,
            l22_lu: lu,
            interior,
            boundary,
            condition,
        },
    })
}

/// Boundary values `-L22^-1 L21 psi1`, ordered as
/// `[psi_w(0), psi_w(h), psi_b(h), psi_b(H)]`.
pub fn recover_boundary(psi1: &[Complex64], rec: &RecoveryPair) -> Result<[Complex64; 4]> {
    if psi1.len() != rec.interior.len() {
        return Err(Error::InvalidArgument(format!(
            "interior vector has length {}, expected {}",
            psi1.len(),
            rec.interior.len()
        )));
    }
    let rhs: Vec<Complex64> = rec.l21.matvec(psi1).into_iter().map(|v| -v).collect();
    let psi2 = rec.l22_lu.solve(&rhs);
    Ok([psi2[0], psi2[1], psi2[2], psi2[3]])
}

/// Reassembles the full node vector from interior and boundary values.
pub fn assemble_full(psi1: &[Complex64], psi2: &[Complex64; 4], rec: &RecoveryPair) -> Vec<Complex64> {
    let mut full = vec![ZERO; psi1.len() + 4];
    for (&i, &v) in rec.interior.iter().zip(psi1) {
        full[i] = v;
    }
    for (&i, &v) in rec.boundary.iter().zip(psi2) {
        full[i] = v;
    }
    full
}

/// A kept eigenvalue: its index in the raw list and its horizontal wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeptMode {
    pub index: usize,
    pub kr: Complex64,
}

/// Horizontal wavenumber from an eigenvalue `kr^2`: principal root, with the
/// imaginary part made non-negative so that modes decay in range.
pub fn wavenumber_from_eigenvalue(lambda: Complex64) -> Complex64 {
    let kr = lambda.sqrt();
    if kr.im < 0.0 {
        kr.conj()
    } else {
        kr
    }
}

pub fn filter_modes(eigenvalues: &[Complex64], omega: f64, cp_max_mps: f64) -> Result<Vec<KeptMode>> {
    let mut kept: Vec<KeptMode> = eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, l)| l.re > 0.0)
        .map(|(index, &l)| KeptMode {
            index,
            kr: wavenumber_from_eigenvalue(l),
        })
        .filter(|m| omega / m.kr.re <= cp_max_mps)
        .collect();
    if kept.is_empty() {
        return Err(Error::NoPropagatingModes { cp_max_mps });
    }
    kept.sort_by(|a, b| b.kr.re.total_cmp(&a.kr.re).then(a.index.cmp(&b.index)));
    Ok(kept)
}

#[derive(Debug, Clone)]
pub struct ModeSet {
    pub freq_hz: f64,
    /// Sorted by descending real part.
    pub wavenumbers: Vec<Complex64>,
    /// `(Nw + 1) x M`, column `m` is mode `m` on the water grid.
    pub modes_water: CMatrix,
    /// `(Nb + 1) x M`.
    pub modes_bottom: CMatrix,
    pub water_grid: CglGrid,
    pub bottom_grid: CglGrid,
    pub rho_water: Vec<f64>,
    pub rho_bottom: Vec<f64>,
    pub water_density: Profile,
    pub bottom_density: Profile,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.wavenumbers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavenumbers.is_empty()
    }

    pub fn interface_depth(&self) -> f64 {
        self.water_grid.b()
    }

    pub fn total_depth(&self) -> f64 {
        self.bottom_grid.b()
    }

    /// Density at depth `z`; the water value is used at the interface.
    pub fn density_at(&self, z: f64) -> Result<f64> {
        if z <= self.interface_depth() {
            eval_profile(&self.water_density, z)
        } else {
            eval_profile(&self.bottom_density, z)
        }
    }

    /// Two-layer Clenshaw–Curtis quadrature of `psi_m^2 / rho`.
    pub fn norm_integral(&self, m: usize) -> Complex64 {
        layer_integral(&self.water_grid, &self.rho_water, &self.modes_water.column(m))
            + layer_integral(&self.bottom_grid, &self.rho_bottom, &self.modes_bottom.column(m))
    }

    /// A copy keeping only the listed modes, in the given order.
    pub fn subset(&self, modes: &[usize]) -> ModeSet {
        let pick = |src: &CMatrix| CMatrix::from_fn(src.rows(), modes.len(), |i, j| src[(i, modes[j])]);
        ModeSet {
            wavenumbers: modes.iter().map(|&m| self.wavenumbers[m]).collect(),
            modes_water: pick(&self.modes_water),
            modes_bottom: pick(&self.modes_bottom),
            ..self.clone()
        }
    }

    /// Nodes of both grids, with the shared interface node listed once.
    pub fn union_depths(&self) -> Vec<f64> {
        self.water_grid
            .points()
            .iter()
            .chain(&self.bottom_grid.points()[1..])
            .copied()
            .collect()
    }
}

fn layer_integral(grid: &CglGrid, rho: &[f64], psi: &[Complex64]) -> Complex64 {
    cheb::quad_weights(grid)
        .iter()
        .zip(rho)
        .zip(psi)
        .map(|((w, r), p)| p * p * (w / r))
        .sum()
}

/// Applies `sign` in place: the entry of largest magnitude gets a positive
/// real part. Only `+1` and `-1` keep `int psi^2 / rho = 1` intact.
fn fix_sign(water: &mut [Complex64], bottom: &mut [Complex64]) {
    let pivot = water
        .iter()
        .chain(bottom.iter())
        .copied()
        .fold(ZERO, |best, z| if z.norm() > best.norm() { z } else { best });
    let flip = pivot.re < 0.0 || (pivot.re == 0.0 && pivot.im < 0.0);
    if flip {
        water.iter_mut().chain(bottom.iter_mut()).for_each(|z| *z = -*z);
    }
}

pub fn normalize_modes(ms: &mut ModeSet) -> Result<()> {
    for m in 0..ms.len() {
        let integral = ms.norm_integral(m);
        if integral.norm() < 1e-14 {
            return Err(Error::DegenerateMode {
                index: m,
                magnitude: integral.norm(),
            });
        }
        let inv = ONE / integral.sqrt();
        let mut water: Vec<Complex64> = ms.modes_water.column(m).iter().map(|z| z * inv).collect();
        let mut bottom: Vec<Complex64> = ms.modes_bottom.column(m).iter().map(|z| z * inv).collect();
        fix_sign(&mut water, &mut bottom);
        ms.modes_water.set_column(m, &water);
        ms.modes_bottom.set_column(m, &bottom);
    }
    Ok(())
}

/// Everything assembled for one environment, up to the reduced eigenproblem.
#[derive(Debug, Clone)]
pub struct ModalSystem {
    pub water: DiscretizedLayer,
    pub bottom: DiscretizedLayer,
    pub constrained: ConstrainedSystem,
    pub reduction: SchurReduction,
}

impl ModalSystem {
    pub fn assemble(env: &EnvironmentSpec) -> Result<Self> {
        env.validate()?;
        let omega = env.omega();
        let water = discretize_layer(&env.water, 0.0, env.h_m, env.n_water, omega)?;
        let bottom = discretize_layer(&env.bottom, env.h_m, env.big_h_m, env.n_bottom, omega)?;
        let constrained = apply_constraints(&water, &bottom, env.bottom_bc);
        let reduction = schur_reduce(&constrained)?;
        Ok(Self {
            water,
            bottom,
            constrained,
            reduction,
        })
    }

    /// Splits a full node vector into its water and bottom parts.
    pub fn split<'a>(&self, full: &'a [Complex64]) -> (&'a [Complex64], &'a [Complex64]) {
        full.split_at(self.water.dim())
    }

    /// `max |(L psi_m - kr_m^2 psi_m)_i|` over interior nodes of both layers,
    /// relative to the larger layer operator's infinity norm.
    pub fn residual(&self, ms: &ModeSet, m: usize) -> f64 {
        let k2 = ms.wavenumbers[m] * ms.wavenumbers[m];
        let mut worst: f64 = 0.0;
        for (layer, modes) in [(&self.water, &ms.modes_water), (&self.bottom, &ms.modes_bottom)] {
            let psi = modes.column(m);
            let lpsi = layer.operator.matvec(&psi);
            for i in 1..psi.len() - 1 {
                worst = worst.max((lpsi[i] - k2 * psi[i]).norm());
            }
        }
        worst / self.water.operator.norm_inf().max(self.bottom.operator.norm_inf())
    }

    pub fn solve(&self, env: &EnvironmentSpec) -> Result<ModeSet> {
        let omega = env.omega();
        let rec = &self.reduction.recovery;
        let eig = HessenbergEigen::new(&self.reduction.reduced)?;
        let values = eig.eigenvalues()?;
        let kept = filter_modes(&values, omega, env.cp_max_mps)?;

        let nw = self.water.dim();
        let nb = self.bottom.dim();
        let mut modes_water = CMatrix::zeros(nw, kept.len());
        let mut modes_bottom = CMatrix::zeros(nb, kept.len());
        for (m, mode) in kept.iter().enumerate() {
            let psi1 = eig.eigenvector(values[mode.index]);
            let psi2 = recover_boundary(&psi1, rec)?;
            let full = assemble_full(&psi1, &psi2, rec);
            let (w, b) = self.split(&full);
            modes_water.set_column(m, w);
            modes_bottom.set_column(m, b);
        }

        let mut ms = ModeSet {
            freq_hz: env.freq_hz,
            wavenumbers: kept.iter().map(|m| m.kr).collect(),
            modes_water,
            modes_bottom,
            water_grid: self.water.grid.clone(),
            bottom_grid: self.bottom.grid.clone(),
            rho_water: self.water.rho.clone(),
            rho_bottom: self.bottom.rho.clone(),
            water_density: env.water.rho.clone(),
            bottom_density: env.bottom.rho.clone(),
        };
        normalize_modes(&mut ms)?;
        Ok(ms)
    }
}

pub fn solve_modes(env: &EnvironmentSpec) -> Result<ModeSet> {
    ModalSystem::assemble(env)?.solve(env)
}
