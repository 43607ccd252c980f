//! Reference solutions for a single isovelocity layer: closed-form
//! wavenumbers and a second-order finite-difference solver.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::eigen::eig_dense;
use crate::env::{BottomBc, EnvironmentSpec, Profile};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticIsoSpec {
    pub depth_h: f64,
    pub speed: f64,
    pub bc: BottomBc,
    pub freq_hz: f64,
}

impl AnalyticIsoSpec {
    pub fn new(depth_h: f64, speed: f64, bc: BottomBc, freq_hz: f64) -> Result<Self> {
        for (name, v) in [("depth", depth_h), ("speed", speed), ("frequency", freq_hz)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            depth_h,
            speed,
            bc,
            freq_hz,
        })
    }

    /// The equivalent single-layer problem when both layers share one
    /// constant sound speed and density and neither attenuates.
    pub fn from_env(env: &EnvironmentSpec) -> Option<Self> {
        let constant = |p: &Profile| match p {
            Profile::Constant(v) => Some(*v),
            _ => None,
        };
        let (w, b) = (&env.water, &env.bottom);
        let c = constant(&w.ssp)?;
        let same = constant(&b.ssp)? == c
            && constant(&w.rho)? == constant(&b.rho)?
            && constant(&w.alpha)? == 0.0
            && constant(&b.alpha)? == 0.0;
        if !same {
            return None;
        }
        Self::new(env.big_h_m, c, env.bottom_bc, env.freq_hz).ok()
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI * self.freq_hz / self.speed
    }

    /// Vertical wavenumber of mode `m` (1-based).
    pub fn kz(&self, m: usize) -> f64 {
        match self.bc {
            BottomBc::Free => m as f64 * PI / self.depth_h,
            BottomBc::Rigid => (2 * m - 1) as f64 * PI / (2.0 * self.depth_h),
        }
    }

    /// Number of modes with real horizontal wavenumber.
    pub fn propagating_count(&self) -> usize {
        (1..).take_while(|&m| self.kz(m) < self.k0()).count()
    }
}

/// `kr_m = sqrt(k0^2 - kz_m^2)` for `m = 1..=m_max`; imaginary past cutoff.
pub fn analytic_iso_wavenumbers(spec: &AnalyticIsoSpec, m_max: usize) -> Vec<Complex64> {
    let k0 = spec.k0();
    (1..=m_max)
        .map(|m| {
            let kz = spec.kz(m);
            Complex64::new((k0 - kz) * (k0 + kz), 0.0).sqrt()
        })
        .collect()
}

/// Eigen-wavenumbers of the three-point Laplacian on `n_points` intervals.
/// The rigid bottom uses a mirrored ghost node.
pub fn fdm_iso_modes(spec: &AnalyticIsoSpec, n_points: usize) -> Result<Vec<Complex64>> {
    if n_points < 10 {
        return Err(Error::InvalidArgument(format!(
            "finite-difference solver needs at least 10 points, got {n_points}"
        )));
    }
    let dz = spec.depth_h / n_points as f64;
    let inv = 1.0 / (dz * dz);
    let k2 = spec.k0() * spec.k0();
    // Unknowns z_1 .. z_{n-1} (free) or z_1 .. z_n (rigid).
    let dim = match spec.bc {
        BottomBc::Free => n_points - 1,
        BottomBc::Rigid => n_points,
    };
    let mut a = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        a[(i, i)] = Complex64::new(k2 - 2.0 * inv, 0.0);
        if i > 0 {
            a[(i, i - 1)] = Complex64::new(inv, 0.0);
        }
        if i + 1 < dim {
            a[(i, i + 1)] = Complex64::new(inv, 0.0);
        }
    }
    if spec.bc == BottomBc::Rigid {
        a[(dim - 1, dim - 2)] = Complex64::new(2.0 * inv, 0.0);
    }
    let mut kr: Vec<Complex64> = eig_dense(&a)?
        .values
        .into_iter()
        .map(|l| Complex64::new(l.re, 0.0).sqrt())
        .collect();
    kr.sort_by(|x, y| y.re.total_cmp(&x.re).then(x.im.total_cmp(&y.im)));
    Ok(kr)
}

/// `max_m |computed_m - reference_m|` over the reference modes; infinite if
/// `computed` has fewer entries.
pub fn max_wavenumber_error(computed: &[Complex64], reference: &[Complex64]) -> f64 {
    if computed.len() < reference.len() {
        return f64::INFINITY;
    }
    reference
        .iter()
        .zip(computed)
        .map(|(r, c)| (r - c).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1(freq: f64, bc: BottomBc) -> AnalyticIsoSpec {
        AnalyticIsoSpec::new(100.0, 1500.0, bc, freq).unwrap()
    }

    fn propagating(spec: &AnalyticIsoSpec) -> Vec<Complex64> {
        analytic_iso_wavenumbers(spec, spec.propagating_count())
    }

    #[test]
    fn closed_form_table_values() {
        let free = propagating(&ex1(50.0, BottomBc::Free));
        let table2 = [0.2070699109, 0.1997925591, 0.1870354632, 0.1675516082, 0.1385312147, 0.0912925660];
        assert_eq!(free.len(), 6);
        for (k, e) in free.iter().zip(table2) {
            assert!((k.re - e).abs() < 6e-11 && k.im == 0.0);
        }
        let rigid = propagating(&ex1(20.0, BottomBc::Rigid));
        let table3 = [0.0822900069, 0.0692656074, 0.0291527460];
        assert_eq!(rigid.len(), 3);
        for (k, e) in rigid.iter().zip(table3) {
            assert!((k.re - e).abs() < 6e-11);
        }
    }

    #[test]
    fn evanescent_and_branch_point() {
        let spec = ex1(20.0, BottomBc::Free);
        let kr = analytic_iso_wavenumbers(&spec, 4);
        assert!(kr[3].re == 0.0 && kr[3].im > 0.0);
        // k0 = pi / 100 exactly at 7.5 Hz.
        let edge = analytic_iso_wavenumbers(&ex1(7.5, BottomBc::Free), 1)[0];
        assert!(edge.norm() < 1e-8, "{edge}");
    }

    #[test]
    fn iso_env_detection() {
        use crate::env::Layer;
        let mut env = EnvironmentSpec {
            freq_hz: 50.0,
            source_depth_m: 36.0,
            h_m: 50.0,
            big_h_m: 100.0,
            water: Layer::uniform(1500.0, 1.0, 0.0),
            bottom: Layer::uniform(1500.0, 1.0, 0.0),
            bottom_bc: BottomBc::Rigid,
            n_water: 10,
            n_bottom: 10,
            cp_max_mps: f64::INFINITY,
            ranges_m: None,
            depths_m: None,
        };
        assert_eq!(AnalyticIsoSpec::from_env(&env), Some(ex1(50.0, BottomBc::Rigid)));
        env.bottom = Layer::uniform(1500.0, 1.0, 0.5);
        assert_eq!(AnalyticIsoSpec::from_env(&env), None);
        env.bottom = Layer::uniform(1600.0, 1.0, 0.0);
        assert_eq!(AnalyticIsoSpec::from_env(&env), None);
    }

    #[test]
    fn bad_spec_rejected() {
        assert!(AnalyticIsoSpec::new(0.0, 1500.0, BottomBc::Free, 50.0).is_err());
        assert!(AnalyticIsoSpec::new(100.0, -1.0, BottomBc::Free, 50.0).is_err());
        assert!(fdm_iso_modes(&ex1(50.0, BottomBc::Free), 9).is_err());
    }

    #[test]
    fn fdm_is_second_order() {
        for bc in [BottomBc::Free, BottomBc::Rigid] {
            let spec = ex1(50.0, bc);
            let exact = propagating(&spec);
            let first = |n| (fdm_iso_modes(&spec, n).unwrap()[0] - exact[0]).norm();
            let all = |n| max_wavenumber_error(&fdm_iso_modes(&spec, n).unwrap(), &exact);
            for n in [50, 100] {
                let metrics: [&dyn Fn(usize) -> f64; 2] = [&first, &all];
                for err in metrics {
                    let ratio = err(2 * n) / err(n);
                    assert!((0.2..=0.3).contains(&ratio), "{bc:?} n={n}: {ratio}");
                }
            }
        }
    }

    #[test]
    fn fdm_first_mode_accuracy_at_hundred_points() {
        let spec = ex1(50.0, BottomBc::Free);
        let exact = propagating(&spec);
        let kr = fdm_iso_modes(&spec, 100).unwrap();
        let e1 = (kr[0] - exact[0]).norm();
        assert!(e1 > 1e-8 && e1 < 1e-6, "{e1:e}");
        assert!(max_wavenumber_error(&kr, &exact) > 1e-5);
    }

    #[test]
    fn fdm_under_resolved() {
        let spec = ex1(50.0, BottomBc::Free);
        let exact = propagating(&spec);
        let kr = fdm_iso_modes(&spec, 10).unwrap();
        assert!((kr[5] - exact[5]).norm() > 1e-2);
    }

    #[test]
    fn spectral_beats_fdm_at_equal_unknowns() {
        let env = crate::modal::tests::iso_env(50.0, BottomBc::Free, 20, 20);
        let spec = AnalyticIsoSpec::from_env(&env).unwrap();
        let exact = propagating(&spec);
        let spectral = crate::modal::solve_modes(&env).unwrap().wavenumbers;
        let fdm = fdm_iso_modes(&spec, 40).unwrap();
        assert!(max_wavenumber_error(&spectral, &exact) < 1e-9);
        assert!(max_wavenumber_error(&fdm, &exact) > 1e-5);
    }

    #[test]
    fn error_metric() {
        let a = [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.5)];
        let b = [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)];
        assert_eq!(max_wavenumber_error(&a, &b), 0.5);
        assert_eq!(max_wavenumber_error(&a[..1], &b), f64::INFINITY);
    }
}
