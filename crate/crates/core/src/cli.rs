//! Command-line front end: `modes`, `field` and `converge`.
//!
//! Every number is written in scientific notation with 12 significant digits
//! and a lowercase exponent, so repeated runs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::baselines::{analytic_iso_wavenumbers, fdm_iso_modes, max_wavenumber_error, AnalyticIsoSpec};
use crate::env::{parse_env_file, EnvironmentSpec, Lattice};
use crate::error::{Error, Result};
use crate::field::{pressure_field, transmission_loss, TlGrid};
use crate::modal::{solve_modes, ModeSet};

#[derive(Debug, Parser)]
#[command(name = "chebmodes", version, about = "Chebyshev collocation normal-mode solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Horizontal wavenumbers and mode shapes.
    Modes(ModesArgs),
    /// Transmission loss on the receiver lattice of the environment file.
    Field(FieldArgs),
    /// Wavenumber error against truncation order.
    Converge(ConvergeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct EnvArgs {
    /// Environment file.
    pub env: PathBuf,
    /// Override the source frequency (Hz).
    #[arg(long)]
    pub freq: Option<f64>,
    /// Override the phase-speed cutoff (m/s); `inf` disables it.
    #[arg(long)]
    pub cpmax: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct OrderArgs {
    /// Override the water-layer truncation order.
    #[arg(long)]
    pub nw: Option<usize>,
    /// Override the bottom-layer truncation order.
    #[arg(long)]
    pub nb: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ModesArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    #[command(flatten)]
    pub order: OrderArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    #[command(flatten)]
    pub order: OrderArgs,
    /// Also write a grayscale PGM image.
    #[arg(long)]
    pub image: bool,
    /// TL range mapped from black to white, `lo:hi` in dB.
    #[arg(long, default_value = "40:100")]
    pub db_window: DbWindow,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    /// Total truncation orders `start:step:stop`; each is split evenly
    /// between the layers and also used as the finite-difference point count.
    #[arg(long, default_value = "10:10:50")]
    pub sweep: Lattice,
    /// Measure errors against the largest order instead of the analytic
    /// isovelocity solution.
    #[arg(long = "self")]
    pub self_ref: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbWindow {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for DbWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("expected a dB window lo:hi, got `{s}`"));
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(bad());
        }
        Ok(DbWindow { lo, hi })
    }
}

/// Fixed-width scientific format used for every real number in the outputs.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.11e}")
    }
}

pub fn load_env(args: &EnvArgs, order: Option<&OrderArgs>) -> Result<EnvironmentSpec> {
    let text = fs::read_to_string(&args.env)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", args.env.display())))?;
    let mut env = parse_env_file(&text)?;
    if let Some(f) = args.freq {
        env.freq_hz = f;
    }
    if let Some(c) = args.cpmax {
        env.cp_max_mps = c;
    }
    if let Some(o) = order {
        if let Some(n) = o.nw {
            env.n_water = n;
        }
        if let Some(n) = o.nb {
            env.n_bottom = n;
        }
    }
    env.validate()?;
    Ok(env)
}

pub fn format_modes_csv(ms: &ModeSet) -> String {
    let omega = 2.0 * std::f64::consts::PI * ms.freq_hz;
    let mut out = String::from("m,re_kr,im_kr,phase_speed_mps\n");
    for (m, kr) in ms.wavenumbers.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            m + 1,
            fmt_num(kr.re),
            fmt_num(kr.im),
            fmt_num(omega / kr.re)
        ));
    }
    out
}

/// Mode shapes on the union of both grids, interface listed once.
pub fn format_shapes_csv(ms: &ModeSet) -> String {
    let mut out = String::from("z_m");
    for m in 1..=ms.len() {
        out.push_str(&format!(",psi_re_{m},psi_im_{m}"));
    }
    out.push('\n');
    let water = (0..ms.modes_water.rows()).map(|i| (ms.water_grid.points()[i], ms.modes_water.row(i)));
    let bottom = (1..ms.modes_bottom.rows()).map(|i| (ms.bottom_grid.points()[i], ms.modes_bottom.row(i)));
    for (z, row) in water.chain(bottom) {
        out.push_str(&fmt_num(z));
        for v in row {
            out.push(',');
            out.push_str(&fmt_num(v.re));
            out.push(',');
            out.push_str(&fmt_num(v.im));
        }
        out.push('\n');
    }
    out
}

/// Header row of ranges, first column of depths; vanishing pressure is `inf`.
pub fn format_tl_csv(grid: &TlGrid) -> String {
    let mut out = String::from("depth_m\\range_m");
    for &r in &grid.ranges_m {
        out.push(',');
        out.push_str(&fmt_num(r));
    }
    out.push('\n');
    for (i, &z) in grid.depths_m.iter().enumerate() {
        out.push_str(&fmt_num(z));
        for j in 0..grid.ranges_m.len() {
            out.push(',');
            out.push_str(&fmt_num(grid.tl(i, j)));
        }
        out.push('\n');
    }
    out
}

/// Binary PGM, one row per depth. `lo` maps to black, `hi` and `inf` to white.
pub fn render_pgm(grid: &TlGrid, window: DbWindow) -> Vec<u8> {
    let (w, h) = (grid.ranges_m.len(), grid.depths_m.len());
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(grid.tl_db.iter().map(|&tl| {
        if tl == f64::INFINITY {
            255
        } else {
            let t = ((tl - window.lo) / (window.hi - window.lo)).clamp(0.0, 1.0);
            (255.0 * t).round() as u8
        }
    }));
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergeRow {
    pub n: usize,
    pub spectral: f64,
    /// `NaN` when no finite-difference comparison is available.
    pub fdm: f64,
}

pub fn format_converge_csv(rows: &[ConvergeRow]) -> String {
    let mut out = String::from("N,max_abs_err_spectral,max_abs_err_fdm\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.n, fmt_num(r.spectral), fmt_num(r.fdm)));
    }
    out
}

pub fn sweep_orders(sweep: &Lattice) -> Result<Vec<usize>> {
    sweep
        .values()
        .into_iter()
        .map(|v| {
            if v.fract() != 0.0 || v < 8.0 {
                Err(Error::Usage(format!("sweep orders must be integers >= 8, got {v}")))
            } else {
                Ok(v as usize)
            }
        })
        .collect()
}

fn split_order(env: &EnvironmentSpec, n: usize) -> EnvironmentSpec {
    EnvironmentSpec {
        n_water: n / 2,
        n_bottom: n - n / 2,
        ..env.clone()
    }
}

fn overlap_error(computed: &[Complex64], reference: &[Complex64]) -> f64 {
    let k = computed.len().min(reference.len());
    max_wavenumber_error(&computed[..k], &reference[..k])
}

/// Maximum wavenumber error per total order. Against the analytic solution
/// for isovelocity environments, otherwise (with `self_ref`) against the
/// largest order of the sweep.
pub fn converge_rows(env: &EnvironmentSpec, orders: &[usize], self_ref: bool) -> Result<Vec<ConvergeRow>> {
    let analytic = AnalyticIsoSpec::from_env(env);
    if analytic.is_none() && !self_ref {
        return Err(Error::Usage(
            "converge needs a single-layer isovelocity environment; pass --self to compare against the largest order"
                .into(),
        ));
    }
    let largest = *orders
        .iter()
        .max()
        .ok_or_else(|| Error::Usage("empty sweep".into()))?;

    let fdm = |n: usize| -> Result<Option<Vec<Complex64>>> {
        match analytic {
            Some(spec) if n >= 10 => Ok(Some(fdm_iso_modes(&spec, n)?)),
            _ => Ok(None),
        }
    };

    let (spectral_ref, fdm_ref) = if self_ref {
        let count = analytic.map(|s| s.propagating_count());
        let fdm_ref = fdm(largest)?.zip(count).map(|(v, c)| v[..c.min(v.len())].to_vec());
        (solve_modes(&split_order(env, largest))?.wavenumbers, fdm_ref)
    } else {
        let spec = analytic.expect("checked above");
        let exact = analytic_iso_wavenumbers(&spec, spec.propagating_count());
        (exact.clone(), Some(exact))
    };

    orders
        .iter()
        .map(|&n| {
            let spectral = solve_modes(&split_order(env, n))?.wavenumbers;
            let spectral = if self_ref {
                overlap_error(&spectral, &spectral_ref)
            } else {
                max_wavenumber_error(&spectral, &spectral_ref)
            };
            let fdm = match (fdm(n)?, &fdm_ref) {
                (Some(v), Some(r)) => max_wavenumber_error(&v, r),
                _ => f64::NAN,
            };
            Ok(ConvergeRow { n, spectral, fdm })
        })
        .collect()
}

fn write(dir: &Path, name: &str, bytes: &[u8], written: &mut Vec<PathBuf>) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
    written.push(path);
    Ok(())
}

/// Runs one subcommand and returns the files it wrote.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    match &cli.command {
        Command::Modes(a) => {
            let env = load_env(&a.env, Some(&a.order))?;
            let ms = solve_modes(&env)?;
            write(&a.env.out, "modes.csv", format_modes_csv(&ms).as_bytes(), &mut written)?;
            write(&a.env.out, "mode_shapes.csv", format_shapes_csv(&ms).as_bytes(), &mut written)?;
        }
        Command::Field(a) => {
            let env = load_env(&a.env, Some(&a.order))?;
            let (Some(r), Some(d)) = (&env.ranges_m, &env.depths_m) else {
                return Err(Error::Usage(
                    "field needs ranges_m and depths_m in the environment file".into(),
                ));
            };
            let (ranges, depths) = (r.values(), d.values());
            let ms = solve_modes(&env)?;
            let p = pressure_field(&ms, env.source_depth_m, &ranges, &depths)?;
            let grid = transmission_loss(&ranges, &depths, p)?;
            write(&a.env.out, "tl.csv", format_tl_csv(&grid).as_bytes(), &mut written)?;
            if a.image {
                write(&a.env.out, "tl.pgm", &render_pgm(&grid, a.db_window), &mut written)?;
            }
        }
        Command::Converge(a) => {
            let env = load_env(&a.env, None)?;
            let orders = sweep_orders(&a.sweep)?;
            let rows = converge_rows(&env, &orders, a.self_ref)?;
            write(&a.env.out, "converge.csv", format_converge_csv(&rows).as_bytes(), &mut written)?;
        }
    }
    Ok(written)
}
