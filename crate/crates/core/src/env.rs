//! Two-layer ocean environment: depth profiles, the complex wavenumber and
//! the `.env` text format.
//!
//! # File format
//!
//! ```text
//! # comments start with '#'
//! freq_hz = 50
//! source_depth_m = 36
//! interface_depth_m = 50
//! total_depth_m = 100
//! bottom_bc = free            # free | rigid
//! n_water = 20
//! n_bottom = 20
//! cp_max_mps = 1600           # optional, default inf
//! ranges_m = 100:10:3000      # optional, start:step:stop
//! depths_m = 0:1:100          # optional
//!
//! [water]
//! ssp = 1500                  # constant
//! rho = 1.0
//! alpha = 0.0                 # optional, default 0
//!
//! [bottom]
//! ssp = [[50, 1700], [100, 1750]]   # tabulated (depth, value) pairs
//! rho = exp_density                 # named profile
//! alpha = 1.5
//! ```
//!
//! Named profiles: `pseudolinear`, `munk`, `munk_canonical`, `linear_bottom`,
//! `exp_bottom_a`, `exp_bottom_b`, `exp_density`, `linear_atten`.

use std::collections::HashMap;
use std::f64::consts::{LOG10_E, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `(40 * pi * log10(e))^-1`, converting dB per wavelength to a loss tangent.
pub const ETA: f64 = 1.0 / (40.0 * PI * LOG10_E);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedProfile {
    /// `1 / sqrt(a z + b)` sound speed.
    Pseudolinear,
    /// Deep-water Munk sound speed with `eps = 0.0073`.
    Munk,
    /// Munk profile with the classical `eps = 0.00737`.
    MunkCanonical,
    /// `0.2 z + 1100` sediment sound speed.
    LinearBottom,
    /// `1500 + 30 exp((z - 10) / 100)`.
    ExpBottomA,
    /// `2000 - 100 exp(-(z - 400) / 1000)`.
    ExpBottomB,
    /// `exp(z / 3000)` density.
    ExpDensity,
    /// `0.005 z - 1` attenuation, dB per wavelength.
    LinearAtten,
}

impl NamedProfile {
    pub const ALL: [NamedProfile; 8] = [
        NamedProfile::Pseudolinear,
        NamedProfile::Munk,
        NamedProfile::MunkCanonical,
        NamedProfile::LinearBottom,
        NamedProfile::ExpBottomA,
        NamedProfile::ExpBottomB,
        NamedProfile::ExpDensity,
        NamedProfile::LinearAtten,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NamedProfile::Pseudolinear => "pseudolinear",
            NamedProfile::Munk => "munk",
            NamedProfile::MunkCanonical => "munk_canonical",
            NamedProfile::LinearBottom => "linear_bottom",
            NamedProfile::ExpBottomA => "exp_bottom_a",
            NamedProfile::ExpBottomB => "exp_bottom_b",
            NamedProfile::ExpDensity => "exp_density",
            NamedProfile::LinearAtten => "linear_atten",
        }
    }

    pub fn eval(self, z: f64) -> f64 {
        match self {
            NamedProfile::Pseudolinear => {
                const A: f64 = 5.94e-10;
                const B: f64 = 4.16e-7;
                1.0 / (A * z + B).sqrt()
            }
            NamedProfile::Munk => munk(z, 0.0073),
            NamedProfile::MunkCanonical => munk(z, 0.00737),
            NamedProfile::LinearBottom => 0.2 * z + 1100.0,
            NamedProfile::ExpBottomA => 1500.0 + 30.0 * ((z - 10.0) / 100.0).exp(),
            NamedProfile::ExpBottomB => 2000.0 - 100.0 * (-(z - 400.0) / 1000.0).exp(),
            NamedProfile::ExpDensity => (z / 3000.0).exp(),
            NamedProfile::LinearAtten => 0.005 * z - 1.0,
        }
    }
}

fn munk(z: f64, eps: f64) -> f64 {
    let zt = (z - 1300.0) / 650.0;
    1500.0 * (1.0 + eps * (zt - 1.0 + (-zt).exp()))
}

impl FromStr for NamedProfile {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        NamedProfile::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or(())
    }
}

/// A depth-dependent scalar property of one layer.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    Named(NamedProfile),
    /// `(depth, value)` pairs with strictly increasing depths, linearly
    /// interpolated.
    Tabulated(Vec<(f64, f64)>),
}

impl Profile {
    pub fn tabulated(table: Vec<(f64, f64)>) -> Result<Self> {
        if table.len() < 2 {
            return Err(Error::InvalidArgument(
                "a tabulated profile needs at least 2 points".into(),
            ));
        }
        if table.iter().any(|(z, v)| !z.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "tabulated profile entries must be finite".into(),
            ));
        }
        if table.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidArgument(
                "tabulated profile depths must be strictly increasing".into(),
            ));
        }
        Ok(Profile::Tabulated(table))
    }

    /// Depth range on which the profile may be evaluated.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Profile::Tabulated(t) => (t[0].0, t[t.len() - 1].0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn value_bounds(&self) -> Option<(f64, f64)> {
        match self {
            Profile::Constant(v) => Some((*v, *v)),
            Profile::Tabulated(t) => Some(
                t.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| {
                        (lo.min(v), hi.max(v))
                    }),
            ),
            Profile::Named(_) => None,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(v) => write!(f, "{v}"),
            Profile::Named(p) => f.write_str(p.name()),
            Profile::Tabulated(t) => {
                f.write_str("[")?;
                for (i, (z, v)) in t.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "[{z}, {v}]")?;
                }
                f.write_str("]")
            }
        }
    }
}

pub fn eval_profile(p: &Profile, z: f64) -> Result<f64> {
    match p {
        Profile::Constant(v) => Ok(*v),
        Profile::Named(n) => Ok(n.eval(z)),
        Profile::Tabulated(t) => {
            let (lo, hi) = p.domain();
            // Allow round-off from grid construction at the ends.
            let slack = 1e-9 * (hi - lo).abs().max(1.0);
            if !(z >= lo - slack && z <= hi + slack) {
                return Err(Error::OutOfDomain {
                    what: "profile depth",
                    value: z,
                    lo,
                    hi,
                });
            }
            let z = z.clamp(lo, hi);
            let k = t.partition_point(|&(d, _)| d <= z).clamp(1, t.len() - 1);
            let (z0, v0) = t[k - 1];
            let (z1, v1) = t[k];
            Ok(v0 + (v1 - v0) * (z - z0) / (z1 - z0))
        }
    }
}

/// `(1 + i eta alpha) omega / c`, with `alpha` in dB per wavelength.
pub fn complex_wavenumber(c: f64, alpha: f64, omega: f64) -> Result<Complex64> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sound speed must be positive, got {c}"
        )));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "angular frequency must be positive, got {omega}"
        )));
    }
    Ok(Complex64::new(1.0, ETA * alpha) * (omega / c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BottomBc {
    /// Pressure release, `p(H) = 0`.
    Free,
    /// `dp/dz(H) = 0`.
    Rigid,
}

impl BottomBc {
    pub fn name(self) -> &'static str {
        match self {
            BottomBc::Free => "free",
            BottomBc::Rigid => "rigid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub ssp: Profile,
    pub rho: Profile,
    pub alpha: Profile,
}

impl Layer {
    pub fn uniform(c: f64, rho: f64, alpha: f64) -> Self {
        Self {
            ssp: Profile::Constant(c),
            rho: Profile::Constant(rho),
            alpha: Profile::Constant(alpha),
        }
    }
}

/// `start:step:stop` receiver lattice, stop inclusive when it falls on the
/// lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl Lattice {
    pub fn new(start: f64, step: f64, stop: f64) -> Result<Self> {
        if !(start.is_finite() && step.is_finite() && stop.is_finite()) {
            return Err(Error::InvalidArgument("lattice bounds must be finite".into()));
        }
        if !(step > 0.0) || stop < start {
            return Err(Error::InvalidArgument(format!(
                "lattice {start}:{step}:{stop} needs step > 0 and stop >= start"
            )));
        }
        Ok(Self { start, step, stop })
    }

    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| (self.start + i as f64 * self.step).min(self.stop))
            .collect()
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.step, self.stop)
    }
}

impl FromStr for Lattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "expected start:step:stop, got `{s}`"
            )));
        }
        let num = |p: &str| {
            p.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("`{p}` is not a number")))
        };
        Lattice::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSpec {
    pub freq_hz: f64,
    pub source_depth_m: f64,
    /// Water/sediment interface depth `h`.
    pub h_m: f64,
    /// Total depth `H`.
    pub big_h_m: f64,
    pub water: Layer,
    pub bottom: Layer,
    pub bottom_bc: BottomBc,
    pub n_water: usize,
    pub n_bottom: usize,
    /// Phase-speed cutoff for mode selection; `inf` keeps every mode with
    /// `Re(kr^2) > 0`.
    pub cp_max_mps: f64,
    pub ranges_m: Option<Lattice>,
    pub depths_m: Option<Lattice>,
}

impl EnvironmentSpec {
    pub fn omega(&self) -> f64 {
        2.0 * PI * self.freq_hz
    }

    /// Checks every invariant that does not depend on file positions.
    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|(_, e)| e)
    }

    /// On failure returns the offending `(section, key)` alongside the error;
    /// the section is empty for top-level keys.
    fn check(&self) -> std::result::Result<(), ((&'static str, &'static str), Error)> {
        let bad = |key, msg: String| Err((("", key), Error::InvalidArgument(msg)));
        if !(self.freq_hz > 0.0 && self.freq_hz.is_finite()) {
            return bad("freq_hz", format!("frequency must be positive, got {}", self.freq_hz));
        }
        if !(self.big_h_m > 0.0 && self.big_h_m.is_finite()) {
            return bad("total_depth_m", "total depth must be positive".into());
        }
        if !(self.h_m > 0.0) {
            return bad("interface_depth_m", "interface depth must be positive".into());
        }
        if !(self.h_m < self.big_h_m) {
            return bad(
                "interface_depth_m",
                "interface depth must be strictly less than total depth".into(),
            );
        }
        if !(self.source_depth_m >= 0.0 && self.source_depth_m <= self.big_h_m) {
            return bad(
                "source_depth_m",
                format!("source depth must lie in [0, {}]", self.big_h_m),
            );
        }
        if self.n_water < 4 {
            return bad("n_water", format!("n_water must be at least 4, got {}", self.n_water));
        }
        if self.n_bottom < 4 {
            return bad("n_bottom", format!("n_bottom must be at least 4, got {}", self.n_bottom));
        }
        if !(self.cp_max_mps > 0.0) {
            return bad("cp_max_mps", "phase-speed cutoff must be positive".into());
        }
        for (name, layer, lo, hi) in [
            ("water", &self.water, 0.0, self.h_m),
            ("bottom", &self.bottom, self.h_m, self.big_h_m),
        ] {
            for (key, p, positive) in [
                ("ssp", &layer.ssp, true),
                ("rho", &layer.rho, true),
                ("alpha", &layer.alpha, false),
            ] {
                let (dlo, dhi) = p.domain();
                if dlo > lo || dhi < hi {
                    return Err((
                        (name, key),
                        Error::InvalidArgument(format!(
                            "[{name}] {key} table covers [{dlo}, {dhi}] but the layer spans [{lo}, {hi}]"
                        )),
                    ));
                }
                if positive {
                    if let Some((vmin, _)) = p.value_bounds() {
                        if !(vmin > 0.0) {
                            return Err((
                                (name, key),
                                Error::InvalidArgument(format!(
                                    "[{name}] {key} values must be positive"
                                )),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Serializes to the text format accepted by [`parse_env_file`].
    pub fn to_env_string(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("freq_hz = {}\n", self.freq_hz));
        s.push_str(&format!("source_depth_m = {}\n", self.source_depth_m));
        s.push_str(&format!("interface_depth_m = {}\n", self.h_m));
        s.push_str(&format!("total_depth_m = {}\n", self.big_h_m));
        s.push_str(&format!("bottom_bc = {}\n", self.bottom_bc.name()));
        s.push_str(&format!("n_water = {}\n", self.n_water));
        s.push_str(&format!("n_bottom = {}\n", self.n_bottom));
        s.push_str(&format!("cp_max_mps = {}\n", self.cp_max_mps));
        if let Some(r) = &self.ranges_m {
            s.push_str(&format!("ranges_m = {r}\n"));
        }
        if let Some(d) = &self.depths_m {
            s.push_str(&format!("depths_m = {d}\n"));
        }
        for (name, layer) in [("water", &self.water), ("bottom", &self.bottom)] {
            s.push_str(&format!("\n[{name}]\n"));
            s.push_str(&format!("ssp = {}\n", layer.ssp));
            s.push_str(&format!("rho = {}\n", layer.rho));
            s.push_str(&format!("alpha = {}\n", layer.alpha));
        }
        s
    }
}

#[derive(Debug)]
struct Entry {
    line: usize,
    value: String,
}

const TOP_KEYS: [&str; 10] = [
    "freq_hz",
    "source_depth_m",
    "interface_depth_m",
    "total_depth_m",
    "bottom_bc",
    "n_water",
    "n_bottom",
    "cp_max_mps",
    "ranges_m",
    "depths_m",
];
const LAYER_KEYS: [&str; 3] = ["ssp", "rho", "alpha"];

pub fn parse_env_file(text: &str) -> Result<EnvironmentSpec> {
    // section name -> (header line, key -> entry)
    let mut sections: HashMap<String, (usize, HashMap<String, Entry>)> = HashMap::new();
    sections.insert(String::new(), (0, HashMap::new()));
    let mut current = String::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            if content.starts_with("[[") {
                return Err(Error::Parse { line, msg: format!("unexpected `{content}`") });
            }
            let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                line,
                msg: format!("malformed section header `{content}`"),
            })?;
            let name = name.trim();
            if name != "water" && name != "bottom" {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown section `[{name}]`, expected [water] or [bottom]"),
                });
            }
            if sections.contains_key(name) {
                return Err(Error::Parse { line, msg: format!("duplicate section `[{name}]`") });
            }
            sections.insert(name.to_string(), (line, HashMap::new()));
            current = name.to_string();
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let allowed: &[&str] = if current.is_empty() { &TOP_KEYS } else { &LAYER_KEYS };
        if !allowed.contains(&key) {
            let place = if current.is_empty() { "top level".to_string() } else { format!("[{current}]") };
            return Err(Error::Parse { line, msg: format!("unknown key `{key}` at {place}") });
        }
        if value.is_empty() {
            return Err(Error::Parse { line, msg: format!("empty value for `{key}`") });
        }
        let entries = &mut sections.get_mut(&current).unwrap().1;
        if entries.contains_key(key) {
            return Err(Error::Parse { line, msg: format!("duplicate key `{key}`") });
        }
        entries.insert(key.to_string(), Entry { line, value: value.to_string() });
    }

    let top = &sections[""].1;
    let required = |map: &HashMap<String, Entry>, key: &str, section: &str, line: usize| {
        map.get(key).map(|e| (e.line, e.value.clone())).ok_or_else(|| Error::MissingKey {
            line,
            key: key.to_string(),
            section: section.to_string(),
        })
    };
    let number = |(line, v): (usize, String)| -> Result<f64> {
        v.parse::<f64>().map_err(|_| Error::Parse {
            line,
            msg: format!("`{v}` is not a number"),
        })
    };
    let integer = |(line, v): (usize, String)| -> Result<usize> {
        v.parse::<usize>().map_err(|_| Error::Parse {
            line,
            msg: format!("`{v}` is not a non-negative integer"),
        })
    };
    let eof = last_line.max(1);

    let freq_hz = number(required(top, "freq_hz", "top level", eof)?)?;
    let source_depth_m = number(required(top, "source_depth_m", "top level", eof)?)?;
    let h_m = number(required(top, "interface_depth_m", "top level", eof)?)?;
    let big_h_m = number(required(top, "total_depth_m", "top level", eof)?)?;
    let (bc_line, bc) = required(top, "bottom_bc", "top level", eof)?;
    let bottom_bc = match bc.as_str() {
        "free" => BottomBc::Free,
        "rigid" => BottomBc::Rigid,
        other => {
            return Err(Error::Parse {
                line: bc_line,
                msg: format!("unknown bottom_bc `{other}`, expected free or rigid"),
            })
        }
    };
    let n_water = integer(required(top, "n_water", "top level", eof)?)?;
    let n_bottom = integer(required(top, "n_bottom", "top level", eof)?)?;
    let cp_max_mps = match top.get("cp_max_mps") {
        Some(e) => number((e.line, e.value.clone()))?,
        None => f64::INFINITY,
    };
    let lattice = |key: &str| -> Result<Option<Lattice>> {
        top.get(key)
            .map(|e| {
                e.value.parse::<Lattice>().map_err(|err| Error::Parse {
                    line: e.line,
                    msg: format!("{key}: {}", inner_msg(err)),
                })
            })
            .transpose()
    };
    let ranges_m = lattice("ranges_m")?;
    let depths_m = lattice("depths_m")?;

    let layer = |name: &str| -> Result<Layer> {
        let (header, map) = sections.get(name).ok_or_else(|| Error::MissingKey {
            line: eof,
            key: format!("[{name}]"),
            section: "file".to_string(),
        })?;
        let section = format!("[{name}]");
        let profile = |key: &str| -> Result<Option<Profile>> {
            map.get(key)
                .map(|e| parse_profile(&e.value).map_err(|msg| Error::Parse { line: e.line, msg }))
                .transpose()
        };
        Ok(Layer {
            ssp: profile("ssp")?.ok_or_else(|| Error::MissingKey {
                line: *header,
                key: "ssp".into(),
                section: section.clone(),
            })?,
            rho: profile("rho")?.ok_or_else(|| Error::MissingKey {
                line: *header,
                key: "rho".into(),
                section: section.clone(),
            })?,
            alpha: profile("alpha")?.unwrap_or(Profile::Constant(0.0)),
        })
    };
    let water = layer("water")?;
    let bottom = layer("bottom")?;

    let spec = EnvironmentSpec {
        freq_hz,
        source_depth_m,
        h_m,
        big_h_m,
        water,
        bottom,
        bottom_bc,
        n_water,
        n_bottom,
        cp_max_mps,
        ranges_m,
        depths_m,
    };
    spec.check().map_err(|((section, key), err)| {
        let line = sections
            .get(section)
            .and_then(|(_, m)| m.get(key))
            .map(|e| e.line)
            .unwrap_or(eof);
        Error::Parse { line, msg: inner_msg(err) }
    })?;
    Ok(spec)
}

fn inner_msg(e: Error) -> String {
    match e {
        Error::InvalidArgument(m) => m,
        other => other.to_string(),
    }
}

fn parse_profile(value: &str) -> std::result::Result<Profile, String> {
    if value.starts_with('[') {
        let pairs: Vec<[f64; 2]> = serde_json::from_str(value)
            .map_err(|e| format!("malformed profile table: {e}"))?;
        return Profile::tabulated(pairs.into_iter().map(|[z, v]| (z, v)).collect())
            .map_err(inner_msg);
    }
    if let Ok(v) = value.parse::<f64>() {
        if !v.is_finite() {
            return Err(format!("profile value `{value}` must be finite"));
        }
        return Ok(Profile::Constant(v));
    }
    value
        .parse::<NamedProfile>()
        .map(Profile::Named)
        .map_err(|_| format!("unknown profile `{value}`"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) const EXAMPLE4: &str = "\
freq_hz = 20
source_depth_m = 36
interface_depth_m = 50
total_depth_m = 100
bottom_bc = free
n_water = 20
n_bottom = 20

[water]
ssp = 1500
rho = 1.0
alpha = 0.0

[bottom]
ssp = 1800
rho = 1.5
alpha = 1.5
";

    #[test]
    fn builtin_profiles_at_reference_depths() {
        assert_eq!(eval_profile(&Profile::Named(NamedProfile::Munk), 1300.0).unwrap(), 1500.0);
        let rho = eval_profile(&Profile::Named(NamedProfile::ExpDensity), 3000.0).unwrap();
        assert!((rho - std::f64::consts::E).abs() < 1e-15);
        let c = eval_profile(&Profile::Named(NamedProfile::Pseudolinear), 0.0).unwrap();
        assert!((c - 1.0 / 4.16e-7f64.sqrt()).abs() < 1e-9);
        assert!((c - 1550.4).abs() < 0.05);
        assert_eq!(eval_profile(&Profile::Named(NamedProfile::LinearAtten), 400.0).unwrap(), 1.0);
    }

    #[test]
    fn tabulated_profile_interpolates_linearly() {
        let p = Profile::tabulated(vec![(0.0, 1500.0), (50.0, 1520.0)]).unwrap();
        assert_eq!(eval_profile(&p, 25.0).unwrap(), 1510.0);
        assert_eq!(eval_profile(&p, 0.0).unwrap(), 1500.0);
        assert_eq!(eval_profile(&p, 50.0).unwrap(), 1520.0);
        assert!(matches!(eval_profile(&p, 60.0), Err(Error::OutOfDomain { .. })));
        assert!(Profile::tabulated(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(Profile::tabulated(vec![(0.0, 1.0)]).is_err());
    }

    #[test]
    fn eta_and_wavenumbers() {
        assert!((ETA - 0.018323389972).abs() < 1e-12);
        let omega = 2.0 * PI * 50.0;
        let k = complex_wavenumber(1500.0, 0.0, omega).unwrap();
        assert!((k.re - 0.2094395102).abs() < 1e-10);
        assert_eq!(k.im, 0.0);
        let k = complex_wavenumber(1800.0, 0.5, omega).unwrap();
        assert!((k.re - omega / 1800.0).abs() < 1e-15);
        assert!((k.im / k.re - 0.5 * ETA).abs() < 1e-15);
        assert!(complex_wavenumber(0.0, 0.0, omega).is_err());
        assert!(complex_wavenumber(-1.0, 0.0, omega).is_err());
    }

    #[test]
    fn parses_example_four() {
        let spec = parse_env_file(EXAMPLE4).unwrap();
        assert_eq!(spec.freq_hz, 20.0);
        assert_eq!(spec.h_m, 50.0);
        assert_eq!(spec.big_h_m, 100.0);
        assert_eq!(spec.water, Layer::uniform(1500.0, 1.0, 0.0));
        assert_eq!(spec.bottom, Layer::uniform(1800.0, 1.5, 1.5));
        assert_eq!(spec.bottom_bc, BottomBc::Free);
        assert_eq!(spec.cp_max_mps, f64::INFINITY);
        assert!(spec.ranges_m.is_none());
    }

    #[test]
    fn rejects_interface_at_total_depth() {
        let text = EXAMPLE4.replace("interface_depth_m = 50", "interface_depth_m = 100");
        let err = parse_env_file(&text).unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                msg: "interface depth must be strictly less than total depth".into()
            }
        );
    }

    #[test]
    fn missing_key_is_named() {
        let text = EXAMPLE4.replace("freq_hz = 20\n", "");
        match parse_env_file(&text).unwrap_err() {
            Error::MissingKey { key, .. } => assert_eq!(key, "freq_hz"),
            other => panic!("unexpected {other:?}"),
        }
        let text = EXAMPLE4.replace("rho = 1.5\n", "");
        match parse_env_file(&text).unwrap_err() {
            Error::MissingKey { key, section, line } => {
                assert_eq!((key.as_str(), section.as_str(), line), ("rho", "[bottom]", 14));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn diagnostics_are_line_anchored() {
        let cases = [
            (EXAMPLE4.replace("bottom_bc = free", "bottom_bc = soft"), 5),
            (EXAMPLE4.replace("freq_hz = 20", "freq_hz = 20 Hz"), 1),
            (EXAMPLE4.replace("ssp = 1800", "ssp = [[100, 1800], [50, 1800]]"), 15),
            (EXAMPLE4.replace("ssp = 1800", "ssp = [[50, 1800], [100, 1800]] x"), 15),
            (EXAMPLE4.replace("rho = 1.5", "rho = -1.5"), 16),
            (EXAMPLE4.replace("ssp = 1500", "ssp = [[0, 1500], [50, 0]]"), 10),
            (EXAMPLE4.replace("ssp = 1500", "ssp = [[0, 1500], [40, 1500]]"), 10),
            (EXAMPLE4.replace("ssp = 1500", "ssp = unknown_profile"), 10),
            (EXAMPLE4.replace("[water]", "[air]"), 9),
            (EXAMPLE4.replace("n_water = 20", "n_water = 3"), 6),
            (format!("{EXAMPLE4}extra = 1\n"), 18),
        ];
        for (text, expect) in cases {
            match parse_env_file(&text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, expect, "{text}"),
                other => panic!("expected parse error for\n{text}\ngot {other:?}"),
            }
        }
    }

    #[test]
    fn lattices() {
        let l: Lattice = "0:10:30".parse().unwrap();
        assert_eq!(l.values(), vec![0.0, 10.0, 20.0, 30.0]);
        let l: Lattice = "100:50:220".parse().unwrap();
        assert_eq!(l.values(), vec![100.0, 150.0, 200.0]);
        let l: Lattice = "0:0.1:0.3".parse().unwrap();
        assert_eq!(l.values().len(), 4);
        assert!("1:0:2".parse::<Lattice>().is_err());
        assert!("1:2".parse::<Lattice>().is_err());
        assert!("5:1:2".parse::<Lattice>().is_err());
    }

    #[test]
    fn builtins_match_closed_forms() {
        type Closed = (NamedProfile, fn(f64) -> f64);
        let closed: [Closed; 8] = [
            (NamedProfile::Pseudolinear, |z| (5.94e-10 * z + 4.16e-7).powf(-0.5)),
            (NamedProfile::Munk, |z| {
                let zt = (z - 1300.0) / 650.0;
                1500.0 + 1500.0 * 0.0073 * (zt - 1.0 + (-zt).exp())
            }),
            (NamedProfile::MunkCanonical, |z| {
                let zt = (z - 1300.0) / 650.0;
                1500.0 + 1500.0 * 0.00737 * (zt - 1.0 + (-zt).exp())
            }),
            (NamedProfile::LinearBottom, |z| 1100.0 + 0.2 * z),
            (NamedProfile::ExpBottomA, |z| 1500.0 + 30.0 * (z / 100.0 - 0.1).exp()),
            (NamedProfile::ExpBottomB, |z| 2000.0 - 100.0 * (0.4 - z / 1000.0).exp()),
            (NamedProfile::ExpDensity, |z| (z / 3000.0).exp()),
            (NamedProfile::LinearAtten, |z| z / 200.0 - 1.0),
        ];
        let mut state = 12345u64;
        for (p, f) in closed {
            for _ in 0..100 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let z = 300.0 + 4700.0 * ((state >> 11) as f64 / (1u64 << 53) as f64);
                let v = eval_profile(&Profile::Named(p), z).unwrap();
                let e = f(z);
                assert!(((v - e) / e).abs() < 1e-14, "{p:?} at {z}: {v} vs {e}");
            }
        }
    }

    fn build_profile(kind: u8, value: f64, named: NamedProfile, table: &[(f64, f64)], lo: f64, hi: f64) -> Profile {
        match kind {
            0 => Profile::Constant(value),
            1 => Profile::Named(named),
            _ => {
                let mut zs: Vec<f64> = table.iter().map(|(t, _)| lo + t * (hi - lo)).collect();
                zs.push(lo);
                zs.push(hi);
                zs.sort_by(f64::total_cmp);
                zs.dedup();
                let vals = std::iter::once(value).chain(table.iter().map(|(_, v)| *v)).cycle();
                Profile::Tabulated(zs.into_iter().zip(vals).collect())
            }
        }
    }

    proptest! {
        #[test]
        fn serialization_round_trips(
            freq in 0.1f64..2000.0,
            h in 1.0f64..4000.0,
            extra in 0.5f64..3000.0,
            zs_frac in 0.0f64..1.0,
            nw in 4usize..200,
            nb in 4usize..200,
            rigid in any::<bool>(),
            cp in prop_oneof![Just(f64::INFINITY), 1000.0f64..5000.0],
            with_lattice in any::<bool>(),
            kinds in (0u8..3, 0u8..3),
            value in 0.5f64..3000.0,
            named in prop::sample::select(NamedProfile::ALL.to_vec()),
            table in prop::collection::vec((0.0f64..1.0, 0.5f64..2000.0), 0..5),
        ) {
            let big_h = h + extra;
            let w = build_profile(kinds.0, value, named, &table, 0.0, h);
            let b = build_profile(kinds.1, value, named, &table, h, big_h);
            let spec = EnvironmentSpec {
                freq_hz: freq,
                source_depth_m: zs_frac * big_h,
                h_m: h,
                big_h_m: big_h,
                water: Layer { ssp: w, rho: Profile::Constant(1.0), alpha: Profile::Constant(0.0) },
                bottom: Layer { ssp: b, rho: Profile::Named(NamedProfile::ExpDensity), alpha: Profile::Constant(0.7) },
                bottom_bc: if rigid { BottomBc::Rigid } else { BottomBc::Free },
                n_water: nw,
                n_bottom: nb,
                cp_max_mps: cp,
                ranges_m: with_lattice.then(|| Lattice::new(1.0, 0.5, 99.0).unwrap()),
                depths_m: with_lattice.then(|| Lattice::new(0.0, 0.25, big_h).unwrap()),
            };
            prop_assume!(spec.validate().is_ok());
            let text = spec.to_env_string();
            let back = parse_env_file(&text).unwrap();
            prop_assert_eq!(back, spec);
        }
    }
}
