//! Experiment configuration, presets and the key-value config format.
//!
//! ```text
//! [problem]
//! preset = delta1d        # optional base, later keys override it
//! dim = 1
//! half_width = 16
//! points = 16384
//! potential = delta       # none | delta | power | gaussian
//! n_ref = 65536
//! amplitude = -1
//! beta = -1
//! datum = soliton         # soliton | gaussian
//! final_time = 1
//!
//! [sweep]
//! taus = 0.0625, 0.03125, 0.015625
//! reference = exact       # exact | fine
//!
//! [output]
//! dir = out/delta1d
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use ewi_core::filters::CutoffProfile;
use ewi_core::integrator::{InitialDatum, ProductRule, ReferenceMode, SchrodingerProblem};
use ewi_core::potentials::{PotentialKind, PotentialSpec};

use crate::error::HarnessError;

/// Acceptance bands checked by a convergence report.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bands {
    /// Inclusive bounds on the fitted L2 order (`f64::INFINITY` for no upper bound).
    pub l2: Option<(f64, f64)>,
    /// `(shift, tolerance)`: the H1 order must lie within `tolerance` of `l2 - shift`.
    pub h1_shift: Option<(f64, f64)>,
}

/// Everything needed to run one convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
    pub potential: PotentialSpec,
    pub product: ProductRule,
    pub beta: f64,
    pub sigma: f64,
    pub datum: InitialDatum,
    pub final_time: f64,
    /// Step sizes, strictly decreasing.
    pub taus: Vec<f64>,
    pub profile: CutoffProfile,
    pub reference: ReferenceMode,
    /// Integrability exponent of the potential used for the predicted order.
    pub nominal_p: f64,
    pub bands: Bands,
    pub out_dir: Option<PathBuf>,
    /// Times at which `run` writes field snapshots.
    pub snapshots: Vec<f64>,
    pub seed: u64,
    pub threads: usize,
}

/// Named parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Delta1D,
    Smooth1D,
    Power2D,
    Power2DFull,
    Power3DL2,
    Power3DL2Full,
    Power3DL127,
    Power3DL127Full,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Delta1D,
        Preset::Smooth1D,
        Preset::Power2D,
        Preset::Power2DFull,
        Preset::Power3DL2,
        Preset::Power3DL2Full,
        Preset::Power3DL127,
        Preset::Power3DL127Full,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Delta1D => "delta1d",
            Preset::Smooth1D => "smooth1d",
            Preset::Power2D => "power2d",
            Preset::Power2DFull => "power2d-full",
            Preset::Power3DL2 => "power3d-l2",
            Preset::Power3DL2Full => "power3d-l2-full",
            Preset::Power3DL127 => "power3d-l127",
            Preset::Power3DL127Full => "power3d-l127-full",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, HarnessError> {
        let key = name.to_ascii_lowercase().replace('_', "-");
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| HarnessError::UnknownPreset(name.to_string()))
    }

    pub fn config(self) -> ExperimentConfig {
        let geometric = |t: f64, from: i32, to: i32| -> Vec<f64> {
            (from..=to).map(|k| t * 2f64.powi(-k)).collect()
        };
        match self {
            Preset::Delta1D => ExperimentConfig {
                name: self.name().into(),
                dim: 1,
                half_width: 16.0,
                points: 16384,
                potential: PotentialSpec::delta(1 << 16),
                product: ProductRule::Auto,
                beta: -1.0,
                sigma: 1.0,
                datum: InitialDatum::DeltaSoliton,
                final_time: 1.0,
                taus: geometric(1.0, 4, 10),
                profile: CutoffProfile::Sharp,
                reference: ReferenceMode::Exact1DSoliton,
                nominal_p: 1.0,
                bands: Bands {
                    l2: Some((0.40, 0.60)),
                    h1_shift: Some((0.5, 0.15)),
                },
                out_dir: None,
                snapshots: Vec::new(),
                seed: 0,
                threads: 1,
            },
            Preset::Smooth1D => ExperimentConfig {
                name: self.name().into(),
                dim: 1,
                half_width: 16.0,
                points: 1024,
                potential: PotentialSpec::gaussian_well(1.0),
                product: ProductRule::Auto,
                beta: -1.0,
                sigma: 1.0,
                datum: InitialDatum::Gaussian,
                final_time: 1.0,
                taus: geometric(1.0, 3, 9),
                profile: CutoffProfile::Sharp,
                reference: ReferenceMode::FineStep {
                    tau_ref: 2f64.powi(-14),
                },
                nominal_p: f64::INFINITY,
                bands: Bands {
                    l2: Some((0.9, f64::INFINITY)),
                    h1_shift: None,
                },
                out_dir: None,
                snapshots: Vec::new(),
                seed: 0,
                threads: 1,
            },
            Preset::Power2D | Preset::Power2DFull => ExperimentConfig {
                name: self.name().into(),
                dim: 2,
                half_width: 8.0,
                points: if self == Preset::Power2D { 128 } else { 4096 },
                potential: PotentialSpec::power(0.5),
                product: ProductRule::Auto,
                beta: 0.0,
                sigma: 1.0,
                datum: InitialDatum::Gaussian,
                final_time: 0.25,
                taus: if self == Preset::Power2D {
                    geometric(0.25, 1, 7)
                } else {
                    geometric(0.25, 3, 12)
                },
                profile: CutoffProfile::Sharp,
                reference: ReferenceMode::FineStep { tau_ref: 1e-5 },
                nominal_p: 4.0 / 3.0,
                bands: Bands {
                    l2: Some((0.5, 0.8)),
                    h1_shift: None,
                },
                out_dir: None,
                snapshots: Vec::new(),
                seed: 0,
                threads: 1,
            },
            Preset::Power3DL2
            | Preset::Power3DL2Full
            | Preset::Power3DL127
            | Preset::Power3DL127Full => {
                let l2 = matches!(self, Preset::Power3DL2 | Preset::Power3DL2Full);
                let full = matches!(self, Preset::Power3DL2Full | Preset::Power3DL127Full);
                ExperimentConfig {
                    name: self.name().into(),
                    dim: 3,
                    half_width: 8.0,
                    points: if full { 512 } else { 64 },
                    potential: PotentialSpec::power(if l2 { 1.5 } else { 1.25 }),
                    product: ProductRule::Auto,
                    beta: 1.0,
                    sigma: 1.0,
                    datum: InitialDatum::Gaussian,
                    final_time: 0.125,
                    taus: if full {
                        geometric(0.125, 3, 9)
                    } else {
                        geometric(0.125, 1, 4)
                    },
                    profile: CutoffProfile::Sharp,
                    reference: ReferenceMode::FineStep { tau_ref: 1e-4 },
                    nominal_p: if l2 { 2.0 } else { 12.0 / 7.0 },
                    bands: Bands {
                        l2: Some(if l2 {
                            (0.85, 1.15)
                        } else {
                            (0.55, f64::INFINITY)
                        }),
                        h1_shift: None,
                    },
                    out_dir: None,
                    snapshots: Vec::new(),
                    seed: 0,
                    threads: 1,
                }
            }
        }
    }
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self, HarnessError> {
        Ok(Preset::from_name(name)?.config())
    }

    /// Mesh size `2L / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Divides the points per dimension by `factor` (desk-scale runs).
    pub fn scaled(mut self, factor: usize) -> Result<Self, HarnessError> {
        if factor == 0 || !self.points.is_multiple_of(factor) {
            return Err(HarnessError::config(format!(
                "scale factor {factor} does not divide {} points",
                self.points
            )));
        }
        self.points /= factor;
        Ok(self)
    }

    /// Checks the invariants a sweep relies on.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(1..=3).contains(&self.dim) {
            return Err(HarnessError::config("dim must be 1, 2 or 3"));
        }
        if self.taus.is_empty() {
            return Err(HarnessError::config("tau list is empty"));
        }
        for w in self.taus.windows(2) {
            if w[1] >= w[0] {
                return Err(HarnessError::config("tau list must be strictly decreasing"));
            }
        }
        for &tau in &self.taus {
            if !(tau > 0.0 && tau <= self.final_time) {
                return Err(HarnessError::config(format!("tau {tau} outside (0, T]")));
            }
            SchrodingerProblem::steps_to(self.final_time, tau)
                .map_err(|_| HarnessError::config(format!("tau {tau} does not divide T")))?;
        }
        if let ReferenceMode::FineStep { tau_ref } = self.reference {
            SchrodingerProblem::steps_to(self.final_time, tau_ref)
                .map_err(|_| HarnessError::config("tau_ref does not divide T"))?;
            if tau_ref >= *self.taus.last().expect("non-empty") {
                return Err(HarnessError::config(
                    "tau_ref must be below every swept tau",
                ));
            }
        }
        if self.nominal_p.is_nan() || self.nominal_p < 1.0 {
            return Err(HarnessError::config("nominal_p must be at least 1"));
        }
        if self.threads == 0 {
            return Err(HarnessError::config("threads must be positive"));
        }
        for &t in &self.snapshots {
            if !(0.0..=self.final_time).contains(&t) {
                return Err(HarnessError::config(format!(
                    "snapshot time {t} outside [0, T]"
                )));
            }
        }
        Ok(())
    }

    /// Parses a config file. A `preset` key in `[problem]` seeds the defaults;
    /// without one every problem key must be given.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let entries = parse_sections(text)?;
        let base = entries
            .iter()
            .find(|e| e.section == "problem" && e.key == "preset")
            .map(|e| ExperimentConfig::preset(&e.value))
            .transpose()?;
        let from_preset = base.is_some();
        let mut cfg = base.unwrap_or_else(blank);
        let mut kind: Option<String> = None;
        let (mut n_ref, mut gamma, mut width) = (None, None, None);
        let mut amplitude = None;
        let mut reference: Option<String> = None;
        let mut tau_ref = None;
        let (mut l2_band, mut h1_shift) = (None, None);

        for e in &entries {
            let v = e.value.as_str();
            let err = |msg: &str| HarnessError::Parse {
                line: e.line,
                message: format!("{}: {msg}", e.key),
            };
            let num = || parse_f64(v).ok_or_else(|| err("expected a number"));
            let int = || {
                v.parse::<usize>()
                    .map_err(|_| err("expected a non-negative integer"))
            };
            let list =
                || parse_list(v).ok_or_else(|| err("expected a comma-separated list of numbers"));
            match (e.section.as_str(), e.key.as_str()) {
                ("problem", "preset") => {}
                ("problem", "name") => cfg.name = v.to_string(),
                ("problem", "dim") => cfg.dim = int()?,
                ("problem", "half_width") => cfg.half_width = num()?,
                ("problem", "points") => cfg.points = int()?,
                ("problem", "potential") => kind = Some(v.to_ascii_lowercase()),
                ("problem", "n_ref") => n_ref = Some(int()?),
                ("problem", "gamma") => gamma = Some(num()?),
                ("problem", "width") => width = Some(num()?),
                ("problem", "amplitude") => amplitude = Some(num()?),
                ("problem", "product") => {
                    cfg.product = match v {
                        "auto" => ProductRule::Auto,
                        "pointwise" => ProductRule::Pointwise,
                        _ => return Err(err("expected auto or pointwise")),
                    }
                }
                ("problem", "beta") => cfg.beta = num()?,
                ("problem", "sigma") => cfg.sigma = num()?,
                ("problem", "datum") => {
                    cfg.datum = match v {
                        "soliton" => InitialDatum::DeltaSoliton,
                        "gaussian" => InitialDatum::Gaussian,
                        _ => return Err(err("expected soliton or gaussian")),
                    }
                }
                ("problem", "final_time") => cfg.final_time = num()?,
                ("problem", "nominal_p") => cfg.nominal_p = num()?,
                ("sweep", "taus") => cfg.taus = list()?,
                ("sweep", "profile") => {
                    cfg.profile = match v {
                        "sharp" => CutoffProfile::Sharp,
                        "smooth" => CutoffProfile::Smooth,
                        _ => return Err(err("expected sharp or smooth")),
                    }
                }
                ("sweep", "reference") => reference = Some(v.to_string()),
                ("sweep", "tau_ref") => tau_ref = Some(num()?),
                ("sweep", "threads") => cfg.threads = int()?,
                ("sweep", "seed") => {
                    cfg.seed = v.parse().map_err(|_| err("expected an integer"))?
                }
                ("sweep", "l2_band") => {
                    l2_band = Some(pair(list()?).ok_or_else(|| err("expected two numbers"))?)
                }
                ("sweep", "h1_shift") => {
                    h1_shift = Some(pair(list()?).ok_or_else(|| err("expected two numbers"))?)
                }
                ("output", "dir") => cfg.out_dir = Some(PathBuf::from(v)),
                ("output", "snapshots") => cfg.snapshots = list()?,
                _ => {
                    return Err(HarnessError::Parse {
                        line: e.line,
                        message: format!("unknown key `{}` in [{}]", e.key, e.section),
                    })
                }
            }
        }

        if let Some(kind) = kind {
            let amp = amplitude.unwrap_or(-1.0);
            cfg.potential = match kind.as_str() {
                "none" => PotentialSpec::NONE,
                "delta" => PotentialSpec::delta(
                    n_ref.ok_or_else(|| HarnessError::config("delta potential needs n_ref"))?,
                ),
                "power" => PotentialSpec::power(
                    gamma.ok_or_else(|| HarnessError::config("power potential needs gamma"))?,
                ),
                "gaussian" => PotentialSpec::gaussian_well(
                    width.ok_or_else(|| HarnessError::config("gaussian potential needs width"))?,
                ),
                other => return Err(HarnessError::config(format!("unknown potential `{other}`"))),
            }
            .with_amplitude(if kind == "none" { 0.0 } else { amp });
        } else {
            match (&mut cfg.potential.kind, n_ref, gamma, width) {
                (_, None, None, None) => {}
                (PotentialKind::DeltaSeries1D { n_ref: n }, Some(v), None, None) => *n = v,
                (PotentialKind::PowerSymbol { gamma: g }, None, Some(v), None) => *g = v,
                (PotentialKind::GaussianWell { width: w }, None, None, Some(v)) => *w = v,
                _ => {
                    return Err(HarnessError::config(
                        "potential parameter does not match the potential kind",
                    ))
                }
            }
            if let Some(a) = amplitude {
                cfg.potential.amplitude = a;
            }
        }

        match (reference.as_deref(), tau_ref) {
            (Some("exact"), None) => cfg.reference = ReferenceMode::Exact1DSoliton,
            (Some("exact"), Some(_)) => {
                return Err(HarnessError::config(
                    "tau_ref is only used with reference = fine",
                ))
            }
            (Some("fine"), Some(t)) => cfg.reference = ReferenceMode::FineStep { tau_ref: t },
            (Some("fine"), None) => match cfg.reference {
                ReferenceMode::FineStep { .. } => {}
                _ => return Err(HarnessError::config("reference = fine needs tau_ref")),
            },
            (None, Some(t)) => match &mut cfg.reference {
                ReferenceMode::FineStep { tau_ref } => *tau_ref = t,
                _ => {
                    return Err(HarnessError::config(
                        "tau_ref is only used with reference = fine",
                    ))
                }
            },
            (None, None) => {}
            (Some(other), _) => {
                return Err(HarnessError::config(format!("unknown reference `{other}`")))
            }
        }
        if let Some((lo, hi)) = l2_band {
            cfg.bands.l2 = Some((lo, hi));
        }
        if let Some(s) = h1_shift {
            cfg.bands.h1_shift = Some(s);
        }
        if !from_preset
            && (cfg.dim == 0
                || cfg.points == 0
                || cfg.half_width.is_nan()
                || cfg.final_time.is_nan())
        {
            return Err(HarnessError::config(
                "without a preset, dim, half_width, points and final_time are required",
            ));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes to the config format; `parse` of the output reproduces `self`
    /// except for the name when it contains a line break.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[problem]");
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "dim = {}", self.dim);
        let _ = writeln!(s, "half_width = {:?}", self.half_width);
        let _ = writeln!(s, "points = {}", self.points);
        let amp = self.potential.amplitude;
        match self.potential.kind {
            PotentialKind::None => {
                let _ = writeln!(s, "potential = none");
            }
            PotentialKind::DeltaSeries1D { n_ref } => {
                let _ = writeln!(s, "potential = delta\nn_ref = {n_ref}\namplitude = {amp:?}");
            }
            PotentialKind::PowerSymbol { gamma } => {
                let _ = writeln!(
                    s,
                    "potential = power\ngamma = {gamma:?}\namplitude = {amp:?}"
                );
            }
            PotentialKind::GaussianWell { width } => {
                let _ = writeln!(
                    s,
                    "potential = gaussian\nwidth = {width:?}\namplitude = {amp:?}"
                );
            }
        }
        let product = match self.product {
            ProductRule::Auto => "auto",
            ProductRule::Pointwise => "pointwise",
        };
        let _ = writeln!(s, "product = {product}");
        let _ = writeln!(s, "beta = {:?}", self.beta);
        let _ = writeln!(s, "sigma = {:?}", self.sigma);
        let datum = match self.datum {
            InitialDatum::DeltaSoliton => "soliton",
            InitialDatum::Gaussian => "gaussian",
        };
        let _ = writeln!(s, "datum = {datum}");
        let _ = writeln!(s, "final_time = {:?}", self.final_time);
        let _ = writeln!(s, "nominal_p = {}", fmt_num(self.nominal_p));
        let _ = writeln!(s, "\n[sweep]");
        let _ = writeln!(s, "taus = {}", join(&self.taus));
        let profile = match self.profile {
            CutoffProfile::Sharp => "sharp",
            CutoffProfile::Smooth => "smooth",
        };
        let _ = writeln!(s, "profile = {profile}");
        match self.reference {
            ReferenceMode::Exact1DSoliton => {
                let _ = writeln!(s, "reference = exact");
            }
            ReferenceMode::FineStep { tau_ref } => {
                let _ = writeln!(s, "reference = fine\ntau_ref = {tau_ref:?}");
            }
        }
        let _ = writeln!(s, "threads = {}", self.threads);
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some((lo, hi)) = self.bands.l2 {
            let _ = writeln!(s, "l2_band = {}, {}", fmt_num(lo), fmt_num(hi));
        }
        if let Some((shift, tol)) = self.bands.h1_shift {
            let _ = writeln!(s, "h1_shift = {shift:?}, {tol:?}");
        }
        if self.out_dir.is_some() || !self.snapshots.is_empty() {
            let _ = writeln!(s, "\n[output]");
            if let Some(dir) = &self.out_dir {
                let _ = writeln!(s, "dir = {}", dir.display());
            }
            if !self.snapshots.is_empty() {
                let _ = writeln!(s, "snapshots = {}", join(&self.snapshots));
            }
        }
        s
    }
}

fn blank() -> ExperimentConfig {
    ExperimentConfig {
        name: "custom".into(),
        dim: 0,
        half_width: f64::NAN,
        points: 0,
        potential: PotentialSpec::NONE,
        product: ProductRule::Auto,
        beta: 0.0,
        sigma: 1.0,
        datum: InitialDatum::Gaussian,
        final_time: f64::NAN,
        taus: Vec::new(),
        profile: CutoffProfile::Sharp,
        reference: ReferenceMode::FineStep { tau_ref: f64::NAN },
        nominal_p: f64::INFINITY,
        bands: Bands::default(),
        out_dir: None,
        snapshots: Vec::new(),
        seed: 0,
        threads: 1,
    }
}

struct Entry {
    line: usize,
    section: String,
    key: String,
    value: String,
}

fn parse_sections(text: &str) -> Result<Vec<Entry>, HarnessError> {
    let mut section: Option<String> = None;
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| HarnessError::Parse {
                    line,
                    message: "unterminated section header".into(),
                })?
                .trim();
            if !matches!(name, "problem" | "sweep" | "output") {
                return Err(HarnessError::Parse {
                    line,
                    message: format!("unknown section [{name}]"),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| HarnessError::Parse {
            line,
            message: "expected `key = value`".into(),
        })?;
        let section = section.clone().ok_or_else(|| HarnessError::Parse {
            line,
            message: "key outside of a section".into(),
        })?;
        let key = key.trim().to_string();
        if out.iter().any(|e| e.section == section && e.key == key) {
            return Err(HarnessError::Parse {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        out.push(Entry {
            line,
            section,
            key,
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

/// A number, `inf`, or a power of two written `2^k`.
fn parse_f64(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "infinity" => Some(f64::INFINITY),
        t => match t.strip_prefix("2^") {
            Some(e) => e.parse::<i32>().ok().map(|e| 2f64.powi(e)),
            None => t.parse().ok(),
        },
    }
}

/// Comma-separated numbers in the [`parse_f64`] syntax.
pub fn parse_list(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

fn pair(v: Vec<f64>) -> Option<(f64, f64)> {
    match v[..] {
        [a, b] => Some((a, b)),
        _ => None,
    }
}

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:?}")
    }
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}
