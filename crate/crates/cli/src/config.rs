//! Run configuration: a flat JSON object, optionally overridden by flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Value};
use shrinklab_core::shrinker::canonical::CanonicalKind;

/// Configuration or command-line problem; reported with exit status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Residual,
    Functional,
    VariationCheck,
    Conformal,
    Spectrum,
    Certify,
    Flow,
    ShootTorus,
    ReportAll,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Residual,
        Command::Functional,
        Command::VariationCheck,
        Command::Conformal,
        Command::Spectrum,
        Command::Certify,
        Command::Flow,
        Command::ShootTorus,
        Command::ReportAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Residual => "residual",
            Command::Functional => "functional",
            Command::VariationCheck => "variation-check",
            Command::Conformal => "conformal",
            Command::Spectrum => "spectrum",
            Command::Certify => "certify",
            Command::Flow => "flow",
            Command::ShootTorus => "shoot-torus",
            Command::ReportAll => "report-all",
        }
    }

    /// Tolerances this command reads, with defaults and meaning.
    pub fn tolerances(self) -> &'static [ToleranceSpec] {
        match self {
            Command::Residual => &[ToleranceSpec {
                name: "residual",
                default: 5e-3,
                meaning: "finest-level residual norm_inf bound (plane default 1e-6)",
            }],
            Command::Functional => &[ToleranceSpec {
                name: "functional",
                default: 1e-2,
                meaning: "relative error of F against the closed form (plane default 1e-3)",
            }],
            Command::VariationCheck => &[
                ToleranceSpec {
                    name: "variation",
                    default: 1e-3,
                    meaning: "relative gap between finite differences and the first variation",
                },
                ToleranceSpec {
                    name: "variation.analytic",
                    default: 1e-3,
                    meaning: "first variation on a shrinker relative to max|f|",
                },
            ],
            Command::Conformal => &[
                ToleranceSpec {
                    name: "conformal.origin",
                    default: 1e-12,
                    meaning: "scalar curvature at the origin against n + 1",
                },
                ToleranceSpec {
                    name: "conformal.sign_change",
                    default: 1e-9,
                    meaning: "sign-change radius against a bisection root",
                },
                ToleranceSpec {
                    name: "conformal.distance",
                    default: 1e-6,
                    meaning: "distance to infinity against sqrt(n pi)",
                },
            ],
            Command::Spectrum => &[
                ToleranceSpec {
                    name: "spectrum.head",
                    default: 1e-2,
                    meaning: "lowest eigenvalues against their exact values",
                },
                ToleranceSpec {
                    name: "spectrum.orthonormality",
                    default: 1e-8,
                    meaning: "weighted orthonormality residual of the eigenfunctions",
                },
                ToleranceSpec {
                    name: "spectrum.truncation",
                    default: 1e-6,
                    meaning: "change of the cylinder head when the truncation doubles",
                },
            ],
            Command::Certify => &[
                ToleranceSpec {
                    name: "certify.form_gap",
                    default: 1e-2,
                    meaning: "allowed excess of the exact form over the bound",
                },
                ToleranceSpec {
                    name: "certify.threshold",
                    default: 2e-2,
                    meaning: "relative error of the bisected threshold radius",
                },
            ],
            Command::Flow => &[
                ToleranceSpec {
                    name: "flow.radius",
                    default: 1e-2,
                    meaning: "relative error of the sphere mean radius against 2 sqrt(-t)",
                },
                ToleranceSpec {
                    name: "flow.scaling",
                    default: 1e-2,
                    meaning: "spread of the self-similar residual over t in {-4, -1, -0.25}",
                },
                ToleranceSpec {
                    name: "flow.hausdorff",
                    default: 1e-2,
                    meaning: "distance between the flowed and the rescaled surface",
                },
            ],
            Command::ShootTorus => &[
                ToleranceSpec {
                    name: "shoot.tol",
                    default: 1e-10,
                    meaning: "bisection tolerance on the closure function",
                },
                ToleranceSpec {
                    name: "shoot.residual",
                    default: 1e-2,
                    meaning: "residual norm_inf of the revolved torus",
                },
            ],
            Command::ReportAll => &[],
        }
    }
}

/// A named tolerance with its default.
#[derive(Debug, Clone, Copy)]
pub struct ToleranceSpec {
    pub name: &'static str,
    pub default: f64,
    pub meaning: &'static str,
}

/// Help text listing every command's tolerances.
pub fn tolerance_help() -> String {
    let mut out = String::from("Tolerances (override with --tolerance NAME=VALUE):\n");
    for c in Command::ALL {
        for t in c.tolerances() {
            out.push_str(&format!(
                "  {:<16} {:<24} {:<8e} {}\n",
                c.name(),
                t.name,
                t.default,
                t.meaning
            ));
        }
    }
    out.push_str("  report-all accepts any of the names above.\n");
    out
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| usage(format!("unknown command '{s}'")))
    }
}

/// A canonical shrinker or a mesh file.
#[derive(Debug, Clone, PartialEq)]
pub enum Surface {
    Canonical(CanonicalKind),
    Off(PathBuf),
}

impl Surface {
    pub fn id(&self) -> String {
        match self {
            Surface::Canonical(k) => k.name().to_string(),
            Surface::Off(p) => p.display().to_string(),
        }
    }

    pub fn canonical(&self) -> Option<CanonicalKind> {
        match self {
            Surface::Canonical(k) => Some(*k),
            Surface::Off(_) => None,
        }
    }
}

impl Serialize for Surface {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.id())
    }
}

impl FromStr for Surface {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(kind) = s.parse::<CanonicalKind>() {
            return Ok(Surface::Canonical(kind));
        }
        if s.to_ascii_lowercase().ends_with(".off") {
            return Ok(Surface::Off(PathBuf::from(s)));
        }
        Err(usage(format!(
            "unknown surface '{s}': expected plane, sphere, cylinder or a path ending in .off"
        )))
    }
}

pub const DEFAULT_OUTPUT_DIR: &str = "shrinklab-out";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub surface: Surface,
    /// Refinement level; each command has its own default when absent.
    pub resolution: Option<u32>,
    pub tolerances: BTreeMap<String, f64>,
    /// Explicit output directory; see [`RunConfig::resolved_output_dir`].
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
    pub radius: Option<f64>,
    pub dimension: Option<u32>,
    pub modes: Option<Vec<u32>>,
    pub count: Option<usize>,
    pub truncation: Option<f64>,
    pub t_end: Option<f64>,
    pub seed: Option<u64>,
    pub base_point: Option<[f64; 3]>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            surface: Surface::Canonical(CanonicalKind::Sphere),
            resolution: None,
            tolerances: BTreeMap::new(),
            output_dir: None,
            radius: None,
            dimension: None,
            modes: None,
            count: None,
            truncation: None,
            t_end: None,
            seed: None,
            base_point: None,
        }
    }

    /// The explicit directory, else $OUTPUT_DIR, else the default.
    pub fn resolved_output_dir(&self) -> PathBuf {
        if let Some(d) = &self.output_dir {
            return d.clone();
        }
        match std::env::var_os("OUTPUT_DIR") {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }

    /// Tolerance `name`: the override if given, else the command default.
    pub fn tolerance(&self, name: &str) -> f64 {
        if let Some(v) = self.tolerances.get(name) {
            return *v;
        }
        all_tolerances()
            .find(|t| t.name == name)
            .map(|t| t.default)
            .unwrap_or_else(|| panic!("tolerance '{name}' is not declared"))
    }

    /// Tolerance `name`: the override if given, else `default`.
    pub fn tolerance_or(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    /// Whether `name` was overridden.
    pub fn has_tolerance(&self, name: &str) -> bool {
        self.tolerances.contains_key(name)
    }

    /// Rejects tolerances the command does not read and non-positive values.
    pub fn validate(&self) -> Result<(), UsageError> {
        for (name, value) in &self.tolerances {
            let known = if self.command == Command::ReportAll {
                all_tolerances().any(|t| t.name == name)
            } else {
                self.command.tolerances().iter().any(|t| t.name == name)
            };
            if !known {
                return Err(usage(format!(
                    "unknown tolerance '{name}' for command {}",
                    self.command
                )));
            }
            if !value.is_finite() || *value <= 0.0 {
                return Err(usage(format!(
                    "tolerance '{name}' must be positive, got {value}"
                )));
            }
        }
        if let Surface::Off(p) = &self.surface {
            if !p.is_file() {
                return Err(usage(format!(
                    "surface file {} does not exist",
                    p.display()
                )));
            }
        }
        if let Some(r) = self.resolution {
            if !(1..=8).contains(&r) {
                return Err(usage(format!("resolution must lie in 1..=8, got {r}")));
            }
        }
        Ok(())
    }
}

fn all_tolerances() -> impl Iterator<Item = ToleranceSpec> {
    Command::ALL
        .into_iter()
        .flat_map(|c| c.tolerances().iter().copied())
}

const KEYS: [&str; 13] = [
    "command",
    "surface",
    "resolution",
    "tolerances",
    "output_dir",
    "radius",
    "dimension",
    "modes",
    "count",
    "truncation",
    "t_end",
    "seed",
    "base_point",
];

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str, UsageError> {
    v.as_str()
        .ok_or_else(|| usage(format!("key '{key}': expected a string, found {v}")))
}

fn as_f64(key: &str, v: &Value) -> Result<f64, UsageError> {
    v.as_f64()
        .ok_or_else(|| usage(format!("key '{key}': expected a number, found {v}")))
}

fn as_u64(key: &str, v: &Value) -> Result<u64, UsageError> {
    v.as_u64().ok_or_else(|| {
        usage(format!(
            "key '{key}': expected a non-negative integer, found {v}"
        ))
    })
}

fn as_u32(key: &str, v: &Value) -> Result<u32, UsageError> {
    u32::try_from(as_u64(key, v)?)
        .map_err(|_| usage(format!("key '{key}': value {v} is too large")))
}

/// Strict parse of a flat JSON object. Missing keys take defaults.
pub fn parse_config_str(text: &str) -> Result<RunConfig, UsageError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| usage(format!("malformed JSON config: {e}")))?;
    let map = match value {
        Value::Object(m) => m,
        other => {
            return Err(usage(format!(
                "config must be a JSON object, found {other}"
            )))
        }
    };
    config_from_map(&map)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig, UsageError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_str(&text)
}

fn config_from_map(map: &Map<String, Value>) -> Result<RunConfig, UsageError> {
    if let Some(key) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(usage(format!("unknown key '{key}'")));
    }
    let command = match map.get("command") {
        Some(v) => as_str("command", v)?.parse()?,
        None => return Err(usage("missing key 'command'")),
    };
    let mut cfg = RunConfig::new(command);
    for (key, v) in map {
        match key.as_str() {
            "command" => {}
            "surface" => cfg.surface = as_str(key, v)?.parse()?,
            "resolution" => cfg.resolution = Some(as_u32(key, v)?),
            "tolerances" => {
                let obj = v.as_object().ok_or_else(|| {
                    usage(format!("key 'tolerances': expected an object, found {v}"))
                })?;
                for (name, t) in obj {
                    cfg.tolerances
                        .insert(name.clone(), as_f64(&format!("tolerances.{name}"), t)?);
                }
            }
            "output_dir" => cfg.output_dir = Some(PathBuf::from(as_str(key, v)?)),
            "radius" => cfg.radius = Some(as_f64(key, v)?),
            "dimension" => cfg.dimension = Some(as_u32(key, v)?),
            "modes" => {
                let arr = v
                    .as_array()
                    .ok_or_else(|| usage(format!("key 'modes': expected an array, found {v}")))?;
                cfg.modes = Some(
                    arr.iter()
                        .map(|m| as_u32(key, m))
                        .collect::<Result<_, _>>()?,
                );
            }
            "count" => cfg.count = Some(as_u64(key, v)? as usize),
            "truncation" => cfg.truncation = Some(as_f64(key, v)?),
            "t_end" => cfg.t_end = Some(as_f64(key, v)?),
            "seed" => cfg.seed = Some(as_u64(key, v)?),
            "base_point" => {
                let arr = v.as_array().filter(|a| a.len() == 3).ok_or_else(|| {
                    usage(format!(
                        "key 'base_point': expected an array of 3 numbers, found {v}"
                    ))
                })?;
                let mut p = [0.0; 3];
                for (slot, x) in p.iter_mut().zip(arr) {
                    *slot = as_f64(key, x)?;
                }
                cfg.base_point = Some(p);
            }
            _ => unreachable!("keys are checked above"),
        }
    }
    Ok(cfg)
}

/// Parses `name=value`.
pub fn parse_tolerance_flag(s: &str) -> Result<(String, f64), UsageError> {
    let (name, value) = s.split_once('=').ok_or_else(|| {
        usage(format!(
            "tolerance override '{s}' must look like name=value"
        ))
    })?;
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| usage(format!("tolerance '{name}': invalid number '{value}'")))?;
    Ok((name.trim().to_string(), v))
}
