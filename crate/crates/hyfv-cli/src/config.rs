//! Study configuration: a flat key = value file plus command-line
//! overrides. Every field has a default; configs round-trip through
//! `to_config_string` / `parse`.

use hyfv::assembly::Scheme;
use hyfv::fluxes::CorrectionGradient;
use hyfv::space::FaceQuadrature;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFamily {
    M1,
    M2,
    M3,
    M4,
    M5,
    File,
}

impl MeshFamily {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "m1" => Ok(MeshFamily::M1),
            "m2" => Ok(MeshFamily::M2),
            "m3" => Ok(MeshFamily::M3),
            "m4" => Ok(MeshFamily::M4),
            "m5" => Ok(MeshFamily::M5),
            "file" => Ok(MeshFamily::File),
            _ => Err(format!(
                "unknown mesh family `{s}` (expected m1..m5 or file)"
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeshFamily::M1 => "m1",
            MeshFamily::M2 => "m2",
            MeshFamily::M3 => "m3",
            MeshFamily::M4 => "m4",
            MeshFamily::M5 => "m5",
            MeshFamily::File => "file",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemId {
    Smooth,
    BoundaryLayer,
    Hetero,
    Eps1d,
}

impl ProblemId {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "smooth" => Ok(ProblemId::Smooth),
            "boundary-layer" | "blayer" => Ok(ProblemId::BoundaryLayer),
            "hetero" | "hetero-rotation" => Ok(ProblemId::Hetero),
            "eps" | "eps-1d" => Ok(ProblemId::Eps1d),
            _ => Err(format!(
                "unknown problem `{s}` (expected smooth, boundary-layer, hetero or eps)"
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Smooth => "smooth",
            ProblemId::BoundaryLayer => "boundary-layer",
            ProblemId::Hetero => "hetero",
            ProblemId::Eps1d => "eps",
        }
    }
}

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub problem: ProblemId,
    /// Diffusion parameter of the 1D problem.
    pub eps: f64,
    /// Diffusion parameter of the boundary-layer problem.
    pub nu: f64,
    pub scheme: Scheme,
    pub mesh_family: MeshFamily,
    pub mesh_file: Option<PathBuf>,
    pub levels: (usize, usize),
    pub seed: u64,
    pub vanishing_diffusion: bool,
    pub quadrature: FaceQuadrature,
    pub gradient: CorrectionGradient,
    pub iterative: bool,
    pub tol: f64,
    pub out: PathBuf,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            problem: ProblemId::Smooth,
            eps: 2.0f64.powi(-10),
            nu: 1e-4,
            scheme: Scheme::Hybrid2,
            mesh_family: MeshFamily::M1,
            mesh_file: None,
            levels: (1, 4),
            seed: 2,
            vanishing_diffusion: false,
            quadrature: FaceQuadrature::Midpoint,
            gradient: CorrectionGradient::Consistent,
            iterative: false,
            tol: 1e-12,
            out: PathBuf::from("out"),
        }
    }
}

impl StudyConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut config = StudyConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            config
                .set(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "problem" => self.problem = ProblemId::parse(value)?,
            "eps" => self.eps = parse_f64(key, value)?,
            "nu" => self.nu = parse_f64(key, value)?,
            "scheme" => self.scheme = Scheme::parse(value).map_err(|e| e.to_string())?,
            "mesh_family" => self.mesh_family = MeshFamily::parse(value)?,
            "mesh_file" => self.mesh_file = Some(PathBuf::from(value)),
            "levels" => self.levels = parse_levels(value)?,
            "seed" => self.seed = value.parse().map_err(|_| format!("bad seed `{value}`"))?,
            "vanishing_diffusion" => self.vanishing_diffusion = parse_bool(key, value)?,
            "quadrature" => {
                self.quadrature = match value {
                    "midpoint" => FaceQuadrature::Midpoint,
                    "gauss2" => FaceQuadrature::Gauss2,
                    _ => return Err(format!("unknown quadrature `{value}`")),
                }
            }
            "gradient" => {
                self.gradient = match value {
                    "consistent" => CorrectionGradient::Consistent,
                    "stabilised" => CorrectionGradient::Stabilised,
                    _ => return Err(format!("unknown gradient `{value}`")),
                }
            }
            "solver" => {
                self.iterative = match value {
                    "direct" => false,
                    "iterative" => true,
                    _ => return Err(format!("unknown solver `{value}`")),
                }
            }
            "tol" => self.tol = parse_f64(key, value)?,
            "out" => self.out = PathBuf::from(value),
            _ => return Err(format!("unknown config key `{key}`")),
        }
        Ok(())
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        use fmt::Write;
        writeln!(s, "problem = {}", self.problem.name()).unwrap();
        writeln!(s, "eps = {:e}", self.eps).unwrap();
        writeln!(s, "nu = {:e}", self.nu).unwrap();
        writeln!(s, "scheme = {}", self.scheme.name()).unwrap();
        writeln!(s, "mesh_family = {}", self.mesh_family.name()).unwrap();
        if let Some(file) = &self.mesh_file {
            writeln!(s, "mesh_file = {}", file.display()).unwrap();
        }
        writeln!(s, "levels = {}..{}", self.levels.0, self.levels.1).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "vanishing_diffusion = {}", self.vanishing_diffusion).unwrap();
        writeln!(
            s,
            "quadrature = {}",
            if self.quadrature == FaceQuadrature::Gauss2 {
                "gauss2"
            } else {
                "midpoint"
            }
        )
        .unwrap();
        writeln!(
            s,
            "gradient = {}",
            if self.gradient == CorrectionGradient::Stabilised {
                "stabilised"
            } else {
                "consistent"
            }
        )
        .unwrap();
        writeln!(
            s,
            "solver = {}",
            if self.iterative {
                "iterative"
            } else {
                "direct"
            }
        )
        .unwrap();
        writeln!(s, "tol = {:e}", self.tol).unwrap();
        writeln!(s, "out = {}", self.out.display()).unwrap();
        s
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    value
        .parse()
        .map_err(|_| format!("bad numeric value `{value}` for {key}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("bad boolean `{value}` for {key}")),
    }
}

pub fn parse_levels(value: &str) -> Result<(usize, usize), String> {
    if let Some((a, b)) = value.split_once("..") {
        let lo = a.trim().parse().map_err(|_| format!("bad level `{a}`"))?;
        let hi = b.trim().parse().map_err(|_| format!("bad level `{b}`"))?;
        if lo == 0 || hi < lo {
            return Err(format!("bad level range `{value}`"));
        }
        Ok((lo, hi))
    } else {
        let level = value
            .trim()
            .parse()
            .map_err(|_| format!("bad level `{value}`"))?;
        if level == 0 {
            return Err("levels start at 1".into());
        }
        Ok((level, level))
    }
}
