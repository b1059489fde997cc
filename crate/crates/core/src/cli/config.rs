use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureGrid;

/// Named acceptance thresholds, overridable with `--tol NAME=VALUE`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Exact matrix constructions: Fock sums, conjugation, Hermiticity.
    pub exact: f64,
    /// Mode-operator transformation relations under a beam splitter.
    pub transform: f64,
    /// Entangled-state and single-mode coherent quadratures.
    pub quadrature: f64,
    /// 4-D coherent-state quadrature.
    pub coherent4d: f64,
    /// Normal-ordered coherent matrix element vs conjugation.
    pub coherent_element: f64,
    pub noon: f64,
    pub cs_sv: f64,
    /// Relative error of closed-form Gaussian integrals.
    pub gaussian: f64,
    /// Relative error of the Hermite recurrence.
    pub hermite: f64,
    pub power_series: f64,
    pub coherent_norm: f64,
    /// Relative error of finite-difference sensitivities.
    pub sensitivity: f64,
    pub cutoff_convergence: f64,
    /// Imaginary residual and `[−1, 1]` overshoot of parity signals.
    pub reality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            exact: 1e-10,
            transform: 1e-9,
            quadrature: 1e-6,
            coherent4d: 1e-3,
            coherent_element: 1e-6,
            noon: 1e-8,
            cs_sv: 1e-4,
            gaussian: 1e-7,
            hermite: 1e-9,
            power_series: 1e-8,
            coherent_norm: 1e-12,
            sensitivity: 5e-3,
            cutoff_convergence: 1e-6,
            reality: 1e-8,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 14] = [
        "exact",
        "transform",
        "quadrature",
        "coherent4d",
        "coherent_element",
        "noon",
        "cs_sv",
        "gaussian",
        "hermite",
        "power_series",
        "coherent_norm",
        "sensitivity",
        "cutoff_convergence",
        "reality",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "exact" => &mut self.exact,
            "transform" => &mut self.transform,
            "quadrature" => &mut self.quadrature,
            "coherent4d" => &mut self.coherent4d,
            "coherent_element" => &mut self.coherent_element,
            "noon" => &mut self.noon,
            "cs_sv" => &mut self.cs_sv,
            "gaussian" => &mut self.gaussian,
            "hermite" => &mut self.hermite,
            "power_series" => &mut self.power_series,
            "coherent_norm" => &mut self.coherent_norm,
            "sensitivity" => &mut self.sensitivity,
            "cutoff_convergence" => &mut self.cutoff_convergence,
            "reality" => &mut self.reality,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Parse(format!(
                "tolerance {name}={value} must be positive"
            )));
        }
        let slot = self.slot(name).ok_or_else(|| {
            Error::Parse(format!(
                "unknown tolerance '{name}' (known: {})",
                Self::NAMES.join(", ")
            ))
        })?;
        *slot = value;
        Ok(())
    }

    pub fn with_overrides(overrides: &[TolOverride]) -> Result<Self> {
        let mut tol = Self::default();
        for o in overrides {
            tol.set(&o.name, o.value)?;
        }
        Ok(tol)
    }
}

/// One `NAME=VALUE` pair from the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct TolOverride {
    pub name: String,
    pub value: f64,
}

impl FromStr for TolOverride {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, value) = s
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("tolerance '{s}': expected NAME=VALUE")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("tolerance '{s}': bad value '{value}'")))?;
        let name = name.trim().to_string();
        // Validate eagerly so a typo is a usage error.
        Tolerances::default().set(&name, value)?;
        Ok(Self { name, value })
    }
}

/// `R,h` grid argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridArg {
    pub radius: f64,
    pub step: f64,
}

impl GridArg {
    pub fn plane(&self) -> Result<QuadratureGrid> {
        QuadratureGrid::plane(self.radius, self.step)
    }
}

impl FromStr for GridArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("grid '{s}': expected R,h with positive numbers"));
        let (r, h) = s.split_once(',').ok_or_else(bad)?;
        let radius: f64 = r.trim().parse().map_err(|_| bad())?;
        let step: f64 = h.trim().parse().map_err(|_| bad())?;
        QuadratureGrid::plane(radius, step)?;
        Ok(Self { radius, step })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub cutoff: Option<usize>,
    pub grid: Option<GridArg>,
    pub block: Option<usize>,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    /// Report wall time; disabled for byte-stable output.
    pub timing: bool,
    /// Bypass the 4-D quadrature cost guard.
    pub force: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cutoff: None,
            grid: None,
            block: None,
            tolerances: Tolerances::default(),
            out: None,
            format: None,
            timing: true,
            force: false,
        }
    }
}
