//! Named material/frequency presets and the key=value custom format.
//!
//! Permittivity and permeability are vacuum-relative; the angular frequency is
//! normalized so that `ω·sqrt(μ0·ε0) = κ0`. Wavenumbers are the rounded table
//! values, stored verbatim.

use std::fmt;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::symbols::{MediaPair, Medium, SymbolError};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{name}`; valid names: {}", valid.join(", "))]
    Unknown { name: String, valid: Vec<&'static str> },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error(transparent)]
    Medium(#[from] SymbolError),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Material {
    Teflon,
    Ferrite,
    Custom,
}

impl Material {
    /// `(ε_r, μ_r)` of the scatterer.
    pub fn relative_parameters(self) -> Option<(f64, f64)> {
        match self {
            Material::Teflon => Some((2.1, 1.0)),
            Material::Ferrite => Some((2.5, 1.6)),
            Material::Custom => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    #[serde(rename = "LF")]
    Lf,
    #[serde(rename = "HF")]
    Hf,
    #[serde(rename = "VHF")]
    Vhf,
}

impl Regime {
    pub fn frequency_hz(self) -> f64 {
        match self {
            Regime::Lf => 50e6,
            Regime::Hf => 300e6,
            Regime::Vhf => 10e9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub material: Material,
    pub regime: Option<Regime>,
    pub media: MediaPair,
    pub frequency_hz: Option<f64>,
    pub wavelength_m: Option<f64>,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (kappa0 = {}, kappa1 = {})",
            self.name, self.media.outer.kappa, self.media.inner.kappa
        )
    }
}

/// `(name, material, regime, κ0, κ1)`.
const PRESETS: [(&str, Material, Regime, f64, f64); 6] = [
    ("teflon-lf", Material::Teflon, Regime::Lf, 1.05, 1.52),
    ("teflon-hf", Material::Teflon, Regime::Hf, 6.29, 9.11),
    ("teflon-vhf", Material::Teflon, Regime::Vhf, 210.0, 304.0),
    ("ferrite-lf", Material::Ferrite, Regime::Lf, 1.05, 2.09),
    ("ferrite-hf", Material::Ferrite, Regime::Hf, 6.29, 12.6),
    ("ferrite-vhf", Material::Ferrite, Regime::Vhf, 210.0, 419.0),
];

pub fn scenario_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}

pub fn all_scenarios() -> Vec<Scenario> {
    PRESETS.iter().map(|p| preset(*p)).collect()
}

fn preset((name, material, regime, kappa0, kappa1): (&str, Material, Regime, f64, f64)) -> Scenario {
    let (eps_r, mu_r) = material.relative_parameters().expect("preset material");
    let omega = kappa0;
    let outer = Medium::with_wavenumber(1.0, 1.0, omega, kappa0).expect("valid preset");
    let inner = Medium::with_wavenumber(eps_r, mu_r, omega, kappa1).expect("valid preset");
    let frequency = regime.frequency_hz();
    Scenario {
        name: name.to_string(),
        material,
        regime: Some(regime),
        media: MediaPair { outer, inner },
        frequency_hz: Some(frequency),
        wavelength_m: Some(SPEED_OF_LIGHT / frequency),
    }
}

pub fn get_scenario(name: &str) -> Result<Scenario, ScenarioError> {
    let key = name.trim().to_ascii_lowercase();
    PRESETS
        .iter()
        .find(|p| p.0 == key)
        .map(|p| preset(*p))
        .ok_or_else(|| ScenarioError::Unknown {
            name: name.to_string(),
            valid: scenario_names(),
        })
}

/// Parses `key = value` lines with keys eps0, mu0, eps1, mu1, kappa0, kappa1.
/// Blank lines and `#` comments are ignored.
pub fn parse_custom(text: &str) -> Result<Scenario, ScenarioError> {
    const KEYS: [&str; 6] = ["eps0", "mu0", "eps1", "mu1", "kappa0", "kappa1"];
    let mut values: [Option<f64>; 6] = [None; 6];
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| ScenarioError::Parse { line: idx + 1, message };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected key=value, got `{line}`")))?;
        let key = key.trim();
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| parse_err(format!("unknown key `{key}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("`{}` is not a number", value.trim())))?;
        values[slot] = Some(value);
    }
    let get = |i: usize| values[i].ok_or(ScenarioError::MissingKey(KEYS[i]));
    let (eps0, mu0, eps1, mu1, kappa0, kappa1) = (get(0)?, get(1)?, get(2)?, get(3)?, get(4)?, get(5)?);
    let omega = kappa0 / (eps0 * mu0).sqrt();
    let outer = Medium::with_wavenumber(eps0, mu0, omega, kappa0)?;
    let inner = Medium::with_wavenumber(eps1, mu1, omega, kappa1)?;
    Ok(Scenario {
        name: "custom".to_string(),
        material: Material::Custom,
        regime: None,
        media: MediaPair::new(outer, inner)?,
        frequency_hz: None,
        wavelength_m: None,
    })
}

pub fn load_custom(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_custom(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        let s = get_scenario("teflon-lf").unwrap();
        assert_eq!(s.media.outer.kappa, 1.05);
        assert_eq!(s.media.inner.kappa, 1.52);
        assert_eq!(s.frequency_hz, Some(50e6));
        let s = get_scenario("ferrite-vhf").unwrap();
        assert_eq!((s.media.outer.kappa, s.media.inner.kappa), (210.0, 419.0));
        assert!((s.wavelength_m.unwrap() - 0.03).abs() < 1e-3);
    }

    #[test]
    fn unknown_name_lists_presets() {
        let err = get_scenario("teflon-xl").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("teflon-lf") && msg.contains("ferrite-vhf"), "{msg}");
    }

    #[test]
    fn wavenumber_ratio_matches_refractive_index() {
        for s in all_scenarios() {
            let (eps_r, mu_r) = s.material.relative_parameters().unwrap();
            let ratio = s.media.inner.kappa / s.media.outer.kappa;
            let index = (eps_r * mu_r).sqrt();
            assert!((ratio / index - 1.0).abs() < 0.02, "{}: {ratio} vs {index}", s.name);
        }
    }

    #[test]
    fn custom_file() {
        let s = parse_custom("# equal media\neps0=1\nmu0=1\neps1 = 1\nmu1=1\nkappa0=2\nkappa1=2\n").unwrap();
        assert_eq!(s.media.outer, s.media.inner);
        assert_eq!(s.media.outer.omega, 2.0);
        assert!(matches!(parse_custom("eps0=1"), Err(ScenarioError::MissingKey("mu0"))));
        assert!(matches!(parse_custom("eps0 1"), Err(ScenarioError::Parse { line: 1, .. })));
        assert!(matches!(parse_custom("foo=1"), Err(ScenarioError::Parse { .. })));
        assert!(parse_custom("eps0=1\nmu0=1\neps1=-1\nmu1=1\nkappa0=1\nkappa1=1").is_err());
    }
}
