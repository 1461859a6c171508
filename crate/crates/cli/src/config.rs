//! Strict JSON scenario configs. Every field is optional at parse time;
//! each command checks the ones it needs and rejects the ones it ignores.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nlmetro_core::verify::{Fault, Scenario};
use nlmetro_core::{Couplings, HamiltonianSpec, LindbladSpec, ProbeSpec, TimescaleReport};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_range: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lindblad: Option<LindbladSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
    /// Reduced two-level probe in place of a register.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_level: Option<TwoLevelConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<TimeGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputPaths>,
    /// `[n_lo, n_hi]`, inclusive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenarios: Option<Vec<Scenario>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<CorpusChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<bool>,
    /// Test fixture: corrupts the closed-form rate table in `verify`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLevelConfig {
    /// `E_M − E_m`.
    pub eps: f64,
    /// `Σ_ν (λ_M^ν − λ_m^ν)²`.
    pub lambda_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeGrid {
    Values(Vec<f64>),
    Linspace {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        unit: TimeUnit,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    #[default]
    Absolute,
    TauD,
    TauZ,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusChoice {
    /// The twelve oracle-equivalence scenarios.
    #[default]
    Default,
    /// The larger bound-sandwich corpus.
    Sandwich,
}

/// 31 points over three decoherence times.
const DEFAULT_GRID: (f64, f64, usize) = (0.0, 3.0, 31);

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    fn present(&self) -> Vec<&'static str> {
        let flags = [
            ("n_sites", self.n_sites.is_some()),
            ("n_range", self.n_range.is_some()),
            ("hamiltonian", self.hamiltonian.is_some()),
            ("lindblad", self.lindblad.is_some()),
            ("probe", self.probe.is_some()),
            ("two_level", self.two_level.is_some()),
            ("x1", self.x1.is_some()),
            ("x2", self.x2.is_some()),
            ("hbar", self.hbar.is_some()),
            ("total_time", self.total_time.is_some()),
            ("repetitions", self.repetitions.is_some()),
            ("times", self.times.is_some()),
            ("output", self.output.is_some()),
            ("fit_window", self.fit_window.is_some()),
            ("scenarios", self.scenarios.is_some()),
            ("corpus", self.corpus.is_some()),
            ("spectrum", self.spectrum.is_some()),
            ("fault", self.fault.is_some()),
        ];
        flags.into_iter().filter(|f| f.1).map(|f| f.0).collect()
    }

    /// Fails on the first set field that `command` does not read.
    pub fn only(&self, command: &str, allowed: &[&str]) -> Result<()> {
        match self
            .present()
            .into_iter()
            .find(|f| *f != "output" && !allowed.contains(f))
        {
            Some(f) => Err(CliError::config(f, format!("not used by `{command}`"))),
            None => Ok(()),
        }
    }

    pub fn couplings(&self) -> Result<Couplings> {
        let x1 = require(self.x1, "x1")?;
        let x2 = require(self.x2, "x2")?;
        let hbar = self.hbar.unwrap_or(1.0);
        if !x1.is_finite() {
            return Err(CliError::config("x1", format!("must be finite, got {x1}")));
        }
        if !(x2 >= 0.0) || !x2.is_finite() {
            return Err(CliError::config(
                "x2",
                format!("must be finite and >= 0, got {x2}"),
            ));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(CliError::config(
                "hbar",
                format!("must be finite and positive, got {hbar}"),
            ));
        }
        Ok(Couplings { x1, x2, hbar })
    }

    pub fn single_n(&self) -> Result<usize> {
        if self.n_range.is_some() {
            return Err(CliError::config(
                "n_range",
                "this command analyses one register; set n_sites",
            ));
        }
        let n = require(self.n_sites, "n_sites")?;
        if n == 0 {
            return Err(CliError::config("n_sites", "must be at least 1"));
        }
        Ok(n)
    }

    /// `n_range`, or `[n_sites]`, strictly increasing with at least
    /// `min_len` entries.
    pub fn n_list(&self, min_len: usize) -> Result<Vec<usize>> {
        let (field, ns) = match (&self.n_range, self.n_sites) {
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "n_sites",
                    "give n_sites or n_range, not both",
                ))
            }
            (Some(r), None) => ("n_range", r.clone()),
            (None, Some(n)) => ("n_sites", vec![n]),
            (None, None) => return Err(CliError::config("n_range", "required")),
        };
        if ns.len() < min_len {
            return Err(CliError::config(
                "n_range",
                format!("needs at least {min_len} entries, got {}", ns.len()),
            ));
        }
        if ns.contains(&0) {
            return Err(CliError::config(field, "site counts must be at least 1"));
        }
        if ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::config(
                field,
                "site counts must be strictly increasing",
            ));
        }
        Ok(ns)
    }

    pub fn total_time(&self) -> Result<f64> {
        let t = self.total_time.unwrap_or(1.0);
        if !(t > 0.0) || !t.is_finite() {
            return Err(CliError::config(
                "total_time",
                format!("must be finite and positive, got {t}"),
            ));
        }
        Ok(t)
    }

    pub fn repetitions(&self) -> Result<Option<f64>> {
        match self.repetitions {
            Some(r) if !(r > 0.0) || !r.is_finite() => Err(CliError::config(
                "repetitions",
                format!("must be finite and positive, got {r}"),
            )),
            other => Ok(other),
        }
    }

    pub fn fit_window(&self) -> Result<Option<(f64, f64)>> {
        match self.fit_window {
            None => Ok(None),
            Some([lo, hi]) if lo > 0.0 && hi > lo => Ok(Some((lo, hi))),
            Some([lo, hi]) => Err(CliError::config(
                "fit_window",
                format!("need 0 < lo < hi, got [{lo}, {hi}]"),
            )),
        }
    }

    /// Sample times; relative units are resolved against `ts`, which is
    /// only consulted when needed.
    pub fn resolve_times(&self, ts: &nlmetro_core::Result<TimescaleReport>) -> Result<Vec<f64>> {
        let scale = |unit: TimeUnit| -> Result<f64> {
            let ts = ts.as_ref().map_err(|e| CliError::Core(e.clone()))?;
            let tau = match unit {
                TimeUnit::Absolute => 1.0,
                TimeUnit::TauD => ts.tau_d,
                TimeUnit::TauZ => ts.tau_z,
            };
            if !tau.is_finite() {
                return Err(CliError::config(
                    "times",
                    "τ_D is infinite (x2 = 0); use unit tau_z or absolute",
                ));
            }
            Ok(tau)
        };
        let times = match &self.times {
            Some(TimeGrid::Values(v)) => v.clone(),
            Some(TimeGrid::Linspace {
                start,
                stop,
                count,
                unit,
            }) => {
                let (start, stop, count, unit) = (*start, *stop, *count, *unit);
                if count == 0 || !(start >= 0.0) || !(stop >= start) || !stop.is_finite() {
                    return Err(CliError::config(
                        "times",
                        format!("linspace needs 0 <= start <= stop and count >= 1, got {start}, {stop}, {count}"),
                    ));
                }
                let tau = if unit == TimeUnit::Absolute {
                    1.0
                } else {
                    scale(unit)?
                };
                linspace(start * tau, stop * tau, count)
            }
            None => {
                let (start, stop, count) = DEFAULT_GRID;
                let tau = match scale(TimeUnit::TauD) {
                    Ok(tau) => tau,
                    Err(CliError::Config { .. }) => scale(TimeUnit::TauZ)?,
                    Err(e) => return Err(e),
                };
                linspace(start * tau, stop * tau, count)
            }
        };
        if times.is_empty() || times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(CliError::config(
                "times",
                "need a nonempty list of finite t >= 0",
            ));
        }
        Ok(times)
    }
}

pub fn require<T: Clone>(value: Option<T>, field: &str) -> Result<T> {
    value.ok_or_else(|| CliError::config(field, "required"))
}

fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![a];
    }
    let step = (b - a) / (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i + 1 == count {
                b
            } else {
                a + step * i as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err =
            serde_json::from_str::<ScenarioConfig>(r#"{"n_sites": 3, "nsites": 4}"#).unwrap_err();
        assert!(err.to_string().contains("nsites"), "{err}");
        let err = serde_json::from_str::<ScenarioConfig>(
            r#"{"times": {"linspace": {"start": 0, "stop": 1, "count": 2, "step": 1}}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("step"), "{err}");
    }

    #[test]
    fn missing_couplings_name_the_field() {
        let cfg = ScenarioConfig {
            x1: Some(1.0),
            ..Default::default()
        };
        match cfg.couplings() {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "x2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn linspace_hits_both_ends() {
        let v = linspace(0.0, 0.3, 4);
        assert_eq!(v.len(), 4);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[3], 0.3);
    }

    #[test]
    fn relative_grid_scales_by_tau() {
        let cfg = ScenarioConfig {
            times: Some(TimeGrid::Linspace {
                start: 0.0,
                stop: 2.0,
                count: 3,
                unit: TimeUnit::TauD,
            }),
            ..Default::default()
        };
        let ts = Ok(TimescaleReport {
            tau_z: 0.5,
            tau_d: 4.0,
            variance_h: 1.0,
            sum_variance_l: 1.0,
        });
        assert_eq!(cfg.resolve_times(&ts).unwrap(), vec![0.0, 4.0, 8.0]);
    }

    #[test]
    fn default_grid_falls_back_to_tau_z_without_noise() {
        let cfg = ScenarioConfig::default();
        let ts = Ok(TimescaleReport {
            tau_z: 0.5,
            tau_d: f64::INFINITY,
            variance_h: 1.0,
            sum_variance_l: 0.0,
        });
        let t = cfg.resolve_times(&ts).unwrap();
        assert_eq!(t.last().copied(), Some(1.5));
    }
}
