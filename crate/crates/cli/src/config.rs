//! TOML run configuration: one structured file with per-command
//! sections; command-line flags override individual keys.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;

use shipfreq_core::estimation::{EstimationSpec, FeGroup, Term};
use shipfreq_core::model::Variant;
use shipfreq_core::panel::{
    default_planted_betas, CellCounts, CountryCalibration, DgpConfig, DgpMode, StructuralConfig,
};
use shipfreq_core::statics::SweepGrid;
use shipfreq_core::Params;

use crate::AppError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub model: Option<ModelSection>,
    pub statics: Option<StaticsSection>,
    pub dgp: Option<DgpSection>,
    pub estimation: Option<EstimationSection>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, AppError> {
        toml::from_str(text).map_err(|e| AppError::validation(format!("config parse error: {e}")))
    }

    pub fn require_model(&self) -> Result<&ModelSection, AppError> {
        self.model
            .as_ref()
            .ok_or_else(|| AppError::validation("config is missing the [model] section"))
    }

    pub fn require_dgp(&self) -> Result<&DgpSection, AppError> {
        self.dgp
            .as_ref()
            .ok_or_else(|| AppError::validation("config is missing the [dgp] section"))
    }

    pub fn require_estimation(&self) -> Result<&EstimationSection, AppError> {
        self.estimation
            .as_ref()
            .ok_or_else(|| AppError::validation("config is missing the [estimation] section"))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub c: f64,
    pub q: f64,
    pub f: f64,
    pub delta: f64,
    pub r: f64,
    pub r1: f64,
    pub variant: Option<String>,
}

impl ModelSection {
    pub fn params(&self) -> Result<Params, AppError> {
        Params::new(self.c, self.q, self.f, self.delta, self.r, self.r1)
            .map_err(AppError::from_model)
    }

    pub fn variant(&self) -> Result<Variant, AppError> {
        match self.variant.as_deref() {
            None | Some("baseline") => Ok(Variant::Baseline),
            Some("upfront") => Ok(Variant::UpfrontFixedCost),
            Some(other) => Err(AppError::validation(format!(
                "unknown variant `{other}` (expected baseline or upfront)"
            ))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticsSection {
    pub draws: Option<u32>,
    pub c: Option<[f64; 2]>,
    pub q: Option<[f64; 2]>,
    pub f: Option<[f64; 2]>,
    pub delta: Option<[f64; 2]>,
    pub r: Option<[f64; 2]>,
    pub r1: Option<[f64; 2]>,
}

impl StaticsSection {
    pub fn grid(&self) -> SweepGrid {
        let mut grid = SweepGrid::default();
        let apply = |slot: &mut (f64, f64), range: &Option<[f64; 2]>| {
            if let Some([lo, hi]) = range {
                *slot = (*lo, *hi);
            }
        };
        apply(&mut grid.c, &self.c);
        apply(&mut grid.q, &self.q);
        apply(&mut grid.f, &self.f);
        apply(&mut grid.delta, &self.delta);
        apply(&mut grid.r, &self.r);
        apply(&mut grid.r1, &self.r1);
        grid
    }

    pub fn draws(&self) -> u32 {
        self.draws.unwrap_or(1000)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpSection {
    pub mode: Option<String>,
    pub firms: Option<u32>,
    pub products: Option<u32>,
    pub destinations: Option<u32>,
    pub years: Option<u32>,
    pub start_year: Option<i32>,
    pub intercept: Option<f64>,
    pub distance_gdp_correlation: Option<f64>,
    pub exporter_rate_range: Option<[f64; 2]>,
    /// Term string -> planted coefficient; defaults to the headline plant.
    pub betas: Option<BTreeMap<String, f64>>,
    /// Grouping string -> standard deviation of planted effects.
    pub fixed_effects: Option<BTreeMap<String, f64>>,
    pub structural: Option<StructuralSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuralSection {
    pub c: Option<f64>,
    pub q: Option<f64>,
    pub delta: Option<f64>,
    pub f_scale: Option<f64>,
    pub poisson_jitter: Option<bool>,
}

impl DgpSection {
    pub fn to_config(&self, seed: u64) -> Result<DgpConfig, AppError> {
        let defaults = DgpConfig::default();
        let mode = match self.mode.as_deref() {
            None | Some("reduced_form") => DgpMode::ReducedForm,
            Some("structural") => DgpMode::Structural,
            Some(other) => {
                return Err(AppError::validation(format!(
                    "unknown dgp mode `{other}` (expected reduced_form or structural)"
                )))
            }
        };
        let betas = match &self.betas {
            None => default_planted_betas(),
            Some(map) => {
                let mut out = Vec::with_capacity(map.len());
                for (text, value) in map {
                    let term: Term = text
                        .parse()
                        .map_err(|e| AppError::validation(format!("dgp beta key: {e}")))?;
                    out.push((term, *value));
                }
                out
            }
        };
        let fe_sd = match &self.fixed_effects {
            None => defaults.fe_sd.clone(),
            Some(map) => {
                let mut out = Vec::with_capacity(map.len());
                for (text, sd) in map {
                    let group: FeGroup = text
                        .parse()
                        .map_err(|e| AppError::validation(format!("dgp fixed-effect key: {e}")))?;
                    out.push((group, *sd));
                }
                out
            }
        };
        let sd = self.structural.as_ref();
        let structural_defaults = StructuralConfig::default();
        Ok(DgpConfig {
            mode,
            intercept: self.intercept.unwrap_or(defaults.intercept),
            betas,
            fe_sd,
            seed,
            counts: CellCounts {
                firms: self.firms.unwrap_or(defaults.counts.firms),
                products: self.products.unwrap_or(defaults.counts.products),
                destinations: self.destinations.unwrap_or(defaults.counts.destinations),
                years: self.years.unwrap_or(defaults.counts.years),
            },
            start_year: self.start_year.unwrap_or(defaults.start_year),
            exporter_rate_range: self
                .exporter_rate_range
                .map(|[lo, hi]| (lo, hi))
                .unwrap_or(defaults.exporter_rate_range),
            calibration: CountryCalibration::default(),
            distance_gdp_correlation: self
                .distance_gdp_correlation
                .unwrap_or(defaults.distance_gdp_correlation),
            structural: StructuralConfig {
                c: sd.and_then(|s| s.c).unwrap_or(structural_defaults.c),
                q: sd.and_then(|s| s.q).unwrap_or(structural_defaults.q),
                delta: sd.and_then(|s| s.delta).unwrap_or(structural_defaults.delta),
                f_scale: sd.and_then(|s| s.f_scale).unwrap_or(structural_defaults.f_scale),
                poisson_jitter: sd
                    .and_then(|s| s.poisson_jitter)
                    .unwrap_or(structural_defaults.poisson_jitter),
            },
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationSection {
    /// Panel CSV path; required by `estimate`, ignored by `roundtrip`.
    pub panel: Option<PathBuf>,
    pub outcome: Option<String>,
    pub estimator: Option<String>,
    pub regressors: Option<Vec<String>>,
    pub fixed_effects: Option<Vec<String>>,
    pub cluster: Option<String>,
}

impl EstimationSection {
    /// Resolves the regression spec; `fallback_regressors` supplies the
    /// planted terms when the section leaves regressors implicit.
    pub fn to_spec(&self, fallback_regressors: Option<Vec<Term>>) -> Result<EstimationSpec, AppError> {
        let outcome = self
            .outcome
            .as_deref()
            .unwrap_or("count")
            .parse()
            .map_err(AppError::from_estimation)?;
        let estimator = self
            .estimator
            .as_deref()
            .unwrap_or("ppml")
            .parse()
            .map_err(AppError::from_estimation)?;
        let regressors = match (&self.regressors, fallback_regressors) {
            (Some(texts), _) => texts
                .iter()
                .map(|t| t.parse().map_err(AppError::from_estimation))
                .collect::<Result<Vec<Term>, _>>()?,
            (None, Some(fallback)) => fallback,
            (None, None) => {
                return Err(AppError::validation(
                    "estimation section must list regressors",
                ))
            }
        };
        let fe_levels = self
            .fixed_effects
            .as_ref()
            .map(|groups| {
                groups
                    .iter()
                    .map(|g| g.parse().map_err(AppError::from_estimation))
                    .collect::<Result<Vec<FeGroup>, _>>()
            })
            .transpose()?
            .unwrap_or_else(|| {
                vec!["firm".parse().unwrap(), "hs8*mode*year".parse().unwrap()]
            });
        let cluster = self
            .cluster
            .as_deref()
            .unwrap_or("firm")
            .parse()
            .map_err(AppError::from_estimation)?;
        let spec = EstimationSpec { outcome, regressors, fe_levels, cluster, estimator };
        spec.validate().map_err(AppError::from_estimation)?;
        Ok(spec)
    }
}
