//! Design-matrix construction: outcome extraction, regressor terms,
//! spline dummies, and dense integer codes for fixed-effect and cluster
//! groupings.

use std::collections::HashMap;

use super::spec::{EstimationSpec, Field, FeFactor, FeGroup, OutcomeVar, SplineBand, Term};
use super::EstimationError;
use crate::panel::PanelObservation;

/// Inner distance band boundary (km): destinations at or inside it are
/// the near band.
pub const NEAR_BAND_KM: f64 = 3970.0;
/// Outer boundary (km) of the middle band; beyond it is the omitted far
/// band.
pub const MID_BAND_KM: f64 = 9283.0;

fn band(obs: &PanelObservation) -> Option<SplineBand> {
    let distance = obs.ln_distance.exp();
    if distance <= NEAR_BAND_KM {
        Some(SplineBand::Near)
    } else if distance <= MID_BAND_KM {
        Some(SplineBand::Mid)
    } else {
        None
    }
}

/// Numeric value of one stored field; optional value columns error when
/// absent.
pub fn field_value(obs: &PanelObservation, field: Field) -> Result<f64, EstimationError> {
    let missing = |name: &str| EstimationError::MissingField { name: name.to_string() };
    let v = match field {
        Field::NShipments => obs.n_shipments as f64,
        Field::LnPerShipmentCost => obs.ln_pershipment_cost,
        Field::LnDistance => obs.ln_distance,
        Field::LnGdp => obs.ln_gdp,
        Field::LnGdpPc => obs.ln_gdp_pc,
        Field::Island => f64::from(u8::from(obs.island)),
        Field::Landlocked => f64::from(u8::from(obs.landlocked)),
        Field::CommonReligion => obs.common_religion,
        Field::CommonLegal => f64::from(u8::from(obs.common_legal)),
        Field::Colony => f64::from(u8::from(obs.colony)),
        Field::ImporterRate => obs.importer_rate,
        Field::ExporterRate => obs.exporter_rate,
        Field::LnPerShipmentValue => {
            obs.ln_pershipment_value.ok_or_else(|| missing("ln_pershipment_value"))?
        }
        Field::LnExportValue => obs.ln_export_value.ok_or_else(|| missing("ln_export_value"))?,
        Field::LnExportWeight => obs.ln_export_weight.ok_or_else(|| missing("ln_export_weight"))?,
    };
    Ok(v)
}

/// Evaluates one regressor term on one observation.
pub fn term_value(obs: &PanelObservation, term: &Term) -> Result<f64, EstimationError> {
    let v = match term {
        Term::Intercept => 1.0,
        Term::Raw(field) => field_value(obs, *field)?,
        Term::Log(field) => {
            let v = field_value(obs, *field)?;
            if v <= 0.0 {
                return Err(EstimationError::NonPositiveUnderLog {
                    field: field.name().to_string(),
                    row: obs.key(),
                });
            }
            v.ln()
        }
        Term::SplineDummy(which) => f64::from(u8::from(band(obs) == Some(*which))),
        Term::SplineLogDistance(which) => {
            if band(obs) == Some(*which) {
                obs.ln_distance
            } else {
                0.0
            }
        }
        Term::Interaction(a, b) => field_value(obs, *a)? * field_value(obs, *b)?,
    };
    Ok(v)
}

fn outcome_value(obs: &PanelObservation, outcome: OutcomeVar) -> Result<f64, EstimationError> {
    match outcome {
        OutcomeVar::Count => Ok(obs.n_shipments as f64),
        OutcomeVar::LnCount => {
            if obs.n_shipments == 0 {
                Err(EstimationError::NonPositiveUnderLog {
                    field: "n_shipments".to_string(),
                    row: obs.key(),
                })
            } else {
                Ok((obs.n_shipments as f64).ln())
            }
        }
        OutcomeVar::LnPerShipmentValue => field_value(obs, Field::LnPerShipmentValue),
        OutcomeVar::LnExportValue => field_value(obs, Field::LnExportValue),
        OutcomeVar::LnExportWeight => field_value(obs, Field::LnExportWeight),
    }
}

fn factor_key(obs: &PanelObservation, factor: FeFactor) -> String {
    match factor {
        FeFactor::Firm => obs.firm.clone(),
        FeFactor::Hs8 => obs.product.clone(),
        FeFactor::Hs4 => obs.product.chars().take(4).collect(),
        FeFactor::Hs2 => obs.product.chars().take(2).collect(),
        FeFactor::Mode => obs.mode.to_string(),
        FeFactor::Destination => obs.destination.clone(),
        FeFactor::Year => obs.year.to_string(),
    }
}

/// Group key of one observation under a grouping spec.
pub fn group_key(obs: &PanelObservation, group: &FeGroup) -> String {
    let parts: Vec<String> = group.0.iter().map(|f| factor_key(obs, *f)).collect();
    parts.join("|")
}

/// Numeric design ready for fitting. Codes are dense integers in
/// first-appearance order, so construction is deterministic for a
/// canonically ordered panel.
#[derive(Clone, Debug)]
pub struct Design {
    pub y: Vec<f64>,
    /// Column-major regressor values, parallel to `terms`.
    pub cols: Vec<Vec<f64>>,
    pub terms: Vec<Term>,
    pub names: Vec<String>,
    /// Per fixed-effect level, one dense code per row.
    pub fe: Vec<Vec<u32>>,
    pub fe_names: Vec<String>,
    pub cluster: Vec<u32>,
    pub cluster_name: String,
    pub n_clusters: usize,
}

struct Interner {
    map: HashMap<String, u32>,
}

impl Interner {
    fn new() -> Self {
        Self { map: HashMap::new() }
    }

    fn code(&mut self, key: String) -> u32 {
        let next = self.map.len() as u32;
        *self.map.entry(key).or_insert(next)
    }
}

/// Builds the design for `spec` over `panel`.
///
/// An intercept column is prepended exactly when no fixed effects are
/// absorbed (any absorbed level spans the constant).
pub fn build_design(
    panel: &[PanelObservation],
    spec: &EstimationSpec,
) -> Result<Design, EstimationError> {
    spec.validate()?;
    let mut terms: Vec<Term> = Vec::with_capacity(spec.regressors.len() + 1);
    if spec.fe_levels.is_empty() {
        terms.push(Term::Intercept);
    }
    terms.extend(spec.regressors.iter().copied());

    let n = panel.len();
    let mut y = Vec::with_capacity(n);
    let mut cols: Vec<Vec<f64>> = terms.iter().map(|_| Vec::with_capacity(n)).collect();
    let mut fe: Vec<Vec<u32>> = spec.fe_levels.iter().map(|_| Vec::with_capacity(n)).collect();
    let mut fe_interners: Vec<Interner> = spec.fe_levels.iter().map(|_| Interner::new()).collect();
    let mut cluster = Vec::with_capacity(n);
    let mut cluster_interner = Interner::new();

    for obs in panel {
        y.push(outcome_value(obs, spec.outcome)?);
        for (slot, term) in cols.iter_mut().zip(&terms) {
            let v = term_value(obs, term)?;
            if !v.is_finite() {
                return Err(EstimationError::Numeric {
                    message: format!("term {term} is not finite on row {}", obs.key()),
                });
            }
            slot.push(v);
        }
        for ((level, codes), interner) in
            spec.fe_levels.iter().zip(fe.iter_mut()).zip(fe_interners.iter_mut())
        {
            codes.push(interner.code(group_key(obs, level)));
        }
        cluster.push(cluster_interner.code(group_key(obs, &spec.cluster)));
    }

    Ok(Design {
        y,
        names: terms.iter().map(|t| t.to_string()).collect(),
        terms,
        cols,
        fe,
        fe_names: spec.fe_levels.iter().map(|g| g.to_string()).collect(),
        cluster,
        cluster_name: spec.cluster.to_string(),
        n_clusters: cluster_interner.map.len(),
    })
}
