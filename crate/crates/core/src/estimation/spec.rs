//! Regression specification vocabulary: outcomes, regressor terms,
//! fixed-effect groupings, and the estimator choice.

use std::fmt;
use std::str::FromStr;

use super::EstimationError;

/// Numeric fields of a panel observation that can enter a regression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    NShipments,
    LnPerShipmentCost,
    LnDistance,
    LnGdp,
    LnGdpPc,
    Island,
    Landlocked,
    CommonReligion,
    CommonLegal,
    Colony,
    ImporterRate,
    ExporterRate,
    LnPerShipmentValue,
    LnExportValue,
    LnExportWeight,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::NShipments => "n_shipments",
            Field::LnPerShipmentCost => "ln_pershipment_cost",
            Field::LnDistance => "ln_distance",
            Field::LnGdp => "ln_gdp",
            Field::LnGdpPc => "ln_gdp_pc",
            Field::Island => "island",
            Field::Landlocked => "landlocked",
            Field::CommonReligion => "common_religion",
            Field::CommonLegal => "common_legal",
            Field::Colony => "colony",
            Field::ImporterRate => "importer_rate",
            Field::ExporterRate => "exporter_rate",
            Field::LnPerShipmentValue => "ln_pershipment_value",
            Field::LnExportValue => "ln_export_value",
            Field::LnExportWeight => "ln_export_weight",
        }
    }

    /// Whether the stored value is already a natural logarithm, which
    /// decides the elasticity conversion applied to its coefficient.
    pub fn is_log_scale(self) -> bool {
        matches!(
            self,
            Field::LnPerShipmentCost
                | Field::LnDistance
                | Field::LnGdp
                | Field::LnGdpPc
                | Field::LnPerShipmentValue
                | Field::LnExportValue
                | Field::LnExportWeight
        )
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Field {
    type Err = EstimationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let field = match s {
            "n_shipments" => Field::NShipments,
            "ln_pershipment_cost" => Field::LnPerShipmentCost,
            "ln_distance" => Field::LnDistance,
            "ln_gdp" => Field::LnGdp,
            "ln_gdp_pc" => Field::LnGdpPc,
            "island" => Field::Island,
            "landlocked" => Field::Landlocked,
            "common_religion" => Field::CommonReligion,
            "common_legal" => Field::CommonLegal,
            "colony" => Field::Colony,
            "importer_rate" => Field::ImporterRate,
            "exporter_rate" => Field::ExporterRate,
            "ln_pershipment_value" => Field::LnPerShipmentValue,
            "ln_export_value" => Field::LnExportValue,
            "ln_export_weight" => Field::LnExportWeight,
            other => {
                return Err(EstimationError::InvalidSpec {
                    message: format!("unknown field `{other}`"),
                })
            }
        };
        Ok(field)
    }
}

/// Distance band for the spline fix: `Near` covers destinations within
/// 3970 km, `Mid` the ring out to 9283 km; the far band is the omitted
/// category.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SplineBand {
    Near,
    Mid,
}

/// One regressor term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    /// Constant column; added automatically when no fixed effects absorb it.
    Intercept,
    /// A field as stored.
    Raw(Field),
    /// Natural log of a stored level field.
    Log(Field),
    /// Distance-band dummy.
    SplineDummy(SplineBand),
    /// Band dummy interacted with log distance.
    SplineLogDistance(SplineBand),
    /// Product of two stored fields.
    Interaction(Field, Field),
}

impl Term {
    /// Elasticities are reported per +10% for log-scale terms and per
    /// unit for level terms.
    pub fn is_log_scale(self) -> bool {
        match self {
            Term::Raw(f) => f.is_log_scale(),
            Term::Log(_) | Term::SplineLogDistance(_) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Intercept => f.write_str("intercept"),
            Term::Raw(field) => write!(f, "{field}"),
            Term::Log(field) => write!(f, "log({field})"),
            Term::SplineDummy(SplineBand::Near) => f.write_str("spline1"),
            Term::SplineDummy(SplineBand::Mid) => f.write_str("spline2"),
            Term::SplineLogDistance(SplineBand::Near) => f.write_str("spline1*ln_distance"),
            Term::SplineLogDistance(SplineBand::Mid) => f.write_str("spline2*ln_distance"),
            Term::Interaction(a, b) => write!(f, "{a}*{b}"),
        }
    }
}

impl FromStr for Term {
    type Err = EstimationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "intercept" {
            return Ok(Term::Intercept);
        }
        if s == "spline1" {
            return Ok(Term::SplineDummy(SplineBand::Near));
        }
        if s == "spline2" {
            return Ok(Term::SplineDummy(SplineBand::Mid));
        }
        if let Some(inner) = s.strip_prefix("log(").and_then(|r| r.strip_suffix(')')) {
            return Ok(Term::Log(inner.trim().parse()?));
        }
        if let Some((lhs, rhs)) = s.split_once('*') {
            let (lhs, rhs) = (lhs.trim(), rhs.trim());
            if rhs == "ln_distance" && (lhs == "spline1" || lhs == "spline2") {
                let band = if lhs == "spline1" { SplineBand::Near } else { SplineBand::Mid };
                return Ok(Term::SplineLogDistance(band));
            }
            return Ok(Term::Interaction(lhs.parse()?, rhs.parse()?));
        }
        Ok(Term::Raw(s.parse()?))
    }
}

/// Categorical factor a fixed-effect group or cluster key can be built
/// from. Product codes can be coarsened to their 4- or 2-digit prefixes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeFactor {
    Firm,
    Hs8,
    Hs4,
    Hs2,
    Mode,
    Destination,
    Year,
}

impl FeFactor {
    pub fn name(self) -> &'static str {
        match self {
            FeFactor::Firm => "firm",
            FeFactor::Hs8 => "hs8",
            FeFactor::Hs4 => "hs4",
            FeFactor::Hs2 => "hs2",
            FeFactor::Mode => "mode",
            FeFactor::Destination => "destination",
            FeFactor::Year => "year",
        }
    }
}

impl FromStr for FeFactor {
    type Err = EstimationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let factor = match s.trim() {
            "firm" => FeFactor::Firm,
            "product" | "hs8" => FeFactor::Hs8,
            "hs4" => FeFactor::Hs4,
            "hs2" => FeFactor::Hs2,
            "mode" => FeFactor::Mode,
            "destination" => FeFactor::Destination,
            "year" => FeFactor::Year,
            other => {
                return Err(EstimationError::InvalidSpec {
                    message: format!("unknown grouping factor `{other}`"),
                })
            }
        };
        Ok(factor)
    }
}

/// A grouping key: the interaction of one or more factors, e.g.
/// `firm` or `hs8*mode*year`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeGroup(pub Vec<FeFactor>);

impl fmt::Display for FeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|x| x.name()).collect();
        f.write_str(&names.join("*"))
    }
}

impl FromStr for FeGroup {
    type Err = EstimationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let factors = s
            .split('*')
            .map(FeFactor::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        if factors.is_empty() {
            return Err(EstimationError::InvalidSpec {
                message: "empty grouping key".to_string(),
            });
        }
        Ok(FeGroup(factors))
    }
}

/// Dependent variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeVar {
    Count,
    LnCount,
    LnPerShipmentValue,
    LnExportValue,
    LnExportWeight,
}

impl OutcomeVar {
    pub fn name(self) -> &'static str {
        match self {
            OutcomeVar::Count => "count",
            OutcomeVar::LnCount => "ln_count",
            OutcomeVar::LnPerShipmentValue => "ln_pershipment_value",
            OutcomeVar::LnExportValue => "ln_export_value",
            OutcomeVar::LnExportWeight => "ln_export_weight",
        }
    }
}

impl FromStr for OutcomeVar {
    type Err = EstimationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let outcome = match s.trim() {
            "count" => OutcomeVar::Count,
            "ln_count" => OutcomeVar::LnCount,
            "ln_pershipment_value" => OutcomeVar::LnPerShipmentValue,
            "ln_export_value" => OutcomeVar::LnExportValue,
            "ln_export_weight" => OutcomeVar::LnExportWeight,
            other => {
                return Err(EstimationError::InvalidSpec {
                    message: format!("unknown outcome `{other}`"),
                })
            }
        };
        Ok(outcome)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    Ols,
    Ppml,
}

impl FromStr for Estimator {
    type Err = EstimationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "ols" => Ok(Estimator::Ols),
            "ppml" => Ok(Estimator::Ppml),
            other => Err(EstimationError::InvalidSpec {
                message: format!("unknown estimator `{other}`"),
            }),
        }
    }
}

/// Full regression specification.
#[derive(Clone, Debug)]
pub struct EstimationSpec {
    pub outcome: OutcomeVar,
    pub regressors: Vec<Term>,
    pub fe_levels: Vec<FeGroup>,
    pub cluster: FeGroup,
    pub estimator: Estimator,
}

impl EstimationSpec {
    pub fn validate(&self) -> Result<(), EstimationError> {
        match self.estimator {
            Estimator::Ppml => {
                if self.outcome != OutcomeVar::Count {
                    return Err(EstimationError::InvalidSpec {
                        message: "ppml requires the count outcome".to_string(),
                    });
                }
            }
            Estimator::Ols => {
                if self.outcome == OutcomeVar::Count {
                    return Err(EstimationError::InvalidSpec {
                        message: "ols requires a log outcome".to_string(),
                    });
                }
            }
        }
        if self.regressors.contains(&Term::Intercept) {
            return Err(EstimationError::InvalidSpec {
                message: "the intercept is managed automatically; do not list it".to_string(),
            });
        }
        Ok(())
    }
}
