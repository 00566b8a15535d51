//! Coefficient-to-percent conversions and the estimates table.

use std::io::{self, Write};

use super::{EstimateResult, EstimationError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EffectKind {
    /// Percent change of the outcome for a +10% change of the regressor.
    PerTenPercent,
    /// Percent change of the outcome for a one-unit change of the regressor.
    PerUnit,
}

#[derive(Clone, Debug)]
pub struct EffectRow {
    pub term: String,
    pub coefficient: f64,
    pub se: f64,
    pub effect: f64,
    pub kind: EffectKind,
}

/// Percent response to a +10% regressor change for a log-scale
/// coefficient. Computed from |β| and signed by the coefficient, so
/// opposite coefficients report symmetric percentages.
pub fn log_effect_per_ten_percent(beta: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    beta.signum() * (1.1f64.powf(beta.abs()) - 1.0) * 100.0
}

/// Percent response per unit change for a level coefficient, same
/// signed-magnitude convention.
pub fn level_effect_per_unit(beta: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    beta.signum() * beta.abs().exp_m1() * 100.0
}

/// Converts fitted coefficients into percent effects. `selection` limits
/// the table to the named terms; unknown names error.
pub fn elasticity_effects(
    result: &EstimateResult,
    selection: Option<&[String]>,
) -> Result<Vec<EffectRow>, EstimationError> {
    let indices: Vec<usize> = match selection {
        None => (0..result.names.len()).collect(),
        Some(names) => names
            .iter()
            .map(|name| {
                result.names.iter().position(|n| n == name).ok_or_else(|| {
                    EstimationError::UnknownCoefficient { name: name.clone() }
                })
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    Ok(indices
        .into_iter()
        .map(|k| {
            let beta = result.coefficients[k];
            let (kind, effect) = if result.terms[k].is_log_scale() {
                (EffectKind::PerTenPercent, log_effect_per_ten_percent(beta))
            } else {
                (EffectKind::PerUnit, level_effect_per_unit(beta))
            };
            EffectRow {
                term: result.names[k].clone(),
                coefficient: beta,
                se: result.se[k],
                effect,
                kind,
            }
        })
        .collect())
}

/// Writes `term,coefficient,clustered_se,effect_per_10pct_or_unit` rows
/// for every retained term.
pub fn write_estimates_csv<W: Write>(result: &EstimateResult, mut out: W) -> io::Result<()> {
    let effects = elasticity_effects(result, None)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
    writeln!(out, "term,coefficient,clustered_se,effect_per_10pct_or_unit")?;
    for row in effects {
        writeln!(out, "{},{},{},{}", row.term, row.coefficient, row.se, row.effect)?;
    }
    Ok(())
}
