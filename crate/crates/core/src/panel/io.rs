//! Lossless CSV round-tripping for panels and country profiles.
//!
//! Panel schema (UTF-8, header row, comma-separated):
//! `firm, product, mode, destination, year, n_shipments,
//! ln_pershipment_cost, ln_distance, ln_gdp, ln_gdp_pc, island,
//! landlocked, common_religion, common_legal, colony, importer_rate,
//! exporter_rate`, plus optional value columns (`ln_pershipment_value`,
//! `ln_export_value`, `ln_export_weight`) that appear only when at least
//! one row carries them. Floats are written in shortest round-trip form,
//! binaries as 0/1.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{CountryProfile, PanelObservation, TransportMode};

#[derive(Debug, Error)]
pub enum PanelIoError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column `{name}`")]
    MissingColumn { name: String },
    #[error("line {line}: field `{field}` has invalid value `{value}`: {message}")]
    ParseField { line: u64, field: String, value: String, message: String },
    #[error("line {line}: duplicate cell key {key}")]
    DuplicateKey { line: u64, key: String },
}

const PANEL_COLUMNS: [&str; 17] = [
    "firm",
    "product",
    "mode",
    "destination",
    "year",
    "n_shipments",
    "ln_pershipment_cost",
    "ln_distance",
    "ln_gdp",
    "ln_gdp_pc",
    "island",
    "landlocked",
    "common_religion",
    "common_legal",
    "colony",
    "importer_rate",
    "exporter_rate",
];

const OPTIONAL_COLUMNS: [&str; 3] = ["ln_pershipment_value", "ln_export_value", "ln_export_weight"];

fn bool_field(v: bool) -> &'static str {
    if v {
        "1"
    } else {
        "0"
    }
}

/// Writes the panel to `path`; byte-identical for identical input.
pub fn write_panel<P: AsRef<Path>>(panel: &[PanelObservation], path: P) -> Result<(), PanelIoError> {
    let file = BufWriter::new(File::create(path)?);
    write_panel_to(panel, file)
}

pub fn write_panel_to<W: Write>(panel: &[PanelObservation], out: W) -> Result<(), PanelIoError> {
    let mut writer = csv::Writer::from_writer(out);
    let with_value = panel.iter().any(|o| o.ln_pershipment_value.is_some());
    let with_export_value = panel.iter().any(|o| o.ln_export_value.is_some());
    let with_export_weight = panel.iter().any(|o| o.ln_export_weight.is_some());

    let mut header: Vec<&str> = PANEL_COLUMNS.to_vec();
    if with_value {
        header.push(OPTIONAL_COLUMNS[0]);
    }
    if with_export_value {
        header.push(OPTIONAL_COLUMNS[1]);
    }
    if with_export_weight {
        header.push(OPTIONAL_COLUMNS[2]);
    }
    writer.write_record(&header)?;

    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for obs in panel {
        let mut record = vec![
            obs.firm.clone(),
            obs.product.clone(),
            obs.mode.to_string(),
            obs.destination.clone(),
            obs.year.to_string(),
            obs.n_shipments.to_string(),
            obs.ln_pershipment_cost.to_string(),
            obs.ln_distance.to_string(),
            obs.ln_gdp.to_string(),
            obs.ln_gdp_pc.to_string(),
            bool_field(obs.island).to_string(),
            bool_field(obs.landlocked).to_string(),
            obs.common_religion.to_string(),
            bool_field(obs.common_legal).to_string(),
            bool_field(obs.colony).to_string(),
            obs.importer_rate.to_string(),
            obs.exporter_rate.to_string(),
        ];
        if with_value {
            record.push(opt(obs.ln_pershipment_value));
        }
        if with_export_value {
            record.push(opt(obs.ln_export_value));
        }
        if with_export_weight {
            record.push(opt(obs.ln_export_weight));
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

struct ColumnMap {
    required: Vec<usize>,
    optional: [Option<usize>; 3],
}

fn map_columns(headers: &csv::StringRecord) -> Result<ColumnMap, PanelIoError> {
    let find = |name: &str| headers.iter().position(|h| h == name);
    let mut required = Vec::with_capacity(PANEL_COLUMNS.len());
    for name in PANEL_COLUMNS {
        required.push(find(name).ok_or_else(|| PanelIoError::MissingColumn {
            name: name.to_string(),
        })?);
    }
    let optional = [
        find(OPTIONAL_COLUMNS[0]),
        find(OPTIONAL_COLUMNS[1]),
        find(OPTIONAL_COLUMNS[2]),
    ];
    Ok(ColumnMap { required, optional })
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse<T: std::str::FromStr>(
    record: &csv::StringRecord,
    idx: usize,
    field: &str,
) -> Result<T, PanelIoError>
where
    T::Err: std::fmt::Display,
{
    let raw = record.get(idx).unwrap_or("");
    raw.parse::<T>().map_err(|e| PanelIoError::ParseField {
        line: record_line(record),
        field: field.to_string(),
        value: raw.to_string(),
        message: e.to_string(),
    })
}

fn parse_finite(record: &csv::StringRecord, idx: usize, field: &str) -> Result<f64, PanelIoError> {
    let v: f64 = parse(record, idx, field)?;
    if !v.is_finite() {
        return Err(PanelIoError::ParseField {
            line: record_line(record),
            field: field.to_string(),
            value: record.get(idx).unwrap_or("").to_string(),
            message: "value must be finite".to_string(),
        });
    }
    Ok(v)
}

fn parse_bool(record: &csv::StringRecord, idx: usize, field: &str) -> Result<bool, PanelIoError> {
    match record.get(idx).unwrap_or("") {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(PanelIoError::ParseField {
            line: record_line(record),
            field: field.to_string(),
            value: other.to_string(),
            message: "expected 0 or 1".to_string(),
        }),
    }
}

fn parse_optional(
    record: &csv::StringRecord,
    idx: Option<usize>,
    field: &str,
) -> Result<Option<f64>, PanelIoError> {
    match idx {
        None => Ok(None),
        Some(i) => {
            let raw = record.get(i).unwrap_or("");
            if raw.is_empty() {
                Ok(None)
            } else {
                parse_finite(record, i, field).map(Some)
            }
        }
    }
}

/// Reads a panel back, enforcing the schema, value invariants, and cell
/// key uniqueness. Errors carry the offending line number.
pub fn read_panel<P: AsRef<Path>>(path: P) -> Result<Vec<PanelObservation>, PanelIoError> {
    read_panel_from(BufReader::new(File::open(path)?))
}

pub fn read_panel_from<R: Read>(input: R) -> Result<Vec<PanelObservation>, PanelIoError> {
    let mut reader = csv::Reader::from_reader(input);
    let columns = map_columns(reader.headers()?)?;
    let c = &columns.required;
    let mut seen: HashSet<String> = HashSet::new();
    let mut panel = Vec::new();
    for record in reader.records() {
        let record = record?;
        let mode: TransportMode = {
            let raw = record.get(c[2]).unwrap_or("");
            raw.parse().map_err(|message| PanelIoError::ParseField {
                line: record_line(&record),
                field: "mode".to_string(),
                value: raw.to_string(),
                message,
            })?
        };
        let obs = PanelObservation {
            firm: record.get(c[0]).unwrap_or("").to_string(),
            product: record.get(c[1]).unwrap_or("").to_string(),
            mode,
            destination: record.get(c[3]).unwrap_or("").to_string(),
            year: parse(&record, c[4], "year")?,
            n_shipments: parse(&record, c[5], "n_shipments")?,
            ln_pershipment_cost: parse_finite(&record, c[6], "ln_pershipment_cost")?,
            ln_distance: parse_finite(&record, c[7], "ln_distance")?,
            ln_gdp: parse_finite(&record, c[8], "ln_gdp")?,
            ln_gdp_pc: parse_finite(&record, c[9], "ln_gdp_pc")?,
            island: parse_bool(&record, c[10], "island")?,
            landlocked: parse_bool(&record, c[11], "landlocked")?,
            common_religion: parse_finite(&record, c[12], "common_religion")?,
            common_legal: parse_bool(&record, c[13], "common_legal")?,
            colony: parse_bool(&record, c[14], "colony")?,
            importer_rate: parse_finite(&record, c[15], "importer_rate")?,
            exporter_rate: parse_finite(&record, c[16], "exporter_rate")?,
            ln_pershipment_value: parse_optional(&record, columns.optional[0], "ln_pershipment_value")?,
            ln_export_value: parse_optional(&record, columns.optional[1], "ln_export_value")?,
            ln_export_weight: parse_optional(&record, columns.optional[2], "ln_export_weight")?,
        };
        let key = obs.key();
        if !seen.insert(key.clone()) {
            return Err(PanelIoError::DuplicateKey { line: record_line(&record), key });
        }
        panel.push(obs);
    }
    Ok(panel)
}

const COUNTRY_COLUMNS: [&str; 11] = [
    "id",
    "ln_distance",
    "ln_gdp",
    "ln_gdp_pc",
    "ln_pershipment_cost",
    "importer_rate",
    "island",
    "landlocked",
    "common_religion",
    "common_legal",
    "colony",
];

/// One row per destination profile.
pub fn write_countries<P: AsRef<Path>>(
    countries: &[CountryProfile],
    path: P,
) -> Result<(), PanelIoError> {
    let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    writer.write_record(COUNTRY_COLUMNS)?;
    for c in countries {
        writer.write_record(&[
            c.id.clone(),
            c.ln_distance.to_string(),
            c.ln_gdp.to_string(),
            c.ln_gdp_pc.to_string(),
            c.ln_pershipment_cost.to_string(),
            c.importer_rate.to_string(),
            bool_field(c.island).to_string(),
            bool_field(c.landlocked).to_string(),
            c.common_religion.to_string(),
            bool_field(c.common_legal).to_string(),
            bool_field(c.colony).to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_countries<P: AsRef<Path>>(path: P) -> Result<Vec<CountryProfile>, PanelIoError> {
    let mut reader = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let headers = reader.headers()?.clone();
    let mut idx = Vec::with_capacity(COUNTRY_COLUMNS.len());
    for name in COUNTRY_COLUMNS {
        idx.push(headers.iter().position(|h| h == name).ok_or_else(|| {
            PanelIoError::MissingColumn { name: name.to_string() }
        })?);
    }
    let mut countries = Vec::new();
    for record in reader.records() {
        let record = record?;
        countries.push(CountryProfile {
            id: record.get(idx[0]).unwrap_or("").to_string(),
            ln_distance: parse_finite(&record, idx[1], "ln_distance")?,
            ln_gdp: parse_finite(&record, idx[2], "ln_gdp")?,
            ln_gdp_pc: parse_finite(&record, idx[3], "ln_gdp_pc")?,
            ln_pershipment_cost: parse_finite(&record, idx[4], "ln_pershipment_cost")?,
            importer_rate: parse_finite(&record, idx[5], "importer_rate")?,
            island: parse_bool(&record, idx[6], "island")?,
            landlocked: parse_bool(&record, idx[7], "landlocked")?,
            common_religion: parse_finite(&record, idx[8], "common_religion")?,
            common_legal: parse_bool(&record, idx[9], "common_legal")?,
            colony: parse_bool(&record, idx[10], "colony")?,
        });
    }
    Ok(countries)
}
