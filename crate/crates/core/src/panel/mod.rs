//! Synthetic firm-product-mode-destination-year panels with planted
//! coefficients, for estimator validation.
//!
//! Two data-generating modes:
//!
//! * `ReducedForm` — each cell's expected shipment count is
//!   `exp(intercept + Σ β·term + Σ planted fixed effects)` and the
//!   realized count is a Poisson draw;
//! * `Structural` — each cell's covariates are mapped into procurement
//!   model parameters and the count is the (optionally Poisson-jittered)
//!   model shipping frequency.
//!
//! Destination covariates are calibrated to published summary moments
//! (means, standard deviations, and observed ranges) and drawn
//! independently by default. All randomness derives from one seed via
//! keyed substreams, so output is byte-identical across runs and
//! independent of generation order.

mod io;

pub use io::{read_countries, read_panel, write_countries, write_panel, PanelIoError};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use thiserror::Error;

use crate::estimation::design::term_value;
use crate::estimation::{FeGroup, Term};
use crate::model::{solve, ModelError, ModelParams, Variant};
use crate::rng::keyed_substream;

/// Transport mode of a shipment cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransportMode {
    Air,
    Ocean,
    Land,
}

impl TransportMode {
    pub fn name(self) -> &'static str {
        match self {
            TransportMode::Air => "air",
            TransportMode::Ocean => "ocean",
            TransportMode::Land => "land",
        }
    }
}

impl fmt::Display for TransportMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransportMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "air" => Ok(TransportMode::Air),
            "ocean" => Ok(TransportMode::Ocean),
            "land" => Ok(TransportMode::Land),
            other => Err(format!("unknown transport mode `{other}`")),
        }
    }
}

/// Destination-country covariates.
#[derive(Clone, Debug, PartialEq)]
pub struct CountryProfile {
    pub id: String,
    pub ln_distance: f64,
    pub ln_gdp: f64,
    pub ln_gdp_pc: f64,
    pub ln_pershipment_cost: f64,
    /// Lending rate in percent, within (0, 60].
    pub importer_rate: f64,
    pub island: bool,
    pub landlocked: bool,
    pub common_legal: bool,
    pub colony: bool,
    /// Shared-religion index in [0, 1].
    pub common_religion: f64,
}

/// One firm-product-mode-destination-year cell.
#[derive(Clone, Debug, PartialEq)]
pub struct PanelObservation {
    pub firm: String,
    /// Eight-digit product code; 4- and 2-digit prefixes define coarser groupings.
    pub product: String,
    pub mode: TransportMode,
    pub destination: String,
    pub year: i32,
    pub n_shipments: u64,
    pub ln_pershipment_cost: f64,
    pub ln_distance: f64,
    pub ln_gdp: f64,
    pub ln_gdp_pc: f64,
    pub island: bool,
    pub landlocked: bool,
    pub common_religion: f64,
    pub common_legal: bool,
    pub colony: bool,
    pub importer_rate: f64,
    pub exporter_rate: f64,
    /// Log per-shipment value; filled by the structural mode only.
    pub ln_pershipment_value: Option<f64>,
    pub ln_export_value: Option<f64>,
    pub ln_export_weight: Option<f64>,
}

impl PanelObservation {
    /// Canonical cell key; unique within a panel.
    pub fn key(&self) -> String {
        format!(
            "{}|{}|{}|{}|{}",
            self.firm, self.product, self.mode, self.destination, self.year
        )
    }
}

/// Mean/sd target with hard range bounds for one covariate.
#[derive(Clone, Copy, Debug)]
pub struct CovariateMoments {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl CovariateMoments {
    fn clip(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }
}

/// Calibration targets for destination covariates.
#[derive(Clone, Debug)]
pub struct CountryCalibration {
    pub ln_pershipment_cost: CovariateMoments,
    pub ln_distance: CovariateMoments,
    pub ln_gdp: CovariateMoments,
    pub ln_gdp_pc: CovariateMoments,
    /// Drawn log-normally (matched mean/sd): the rate is positive by
    /// construction and the lower range bound cuts off almost no mass,
    /// so the sample mean stays on target after clipping.
    pub importer_rate: CovariateMoments,
    pub common_religion: CovariateMoments,
    pub p_island: f64,
    pub p_landlocked: f64,
    pub p_common_legal: f64,
    pub p_colony: f64,
}

impl Default for CountryCalibration {
    fn default() -> Self {
        Self {
            ln_pershipment_cost: CovariateMoments { mean: 7.08, sd: 0.39, min: 5.90, max: 9.89 },
            ln_distance: CovariateMoments { mean: 8.88, sd: 0.51, min: 6.06, max: 9.81 },
            ln_gdp: CovariateMoments { mean: 27.87, sd: 1.49, min: 18.46, max: 30.45 },
            ln_gdp_pc: CovariateMoments { mean: 10.23, sd: 0.96, min: 5.09, max: 11.63 },
            importer_rate: CovariateMoments { mean: 5.15, sd: 3.52, min: 0.5, max: 58.98 },
            common_religion: CovariateMoments { mean: 0.09, sd: 0.23, min: 0.0, max: 0.86 },
            p_island: 0.13,
            p_landlocked: 0.03,
            // No published moment for shared legal origin; default reflects
            // a common-law exporter's typical partner mix.
            p_common_legal: 0.30,
            p_colony: 0.07,
        }
    }
}

/// Which data-generating process fills the counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DgpMode {
    ReducedForm,
    Structural,
}

/// Cell grid dimensions; the panel has exactly
/// `firms·products·destinations·years` rows (mode is an attribute of the
/// firm-product-destination triple, not a grid axis).
#[derive(Clone, Copy, Debug)]
pub struct CellCounts {
    pub firms: u32,
    pub products: u32,
    pub destinations: u32,
    pub years: u32,
}

/// Structural-mode mapping of covariates into model parameters.
#[derive(Clone, Copy, Debug)]
pub struct StructuralConfig {
    pub c: f64,
    pub q: f64,
    pub delta: f64,
    /// Multiplier taking the per-shipment cost index `exp(ln_pershipment_cost)`
    /// into the model's currency units. The default lands the mean index
    /// near ten shipments per year at the default `c`, `q`, `delta`.
    pub f_scale: f64,
    /// Replace the deterministic rounded frequency with a Poisson draw
    /// around the model frequency.
    pub poisson_jitter: bool,
}

impl Default for StructuralConfig {
    fn default() -> Self {
        Self { c: 1.0, q: 1e5, delta: 0.25, f_scale: 0.02, poisson_jitter: false }
    }
}

/// Full data-generating configuration.
#[derive(Clone, Debug)]
pub struct DgpConfig {
    pub mode: DgpMode,
    /// Reduced-form intercept.
    pub intercept: f64,
    /// Planted slope coefficients, keyed by regressor term.
    pub betas: Vec<(Term, f64)>,
    /// Planted fixed-effect levels: grouping key and the standard
    /// deviation of its i.i.d. normal effects (re-centered to mean zero).
    pub fe_sd: Vec<(FeGroup, f64)>,
    pub seed: u64,
    pub counts: CellCounts,
    pub start_year: i32,
    /// Year-level exporter lending rate, percent, drawn uniformly.
    pub exporter_rate_range: (f64, f64),
    pub calibration: CountryCalibration,
    /// Optional correlation between the log-distance and log-GDP draws.
    pub distance_gdp_correlation: f64,
    pub structural: StructuralConfig,
}

impl Default for DgpConfig {
    fn default() -> Self {
        Self {
            mode: DgpMode::ReducedForm,
            intercept: 2.859,
            betas: default_planted_betas(),
            fe_sd: vec![
                ("firm".parse().unwrap(), 0.25),
                ("hs8*mode*year".parse().unwrap(), 0.25),
            ],
            seed: 1,
            counts: CellCounts { firms: 40, products: 10, destinations: 25, years: 5 },
            start_year: 2006,
            exporter_rate_range: (11.30, 13.77),
            calibration: CountryCalibration::default(),
            distance_gdp_correlation: 0.0,
            structural: StructuralConfig::default(),
        }
    }
}

/// Default plant: the full coefficient vector of the headline
/// count regression (per-shipment cost elasticity -0.335, importer-rate
/// semi-elasticity -0.083, rate interaction 0.006, spline distance fix,
/// gravity controls).
pub fn default_planted_betas() -> Vec<(Term, f64)> {
    let t = |s: &str| s.parse::<Term>().unwrap();
    vec![
        (t("ln_pershipment_cost"), -0.335),
        (t("ln_distance"), -0.904),
        (t("spline1"), -5.023),
        (t("spline2"), -19.402),
        (t("spline1*ln_distance"), 0.410),
        (t("spline2*ln_distance"), 2.135),
        (t("importer_rate"), -0.083),
        (t("importer_rate*exporter_rate"), 0.006),
        (t("ln_gdp"), 0.300),
        (t("ln_gdp_pc"), 0.248),
        (t("island"), -0.234),
        (t("landlocked"), -0.162),
        (t("common_religion"), 0.789),
        (t("common_legal"), 0.081),
        (t("colony"), 0.359),
    ]
}

#[derive(Debug, Error)]
pub enum PanelError {
    #[error("invalid generation config: {message}")]
    Config { message: String },
    #[error("structural solve failed for cell {cell}: {source}")]
    Structural {
        cell: String,
        #[source]
        source: ModelError,
    },
    #[error("term {term} cannot be evaluated while generating: {message}")]
    Term { term: String, message: String },
}

fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws destination profiles calibrated to the configured moments.
/// Deterministic given the config seed; each destination has its own
/// substream, so profiles do not depend on how many are drawn.
pub fn generate_countries(config: &DgpConfig) -> Result<Vec<CountryProfile>, PanelError> {
    if config.counts.destinations == 0 {
        return Err(PanelError::Config { message: "destination count must be >= 1".to_string() });
    }
    let cal = &config.calibration;
    let rho = config.distance_gdp_correlation;
    if !(-1.0..=1.0).contains(&rho) {
        return Err(PanelError::Config {
            message: format!("distance_gdp_correlation {rho} outside [-1, 1]"),
        });
    }
    // Log-normal parameters matching the importer-rate mean and sd.
    let rate_cv2 = (cal.importer_rate.sd / cal.importer_rate.mean).powi(2);
    let rate_sigma2 = rate_cv2.ln_1p();
    let rate_mu = cal.importer_rate.mean.ln() - 0.5 * rate_sigma2;

    let mut countries = Vec::with_capacity(config.counts.destinations as usize);
    for i in 0..config.counts.destinations {
        let id = format!("D{:03}", i + 1);
        let mut rng = ChaCha12Rng::seed_from_u64(keyed_substream(config.seed, "country", &id));
        let z_dist = standard_normal(&mut rng);
        let z_gdp = rho * z_dist + (1.0 - rho * rho).sqrt() * standard_normal(&mut rng);
        let ln_distance = cal.ln_distance.clip(cal.ln_distance.mean + cal.ln_distance.sd * z_dist);
        let ln_gdp = cal.ln_gdp.clip(cal.ln_gdp.mean + cal.ln_gdp.sd * z_gdp);
        let ln_gdp_pc = cal
            .ln_gdp_pc
            .clip(cal.ln_gdp_pc.mean + cal.ln_gdp_pc.sd * standard_normal(&mut rng));
        let ln_pershipment_cost = cal.ln_pershipment_cost.clip(
            cal.ln_pershipment_cost.mean + cal.ln_pershipment_cost.sd * standard_normal(&mut rng),
        );
        let importer_rate = cal
            .importer_rate
            .clip((rate_mu + rate_sigma2.sqrt() * standard_normal(&mut rng)).exp());
        let common_religion = cal
            .common_religion
            .clip(cal.common_religion.mean + cal.common_religion.sd * standard_normal(&mut rng));
        let island = rng.random_bool(cal.p_island);
        let landlocked = rng.random_bool(cal.p_landlocked);
        let common_legal = rng.random_bool(cal.p_common_legal);
        let colony = rng.random_bool(cal.p_colony);
        countries.push(CountryProfile {
            id,
            ln_distance,
            ln_gdp,
            ln_gdp_pc,
            ln_pershipment_cost,
            importer_rate,
            island,
            landlocked,
            common_legal,
            colony,
            common_religion,
        });
    }
    Ok(countries)
}

fn firm_ids(n: u32) -> Vec<String> {
    (1..=n).map(|i| format!("F{i:04}")).collect()
}

/// Deterministic eight-digit product codes with a meaningful 2-digit
/// chapter prefix; unique for up to 10,000 products.
fn product_codes(n: u32) -> Vec<String> {
    const CHAPTERS: [u32; 10] = [61, 62, 63, 52, 54, 10, 84, 85, 39, 64];
    (0..n)
        .map(|p| {
            let chapter = CHAPTERS[(p % 10) as usize];
            let heading = 10 + (p / 10) % 90;
            format!("{chapter:02}{heading:02}{p:04}")
        })
        .collect()
}

fn assign_mode(seed: u64, firm: &str, product: &str, destination: &str) -> TransportMode {
    let key = format!("{firm}|{product}|{destination}");
    let mut rng = ChaCha12Rng::seed_from_u64(keyed_substream(seed, "mode", &key));
    let u: f64 = rng.random_range(0.0..1.0);
    if u < 0.25 {
        TransportMode::Air
    } else if u < 0.95 {
        TransportMode::Ocean
    } else {
        TransportMode::Land
    }
}

fn fe_key(group: &FeGroup, obs: &PanelObservation) -> String {
    use crate::estimation::FeFactor;
    let mut parts = Vec::with_capacity(group.0.len());
    for factor in &group.0 {
        let part = match factor {
            FeFactor::Firm => obs.firm.clone(),
            FeFactor::Hs8 => obs.product.clone(),
            FeFactor::Hs4 => obs.product.chars().take(4).collect(),
            FeFactor::Hs2 => obs.product.chars().take(2).collect(),
            FeFactor::Mode => obs.mode.to_string(),
            FeFactor::Destination => obs.destination.clone(),
            FeFactor::Year => obs.year.to_string(),
        };
        parts.push(part);
    }
    parts.join("|")
}

/// Generates the panel over the full cell grid in canonical order
/// (firm, product, destination, year).
pub fn generate_panel(
    config: &DgpConfig,
    countries: &[CountryProfile],
) -> Result<Vec<PanelObservation>, PanelError> {
    let counts = config.counts;
    if counts.firms == 0 || counts.products == 0 || counts.years == 0 {
        return Err(PanelError::Config { message: "all cell counts must be >= 1".to_string() });
    }
    if countries.is_empty() {
        return Err(PanelError::Config { message: "no destination profiles supplied".to_string() });
    }
    for (term, _) in &config.betas {
        if matches!(term, Term::Raw(f) | Term::Log(f) if *f == crate::estimation::Field::NShipments)
        {
            return Err(PanelError::Term {
                term: term.to_string(),
                message: "the outcome cannot appear as a planted regressor".to_string(),
            });
        }
    }

    let firms = firm_ids(counts.firms);
    let products = product_codes(counts.products);
    let years: Vec<i32> = (0..counts.years as i32).map(|k| config.start_year + k).collect();

    // One exporter rate per year.
    let (rate_lo, rate_hi) = config.exporter_rate_range;
    let exporter_rate: HashMap<i32, f64> = years
        .iter()
        .map(|&year| {
            let mut rng = ChaCha12Rng::seed_from_u64(keyed_substream(
                config.seed,
                "exporter_rate",
                &year.to_string(),
            ));
            (year, rng.random_range(rate_lo..rate_hi))
        })
        .collect();

    let country_by_idx: Vec<&CountryProfile> = countries.iter().collect();

    // First pass: build observations without counts so fixed-effect group
    // keys (which depend on the assigned mode) can be enumerated.
    let mut observations = Vec::with_capacity(
        (counts.firms as usize)
            * (counts.products as usize)
            * country_by_idx.len()
            * (counts.years as usize),
    );
    for firm in &firms {
        for product in &products {
            for country in &country_by_idx {
                let mode = assign_mode(config.seed, firm, product, &country.id);
                for &year in &years {
                    observations.push(PanelObservation {
                        firm: firm.clone(),
                        product: product.clone(),
                        mode,
                        destination: country.id.clone(),
                        year,
                        n_shipments: 0,
                        ln_pershipment_cost: country.ln_pershipment_cost,
                        ln_distance: country.ln_distance,
                        ln_gdp: country.ln_gdp,
                        ln_gdp_pc: country.ln_gdp_pc,
                        island: country.island,
                        landlocked: country.landlocked,
                        common_religion: country.common_religion,
                        common_legal: country.common_legal,
                        colony: country.colony,
                        importer_rate: country.importer_rate,
                        exporter_rate: exporter_rate[&year],
                        ln_pershipment_value: None,
                        ln_export_value: None,
                        ln_export_weight: None,
                    });
                }
            }
        }
    }

    // Planted fixed effects: i.i.d. normal per group key, re-centered to
    // mean zero so the intercept stays interpretable.
    let mut fe_effects: Vec<HashMap<String, f64>> = Vec::with_capacity(config.fe_sd.len());
    for (group, sd) in &config.fe_sd {
        if *sd < 0.0 {
            return Err(PanelError::Config {
                message: format!("negative fixed-effect sd for {group}"),
            });
        }
        let mut effects: HashMap<String, f64> = HashMap::new();
        for obs in &observations {
            let key = fe_key(group, obs);
            effects.entry(key.clone()).or_insert_with(|| {
                let mut rng = ChaCha12Rng::seed_from_u64(keyed_substream(
                    config.seed,
                    &format!("fe:{group}"),
                    &key,
                ));
                sd * standard_normal(&mut rng)
            });
        }
        let mean: f64 = effects.values().sum::<f64>() / effects.len() as f64;
        for v in effects.values_mut() {
            *v -= mean;
        }
        fe_effects.push(effects);
    }

    // Second pass: fill counts.
    for obs in &mut observations {
        let cell_key = obs.key();
        let mut cell_rng =
            ChaCha12Rng::seed_from_u64(keyed_substream(config.seed, "count", &cell_key));
        match config.mode {
            DgpMode::ReducedForm => {
                let mut eta = config.intercept;
                for (term, beta) in &config.betas {
                    let value = term_value(obs, term).map_err(|e| PanelError::Term {
                        term: term.to_string(),
                        message: e.to_string(),
                    })?;
                    eta += beta * value;
                }
                for effects in fe_effects.iter().zip(&config.fe_sd) {
                    let (map, (group, _)) = effects;
                    eta += map[&fe_key(group, obs)];
                }
                let lambda = eta.exp().max(1e-12);
                let poisson = Poisson::new(lambda).map_err(|e| PanelError::Config {
                    message: format!("cell {cell_key}: invalid Poisson mean {lambda}: {e}"),
                })?;
                obs.n_shipments = poisson.sample(&mut cell_rng) as u64;
            }
            DgpMode::Structural => {
                let s = &config.structural;
                let params = ModelParams::new(
                    s.c,
                    s.q,
                    s.f_scale * obs.ln_pershipment_cost.exp(),
                    s.delta,
                    obs.exporter_rate / 100.0,
                    obs.importer_rate / 100.0,
                )
                .map_err(|e| PanelError::Structural { cell: cell_key.clone(), source: e })?;
                let sol = solve(&params, Variant::Baseline)
                    .map_err(|e| PanelError::Structural { cell: cell_key.clone(), source: e })?;
                obs.n_shipments = if s.poisson_jitter {
                    let poisson = Poisson::new(sol.n.max(1e-12)).map_err(|e| PanelError::Config {
                        message: format!("cell {cell_key}: invalid Poisson mean {}: {e}", sol.n),
                    })?;
                    poisson.sample(&mut cell_rng) as u64
                } else {
                    sol.n.round().max(0.0) as u64
                };
                obs.ln_pershipment_value = Some((s.c * s.q / sol.n).ln());
            }
        }
    }

    Ok(observations)
}
