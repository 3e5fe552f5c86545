//! Scenario set construction, demand profiles and the hourly CO₂ cap.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::environment::{read_weather_csv, WeatherHour, HOURS};
use crate::error::{Error, Result};
use crate::resource::ResourceVec;

/// Allowance granted per MW of generation, t CO₂ per MWh.
pub const CO2_CAP_RATE: f64 = 0.3;

/// Density of SNG at standard conditions, kg/m³.
pub const SNG_DENSITY_KG_M3: f64 = 0.717;

const PROBABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Season {
    Winter,
    Spring,
    Summer,
    Autumn,
}

impl Season {
    pub const ALL: [Season; 4] = [
        Season::Winter,
        Season::Spring,
        Season::Summer,
        Season::Autumn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Season::Winter => "winter",
            Season::Spring => "spring",
            Season::Summer => "summer",
            Season::Autumn => "autumn",
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Season {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Season::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse {
                what: "season".into(),
                message: format!("unknown season `{s}`"),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Policy {
    CapAndTrade,
    EmissionTax,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::CapAndTrade => "cap-and-trade",
            Policy::EmissionTax => "emission tax",
        }
    }
}

/// One row of the scenario table before weather is attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub id: String,
    pub season: Season,
    pub policy: Policy,
    /// $/t CO₂, trading price or tax rate.
    pub co2_price: f64,
    /// $/m³ natural gas.
    pub gas_price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    /// `None` for synthetic scenarios such as the probability-weighted average.
    pub season: Option<Season>,
    pub policy: Policy,
    pub co2_price: f64,
    /// $/m³ as quoted.
    pub gas_price: f64,
    /// $/t SNG.
    pub sng_price: f64,
    pub weather: Vec<WeatherHour>,
    pub probability: f64,
}

impl Scenario {
    pub fn hours(&self) -> usize {
        self.weather.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::validation(&self.id, field, msg));
        if !(self.co2_price > 0.0) {
            return bad(
                "co2_price",
                format!("must be positive, got {}", self.co2_price),
            );
        }
        if !(self.gas_price > 0.0 && self.sng_price > 0.0) {
            return bad(
                "gas_price",
                format!("must be positive, got {}", self.gas_price),
            );
        }
        if !(self.probability > 0.0 && self.probability <= 1.0) {
            return bad(
                "probability",
                format!("must lie in (0, 1], got {}", self.probability),
            );
        }
        if self.weather.is_empty() {
            return bad("weather", "no weather hours".into());
        }
        for h in &self.weather {
            h.validate()?;
        }
        Ok(())
    }
}

/// Converts a volumetric gas price to a mass price of SNG.
pub fn sng_price_per_tonne(gas_price_per_m3: f64, density_kg_m3: f64) -> f64 {
    gas_price_per_m3 / (density_kg_m3 / 1000.0)
}

const TABLE: [(Season, Policy, f64, f64); 32] = {
    use Policy::{CapAndTrade as T, EmissionTax as X};
    use Season::{Autumn as Au, Spring as Sp, Summer as Su, Winter as Wi};
    [
        (Wi, T, 50.0, 0.86),
        (Wi, T, 100.0, 0.86),
        (Wi, X, 50.0, 0.86),
        (Wi, X, 100.0, 0.86),
        (Sp, T, 50.0, 0.86),
        (Sp, T, 100.0, 0.86),
        (Sp, X, 50.0, 0.86),
        (Sp, X, 100.0, 0.86),
        (Su, T, 50.0, 0.86),
        (Su, T, 100.0, 0.86),
        (Su, X, 50.0, 0.86),
        (Su, X, 100.0, 0.86),
        (Au, T, 50.0, 0.86),
        (Au, T, 100.0, 0.86),
        (Au, X, 50.0, 0.86),
        (Au, X, 100.0, 0.86),
        (Wi, T, 50.0, 1.72),
        (Sp, X, 100.0, 1.72),
        (Su, T, 50.0, 1.72),
        (Au, X, 100.0, 1.72),
        (Wi, X, 50.0, 1.72),
        (Sp, T, 100.0, 1.72),
        (Su, X, 50.0, 1.72),
        (Au, T, 100.0, 1.72),
        (Wi, X, 100.0, 1.72),
        (Sp, T, 50.0, 1.72),
        (Su, X, 100.0, 1.72),
        (Au, T, 50.0, 1.72),
        (Wi, T, 100.0, 1.72),
        (Sp, X, 50.0, 1.72),
        (Su, T, 100.0, 1.72),
        (Au, X, 50.0, 1.72),
    ]
};

/// The 32 rows w1..w32 of the reference scenario table.
pub fn default_rows() -> Vec<ScenarioRow> {
    TABLE
        .iter()
        .enumerate()
        .map(|(i, &(season, policy, co2_price, gas_price))| ScenarioRow {
            id: format!("w{}", i + 1),
            season,
            policy,
            co2_price,
            gas_price,
        })
        .collect()
}

pub fn load_rows(path: &Path) -> Result<Vec<ScenarioRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        what: path.display().to_string(),
        message: e.to_string(),
    })
}

pub type SeasonalWeather = BTreeMap<Season, Vec<WeatherHour>>;

/// Attaches seasonal weather to every row and assigns equal probabilities.
pub fn build_scenarios(
    weather: &SeasonalWeather,
    rows: &[ScenarioRow],
    sng_density_kg_m3: f64,
) -> Result<Vec<Scenario>> {
    if rows.is_empty() {
        return Err(Error::EmptySet("an empty scenario table".into()));
    }
    let p = 1.0 / rows.len() as f64;
    rows.iter()
        .map(|row| {
            let hours = weather.get(&row.season).ok_or_else(|| {
                Error::validation(
                    &row.id,
                    "season",
                    format!("no weather profile for {}", row.season),
                )
            })?;
            if hours.len() != HOURS {
                return Err(Error::validation(
                    &row.id,
                    "weather",
                    format!(
                        "{} profile has {} hours, expected {HOURS}",
                        row.season,
                        hours.len()
                    ),
                ));
            }
            let s = Scenario {
                id: row.id.clone(),
                season: Some(row.season),
                policy: row.policy,
                co2_price: row.co2_price,
                gas_price: row.gas_price,
                sng_price: sng_price_per_tonne(row.gas_price, sng_density_kg_m3),
                weather: hours.clone(),
                probability: p,
            };
            s.validate()?;
            Ok(s)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioFilter {
    All,
    Policy(Policy),
    Season(Season),
}

impl ScenarioFilter {
    pub fn matches(&self, s: &Scenario) -> bool {
        match *self {
            ScenarioFilter::All => true,
            ScenarioFilter::Policy(p) => s.policy == p,
            ScenarioFilter::Season(x) => s.season == Some(x),
        }
    }
}

/// Keeps matching scenarios and renormalises their probabilities.
pub fn filter_scenarios(set: &[Scenario], filter: ScenarioFilter) -> Result<Vec<Scenario>> {
    let mut kept: Vec<Scenario> = set.iter().filter(|s| filter.matches(s)).cloned().collect();
    if kept.is_empty() {
        return Err(Error::EmptySet(format!("{filter:?}")));
    }
    let total: f64 = kept.iter().map(|s| s.probability).sum();
    for s in &mut kept {
        s.probability /= total;
    }
    Ok(kept)
}

/// Checks that probabilities form a distribution.
pub fn check_probabilities(set: &[Scenario]) -> Result<()> {
    let total: f64 = set.iter().map(|s| s.probability).sum();
    if (total - 1.0).abs() > PROBABILITY_TOL * set.len().max(1) as f64 {
        return Err(Error::Domain(format!(
            "scenario probabilities sum to {total}"
        )));
    }
    Ok(())
}

/// Hourly CO₂ allowance in t/h for a total generation in MW.
pub fn co2_cap(total_generation_power: f64) -> f64 {
    CO2_CAP_RATE * total_generation_power
}

/// Averaged hours with the sun this low are treated as night.
const NIGHT_COS_ZENITH: f64 = 1e-3;

/// Single scenario with probability-weighted mean weather and prices.
pub fn averaged_scenario(set: &[Scenario], policy: Policy) -> Result<Scenario> {
    let first = set
        .first()
        .ok_or_else(|| Error::EmptySet("averaging an empty scenario set".into()))?;
    if set.len() == 1 {
        let mut only = first.clone();
        only.policy = policy;
        only.probability = 1.0;
        return Ok(only);
    }
    let hours = first.hours();
    if set.iter().any(|s| s.hours() != hours) {
        return Err(Error::Domain("scenarios disagree on horizon length".into()));
    }
    let total: f64 = set.iter().map(|s| s.probability).sum();
    let mean = |f: &dyn Fn(&Scenario) -> f64| -> f64 {
        set.iter().map(|s| s.probability * f(s)).sum::<f64>() / total
    };
    let weather = (0..hours)
        .map(|t| WeatherHour {
            v_anemometer: mean(&|s| s.weather[t].v_anemometer),
            g_horizontal: mean(&|s| s.weather[t].g_horizontal),
            theta_a: mean(&|s| s.weather[t].theta_a),
            h0: mean(&|s| s.weather[t].h0),
            theta: mean(&|s| s.weather[t].theta),
            theta_z: mean(&|s| s.weather[t].theta_z),
        })
        .map(|mut w: WeatherHour| {
            // Averaging zenith angles of sunlit and dark seasons can leave
            // irradiance with the sun on or below the horizon.
            if w.g_horizontal > 0.0 && (w.theta_z.cos() <= NIGHT_COS_ZENITH || w.h0 <= 0.0) {
                w.g_horizontal = 0.0;
                w.h0 = 0.0;
            }
            w
        })
        .collect();
    Ok(Scenario {
        id: "avg".into(),
        season: None,
        policy,
        co2_price: mean(&|s| s.co2_price),
        gas_price: mean(&|s| s.gas_price),
        sng_price: mean(&|s| s.sng_price),
        weather,
        probability: 1.0,
    })
}

const WINTER_CSV: &str = include_str!("../data/weather/winter.csv");
const SPRING_CSV: &str = include_str!("../data/weather/spring.csv");
const SUMMER_CSV: &str = include_str!("../data/weather/summer.csv");
const AUTUMN_CSV: &str = include_str!("../data/weather/autumn.csv");
const DEMAND_CSV: &str = include_str!("../data/demand.csv");

/// Bundled synthetic seasonal profiles (not measured data).
pub fn default_weather() -> SeasonalWeather {
    [
        (Season::Winter, WINTER_CSV),
        (Season::Spring, SPRING_CSV),
        (Season::Summer, SUMMER_CSV),
        (Season::Autumn, AUTUMN_CSV),
    ]
    .into_iter()
    .map(|(s, csv)| {
        let hours = read_weather_csv(csv.as_bytes(), s.name()).expect("bundled weather parses");
        (s, hours)
    })
    .collect()
}

/// Reads `<dir>/{winter,spring,summer,autumn}.csv`.
pub fn load_weather_dir(dir: &Path) -> Result<SeasonalWeather> {
    Season::ALL
        .into_iter()
        .map(|s| {
            let path = dir.join(format!("{}.csv", s.name()));
            let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            Ok((s, read_weather_csv(file, &path.display().to_string())?))
        })
        .collect()
}

pub fn default_scenarios() -> Vec<Scenario> {
    build_scenarios(&default_weather(), &default_rows(), SNG_DENSITY_KG_M3)
        .expect("bundled scenario table is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SngDemand {
    #[default]
    None,
    /// Minimum SNG sale in t/h every hour.
    Mandatory { rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandProfile {
    pub electricity: Vec<f64>,
    pub heat: Vec<f64>,
    pub sng: Vec<f64>,
    #[serde(default)]
    pub sng_mode: SngDemand,
}

impl DemandProfile {
    pub fn new(electricity: Vec<f64>, heat: Vec<f64>, sng: Vec<f64>) -> Result<Self> {
        let d = DemandProfile {
            electricity,
            heat,
            sng,
            sng_mode: SngDemand::None,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn hours(&self) -> usize {
        self.electricity.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.electricity.len();
        if n == 0 || self.heat.len() != n || self.sng.len() != n {
            return Err(Error::Domain(
                "demand series must be non-empty and equally long".into(),
            ));
        }
        let all = self.electricity.iter().chain(&self.heat).chain(&self.sng);
        if all.clone().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain(
                "demands must be finite and non-negative".into(),
            ));
        }
        if let SngDemand::Mandatory { rate } = self.sng_mode {
            if !(rate >= 0.0) {
                return Err(Error::Domain(format!(
                    "mandatory SNG rate {rate} is negative"
                )));
            }
        }
        Ok(())
    }

    pub fn with_sng_mode(mut self, mode: SngDemand) -> Self {
        self.sng_mode = mode;
        self
    }

    /// Effective hourly requirement; coal, biomass and CO₂ are always zero.
    pub fn at(&self, t: usize) -> ResourceVec {
        let sng = match self.sng_mode {
            SngDemand::None => self.sng[t],
            SngDemand::Mandatory { rate } => self.sng[t].max(rate),
        };
        ResourceVec {
            electricity: self.electricity[t],
            heat: self.heat[t],
            sng,
            ..ResourceVec::default()
        }
    }

    pub fn truncated(&self, hours: usize) -> Self {
        DemandProfile {
            electricity: self.electricity[..hours].to_vec(),
            heat: self.heat[..hours].to_vec(),
            sng: self.sng[..hours].to_vec(),
            sng_mode: self.sng_mode,
        }
    }
}

#[derive(Deserialize)]
struct DemandRow {
    hour: usize,
    electricity: f64,
    heat: f64,
    sng: f64,
}

/// Reads a `hour,electricity,heat,sng` CSV.
pub fn read_demand_csv(reader: impl Read, label: &str) -> Result<DemandProfile> {
    let parse_err = |message: String| Error::Parse {
        what: label.to_string(),
        message,
    };
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers().map_err(|e| parse_err(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["hour", "electricity", "heat", "sng"] {
        return Err(parse_err(format!("unexpected header {header:?}")));
    }
    let (mut e, mut h, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for (i, row) in rdr.deserialize::<DemandRow>().enumerate() {
        let row = row.map_err(|err| parse_err(err.to_string()))?;
        if row.hour != i + 1 {
            return Err(parse_err(format!("row {} has hour {}", i + 1, row.hour)));
        }
        e.push(row.electricity);
        h.push(row.heat);
        s.push(row.sng);
    }
    DemandProfile::new(e, h, s).map_err(|err| parse_err(err.to_string()))
}

pub fn load_demand(path: &Path) -> Result<DemandProfile> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_demand_csv(file, &path.display().to_string())
}

/// Bundled synthetic demand (not measured data).
pub fn default_demand() -> DemandProfile {
    read_demand_csv(DEMAND_CSV.as_bytes(), "bundled demand").expect("bundled demand parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn default_set_has_32_equiprobable_rows() {
        let set = default_scenarios();
        assert_eq!(set.len(), 32);
        assert!(set.iter().all(|s| s.probability == 1.0 / 32.0));
        check_probabilities(&set).unwrap();
        let w1 = &set[0];
        assert_eq!(
            (
                w1.id.as_str(),
                w1.season,
                w1.policy,
                w1.co2_price,
                w1.gas_price
            ),
            ("w1", Some(Season::Winter), Policy::CapAndTrade, 50.0, 0.86)
        );
        let w18 = &set[17];
        assert_eq!(
            (w18.season, w18.policy, w18.co2_price, w18.gas_price),
            (Some(Season::Spring), Policy::EmissionTax, 100.0, 1.72)
        );
    }

    #[test]
    fn policy_and_season_filters() {
        let set = default_scenarios();
        let trade = filter_scenarios(&set, ScenarioFilter::Policy(Policy::CapAndTrade)).unwrap();
        assert_eq!(trade.len(), 16);
        let tax = filter_scenarios(&set, ScenarioFilter::Policy(Policy::EmissionTax)).unwrap();
        assert_eq!(tax.len(), 16);
        assert!(tax
            .iter()
            .all(|s| (s.probability - 1.0 / 16.0).abs() < 1e-15));
        let winter = filter_scenarios(&set, ScenarioFilter::Season(Season::Winter)).unwrap();
        assert_eq!(winter.len(), 8);
        check_probabilities(&winter).unwrap();
        let only_spring = filter_scenarios(&winter, ScenarioFilter::Season(Season::Spring));
        assert!(matches!(only_spring, Err(Error::EmptySet(_))));
    }

    #[test]
    fn missing_season_is_rejected() {
        let mut weather = default_weather();
        weather.remove(&Season::Autumn);
        let err = build_scenarios(&weather, &default_rows(), SNG_DENSITY_KG_M3).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "season"));
    }

    #[test]
    fn cap_values() {
        assert_eq!(co2_cap(100.0), 30.0);
        assert_eq!(co2_cap(0.0), 0.0);
        assert_relative_eq!(co2_cap(173.2), 51.96, max_relative = 1e-14);
    }

    #[test]
    fn averaged_prices() {
        let avg = averaged_scenario(&default_scenarios(), Policy::EmissionTax).unwrap();
        assert_relative_eq!(avg.gas_price, 1.29, max_relative = 1e-12);
        assert_relative_eq!(avg.co2_price, 75.0, max_relative = 1e-12);
        assert_eq!(avg.policy, Policy::EmissionTax);
        assert_eq!(avg.hours(), 24);
        assert_eq!(avg.probability, 1.0);
    }

    #[test]
    fn averaging_a_singleton_is_identity() {
        let set = default_scenarios();
        let one = filter_scenarios(&set[..1], ScenarioFilter::All).unwrap();
        let avg = averaged_scenario(&one, Policy::CapAndTrade).unwrap();
        assert_eq!(avg, one[0]);
    }

    #[test]
    fn gas_price_conversion() {
        assert_relative_eq!(
            sng_price_per_tonne(0.717, SNG_DENSITY_KG_M3),
            1000.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn demand_csv_and_mandatory_sng() {
        let d = default_demand();
        assert_eq!(d.hours(), 24);
        assert_eq!(d.at(0).sng, 0.0);
        let m = d.clone().with_sng_mode(SngDemand::Mandatory { rate: 0.25 });
        assert_eq!(m.at(5).sng, 0.25);
        assert_eq!(m.at(5).electricity, d.electricity[5]);
        let bad = "hour,electricity,heat\n1,2,3\n";
        assert!(read_demand_csv(bad.as_bytes(), "x").is_err());
        let neg = "hour,electricity,heat,sng\n1,-2,3,0\n";
        assert!(read_demand_csv(neg.as_bytes(), "x").is_err());
    }

    #[test]
    fn building_is_deterministic() {
        assert_eq!(default_scenarios(), default_scenarios());
    }

    proptest! {
        #[test]
        fn cap_is_linear(p in 0.0f64..1000.0, k in 0.0f64..10.0) {
            prop_assert!((co2_cap(k * p) - k * co2_cap(p)).abs() <= 1e-12 * (1.0 + k * p));
        }

        #[test]
        fn any_filter_keeps_a_distribution(mask in proptest::collection::vec(any::<bool>(), 32)) {
            let set: Vec<Scenario> = default_scenarios()
                .into_iter()
                .zip(&mask)
                .filter(|(_, m)| **m)
                .map(|(s, _)| s)
                .collect();
            prop_assume!(!set.is_empty());
            let kept = filter_scenarios(&set, ScenarioFilter::All).unwrap();
            check_probabilities(&kept).unwrap();
        }
    }
}
