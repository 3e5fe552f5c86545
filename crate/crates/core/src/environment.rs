//! Weather-to-device transforms: hub-height wind, tilted-plane irradiance,
//! PV cell temperature and efficiency.
//!
//! Solar geometry (incidence angle, zenith angle, extraterrestrial
//! radiation) is read from the weather data rather than computed from a
//! site and date.

use std::f64::consts::FRAC_PI_2;
use std::io::Read;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::catalog::{KlucherForm, SolarPhysics};
use crate::error::{Error, Result};

pub const HOURS: usize = 24;

/// `cos θz` below this with a non-zero beam component is rejected.
const HORIZON_TOL: f64 = 1e-6;

/// One hour of measured weather. Angles are radians in memory; the CSV
/// format stores them in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherHour {
    pub v_anemometer: f64,
    pub g_horizontal: f64,
    pub theta_a: f64,
    pub h0: f64,
    /// Beam incidence angle on the panel.
    pub theta: f64,
    pub theta_z: f64,
}

impl WeatherHour {
    pub fn validate(&self) -> Result<()> {
        let ok = self.v_anemometer >= 0.0
            && self.g_horizontal >= 0.0
            && self.h0 >= 0.0
            && (0.0..=std::f64::consts::PI).contains(&self.theta_z)
            && self.theta.is_finite()
            && self.theta_a.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid weather hour {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TiltedIrradiance {
    pub ci: f64,
    pub f: f64,
    pub f_mod: f64,
    pub g_d: f64,
    pub g_d_beta: f64,
    pub g_b_beta: f64,
    pub g_r_beta: f64,
    pub g_beta: f64,
    pub am: f64,
}

pub fn shear_wind_speed(
    v_anemometer: f64,
    z_anemometer: f64,
    z_hub: f64,
    alpha: f64,
) -> Result<f64> {
    if !(z_anemometer > 0.0 && z_hub > 0.0) {
        return Err(Error::Domain(format!(
            "heights must be positive (anemometer {z_anemometer}, hub {z_hub})"
        )));
    }
    Ok(v_anemometer * (z_hub / z_anemometer).powf(alpha))
}

/// `G / H₀`; zero at night when both vanish.
pub fn clearness_index(g: f64, h0: f64) -> Result<f64> {
    if h0 > 0.0 {
        Ok(g / h0)
    } else if g == 0.0 {
        Ok(0.0)
    } else {
        Err(Error::Domain(format!(
            "irradiance {g} W/m² with zero extraterrestrial radiation"
        )))
    }
}

/// Piecewise diffuse fraction correlation on the clearness index.
pub fn diffuse_fraction(ci: f64) -> f64 {
    if ci < 0.21 {
        0.995 - 0.081 * ci
    } else if ci <= 0.76 {
        0.724 + 2.738 * ci - 8.32 * ci * ci + 4.967 * ci * ci * ci
    } else {
        0.18
    }
}

/// Kasten–Young relative optical air mass.
pub fn air_mass(theta_z: f64) -> Result<f64> {
    if !(0.0..FRAC_PI_2).contains(&theta_z) {
        return Err(Error::Domain(format!(
            "air mass undefined for zenith angle {:.3}°",
            theta_z.to_degrees()
        )));
    }
    let deg = theta_z.to_degrees();
    Ok(1.0 / (theta_z.cos() + 0.50572 * (96.07995 - deg).powf(-1.6364)))
}

fn clamp_component(name: &str, v: f64) -> f64 {
    if v < 0.0 {
        debug!("clamping negative {name} irradiance {v:.6} W/m² to zero");
        0.0
    } else {
        v
    }
}

/// Total irradiance on a plane tilted by `beta` (radians) with the Klucher
/// diffuse model.
pub fn tilted_irradiance(hour: &WeatherHour, beta: f64, albedo: f64) -> Result<TiltedIrradiance> {
    tilted_irradiance_with(hour, beta, albedo, KlucherForm::AsPrinted)
}

pub fn tilted_irradiance_with(
    hour: &WeatherHour,
    beta: f64,
    albedo: f64,
    form: KlucherForm,
) -> Result<TiltedIrradiance> {
    hour.validate()?;
    if !(0.0..=FRAC_PI_2).contains(&beta) {
        return Err(Error::Domain(format!("tilt {beta} rad outside [0, π/2]")));
    }
    let g = hour.g_horizontal;
    if g == 0.0 {
        return Ok(TiltedIrradiance::default());
    }
    let ci = clearness_index(g, hour.h0)?;
    let f = diffuse_fraction(ci);
    let g_d = f * g;
    let f_mod = 1.0 - f * f;

    let sky_view = match form {
        KlucherForm::AsPrinted => 0.5 * (1.0 + (beta / 2.0).cos()),
        KlucherForm::Standard => 0.5 * (1.0 + beta.cos()),
    };
    let horizon = 1.0 + f_mod * (beta / 2.0).sin().powi(3);
    let circumsolar = 1.0 + f_mod * hour.theta.cos().powi(2) * hour.theta_z.sin().powi(3);
    let g_d_beta = clamp_component("diffuse", g_d * sky_view * horizon * circumsolar);

    let beam_horizontal = g - g_d;
    let cos_z = hour.theta_z.cos();
    let g_b_beta = if beam_horizontal > 0.0 {
        if cos_z <= HORIZON_TOL {
            return Err(Error::Domain(format!(
                "beam irradiance {beam_horizontal:.3} W/m² with the sun at or below the horizon"
            )));
        }
        clamp_component("beam", beam_horizontal * hour.theta.cos() / cos_z)
    } else {
        clamp_component("beam", beam_horizontal)
    };

    let g_r_beta = clamp_component("reflected", albedo * g * (1.0 - beta.cos()) / 2.0);
    let g_beta = g_d_beta + g_b_beta + g_r_beta;
    let am = if hour.theta_z < FRAC_PI_2 {
        air_mass(hour.theta_z)?
    } else {
        0.0
    };
    Ok(TiltedIrradiance {
        ci,
        f,
        f_mod,
        g_d,
        g_d_beta,
        g_b_beta,
        g_r_beta,
        g_beta,
        am,
    })
}

pub fn cell_temperature(theta_a: f64, h_spa: f64, g_beta: f64) -> f64 {
    theta_a + h_spa * g_beta
}

/// Cell efficiency as a fraction; the correlation itself yields percent.
pub fn pv_efficiency(g_beta: f64, theta_cell: f64, am: f64, coeffs: &SolarPhysics) -> f64 {
    if g_beta <= 0.0 {
        return 0.0;
    }
    pv_efficiency_percent(g_beta, theta_cell, am, coeffs).clamp(0.0, 100.0) / 100.0
}

/// Unclamped correlation value in percent.
pub fn pv_efficiency_percent(g_beta: f64, theta_cell: f64, am: f64, c: &SolarPhysics) -> f64 {
    let g = g_beta / c.g_beta0;
    let t = theta_cell / c.theta_cell0;
    let m = am / c.am0;
    c.p_spa * (c.q_spa * g + g.powf(c.m_spa)) * (1.0 + c.r_spa * t + c.s_spa * m + m.powf(c.u_spa))
}

/// Irradiance and efficiency of one array for one hour.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolarHour {
    pub irradiance: TiltedIrradiance,
    pub theta_cell: f64,
    pub efficiency: f64,
}

pub fn solar_hour(hour: &WeatherHour, beta: f64, phys: &SolarPhysics) -> Result<SolarHour> {
    let irradiance = tilted_irradiance_with(hour, beta, phys.albedo, phys.klucher)?;
    if irradiance.g_beta <= 0.0 {
        return Ok(SolarHour {
            irradiance,
            theta_cell: hour.theta_a,
            efficiency: 0.0,
        });
    }
    let theta_cell = cell_temperature(hour.theta_a, phys.h_spa, irradiance.g_beta);
    let efficiency = pv_efficiency(irradiance.g_beta, theta_cell, irradiance.am, phys);
    Ok(SolarHour {
        irradiance,
        theta_cell,
        efficiency,
    })
}

#[derive(Debug, Deserialize)]
struct WeatherRow {
    hour: usize,
    v_anemometer: f64,
    g_horizontal: f64,
    theta_a: f64,
    h0: f64,
    theta: f64,
    theta_z: f64,
}

/// Reads a 24-row weather profile; angle columns are degrees.
pub fn read_weather_csv(reader: impl Read, label: &str) -> Result<Vec<WeatherHour>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let parse_err = |e: csv::Error| Error::Parse {
        what: format!("weather profile `{label}`"),
        message: e.to_string(),
    };
    let headers = rdr.headers().map_err(parse_err)?.clone();
    let expected = [
        "hour",
        "v_anemometer",
        "g_horizontal",
        "theta_a",
        "h0",
        "theta",
        "theta_z",
    ];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse {
            what: format!("weather profile `{label}`"),
            message: format!("expected header `{}`", expected.join(",")),
        });
    }
    let mut hours = Vec::with_capacity(HOURS);
    for (i, row) in rdr.deserialize::<WeatherRow>().enumerate() {
        let row = row.map_err(parse_err)?;
        if row.hour != i + 1 {
            return Err(Error::Parse {
                what: format!("weather profile `{label}`"),
                message: format!("row {} has hour {}, expected {}", i + 1, row.hour, i + 1),
            });
        }
        let wh = WeatherHour {
            v_anemometer: row.v_anemometer,
            g_horizontal: row.g_horizontal,
            theta_a: row.theta_a,
            h0: row.h0,
            theta: row.theta.to_radians(),
            theta_z: row.theta_z.to_radians(),
        };
        wh.validate()?;
        hours.push(wh);
    }
    if hours.len() != HOURS {
        return Err(Error::Parse {
            what: format!("weather profile `{label}`"),
            message: format!("expected {HOURS} rows, found {}", hours.len()),
        });
    }
    Ok(hours)
}

pub fn write_weather_csv(hours: &[WeatherHour], writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Parse {
        what: "weather output".into(),
        message: e.to_string(),
    };
    w.write_record([
        "hour",
        "v_anemometer",
        "g_horizontal",
        "theta_a",
        "h0",
        "theta",
        "theta_z",
    ])
    .map_err(io)?;
    for (i, h) in hours.iter().enumerate() {
        w.write_record(&[
            (i + 1).to_string(),
            h.v_anemometer.to_string(),
            h.g_horizontal.to_string(),
            h.theta_a.to_string(),
            h.h0.to_string(),
            h.theta.to_degrees().to_string(),
            h.theta_z.to_degrees().to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<weather output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::default_catalog;
    use approx::assert_relative_eq;

    fn spa1() -> SolarPhysics {
        default_catalog()
            .get("SPA-1")
            .unwrap()
            .solar()
            .unwrap()
            .clone()
    }

    fn hour(g: f64, theta_deg: f64, zenith_deg: f64) -> WeatherHour {
        WeatherHour {
            v_anemometer: 5.0,
            g_horizontal: g,
            theta_a: 20.0,
            h0: 1200.0,
            theta: theta_deg.to_radians(),
            theta_z: zenith_deg.to_radians(),
        }
    }

    #[test]
    fn shear_matches_power_law() {
        // 5·8^(1/7), evaluated at 30 digits.
        let v = shear_wind_speed(5.0, 10.0, 80.0, 1.0 / 7.0).unwrap();
        assert_relative_eq!(v, 6.729_500_963_161_78, epsilon = 1e-12);
        assert_eq!(shear_wind_speed(7.3, 25.0, 25.0, 0.2).unwrap(), 7.3);
        assert_eq!(shear_wind_speed(0.0, 10.0, 80.0, 1.0 / 7.0).unwrap(), 0.0);
        assert!(shear_wind_speed(5.0, 0.0, 80.0, 0.1).is_err());
        assert!(shear_wind_speed(5.0, 10.0, -1.0, 0.1).is_err());
    }

    #[test]
    fn clearness_index_cases() {
        assert_eq!(clearness_index(500.0, 1000.0).unwrap(), 0.5);
        assert_eq!(clearness_index(800.0, 1000.0).unwrap(), 0.8);
        assert_eq!(clearness_index(0.0, 0.0).unwrap(), 0.0);
        assert!(clearness_index(10.0, 0.0).is_err());
    }

    #[test]
    fn diffuse_fraction_branches() {
        assert_eq!(diffuse_fraction(0.80), 0.18);
        assert_relative_eq!(diffuse_fraction(0.10), 0.9869, epsilon = 1e-12);
        assert_relative_eq!(diffuse_fraction(0.50), 0.633_875, epsilon = 1e-12);
    }

    #[test]
    fn air_mass_values() {
        assert_relative_eq!(
            air_mass(0.0).unwrap(),
            0.999_711_991_855_838,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            air_mass(60f64.to_radians()).unwrap(),
            1.994_292_852_529_25,
            epsilon = 1e-12
        );
        let near = air_mass(89f64.to_radians()).unwrap();
        assert!(near.is_finite() && near > 20.0);
        assert!(air_mass(FRAC_PI_2).is_err());
    }

    #[test]
    fn night_is_all_zero() {
        let h = WeatherHour {
            h0: 0.0,
            ..hour(0.0, 100.0, 110.0)
        };
        let t = tilted_irradiance(&h, 0.5, 0.2).unwrap();
        assert_eq!(t, TiltedIrradiance::default());
        let s = solar_hour(&h, 0.5, &spa1()).unwrap();
        assert_eq!(s.efficiency, 0.0);
    }

    #[test]
    fn horizontal_plane_with_overhead_sun_recovers_ghi() {
        // θ = θz = 0: the circumsolar and horizon terms vanish at β = 0.
        let h = hour(640.0, 0.0, 0.0);
        let t = tilted_irradiance(&h, 0.0, 0.35).unwrap();
        assert_relative_eq!(t.g_beta, 640.0, max_relative = 1e-12);
        assert_eq!(t.g_r_beta, 0.0);
    }

    #[test]
    fn vertical_reflected_component() {
        let h = WeatherHour {
            h0: 1000.0,
            ..hour(600.0, 40.0, 40.0)
        };
        let t = tilted_irradiance(&h, FRAC_PI_2, 0.2).unwrap();
        assert_relative_eq!(t.g_r_beta, 60.0, max_relative = 1e-12);
    }

    #[test]
    fn beam_with_sun_below_horizon_is_rejected() {
        let h = hour(300.0, 30.0, 95.0);
        assert!(tilted_irradiance(&h, 0.5, 0.2).is_err());
    }

    #[test]
    fn sun_behind_panel_clamps_beam() {
        let h = hour(300.0, 120.0, 60.0);
        let t = tilted_irradiance(&h, 0.5, 0.2).unwrap();
        assert_eq!(t.g_b_beta, 0.0);
        assert_eq!(t.g_beta, t.g_d_beta + t.g_b_beta + t.g_r_beta);
    }

    #[test]
    fn klucher_forms_differ_only_in_sky_view() {
        let h = hour(500.0, 30.0, 45.0);
        let beta = 50f64.to_radians();
        let printed = tilted_irradiance_with(&h, beta, 0.2, KlucherForm::AsPrinted).unwrap();
        let standard = tilted_irradiance_with(&h, beta, 0.2, KlucherForm::Standard).unwrap();
        let ratio = printed.g_d_beta / standard.g_d_beta;
        let expected = (1.0 + (beta / 2.0).cos()) / (1.0 + beta.cos());
        assert_relative_eq!(ratio, expected, max_relative = 1e-12);
        assert_eq!(printed.g_b_beta, standard.g_b_beta);
    }

    #[test]
    fn cell_temperature_cases() {
        assert_eq!(cell_temperature(25.0, 0.03, 0.0), 25.0);
        assert_relative_eq!(cell_temperature(25.0, 0.03, 1000.0), 55.0, epsilon = 1e-12);
        assert_relative_eq!(cell_temperature(-5.0, 0.02, 500.0), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn efficiency_at_reference_conditions() {
        let c = spa1();
        let eta = pv_efficiency(1000.0, 25.0, 1.5, &c);
        let unit = c.p_spa * (c.q_spa + 1.0) * (1.0 + c.r_spa + c.s_spa + 1.0) / 100.0;
        assert_relative_eq!(eta, unit, max_relative = 1e-14);
        assert_eq!(pv_efficiency(0.0, 25.0, 1.5, &c), 0.0);
    }

    #[test]
    fn efficiency_is_linear_in_p() {
        let c = spa1();
        let doubled = SolarPhysics {
            p_spa: 2.0 * c.p_spa,
            ..c.clone()
        };
        let a = pv_efficiency_percent(730.0, 41.0, 2.2, &c);
        let b = pv_efficiency_percent(730.0, 41.0, 2.2, &doubled);
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-15);
    }

    #[test]
    fn weather_csv_round_trip() {
        let hours: Vec<_> = (0..HOURS)
            .map(|i| hour(10.0 * i as f64, 30.0, 50.0))
            .collect();
        let mut buf = Vec::new();
        write_weather_csv(&hours, &mut buf).unwrap();
        let back = read_weather_csv(buf.as_slice(), "t").unwrap();
        for (a, b) in hours.iter().zip(&back) {
            assert_relative_eq!(a.theta_z, b.theta_z, max_relative = 1e-12);
            assert_eq!(a.g_horizontal, b.g_horizontal);
        }
        assert!(read_weather_csv("hour,foo\n1,2\n".as_bytes(), "bad").is_err());
    }
}
