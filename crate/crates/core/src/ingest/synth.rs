//! Deterministic stand-in for a national hourly demand/generation/price table.
//!
//! Used when no real table is at hand (tests, demos). The series follow the
//! familiar shapes of a southern-European grid: a solar bell curve whose
//! height and width track the season and a day-to-day cloudiness process,
//! a load curve with morning and evening peaks and quieter weekends, and a
//! price loosely tied to load.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::table::TimeSeriesTable;

/// 2015-01-01T00:00:00Z
pub const DEFAULT_START: i64 = 1_420_070_400;

pub const HOURS_PER_YEAR: usize = 8_760;

const SOLAR_PEAK_MW: f64 = 5_000.0;
const LOAD_BASE_MW: f64 = 28_000.0;
const PV_SHARE: f64 = 0.6;
const SOLAR_NIGHT_FLOOR_MW: f64 = 40.0;

pub fn synthetic_table(hours: usize, seed: u64) -> TimeSeriesTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");

    let mut timestamps = Vec::with_capacity(hours);
    let mut solar = Vec::with_capacity(hours);
    let mut load = Vec::with_capacity(hours);
    let mut price = Vec::with_capacity(hours);

    let mut clearness: f64 = 0.8;
    for t in 0..hours {
        let day = t / 24;
        let hour = (t % 24) as f64 + 0.5;
        if t % 24 == 0 {
            // AR(1) day-to-day cloudiness
            let shock: f64 = noise.sample(&mut rng);
            clearness = (0.75 + 0.6 * (clearness - 0.75) + 0.18 * shock).clamp(0.15, 1.0);
        }
        let season = (2.0 * PI * (day as f64 - 80.0) / 365.0).sin();
        let day_length = 12.0 + 2.6 * season;
        let sunrise = 13.5 - day_length / 2.0;
        let sunset = sunrise + day_length;
        let hourly_cloud = (1.0 + 0.05 * noise.sample(&mut rng)).clamp(0.8, 1.2);
        // photovoltaic: follows the sun
        let pv = if hour > sunrise && hour < sunset {
            (PI * (hour - sunrise) / day_length).sin()
        } else {
            0.0
        };
        // solar thermal with storage: flat from mid-morning into the evening
        let thermal = ramp(hour, sunrise + 1.0, sunrise + 3.0) * (1.0 - ramp(hour, sunset + 1.0, sunset + 4.0));
        let s = SOLAR_PEAK_MW
            * clearness
            * (PV_SHARE * (0.8 + 0.2 * season) * pv * hourly_cloud + (1.0 - PV_SHARE) * (0.6 + 0.4 * season) * thermal);
        solar.push(s.max(0.0) + SOLAR_NIGHT_FLOOR_MW);

        let weekday = (day + 3) % 7; // 2015-01-01 was a Thursday
        let weekend = if weekday >= 5 { 0.9 } else { 1.0 };
        let h = hour;
        let daily = 0.78
            + 0.22 * (-((h - 11.5) / 3.0).powi(2)).exp()
            + 0.26 * (-((h - 20.5) / 2.2).powi(2)).exp()
            - 0.08 * (-((h - 4.5) / 2.5).powi(2)).exp();
        let seasonal = 1.0 + 0.08 * (2.0 * PI * day as f64 / 365.0).cos() + 0.04 * (4.0 * PI * (day as f64 - 20.0) / 365.0).cos();
        let l = LOAD_BASE_MW * daily * seasonal * weekend * (1.0 + 0.02 * noise.sample(&mut rng));
        load.push(l.max(0.0));

        let p = 50.0 + 22.0 * (l / LOAD_BASE_MW - 0.95) + 4.0 * noise.sample(&mut rng) + rng.random_range(-1.0..1.0);
        price.push((p.max(5.0) * 100.0).round() / 100.0);

        timestamps.push(DEFAULT_START + 3600 * t as i64);
    }

    TimeSeriesTable {
        timestamps,
        solar_generation: solar,
        total_load: load,
        utility_price: price,
    }
}

/// 0 before `from`, 1 after `to`, linear in between.
fn ramp(x: f64, from: f64, to: f64) -> f64 {
    ((x - from) / (to - from)).clamp(0.0, 1.0)
}
