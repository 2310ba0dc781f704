use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::HouseId;

pub const PANEL_COUNT_RANGE: (u32, u32) = (17, 20);
pub const PANEL_OUTPUT_RANGE: (u32, u32) = (170, 350);
pub const BATTERY_CAPACITY_RANGE: (f64, f64) = (5_000.0, 15_000.0);

/// Static parameters of one house.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseProfile {
    pub id: HouseId,
    pub is_prosumer: bool,
    pub panel_count: u32,
    /// Peak output of one panel in Wh per hour.
    pub panel_output: u32,
    /// Battery capacity in Wh. Consumers get one too.
    pub battery_capacity: f64,
    /// Average hourly load in Wh.
    pub base_load: f64,
}

/// Sampling ranges that are not fixed by the house model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    pub base_load_min: f64,
    pub base_load_max: f64,
}

impl Default for ProfileParams {
    fn default() -> Self {
        Self {
            base_load_min: 300.0,
            base_load_max: 2_500.0,
        }
    }
}

pub fn generate_profiles(n_houses: usize, pr: f64, seed: u64) -> Vec<HouseProfile> {
    generate_profiles_with(n_houses, pr, seed, &ProfileParams::default())
}

/// Draws `n_houses` profiles. Every field is drawn for every house, in a fixed
/// order, so the random stream does not depend on who turns out a prosumer.
///
/// # Panics
///
/// Panics if `n_houses` is zero, `pr` is outside `[0, 1]`, or the base-load
/// range is empty or non-positive.
pub fn generate_profiles_with(n_houses: usize, pr: f64, seed: u64, params: &ProfileParams) -> Vec<HouseProfile> {
    assert!(n_houses >= 1, "need at least one house");
    assert!((0.0..=1.0).contains(&pr), "prosumer probability must be in [0, 1]");
    assert!(
        params.base_load_min > 0.0 && params.base_load_min <= params.base_load_max,
        "invalid base load range"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_houses)
        .map(|id| {
            let is_prosumer = rng.random_bool(pr);
            let panel_count = rng.random_range(PANEL_COUNT_RANGE.0..=PANEL_COUNT_RANGE.1);
            let panel_output = rng.random_range(PANEL_OUTPUT_RANGE.0..=PANEL_OUTPUT_RANGE.1);
            let battery_capacity = rng.random_range(BATTERY_CAPACITY_RANGE.0..=BATTERY_CAPACITY_RANGE.1);
            let base_load = rng.random_range(params.base_load_min..=params.base_load_max);
            HouseProfile {
                id,
                is_prosumer,
                panel_count,
                panel_output,
                battery_capacity,
                base_load,
            }
        })
        .collect()
}

/// Peak hourly solar output of a house; zero for consumers.
pub fn peak_solar_capacity(profile: &HouseProfile) -> f64 {
    if !profile.is_prosumer {
        return 0.0;
    }
    profile.panel_count as f64 * profile.panel_output as f64
}
