use serde::{Deserialize, Serialize};

use super::profiles::{peak_solar_capacity, HouseProfile};
use super::table::TimeSeriesTable;
use super::IngestError;
use crate::Timestep;

const WH_PER_MWH: f64 = 1_000_000.0;

/// Feed-in tariff as a fraction of the utility price.
pub const FIT_FRACTION: f64 = 1.0 / 3.0;

/// Per-house hourly generation and load plus price series, ready to simulate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub profiles: Vec<HouseProfile>,
    /// Wh, indexed `[house][timestep]`.
    pub generation: Vec<Vec<f64>>,
    /// Wh, indexed `[house][timestep]`.
    pub load: Vec<Vec<f64>>,
    /// EUR/Wh.
    pub utility_price: Vec<f64>,
    /// EUR/Wh.
    pub fit_price: Vec<f64>,
    /// Total generation over total load.
    pub generation_ratio: f64,
}

/// Hourly solar output of a house: peak capacity scaled by the table's
/// normalized solar column.
pub fn solar_output(profile: &HouseProfile, t: Timestep, table: &TimeSeriesTable) -> Result<f64, IngestError> {
    let max = table.max_solar();
    if max <= 0.0 {
        return Err(IngestError::DegenerateTable("maximum solar generation is zero"));
    }
    let cell = table
        .solar_generation
        .get(t)
        .ok_or(IngestError::OutOfRange { t, len: table.len() })?;
    Ok(peak_solar_capacity(profile) * cell / max)
}

/// Hourly load of a house: base load shaped by the community load curve.
pub fn house_load(profile: &HouseProfile, t: Timestep, table: &TimeSeriesTable) -> Result<f64, IngestError> {
    let mean = table.mean_load();
    if mean <= 0.0 {
        return Err(IngestError::DegenerateTable("mean load is zero"));
    }
    let cell = table
        .total_load
        .get(t)
        .ok_or(IngestError::OutOfRange { t, len: table.len() })?;
    Ok(profile.base_load * cell / mean)
}

pub fn build_dataset(profiles: &[HouseProfile], table: &TimeSeriesTable, horizon: usize) -> Result<Dataset, IngestError> {
    if horizon > table.len() {
        return Err(IngestError::HorizonTooLong {
            horizon,
            len: table.len(),
        });
    }
    let mut generation = Vec::with_capacity(profiles.len());
    let mut load = Vec::with_capacity(profiles.len());
    for p in profiles {
        let gen_row = if p.is_prosumer {
            (0..horizon).map(|t| solar_output(p, t, table)).collect::<Result<_, _>>()?
        } else {
            vec![0.0; horizon]
        };
        let load_row = (0..horizon).map(|t| house_load(p, t, table)).collect::<Result<_, _>>()?;
        generation.push(gen_row);
        load.push(load_row);
    }
    let utility_price: Vec<f64> = table.utility_price[..horizon].iter().map(|p| p / WH_PER_MWH).collect();
    let fit_price = utility_price.iter().map(|p| p * FIT_FRACTION).collect();
    let mut dataset = Dataset {
        profiles: profiles.to_vec(),
        generation,
        load,
        utility_price,
        fit_price,
        generation_ratio: 0.0,
    };
    dataset.generation_ratio = dataset.recompute_ratio();
    Ok(dataset)
}

impl Dataset {
    pub fn n_houses(&self) -> usize {
        self.profiles.len()
    }

    pub fn horizon(&self) -> usize {
        self.utility_price.len()
    }

    pub fn total_generation(&self) -> f64 {
        self.generation.iter().flatten().sum()
    }

    pub fn total_load(&self) -> f64 {
        self.load.iter().flatten().sum()
    }

    pub fn recompute_ratio(&self) -> f64 {
        let load = self.total_load();
        if load > 0.0 {
            self.total_generation() / load
        } else {
            0.0
        }
    }

    /// Scales every generation cell so that total generation over total load
    /// equals `target`. Loads are left untouched.
    pub fn calibrate_generation_ratio(&self, target: f64) -> Result<Dataset, IngestError> {
        if !(target.is_finite() && target > 0.0) {
            return Err(IngestError::InvalidTarget(target));
        }
        let current = self.recompute_ratio();
        if current <= 0.0 {
            return Err(IngestError::NoGeneration);
        }
        let mut out = self.clone();
        if current != target {
            let scale = target / current;
            for cell in out.generation.iter_mut().flatten() {
                *cell *= scale;
            }
        }
        out.generation_ratio = out.recompute_ratio();
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(solar: &[f64], load: &[f64], price: &[f64]) -> TimeSeriesTable {
        TimeSeriesTable {
            timestamps: (0..solar.len() as i64).map(|i| i * 3600).collect(),
            solar_generation: solar.to_vec(),
            total_load: load.to_vec(),
            utility_price: price.to_vec(),
        }
    }

    fn house(id: usize, prosumer: bool, count: u32, output: u32, base_load: f64) -> HouseProfile {
        HouseProfile {
            id,
            is_prosumer: prosumer,
            panel_count: count,
            panel_output: output,
            battery_capacity: 10_000.0,
            base_load,
        }
    }

    #[test]
    fn solar_output_scaling() {
        let t = table(&[0.0, 50.0, 100.0], &[1.0; 3], &[1.0; 3]);
        let big = house(0, true, 20, 350, 1000.0);
        let small = house(1, true, 17, 170, 1000.0);
        assert_eq!(solar_output(&big, 2, &t).unwrap(), 7000.0);
        assert_eq!(solar_output(&big, 0, &t).unwrap(), 0.0);
        assert_eq!(solar_output(&small, 1, &t).unwrap(), 1445.0);
        assert_eq!(solar_output(&house(2, false, 20, 350, 1.0), 2, &t).unwrap(), 0.0);
    }

    #[test]
    fn solar_output_degenerate() {
        let t = table(&[0.0, 0.0], &[1.0; 2], &[1.0; 2]);
        assert!(matches!(
            solar_output(&house(0, true, 20, 350, 1.0), 0, &t),
            Err(IngestError::DegenerateTable(_))
        ));
    }

    #[test]
    fn house_load_scaling() {
        // mean load = 100
        let t = table(&[1.0; 3], &[100.0, 200.0, 0.0], &[1.0; 3]);
        let h = house(0, false, 17, 170, 1000.0);
        assert_eq!(house_load(&h, 0, &t).unwrap(), 1000.0);
        assert_eq!(house_load(&h, 1, &t).unwrap(), 2000.0);
        assert_eq!(house_load(&house(0, false, 17, 170, 800.0), 2, &t).unwrap(), 0.0);
        let flat = table(&[1.0], &[0.0], &[1.0]);
        assert!(matches!(house_load(&h, 0, &flat), Err(IngestError::DegenerateTable(_))));
    }

    #[test]
    fn consumer_generation_is_zero() {
        let t = table(&[1.0, 2.0, 3.0], &[1.0; 3], &[50.0; 3]);
        let d = build_dataset(&[house(0, false, 20, 350, 500.0)], &t, 2).unwrap();
        assert_eq!(d.generation, vec![vec![0.0, 0.0]]);
        assert_eq!(d.generation_ratio, 0.0);
    }

    #[test]
    fn price_units() {
        let t = table(&[1.0], &[1.0], &[50.0]);
        let d = build_dataset(&[house(0, true, 17, 170, 1.0)], &t, 1).unwrap();
        assert_eq!(d.utility_price[0], 5.0e-5);
        assert!((d.fit_price[0] - 5.0e-5 / 3.0).abs() < 1e-20);
    }

    #[test]
    fn horizon_too_long() {
        let t = table(&[1.0], &[1.0], &[50.0]);
        assert!(matches!(
            build_dataset(&[house(0, true, 17, 170, 1.0)], &t, 2),
            Err(IngestError::HorizonTooLong { horizon: 2, len: 1 })
        ));
    }

    #[test]
    fn toy_ratio_matches_hand_sum() {
        // solar max 100, mean load 100.
        // prosumer 17x200=3400 peak: gen = [1700, 3400]; load base 1000: [500, 1500]
        // consumer base 600: load [300, 900]
        // ratio = 5100 / 3200
        let t = table(&[50.0, 100.0], &[50.0, 150.0], &[40.0, 60.0]);
        let d = build_dataset(&[house(0, true, 17, 200, 1000.0), house(1, false, 18, 300, 600.0)], &t, 2).unwrap();
        assert_eq!(d.generation[0], vec![1700.0, 3400.0]);
        assert_eq!(d.load[1], vec![300.0, 900.0]);
        assert!((d.generation_ratio - 5100.0 / 3200.0).abs() < 1e-12);
    }

    #[test]
    fn calibration() {
        let t = table(&[50.0, 100.0], &[50.0, 150.0], &[40.0, 60.0]);
        let d = build_dataset(&[house(0, true, 17, 200, 1000.0), house(1, false, 18, 300, 600.0)], &t, 2).unwrap();
        let same = d.calibrate_generation_ratio(d.generation_ratio).unwrap();
        assert_eq!(same, d);

        for target in [0.12, 0.58, 1.28] {
            let c = d.calibrate_generation_ratio(target).unwrap();
            assert!((c.recompute_ratio() - target).abs() / target < 1e-9);
            assert!((c.generation_ratio - target).abs() / target < 1e-9);
            assert_eq!(c.load, d.load);
            let scale = target / d.generation_ratio;
            assert!((c.generation[0][1] - 3400.0 * scale).abs() < 1e-9);
        }
        assert!(matches!(d.calibrate_generation_ratio(0.0), Err(IngestError::InvalidTarget(_))));

        let none = build_dataset(&[house(0, false, 17, 200, 1000.0)], &t, 2).unwrap();
        assert!(matches!(none.calibrate_generation_ratio(0.5), Err(IngestError::NoGeneration)));
    }
}
