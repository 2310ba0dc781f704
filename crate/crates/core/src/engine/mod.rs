//! Hourly simulation loop, scenario comparison, and multi-seed batches.

mod batch;
mod metrics;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::{self, Dataset, IngestError, ProfileParams, TimeSeriesTable};
use crate::market::{self, FeePolicy, GridSettlement, IntakeFlows, SharingEvent, Trade};
use crate::model::{ContractAccount, HouseState};
use crate::pricing::PriceState;
use crate::Timestep;

pub use batch::{run_batch, BatchCell, BatchReport, CellStats};
pub use metrics::{ComparisonTable, Metric, ScenarioMetrics, TimestepSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    NoTrading,
    Trading,
    TradingWithBatteries,
    #[serde(rename = "c-se")]
    CSE,
    #[serde(rename = "p2p-se")]
    P2PSE,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sharing {
    Centralized,
    PeerToPeer,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::NoTrading,
        ScenarioKind::Trading,
        ScenarioKind::TradingWithBatteries,
        ScenarioKind::CSE,
        ScenarioKind::P2PSE,
    ];

    pub fn batteries_enabled(self) -> bool {
        !matches!(self, ScenarioKind::NoTrading | ScenarioKind::Trading)
    }

    pub fn trading_enabled(self) -> bool {
        self != ScenarioKind::NoTrading
    }

    pub fn sharing(self) -> Option<Sharing> {
        match self {
            ScenarioKind::CSE => Some(Sharing::Centralized),
            ScenarioKind::P2PSE => Some(Sharing::PeerToPeer),
            _ => None,
        }
    }

    /// Fees are only charged when a central sharer exists to collect them.
    pub fn fee_policy(self, fee_rate: f64) -> FeePolicy {
        match self {
            ScenarioKind::CSE => FeePolicy::new(fee_rate),
            _ => FeePolicy::NONE,
        }
    }

    /// Stable identifier used in configs and CSV headers.
    pub fn key(self) -> &'static str {
        match self {
            ScenarioKind::NoTrading => "no-trading",
            ScenarioKind::Trading => "trading",
            ScenarioKind::TradingWithBatteries => "trading-with-batteries",
            ScenarioKind::CSE => "c-se",
            ScenarioKind::P2PSE => "p2p-se",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::NoTrading => "No Trading",
            ScenarioKind::Trading => "Trading",
            ScenarioKind::TradingWithBatteries => "T&B",
            ScenarioKind::CSE => "C-SE",
            ScenarioKind::P2PSE => "P2P-SE",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownScenario(pub String);

impl fmt::Display for UnknownScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown scenario '{}'", self.0)
    }
}

impl std::error::Error for UnknownScenario {}

impl FromStr for ScenarioKind {
    type Err = UnknownScenario;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric() || *c == '&')
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match norm.as_str() {
            "notrading" => ScenarioKind::NoTrading,
            "trading" => ScenarioKind::Trading,
            "tradingwithbatteries" | "t&b" | "tb" => ScenarioKind::TradingWithBatteries,
            "cse" => ScenarioKind::CSE,
            "p2pse" => ScenarioKind::P2PSE,
            _ => return Err(UnknownScenario(s.to_string())),
        })
    }
}

/// Parameters of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Fraction of shared energy the consumer may use at once.
    pub eta: f64,
    /// Timesteps a reservation stays sellable by its sharer.
    pub tau: usize,
    /// Fee on seller proceeds in the centralized sharing scenario.
    pub fee_rate: f64,
    pub initial_balance: f64,
    pub n_houses: usize,
    /// Probability that a house is a prosumer.
    pub pr: f64,
    /// Timesteps to simulate; `None` uses the whole table.
    pub horizon: Option<usize>,
    pub seed: u64,
    pub target_generation_ratio: Option<f64>,
    pub profile_params: ProfileParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            eta: 0.5,
            tau: 12,
            fee_rate: 0.10,
            initial_balance: 100.0,
            n_houses: 25,
            pr: 0.5,
            horizon: None,
            seed: 42,
            target_generation_ratio: None,
            profile_params: ProfileParams::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(format!("eta {} outside [0, 1]", self.eta));
        }
        if self.tau < 1 {
            return Err("tau must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.fee_rate) {
            return Err(format!("fee rate {} outside [0, 1)", self.fee_rate));
        }
        if self.n_houses < 1 {
            return Err("need at least one house".into());
        }
        if !(0.0..=1.0).contains(&self.pr) {
            return Err(format!("prosumer probability {} outside [0, 1]", self.pr));
        }
        Ok(())
    }
}

/// Draws houses for `config.seed`, builds the dataset over the configured
/// horizon, and calibrates generation when a target ratio is set.
pub fn prepare_dataset(table: &TimeSeriesTable, config: &SimConfig) -> Result<Dataset, IngestError> {
    let profiles = ingest::generate_profiles_with(config.n_houses, config.pr, config.seed, &config.profile_params);
    let horizon = config.horizon.unwrap_or(table.len());
    let dataset = ingest::build_dataset(&profiles, table, horizon)?;
    match config.target_generation_ratio {
        Some(target) => dataset.calibrate_generation_ratio(target),
        None => Ok(dataset),
    }
}

/// Everything that happened in one timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimestepReport {
    pub t: Timestep,
    pub price: f64,
    pub utility_price: f64,
    pub offers: usize,
    pub buy_requests: usize,
    pub share_requests: usize,
    pub generation: f64,
    pub load: f64,
    pub released: f64,
    pub intake: IntakeFlows,
    pub trades: Vec<Trade>,
    pub sharing: Vec<SharingEvent>,
    pub grid: GridSettlement,
}

/// Mutable state of one scenario run.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    dataset: &'a Dataset,
    scenario: ScenarioKind,
    config: SimConfig,
    houses: Vec<HouseState>,
    contract: ContractAccount,
    prices: PriceState,
    next_t: Timestep,
}

impl<'a> Simulation<'a> {
    /// Fresh houses with the initial balance and empty batteries, an empty
    /// contract, and a price history seeded with the first utility price.
    ///
    /// # Panics
    ///
    /// Panics on an invalid config or an empty dataset.
    pub fn new(dataset: &'a Dataset, scenario: ScenarioKind, config: &SimConfig) -> Self {
        if let Err(e) = config.validate() {
            panic!("invalid config: {e}");
        }
        assert!(dataset.horizon() > 0, "empty dataset");
        let houses = dataset
            .profiles
            .iter()
            .map(|p| HouseState::new(p.clone(), config.initial_balance, scenario.batteries_enabled()))
            .collect();
        let prices = PriceState::new(dataset.utility_price[0], dataset.fit_price[0]).expect("feed-in tariff above utility price");
        Self {
            dataset,
            scenario,
            config: config.clone(),
            houses,
            contract: ContractAccount::default(),
            prices,
            next_t: 0,
        }
    }

    pub fn houses(&self) -> &[HouseState] {
        &self.houses
    }

    pub fn contract(&self) -> &ContractAccount {
        &self.contract
    }

    pub fn prices(&self) -> &PriceState {
        &self.prices
    }

    pub fn scenario(&self) -> ScenarioKind {
        self.scenario
    }

    pub fn next_timestep(&self) -> Timestep {
        self.next_t
    }

    pub fn is_finished(&self) -> bool {
        self.next_t >= self.horizon()
    }

    pub fn horizon(&self) -> usize {
        self.config.horizon.unwrap_or(self.dataset.horizon()).min(self.dataset.horizon())
    }

    pub fn total_battery_charge(&self) -> f64 {
        self.houses.iter().map(|h| h.battery.charge()).sum()
    }

    /// Runs the next timestep.
    pub fn step(&mut self) -> TimestepReport {
        let t = self.next_t;
        assert!(t < self.horizon(), "simulation already finished");
        self.next_t += 1;
        let d = self.dataset;
        let tau = self.config.tau;
        let up = d.utility_price[t];
        let fee = self.scenario.fee_policy(self.config.fee_rate);

        let released = self.houses.iter_mut().map(|h| h.battery.release_expired(t, tau)).sum();

        let (mut generation, mut load) = (0.0, 0.0);
        for (i, h) in self.houses.iter_mut().enumerate() {
            generation += d.generation[i][t];
            load += d.load[i][t];
            h.ee = d.generation[i][t] - d.load[i][t];
        }

        let (mut book, intake) = market::submit(&mut self.houses, up);

        self.prices.set_bounds(up, d.fit_price[t]).expect("feed-in tariff above utility price");
        let price = self.prices.clearing_price(book.buy_requests.len(), book.offers.len());

        let mut trades = Vec::new();
        if self.scenario.trading_enabled() {
            trades = market::match_reserved(&mut book.buy_requests, &mut self.houses, &mut self.contract, t, tau, price, fee);
            trades.extend(market::match_offers(
                &mut book.buy_requests,
                &mut book.offers,
                &mut self.houses,
                &mut self.contract,
                t,
                price,
                fee,
            ));
        }

        let sharing = match self.scenario.sharing() {
            Some(Sharing::Centralized) => market::share_cse(
                &mut book.offers,
                &mut book.share_requests,
                &mut self.houses,
                &mut self.contract,
                price,
                self.config.eta,
                fee,
                t,
            ),
            Some(Sharing::PeerToPeer) => {
                market::share_p2p(&mut book.offers, &mut book.share_requests, &mut self.houses, self.config.eta, t)
            }
            None => Vec::new(),
        };

        let grid = market::settle_grid(&mut self.houses, &book.offers, up);

        TimestepReport {
            t,
            price,
            utility_price: up,
            offers: book.offers.len(),
            buy_requests: book.buy_requests.len(),
            share_requests: book.share_requests.len(),
            generation,
            load,
            released,
            intake,
            trades,
            sharing,
            grid,
        }
    }
}

pub fn run_timestep(sim: &mut Simulation<'_>) -> TimestepReport {
    sim.step()
}

pub fn run_scenario(dataset: &Dataset, scenario: ScenarioKind, config: &SimConfig) -> ScenarioMetrics {
    let mut sim = Simulation::new(dataset, scenario, config);
    let mut metrics = ScenarioMetrics::new(scenario, dataset.n_houses());
    while !sim.is_finished() {
        metrics.absorb(&sim.step());
    }
    metrics
}

/// Like [`run_scenario`] but also returns the full event stream.
pub fn run_scenario_recorded(dataset: &Dataset, scenario: ScenarioKind, config: &SimConfig) -> (ScenarioMetrics, Vec<TimestepReport>) {
    let mut sim = Simulation::new(dataset, scenario, config);
    let mut metrics = ScenarioMetrics::new(scenario, dataset.n_houses());
    let mut reports = Vec::with_capacity(sim.horizon());
    while !sim.is_finished() {
        let r = sim.step();
        metrics.absorb(&r);
        reports.push(r);
    }
    (metrics, reports)
}

/// Runs every listed scenario on the same dataset with fresh state.
///
/// # Panics
///
/// Panics if `scenarios` is empty.
pub fn compare_scenarios(dataset: &Dataset, config: &SimConfig, scenarios: &[ScenarioKind]) -> ComparisonTable {
    assert!(!scenarios.is_empty(), "no scenarios to compare");
    ComparisonTable {
        generation_ratio: dataset.generation_ratio,
        n_prosumers: dataset.profiles.iter().filter(|p| p.is_prosumer).count(),
        columns: scenarios.iter().map(|&s| run_scenario(dataset, s, config)).collect(),
    }
}
