use serde::{Deserialize, Serialize};

use super::{ScenarioKind, TimestepReport};
use crate::market::{Payer, TradeSource};
use crate::model::{ContractAccount, Participant};
use crate::Timestep;

/// Per-timestep slice of the aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimestepSeries {
    pub t: Timestep,
    pub price: f64,
    pub utility_price: f64,
    pub grid_wh: f64,
    pub paid_to_grid_eur: f64,
    pub earned_trading_eur: f64,
    pub wasted_wh: f64,
    pub shared_wh: f64,
    pub earned_sharing_eur: f64,
}

/// Totals for one scenario run, accumulated from its event stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetrics {
    pub scenario: ScenarioKind,
    pub grid_energy_wh: f64,
    pub paid_to_grid_eur: f64,
    /// House proceeds from fresh-offer trades, net of fees.
    pub earned_p2p_trading_eur: f64,
    pub wasted_wh: f64,
    pub shared_by_prosumers_wh: f64,
    /// Contract payouts for shared energy plus house proceeds from reselling
    /// their reservations.
    pub earned_from_sharing_eur: f64,
    pub contract: ContractAccount,
    pub per_house_shared_sent_wh: Vec<f64>,
    pub per_house_shared_received_wh: Vec<f64>,
    pub series: Vec<TimestepSeries>,
}

impl ScenarioMetrics {
    pub fn new(scenario: ScenarioKind, n_houses: usize) -> Self {
        Self {
            scenario,
            grid_energy_wh: 0.0,
            paid_to_grid_eur: 0.0,
            earned_p2p_trading_eur: 0.0,
            wasted_wh: 0.0,
            shared_by_prosumers_wh: 0.0,
            earned_from_sharing_eur: 0.0,
            contract: ContractAccount::default(),
            per_house_shared_sent_wh: vec![0.0; n_houses],
            per_house_shared_received_wh: vec![0.0; n_houses],
            series: Vec::new(),
        }
    }

    /// Rebuilds the metrics from a recorded event stream.
    pub fn from_reports<'a>(scenario: ScenarioKind, n_houses: usize, reports: impl IntoIterator<Item = &'a TimestepReport>) -> Self {
        let mut m = Self::new(scenario, n_houses);
        for r in reports {
            m.absorb(r);
        }
        m
    }

    pub fn absorb(&mut self, r: &TimestepReport) {
        let mut row = TimestepSeries {
            t: r.t,
            price: r.price,
            utility_price: r.utility_price,
            grid_wh: r.grid.grid_energy,
            paid_to_grid_eur: r.grid.grid_paid,
            earned_trading_eur: 0.0,
            wasted_wh: r.grid.wasted,
            shared_wh: 0.0,
            earned_sharing_eur: 0.0,
        };
        for tr in &r.trades {
            match (tr.seller, tr.source) {
                (Participant::House(_), TradeSource::FreshOffer) => row.earned_trading_eur += tr.proceeds(),
                (Participant::House(_), TradeSource::ReservedEnergy) => row.earned_sharing_eur += tr.proceeds(),
                (Participant::Contract, _) => self.contract.record_sale(tr.gross()),
            }
            if tr.fee_paid > 0.0 {
                self.contract.collect_fee(tr.fee_paid);
            }
        }
        for ev in &r.sharing {
            row.shared_wh += ev.gross;
            self.per_house_shared_sent_wh[ev.prosumer] += ev.gross;
            self.per_house_shared_received_wh[ev.consumer] += ev.gross;
            if ev.payer == Payer::Contract {
                row.earned_sharing_eur += ev.payout;
                self.contract.disburse(ev.payout);
            }
        }
        self.grid_energy_wh += row.grid_wh;
        self.paid_to_grid_eur += row.paid_to_grid_eur;
        self.earned_p2p_trading_eur += row.earned_trading_eur;
        self.wasted_wh += row.wasted_wh;
        self.shared_by_prosumers_wh += row.shared_wh;
        self.earned_from_sharing_eur += row.earned_sharing_eur;
        self.series.push(row);
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::GridEnergy => self.grid_energy_wh,
            Metric::PaidToGrid => self.paid_to_grid_eur,
            Metric::EarnedTrading => self.earned_p2p_trading_eur,
            Metric::Wasted => self.wasted_wh,
            Metric::Shared => self.shared_by_prosumers_wh,
            Metric::EarnedSharing => self.earned_from_sharing_eur,
        }
    }
}

/// The six headline aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    GridEnergy,
    PaidToGrid,
    EarnedTrading,
    Wasted,
    Shared,
    EarnedSharing,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::GridEnergy,
        Metric::PaidToGrid,
        Metric::EarnedTrading,
        Metric::Wasted,
        Metric::Shared,
        Metric::EarnedSharing,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Metric::GridEnergy => "Total Energy from Grid (Wh)",
            Metric::PaidToGrid => "Total Paid to Grid (EUR)",
            Metric::EarnedTrading => "Total Earned from P2P Trading (EUR)",
            Metric::Wasted => "Total Energy Wasted (Wh)",
            Metric::Shared => "Total Shared by Prosumers (Wh)",
            Metric::EarnedSharing => "Total Earned from Sharing (EUR)",
        }
    }

    pub fn is_money(self) -> bool {
        matches!(self, Metric::PaidToGrid | Metric::EarnedTrading | Metric::EarnedSharing)
    }
}

/// Scenario columns computed on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub generation_ratio: f64,
    pub n_prosumers: usize,
    pub columns: Vec<ScenarioMetrics>,
}

impl ComparisonTable {
    pub fn column(&self, scenario: ScenarioKind) -> Option<&ScenarioMetrics> {
        self.columns.iter().find(|c| c.scenario == scenario)
    }

    /// `1 - metric(to) / metric(from)`; `None` if either column is missing or
    /// the baseline is zero.
    pub fn reduction(&self, metric: Metric, from: ScenarioKind, to: ScenarioKind) -> Option<f64> {
        let base = self.column(from)?.get(metric);
        let new = self.column(to)?.get(metric);
        (base != 0.0).then(|| 1.0 - new / base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_is_relative_drop() {
        let mut a = ScenarioMetrics::new(ScenarioKind::TradingWithBatteries, 1);
        a.wasted_wh = 200.0;
        let mut b = ScenarioMetrics::new(ScenarioKind::P2PSE, 1);
        b.wasted_wh = 50.0;
        let t = ComparisonTable {
            generation_ratio: 0.5,
            n_prosumers: 1,
            columns: vec![a, b],
        };
        assert_eq!(t.reduction(Metric::Wasted, ScenarioKind::TradingWithBatteries, ScenarioKind::P2PSE), Some(0.75));
        assert_eq!(t.reduction(Metric::Shared, ScenarioKind::TradingWithBatteries, ScenarioKind::P2PSE), None);
        assert_eq!(t.reduction(Metric::Wasted, ScenarioKind::CSE, ScenarioKind::P2PSE), None);
    }
}
