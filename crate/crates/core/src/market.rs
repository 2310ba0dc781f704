//! One timestep of the market: order intake, first-come first-served
//! matching, sharing of unsold surplus, and grid settlement.
//!
//! Every function here mutates the house states it is given so that the
//! residual `ee` of each house always equals what it still has to sell
//! (positive) or still needs (negative).

use serde::{Deserialize, Serialize};

use crate::model::{ContractAccount, EntryId, HouseState, Participant};
use crate::{HouseId, Timestep, ENERGY_EPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Offer {
    pub prosumer: HouseId,
    pub amount: f64,
    pub submitted_seq: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuyRequest {
    pub consumer: HouseId,
    pub amount: f64,
    pub submitted_seq: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareRequest {
    pub consumer: HouseId,
    pub amount: f64,
    pub submitted_seq: usize,
}

/// Orders submitted in one timestep.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MarketBook {
    pub offers: Vec<Offer>,
    pub buy_requests: Vec<BuyRequest>,
    pub share_requests: Vec<ShareRequest>,
}

impl MarketBook {
    pub fn has_unmatched_offers(&self) -> bool {
        self.offers.iter().any(|o| o.amount > ENERGY_EPS)
    }
}

/// Battery flows caused by owners charging and discharging at intake.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntakeFlows {
    pub charged: f64,
    pub discharged: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TradeSource {
    FreshOffer,
    ReservedEnergy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trade {
    pub buyer: HouseId,
    pub seller: Participant,
    pub amount: f64,
    pub price: f64,
    pub fee_paid: f64,
    pub source: TradeSource,
    pub t: Timestep,
}

impl Trade {
    pub fn gross(&self) -> f64 {
        self.amount * self.price
    }

    /// What the seller keeps.
    pub fn proceeds(&self) -> f64 {
        self.gross() - self.fee_paid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Payer {
    Contract,
    Nobody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharingEvent {
    pub prosumer: HouseId,
    pub consumer: HouseId,
    pub gross: f64,
    /// Delivered to the consumer now.
    pub usable: f64,
    /// Stored in the consumer's battery under the sharer's reservation.
    pub reserved: f64,
    pub payer: Payer,
    pub payout: f64,
    pub t: Timestep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeePolicy {
    pub rate: f64,
}

impl FeePolicy {
    pub const NONE: FeePolicy = FeePolicy { rate: 0.0 };

    pub fn new(rate: f64) -> Self {
        assert!((0.0..1.0).contains(&rate), "fee rate must be in [0, 1)");
        Self { rate }
    }
}

/// Grid fallback totals for one timestep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GridSettlement {
    pub grid_energy: f64,
    pub grid_paid: f64,
    pub wasted: f64,
}

/// Order intake in house order.
///
/// Surplus charges the house battery first and the rest is offered. A
/// deficit drains the unreserved charge first; what remains becomes a buy
/// request if the house can pay for it at `expected_price`, otherwise a
/// share request for as much as its battery has room for.
pub fn submit(houses: &mut [HouseState], expected_price: f64) -> (MarketBook, IntakeFlows) {
    let mut book = MarketBook::default();
    let mut flows = IntakeFlows::default();
    let mut seq = 0;
    for h in houses.iter_mut() {
        if h.ee > 0.0 {
            let charged = h.battery.charge_battery(h.ee);
            flows.charged += charged;
            h.ee -= charged;
            if h.ee > ENERGY_EPS {
                book.offers.push(Offer {
                    prosumer: h.id(),
                    amount: h.ee,
                    submitted_seq: seq,
                });
                seq += 1;
            }
        } else if h.ee < 0.0 {
            let used = h.battery.discharge_usable(-h.ee);
            flows.discharged += used;
            h.ee += used;
            let need = h.need();
            if need > ENERGY_EPS {
                if h.balance >= need * expected_price {
                    book.buy_requests.push(BuyRequest {
                        consumer: h.id(),
                        amount: need,
                        submitted_seq: seq,
                    });
                    seq += 1;
                } else if h.battery.remaining_capacity() > ENERGY_EPS {
                    book.share_requests.push(ShareRequest {
                        consumer: h.id(),
                        amount: need.min(h.battery.remaining_capacity()),
                        submitted_seq: seq,
                    });
                    seq += 1;
                }
            }
        }
    }
    (book, flows)
}

fn pay(
    houses: &mut [HouseState],
    contract: &mut ContractAccount,
    buyer: HouseId,
    seller: Participant,
    amount: f64,
    price: f64,
    fee: FeePolicy,
) -> f64 {
    let gross = amount * price;
    houses[buyer].balance -= gross;
    houses[buyer].ee += amount;
    match seller {
        Participant::House(s) => {
            let fee_paid = gross * fee.rate;
            houses[s].balance += gross - fee_paid;
            contract.collect_fee(fee_paid);
            fee_paid
        }
        // the contract does not charge itself a fee
        Participant::Contract => {
            contract.record_sale(gross);
            0.0
        }
    }
}

/// Fills buy requests from reservations that are still sellable, oldest
/// reservation first. Energy leaves the host battery and goes straight to
/// the buyer. Buyers never draw on reservations in their own battery or on
/// reservations they sold themselves.
#[allow(clippy::too_many_arguments)]
pub fn match_reserved(
    buy_requests: &mut [BuyRequest],
    houses: &mut [HouseState],
    contract: &mut ContractAccount,
    now: Timestep,
    tau: usize,
    price: f64,
    fee: FeePolicy,
) -> Vec<Trade> {
    struct Candidate {
        created_at: Timestep,
        host: HouseId,
        entry: EntryId,
        seller: Participant,
    }
    let mut candidates: Vec<Candidate> = houses
        .iter()
        .flat_map(|h| {
            h.battery
                .reserved_entries()
                .iter()
                .filter(|e| e.is_sellable(now, tau))
                .map(move |e| Candidate {
                    created_at: e.created_at,
                    host: h.id(),
                    entry: e.id,
                    seller: e.seller,
                })
        })
        .collect();
    candidates.sort_by_key(|c| (c.created_at, c.host, c.entry));

    let mut trades = Vec::new();
    buy_requests.sort_by_key(|r| r.submitted_seq);
    for req in buy_requests.iter_mut() {
        for c in &candidates {
            if req.amount <= ENERGY_EPS {
                break;
            }
            if c.host == req.consumer || c.seller == Participant::House(req.consumer) {
                continue;
            }
            // a missing entry was emptied by an earlier request
            let Ok(drawn) = houses[c.host].battery.draw_reserved(c.entry, req.amount) else {
                continue;
            };
            if drawn <= 0.0 {
                continue;
            }
            req.amount -= drawn;
            let fee_paid = pay(houses, contract, req.consumer, c.seller, drawn, price, fee);
            trades.push(Trade {
                buyer: req.consumer,
                seller: c.seller,
                amount: drawn,
                price,
                fee_paid,
                source: TradeSource::ReservedEnergy,
                t: now,
            });
        }
    }
    trades
}

/// First-come first-served matching of buy requests against fresh offers,
/// with partial fills on both sides.
pub fn match_offers(
    buy_requests: &mut [BuyRequest],
    offers: &mut [Offer],
    houses: &mut [HouseState],
    contract: &mut ContractAccount,
    now: Timestep,
    price: f64,
    fee: FeePolicy,
) -> Vec<Trade> {
    buy_requests.sort_by_key(|r| r.submitted_seq);
    offers.sort_by_key(|o| o.submitted_seq);
    let mut trades = Vec::new();
    let mut oi = 0;
    for req in buy_requests.iter_mut() {
        while req.amount > ENERGY_EPS && oi < offers.len() {
            let offer = &mut offers[oi];
            let amount = req.amount.min(offer.amount);
            if amount > 0.0 {
                req.amount -= amount;
                offer.amount -= amount;
                houses[offer.prosumer].ee -= amount;
                let seller = Participant::House(offer.prosumer);
                let fee_paid = pay(houses, contract, req.consumer, seller, amount, price, fee);
                trades.push(Trade {
                    buyer: req.consumer,
                    seller,
                    amount,
                    price,
                    fee_paid,
                    source: TradeSource::FreshOffer,
                    t: now,
                });
            }
            if offer.amount <= ENERGY_EPS {
                oi += 1;
            }
        }
    }
    trades
}

fn deliver_share(
    houses: &mut [HouseState],
    offer: &mut Offer,
    request: &mut ShareRequest,
    energy: f64,
    eta: f64,
    seller: Participant,
    now: Timestep,
) -> (f64, f64) {
    let usable = eta * energy;
    let mut reserved = energy - usable;
    offer.amount -= energy;
    request.amount -= energy;
    houses[offer.prosumer].ee -= energy;
    let consumer = &mut houses[request.consumer];
    consumer.ee += usable;
    if reserved > 0.0 {
        // request amounts never exceed the consumer's free capacity
        let entry = consumer
            .battery
            .reserve(reserved, seller, now)
            .expect("share request larger than free battery capacity");
        reserved = entry.amount;
    }
    (usable, reserved)
}

/// Sharing through the central contract: for each offer/request pair the
/// contract buys the energy at `price` less the fee, provided its balance
/// covers `energy * price`, and keeps the right to resell the reserved part.
#[allow(clippy::too_many_arguments)]
pub fn share_cse(
    offers: &mut [Offer],
    share_requests: &mut [ShareRequest],
    houses: &mut [HouseState],
    contract: &mut ContractAccount,
    price: f64,
    eta: f64,
    fee: FeePolicy,
    now: Timestep,
) -> Vec<SharingEvent> {
    let mut events = Vec::new();
    if share_requests.is_empty() || !offers.iter().any(|o| o.amount > ENERGY_EPS) {
        return events;
    }
    for offer in offers.iter_mut() {
        for sh in share_requests.iter_mut() {
            if offer.amount <= ENERGY_EPS {
                break;
            }
            if sh.amount <= ENERGY_EPS {
                continue;
            }
            let energy = offer.amount.min(sh.amount);
            if contract.balance > energy * price {
                let payout = energy * price * (1.0 - fee.rate);
                contract.disburse(payout);
                houses[offer.prosumer].balance += payout;
                let (usable, reserved) = deliver_share(houses, offer, sh, energy, eta, Participant::Contract, now);
                events.push(SharingEvent {
                    prosumer: offer.prosumer,
                    consumer: sh.consumer,
                    gross: energy,
                    usable,
                    reserved,
                    payer: Payer::Contract,
                    payout,
                    t: now,
                });
            }
        }
    }
    events
}

/// Peer-to-peer sharing: the prosumer gives the energy away and keeps the
/// right to resell the reserved part.
pub fn share_p2p(
    offers: &mut [Offer],
    share_requests: &mut [ShareRequest],
    houses: &mut [HouseState],
    eta: f64,
    now: Timestep,
) -> Vec<SharingEvent> {
    let mut events = Vec::new();
    if share_requests.is_empty() || !offers.iter().any(|o| o.amount > ENERGY_EPS) {
        return events;
    }
    for offer in offers.iter_mut() {
        for sh in share_requests.iter_mut() {
            if offer.amount <= ENERGY_EPS {
                break;
            }
            if sh.amount <= ENERGY_EPS {
                continue;
            }
            let energy = offer.amount.min(sh.amount);
            let seller = Participant::House(offer.prosumer);
            let (usable, reserved) = deliver_share(houses, offer, sh, energy, eta, seller, now);
            events.push(SharingEvent {
                prosumer: offer.prosumer,
                consumer: sh.consumer,
                gross: energy,
                usable,
                reserved,
                payer: Payer::Nobody,
                payout: 0.0,
                t: now,
            });
        }
    }
    events
}

/// Buys every remaining need from the grid at `utility_price` and writes off
/// every unsold offer as waste. Clears all residuals.
pub fn settle_grid(houses: &mut [HouseState], offers: &[Offer], utility_price: f64) -> GridSettlement {
    let mut s = GridSettlement {
        wasted: offers.iter().map(|o| o.amount.max(0.0)).sum(),
        ..Default::default()
    };
    for h in houses.iter_mut() {
        let need = h.need();
        if need > 0.0 {
            let cost = need * utility_price;
            h.balance -= cost;
            s.grid_energy += need;
            s.grid_paid += cost;
        }
        h.ee = 0.0;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::HouseProfile;

    fn house(id: HouseId, capacity: f64, balance: f64) -> HouseState {
        let profile = HouseProfile {
            id,
            is_prosumer: true,
            panel_count: 17,
            panel_output: 170,
            battery_capacity: capacity,
            base_load: 1000.0,
        };
        HouseState::new(profile, balance, true)
    }

    #[test]
    fn intake_prosumer_charges_then_offers() {
        let mut hs = vec![house(0, 1000.0, 100.0)];
        hs[0].battery.charge_battery(500.0);
        hs[0].ee = 2000.0;
        let (book, flows) = submit(&mut hs, 3e-4);
        assert_eq!(flows.charged, 500.0);
        assert_eq!(book.offers, vec![Offer { prosumer: 0, amount: 1500.0, submitted_seq: 0 }]);
        assert_eq!(hs[0].ee, 1500.0);
    }

    #[test]
    fn intake_consumer_discharges_then_buys() {
        let mut hs = vec![house(0, 1000.0, 100.0)];
        hs[0].battery.charge_battery(300.0);
        hs[0].ee = -1000.0;
        let (book, flows) = submit(&mut hs, 3e-4);
        assert_eq!(flows.discharged, 300.0);
        assert_eq!(book.buy_requests[0].amount, 700.0);
        assert!(book.share_requests.is_empty());
    }

    #[test]
    fn intake_broke_consumer_asks_to_share() {
        let mut hs = vec![house(0, 400.0, 0.0)];
        hs[0].ee = -700.0;
        let (book, _) = submit(&mut hs, 3e-4);
        assert!(book.buy_requests.is_empty());
        assert_eq!(book.share_requests[0].amount, 400.0);
        assert_eq!(hs[0].ee, -700.0);
    }

    #[test]
    fn intake_broke_without_room_does_nothing() {
        let mut hs = vec![house(0, 0.0, -5.0)];
        hs[0].ee = -700.0;
        let (book, _) = submit(&mut hs, 3e-4);
        assert_eq!(book, MarketBook::default());
    }

    #[test]
    fn intake_affordability_is_inclusive() {
        let mut hs = vec![house(0, 0.0, 0.3)];
        hs[0].ee = -1000.0;
        let (book, _) = submit(&mut hs, 3e-4);
        assert_eq!(book.buy_requests.len(), 1);
    }

    #[test]
    fn reserved_partial_fill() {
        let mut hs = vec![house(0, 1000.0, 100.0), house(1, 1000.0, 0.0), house(2, 0.0, 0.0)];
        hs[1].battery.reserve(300.0, Participant::House(2), 0).unwrap();
        hs[0].ee = -500.0;
        let mut reqs = vec![BuyRequest { consumer: 0, amount: 500.0, submitted_seq: 0 }];
        let mut c = ContractAccount::default();
        let trades = match_reserved(&mut reqs, &mut hs, &mut c, 1, 12, 2e-4, FeePolicy::NONE);
        assert_eq!(trades.len(), 1);
        assert_eq!(trades[0].amount, 300.0);
        assert_eq!(trades[0].seller, Participant::House(2));
        assert_eq!(reqs[0].amount, 200.0);
        assert_eq!(hs[0].ee, -200.0);
        assert_eq!(hs[1].battery.charge(), 0.0);
    }

    #[test]
    fn reserved_expired_not_matchable() {
        let mut hs = vec![house(0, 1000.0, 100.0), house(1, 1000.0, 0.0), house(2, 0.0, 0.0)];
        hs[1].battery.reserve(300.0, Participant::House(2), 0).unwrap();
        let mut reqs = vec![BuyRequest { consumer: 0, amount: 500.0, submitted_seq: 0 }];
        let mut c = ContractAccount::default();
        assert!(match_reserved(&mut reqs, &mut hs, &mut c, 12, 12, 2e-4, FeePolicy::NONE).is_empty());
    }

    #[test]
    fn reserved_skips_own_battery() {
        let mut hs = vec![house(0, 1000.0, 100.0), house(1, 0.0, 0.0)];
        hs[0].battery.reserve(300.0, Participant::House(1), 0).unwrap();
        let mut reqs = vec![BuyRequest { consumer: 0, amount: 500.0, submitted_seq: 0 }];
        let mut c = ContractAccount::default();
        assert!(match_reserved(&mut reqs, &mut hs, &mut c, 1, 12, 2e-4, FeePolicy::NONE).is_empty());
    }

    #[test]
    fn fee_split() {
        let mut hs = vec![house(0, 0.0, 100.0), house(1, 0.0, 100.0)];
        hs[0].ee = -1000.0;
        hs[1].ee = 1000.0;
        let mut reqs = vec![BuyRequest { consumer: 0, amount: 1000.0, submitted_seq: 0 }];
        let mut offers = vec![Offer { prosumer: 1, amount: 1000.0, submitted_seq: 1 }];
        let mut c = ContractAccount::default();
        let trades = match_offers(&mut reqs, &mut offers, &mut hs, &mut c, 0, 2e-4, FeePolicy::new(0.1));
        assert_eq!(trades.len(), 1);
        assert!((hs[0].balance - 99.8).abs() < 1e-12);
        assert!((hs[1].balance - 100.18).abs() < 1e-12);
        assert!((c.balance - 0.02).abs() < 1e-12);
        assert!((trades[0].fee_paid - 0.02).abs() < 1e-12);
        assert_eq!(hs[0].ee, 0.0);
        assert_eq!(hs[1].ee, 0.0);
    }

    #[test]
    fn reserved_contract_sale_has_no_fee() {
        let mut hs = vec![house(0, 0.0, 100.0), house(1, 2000.0, 0.0)];
        hs[1].battery.reserve(1000.0, Participant::Contract, 0).unwrap();
        hs[0].ee = -1000.0;
        let mut reqs = vec![BuyRequest { consumer: 0, amount: 1000.0, submitted_seq: 0 }];
        let mut c = ContractAccount::default();
        let t = match_reserved(&mut reqs, &mut hs, &mut c, 3, 12, 2e-4, FeePolicy::new(0.1));
        assert_eq!(t[0].fee_paid, 0.0);
        assert!((c.sales_total - 0.2).abs() < 1e-12);
        assert_eq!(c.fees_total, 0.0);
    }

    #[test]
    fn offers_fcfs_partial_fills() {
        let mut hs: Vec<_> = (0..4).map(|i| house(i, 0.0, 100.0)).collect();
        let mut reqs = vec![
            BuyRequest { consumer: 0, amount: 400.0, submitted_seq: 0 },
            BuyRequest { consumer: 1, amount: 300.0, submitted_seq: 1 },
        ];
        let mut offers = vec![
            Offer { prosumer: 2, amount: 500.0, submitted_seq: 2 },
            Offer { prosumer: 3, amount: 600.0, submitted_seq: 3 },
        ];
        let mut c = ContractAccount::default();
        let trades = match_offers(&mut reqs, &mut offers, &mut hs, &mut c, 0, 1e-4, FeePolicy::NONE);
        let got: Vec<_> = trades.iter().map(|t| (t.buyer, t.seller, t.amount)).collect();
        assert_eq!(
            got,
            vec![
                (0, Participant::House(2), 400.0),
                (1, Participant::House(2), 100.0),
                (1, Participant::House(3), 200.0)
            ]
        );
        assert_eq!(offers[1].amount, 400.0);
    }

    #[test]
    fn offers_empty_and_exact() {
        let mut hs: Vec<_> = (0..2).map(|i| house(i, 0.0, 100.0)).collect();
        let mut c = ContractAccount::default();
        let mut reqs = vec![BuyRequest { consumer: 0, amount: 100.0, submitted_seq: 0 }];
        assert!(match_offers(&mut reqs, &mut [], &mut hs, &mut c, 0, 1e-4, FeePolicy::NONE).is_empty());
        let mut offers = vec![Offer { prosumer: 1, amount: 100.0, submitted_seq: 1 }];
        let t = match_offers(&mut reqs, &mut offers, &mut hs, &mut c, 0, 1e-4, FeePolicy::NONE);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].amount, 100.0);
        assert_eq!(offers[0].amount, 0.0);
    }

    fn sharing_fixture() -> (Vec<HouseState>, Vec<Offer>, Vec<ShareRequest>) {
        let mut hs = vec![house(0, 0.0, 0.0), house(1, 1000.0, 0.0)];
        hs[0].ee = 1000.0;
        hs[1].ee = -600.0;
        let offers = vec![Offer { prosumer: 0, amount: 1000.0, submitted_seq: 0 }];
        let reqs = vec![ShareRequest { consumer: 1, amount: 600.0, submitted_seq: 1 }];
        (hs, offers, reqs)
    }

    #[test]
    fn cse_pays_prosumer_net_of_fee() {
        let (mut hs, mut offers, mut reqs) = sharing_fixture();
        let mut c = ContractAccount { balance: 10.0, fees_total: 10.0, ..Default::default() };
        let ev = share_cse(&mut offers, &mut reqs, &mut hs, &mut c, 2e-4, 0.5, FeePolicy::new(0.1), 5);
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].usable, ev[0].reserved), (300.0, 300.0));
        assert!((ev[0].payout - 0.108).abs() < 1e-12);
        assert!((hs[0].balance - 0.108).abs() < 1e-12);
        assert!((c.balance - (10.0 - 0.108)).abs() < 1e-12);
        assert_eq!(offers[0].amount, 400.0);
        assert_eq!(hs[1].battery.reserved_entries()[0].seller, Participant::Contract);
        assert_eq!(hs[1].battery.reserved_entries()[0].created_at, 5);
        assert_eq!(hs[1].ee, -300.0);
    }

    #[test]
    fn cse_needs_contract_funds() {
        let (mut hs, mut offers, mut reqs) = sharing_fixture();
        let mut c = ContractAccount::default();
        assert!(share_cse(&mut offers, &mut reqs, &mut hs, &mut c, 2e-4, 0.5, FeePolicy::new(0.1), 0).is_empty());
        assert_eq!(offers[0].amount, 1000.0);
    }

    #[test]
    fn cse_no_offers_no_events() {
        let (mut hs, _, mut reqs) = sharing_fixture();
        let mut c = ContractAccount { balance: 10.0, ..Default::default() };
        let mut offers = vec![Offer { prosumer: 0, amount: 0.0, submitted_seq: 0 }];
        assert!(share_cse(&mut offers, &mut reqs, &mut hs, &mut c, 2e-4, 0.5, FeePolicy::new(0.1), 0).is_empty());
    }

    #[test]
    fn cse_skips_unaffordable_pair_but_continues() {
        let mut hs = vec![house(0, 0.0, 0.0), house(1, 5000.0, 0.0), house(2, 5000.0, 0.0)];
        hs[0].ee = 1000.0;
        let mut offers = vec![Offer { prosumer: 0, amount: 1000.0, submitted_seq: 0 }];
        let mut reqs = vec![
            ShareRequest { consumer: 1, amount: 1000.0, submitted_seq: 1 },
            ShareRequest { consumer: 2, amount: 100.0, submitted_seq: 2 },
        ];
        // 1000 Wh costs 0.2, 100 Wh costs 0.02
        let mut c = ContractAccount { balance: 0.1, ..Default::default() };
        let ev = share_cse(&mut offers, &mut reqs, &mut hs, &mut c, 2e-4, 0.5, FeePolicy::new(0.1), 0);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].consumer, 2);
    }

    #[test]
    fn p2p_sharing_split() {
        let (mut hs, mut offers, mut reqs) = sharing_fixture();
        let ev = share_p2p(&mut offers, &mut reqs, &mut hs, 0.5, 3);
        assert_eq!((ev[0].usable, ev[0].reserved, ev[0].payout), (300.0, 300.0, 0.0));
        assert_eq!(hs[1].battery.reserved_entries()[0].seller, Participant::House(0));
        assert_eq!(offers[0].amount, 400.0);
        assert_eq!(hs[0].balance, 0.0);

        let (mut hs, mut offers, mut reqs) = sharing_fixture();
        let ev = share_p2p(&mut offers, &mut reqs, &mut hs, 1.0, 3);
        assert_eq!((ev[0].usable, ev[0].reserved), (600.0, 0.0));
        assert!(hs[1].battery.reserved_entries().is_empty());

        let (mut hs, mut offers, mut reqs) = sharing_fixture();
        let ev = share_p2p(&mut offers, &mut reqs, &mut hs, 0.0, 3);
        assert_eq!((ev[0].usable, ev[0].reserved), (0.0, 600.0));
        assert_eq!(hs[1].ee, -600.0);
    }

    #[test]
    fn grid_settlement() {
        let mut hs = vec![house(0, 0.0, 1.0), house(1, 0.0, 1.0)];
        hs[0].ee = -300.0;
        hs[1].ee = 400.0;
        let offers = vec![Offer { prosumer: 1, amount: 400.0, submitted_seq: 0 }];
        let s = settle_grid(&mut hs, &offers, 3e-4);
        assert_eq!(s.grid_energy, 300.0);
        assert!((s.grid_paid - 0.09).abs() < 1e-15);
        assert_eq!(s.wasted, 400.0);
        assert!((hs[0].balance - 0.91).abs() < 1e-12);
        assert!(hs.iter().all(|h| h.ee == 0.0));
        assert_eq!(settle_grid(&mut hs, &[], 3e-4), GridSettlement::default());
    }
}
