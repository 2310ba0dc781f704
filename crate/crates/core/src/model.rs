//! Houses, batteries with reservation ledgers, and the contract account.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::HouseProfile;
use crate::{HouseId, Timestep, ENERGY_EPS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("cannot reserve {requested} Wh, only {available} Wh free")]
    InsufficientCapacity { requested: f64, available: f64 },
    #[error("reserved entry {0} is not in the ledger")]
    StaleEntry(EntryId),
}

/// Who owns the right to sell a reservation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Participant {
    House(HouseId),
    Contract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntryId(pub u64);

impl std::fmt::Display for EntryId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Energy held in a host battery on behalf of a sharer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservedEntry {
    pub id: EntryId,
    pub seller: Participant,
    pub amount: f64,
    pub created_at: Timestep,
}

impl ReservedEntry {
    /// Whether the sharer may still sell this entry at `now`. Sellable from
    /// `created_at` through `created_at + tau - 1`.
    pub fn is_sellable(&self, now: Timestep, tau: usize) -> bool {
        now >= self.created_at && now - self.created_at < tau
    }
}

/// Lossless battery. `charge` includes reserved energy; only the unreserved
/// part is usable by the owner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Battery {
    capacity: f64,
    charge: f64,
    reserved: Vec<ReservedEntry>,
    next_id: u64,
}

impl Battery {
    pub fn new(capacity: f64) -> Self {
        assert!(capacity >= 0.0, "negative capacity");
        Self {
            capacity,
            charge: 0.0,
            reserved: Vec::new(),
            next_id: 0,
        }
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn remaining_capacity(&self) -> f64 {
        (self.capacity - self.charge).max(0.0)
    }

    pub fn reserved_total(&self) -> f64 {
        self.reserved.iter().map(|e| e.amount).sum()
    }

    /// Charge the owner may draw on.
    pub fn usable(&self) -> f64 {
        (self.charge - self.reserved_total()).max(0.0)
    }

    /// Ledger entries, oldest first.
    pub fn reserved_entries(&self) -> &[ReservedEntry] {
        &self.reserved
    }

    /// Stores up to `amount`, limited by free capacity. Returns what was stored.
    pub fn charge_battery(&mut self, amount: f64) -> f64 {
        let accepted = amount.max(0.0).min(self.remaining_capacity());
        self.charge += accepted;
        accepted
    }

    /// Draws up to `amount` from the unreserved charge. Returns what was drawn.
    pub fn discharge_usable(&mut self, amount: f64) -> f64 {
        let supplied = amount.max(0.0).min(self.usable());
        self.charge = (self.charge - supplied).max(0.0);
        supplied
    }

    /// Stores `amount` under a new reservation for `seller`.
    ///
    /// Requests that overshoot free capacity by no more than float noise are
    /// clamped rather than rejected.
    pub fn reserve(&mut self, amount: f64, seller: Participant, t: Timestep) -> Result<ReservedEntry, ModelError> {
        let available = self.remaining_capacity();
        if amount > available + ENERGY_EPS || amount < 0.0 {
            return Err(ModelError::InsufficientCapacity {
                requested: amount,
                available,
            });
        }
        let amount = amount.min(available);
        self.charge += amount;
        let entry = ReservedEntry {
            id: EntryId(self.next_id),
            seller,
            amount,
            created_at: t,
        };
        self.next_id += 1;
        if amount > 0.0 {
            self.reserved.push(entry.clone());
        }
        Ok(entry)
    }

    /// Takes up to `amount` out of a reservation. The entry disappears once empty.
    pub fn draw_reserved(&mut self, entry: EntryId, amount: f64) -> Result<f64, ModelError> {
        let idx = self
            .reserved
            .iter()
            .position(|e| e.id == entry)
            .ok_or(ModelError::StaleEntry(entry))?;
        let e = &mut self.reserved[idx];
        let drawn = amount.max(0.0).min(e.amount);
        e.amount -= drawn;
        self.charge = (self.charge - drawn).max(0.0);
        if e.amount <= ENERGY_EPS {
            // dust goes to the owner with the rest of the charge
            self.reserved.remove(idx);
        }
        Ok(drawn)
    }

    /// Drops every reservation whose selling window has closed. The energy
    /// stays in the battery and becomes usable by the owner.
    pub fn release_expired(&mut self, now: Timestep, tau: usize) -> f64 {
        let mut released = 0.0;
        self.reserved.retain(|e| {
            let expired = now >= e.created_at && now - e.created_at >= tau;
            if expired {
                released += e.amount;
            }
            !expired
        });
        released
    }
}

/// Mutable per-run state of a house.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseState {
    pub profile: HouseProfile,
    /// EUR. Goes negative only through grid purchases.
    pub balance: f64,
    pub battery: Battery,
    /// Net excess energy this timestep in Wh; negative means unmet need.
    pub ee: f64,
}

impl HouseState {
    pub fn new(profile: HouseProfile, balance: f64, batteries_enabled: bool) -> Self {
        let capacity = if batteries_enabled {
            profile.battery_capacity
        } else {
            0.0
        };
        Self {
            profile,
            balance,
            battery: Battery::new(capacity),
            ee: 0.0,
        }
    }

    pub fn id(&self) -> HouseId {
        self.profile.id
    }

    /// Outstanding need in Wh (zero when in surplus).
    pub fn need(&self) -> f64 {
        (-self.ee).max(0.0)
    }
}

/// Ledger of the central sharer. Starts empty; its only income is fees and
/// resale of reserved energy.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContractAccount {
    pub balance: f64,
    pub fees_total: f64,
    pub sales_total: f64,
    pub disbursed_total: f64,
}

impl ContractAccount {
    pub fn collect_fee(&mut self, amount: f64) {
        self.fees_total += amount;
        self.balance += amount;
    }

    pub fn record_sale(&mut self, amount: f64) {
        self.sales_total += amount;
        self.balance += amount;
    }

    pub fn disburse(&mut self, amount: f64) {
        self.disbursed_total += amount;
        self.balance -= amount;
    }

    /// Sales plus fees minus disbursements.
    pub fn net_earnings(&self) -> f64 {
        self.sales_total + self.fees_total - self.disbursed_total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn battery(capacity: f64, charge: f64) -> Battery {
        let mut b = Battery::new(capacity);
        b.charge_battery(charge);
        b
    }

    #[test]
    fn charge_clamps_to_room() {
        let mut b = battery(10_000.0, 9_500.0);
        assert_eq!(b.charge_battery(1_000.0), 500.0);
        assert_eq!(b.charge(), 10_000.0);
        assert_eq!(b.charge_battery(100.0), 0.0);
        let mut e = battery(10_000.0, 1_000.0);
        assert_eq!(e.charge_battery(0.0), 0.0);
        assert_eq!(e.charge(), 1_000.0);
    }

    #[test]
    fn discharge_skips_reserved() {
        let mut b = battery(10_000.0, 3_000.0);
        b.reserve(1_000.0, Participant::House(3), 0).unwrap();
        assert_eq!(b.charge(), 4_000.0);
        assert_eq!(b.discharge_usable(5_000.0), 3_000.0);
        assert_eq!(b.charge(), 1_000.0);
        assert_eq!(b.reserved_total(), 1_000.0);
        assert_eq!(b.discharge_usable(10.0), 0.0);
        assert_eq!(b.discharge_usable(0.0), 0.0);
    }

    #[test]
    fn reserve_checks_capacity() {
        let mut b = battery(1_000.0, 500.0);
        let e = b.reserve(300.0, Participant::Contract, 4).unwrap();
        assert_eq!((e.amount, e.created_at, e.seller), (300.0, 4, Participant::Contract));
        assert_eq!(b.charge(), 800.0);
        assert!(matches!(
            b.reserve(600.0, Participant::Contract, 4),
            Err(ModelError::InsufficientCapacity { .. })
        ));
        assert_eq!(b.charge(), 800.0);
    }

    #[test]
    fn reservations_keep_insertion_order() {
        let mut b = Battery::new(1_000.0);
        let a = b.reserve(100.0, Participant::House(1), 2).unwrap();
        let c = b.reserve(200.0, Participant::House(2), 2).unwrap();
        assert_ne!(a.id, c.id);
        let ids: Vec<_> = b.reserved_entries().iter().map(|e| e.id).collect();
        assert_eq!(ids, vec![a.id, c.id]);
    }

    #[test]
    fn draw_reserved_partial_and_full() {
        let mut b = Battery::new(1_000.0);
        let e = b.reserve(300.0, Participant::House(1), 0).unwrap();
        assert_eq!(b.draw_reserved(e.id, 200.0).unwrap(), 200.0);
        assert_eq!(b.reserved_entries()[0].amount, 100.0);
        assert_eq!(b.draw_reserved(e.id, 0.0).unwrap(), 0.0);
        assert_eq!(b.draw_reserved(e.id, 500.0).unwrap(), 100.0);
        assert!(b.reserved_entries().is_empty());
        assert_eq!(b.charge(), 0.0);
        assert_eq!(b.draw_reserved(e.id, 1.0), Err(ModelError::StaleEntry(e.id)));
    }

    #[test]
    fn expiry_boundary() {
        let mut b = Battery::new(1_000.0);
        b.reserve(400.0, Participant::House(1), 0).unwrap();
        assert_eq!(b.release_expired(11, 12), 0.0);
        assert_eq!(b.usable(), 0.0);
        assert_eq!(b.release_expired(12, 12), 400.0);
        assert_eq!(b.usable(), 400.0);
        assert_eq!(b.charge(), 400.0);
        assert_eq!(Battery::new(5.0).release_expired(3, 1), 0.0);
    }

    #[test]
    fn contract_ledger_balances() {
        let mut c = ContractAccount::default();
        c.collect_fee(1.5);
        c.disburse(1.0);
        c.record_sale(0.25);
        assert!((c.balance - (c.fees_total + c.sales_total - c.disbursed_total)).abs() < 1e-12);
        assert!((c.net_earnings() - 0.75).abs() < 1e-12);
    }

    #[derive(Debug, Clone)]
    enum Op {
        Charge(f64),
        Discharge(f64),
        Reserve(f64, usize),
        Draw(usize, f64),
        Release(usize),
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            (0.0..3_000.0f64).prop_map(Op::Charge),
            (0.0..3_000.0f64).prop_map(Op::Discharge),
            (0.0..2_000.0f64, 0..40usize).prop_map(|(a, t)| Op::Reserve(a, t)),
            (0..8usize, 0.0..2_000.0f64).prop_map(|(i, a)| Op::Draw(i, a)),
            (0..60usize).prop_map(Op::Release),
        ]
    }

    proptest! {
        #[test]
        fn ledger_invariants_hold(capacity in 0.0..15_000.0f64, ops in prop::collection::vec(op(), 0..60), tau in 1..24usize) {
            let mut b = Battery::new(capacity);
            for op in ops {
                let before = b.charge();
                let delta = match op {
                    Op::Charge(a) => b.charge_battery(a),
                    Op::Discharge(a) => -b.discharge_usable(a),
                    Op::Reserve(a, t) => b.reserve(a, Participant::House(99), t).map(|e| e.amount).unwrap_or(0.0),
                    Op::Draw(i, a) => match b.reserved_entries().get(i).map(|e| e.id) {
                        Some(id) => -b.draw_reserved(id, a).unwrap(),
                        None => 0.0,
                    },
                    Op::Release(now) => {
                        b.release_expired(now, tau);
                        let again = b.release_expired(now, tau);
                        prop_assert_eq!(again, 0.0);
                        0.0
                    }
                };
                prop_assert!((b.charge() - before - delta).abs() < 1e-6);
                prop_assert_eq!(b.capacity(), capacity);
                prop_assert!(b.charge() >= 0.0);
                prop_assert!(b.charge() <= b.capacity() + 1e-9);
                prop_assert!(b.reserved_total() <= b.charge() + 1e-6);
                prop_assert!(b.reserved_entries().iter().all(|e| e.amount > 0.0));
            }
        }
    }
}
