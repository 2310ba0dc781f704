//! Microgrid clearing price.
//!
//! One price per timestep: the mean of the last three prices scaled by the
//! ratio of buy requests to offers, clamped between the feed-in tariff and
//! the utility price.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const HISTORY_LEN: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("feed-in tariff {fit} exceeds utility price {utility}")]
    InvalidBounds { utility: f64, fit: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceState {
    /// Most recent first.
    history: [f64; HISTORY_LEN],
    current_utility: f64,
    current_fit: f64,
}

impl PriceState {
    /// Seeds the history with the utility price.
    pub fn new(utility: f64, fit: f64) -> Result<Self, PricingError> {
        check_bounds(utility, fit)?;
        Ok(Self {
            history: [utility; HISTORY_LEN],
            current_utility: utility,
            current_fit: fit,
        })
    }

    pub fn history(&self) -> &[f64; HISTORY_LEN] {
        &self.history
    }

    pub fn utility(&self) -> f64 {
        self.current_utility
    }

    pub fn fit(&self) -> f64 {
        self.current_fit
    }

    /// Moves the ceiling and floor to this timestep's values.
    pub fn set_bounds(&mut self, utility: f64, fit: f64) -> Result<(), PricingError> {
        check_bounds(utility, fit)?;
        self.current_utility = utility;
        self.current_fit = fit;
        Ok(())
    }

    pub fn history_mean(&self) -> f64 {
        self.history.iter().sum::<f64>() / HISTORY_LEN as f64
    }

    /// Computes this timestep's price from `requests` buy requests and
    /// `offers` offers, and pushes it onto the history.
    ///
    /// With no offers the ratio is undefined and the utility price is used.
    pub fn clearing_price(&mut self, requests: usize, offers: usize) -> f64 {
        let p = quote(
            self.history_mean(),
            self.current_utility,
            self.current_fit,
            requests,
            offers,
        );
        self.history.rotate_right(1);
        self.history[0] = p;
        p
    }
}

pub fn init_price_state(utility: f64, fit: f64) -> Result<PriceState, PricingError> {
    PriceState::new(utility, fit)
}

/// The pricing rule without any state.
pub fn quote(history_mean: f64, utility: f64, fit: f64, requests: usize, offers: usize) -> f64 {
    if offers == 0 {
        return utility;
    }
    let raw = requests as f64 / offers as f64 * history_mean;
    fit.max(utility.min(raw))
}

fn check_bounds(utility: f64, fit: f64) -> Result<(), PricingError> {
    if fit > utility {
        return Err(PricingError::InvalidBounds { utility, fit });
    }
    Ok(())
}
