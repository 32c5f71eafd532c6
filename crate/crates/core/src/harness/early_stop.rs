use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EarlyStopError {
    #[error("no scores given")]
    EmptyScores,
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
}

/// Monitors the BERTScore F1 of each epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EarlyStopPolicy {
    pub max_epochs: usize,
    pub patience: Option<usize>,
}

impl EarlyStopPolicy {
    pub fn validate(&self) -> Result<(), EarlyStopError> {
        if self.max_epochs == 0 {
            return Err(EarlyStopError::InvalidPolicy("max_epochs must be at least 1".into()));
        }
        if self.patience == Some(0) {
            return Err(EarlyStopError::InvalidPolicy("patience must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EarlyStopOutcome {
    pub best_epoch: usize,
    pub stop_epoch: usize,
}

impl EarlyStopOutcome {
    /// Results-table notation: `best (max;patience)`, or `best (max)` without patience.
    pub fn notation(&self, policy: &EarlyStopPolicy) -> String {
        match policy.patience {
            Some(p) => format!("{} ({};{})", self.best_epoch, policy.max_epochs, p),
            None => format!("{} ({})", self.best_epoch, policy.max_epochs),
        }
    }
}

/// Best epoch is the first maximum seen; training stops at the first epoch
/// that is `patience` epochs past the best, otherwise after
/// `min(len, max_epochs)` epochs. NaN never counts as an improvement.
pub fn early_stop_select(scores: &[f64], policy: &EarlyStopPolicy) -> Result<EarlyStopOutcome, EarlyStopError> {
    policy.validate()?;
    if scores.is_empty() {
        return Err(EarlyStopError::EmptyScores);
    }
    let horizon = scores.len().min(policy.max_epochs);
    let mut best_epoch = 0;
    for epoch in 0..horizon {
        if scores[epoch] > scores[best_epoch] || scores[best_epoch].is_nan() && !scores[epoch].is_nan() {
            best_epoch = epoch;
        }
        if let Some(p) = policy.patience {
            if epoch - best_epoch >= p {
                return Ok(EarlyStopOutcome { best_epoch, stop_epoch: epoch });
            }
        }
    }
    Ok(EarlyStopOutcome { best_epoch, stop_epoch: horizon })
}
