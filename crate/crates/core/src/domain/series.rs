use serde::{Deserialize, Serialize};

/// A per-slot quantity that is either constant over the horizon or given
/// slot by slot. Serializes as a bare number or as an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Series<T> {
    Constant(T),
    PerSlot(Vec<T>),
}

impl<T: Copy> Series<T> {
    /// Value at `slot`. Per-slot series must cover the horizon; configs are
    /// validated before any slot is read.
    pub fn at(&self, slot: usize) -> T {
        match self {
            Series::Constant(v) => *v,
            Series::PerSlot(values) => values[slot],
        }
    }

    /// Number of explicit entries, or `None` for a constant.
    pub fn explicit_len(&self) -> Option<usize> {
        match self {
            Series::Constant(_) => None,
            Series::PerSlot(values) => Some(values.len()),
        }
    }

    pub fn covers(&self, horizon: usize) -> bool {
        self.explicit_len().is_none_or(|len| len == horizon)
    }

    pub fn values(&self, horizon: usize) -> impl Iterator<Item = T> + '_ {
        (0..horizon).map(move |t| self.at(t))
    }

    pub fn to_vec(&self, horizon: usize) -> Vec<T> {
        self.values(horizon).collect()
    }
}

impl Series<f64> {
    pub fn max(&self, horizon: usize) -> f64 {
        self.values(horizon).fold(f64::NEG_INFINITY, f64::max)
    }
}

impl<T> From<Vec<T>> for Series<T> {
    fn from(values: Vec<T>) -> Self {
        Series::PerSlot(values)
    }
}
