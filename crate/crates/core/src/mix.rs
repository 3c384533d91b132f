use serde::{Deserialize, Serialize};

/// Stage capacity in percent units.
pub const STAGE_CAPACITY: f64 = 100.0;

/// Amounts of material A and B held by one pipeline stage, in percent of
/// stage capacity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MaterialMix {
    pub a: f64,
    pub b: f64,
}

impl MaterialMix {
    pub const EMPTY: MaterialMix = MaterialMix { a: 0.0, b: 0.0 };

    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn total(&self) -> f64 {
        self.a + self.b
    }

    /// Non-negative components that fit in one stage.
    pub fn is_valid(&self) -> bool {
        self.a >= 0.0 && self.b >= 0.0 && self.total() <= STAGE_CAPACITY + 1e-9
    }
}

/// Cumulative storage contents, split into correctly and wrongly routed
/// material.
///
/// `a_true` is material A in container A and `a_false` is material B that
/// ended up in container A; likewise for the B container.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StorageTally {
    pub a_true: f64,
    pub a_false: f64,
    pub b_true: f64,
    pub b_false: f64,
}

impl StorageTally {
    pub fn total(&self) -> f64 {
        self.a_true + self.a_false + self.b_true + self.b_false
    }

    pub fn add(&mut self, other: &StorageTally) {
        self.a_true += other.a_true;
        self.a_false += other.a_false;
        self.b_true += other.b_true;
        self.b_false += other.b_false;
    }

    /// Contents of container A.
    pub fn container_a(&self) -> f64 {
        self.a_true + self.a_false
    }

    /// Contents of container B.
    pub fn container_b(&self) -> f64 {
        self.b_true + self.b_false
    }
}
