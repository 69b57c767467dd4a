use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative singular-value cutoff, multiplied by `max(rows, n) * sigma_max`.
    pub rank: f64,
    /// Band around a bias threshold reported as a tie.
    pub tie: f64,
    /// Absolute slack on `<a, phi> - b` for facet incidence.
    pub face: f64,
    pub solver: f64,
    /// Relative slack on domain boundaries.
    pub membership: f64,
    /// Largest number of subsets any brute-force enumeration may visit.
    pub enumeration_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-10,
            tie: 1e-9,
            face: 1e-9,
            solver: 1e-8,
            membership: 1e-12,
            enumeration_cap: 1e6,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.rank,
            self.tie,
            self.face,
            self.solver,
            self.membership,
            self.enumeration_cap,
        ];
        if all.iter().all(|t| *t > 0.0 && t.is_finite()) {
            Ok(())
        } else {
            Err("all tolerances must be positive and finite".into())
        }
    }
}
