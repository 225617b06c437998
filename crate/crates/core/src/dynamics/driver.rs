use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MUTATION_RATE: f64 = 1e-6;
pub const DEFAULT_DIVISIONS: u64 = 100;
pub const DEFAULT_DRIVER_MUTATIONS: u64 = 3;

/// Cancer-driver parameters of the tumor growth probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverParams {
    /// Mutation rate per division.
    pub u: f64,
    /// Number of divisions.
    pub d: u64,
    /// Critical rate-limiting pathway driver mutations.
    pub k: u64,
    /// Stem cells.
    #[serde(rename = "N")]
    pub n_stem: u64,
}

impl DriverParams {
    pub fn with_stem_cells(n_stem: u64) -> Self {
        DriverParams {
            u: DEFAULT_MUTATION_RATE,
            d: DEFAULT_DIVISIONS,
            k: DEFAULT_DRIVER_MUTATIONS,
            n_stem,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u.is_finite() && (0.0..=1.0).contains(&self.u)) {
            return Err(Error::config(
                "u",
                format!("mutation rate {} is outside [0, 1]", self.u),
            ));
        }
        if self.k < 1 {
            return Err(Error::config(
                "k",
                "at least one driver mutation is required",
            ));
        }
        if self.n_stem < 1 {
            return Err(Error::config("N", "at least one stem cell is required"));
        }
        Ok(())
    }
}

/// `p = 1 - (1 - (1 - (1 - u)^d)^k)^N`.
///
/// Evaluated through `ln_1p`/`exp_m1` so the tiny probabilities produced by
/// realistic mutation rates keep their relative precision.
pub fn growth_probability(params: &DriverParams) -> Result<f64> {
    params.validate()?;
    let DriverParams { u, d, k, n_stem } = *params;
    // P(a given pathway is hit at least once over d divisions)
    let pathway = if d == 0 {
        0.0
    } else {
        -(d as f64 * (-u).ln_1p()).exp_m1()
    };
    // P(all k pathways hit in one cell)
    let cell = pathway.powf(k as f64);
    // P(at least one of N cells transformed)
    let p = -(n_stem as f64 * (-cell).ln_1p()).exp_m1();
    Ok(p.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(u: f64, d: u64, k: u64, n_stem: u64) -> DriverParams {
        DriverParams { u, d, k, n_stem }
    }

    fn naive(p: &DriverParams) -> f64 {
        1.0 - (1.0 - (1.0 - (1.0 - p.u).powf(p.d as f64)).powf(p.k as f64)).powf(p.n_stem as f64)
    }

    #[test]
    fn boundary_rates() {
        for (d, k, n) in [(1, 1, 1), (100, 3, 50), (7, 9, 650)] {
            assert_eq!(growth_probability(&params(0.0, d, k, n)).unwrap(), 0.0);
            assert_eq!(growth_probability(&params(1.0, d, k, n)).unwrap(), 1.0);
        }
        // no divisions, no mutations
        assert_eq!(growth_probability(&params(1.0, 0, 2, 4)).unwrap(), 0.0);
    }

    #[test]
    fn hand_evaluated_case() {
        // (1 - 0.5)^2 = 0.25; 1 - 0.25 = 0.75; 0.75^2 = 0.5625; N = 1
        let p = growth_probability(&params(0.5, 2, 2, 1)).unwrap();
        assert!((p - 0.5625).abs() < 1e-15, "{p}");
    }

    #[test]
    fn agrees_with_direct_formula() {
        for &(u, d, k, n) in &[
            (0.1, 3, 2, 5),
            (0.01, 50, 3, 20),
            (0.3, 1, 1, 1),
            (0.002, 200, 4, 400),
        ] {
            let p = params(u, d, k, n);
            let a = growth_probability(&p).unwrap();
            let b = naive(&p);
            assert!((a - b).abs() < 1e-12, "{p:?}: {a} vs {b}");
        }
    }

    #[test]
    fn tiny_default_rate_keeps_precision() {
        let p = growth_probability(&DriverParams::with_stem_cells(50)).unwrap();
        // 50 * (1e-4)^3 to first order
        let approx = 50.0 * (1.0 - (1.0f64 - 1e-6).powi(100)).powi(3);
        assert!((p / approx - 1.0).abs() < 1e-6, "{p} vs {approx}");
    }

    #[test]
    fn rejects_invalid() {
        assert!(
            matches!(growth_probability(&params(1.2, 1, 1, 1)), Err(Error::Config { field, .. }) if field == "u")
        );
        assert!(
            matches!(growth_probability(&params(0.1, 1, 0, 1)), Err(Error::Config { field, .. }) if field == "k")
        );
        assert!(
            matches!(growth_probability(&params(0.1, 1, 1, 0)), Err(Error::Config { field, .. }) if field == "N")
        );
    }

    #[test]
    fn serde_uses_capital_n() {
        let p: DriverParams = serde_json::from_str(r#"{"u":0.5,"d":2,"k":2,"N":1}"#).unwrap();
        assert_eq!(p, params(0.5, 2, 2, 1));
        assert!(serde_json::to_string(&p).unwrap().contains("\"N\":1"));
    }
}
