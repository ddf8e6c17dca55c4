use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::OhlcRecord;
use crate::error::{Error, Result};

/// Parameters of the synthetic market generator.
///
/// Returns follow `r_t = μ + φ·(r_{t−1} − μ) + σ_t·z_t` with a GARCH(1,1)
/// variance `σ²_t = ω + α·ε²_{t−1} + β·σ²_{t−1}` whose long-run level is
/// `volatility²`. Two further indices load on the same shocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub start_price: f64,
    pub start_date: NaiveDate,
    pub drift: f64,
    pub volatility: f64,
    pub ar_coefficient: f64,
    pub garch_alpha: f64,
    pub garch_beta: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            start_price: 100.0,
            start_date: NaiveDate::from_ymd_opt(2017, 1, 3).expect("valid date"),
            drift: 3e-4,
            volatility: 0.01,
            ar_coefficient: 0.0,
            garch_alpha: 0.08,
            garch_beta: 0.9,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.start_price > 0.0) {
            return bad(format!(
                "start_price must be positive, got {}",
                self.start_price
            ));
        }
        if !(self.volatility >= 0.0 && self.volatility < 0.2) {
            return bad(format!(
                "volatility must lie in [0, 0.2), got {}",
                self.volatility
            ));
        }
        if !(self.ar_coefficient.abs() < 1.0) {
            return bad(format!(
                "ar_coefficient must lie in (−1, 1), got {}",
                self.ar_coefficient
            ));
        }
        if !(self.garch_alpha >= 0.0
            && self.garch_beta >= 0.0
            && self.garch_alpha + self.garch_beta < 1.0)
        {
            return bad("GARCH coefficients must be non-negative with α + β < 1".into());
        }
        Ok(())
    }
}

/// Deterministic synthetic daily records carrying every column any feature
/// spec needs. Dates advance by one calendar day.
pub fn synthetic(seed: u64, n_days: usize, spec: &SyntheticSpec) -> Result<Vec<OhlcRecord>> {
    spec.validate()?;
    if n_days < 2 {
        return Err(Error::Config(format!(
            "n_days must be at least 2, got {n_days}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = move || -> f64 { StandardNormal.sample(&mut rng) };

    let omega = spec.volatility.powi(2) * (1.0 - spec.garch_alpha - spec.garch_beta);
    let mut var = spec.volatility.powi(2);
    let mut shock = 0.0f64;
    let mut ret = spec.drift;
    let (mut close, mut dia, mut ndx) = (
        spec.start_price,
        spec.start_price * 0.3,
        spec.start_price * 0.6,
    );

    let mut out = Vec::with_capacity(n_days);
    for day in 0..n_days {
        var = omega + spec.garch_alpha * shock * shock + spec.garch_beta * var;
        let sigma = var.sqrt();
        shock = sigma * z();
        ret = spec.drift + spec.ar_coefficient * (ret - spec.drift) + shock;

        let open = close * (1.0 + 0.25 * sigma * z());
        let new_close = close * (1.0 + ret);
        let up = (0.5 * sigma * z().abs()).min(0.5);
        let down = (0.5 * sigma * z().abs()).min(0.5);
        let high = open.max(new_close) * (1.0 + up);
        let low = open.min(new_close) * (1.0 - down);

        let dia_ret = spec.drift + 0.9 * (ret - spec.drift) + 0.4 * sigma * z();
        let ndx_ret = spec.drift + 1.2 * (ret - spec.drift) + 0.6 * sigma * z();
        dia *= 1.0 + dia_ret;
        ndx *= 1.0 + ndx_ret;
        let rv = |scale: f64, n: f64| scale * var * (0.25 * n).exp();

        let mut extra = BTreeMap::new();
        extra.insert("rv".to_string(), rv(1.0, z()));
        extra.insert("open_to_close".to_string(), new_close / open - 1.0);
        extra.insert("dia_close".to_string(), dia);
        extra.insert("dia_rv".to_string(), rv(0.8, z()));
        extra.insert("ndx_close".to_string(), ndx);
        extra.insert("ndx_rv".to_string(), rv(1.5, z()));

        out.push(OhlcRecord {
            date: spec.start_date + Days::new(day as u64),
            open,
            high,
            low,
            close: new_close,
            extra,
        });
        close = new_close;
    }
    Ok(out)
}
