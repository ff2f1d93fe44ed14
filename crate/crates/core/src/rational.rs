//! Exact non-negative rationals used for rates, cache ratios and matching
//! sizes.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

pub type Rational = Ratio<u64>;

/// `"p/q"`, or `"p"` when the denominator is 1.
pub fn format(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let q: u64 = q.trim().parse().ok()?;
            if q == 0 {
                return None;
            }
            Some(Rational::new(p.trim().parse().ok()?, q))
        }
        None => s.parse().ok().map(Rational::from_integer),
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// JSON shape for a rational: both the exact form and a decimal rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactValue {
    pub exact: String,
    pub decimal: f64,
}

impl From<Rational> for ExactValue {
    fn from(r: Rational) -> Self {
        ExactValue {
            exact: format(&r),
            decimal: to_f64(&r),
        }
    }
}
