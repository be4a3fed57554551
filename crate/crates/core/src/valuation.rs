use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// An exact rational valuation, or the tagged value of zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(Ratio<i64>),
    Infinite,
}

impl Valuation {
    pub fn int(n: i64) -> Self {
        Valuation::Finite(Ratio::from_integer(n))
    }

    pub fn finite(self) -> Option<Ratio<i64>> {
        match self {
            Valuation::Finite(r) => Some(r),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(r) => write!(f, "{r}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_is_largest() {
        assert!(Valuation::Infinite > Valuation::int(1_000_000));
        assert!(Valuation::Finite(Ratio::new(1, 6)) < Valuation::Finite(Ratio::new(1, 3)));
    }
}
