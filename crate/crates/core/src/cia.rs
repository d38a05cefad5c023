use serde::{Deserialize, Serialize};

/// A (confidentiality, integrity, availability) triple.
///
/// Used for task requirements, attack impact factors, mitigation impact
/// factors and dependency-matrix entries. Components are expected to lie
/// in `[0, 1]`; `validate_unit` checks that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cia {
    pub c: f64,
    pub i: f64,
    pub a: f64,
}

impl Cia {
    pub const ZERO: Cia = Cia { c: 0.0, i: 0.0, a: 0.0 };
    pub const ONE: Cia = Cia { c: 1.0, i: 1.0, a: 1.0 };

    pub fn new(c: f64, i: f64, a: f64) -> Self {
        Cia { c, i, a }
    }

    pub fn is_zero(&self) -> bool {
        self.c == 0.0 && self.i == 0.0 && self.a == 0.0
    }

    /// Component-wise check against `[0, 1]`.
    pub fn in_unit_range(&self) -> bool {
        [self.c, self.i, self.a]
            .iter()
            .all(|v| v.is_finite() && (0.0..=1.0).contains(v))
    }

    pub fn components(&self) -> [f64; 3] {
        [self.c, self.i, self.a]
    }
}

impl std::fmt::Display for Cia {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.c, self.i, self.a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_range_check() {
        assert!(Cia::new(0.0, 0.5, 1.0).in_unit_range());
        assert!(!Cia::new(-0.1, 0.5, 1.0).in_unit_range());
        assert!(!Cia::new(0.0, 1.5, 1.0).in_unit_range());
        assert!(!Cia::new(f64::NAN, 0.0, 0.0).in_unit_range());
    }

    #[test]
    fn zero_detection() {
        assert!(Cia::ZERO.is_zero());
        assert!(!Cia::new(0.0, 0.1, 0.0).is_zero());
    }
}
