//! Working-precision bookkeeping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BITS_PER_DIGIT: f64 = std::f64::consts::LOG2_10;

/// Decimal precision policy passed by value into every numerical routine.
///
/// `work_digits` is what arithmetic is carried out at; `target_digits` is what
/// a caller may trust in a returned value. The gap is the guard.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionCtx {
    pub work_digits: u32,
    pub guard_digits: u32,
    pub target_digits: u32,
    pub max_refinements: u32,
}

impl Default for PrecisionCtx {
    fn default() -> Self {
        PrecisionCtx {
            work_digits: 70,
            guard_digits: 20,
            target_digits: 50,
            max_refinements: 3,
        }
    }
}

impl PrecisionCtx {
    pub fn new(target_digits: u32, guard_digits: u32, work_digits: u32) -> Result<Self> {
        if target_digits == 0 || guard_digits == 0 {
            return Err(Error::domain(
                "PrecisionCtx::new",
                "target and guard digits must be positive",
            ));
        }
        if work_digits < target_digits + guard_digits {
            return Err(Error::domain(
                "PrecisionCtx::new",
                format!(
                    "work_digits {work_digits} < target {target_digits} + guard {guard_digits}"
                ),
            ));
        }
        Ok(PrecisionCtx {
            work_digits,
            guard_digits,
            target_digits,
            max_refinements: 3,
        })
    }

    /// Context trusting `target` digits with the default 20-digit guard.
    pub fn with_target(target: u32) -> Self {
        PrecisionCtx {
            work_digits: target + 20,
            guard_digits: 20,
            target_digits: target,
            max_refinements: 3,
        }
    }

    /// Fixed working precision; target is whatever is left after the guard.
    pub fn with_work_digits(work: u32) -> Self {
        let guard = 20.min(work / 4).max(1);
        PrecisionCtx {
            work_digits: work,
            guard_digits: guard,
            target_digits: (work - guard).max(1),
            max_refinements: 3,
        }
    }

    /// Schedule for Hankel work of order `n`: about two digits lost per order.
    pub fn for_hankel(target: u32, n: usize) -> Self {
        let mut ctx = PrecisionCtx::with_target(target);
        ctx.work_digits += 2 * n as u32;
        ctx
    }

    pub fn bits(&self) -> u32 {
        (self.work_digits as f64 * BITS_PER_DIGIT).ceil() as u32 + 8
    }

    /// The same request at twice the working precision.
    pub fn doubled(&self) -> Self {
        PrecisionCtx {
            work_digits: self.work_digits * 2,
            ..*self
        }
    }

    pub fn raised_by(&self, extra_digits: u32) -> Self {
        PrecisionCtx {
            work_digits: self.work_digits + extra_digits,
            ..*self
        }
    }

    /// Cheaper context for certification oracles: just target + guard.
    pub fn oracle(&self) -> Self {
        PrecisionCtx {
            work_digits: self.target_digits + self.guard_digits,
            ..*self
        }
    }

    pub fn tolerance(&self) -> f64 {
        10f64.powi(-(self.target_digits as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_thin_guard() {
        assert!(PrecisionCtx::new(50, 20, 60).is_err());
        assert!(PrecisionCtx::new(50, 20, 70).is_ok());
    }

    #[test]
    fn hankel_schedule_grows_with_order() {
        let c = PrecisionCtx::for_hankel(50, 40);
        assert_eq!(c.work_digits, 150);
        assert!(c.work_digits >= c.target_digits + c.guard_digits);
    }
}
