use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// How change-points are read off an X-path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChangePointRule {
    /// T_1 = first t with X_t ≤ c X_{t−1}; afterwards the rule alternates
    /// between "> c X_{t−1}" (after odd k) and "≤ c X_{t−1}" (after even k).
    RatioThreshold { c: f64 },
    /// Every t with sign(X_t) ≠ sign(X_{t−1}); zero counts as positive.
    SignChange,
    /// Every t with X_t ≠ −X_{t−1}, i.e. the strict alternation breaks.
    ValueChange,
}

/// Ordered change-point times (indices into `path`, all ≥ 1).
pub fn detect_changepoints<T: Scalar>(path: &[T], rule: ChangePointRule) -> Vec<usize> {
    let mut out = Vec::new();
    match rule {
        ChangePointRule::RatioThreshold { c } => {
            let c = T::of(c);
            for t in 1..path.len() {
                let below = path[t] <= c * path[t - 1];
                // looking for "≤" while an even number of change-points has been seen
                if below == (out.len() % 2 == 0) {
                    out.push(t);
                }
            }
        }
        ChangePointRule::SignChange => {
            for t in 1..path.len() {
                if (path[t] >= T::zero()) != (path[t - 1] >= T::zero()) {
                    out.push(t);
                }
            }
        }
        ChangePointRule::ValueChange => {
            for t in 1..path.len() {
                if path[t] != -path[t - 1] {
                    out.push(t);
                }
            }
        }
    }
    out
}
