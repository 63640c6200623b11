use crate::error::{invalid, Result};
use crate::metrics::PowerAllocation;

#[derive(Debug, Clone, PartialEq)]
pub struct Waterfill {
    pub allocation: PowerAllocation,
    /// Water level `w`, so that `p_n = (w - 1/g_n)^+`.
    pub level: f64,
}

/// Single-user waterfilling over effective gains `g_n` (SNR per unit power).
///
/// The water level is found exactly from the sorted inverse gains; the whole
/// budget is spent and subcarriers with `g_n = 0` stay empty.
pub fn waterfill(gains: &[f64], budget: f64) -> Result<Waterfill> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(invalid(format!("waterfilling budget must be positive, got {budget}")));
    }
    if let Some(g) = gains.iter().find(|g| g.is_nan() || **g < 0.0) {
        return Err(invalid(format!("effective gain {g} is negative or NaN")));
    }
    let mut floors: Vec<f64> = gains.iter().filter(|g| **g > 0.0).map(|g| 1.0 / g).collect();
    if floors.is_empty() {
        return Err(invalid("waterfilling needs at least one positive gain"));
    }
    floors.sort_by(|a, b| a.total_cmp(b));

    let mut level = budget + floors[0];
    let mut sum = 0.0;
    for (k, f) in floors.iter().enumerate() {
        let candidate = (budget + sum + f) / (k + 1) as f64;
        if candidate <= *f {
            break;
        }
        sum += f;
        level = candidate;
    }
    let p = gains.iter().map(|&g| if g > 0.0 { (level - 1.0 / g).max(0.0) } else { 0.0 }).collect();
    Ok(Waterfill { allocation: PowerAllocation::from_raw(p, budget), level })
}
