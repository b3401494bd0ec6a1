//! RF/FSO power allocation under a sum constraint P_RF + P_FSO = P.
//!
//! Three rules:
//! - [`uniform_split`]: the high-SNR optimum (the AMI depends on the powers
//!   only through log(P_RF P_FSO) there, maximized by the even split),
//! - [`low_snr_rule`]: at low SNR everything goes to one link; the FSO link
//!   gets it all iff its ergodic rate covers the per-round rate,
//! - [`grid_optimize`]: a deterministic ratio-grid search with golden
//!   refinement for any objective; both boundary splits and the uniform
//!   split are always candidates.

use crate::error::Error;
use crate::harq::PowerSplit;
use crate::Result;

/// How an allocation was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationMethod {
    Uniform,
    LowSnrRule,
    Grid,
}

/// A chosen split with the objective value it achieved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationResult {
    pub split: PowerSplit,
    pub objective: f64,
    pub method: AllocationMethod,
}

/// Even split of the budget.
pub fn uniform_split(total: f64) -> Result<PowerSplit> {
    if !(total > 0.0) {
        return Err(Error::contract("uniform_split", format!("need P > 0, got {total}")));
    }
    PowerSplit::new(0.5 * total, 0.5 * total)
}

/// Low-SNR boundary rule: all power to the RF link iff R >= M P mu_FSO
/// (ties go to RF), otherwise all power to the FSO link.
pub fn low_snr_rule(total: f64, rate_r: f64, max_rounds: u32, mu_fso: f64) -> Result<PowerSplit> {
    if !(total > 0.0) || !(rate_r > 0.0) || !(mu_fso > 0.0) || max_rounds < 1 {
        return Err(Error::contract(
            "low_snr_rule",
            format!("need P, R, mu > 0 and M >= 1; got ({total}, {rate_r}, {max_rounds}, {mu_fso})"),
        ));
    }
    if rate_r >= max_rounds as f64 * total * mu_fso {
        PowerSplit::new(total, 0.0)
    } else {
        PowerSplit::new(0.0, total)
    }
}

/// Low-SNR outage approximation
/// `1 - exp(-max(0, R/M - P_FSO mu) / P_RF)`, with the P_RF -> 0 limit
/// resolved to the indicator of the FSO ergodic rate covering R/M.
pub fn low_snr_outage(split: &PowerSplit, rate_r: f64, max_rounds: u32, mu_fso: f64) -> Result<f64> {
    if !(rate_r > 0.0) || !(mu_fso > 0.0) || max_rounds < 1 {
        return Err(Error::contract("low_snr_outage", "need R, mu > 0 and M >= 1"));
    }
    let shortfall = (rate_r / max_rounds as f64 - split.p_fso * mu_fso).max(0.0);
    if split.p_rf <= 0.0 {
        return Ok(if shortfall > 0.0 { 1.0 } else { 0.0 });
    }
    Ok((-(-shortfall / split.p_rf).exp_m1()).clamp(0.0, 1.0))
}

/// Minimize `objective` over the simplex {p_rf + p_fso = P} on a uniform
/// RF-ratio grid with golden-section refinement around the best knot.
///
/// Deterministic for a deterministic objective. The returned objective is
/// never worse than the boundary allocations or the uniform split.
pub fn grid_optimize<F>(total: f64, objective: F, grid_points: usize) -> Result<AllocationResult>
where
    F: Fn(&PowerSplit) -> f64,
{
    if !(total > 0.0) {
        return Err(Error::contract("grid_optimize", "need P > 0"));
    }
    if grid_points < 3 {
        return Err(Error::contract("grid_optimize", "need at least 3 grid points"));
    }
    let eval = |ratio: f64| -> Result<f64> {
        let split = PowerSplit::from_total(total, ratio)?;
        let v = objective(&split);
        if !v.is_finite() {
            return Err(Error::numeric("grid_optimize", format!("objective {v} at ratio {ratio}")));
        }
        Ok(v)
    };
    let mut best_ratio = 0.5;
    let mut best_val = eval(0.5)?;
    let mut best_idx = usize::MAX;
    for k in 0..grid_points {
        let ratio = k as f64 / (grid_points - 1) as f64;
        let v = eval(ratio)?;
        if v < best_val {
            best_val = v;
            best_ratio = ratio;
            best_idx = k;
        }
    }
    // golden refinement in the bracket around the best knot
    if best_idx != usize::MAX {
        let h = 1.0 / (grid_points - 1) as f64;
        let mut lo = (best_ratio - h).max(0.0);
        let mut hi = (best_ratio + h).min(1.0);
        let phi = 0.618_033_988_749_894_8;
        for _ in 0..50 {
            let c1 = hi - phi * (hi - lo);
            let c2 = lo + phi * (hi - lo);
            if eval(c1)? < eval(c2)? {
                hi = c2;
            } else {
                lo = c1;
            }
        }
        let mid = 0.5 * (lo + hi);
        let v = eval(mid)?;
        if v < best_val {
            best_val = v;
            best_ratio = mid;
        }
    }
    Ok(AllocationResult {
        split: PowerSplit::from_total(total, best_ratio)?,
        objective: best_val,
        method: AllocationMethod::Grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_split_halves() {
        let s = uniform_split(2.0).unwrap();
        assert_eq!((s.p_rf, s.p_fso), (1.0, 1.0));
        let s = uniform_split(1e3).unwrap();
        assert_eq!((s.p_rf, s.p_fso), (500.0, 500.0));
    }

    #[test]
    fn low_snr_rule_branches() {
        // R = 5 >= M P mu = 0.2: RF only
        let s = low_snr_rule(0.1, 5.0, 2, 1.0).unwrap();
        assert_eq!((s.p_rf, s.p_fso), (0.1, 0.0));
        // R = 0.1 < 2: FSO only
        let s = low_snr_rule(1.0, 0.1, 2, 1.0).unwrap();
        assert_eq!((s.p_rf, s.p_fso), (0.0, 1.0));
        // boundary goes to RF
        let s = low_snr_rule(1.0, 2.0, 2, 1.0).unwrap();
        assert_eq!((s.p_rf, s.p_fso), (1.0, 0.0));
    }

    #[test]
    fn low_snr_outage_limits() {
        let fso_only = PowerSplit::new(0.0, 1.0).unwrap();
        assert_eq!(low_snr_outage(&fso_only, 1.0, 2, 1.0).unwrap(), 0.0);
        assert_eq!(low_snr_outage(&fso_only, 4.0, 2, 1.0).unwrap(), 1.0);
        let rf_only = PowerSplit::new(0.5, 0.0).unwrap();
        let v = low_snr_outage(&rf_only, 1.0, 2, 1.0).unwrap();
        assert!((v - (1.0 - (-1.0_f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn grid_finds_convex_minimum() {
        let r = grid_optimize(1.0, |s| (s.p_rf - 0.3).powi(2), 101).unwrap();
        assert!((r.split.p_rf - 0.3).abs() < 1e-6, "{:?}", r.split);
    }

    #[test]
    fn grid_matches_low_snr_rule_at_boundary() {
        let (p, rate, m, mu) = (0.1, 5.0, 2u32, 1.0);
        let r = grid_optimize(p, |s| low_snr_outage(s, rate, m, mu).unwrap(), 101).unwrap();
        let rule = low_snr_rule(p, rate, m, mu).unwrap();
        assert!((r.split.p_rf - rule.p_rf).abs() < 1e-9, "{:?}", r.split);
    }

    #[test]
    fn grid_never_worse_than_reference_splits() {
        let obj = |s: &PowerSplit| (s.p_rf * 3.7).sin() + s.p_fso * 0.01;
        let r = grid_optimize(1.0, obj, 31).unwrap();
        for ratio in [0.0, 0.5, 1.0] {
            let v = obj(&PowerSplit::from_total(1.0, ratio).unwrap());
            assert!(r.objective <= v + 1e-12);
        }
    }

    #[test]
    fn grid_rejects_nonfinite_objective() {
        assert!(grid_optimize(1.0, |s| (s.p_rf - 0.5).ln(), 11).is_err());
    }
}
