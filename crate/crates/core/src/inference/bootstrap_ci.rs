//! Conventional bootstrap intervals, kept as comparison baselines.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{BootstrapInterval, ExtendedBound, Interval, PolicyEstimate, ResampleSet};
use crate::error::{Error, Result};
use crate::measures::{mvpf, rpv, ExtendedWelfare, PolicyPoint};

/// Order statistic `X_(k)` with `k = ceil(q B)` (1-based, clamped to
/// `1..=B`) of an ascending slice. A small tolerance keeps products such as
/// `0.001 * 1000` from rounding up past an integer.
pub(crate) fn order_statistic(sorted: &[f64], q: f64) -> f64 {
    let b = sorted.len();
    let k = (q * b as f64 - 1e-9).ceil().clamp(1.0, b as f64) as usize;
    sorted[k - 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Functional {
    Rpv,
    Mvpf,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(
            "alpha",
            format!("must lie in (0, 1), got {alpha}"),
        ));
    }
    Ok(())
}

/// MVPF as an `f64` with `+inf`; `None` when undefined.
fn mvpf_value(x: PolicyPoint) -> Option<f64> {
    match mvpf(x) {
        ExtendedWelfare::Finite(v) => Some(v),
        ExtendedWelfare::PositiveInfinity => Some(f64::INFINITY),
        ExtendedWelfare::Undefined => None,
    }
}

/// Percentile bootstrap interval `[Q(alpha/2), Q(1 - alpha/2)]` of the
/// functional over the resamples. Undefined MVPF draws are dropped and
/// counted.
pub fn percentile_ci(
    resamples: &ResampleSet,
    alpha: f64,
    functional: Functional,
) -> Result<BootstrapInterval> {
    check_alpha(alpha)?;
    resamples.require_floor()?;
    let mut values: Vec<f64> = match functional {
        Functional::Rpv => resamples.draws().iter().map(|x| rpv(*x)).collect(),
        Functional::Mvpf => resamples
            .draws()
            .iter()
            .filter_map(|x| mvpf_value(*x))
            .collect(),
    };
    if values.is_empty() {
        return Err(Error::AllUndefined);
    }
    values.sort_by(f64::total_cmp);
    Ok(BootstrapInterval {
        lo: ExtendedBound::from_f64(order_statistic(&values, alpha / 2.0)),
        hi: ExtendedBound::from_f64(order_statistic(&values, 1.0 - alpha / 2.0)),
        used: values.len(),
        dropped: resamples.len() - values.len(),
    })
}

/// Percentile interval for the RPV.
pub fn percentile_ci_rpv(resamples: &ResampleSet, alpha: f64) -> Result<Interval> {
    let iv = percentile_ci(resamples, alpha, Functional::Rpv)?;
    Ok(iv.finite().expect("rpv is bounded"))
}

/// Bias-corrected interval over the ascending `kept` values out of `total`
/// draws, for estimate `theta_hat`.
fn bias_corrected(kept: &[f64], total: usize, theta_hat: f64, alpha: f64) -> (f64, f64) {
    let k = kept.len() as f64;
    let below = kept.iter().filter(|v| **v < theta_hat).count() as f64;
    let f_hat = (below / k).clamp(1.0 / (k + 1.0), k / (k + 1.0));
    let gamma = if kept.len() == total {
        alpha
    } else {
        1.0 - ((1.0 - alpha) + (1.0 - k / total as f64)).min(1.0)
    };
    let normal = Normal::standard();
    let level = |d: f64| -> f64 {
        if f_hat == 0.5 || d <= 0.0 || d >= 1.0 {
            // g = 0 leaves every level unchanged; Phi(.) of an infinite
            // argument is exactly 0 or 1 as well
            d
        } else {
            let g = normal.inverse_cdf(f_hat);
            normal.cdf(2.0 * g + normal.inverse_cdf(d))
        }
    };
    (
        order_statistic(kept, level(gamma / 2.0)),
        order_statistic(kept, level(1.0 - gamma / 2.0)),
    )
}

/// The modified bias-corrected MVPF interval: draws in the open negative
/// quadrant are discarded (as are the measure-zero draws with `c = 0`,
/// `p < 0`, whose MVPF is also undefined), the bias correction is
/// estimated from the rest, and the coverage level is raised by the share
/// of discarded draws.
pub fn efron_bc_ci(
    resamples: &ResampleSet,
    estimate: &PolicyEstimate,
    alpha: f64,
) -> Result<BootstrapInterval> {
    check_alpha(alpha)?;
    resamples.require_floor()?;
    let m_hat = mvpf_value(estimate.point).ok_or(Error::UndefinedEstimate)?;
    let mut kept: Vec<f64> = resamples
        .draws()
        .iter()
        .filter_map(|x| mvpf_value(*x))
        .collect();
    if kept.is_empty() {
        return Err(Error::AllUndefined);
    }
    if kept.len() < 2 {
        return Err(Error::InsufficientResamples {
            policy: resamples.policy_id().to_string(),
            need: 2,
            have: kept.len(),
        });
    }
    kept.sort_by(f64::total_cmp);
    let (lo, hi) = bias_corrected(&kept, resamples.len(), m_hat, alpha);
    Ok(BootstrapInterval {
        lo: ExtendedBound::from_f64(lo),
        hi: ExtendedBound::from_f64(hi),
        used: kept.len(),
        dropped: resamples.len() - kept.len(),
    })
}

/// The same bias-corrected construction applied to the RPV, which is
/// defined everywhere, so no draws are discarded.
pub fn efron_bc_ci_rpv(
    resamples: &ResampleSet,
    estimate: &PolicyEstimate,
    alpha: f64,
) -> Result<Interval> {
    check_alpha(alpha)?;
    resamples.require_floor()?;
    let mut values: Vec<f64> = resamples.draws().iter().map(|x| rpv(*x)).collect();
    values.sort_by(f64::total_cmp);
    let (lo, hi) = bias_corrected(&values, values.len(), rpv(estimate.point), alpha);
    Ok(Interval { lo, hi })
}
