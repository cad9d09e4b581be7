use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::estimate::{estimate_from_sample, resample_stats};
use super::{order_statistic, PolicyEstimate, ResampleSet, Sample, MIN_RESAMPLES, RHO_LIMIT};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream, TAG_ROOT};

/// Where the bootstrap distribution of the root comes from.
#[derive(Debug, Clone, Copy)]
pub enum RootSource<'a> {
    /// Raw samples: studentized nonparametric bootstrap with `B` draws.
    Samples(&'a [Sample]),
    /// Point estimates with precomputed resamples. Every resample is
    /// used, studentized by the resamples' own standard deviations; `B` is
    /// ignored. Policies must have equally many draws, matched by index.
    Resamples {
        estimates: &'a [PolicyEstimate],
        resamples: &'a [ResampleSet],
    },
    /// Estimates only: the root is simulated from its Gaussian limit
    /// `N(0, Omega)` with `B` draws.
    Gaussian(&'a [PolicyEstimate]),
}

impl RootSource<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            RootSource::Samples(_) => "studentized-bootstrap",
            RootSource::Resamples { .. } => "resample-studentized",
            RootSource::Gaussian(_) => "parametric-gaussian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalValue {
    pub value: f64,
    /// Number of simulated roots the quantile was taken over.
    pub draws: usize,
    pub source: &'static str,
}

#[inline]
pub(crate) fn root_max_abs(z_c: f64, z_p: f64) -> f64 {
    z_c.abs().max(z_p.abs())
}

/// `z' Omega^{-1} z` for the correlation matrix with off-diagonal `rho`.
#[inline]
pub(crate) fn root_quadratic(z_c: f64, z_p: f64, rho: f64) -> f64 {
    if !(z_c.is_finite() && z_p.is_finite()) {
        return f64::INFINITY;
    }
    (z_c * z_c - 2.0 * rho * z_c * z_p + z_p * z_p) / (1.0 - rho * rho)
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

fn guard_rho(rho: f64) -> Result<()> {
    if rho.is_nan() || rho.abs() > RHO_LIMIT {
        return Err(Error::CorrelationGuard(rho));
    }
    Ok(())
}

#[inline]
pub(crate) fn studentize(dev: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        dev / scale
    } else if dev == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Per-draw studentized deviations `(z_c, z_p)` for each policy, plus the
/// correlation used in the quadratic root.
struct Deviations {
    /// `z[l][b]`
    z: Vec<Vec<(f64, f64)>>,
    rho: Vec<f64>,
}

fn deviations(src: RootSource<'_>, b: usize, seed: u64) -> Result<Deviations> {
    match src {
        RootSource::Samples(samples) => {
            if samples.is_empty() {
                return Err(Error::EmptyCollection);
            }
            if b < MIN_RESAMPLES {
                return Err(Error::InsufficientResamples {
                    policy: samples[0].policy_id().to_string(),
                    need: MIN_RESAMPLES,
                    have: b,
                });
            }
            let mut z = Vec::with_capacity(samples.len());
            let mut rho = Vec::with_capacity(samples.len());
            for (l, s) in samples.iter().enumerate() {
                let est = estimate_from_sample(s)?;
                let root_n = (s.len() as f64).sqrt();
                let draws = resample_stats(s, b, seed, l as u64);
                z.push(
                    draws
                        .iter()
                        .map(|d| {
                            (
                                studentize(d.c - est.point.c(), d.sd_c / root_n),
                                studentize(d.p - est.point.p(), d.sd_p / root_n),
                            )
                        })
                        .collect(),
                );
                rho.push(est.rho);
            }
            Ok(Deviations { z, rho })
        }
        RootSource::Resamples {
            estimates,
            resamples,
        } => {
            if estimates.is_empty() {
                return Err(Error::EmptyCollection);
            }
            if estimates.len() != resamples.len() {
                return Err(Error::LengthMismatch {
                    expected: estimates.len(),
                    got: resamples.len(),
                });
            }
            let count = resamples[0].len();
            let mut z = Vec::with_capacity(estimates.len());
            let mut rho = Vec::with_capacity(estimates.len());
            for (est, set) in estimates.iter().zip(resamples) {
                if est.policy_id != set.policy_id() {
                    return Err(Error::invalid(
                        "resamples",
                        format!(
                            "policy `{}` paired with resamples of `{}`",
                            est.policy_id,
                            set.policy_id()
                        ),
                    ));
                }
                set.require_floor()?;
                if set.len() != count {
                    return Err(Error::LengthMismatch {
                        expected: count,
                        got: set.len(),
                    });
                }
                let (sd_c, sd_p, r) = moments(set);
                if !(sd_c > 0.0 && sd_p > 0.0) {
                    return Err(Error::DegenerateSample {
                        policy: est.policy_id.clone(),
                        reason: "resampled estimates have zero spread".into(),
                    });
                }
                z.push(
                    set.draws()
                        .iter()
                        .map(|x| {
                            (
                                (x.c() - est.point.c()) / sd_c,
                                (x.p() - est.point.p()) / sd_p,
                            )
                        })
                        .collect(),
                );
                rho.push(r);
            }
            Ok(Deviations { z, rho })
        }
        RootSource::Gaussian(estimates) => {
            if estimates.is_empty() {
                return Err(Error::EmptyCollection);
            }
            if b < MIN_RESAMPLES {
                return Err(Error::InsufficientResamples {
                    policy: estimates[0].policy_id.clone(),
                    need: MIN_RESAMPLES,
                    have: b,
                });
            }
            let base = derive_seed(seed, TAG_ROOT);
            let mut z = Vec::with_capacity(estimates.len());
            let mut rho = Vec::with_capacity(estimates.len());
            for (l, est) in estimates.iter().enumerate() {
                let r = est.rho;
                let comp = (1.0 - r * r).sqrt();
                z.push(
                    (0..b as u64)
                        .into_par_iter()
                        .map(|i| {
                            let mut rng = stream(base, ((l as u64) << 32) | i);
                            let z1: f64 = StandardNormal.sample(&mut rng);
                            let z2: f64 = StandardNormal.sample(&mut rng);
                            (z1, r * z1 + comp * z2)
                        })
                        .collect(),
                );
                rho.push(r);
            }
            Ok(Deviations { z, rho })
        }
    }
}

/// Standard deviations and correlation of a resample set.
fn moments(set: &ResampleSet) -> (f64, f64, f64) {
    let k = set.len() as f64;
    let mc = set.draws().iter().map(|x| x.c()).sum::<f64>() / k;
    let mp = set.draws().iter().map(|x| x.p()).sum::<f64>() / k;
    let (mut scc, mut spp, mut scp) = (0.0, 0.0, 0.0);
    for x in set.draws() {
        let dc = x.c() - mc;
        let dp = x.p() - mp;
        scc += dc * dc;
        spp += dp * dp;
        scp += dc * dp;
    }
    let rho = if scc > 0.0 && spp > 0.0 {
        (scp / (scc.sqrt() * spp.sqrt())).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    ((scc / (k - 1.0)).sqrt(), (spp / (k - 1.0)).sqrt(), rho)
}

fn quantile_of(mut roots: Vec<f64>, alpha: f64, source: &'static str) -> CriticalValue {
    roots.sort_by(f64::total_cmp);
    CriticalValue {
        value: order_statistic(&roots, 1.0 - alpha),
        draws: roots.len(),
        source,
    }
}

fn sup_roots(dev: &Deviations, f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Vec<f64> {
    let count = dev.z[0].len();
    (0..count)
        .into_par_iter()
        .map(|b| {
            dev.z
                .iter()
                .zip(&dev.rho)
                .map(|(zl, rho)| f(zl[b].0, zl[b].1, *rho))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Critical value `d` of the rectangular region: the `(1 - alpha)`
/// quantile of `max_l max(|z_c|, |z_p|)`.
pub fn critical_value_rect(
    src: RootSource<'_>,
    alpha: f64,
    b: usize,
    seed: u64,
) -> Result<CriticalValue> {
    check_alpha(alpha)?;
    let dev = deviations(src, b, seed)?;
    Ok(quantile_of(
        sup_roots(&dev, |zc, zp, _| root_max_abs(zc, zp)),
        alpha,
        src.name(),
    ))
}

/// Critical value `t` of the elliptical region: the `(1 - alpha)`
/// quantile of `max_l z' Omega_l^{-1} z`.
pub fn critical_value_ellipse(
    src: RootSource<'_>,
    alpha: f64,
    b: usize,
    seed: u64,
) -> Result<CriticalValue> {
    check_alpha(alpha)?;
    let dev = deviations(src, b, seed)?;
    dev.rho.iter().try_for_each(|r| guard_rho(*r))?;
    Ok(quantile_of(
        sup_roots(&dev, root_quadratic),
        alpha,
        src.name(),
    ))
}

/// Both critical values from a single set of bootstrap draws.
pub fn critical_values(
    src: RootSource<'_>,
    alpha: f64,
    b: usize,
    seed: u64,
) -> Result<(CriticalValue, CriticalValue)> {
    check_alpha(alpha)?;
    let dev = deviations(src, b, seed)?;
    dev.rho.iter().try_for_each(|r| guard_rho(*r))?;
    Ok((
        quantile_of(
            sup_roots(&dev, |zc, zp, _| root_max_abs(zc, zp)),
            alpha,
            src.name(),
        ),
        quantile_of(sup_roots(&dev, root_quadratic), alpha, src.name()),
    ))
}
