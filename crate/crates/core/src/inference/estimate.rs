use rand::Rng;
use rayon::prelude::*;

use super::{PolicyEstimate, ResampleSet, Sample, MIN_RESAMPLES, RHO_LIMIT};
use crate::error::{Error, Result};
use crate::measures::PolicyPoint;
use crate::rng::{derive_seed, stream, TAG_RESAMPLE};

/// Coordinate means, standard errors and Pearson correlation of a sample.
pub fn estimate_from_sample(s: &Sample) -> Result<PolicyEstimate> {
    let n = s.len() as f64;
    let mean_c = s.rows().iter().map(|x| x.c()).sum::<f64>() / n;
    let mean_p = s.rows().iter().map(|x| x.p()).sum::<f64>() / n;
    let (mut scc, mut spp, mut scp) = (0.0, 0.0, 0.0);
    for x in s.rows() {
        let dc = x.c() - mean_c;
        let dp = x.p() - mean_p;
        scc += dc * dc;
        spp += dp * dp;
        scp += dc * dp;
    }
    if scc <= 0.0 || spp <= 0.0 {
        return Err(Error::DegenerateSample {
            policy: s.policy_id().to_string(),
            reason: "zero sample variance".into(),
        });
    }
    let sd_c = (scc / (n - 1.0)).sqrt();
    let sd_p = (spp / (n - 1.0)).sqrt();
    let rho = (scp / (scc.sqrt() * spp.sqrt())).clamp(-1.0, 1.0);
    if rho.abs() > RHO_LIMIT {
        return Err(Error::DegenerateSample {
            policy: s.policy_id().to_string(),
            reason: format!("coordinates are perfectly correlated (rho = {rho})"),
        });
    }
    PolicyEstimate::new(
        s.policy_id(),
        PolicyPoint::new(mean_c, mean_p)?,
        sd_c / n.sqrt(),
        sd_p / n.sqrt(),
        rho,
        Some(s.len() as u64),
    )
}

/// One bootstrap draw: resample means and resample standard deviations.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DrawStats {
    pub c: f64,
    pub p: f64,
    pub sd_c: f64,
    pub sd_p: f64,
}

/// `count` nonparametric bootstrap draws from `s`. Draw `b` of lane `lane`
/// always comes from the same random stream.
pub(crate) fn resample_stats(s: &Sample, count: usize, seed: u64, lane: u64) -> Vec<DrawStats> {
    let n = s.len();
    let nf = n as f64;
    let mean_c = s.rows().iter().map(|x| x.c()).sum::<f64>() / nf;
    let mean_p = s.rows().iter().map(|x| x.p()).sum::<f64>() / nf;
    // centering keeps the one-pass variance accurate
    let centered: Vec<(f64, f64)> = s
        .rows()
        .iter()
        .map(|x| (x.c() - mean_c, x.p() - mean_p))
        .collect();
    let base = derive_seed(seed, TAG_RESAMPLE);
    (0..count as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(base, (lane << 32) | b);
            let (mut sc, mut sp, mut scc, mut spp) = (0.0, 0.0, 0.0, 0.0);
            for _ in 0..n {
                let (dc, dp) = centered[rng.random_range(0..n)];
                sc += dc;
                sp += dp;
                scc += dc * dc;
                spp += dp * dp;
            }
            let mc = sc / nf;
            let mp = sp / nf;
            DrawStats {
                c: mean_c + mc,
                p: mean_p + mp,
                sd_c: ((scc - nf * mc * mc).max(0.0) / (nf - 1.0)).sqrt(),
                sd_p: ((spp - nf * mp * mp).max(0.0) / (nf - 1.0)).sqrt(),
            }
        })
        .collect()
}

/// Nonparametric bootstrap: `b` draws, each the coordinate means of `n`
/// rows sampled with replacement.
pub fn bootstrap_resample(s: &Sample, b: usize, seed: u64) -> Result<ResampleSet> {
    bootstrap_resample_lane(s, b, seed, 0)
}

/// As [`bootstrap_resample`], drawing from lane `lane` of the seed. Policy
/// `l` of a collection uses lane `l`, which is also the lane the sample
/// root in the critical-value routines uses for it.
pub fn bootstrap_resample_lane(s: &Sample, b: usize, seed: u64, lane: u64) -> Result<ResampleSet> {
    if b < MIN_RESAMPLES {
        return Err(Error::InsufficientResamples {
            policy: s.policy_id().to_string(),
            need: MIN_RESAMPLES,
            have: b,
        });
    }
    let draws = resample_stats(s, b, seed, lane)
        .into_iter()
        .map(|d| PolicyPoint::new(d.c, d.p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResampleSet::new(s.policy_id(), draws))
}
