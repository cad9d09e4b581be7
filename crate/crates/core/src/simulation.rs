//! Monte Carlo coverage and width of the six RPV interval families.
//!
//! Each replication draws a true `(c, p)` uniformly from `[-1, 1]^2`, an
//! IID Gaussian sample of size `n` around it, and builds the percentile,
//! adjusted (percentile joined with bias-corrected), minimalist and uniform
//! intervals from one set of bootstrap draws. Coverage and mean width are
//! binned by the max norm and by the absolute RPV of the truth.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::{
    efron_bc_ci_rpv, ellipse_region, estimate_from_sample, minimalist_ci, order_statistic,
    percentile_ci_rpv, project_rpv, rect_region, resample_stats, root_max_abs, root_quadratic,
    studentize, DrawStats, Interval, PolicyEstimate, Projection, Region, ResampleSet, Sample,
    SymMatrix2, MIN_RESAMPLES,
};
use crate::measures::{max_norm, rpv, PolicyPoint};
use crate::rng::{derive_seed, stream, TAG_SAMPLE, TAG_TRUTH};

/// Truths closer than this to the origin (in max norm) are redrawn.
pub const ORIGIN_EXCLUSION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    #[serde(rename = "percentile")]
    Percentile,
    #[serde(rename = "adjusted")]
    Adjusted,
    #[serde(rename = "minimalist-rect")]
    MinimalistRect,
    #[serde(rename = "minimalist-ellipse")]
    MinimalistEllipse,
    #[serde(rename = "uniform-rect")]
    UniformRect,
    #[serde(rename = "uniform-ellipse")]
    UniformEllipse,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Percentile,
        Method::Adjusted,
        Method::MinimalistRect,
        Method::MinimalistEllipse,
        Method::UniformRect,
        Method::UniformEllipse,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Method::Percentile => "percentile",
            Method::Adjusted => "adjusted",
            Method::MinimalistRect => "minimalist-rect",
            Method::MinimalistEllipse => "minimalist-ellipse",
            Method::UniformRect => "uniform-rect",
            Method::UniformEllipse => "uniform-ellipse",
        }
    }

    fn index(&self) -> usize {
        Method::ALL.iter().position(|m| m == self).expect("listed")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BinAxis {
    #[serde(rename = "maxnorm")]
    MaxNorm,
    #[serde(rename = "absrpv")]
    AbsRpv,
}

impl BinAxis {
    pub fn label(&self) -> &'static str {
        match self {
            BinAxis::MaxNorm => "maxnorm",
            BinAxis::AbsRpv => "absrpv",
        }
    }
}

/// How the uniform intervals project their regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UniformProjection {
    /// `K` random boundary draws per region.
    MonteCarlo,
    /// Closed-form range (the `K -> infinity` limit).
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub reps: usize,
    pub n_values: Vec<usize>,
    pub alpha: f64,
    /// Covariance of one observation around the truth.
    pub true_cov: SymMatrix2,
    /// Bootstrap draws per replication.
    pub b: usize,
    /// Boundary draws per uniform projection.
    pub k: usize,
    pub bin_edges_maxnorm: Vec<f64>,
    pub bin_edges_absrpv: Vec<f64>,
    pub seed: u64,
    pub projection: UniformProjection,
}

fn edges(hi: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| hi * i as f64 / steps as f64).collect()
}

impl StudyConfig {
    /// Desk-scale study: 2000 replications at `n = 100`, `B = 1000`,
    /// `K = 10^4`.
    pub fn desk(seed: u64) -> Self {
        Self {
            reps: 2000,
            n_values: vec![100],
            alpha: 0.05,
            true_cov: SymMatrix2::new(20.0, -10.0, 20.0),
            b: 1000,
            k: 10_000,
            bin_edges_maxnorm: edges(1.0, 10),
            bin_edges_absrpv: edges(2.0, 10),
            seed,
            projection: UniformProjection::MonteCarlo,
        }
    }

    /// The full scale: 250000 replications, `n` in {100, 1000},
    /// `K = 10^5`. Expect it to run for many hours.
    pub fn full_scale(seed: u64) -> Self {
        Self {
            reps: 250_000,
            n_values: vec![100, 1000],
            k: 100_000,
            ..Self::desk(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 100 {
            return Err(Error::invalid(
                "reps",
                format!("need at least 100, got {}", self.reps),
            ));
        }
        if self.n_values.is_empty() || self.n_values.iter().any(|n| *n < 3) {
            return Err(Error::invalid(
                "n",
                "need one or more sample sizes, each at least 3",
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(
                "alpha",
                format!("must lie in (0, 1), got {}", self.alpha),
            ));
        }
        let vals = self.true_cov.check_psd()?;
        if vals[1] <= 0.0 {
            return Err(Error::NotPositiveSemidefinite(
                "true covariance must be positive definite".into(),
            ));
        }
        if self.b < MIN_RESAMPLES {
            return Err(Error::invalid(
                "B",
                format!("need at least {MIN_RESAMPLES}, got {}", self.b),
            ));
        }
        if self.projection == UniformProjection::MonteCarlo
            && self.k < crate::inference::MIN_PROJECTION_DRAWS
        {
            return Err(Error::invalid(
                "K",
                format!("need at least 1000, got {}", self.k),
            ));
        }
        for (name, e) in [
            ("bins-maxnorm", &self.bin_edges_maxnorm),
            ("bins-absrpv", &self.bin_edges_absrpv),
        ] {
            if e.len() < 2 || e.iter().any(|v| !v.is_finite()) || e.windows(2).any(|w| w[0] >= w[1])
            {
                return Err(Error::invalid(
                    name,
                    "need at least two strictly increasing finite edges",
                ));
            }
        }
        Ok(())
    }

    pub fn edges(&self, axis: BinAxis) -> &[f64] {
        match axis {
            BinAxis::MaxNorm => &self.bin_edges_maxnorm,
            BinAxis::AbsRpv => &self.bin_edges_absrpv,
        }
    }
}

/// Coverage count and width sum for one cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Cell {
    pub rep_count: u64,
    pub covered: u64,
    pub width_sum: f64,
}

impl Cell {
    fn add(&mut self, covered: bool, width: f64) {
        self.rep_count += 1;
        self.covered += covered as u64;
        self.width_sum += width;
    }

    pub fn coverage_rate(&self) -> Option<f64> {
        (self.rep_count > 0).then(|| self.covered as f64 / self.rep_count as f64)
    }

    pub fn mean_width(&self) -> Option<f64> {
        (self.rep_count > 0).then(|| self.width_sum / self.rep_count as f64)
    }
}

/// Results for one sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeReport {
    pub n: usize,
    /// `overall[method]`
    pub overall: Vec<Cell>,
    /// `by_maxnorm[method][bin]`
    pub by_maxnorm: Vec<Vec<Cell>>,
    /// `by_absrpv[method][bin]`
    pub by_absrpv: Vec<Vec<Cell>>,
    /// Replications dropped because an interval could not be formed.
    pub rejected: u64,
    /// Accepted replications whose truth fell outside the bin edges, per
    /// axis `[maxnorm, absrpv]`.
    pub out_of_range: [u64; 2],
    /// Replications where the minimalist interval was not inside the bare
    /// boundary projection, `[rect, ellipse]`. Possible only through Monte
    /// Carlo error; the reported uniform interval also covers the
    /// in-region resamples and so always contains the minimalist one.
    pub containment_violations: [u64; 2],
}

impl SizeReport {
    pub fn bins(&self, axis: BinAxis) -> &[Vec<Cell>] {
        match axis {
            BinAxis::MaxNorm => &self.by_maxnorm,
            BinAxis::AbsRpv => &self.by_absrpv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub config: StudyConfig,
    pub sizes: Vec<SizeReport>,
    /// Truth draws discarded for being too close to the origin.
    pub truth_redraws: u64,
}

struct RepOutcome {
    max_norm: f64,
    abs_rpv: f64,
    /// `(covered, width)` per method, in `Method::ALL` order
    results: [(bool, f64); 6],
    violations: [bool; 2],
}

fn draw_truth(seed: u64, rep: u64) -> (PolicyPoint, u64) {
    let mut rng = stream(derive_seed(seed, TAG_TRUTH), rep);
    let mut redraws = 0;
    loop {
        let c: f64 = rng.random_range(-1.0..=1.0);
        let p: f64 = rng.random_range(-1.0..=1.0);
        let x = PolicyPoint::new(c, p).expect("finite");
        if max_norm(x) >= ORIGIN_EXCLUSION {
            return (x, redraws);
        }
        redraws += 1;
    }
}

/// Lower Cholesky factor `[[l11, 0], [l21, l22]]` of a positive definite
/// matrix.
fn cholesky(m: &SymMatrix2) -> (f64, f64, f64) {
    let l11 = m.a.sqrt();
    let l21 = m.b / l11;
    let l22 = (m.d - l21 * l21).sqrt();
    (l11, l21, l22)
}

/// `(1 - alpha)` critical values of both roots from precomputed draws,
/// identical to the sample-root mode of the inference module.
fn critical_from_stats(
    est: &PolicyEstimate,
    n: usize,
    stats: &[DrawStats],
    alpha: f64,
) -> (f64, f64) {
    let root_n = (n as f64).sqrt();
    let mut rect = Vec::with_capacity(stats.len());
    let mut quad = Vec::with_capacity(stats.len());
    for d in stats {
        let zc = studentize(d.c - est.point.c(), d.sd_c / root_n);
        let zp = studentize(d.p - est.point.p(), d.sd_p / root_n);
        rect.push(root_max_abs(zc, zp));
        quad.push(root_quadratic(zc, zp, est.rho));
    }
    rect.sort_by(f64::total_cmp);
    quad.sort_by(f64::total_cmp);
    (
        order_statistic(&rect, 1.0 - alpha),
        order_statistic(&quad, 1.0 - alpha),
    )
}

fn replicate(
    cfg: &StudyConfig,
    size_index: usize,
    rep: u64,
    truth: PolicyPoint,
) -> Result<RepOutcome> {
    let n = cfg.n_values[size_index];
    let lane = ((size_index as u64) << 32) | rep;
    let (l11, l21, l22) = cholesky(&cfg.true_cov);
    let mut rng = stream(derive_seed(cfg.seed, TAG_SAMPLE), lane);
    let rows = (0..n)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            PolicyPoint::new(truth.c() + l11 * z1, truth.p() + l21 * z1 + l22 * z2)
        })
        .collect::<Result<Vec<_>>>()?;
    let sample = Sample::new("sim", rows)?;
    let est = estimate_from_sample(&sample)?;

    let rep_seed = derive_seed(cfg.seed, lane);
    let stats = resample_stats(&sample, cfg.b, rep_seed, 0);
    let (d, t) = critical_from_stats(&est, n, &stats, cfg.alpha);
    let draws = stats
        .iter()
        .map(|s| PolicyPoint::new(s.c, s.p))
        .collect::<Result<Vec<_>>>()?;
    let set = ResampleSet::new("sim", draws);

    let rect: Region = rect_region(&est, d)?.into();
    let ellipse: Region = ellipse_region(&est, t)?.into();
    let how = match cfg.projection {
        UniformProjection::Exact => Projection::Exact,
        UniformProjection::MonteCarlo => Projection::MonteCarlo {
            draws: cfg.k,
            seed: derive_seed(rep_seed, 1),
        },
    };

    let percentile = percentile_ci_rpv(&set, cfg.alpha)?;
    let adjusted = percentile.hull(&efron_bc_ci_rpv(&set, &est, cfg.alpha)?);
    let min_rect = minimalist_ci(&set, &rect)?;
    let min_ellipse = minimalist_ci(&set, &ellipse)?;
    // resampled estimates inside a region are points of it, so folding the
    // minimalist range in keeps the projection valid and nested
    let mc_rect = project_rpv(&rect, how)?;
    let mc_ellipse = project_rpv(&ellipse, how)?;
    let uni_rect = mc_rect.hull(&min_rect);
    let uni_ellipse = mc_ellipse.hull(&min_ellipse);

    let target = rpv(truth);
    let score = |iv: &Interval| (iv.contains(target), iv.width());
    Ok(RepOutcome {
        max_norm: max_norm(truth),
        abs_rpv: target.abs(),
        results: [
            score(&percentile),
            score(&adjusted),
            score(&min_rect),
            score(&min_ellipse),
            score(&uni_rect),
            score(&uni_ellipse),
        ],
        violations: [
            !min_rect.is_subset_of(&mc_rect),
            !min_ellipse.is_subset_of(&mc_ellipse),
        ],
    })
}

/// Bin index of `v`: bins are `[e_i, e_{i+1})` except the last, which is
/// closed.
pub fn bin_index(edges: &[f64], v: f64) -> Option<usize> {
    let last = edges.len().checked_sub(1)?;
    if v < edges[0] || v > edges[last] {
        return None;
    }
    if v == edges[last] {
        return Some(last - 1);
    }
    Some(edges.partition_point(|e| *e <= v) - 1)
}

/// Runs the study. Replications run in parallel; their outcomes are
/// gathered in replication order, so the report is identical for any
/// thread count.
pub fn run_coverage_study(cfg: &StudyConfig) -> Result<CoverageReport> {
    cfg.validate()?;
    let truths: Vec<(PolicyPoint, u64)> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|i| draw_truth(cfg.seed, i))
        .collect();
    let truth_redraws = truths.iter().map(|(_, r)| r).sum();

    let mut sizes = Vec::with_capacity(cfg.n_values.len());
    for (size_index, &n) in cfg.n_values.iter().enumerate() {
        let outcomes: Vec<Result<RepOutcome>> = truths
            .par_iter()
            .enumerate()
            .map(|(i, (truth, _))| replicate(cfg, size_index, i as u64, *truth))
            .collect();

        let nbins = |axis| cfg.edges(axis).len() - 1;
        let mut report = SizeReport {
            n,
            overall: vec![Cell::default(); 6],
            by_maxnorm: vec![vec![Cell::default(); nbins(BinAxis::MaxNorm)]; 6],
            by_absrpv: vec![vec![Cell::default(); nbins(BinAxis::AbsRpv)]; 6],
            rejected: 0,
            out_of_range: [0, 0],
            containment_violations: [0, 0],
        };
        for outcome in outcomes {
            let Ok(o) = outcome else {
                report.rejected += 1;
                continue;
            };
            let bm = bin_index(&cfg.bin_edges_maxnorm, o.max_norm);
            let ba = bin_index(&cfg.bin_edges_absrpv, o.abs_rpv);
            report.out_of_range[0] += bm.is_none() as u64;
            report.out_of_range[1] += ba.is_none() as u64;
            for (method, (covered, width)) in Method::ALL.iter().zip(o.results) {
                let m = method.index();
                report.overall[m].add(covered, width);
                if let Some(b) = bm {
                    report.by_maxnorm[m][b].add(covered, width);
                }
                if let Some(b) = ba {
                    report.by_absrpv[m][b].add(covered, width);
                }
            }
            for (slot, v) in report.containment_violations.iter_mut().zip(o.violations) {
                *slot += v as u64;
            }
        }
        sizes.push(report);
    }
    Ok(CoverageReport {
        config: cfg.clone(),
        sizes,
        truth_redraws,
    })
}

/// One plot-ready row. Empty bins keep their row with `count = 0` and no
/// coverage or width.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub axis: BinAxis,
    pub method: Method,
    pub n: usize,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub bin_center: f64,
    pub count: u64,
    pub coverage: Option<f64>,
    pub width: Option<f64>,
}

/// Flattens the report along one binning axis.
pub fn summarize(report: &CoverageReport, axis: BinAxis) -> Vec<SummaryRow> {
    let edges = report.config.edges(axis);
    let mut rows = Vec::new();
    for size in &report.sizes {
        for method in Method::ALL {
            for (b, cell) in size.bins(axis)[method.index()].iter().enumerate() {
                rows.push(SummaryRow {
                    axis,
                    method,
                    n: size.n,
                    bin_lo: edges[b],
                    bin_hi: edges[b + 1],
                    bin_center: 0.5 * (edges[b] + edges[b + 1]),
                    count: cell.rep_count,
                    coverage: cell.coverage_rate(),
                    width: cell.mean_width(),
                });
            }
        }
    }
    rows
}

impl CoverageReport {
    pub fn size(&self, n: usize) -> Option<&SizeReport> {
        self.sizes.iter().find(|s| s.n == n)
    }

    pub fn overall(&self, n: usize, method: Method) -> Option<Cell> {
        self.size(n).map(|s| s.overall[method.index()])
    }

    pub fn cell(&self, n: usize, method: Method, axis: BinAxis, bin: usize) -> Option<Cell> {
        self.size(n)
            .and_then(|s| s.bins(axis)[method.index()].get(bin).copied())
    }
}
