//! The four subcommands, each producing a [`Table`].

use clap::ValueEnum;
use rpv_core::aggregation::{
    jpv, make_weights, tpv, PolicyCollection, WeightKind, WeightScheme, WeightVector,
};
use rpv_core::inference::{
    bootstrap_resample_lane, critical_value_ellipse, critical_value_rect, critical_values,
    efron_bc_ci, ellipse_region, estimate_from_sample, minimalist_ci, percentile_ci_rpv,
    project_rpv, rect_region, CriticalValue, Interval, PolicyEstimate, Projection, Region,
    ResampleSet, RootSource, Sample, SymMatrix2,
};
use rpv_core::measures::{classify, mss, mvpf, rpv, ExtendedWelfare};
use rpv_core::rng::derive_seed;
use rpv_core::simulation::{
    run_coverage_study, summarize, BinAxis, Method, StudyConfig, UniformProjection,
};

use crate::error::{CliError, Result};
use crate::io::EstimatesFile;
use crate::table::{Cell, Ext, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerance for RPV interval endpoints outside `[-2, 2]`.
const RPV_RANGE_TOL: f64 = 1e-9;

pub fn measure(input: &EstimatesFile) -> Result<Table> {
    let mut t = Table::new(vec![
        "policy_id",
        "c_hat",
        "p_hat",
        "rpv",
        "mvpf",
        "mss_plus_one",
        "band",
        "subquadrant",
    ]);
    for row in &input.rows {
        let x = row.point;
        let class = classify(x);
        t.push(vec![
            row.policy_id.as_str().into(),
            x.c().into(),
            x.p().into(),
            rpv(x).into(),
            Ext::from(mvpf(x)).into(),
            (mss(x) + 1.0).into(),
            class.band.label().into(),
            class.subquadrant.label().into(),
        ]);
    }
    Ok(t.meta("command", "measure").meta("version", VERSION))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum AggregateMode {
    Jpv,
    Tpv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SchemeArg {
    /// Equal weights `1/n`
    Equal,
    /// The given weights, used as they are
    Custom,
    /// The given (or equal) weights normalized to sum to one
    Simplex,
    /// `base_l * max{|c_l|, |p_l|}`: the TPV becomes a weighted surplus
    MssScaled,
    /// Turns the TPV into the average `L^q` index
    LqAdjust,
    /// Proportional to `|p_l - c_l|`
    Surplus,
    /// Proportional to `|c_l|`
    Cost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateArgs {
    pub mode: AggregateMode,
    pub scheme: SchemeArg,
    pub weights: Option<Vec<f64>>,
    pub q: Option<f64>,
}

fn weights_for(coll: &PolicyCollection, args: &AggregateArgs) -> Result<WeightVector> {
    let n = coll.len();
    let base = args.weights.clone();
    let need_base = |what: &str| {
        base.clone()
            .ok_or_else(|| CliError::input(format!("--scheme {what} needs --weights")))
    };
    if args.q.is_some() && args.scheme != SchemeArg::LqAdjust {
        return Err(CliError::input("--q only applies to --scheme lq-adjust"));
    }
    if args.mode == AggregateMode::Jpv {
        return Ok(match args.scheme {
            SchemeArg::Equal if base.is_none() => WeightVector::equal(n, WeightKind::Scaling)?,
            SchemeArg::Custom => WeightVector::scaling(need_base("custom")?)?,
            _ => return Err(CliError::input(
                "jpv takes scaling factors: use --scheme equal or --scheme custom --weights ...",
            )),
        });
    }
    let scheme = match args.scheme {
        SchemeArg::Equal if base.is_none() => WeightScheme::Simplex { base: None },
        SchemeArg::Equal => return Err(CliError::input("--scheme equal takes no --weights")),
        SchemeArg::Custom => return Ok(WeightVector::importance(need_base("custom")?)?),
        SchemeArg::Simplex => WeightScheme::Simplex { base },
        SchemeArg::MssScaled => WeightScheme::MssScaled {
            base: base.unwrap_or_else(|| vec![1.0 / n as f64; n]),
        },
        SchemeArg::LqAdjust => WeightScheme::LqAdjust {
            q: args
                .q
                .ok_or_else(|| CliError::input("--scheme lq-adjust needs --q"))?,
            base,
        },
        SchemeArg::Surplus | SchemeArg::Cost if base.is_some() => {
            return Err(CliError::input("proportional schemes take no --weights"))
        }
        SchemeArg::Surplus => WeightScheme::SurplusProportional,
        SchemeArg::Cost => WeightScheme::CostProportional,
    };
    Ok(make_weights(coll, &scheme)?)
}

/// Mean MVPF over the collection when every MVPF is finite; otherwise the
/// category average is ambiguous and reported as `NA`.
fn average_mvpf(coll: &PolicyCollection) -> Ext {
    let mut sum = 0.0;
    for x in coll.points() {
        match mvpf(x) {
            ExtendedWelfare::Finite(v) => sum += v,
            _ => return Ext::Na,
        }
    }
    Ext::Finite(sum / coll.len() as f64)
}

pub fn aggregate(input: &EstimatesFile, args: &AggregateArgs) -> Result<Table> {
    let coll = PolicyCollection::new(input.points())?;
    let w = weights_for(&coll, args)?;
    let mut t = Table::new(vec![
        "mode",
        "scheme",
        "policies",
        "value",
        "aggregate_c",
        "aggregate_p",
        "aggregate_mvpf",
        "aggregate_mss_plus_one",
        "aggregate_max_norm",
        "mean_mss_plus_one",
        "mean_mvpf",
        "weights",
    ]);
    let weights = w
        .values()
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(";");
    let n = coll.len() as f64;
    let mean_bcr = coll.points().map(|x| mss(x) + 1.0).sum::<f64>() / n;
    let scheme = args
        .scheme
        .to_possible_value()
        .expect("listed")
        .get_name()
        .to_string();
    let row = match args.mode {
        AggregateMode::Jpv => {
            let r = jpv(&coll, &w)?;
            vec![
                "jpv".into(),
                scheme.into(),
                coll.len().into(),
                r.value.into(),
                r.aggregate.c().into(),
                r.aggregate.p().into(),
                Ext::from(mvpf(r.aggregate)).into(),
                (mss(r.aggregate) + 1.0).into(),
                r.max_norm.into(),
                mean_bcr.into(),
                average_mvpf(&coll).into(),
                weights.into(),
            ]
        }
        AggregateMode::Tpv => vec![
            "tpv".into(),
            scheme.into(),
            coll.len().into(),
            tpv(&coll, &w)?.into(),
            Cell::Missing,
            Cell::Missing,
            Cell::Missing,
            Cell::Missing,
            Cell::Missing,
            mean_bcr.into(),
            average_mvpf(&coll).into(),
            weights.into(),
        ],
    };
    t.push(row);
    Ok(t.meta("command", "aggregate").meta("version", VERSION))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum CiMethod {
    UniformRect,
    UniformEllipse,
    MinimalistRect,
    MinimalistEllipse,
    Percentile,
    Efron,
}

impl CiMethod {
    pub const ALL: [CiMethod; 6] = [
        CiMethod::UniformRect,
        CiMethod::UniformEllipse,
        CiMethod::MinimalistRect,
        CiMethod::MinimalistEllipse,
        CiMethod::Percentile,
        CiMethod::Efron,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CiMethod::UniformRect => "uniform-rect",
            CiMethod::UniformEllipse => "uniform-ellipse",
            CiMethod::MinimalistRect => "minimalist-rect",
            CiMethod::MinimalistEllipse => "minimalist-ellipse",
            CiMethod::Percentile => "percentile",
            CiMethod::Efron => "efron",
        }
    }

    fn needs_resamples(&self) -> bool {
        !matches!(self, CiMethod::UniformRect | CiMethod::UniformEllipse)
    }

    fn rect(&self) -> bool {
        matches!(self, CiMethod::UniformRect | CiMethod::MinimalistRect)
    }

    fn ellipse(&self) -> bool {
        matches!(self, CiMethod::UniformEllipse | CiMethod::MinimalistEllipse)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProjectionArg {
    MonteCarlo,
    Exact,
}

pub enum CiInput {
    Samples(Vec<Sample>),
    Estimates {
        estimates: Vec<PolicyEstimate>,
        resamples: Option<Vec<ResampleSet>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiArgs {
    /// Empty means every method the input supports.
    pub methods: Vec<CiMethod>,
    pub alpha: f64,
    pub boot: usize,
    pub proj_draws: usize,
    pub seed: u64,
    pub projection: ProjectionArg,
    /// Calibrate one critical value jointly over all policies.
    pub joint: bool,
}

struct Prepared {
    est: PolicyEstimate,
    set: Option<ResampleSet>,
    rect: Option<CriticalValue>,
    ellipse: Option<CriticalValue>,
    /// Seed for this policy's projection draws.
    seed: u64,
}

fn critical(
    src: RootSource<'_>,
    rect: bool,
    ellipse: bool,
    args: &CiArgs,
    seed: u64,
) -> Result<(Option<CriticalValue>, Option<CriticalValue>)> {
    Ok(match (rect, ellipse) {
        (true, true) => {
            let (d, t) = critical_values(src, args.alpha, args.boot, seed)?;
            (Some(d), Some(t))
        }
        (true, false) => (
            Some(critical_value_rect(src, args.alpha, args.boot, seed)?),
            None,
        ),
        (false, true) => (
            None,
            Some(critical_value_ellipse(src, args.alpha, args.boot, seed)?),
        ),
        (false, false) => (None, None),
    })
}

fn prepare(input: &CiInput, args: &CiArgs, rect: bool, ellipse: bool) -> Result<Vec<Prepared>> {
    let mut out = Vec::new();
    match input {
        CiInput::Samples(samples) => {
            let joint = if args.joint {
                Some(critical(
                    RootSource::Samples(samples),
                    rect,
                    ellipse,
                    args,
                    args.seed,
                )?)
            } else {
                None
            };
            for (l, s) in samples.iter().enumerate() {
                let policy_seed = derive_seed(args.seed, l as u64);
                // joint calibration addresses policy l through lane l of the
                // shared seed; the resamples must come from the same stream
                let (seed, lane) = if args.joint {
                    (args.seed, l as u64)
                } else {
                    (policy_seed, 0)
                };
                let set = bootstrap_resample_lane(s, args.boot, seed, lane)?;
                let (d, t) = match joint {
                    Some(v) => v,
                    None => critical(
                        RootSource::Samples(std::slice::from_ref(s)),
                        rect,
                        ellipse,
                        args,
                        seed,
                    )?,
                };
                out.push(Prepared {
                    est: estimate_from_sample(s)?,
                    set: Some(set),
                    rect: d,
                    ellipse: t,
                    seed: policy_seed,
                });
            }
        }
        CiInput::Estimates {
            estimates,
            resamples,
        } => {
            let sets: Option<Vec<ResampleSet>> = match resamples {
                Some(all) => Some(
                    estimates
                        .iter()
                        .map(|e| {
                            all.iter()
                                .find(|r| r.policy_id() == e.policy_id)
                                .cloned()
                                .ok_or_else(|| {
                                    CliError::input(format!(
                                        "no resamples for policy `{}`",
                                        e.policy_id
                                    ))
                                })
                        })
                        .collect::<Result<_>>()?,
                ),
                None => None,
            };
            let joint = if args.joint {
                let src = match &sets {
                    Some(s) => RootSource::Resamples {
                        estimates,
                        resamples: s,
                    },
                    None => RootSource::Gaussian(estimates),
                };
                Some(critical(src, rect, ellipse, args, args.seed)?)
            } else {
                None
            };
            for (l, e) in estimates.iter().enumerate() {
                let policy_seed = derive_seed(args.seed, l as u64);
                let set = sets.as_ref().map(|s| s[l].clone());
                let (d, t) = match joint {
                    Some(v) => v,
                    None => {
                        let one = std::slice::from_ref(e);
                        let src = match &set {
                            Some(s) => RootSource::Resamples {
                                estimates: one,
                                resamples: std::slice::from_ref(s),
                            },
                            None => RootSource::Gaussian(one),
                        };
                        critical(src, rect, ellipse, args, policy_seed)?
                    }
                };
                out.push(Prepared {
                    est: e.clone(),
                    set,
                    rect: d,
                    ellipse: t,
                    seed: policy_seed,
                });
            }
        }
    }
    Ok(out)
}

fn checked(iv: Interval, method: CiMethod, policy: &str) -> Result<Interval> {
    iv.check_rpv_range(RPV_RANGE_TOL).map_err(|e| {
        CliError::Numeric(format!("{} interval for `{policy}`: {e}", method.label()))
    })?;
    Ok(iv)
}

pub fn ci(input: &CiInput, args: &CiArgs) -> Result<Table> {
    let has_resamples = match input {
        CiInput::Samples(_) => true,
        CiInput::Estimates { resamples, .. } => resamples.is_some(),
    };
    let methods: Vec<CiMethod> = if args.methods.is_empty() {
        CiMethod::ALL
            .into_iter()
            .filter(|m| has_resamples || !m.needs_resamples())
            .collect()
    } else {
        let mut m = Vec::new();
        for x in &args.methods {
            if !m.contains(x) {
                m.push(*x);
            }
        }
        m
    };
    if let Some(m) = methods
        .iter()
        .find(|m| m.needs_resamples() && !has_resamples)
    {
        return Err(CliError::input(format!(
            "method `{}` needs resampled estimates: pass --samples, or --resamples with --estimates",
            m.label()
        )));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::input(format!(
            "--alpha must lie in (0, 1), got {}",
            args.alpha
        )));
    }
    let rect = methods.iter().any(CiMethod::rect);
    let ellipse = methods.iter().any(CiMethod::ellipse);
    let prepared = prepare(input, args, rect, ellipse)?;
    let source = match input {
        CiInput::Samples(_) => "studentized-bootstrap",
        CiInput::Estimates {
            resamples: Some(_), ..
        } => "resample-studentized",
        CiInput::Estimates {
            resamples: None, ..
        } => "parametric-gaussian",
    };
    let boot = match input {
        CiInput::Estimates {
            resamples: Some(_), ..
        } => Cell::Missing,
        _ => args.boot.into(),
    };

    let mut t = Table::new(vec![
        "policy_id",
        "method",
        "functional",
        "estimate",
        "lo",
        "hi",
        "critical_value",
        "resamples_used",
        "resamples_dropped",
    ]);
    for p in &prepared {
        let id = p.est.policy_id.as_str();
        let how = match args.projection {
            ProjectionArg::Exact => Projection::Exact,
            ProjectionArg::MonteCarlo => Projection::MonteCarlo {
                draws: args.proj_draws,
                seed: p.seed,
            },
        };
        let rect_region = match p.rect {
            Some(d) => Some(Region::from(rect_region(&p.est, d.value)?)),
            None => None,
        };
        let ellipse_region = match p.ellipse {
            Some(t) => Some(Region::from(ellipse_region(&p.est, t.value)?)),
            None => None,
        };
        let n_draws = p.set.as_ref().map(ResampleSet::len);
        let point_rpv = rpv(p.est.point);
        for m in &methods {
            let region_and_cv = || -> (&Region, CriticalValue) {
                if m.rect() {
                    (rect_region.as_ref().expect("rect"), p.rect.expect("rect"))
                } else {
                    (
                        ellipse_region.as_ref().expect("ellipse"),
                        p.ellipse.expect("ellipse"),
                    )
                }
            };
            let row: Vec<Cell> = match m {
                CiMethod::UniformRect | CiMethod::UniformEllipse => {
                    let (region, cv) = region_and_cv();
                    let mut iv = project_rpv(region, how)?;
                    // resampled estimates inside the region are points of
                    // it too, so the reported projection always covers the
                    // minimalist interval
                    if let Some(set) = &p.set {
                        if let Ok(min) = minimalist_ci(set, region) {
                            iv = iv.hull(&min);
                        }
                    }
                    let iv = checked(iv, *m, id)?;
                    vec![
                        point_rpv.into(),
                        iv.lo.into(),
                        iv.hi.into(),
                        cv.value.into(),
                        n_draws.into(),
                        Cell::Missing,
                    ]
                }
                CiMethod::MinimalistRect | CiMethod::MinimalistEllipse => {
                    let (region, cv) = region_and_cv();
                    let set = p.set.as_ref().expect("resamples");
                    let iv = checked(minimalist_ci(set, region)?, *m, id)?;
                    let inside = set.draws().iter().filter(|x| region.contains(**x)).count();
                    vec![
                        point_rpv.into(),
                        iv.lo.into(),
                        iv.hi.into(),
                        cv.value.into(),
                        inside.into(),
                        (set.len() - inside).into(),
                    ]
                }
                CiMethod::Percentile => {
                    let set = p.set.as_ref().expect("resamples");
                    let iv = checked(percentile_ci_rpv(set, args.alpha)?, *m, id)?;
                    vec![
                        point_rpv.into(),
                        iv.lo.into(),
                        iv.hi.into(),
                        Cell::Missing,
                        set.len().into(),
                        0u64.into(),
                    ]
                }
                CiMethod::Efron => {
                    let set = p.set.as_ref().expect("resamples");
                    let iv = efron_bc_ci(set, &p.est, args.alpha)?;
                    vec![
                        Ext::from(mvpf(p.est.point)).into(),
                        Ext::from(iv.lo).into(),
                        Ext::from(iv.hi).into(),
                        Cell::Missing,
                        iv.used.into(),
                        iv.dropped.into(),
                    ]
                }
            };
            let functional = if *m == CiMethod::Efron { "mvpf" } else { "rpv" };
            let mut full: Vec<Cell> = vec![id.into(), m.label().into(), functional.into()];
            full.extend(row);
            t.push(full);
        }
    }
    let k: Cell = match args.projection {
        ProjectionArg::MonteCarlo => args.proj_draws.into(),
        ProjectionArg::Exact => Cell::Missing,
    };
    Ok(t.meta("command", "ci")
        .meta("seed", args.seed)
        .meta("alpha", args.alpha)
        .meta("B", boot)
        .meta("K", k)
        .meta(
            "projection",
            if args.projection == ProjectionArg::Exact {
                "exact"
            } else {
                "monte-carlo"
            },
        )
        .meta("root_source", source)
        .meta(
            "calibration",
            if args.joint { "joint" } else { "per-policy" },
        )
        .meta("version", VERSION))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    pub reps: usize,
    pub n: Vec<usize>,
    pub alpha: f64,
    pub seed: u64,
    pub boot: usize,
    pub proj_draws: usize,
    pub projection: ProjectionArg,
    pub bins_maxnorm: Vec<f64>,
    pub bins_absrpv: Vec<f64>,
    pub true_cov: [f64; 3],
}

impl SimulateArgs {
    pub fn config(&self) -> Result<StudyConfig> {
        let [a, b, d] = self.true_cov;
        let cov = SymMatrix2::from_rows([[a, b], [b, d]])?;
        let cfg = StudyConfig {
            reps: self.reps,
            n_values: self.n.clone(),
            alpha: self.alpha,
            true_cov: cov,
            b: self.boot,
            k: self.proj_draws,
            bin_edges_maxnorm: self.bins_maxnorm.clone(),
            bin_edges_absrpv: self.bins_absrpv.clone(),
            seed: self.seed,
            projection: match self.projection {
                ProjectionArg::MonteCarlo => UniformProjection::MonteCarlo,
                ProjectionArg::Exact => UniformProjection::Exact,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Equal-width bin edges on `[0, hi]`.
pub fn equal_edges(hi: f64, bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| hi * i as f64 / bins as f64).collect()
}

pub fn simulate(args: &SimulateArgs) -> Result<Table> {
    let cfg = args.config()?;
    let report = run_coverage_study(&cfg)?;
    let mut t = Table::new(vec![
        "axis",
        "method",
        "n",
        "bin_lo",
        "bin_hi",
        "bin_center",
        "count",
        "coverage",
        "width",
        "rejected",
        "containment_violations",
    ]);
    for size in &report.sizes {
        let viol = size.containment_violations[0] + size.containment_violations[1];
        for method in Method::ALL {
            let c = report.overall(size.n, method).expect("method");
            t.push(vec![
                "overall".into(),
                method.label().into(),
                size.n.into(),
                Cell::Missing,
                Cell::Missing,
                Cell::Missing,
                c.rep_count.into(),
                c.coverage_rate().into(),
                c.mean_width().into(),
                size.rejected.into(),
                viol.into(),
            ]);
        }
    }
    for axis in [BinAxis::MaxNorm, BinAxis::AbsRpv] {
        for r in summarize(&report, axis) {
            let size = report.size(r.n).expect("size");
            let viol = size.containment_violations[0] + size.containment_violations[1];
            t.push(vec![
                axis.label().into(),
                r.method.label().into(),
                r.n.into(),
                r.bin_lo.into(),
                r.bin_hi.into(),
                r.bin_center.into(),
                r.count.into(),
                r.coverage.into(),
                r.width.into(),
                size.rejected.into(),
                viol.into(),
            ]);
        }
    }
    let k: Cell = match args.projection {
        ProjectionArg::MonteCarlo => args.proj_draws.into(),
        ProjectionArg::Exact => Cell::Missing,
    };
    Ok(t.meta("command", "simulate")
        .meta("seed", args.seed)
        .meta("reps", args.reps)
        .meta("alpha", args.alpha)
        .meta("B", args.boot)
        .meta("K", k)
        .meta(
            "projection",
            if args.projection == ProjectionArg::Exact {
                "exact"
            } else {
                "monte-carlo"
            },
        )
        .meta("truth_redraws", report.truth_redraws)
        .meta("version", VERSION))
}
