//! Projection of joint `(c, p)` regions through the RPV.
//!
//! The RPV depends on a point only through its direction. Along the unit
//! circle it rises from -2 at angle -pi/4 to 2 at angle 3pi/4 and falls back,
//! so over a convex region that misses the origin its range is fixed by
//! the two extreme directions plus whichever of those two peaks lies
//! between them.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rayon::prelude::*;

use super::{
    EllipseRegion, Interval, PolicyEstimate, ProductRegion, RectRegion, Region, ResampleSet,
};
use crate::aggregation::{WeightKind, WeightVector};
use crate::error::{Error, Result};
use crate::measures::{rpv, PolicyPoint};
use crate::rng::{derive_seed, stream, TAG_PROJECT};

pub const MIN_PROJECTION_DRAWS: usize = 1000;
pub const MIN_GRID_POINTS: usize = 10_000;

const BLOCK: usize = 4096;

/// Rectangle `c_hat +- d se_c` by `p_hat +- d se_p`.
pub fn rect_region(est: &PolicyEstimate, d: f64) -> Result<RectRegion> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::NegativeCriticalValue(d));
    }
    RectRegion::new(est.point, d * est.se_c, d * est.se_p)
}

/// Ellipse with the estimated covariance as shape and `t` as squared radius.
pub fn ellipse_region(est: &PolicyEstimate, t: f64) -> Result<EllipseRegion> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::NegativeCriticalValue(t));
    }
    EllipseRegion::new(est.point, est.covariance(), t)
}

fn rpv_xy(c: f64, p: f64) -> f64 {
    if c == 0.0 && p == 0.0 {
        return 0.0;
    }
    (p - c) / c.abs().max(p.abs())
}

/// Angle difference wrapped into `(-pi, pi]`.
fn wrap(delta: f64) -> f64 {
    let mut d = delta % TAU;
    if d > PI {
        d -= TAU;
    } else if d <= -PI {
        d += TAU;
    }
    d
}

/// RPV range over the cone spanned by `points` (none of them the origin),
/// all lying within less than `pi` of the direction of `reference`.
fn arc_interval(points: &[(f64, f64)], reference: (f64, f64), with_origin: bool) -> Interval {
    let base = reference.1.atan2(reference.0);
    let rel = |v: (f64, f64)| wrap(v.1.atan2(v.0) - base);
    let mut lo = (f64::INFINITY, (0.0, 0.0));
    let mut hi = (f64::NEG_INFINITY, (0.0, 0.0));
    for &v in points {
        let d = rel(v);
        if d < lo.0 {
            lo = (d, v);
        }
        if d > hi.0 {
            hi = (d, v);
        }
    }
    let mut values = vec![rpv_xy(lo.1 .0, lo.1 .1), rpv_xy(hi.1 .0, hi.1 .1)];
    for (dir, peak) in [((-1.0, 1.0), 2.0), ((1.0, -1.0), -2.0)] {
        let d = rel(dir);
        if lo.0 <= d && d <= hi.0 {
            values.push(peak);
        }
    }
    if with_origin {
        values.push(0.0);
    }
    Interval::from_values(values).expect("non-empty")
}

fn segment_interval(a: (f64, f64), b: (f64, f64)) -> Interval {
    if a == b {
        return Interval::point(rpv_xy(a.0, a.1));
    }
    let cross = a.0 * b.1 - a.1 * b.0;
    let dot = a.0 * b.0 + a.1 * b.1;
    if cross == 0.0 && dot <= 0.0 {
        // the segment passes through the origin
        return Interval::from_values([rpv_xy(a.0, a.1), rpv_xy(b.0, b.1), 0.0])
            .expect("non-empty");
    }
    let mid = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
    arc_interval(&[a, b], mid, false)
}

fn exact_rect(r: &RectRegion) -> Interval {
    let (cc, cp) = (r.center.c(), r.center.p());
    let (rc, rp) = r.half_widths;
    if rc == 0.0 || rp == 0.0 {
        return segment_interval((cc - rc, cp - rp), (cc + rc, cp + rp));
    }
    if cc.abs() < rc && cp.abs() < rp {
        return Interval { lo: -2.0, hi: 2.0 };
    }
    let corners: Vec<(f64, f64)> = r
        .corners()
        .into_iter()
        .filter(|&(c, p)| !(c == 0.0 && p == 0.0))
        .collect();
    arc_interval(&corners, (cc, cp), r.contains(PolicyPoint::ORIGIN))
}

fn exact_ellipse(e: &EllipseRegion) -> Interval {
    let m = (e.center.c(), e.center.p());
    let (vals, vecs) = e.shape.eigen();
    let l1 = vals[0].max(0.0);
    let l2 = vals[1].max(0.0);
    let t = e.radius_sq;
    if t == 0.0 || l1 == 0.0 {
        return Interval::point(rpv(e.center));
    }
    if l2 <= 1e-14 * l1 {
        let h = (t * l1).sqrt();
        let v = vecs[0];
        return segment_interval(
            (m.0 - h * v[0], m.1 - h * v[1]),
            (m.0 + h * v[0], m.1 + h * v[1]),
        );
    }
    // n = L^{-1} m with L = sqrt(t) S^{1/2}
    let scale = [1.0 / (t * l1).sqrt(), 1.0 / (t * l2).sqrt()];
    let mut n = (0.0, 0.0);
    for (v, s) in vecs.iter().zip(scale) {
        let proj = (v[0] * m.0 + v[1] * m.1) * s;
        n.0 += proj * v[0];
        n.1 += proj * v[1];
    }
    let norm_sq = n.0 * n.0 + n.1 * n.1;
    if norm_sq < 1.0 {
        return Interval { lo: -2.0, hi: 2.0 };
    }
    if norm_sq - 1.0 <= 1e-12 {
        // origin on the boundary: the region fills the half-plane on the
        // side of the inward normal S^{-1} m
        let mut nu = (0.0, 0.0);
        for (v, s) in vecs.iter().zip([1.0 / l1, 1.0 / l2]) {
            let proj = (v[0] * m.0 + v[1] * m.1) * s;
            nu.0 += proj * v[0];
            nu.1 += proj * v[1];
        }
        return arc_interval(&[(-nu.1, nu.0), (nu.1, -nu.0)], nu, true);
    }
    let g = e.generator();
    let phi = n.1.atan2(n.0);
    let beta = (-1.0 / norm_sq.sqrt()).acos();
    let tangents: Vec<(f64, f64)> = [phi - beta, phi + beta]
        .into_iter()
        .map(|u| {
            let w = g.mul_vec([u.cos(), u.sin()]);
            (m.0 + w[0], m.1 + w[1])
        })
        .collect();
    arc_interval(&tangents, m, false)
}

/// Exact range of the RPV over a convex region, computed from the extreme
/// directions of the region as seen from the origin.
pub fn project_rpv_exact(region: &Region) -> Interval {
    match region {
        Region::Rect(r) => exact_rect(r),
        Region::Ellipse(e) => exact_ellipse(e),
    }
}

fn check_draws(k: usize) -> Result<()> {
    if k < MIN_PROJECTION_DRAWS {
        return Err(Error::invalid(
            "K",
            format!("need at least {MIN_PROJECTION_DRAWS} boundary draws, got {k}"),
        ));
    }
    Ok(())
}

/// Min and max of `f(rng)` over `k` draws, split into fixed blocks so the
/// first `k` draws do not depend on `k` or on the thread count.
fn monte_carlo<F>(k: usize, seed: u64, lane: u64, f: F) -> Interval
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    let base = derive_seed(seed, TAG_PROJECT);
    let blocks = k.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(base, (lane << 32) | j as u64);
            let len = BLOCK.min(k - j * BLOCK);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for _ in 0..len {
                let v = f(&mut rng);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            Interval { lo, hi }
        })
        .reduce_with(|a, b| a.hull(&b))
        .expect("k >= 1")
}

fn mc_rect(r: &RectRegion, k: usize, seed: u64, lane: u64) -> Interval {
    let (rc, rp) = r.half_widths;
    if rc == 0.0 && rp == 0.0 {
        return Interval::point(rpv(r.center));
    }
    let (cc, cp) = (r.center.c(), r.center.p());
    monte_carlo(k, seed, lane, |rng| {
        let on_vertical_edge: bool = rng.random();
        let sign = if rng.random::<bool>() { -1.0 } else { 1.0 };
        let u: f64 = rng.random_range(-1.0..=1.0);
        if on_vertical_edge {
            rpv_xy(cc + sign * rc, cp + u * rp)
        } else {
            rpv_xy(cc + u * rc, cp + sign * rp)
        }
    })
}

fn mc_ellipse(e: &EllipseRegion, k: usize, seed: u64, lane: u64) -> Interval {
    if e.radius_sq == 0.0 {
        return Interval::point(rpv(e.center));
    }
    let g = e.generator();
    let (cc, cp) = (e.center.c(), e.center.p());
    monte_carlo(k, seed, lane, |rng| {
        let u: f64 = rng.random_range(0.0..TAU);
        let w = g.mul_vec([u.cos(), u.sin()]);
        rpv_xy(cc + w[0], cp + w[1])
    })
}

/// Monte Carlo projection of a rectangle: RPV range over `k` random points
/// on its boundary, each drawn by picking one of the four edges and a
/// uniform position along it.
pub fn project_rpv_rect(region: &RectRegion, k: usize, seed: u64) -> Result<Interval> {
    check_draws(k)?;
    Ok(mc_rect(region, k, seed, 0))
}

/// Monte Carlo projection of an ellipse: RPV range over `k` boundary points
/// `center + sqrt(t) S^{1/2} (cos u, sin u)` with uniform angles `u`.
pub fn project_rpv_ellipse(region: &EllipseRegion, k: usize, seed: u64) -> Result<Interval> {
    check_draws(k)?;
    Ok(mc_ellipse(region, k, seed, 0))
}

/// Deterministic projection over `points` evenly spaced boundary points:
/// by arc length around a rectangle, by parameter angle around an ellipse.
pub fn project_rpv_grid(region: &Region, points: usize) -> Result<Interval> {
    if points < MIN_GRID_POINTS {
        return Err(Error::invalid(
            "points",
            format!("need at least {MIN_GRID_POINTS} grid points, got {points}"),
        ));
    }
    let eval: Box<dyn Fn(usize) -> f64 + Sync> = match region {
        Region::Rect(r) => {
            let (rc, rp) = r.half_widths;
            if rc == 0.0 && rp == 0.0 {
                return Ok(Interval::point(rpv(r.center)));
            }
            let (c0, p0) = (r.center.c() - rc, r.center.p() - rp);
            let (wc, wp) = (2.0 * rc, 2.0 * rp);
            let perimeter = 2.0 * (wc + wp);
            Box::new(move |i| {
                let s = perimeter * i as f64 / points as f64;
                let (c, p) = if s < wc {
                    (c0 + s, p0)
                } else if s < wc + wp {
                    (c0 + wc, p0 + (s - wc))
                } else if s < 2.0 * wc + wp {
                    (c0 + wc - (s - wc - wp), p0 + wp)
                } else {
                    (c0, p0 + wp - (s - 2.0 * wc - wp))
                };
                rpv_xy(c, p)
            })
        }
        Region::Ellipse(e) => {
            if e.radius_sq == 0.0 {
                return Ok(Interval::point(rpv(e.center)));
            }
            let g = e.generator();
            let (cc, cp) = (e.center.c(), e.center.p());
            Box::new(move |i| {
                let u = TAU * i as f64 / points as f64;
                let w = g.mul_vec([u.cos(), u.sin()]);
                rpv_xy(cc + w[0], cp + w[1])
            })
        }
    };
    Ok((0..points)
        .into_par_iter()
        .with_min_len(BLOCK)
        .map(|i| Interval::point(eval(i)))
        .reduce_with(|a, b| a.hull(&b))
        .expect("points > 0"))
}

/// How a region is projected through the RPV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    /// Closed form, the `K -> infinity` limit of the Monte Carlo version.
    Exact,
    MonteCarlo {
        draws: usize,
        seed: u64,
    },
    Grid {
        points: usize,
    },
}

impl Projection {
    pub fn name(&self) -> &'static str {
        match self {
            Projection::Exact => "exact",
            Projection::MonteCarlo { .. } => "monte-carlo",
            Projection::Grid { .. } => "grid",
        }
    }
}

fn project_lane(region: &Region, how: Projection, lane: u64) -> Result<Interval> {
    match how {
        Projection::Exact => Ok(project_rpv_exact(region)),
        Projection::Grid { points } => project_rpv_grid(region, points),
        Projection::MonteCarlo { draws, seed } => {
            check_draws(draws)?;
            Ok(match region {
                Region::Rect(r) => mc_rect(r, draws, seed, lane),
                Region::Ellipse(e) => mc_ellipse(e, draws, seed, lane),
            })
        }
    }
}

/// Projects one region with the chosen method.
pub fn project_rpv(region: &Region, how: Projection) -> Result<Interval> {
    project_lane(region, how, 0)
}

/// Minimalist CI: the range of the RPV over resampled estimates that fall
/// inside the region.
pub fn minimalist_ci(resamples: &ResampleSet, region: &Region) -> Result<Interval> {
    resamples.require_floor()?;
    Interval::from_values(
        resamples
            .draws()
            .iter()
            .filter(|x| region.contains(**x))
            .map(|x| rpv(*x)),
    )
    .ok_or_else(|| Error::EmptyIntersection(resamples.policy_id().to_string()))
}

#[derive(Debug, Clone, Copy)]
pub enum AggregateMode<'a> {
    Jpv(&'a WeightVector),
    Tpv(&'a WeightVector),
}

/// Projection CI for the JPV or TPV of a collection from a product region.
///
/// TPV is separable, so its range is the weighted sum of the per-policy
/// ranges. For the JPV the aggregate point ranges over the Minkowski sum
/// of the scaled regions; rectangles sum to a rectangle, and ellipses are
/// replaced by their bounding boxes first, which can only widen the result.
pub fn project_aggregate(
    regions: &ProductRegion,
    mode: AggregateMode<'_>,
    how: Projection,
) -> Result<Interval> {
    let (weights, kind) = match mode {
        AggregateMode::Jpv(w) => (w, WeightKind::Scaling),
        AggregateMode::Tpv(w) => (w, WeightKind::Importance),
    };
    if let Some(source) = weights.source() {
        return Err(Error::DataDependentWeights(source));
    }
    weights.check(regions.len(), kind)?;
    match mode {
        AggregateMode::Tpv(w) => {
            let (mut lo, mut hi) = (0.0, 0.0);
            for (lane, ((_, region), wl)) in regions.per_policy().iter().zip(w.values()).enumerate()
            {
                let iv = project_lane(region, how, lane as u64)?;
                lo += wl * iv.lo;
                hi += wl * iv.hi;
            }
            Interval::new(lo, hi)
        }
        AggregateMode::Jpv(lambda) => {
            let (mut cc, mut cp, mut rc, mut rp) = (0.0, 0.0, 0.0, 0.0);
            for ((_, region), l) in regions.per_policy().iter().zip(lambda.values()) {
                let rect = match region {
                    Region::Rect(r) => *r,
                    Region::Ellipse(e) => e.bounding_rect(),
                };
                cc += l * rect.center.c();
                cp += l * rect.center.p();
                rc += l * rect.half_widths.0;
                rp += l * rect.half_widths.1;
            }
            let sum = RectRegion::new(PolicyPoint::new(cc, cp)?, rc, rp)?;
            project_lane(&Region::Rect(sum), how, 0)
        }
    }
}
