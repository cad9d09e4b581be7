//! Confidence intervals for the RPV and the MVPF.
//!
//! The uniform procedures build a joint region for `(c, p)` (a rectangle or
//! an ellipse calibrated by a bootstrap root) and project it through the
//! RPV. The minimalist procedure keeps only resampled estimates inside that
//! region. Percentile and bias-corrected bootstrap intervals are included as
//! the conventional baselines.

mod bootstrap_ci;
mod critical;
mod estimate;
mod projection;

pub use bootstrap_ci::{
    efron_bc_ci, efron_bc_ci_rpv, percentile_ci, percentile_ci_rpv, Functional,
};
pub use critical::{
    critical_value_ellipse, critical_value_rect, critical_values, CriticalValue, RootSource,
};
pub use estimate::{bootstrap_resample, bootstrap_resample_lane, estimate_from_sample};
pub use projection::{
    ellipse_region, minimalist_ci, project_aggregate, project_rpv, project_rpv_ellipse,
    project_rpv_exact, project_rpv_grid, project_rpv_rect, rect_region, AggregateMode, Projection,
    MIN_GRID_POINTS, MIN_PROJECTION_DRAWS,
};

pub(crate) use bootstrap_ci::order_statistic;
pub(crate) use critical::{root_max_abs, root_quadratic, studentize};
pub(crate) use estimate::{resample_stats, DrawStats};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::PolicyPoint;

/// Default floor on the number of resampled estimates a CI may be built from.
pub const MIN_RESAMPLES: usize = 100;

/// Largest admissible `|rho|`; beyond it the correlation matrix is treated
/// as singular.
pub const RHO_LIMIT: f64 = 1.0 - 1e-8;

/// IID draws `(c_i, p_i)` for one policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    policy_id: String,
    rows: Vec<PolicyPoint>,
}

impl Sample {
    pub fn new(policy_id: impl Into<String>, rows: Vec<PolicyPoint>) -> Result<Self> {
        let policy_id = policy_id.into();
        if rows.len() < 3 {
            return Err(Error::DegenerateSample {
                policy: policy_id,
                reason: format!("need at least 3 rows, got {}", rows.len()),
            });
        }
        let first = rows[0];
        let varies_c = rows.iter().any(|x| x.c() != first.c());
        let varies_p = rows.iter().any(|x| x.p() != first.p());
        if !(varies_c && varies_p) {
            return Err(Error::DegenerateSample {
                policy: policy_id,
                reason: "both coordinates need positive sample variance".into(),
            });
        }
        Ok(Self { policy_id, rows })
    }

    pub fn policy_id(&self) -> &str {
        &self.policy_id
    }

    pub fn rows(&self) -> &[PolicyPoint] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Point estimate of `(c, p)` with standard errors and their correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyEstimate {
    pub policy_id: String,
    pub point: PolicyPoint,
    pub se_c: f64,
    pub se_p: f64,
    pub rho: f64,
    pub n: Option<u64>,
}

impl PolicyEstimate {
    pub fn new(
        policy_id: impl Into<String>,
        point: PolicyPoint,
        se_c: f64,
        se_p: f64,
        rho: f64,
        n: Option<u64>,
    ) -> Result<Self> {
        for (name, se) in [("se_c", se_c), ("se_p", se_p)] {
            if !(se.is_finite() && se > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {se}"),
                ));
            }
        }
        if rho.is_nan() || rho.abs() > RHO_LIMIT {
            return Err(Error::CorrelationGuard(rho));
        }
        if n == Some(0) {
            return Err(Error::invalid("n", "must be positive"));
        }
        Ok(Self {
            policy_id: policy_id.into(),
            point,
            se_c,
            se_p,
            rho,
            n,
        })
    }

    /// Estimated covariance matrix of `(c_hat, p_hat)`.
    pub fn covariance(&self) -> SymMatrix2 {
        SymMatrix2::new(
            self.se_c * self.se_c,
            self.rho * self.se_c * self.se_p,
            self.se_p * self.se_p,
        )
    }
}

/// Bootstrap estimates `(c*_b, p*_b)` for one policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResampleSet {
    policy_id: String,
    draws: Vec<PolicyPoint>,
    min_draws: usize,
}

impl ResampleSet {
    pub fn new(policy_id: impl Into<String>, draws: Vec<PolicyPoint>) -> Self {
        Self {
            policy_id: policy_id.into(),
            draws,
            min_draws: MIN_RESAMPLES,
        }
    }

    /// Overrides the minimum number of draws required before a CI is built.
    pub fn with_min_draws(mut self, min_draws: usize) -> Self {
        self.min_draws = min_draws.max(1);
        self
    }

    pub fn policy_id(&self) -> &str {
        &self.policy_id
    }

    pub fn draws(&self) -> &[PolicyPoint] {
        &self.draws
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn min_draws(&self) -> usize {
        self.min_draws
    }

    pub(crate) fn require_floor(&self) -> Result<()> {
        if self.draws.len() < self.min_draws {
            return Err(Error::InsufficientResamples {
                policy: self.policy_id.clone(),
                need: self.min_draws,
                have: self.draws.len(),
            });
        }
        Ok(())
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::invalid(
                "interval",
                format!("need lo <= hi, got [{lo}, {hi}]"),
            ));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Errors if the interval leaves `[-2, 2]` by more than `tol`.
    pub fn check_rpv_range(&self, tol: f64) -> Result<()> {
        for value in [self.lo, self.hi] {
            if !(-2.0 - tol..=2.0 + tol).contains(&value) {
                return Err(Error::OutOfRange { value });
            }
        }
        Ok(())
    }

    pub(crate) fn from_values(values: impl IntoIterator<Item = f64>) -> Option<Interval> {
        let mut out: Option<Interval> = None;
        for v in values {
            out = Some(match out {
                None => Interval::point(v),
                Some(iv) => Interval {
                    lo: iv.lo.min(v),
                    hi: iv.hi.max(v),
                },
            });
        }
        out
    }
}

/// Endpoint of an MVPF-valued interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ExtendedBound {
    Finite(f64),
    PositiveInfinity,
}

impl ExtendedBound {
    pub(crate) fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedBound::PositiveInfinity
        } else {
            ExtendedBound::Finite(v)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedBound::Finite(v) => v,
            ExtendedBound::PositiveInfinity => f64::INFINITY,
        }
    }
}

/// A bootstrap interval over possibly infinite values. `dropped` counts
/// draws whose functional was undefined and therefore excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInterval {
    pub lo: ExtendedBound,
    pub hi: ExtendedBound,
    pub used: usize,
    pub dropped: usize,
}

impl BootstrapInterval {
    /// The interval as a real interval, if both ends are finite.
    pub fn finite(&self) -> Option<Interval> {
        match (self.lo, self.hi) {
            (ExtendedBound::Finite(lo), ExtendedBound::Finite(hi)) => Some(Interval { lo, hi }),
            _ => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }
}

/// Symmetric 2x2 matrix `[[a, b], [b, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix2 {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

/// Eigenvalues below this are an error; between it and zero they are
/// treated as zero.
const EIGEN_FLOOR: f64 = -1e-10;

impl SymMatrix2 {
    pub const IDENTITY: SymMatrix2 = SymMatrix2 {
        a: 1.0,
        b: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, d: f64) -> Self {
        Self { a, b, d }
    }

    /// From a full 2x2 matrix, requiring symmetry within `1e-12` relative.
    pub fn from_rows(rows: [[f64; 2]; 2]) -> Result<Self> {
        let scale = rows.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveSemidefinite("non-finite entry".into()));
        }
        if (rows[0][1] - rows[1][0]).abs() > 1e-12 * scale {
            return Err(Error::NotPositiveSemidefinite(format!(
                "not symmetric: {} vs {}",
                rows[0][1], rows[1][0]
            )));
        }
        Ok(Self::new(
            rows[0][0],
            0.5 * (rows[0][1] + rows[1][0]),
            rows[1][1],
        ))
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.b
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Eigenvalues in descending order with unit eigenvectors.
    pub fn eigen(&self) -> ([f64; 2], [[f64; 2]; 2]) {
        let mean = 0.5 * (self.a + self.d);
        let half_diff = 0.5 * (self.a - self.d);
        let r = half_diff.hypot(self.b);
        let l1 = mean + r;
        let l2 = mean - r;
        // rotation angle that diagonalizes the matrix
        let theta = 0.5 * (2.0 * self.b).atan2(self.a - self.d);
        let (s, c) = theta.sin_cos();
        ([l1, l2], [[c, s], [-s, c]])
    }

    /// Checks positive semidefiniteness (eigenvalues >= -1e-10).
    pub fn check_psd(&self) -> Result<[f64; 2]> {
        if ![self.a, self.b, self.d].iter().all(|v| v.is_finite()) {
            return Err(Error::NotPositiveSemidefinite("non-finite entry".into()));
        }
        let (vals, _) = self.eigen();
        if vals[1] < EIGEN_FLOOR {
            return Err(Error::NotPositiveSemidefinite(format!(
                "eigenvalue {}",
                vals[1]
            )));
        }
        Ok([vals[0].max(0.0), vals[1].max(0.0)])
    }

    /// Symmetric positive semidefinite square root.
    pub fn sqrt_psd(&self) -> Result<SymMatrix2> {
        self.check_psd()?;
        let (vals, vecs) = self.eigen();
        let s1 = vals[0].max(0.0).sqrt();
        let s2 = vals[1].max(0.0).sqrt();
        let [v1, v2] = vecs;
        Ok(SymMatrix2 {
            a: s1 * v1[0] * v1[0] + s2 * v2[0] * v2[0],
            b: s1 * v1[0] * v1[1] + s2 * v2[0] * v2[1],
            d: s1 * v1[1] * v1[1] + s2 * v2[1] * v2[1],
        })
    }

    pub fn scale(&self, k: f64) -> SymMatrix2 {
        SymMatrix2::new(k * self.a, k * self.b, k * self.d)
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.b * v[0] + self.d * v[1]]
    }
}

/// Axis-aligned rectangle `center +- (r_c, r_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectRegion {
    pub center: PolicyPoint,
    pub half_widths: (f64, f64),
}

impl RectRegion {
    pub fn new(center: PolicyPoint, r_c: f64, r_p: f64) -> Result<Self> {
        for (name, r) in [("r_c", r_c), ("r_p", r_p)] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("half-width must be finite and >= 0, got {r}"),
                ));
            }
        }
        Ok(Self {
            center,
            half_widths: (r_c, r_p),
        })
    }

    pub fn contains(&self, x: PolicyPoint) -> bool {
        (x.c() - self.center.c()).abs() <= self.half_widths.0
            && (x.p() - self.center.p()).abs() <= self.half_widths.1
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        let (cc, cp) = (self.center.c(), self.center.p());
        let (rc, rp) = self.half_widths;
        [
            (cc + rc, cp + rp),
            (cc - rc, cp + rp),
            (cc - rc, cp - rp),
            (cc + rc, cp - rp),
        ]
    }
}

/// `{x : (x - center)' shape^{-1} (x - center) <= radius_sq}`, read through
/// the square root of `shape` so singular shapes give segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseRegion {
    pub center: PolicyPoint,
    pub shape: SymMatrix2,
    pub radius_sq: f64,
}

impl EllipseRegion {
    pub fn new(center: PolicyPoint, shape: SymMatrix2, radius_sq: f64) -> Result<Self> {
        if !(radius_sq.is_finite() && radius_sq >= 0.0) {
            return Err(Error::NegativeCriticalValue(radius_sq));
        }
        shape.check_psd()?;
        Ok(Self {
            center,
            shape,
            radius_sq,
        })
    }

    /// `sqrt(radius_sq) * shape^{1/2}`: maps the unit disc onto the region.
    pub fn generator(&self) -> SymMatrix2 {
        self.shape
            .sqrt_psd()
            .expect("shape validated at construction")
            .scale(self.radius_sq.sqrt())
    }

    /// Quadratic form `(x - center)' shape^+ (x - center)`; `+inf` off the
    /// support of a singular shape.
    pub fn quadratic_form(&self, x: PolicyPoint) -> f64 {
        let y = [x.c() - self.center.c(), x.p() - self.center.p()];
        let (vals, vecs) = self.shape.eigen();
        let scale = vals[0].abs().max(f64::MIN_POSITIVE);
        let mut q = 0.0;
        for (lambda, v) in vals.iter().zip(vecs) {
            let proj = v[0] * y[0] + v[1] * y[1];
            if *lambda > 1e-12 * scale {
                q += proj * proj / lambda;
            } else if proj.abs() > 1e-12 * (y[0].abs() + y[1].abs()).max(f64::MIN_POSITIVE) {
                return f64::INFINITY;
            }
        }
        q
    }

    pub fn contains(&self, x: PolicyPoint) -> bool {
        if self.radius_sq == 0.0 {
            return x == self.center;
        }
        self.quadratic_form(x) <= self.radius_sq
    }

    /// Bounding box of the ellipse.
    pub fn bounding_rect(&self) -> RectRegion {
        let t = self.radius_sq;
        RectRegion {
            center: self.center,
            half_widths: (
                (t * self.shape.a.max(0.0)).sqrt(),
                (t * self.shape.d.max(0.0)).sqrt(),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Rect(RectRegion),
    Ellipse(EllipseRegion),
}

impl Region {
    pub fn contains(&self, x: PolicyPoint) -> bool {
        match self {
            Region::Rect(r) => r.contains(x),
            Region::Ellipse(e) => e.contains(x),
        }
    }

    pub fn center(&self) -> PolicyPoint {
        match self {
            Region::Rect(r) => r.center,
            Region::Ellipse(e) => e.center,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Region::Rect(_) => "rect",
            Region::Ellipse(_) => "ellipse",
        }
    }
}

impl From<RectRegion> for Region {
    fn from(r: RectRegion) -> Self {
        Region::Rect(r)
    }
}

impl From<EllipseRegion> for Region {
    fn from(e: EllipseRegion) -> Self {
        Region::Ellipse(e)
    }
}

/// Joint region for a policy collection: one region per policy, all of the
/// same geometry and calibrated by one critical value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductRegion {
    per_policy: Vec<(String, Region)>,
}

impl ProductRegion {
    pub fn new(per_policy: Vec<(String, Region)>) -> Result<Self> {
        let first = per_policy.first().ok_or(Error::EmptyCollection)?;
        let kind = first.1.kind();
        if per_policy.iter().any(|(_, r)| r.kind() != kind) {
            return Err(Error::MixedGeometry);
        }
        Ok(Self { per_policy })
    }

    pub fn per_policy(&self) -> &[(String, Region)] {
        &self.per_policy
    }

    pub fn len(&self) -> usize {
        self.per_policy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_policy.is_empty()
    }
}
