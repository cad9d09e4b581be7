//! Point welfare measures on the (net fiscal cost, willingness-to-pay) plane.
//!
//! Every function here is pure. The comparative measures (RPV, the L^q
//! indices, zeta) are bounded in `[-2, 2]`; the MVPF family is
//! extended-valued and carries its infinities and holes as enum variants
//! rather than as IEEE specials.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A policy's net fiscal cost `c` and willingness-to-pay `p`, both already
/// scaled into comparable units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyPoint {
    c: f64,
    p: f64,
}

impl PolicyPoint {
    pub fn new(c: f64, p: f64) -> Result<Self> {
        if !(c.is_finite() && p.is_finite()) {
            return Err(Error::NonFinite { c, p });
        }
        Ok(Self { c, p })
    }

    pub const ORIGIN: PolicyPoint = PolicyPoint { c: 0.0, p: 0.0 };

    /// Net fiscal cost.
    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Willingness-to-pay.
    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn is_origin(&self) -> bool {
        self.c == 0.0 && self.p == 0.0
    }

    /// Componentwise `self + k * other`.
    ///
    /// Panics if the result overflows to a non-finite value.
    pub fn add_scaled(&self, k: f64, other: &PolicyPoint) -> PolicyPoint {
        let out = PolicyPoint {
            c: self.c + k * other.c,
            p: self.p + k * other.p,
        };
        assert!(
            out.c.is_finite() && out.p.is_finite(),
            "policy point overflow"
        );
        out
    }

    pub fn scale(&self, k: f64) -> PolicyPoint {
        PolicyPoint::ORIGIN.add_scaled(k, self)
    }
}

impl fmt::Display for PolicyPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.c, self.p)
    }
}

/// Codomain of the MVPF: a finite ratio, `+inf`, or undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ExtendedWelfare {
    Finite(f64),
    PositiveInfinity,
    Undefined,
}

impl ExtendedWelfare {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedWelfare::Finite(v) => Some(v),
            _ => None,
        }
    }
}

/// Codomain of the fixed MVPF, `[0, +inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ExtendedNonneg {
    Finite(f64),
    PositiveInfinity,
}

impl ExtendedNonneg {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedNonneg::Finite(v) => Some(v),
            ExtendedNonneg::PositiveInfinity => None,
        }
    }
}

/// Location on the plane: one of the eight open sub-quadrants or an
/// explicit degenerate label for the axes, the two diagonals and the origin.
///
/// Within each quadrant the `A`/`B` split is decided by which coordinate
/// dominates in magnitude: I-A, II-B, III-A and IV-B are cost-dominated
/// (`|c| > |p|`), the others are WTP-dominated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubQuadrant {
    IA,
    IB,
    IIA,
    IIB,
    IIIA,
    IIIB,
    IVA,
    IVB,
    Origin,
    PositiveCostAxis,
    NegativeCostAxis,
    PositiveWtpAxis,
    NegativeWtpAxis,
    /// `p = c`, excluding the origin.
    BreakEven,
    /// `p = -c`, excluding the origin.
    Antidiagonal,
}

impl SubQuadrant {
    pub fn label(&self) -> &'static str {
        match self {
            SubQuadrant::IA => "I-A",
            SubQuadrant::IB => "I-B",
            SubQuadrant::IIA => "II-A",
            SubQuadrant::IIB => "II-B",
            SubQuadrant::IIIA => "III-A",
            SubQuadrant::IIIB => "III-B",
            SubQuadrant::IVA => "IV-A",
            SubQuadrant::IVB => "IV-B",
            SubQuadrant::Origin => "origin",
            SubQuadrant::PositiveCostAxis => "axis:c>0",
            SubQuadrant::NegativeCostAxis => "axis:c<0",
            SubQuadrant::PositiveWtpAxis => "axis:p>0",
            SubQuadrant::NegativeWtpAxis => "axis:p<0",
            SubQuadrant::BreakEven => "diagonal",
            SubQuadrant::Antidiagonal => "antidiagonal",
        }
    }
}

/// The four economically meaningful RPV ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RpvBand {
    /// `[-2, -1]`
    ParetoInferior,
    /// `(-1, 0)`
    BelowBreakEven,
    /// `[0, 1)`
    AtOrAboveBreakEven,
    /// `[1, 2]`
    ParetoSuperior,
}

impl RpvBand {
    pub fn of(rpv: f64) -> RpvBand {
        if rpv <= -1.0 {
            RpvBand::ParetoInferior
        } else if rpv < 0.0 {
            RpvBand::BelowBreakEven
        } else if rpv < 1.0 {
            RpvBand::AtOrAboveBreakEven
        } else {
            RpvBand::ParetoSuperior
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RpvBand::ParetoInferior => "[-2,-1]",
            RpvBand::BelowBreakEven => "(-1,0)",
            RpvBand::AtOrAboveBreakEven => "[0,1)",
            RpvBand::ParetoSuperior => "[1,2]",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrantClass {
    pub subquadrant: SubQuadrant,
    pub band: RpvBand,
}

/// Relative Policy Value: surplus `p - c` normalized by the max norm,
/// zero at the origin.
#[inline]
pub fn rpv(x: PolicyPoint) -> f64 {
    if x.is_origin() {
        return 0.0;
    }
    (x.p - x.c) / max_norm(x)
}

/// Marginal social surplus `p - c`.
#[inline]
pub fn mss(x: PolicyPoint) -> f64 {
    x.p - x.c
}

#[inline]
pub fn max_norm(x: PolicyPoint) -> f64 {
    x.c.abs().max(x.p.abs())
}

/// Marginal value of public funds.
///
/// `c = 0, p < 0` falls outside every defining clause and is reported as
/// `Undefined`, the same as the strictly negative quadrant next to it.
pub fn mvpf(x: PolicyPoint) -> ExtendedWelfare {
    if x.c > 0.0 {
        ExtendedWelfare::Finite(x.p / x.c)
    } else if x.p >= 0.0 {
        ExtendedWelfare::PositiveInfinity
    } else {
        ExtendedWelfare::Undefined
    }
}

/// Marginal cost of funds, defined for revenue-raising policies (`c < 0`).
pub fn mcf(x: PolicyPoint) -> Result<f64> {
    if x.c < 0.0 {
        Ok(x.p / x.c)
    } else {
        Err(Error::Domain {
            measure: "MCF",
            requirement: "c < 0",
            c: x.c,
        })
    }
}

/// Marginal benefit of public projects, defined for costly policies (`c > 0`).
pub fn mbp(x: PolicyPoint) -> Result<f64> {
    if x.c > 0.0 {
        Ok(x.p / x.c)
    } else {
        Err(Error::Domain {
            measure: "MBP",
            requirement: "c > 0",
            c: x.c,
        })
    }
}

/// Multiplicatively symmetric totalization of the MVPF, valued in `[0, inf]`.
pub fn fixed_mvpf(x: PolicyPoint) -> ExtendedNonneg {
    let (c, p) = (x.c, x.p);
    if x.is_origin() {
        ExtendedNonneg::Finite(1.0)
    } else if c > 0.0 && p > 0.0 {
        ExtendedNonneg::Finite(p / c)
    } else if c < 0.0 && p < 0.0 {
        ExtendedNonneg::Finite(c / p)
    } else if c <= 0.0 && p >= 0.0 {
        ExtendedNonneg::PositiveInfinity
    } else {
        ExtendedNonneg::Finite(0.0)
    }
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::invalid(
            "q",
            format!("norm exponent must be >= 1, got {q}"),
        ));
    }
    Ok(())
}

/// `L^q`-normalized welfare index `2^(1/q) (p - c) / ||(c, p)||_q`.
///
/// `q = inf` gives the RPV. The norm is evaluated relative to the max norm
/// so large `q` does not overflow.
pub fn lq_index(x: PolicyPoint, q: f64) -> Result<f64> {
    check_q(q)?;
    if x.is_origin() {
        return Ok(0.0);
    }
    if q.is_infinite() {
        return Ok(rpv(x));
    }
    let m = max_norm(x);
    let rel = ((x.c.abs() / m).powf(q) + (x.p.abs() / m).powf(q)).powf(1.0 / q);
    let value = 2f64.powf(1.0 / q) * ((x.p - x.c) / m) / rel;
    // the bound is exact in real arithmetic; only rounding can cross it
    Ok(value.clamp(-2.0, 2.0))
}

/// Rotation-based index that satisfies both additive symmetries and
/// degree-zero homogeneity but not the MVPF-matching clause that pins
/// down the RPV.
///
/// The input is rotated 45 degrees clockwise, `c' = (c + p)/sqrt2`,
/// `p' = (p - c)/sqrt2`, and `(4/pi) sgn(c + p) arctan(p'/c')` is returned.
/// The antidiagonal `c + p = 0` maps to zero through the sign factor.
pub fn zeta(x: PolicyPoint) -> f64 {
    let s = x.c + x.p;
    if s == 0.0 {
        return 0.0;
    }
    let c_rot = s * FRAC_1_SQRT_2;
    let p_rot = (x.p - x.c) * FRAC_1_SQRT_2;
    let sign = s.signum();
    // arctan(p'/c') without the division: atan2(sgn(c') p', |c'|)
    let angle = (sign * p_rot).atan2(c_rot.abs());
    sign * angle / FRAC_PI_4
}

fn check_phi(phi: f64) -> Result<()> {
    if !(-2.0..=2.0).contains(&phi) {
        return Err(Error::invalid(
            "rpv",
            format!("must lie in [-2, 2], got {phi}"),
        ));
    }
    Ok(())
}

/// Recovers the fixed MVPF from the RPV alone.
pub fn rpv_to_fixed_mvpf(phi: f64) -> Result<ExtendedNonneg> {
    check_phi(phi)?;
    Ok(if phi <= -1.0 {
        ExtendedNonneg::Finite(0.0)
    } else if phi >= 1.0 {
        ExtendedNonneg::PositiveInfinity
    } else if phi < 0.0 {
        ExtendedNonneg::Finite(phi + 1.0)
    } else {
        ExtendedNonneg::Finite(1.0 / (1.0 - phi))
    })
}

/// Recovers an `L^q` index from the RPV alone by evaluating it at a
/// representative point on the RPV's contour ray.
pub fn rpv_to_lq(phi: f64, q: f64) -> Result<f64> {
    check_phi(phi)?;
    check_q(q)?;
    let representative = if phi < 0.0 {
        PolicyPoint {
            c: 1.0,
            p: phi + 1.0,
        }
    } else {
        PolicyPoint {
            c: 1.0 - phi,
            p: 1.0,
        }
    };
    lq_index(representative, q)
}

pub fn classify(x: PolicyPoint) -> QuadrantClass {
    QuadrantClass {
        subquadrant: subquadrant(x),
        band: RpvBand::of(rpv(x)),
    }
}

fn subquadrant(x: PolicyPoint) -> SubQuadrant {
    let (c, p) = (x.c, x.p);
    if x.is_origin() {
        return SubQuadrant::Origin;
    }
    if p == c {
        return SubQuadrant::BreakEven;
    }
    if p == -c {
        return SubQuadrant::Antidiagonal;
    }
    if p == 0.0 {
        return if c > 0.0 {
            SubQuadrant::PositiveCostAxis
        } else {
            SubQuadrant::NegativeCostAxis
        };
    }
    if c == 0.0 {
        return if p > 0.0 {
            SubQuadrant::PositiveWtpAxis
        } else {
            SubQuadrant::NegativeWtpAxis
        };
    }
    let cost_dominated = c.abs() > p.abs();
    match (c > 0.0, p > 0.0, cost_dominated) {
        (true, true, true) => SubQuadrant::IA,
        (true, true, false) => SubQuadrant::IB,
        (false, true, false) => SubQuadrant::IIA,
        (false, true, true) => SubQuadrant::IIB,
        (false, false, true) => SubQuadrant::IIIA,
        (false, false, false) => SubQuadrant::IIIB,
        (true, false, false) => SubQuadrant::IVA,
        (true, false, true) => SubQuadrant::IVB,
    }
}

/// Weights that turn the RPV into other comparative, hybrid or absolute
/// measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RpvWeighting {
    /// weight 1: the RPV itself
    Unit,
    /// `sqrt2 max / ||.||_2`: the `L^2` index
    L2Adjust,
    /// `2 max / ||.||_1`: the `L^1` index
    L1Adjust,
    /// `tanh|p - c|`: bounded hybrid
    TanhHybrid,
    /// `|p - c|`: unbounded hybrid
    AbsSurplusHybrid,
    /// `max{|c|, |p|}`: recovers the surplus `p - c`
    MaxNormAbsolute,
}

impl RpvWeighting {
    pub const ALL: [RpvWeighting; 6] = [
        RpvWeighting::Unit,
        RpvWeighting::L2Adjust,
        RpvWeighting::L1Adjust,
        RpvWeighting::TanhHybrid,
        RpvWeighting::AbsSurplusHybrid,
        RpvWeighting::MaxNormAbsolute,
    ];

    /// The multiplicative weight. Zero at the origin, where the RPV is zero
    /// and the ratio weights are 0/0.
    pub fn weight(&self, x: PolicyPoint) -> f64 {
        if x.is_origin() {
            return 0.0;
        }
        let m = max_norm(x);
        match self {
            RpvWeighting::Unit => 1.0,
            RpvWeighting::L2Adjust => SQRT_2 * m / x.c.hypot(x.p),
            RpvWeighting::L1Adjust => 2.0 * m / (x.c.abs() + x.p.abs()),
            RpvWeighting::TanhHybrid => mss(x).abs().tanh(),
            RpvWeighting::AbsSurplusHybrid => mss(x).abs(),
            RpvWeighting::MaxNormAbsolute => m,
        }
    }
}

/// `rpv(x) * weight(x)`, evaluated through each measure's closed form so
/// that e.g. the max-norm weighting returns exactly `p - c`.
pub fn weighted_rpv(x: PolicyPoint, scheme: RpvWeighting) -> f64 {
    if x.is_origin() {
        return 0.0;
    }
    let surplus = mss(x);
    let m = max_norm(x);
    match scheme {
        RpvWeighting::Unit => rpv(x),
        RpvWeighting::L2Adjust => SQRT_2 * surplus / x.c.hypot(x.p),
        RpvWeighting::L1Adjust => 2.0 * surplus / (x.c.abs() + x.p.abs()),
        RpvWeighting::TanhHybrid => surplus * surplus.abs().tanh() / m,
        RpvWeighting::AbsSurplusHybrid => surplus * surplus.abs() / m,
        RpvWeighting::MaxNormAbsolute => surplus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: f64, p: f64) -> PolicyPoint {
        PolicyPoint::new(c, p).unwrap()
    }

    #[test]
    fn rejects_non_finite_points() {
        assert!(PolicyPoint::new(f64::NAN, 0.0).is_err());
        assert!(PolicyPoint::new(0.0, f64::INFINITY).is_err());
        assert!(PolicyPoint::new(f64::NEG_INFINITY, 1.0).is_err());
    }

    #[test]
    fn rpv_examples() {
        assert_eq!(rpv(pt(0.0, 0.0)), 0.0);
        assert!((rpv(pt(4.86, -42.82)) - -1.11).abs() < 0.005);
        assert!((rpv(pt(-3.15, 18.41)) - 1.17).abs() < 0.005);
        assert_eq!(rpv(pt(1.5, 6.0)), 0.75);
    }

    #[test]
    fn mss_examples() {
        assert_eq!(mss(pt(1.0, 2.0)), 1.0);
        assert_eq!(mss(pt(2.0, 1.0)), -1.0);
        assert!((mss(pt(-3.15, 18.41)) - 21.56).abs() < 1e-9);
    }

    #[test]
    fn mvpf_examples() {
        // the reference point is rounded; -2.68 / 0.48 is -5.583
        let m = mvpf(pt(0.4791, -2.6784)).finite().unwrap();
        assert!((m - -5.59).abs() < 0.005, "{m}");
        assert!((mvpf(pt(0.48, -2.68)).finite().unwrap() - -5.59).abs() < 0.01);
        assert_eq!(mvpf(pt(-5.10, 5.38)), ExtendedWelfare::PositiveInfinity);
        assert_eq!(mvpf(pt(-1.0, -1.0)), ExtendedWelfare::Undefined);
        assert_eq!(mvpf(pt(0.0, -1.0)), ExtendedWelfare::Undefined);
        assert_eq!(mvpf(pt(0.0, 0.0)), ExtendedWelfare::PositiveInfinity);
        assert_eq!(mvpf(pt(-2.0, 0.0)), ExtendedWelfare::PositiveInfinity);
    }

    #[test]
    fn mcf_and_mbp_domains() {
        assert!((mcf(pt(-1.09, -1.00)).unwrap() - 0.917).abs() < 0.001);
        assert_eq!(mbp(pt(2.0, 1.0)).unwrap(), 0.5);
        assert!(matches!(mcf(pt(1.0, 1.0)), Err(Error::Domain { .. })));
        assert!(matches!(mbp(pt(0.0, 1.0)), Err(Error::Domain { .. })));
        assert!(matches!(mcf(pt(0.0, 1.0)), Err(Error::Domain { .. })));
    }

    #[test]
    fn fixed_mvpf_examples() {
        assert_eq!(fixed_mvpf(pt(0.0, 0.0)), ExtendedNonneg::Finite(1.0));
        assert_eq!(fixed_mvpf(pt(-2.0, -1.0)), ExtendedNonneg::Finite(2.0));
        assert_eq!(fixed_mvpf(pt(3.0, -1.0)), ExtendedNonneg::Finite(0.0));
        assert_eq!(fixed_mvpf(pt(0.0, -1.0)), ExtendedNonneg::Finite(0.0));
        assert_eq!(fixed_mvpf(pt(-1.0, 0.0)), ExtendedNonneg::PositiveInfinity);
        assert_eq!(fixed_mvpf(pt(1.0, 2.0)), ExtendedNonneg::Finite(2.0));
    }

    #[test]
    fn lq_examples() {
        assert_eq!(lq_index(pt(-1.0, 2.0), 1.0).unwrap(), 2.0);
        assert!((lq_index(pt(1.0, 2.0), 2.0).unwrap() - 0.632_455_532).abs() < 1e-4);
        assert_eq!(lq_index(pt(0.0, 0.0), 1.0).unwrap(), 0.0);
        assert_eq!(lq_index(pt(3.0, -7.0), 1.0).unwrap(), -2.0);
        assert_eq!(
            lq_index(pt(3.0, -7.0), f64::INFINITY).unwrap(),
            rpv(pt(3.0, -7.0))
        );
        assert!(lq_index(pt(1.0, 2.0), 0.5).is_err());
        assert!(lq_index(pt(1.0, 2.0), f64::NAN).is_err());
        // large exponents must not overflow
        assert!(lq_index(pt(1e3, 2e3), 400.0).unwrap().is_finite());
    }

    #[test]
    fn zeta_examples() {
        assert!((zeta(pt(1.0, 0.0)) - -1.0).abs() < 1e-12);
        assert_eq!(zeta(pt(1.0, 1.0)), 0.0);
        // (4/pi) atan(-1/3)
        assert!((zeta(pt(2.0, 1.0)) - -0.409_665_804).abs() < 1e-3);
        assert_eq!(zeta(pt(-1.0, 1.0)), 0.0);
        assert_eq!(zeta(pt(0.0, 0.0)), 0.0);
        assert!((zeta(pt(-1.0, 0.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rpv_to_fixed_mvpf_examples() {
        assert_eq!(rpv_to_fixed_mvpf(0.5).unwrap(), ExtendedNonneg::Finite(2.0));
        assert_eq!(
            rpv_to_fixed_mvpf(-1.0).unwrap(),
            ExtendedNonneg::Finite(0.0)
        );
        assert_eq!(rpv_to_fixed_mvpf(0.0).unwrap(), ExtendedNonneg::Finite(1.0));
        assert_eq!(
            rpv_to_fixed_mvpf(1.0).unwrap(),
            ExtendedNonneg::PositiveInfinity
        );
        assert!(rpv_to_fixed_mvpf(2.5).is_err());
        assert!(rpv_to_fixed_mvpf(f64::NAN).is_err());
    }

    #[test]
    fn rpv_to_lq_examples() {
        for q in [1.0, 2.0, 7.5] {
            assert_eq!(rpv_to_lq(0.0, q).unwrap(), 0.0);
        }
        let phi = rpv(pt(2.0, 10.0));
        assert!((phi - 0.8).abs() < 1e-15);
        let direct = lq_index(pt(2.0, 10.0), 2.0).unwrap();
        assert!((rpv_to_lq(phi, 2.0).unwrap() - direct).abs() < 1e-12);
        assert!(
            (rpv_to_lq(phi, 2.0).unwrap() - lq_index(pt(0.2, 1.0), 2.0).unwrap()).abs() < 1e-12
        );
        assert_eq!(rpv_to_lq(-2.0, 1.0).unwrap(), -2.0);
        assert!(rpv_to_lq(0.3, 0.9).is_err());
        assert!(rpv_to_lq(-2.1, 1.0).is_err());
    }

    #[test]
    fn max_norm_examples() {
        assert_eq!(max_norm(pt(0.0, 0.0)), 0.0);
        assert_eq!(max_norm(pt(-3.15, 18.41)), 18.41);
        assert_eq!(max_norm(pt(2.0, -1.0)), 2.0);
    }

    #[test]
    fn classify_examples() {
        let ny = classify(pt(1.31, 1.17));
        assert_eq!(ny.subquadrant, SubQuadrant::IA);
        assert_eq!(ny.band, RpvBand::BelowBreakEven);

        let jtpa = classify(pt(0.91, -0.21));
        assert_eq!(jtpa.subquadrant, SubQuadrant::IVB);
        assert!((rpv(pt(0.91, -0.21)) - -1.12 / 0.91).abs() < 1e-12);
        assert_eq!(jtpa.band, RpvBand::ParetoInferior);

        let even = classify(pt(1.0, 1.0));
        assert_eq!(even.subquadrant, SubQuadrant::BreakEven);
        assert_eq!(even.band, RpvBand::AtOrAboveBreakEven);
    }

    #[test]
    fn classify_sub_quadrants_from_introduction() {
        let cases = [
            ((-1.13, 1.00), SubQuadrant::IIB),
            ((-0.51, 1.00), SubQuadrant::IIA),
            ((0.86, 1.00), SubQuadrant::IB),
            ((1.16, -1.91), SubQuadrant::IVA),
            ((-1.09, -1.00), SubQuadrant::IIIA),
            ((-0.37, -1.00), SubQuadrant::IIIB),
        ];
        for ((c, p), want) in cases {
            assert_eq!(classify(pt(c, p)).subquadrant, want, "({c}, {p})");
        }
        assert_eq!(classify(pt(0.0, 0.0)).subquadrant, SubQuadrant::Origin);
        assert_eq!(classify(pt(0.0, 0.0)).band, RpvBand::AtOrAboveBreakEven);
        assert_eq!(
            classify(pt(2.0, -2.0)).subquadrant,
            SubQuadrant::Antidiagonal
        );
        assert_eq!(
            classify(pt(0.0, -3.0)).subquadrant,
            SubQuadrant::NegativeWtpAxis
        );
        assert_eq!(
            classify(pt(-3.0, 0.0)).subquadrant,
            SubQuadrant::NegativeCostAxis
        );
    }

    #[test]
    fn band_boundaries_follow_the_legend() {
        assert_eq!(RpvBand::of(-2.0), RpvBand::ParetoInferior);
        assert_eq!(RpvBand::of(-1.0), RpvBand::ParetoInferior);
        assert_eq!(RpvBand::of(-0.999), RpvBand::BelowBreakEven);
        assert_eq!(RpvBand::of(0.0), RpvBand::AtOrAboveBreakEven);
        assert_eq!(RpvBand::of(0.999), RpvBand::AtOrAboveBreakEven);
        assert_eq!(RpvBand::of(1.0), RpvBand::ParetoSuperior);
        assert_eq!(RpvBand::of(2.0), RpvBand::ParetoSuperior);
    }

    #[test]
    fn weighted_rpv_examples() {
        assert_eq!(
            weighted_rpv(pt(2.0, 1.0), RpvWeighting::MaxNormAbsolute),
            -1.0
        );
        assert_eq!(weighted_rpv(pt(1.0, 2.0), RpvWeighting::Unit), 0.5);
        assert_eq!(weighted_rpv(pt(1.0, 1.0), RpvWeighting::TanhHybrid), 0.0);
        assert_eq!(weighted_rpv(pt(0.0, 0.0), RpvWeighting::L2Adjust), 0.0);
    }

    #[test]
    fn weighted_rpv_matches_product_with_weight() {
        let points = [
            (1.0, 2.0),
            (-3.0, 0.5),
            (0.2, -4.0),
            (-1.0, -1.5),
            (5.0, 5.0),
        ];
        for (c, p) in points {
            let x = pt(c, p);
            for scheme in RpvWeighting::ALL {
                let closed = weighted_rpv(x, scheme);
                let product = rpv(x) * scheme.weight(x);
                assert!(
                    (closed - product).abs() <= 1e-12 * (1.0 + closed.abs()),
                    "{scheme:?} at {x}"
                );
            }
            assert!(
                (weighted_rpv(x, RpvWeighting::L2Adjust) - lq_index(x, 2.0).unwrap()).abs() < 1e-12
            );
            assert!(
                (weighted_rpv(x, RpvWeighting::L1Adjust) - lq_index(x, 1.0).unwrap()).abs() < 1e-12
            );
        }
    }

    #[test]
    fn non_convexity_witness() {
        let mid = pt(1.5, 6.0);
        assert_eq!(mvpf(mid), ExtendedWelfare::Finite(4.0));
        let avg_mvpf =
            (mvpf(pt(1.0, 2.0)).finite().unwrap() + mvpf(pt(2.0, 10.0)).finite().unwrap()) / 2.0;
        assert_eq!(avg_mvpf, 3.5);
        let avg_rpv = (rpv(pt(1.0, 2.0)) + rpv(pt(2.0, 10.0))) / 2.0;
        assert!((avg_rpv - 0.65).abs() < 1e-12);
        assert!(rpv(mid) > avg_rpv);
    }
}
