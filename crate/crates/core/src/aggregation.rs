//! Welfare of policy collections: the Joint Policy Value (RPV of a
//! weighted aggregate point) and the Total Policy Value (weighted sum of
//! per-policy RPVs).

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{check_q, max_norm, mss, rpv, PolicyPoint};

/// Non-empty ordered list of uniquely named policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyCollection {
    entries: Vec<(String, PolicyPoint)>,
}

impl PolicyCollection {
    pub fn new(entries: Vec<(String, PolicyPoint)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyCollection);
        }
        let mut seen = HashSet::new();
        for (id, _) in &entries {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicatePolicy(id.clone()));
            }
        }
        Ok(Self { entries })
    }

    /// Builds a collection with ids `p1, p2, ...`.
    pub fn from_points(points: &[PolicyPoint]) -> Result<Self> {
        Self::new(
            points
                .iter()
                .enumerate()
                .map(|(i, x)| (format!("p{}", i + 1), *x))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, PolicyPoint)] {
        &self.entries
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    pub fn points(&self) -> impl Iterator<Item = PolicyPoint> + '_ {
        self.entries.iter().map(|(_, x)| *x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightKind {
    /// Scaling factors `lambda` applied to `(c, p)` before summing (JPV).
    Scaling,
    /// Importance weights `w` applied to per-policy RPVs (TPV).
    Importance,
}

impl WeightKind {
    fn name(&self) -> &'static str {
        match self {
            WeightKind::Scaling => "scaling",
            WeightKind::Importance => "importance",
        }
    }
}

/// Non-negative finite weights aligned with a collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    values: Vec<f64>,
    kind: WeightKind,
    /// Name of the scheme if the weights were computed from the policy
    /// points themselves; `None` for constants.
    source: Option<&'static str>,
}

impl WeightVector {
    pub fn new(values: Vec<f64>, kind: WeightKind) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(
                "weights",
                format!("entries must be finite and >= 0, got {bad}"),
            ));
        }
        Ok(Self {
            values,
            kind,
            source: None,
        })
    }

    pub fn scaling(values: Vec<f64>) -> Result<Self> {
        Self::new(values, WeightKind::Scaling)
    }

    pub fn importance(values: Vec<f64>) -> Result<Self> {
        Self::new(values, WeightKind::Importance)
    }

    /// `1/n` each.
    pub fn equal(n: usize, kind: WeightKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyCollection);
        }
        Self::new(vec![1.0 / n as f64; n], kind)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_data_dependent(&self) -> bool {
        self.source.is_some()
    }

    pub fn source(&self) -> Option<&'static str> {
        self.source
    }

    pub(crate) fn check(&self, n: usize, wanted: WeightKind) -> Result<()> {
        if self.kind != wanted {
            return Err(Error::WeightKind {
                expected: self.kind.name(),
                wanted: wanted.name(),
            });
        }
        if self.values.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JpvResult {
    pub value: f64,
    /// The hypothetical aggregate policy `sum lambda_l (c_l, p_l)`.
    pub aggregate: PolicyPoint,
    pub max_norm: f64,
}

/// Joint Policy Value: RPV of the scaled aggregate point.
pub fn jpv(coll: &PolicyCollection, lambda: &WeightVector) -> Result<JpvResult> {
    lambda.check(coll.len(), WeightKind::Scaling)?;
    let (mut c, mut p) = (0.0, 0.0);
    for (x, l) in coll.points().zip(lambda.values()) {
        c += l * x.c();
        p += l * x.p();
    }
    let aggregate = PolicyPoint::new(c, p)?;
    Ok(JpvResult {
        value: rpv(aggregate),
        aggregate,
        max_norm: max_norm(aggregate),
    })
}

/// Total Policy Value: importance-weighted sum of RPVs.
pub fn tpv(coll: &PolicyCollection, w: &WeightVector) -> Result<f64> {
    w.check(coll.len(), WeightKind::Importance)?;
    Ok(coll.points().zip(w.values()).map(|(x, w)| w * rpv(x)).sum())
}

/// Importance weight schemes giving the TPV an absolute, comparative or
/// hybrid reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightScheme {
    /// `w_l = base_l * max{|c_l|, |p_l|}`; the TPV becomes
    /// `sum base_l (p_l - c_l)`.
    MssScaled { base: Vec<f64> },
    /// Constant weights normalized onto the simplex. `None` means equal.
    Simplex { base: Option<Vec<f64>> },
    /// `w_l = 2^(1/q) base_l ||x_l||_inf / ||x_l||_q` with `base` on the
    /// simplex; the TPV becomes the average `L^q` index.
    LqAdjust { q: f64, base: Option<Vec<f64>> },
    /// `|p_l - c_l| / sum_k |p_k - c_k|`
    SurplusProportional,
    /// `|c_l| / sum_k |c_k|`
    CostProportional,
}

impl WeightScheme {
    pub fn name(&self) -> &'static str {
        match self {
            WeightScheme::MssScaled { .. } => "mss_scaled",
            WeightScheme::Simplex { .. } => "simplex",
            WeightScheme::LqAdjust { .. } => "lq_adjust",
            WeightScheme::SurplusProportional => "surplus_proportional",
            WeightScheme::CostProportional => "cost_proportional",
        }
    }
}

fn simplex(base: Option<&[f64]>, n: usize) -> Result<Vec<f64>> {
    let Some(base) = base else {
        return Ok(vec![1.0 / n as f64; n]);
    };
    if base.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: base.len(),
        });
    }
    if let Some(bad) = base.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::invalid(
            "weights",
            format!("entries must be finite and >= 0, got {bad}"),
        ));
    }
    let total: f64 = base.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateDenominator("simplex weights sum to zero"));
    }
    Ok(base.iter().map(|v| v / total).collect())
}

fn proportional(mags: Vec<f64>, what: &'static str) -> Result<Vec<f64>> {
    let total: f64 = mags.iter().sum();
    if total == 0.0 {
        return Err(Error::DegenerateDenominator(what));
    }
    Ok(mags.into_iter().map(|m| m / total).collect())
}

/// Computes importance weights for `coll` under `scheme`.
pub fn make_weights(coll: &PolicyCollection, scheme: &WeightScheme) -> Result<WeightVector> {
    let n = coll.len();
    let (values, data_dependent) = match scheme {
        WeightScheme::MssScaled { base } => {
            if base.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: base.len(),
                });
            }
            let values = coll
                .points()
                .zip(base)
                .map(|(x, b)| b * max_norm(x))
                .collect();
            (values, true)
        }
        WeightScheme::Simplex { base } => (simplex(base.as_deref(), n)?, false),
        WeightScheme::LqAdjust { q, base } => {
            check_q(*q)?;
            let base = simplex(base.as_deref(), n)?;
            let mut values = Vec::with_capacity(n);
            for (x, b) in coll.points().zip(base) {
                let w = if x.is_origin() {
                    0.0
                } else if q.is_infinite() {
                    b
                } else {
                    let m = max_norm(x);
                    let rel =
                        ((x.c().abs() / m).powf(*q) + (x.p().abs() / m).powf(*q)).powf(1.0 / q);
                    2f64.powf(1.0 / q) * b / rel
                };
                values.push(w);
            }
            (values, true)
        }
        WeightScheme::SurplusProportional => (
            proportional(
                coll.points().map(|x| mss(x).abs()).collect(),
                "sum of |p - c| over the collection is zero",
            )?,
            true,
        ),
        WeightScheme::CostProportional => (
            proportional(
                coll.points().map(|x| x.c().abs()).collect(),
                "sum of |c| over the collection is zero",
            )?,
            true,
        ),
    };
    let mut out = WeightVector::importance(values)?;
    if data_dependent {
        out.source = Some(scheme.name());
    }
    Ok(out)
}

/// TPV of a two-policy collection along `w` in `{0, 1/(grid-1), ..., 1}`
/// with weights `(w, 1 - w)`.
pub fn tpv_linear_path(pair: &PolicyCollection, grid: usize) -> Result<Vec<(f64, f64)>> {
    if pair.len() != 2 {
        return Err(Error::invalid(
            "pair",
            format!("expected exactly 2 policies, got {}", pair.len()),
        ));
    }
    if grid < 2 {
        return Err(Error::invalid(
            "grid",
            format!("need at least 2 points, got {grid}"),
        ));
    }
    let a = rpv(pair.entries[0].1);
    let b = rpv(pair.entries[1].1);
    let last = (grid - 1) as f64;
    Ok((0..grid)
        .map(|i| {
            let w = i as f64 / last;
            (w, w * a + (1.0 - w) * b)
        })
        .collect())
}
