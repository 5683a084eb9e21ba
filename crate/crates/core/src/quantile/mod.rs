//! Target distributions given by their quantile functions, and the folded
//! boundary function `phi(theta) = q(|theta| / pi)` on the circle.

mod boundary;
mod table;

pub use boundary::{koebe_exit_cdf, BoundaryFunction, TailMass};
pub use table::{Interpolation, QuantileTable};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{push_graded, push_regular};

/// Cutoff applied when a quantile with an unbounded endpoint is evaluated
/// pointwise for sampling or plotting.
pub const DEFAULT_EPS_U: f64 = 1e-12;
/// Zero-mean tolerance for closed-form quantiles.
pub const MEAN_TOL_CLOSED_FORM: f64 = 1e-8;
/// Zero-mean tolerance for tabulated quantiles.
pub const MEAN_TOL_TABLE: f64 = 1e-4;
pub const MIN_VALIDATION_GRID: usize = 64;

/// Smallest distance to a singular endpoint reached by graded quadrature.
pub(crate) const GRADED_FLOOR: f64 = 1e-150;

/// `ln(10) + 1`, the recurring constant of the built-in heavy-tailed law.
fn heavy_tail_l() -> f64 {
    std::f64::consts::LN_10 + 1.0
}

fn heavy_tail_shift() -> f64 {
    5.0 / heavy_tail_l().powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantileKind {
    /// `q(u) = a (2u - 1)`, the uniform law on `[-a, a]`.
    Uniform { half_width: f64 },
    /// `q(u) = 5/(ln 10 + 1)^2 - 10 / (u (1 - ln(u/10))^3)`: zero mean,
    /// finite first moment and nothing beyond.
    HeavyTail,
    Table(QuantileTable),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileSpec {
    kind: QuantileKind,
    support: Support,
    mean_declared: f64,
    validated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationFailure {
    Monotonicity { u: f64, previous: f64, current: f64 },
    NonZeroMean { mean: f64, tolerance: f64 },
    Degenerate,
    NonFinite { u: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub grid_size: usize,
    pub mean: f64,
    pub tolerance: f64,
    pub degenerate: bool,
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl QuantileSpec {
    pub fn uniform(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "uniform half-width must be positive, got {half_width}"
            )));
        }
        Ok(Self::unvalidated(
            QuantileKind::Uniform { half_width },
            Support { lower: -half_width, upper: half_width },
        ))
    }

    pub fn heavy_tail() -> Self {
        let l = heavy_tail_l();
        let upper = heavy_tail_shift() - 10.0 / l.powi(3);
        Self::unvalidated(
            QuantileKind::HeavyTail,
            Support { lower: f64::NEG_INFINITY, upper },
        )
    }

    /// Two atoms `lower < 0 < upper`, weighted so that the mean is zero.
    pub fn two_point(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < 0.0 && upper > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "centered two-point law needs lower < 0 < upper, got {lower}, {upper}"
            )));
        }
        let p_lower = upper / (upper - lower);
        Self::from_table(QuantileTable::new(
            vec![p_lower, 1.0],
            vec![lower, upper],
            Interpolation::Step,
        )?)
    }

    /// Finite-atom law from `(value, probability)` pairs.
    pub fn atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let mut sorted = atoms.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = sorted.iter().map(|a| a.1).sum();
        if sorted.is_empty() || sorted.iter().any(|a| a.1 <= 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(
                "atom probabilities must be positive and sum to 1".into(),
            ));
        }
        let mut u = Vec::with_capacity(sorted.len());
        let mut acc = 0.0;
        for a in &sorted {
            acc += a.1;
            u.push(acc);
        }
        *u.last_mut().unwrap() = 1.0;
        let q = sorted.iter().map(|a| a.0).collect();
        Self::from_table(QuantileTable::new(u, q, Interpolation::Step)?)
    }

    pub fn from_table(table: QuantileTable) -> Result<Self> {
        let lower = table.q().iter().copied().fold(f64::INFINITY, f64::min);
        let upper = table.q().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self::unvalidated(QuantileKind::Table(table), Support { lower, upper }))
    }

    fn unvalidated(kind: QuantileKind, support: Support) -> Self {
        Self { kind, support, mean_declared: 0.0, validated: false }
    }

    pub fn kind(&self) -> &QuantileKind {
        &self.kind
    }

    pub fn builtin_id(&self) -> &'static str {
        match self.kind {
            QuantileKind::Uniform { .. } => "uniform",
            QuantileKind::HeavyTail => "paper-heavy-tail",
            QuantileKind::Table(_) => "table",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match &self.kind {
            QuantileKind::Uniform { half_width } => vec![*half_width],
            QuantileKind::HeavyTail => Vec::new(),
            QuantileKind::Table(t) => t.u().iter().chain(t.q()).copied().collect(),
        }
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn mean_declared(&self) -> f64 {
        self.mean_declared
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    pub fn default_mean_tolerance(&self) -> f64 {
        match self.kind {
            QuantileKind::Table(_) => MEAN_TOL_TABLE,
            _ => MEAN_TOL_CLOSED_FORM,
        }
    }

    /// `q(u)` on the closed interval, with `q(0)` and `q(1)` read as the
    /// one-sided limits (possibly infinite).
    pub(crate) fn eval_raw(&self, u: f64) -> f64 {
        match &self.kind {
            QuantileKind::Uniform { half_width } => half_width * (2.0 * u - 1.0),
            QuantileKind::HeavyTail => {
                if u <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                heavy_tail_shift() - 10.0 / (u * (1.0 - (u / 10.0).ln()).powi(3))
            }
            QuantileKind::Table(t) => t.eval(u),
        }
    }

    /// `q(u)` for `u` in the open unit interval.
    pub fn quantile_eval(&self, u: f64) -> Result<f64> {
        if !self.validated {
            return Err(Error::State("quantile spec has not been validated".into()));
        }
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile argument {u} outside (0, 1)")));
        }
        Ok(self.eval_raw(u))
    }

    /// Pointwise evaluation with `u` clamped to `[eps_u, 1 - eps_u]`; used by
    /// inverse-transform sampling so unbounded endpoints stay finite.
    pub fn quantile_clamped(&self, u: f64, eps_u: f64) -> f64 {
        self.eval_raw(u.clamp(eps_u, 1.0 - eps_u))
    }

    /// Closed-form `int_a^b q(u) du` for `0 <= a <= b <= 1`.
    pub fn partial_integral(&self, a: f64, b: f64) -> f64 {
        let prim = |u: f64| -> f64 {
            match &self.kind {
                QuantileKind::Uniform { half_width } => half_width * (u * u - u),
                QuantileKind::HeavyTail => {
                    if u <= 0.0 {
                        0.0
                    } else {
                        heavy_tail_shift() * u - 5.0 / (1.0 - (u / 10.0).ln()).powi(2)
                    }
                }
                QuantileKind::Table(t) => t.primitive(u),
            }
        };
        prim(b) - prim(a)
    }

    /// CDF of the law, `F(x) = sup { u : q(u) <= x }`.
    pub fn cdf(&self, x: f64) -> f64 {
        match &self.kind {
            QuantileKind::Uniform { half_width } => ((x + half_width) / (2.0 * half_width)).clamp(0.0, 1.0),
            QuantileKind::Table(t) => t.cdf(x),
            QuantileKind::HeavyTail => {
                if x >= self.support.upper {
                    return 1.0;
                }
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.eval_raw(mid) <= x {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }

    fn breakpoints_u(&self) -> Vec<f64> {
        match &self.kind {
            QuantileKind::Table(t) if t.interpolation() == Interpolation::Step => {
                t.u()[..t.u().len() - 1].to_vec()
            }
            _ => Vec::new(),
        }
    }

    /// `int_0^1 q(u) du` by composite quadrature, graded toward unbounded
    /// endpoints, with the closed-form tail below the graded floor.
    pub fn numerical_mean(&self) -> f64 {
        let mut cuts = vec![0.0];
        cuts.extend(self.breakpoints_u());
        cuts.push(1.0);
        let lower_singular = self.support.lower == f64::NEG_INFINITY;
        let upper_singular = self.support.upper == f64::INFINITY;
        let mut rule = Vec::new();
        let mut tail = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let sa = a == 0.0 && lower_singular;
            let sb = b == 1.0 && upper_singular;
            let mid = 0.5 * (a + b);
            match (sa, sb) {
                (false, false) => push_regular(a, b, 0.05, &mut rule),
                (true, false) => {
                    push_graded(a, 1.0, GRADED_FLOOR, mid - a, &mut rule);
                    push_regular(mid, b, 0.05, &mut rule);
                    tail += self.partial_integral(0.0, GRADED_FLOOR);
                }
                (false, true) => {
                    push_regular(a, mid, 0.05, &mut rule);
                    push_graded(b, -1.0, GRADED_FLOOR, b - mid, &mut rule);
                    tail += self.partial_integral(1.0 - GRADED_FLOOR, 1.0);
                }
                (true, true) => {
                    push_graded(a, 1.0, GRADED_FLOOR, mid - a, &mut rule);
                    push_graded(b, -1.0, GRADED_FLOOR, b - mid, &mut rule);
                    tail += self.partial_integral(0.0, GRADED_FLOOR);
                    tail += self.partial_integral(1.0 - GRADED_FLOOR, 1.0);
                }
            }
        }
        rule.iter().map(|&(u, w)| w * self.eval_raw(u)).sum::<f64>() + tail
    }

    /// Checks monotonicity on a uniform grid, the zero mean and non-degeneracy.
    /// Never aborts: every failure is listed in the report.
    pub fn validate(&self, grid_size: usize, tol: Option<f64>) -> ValidationReport {
        let grid_size = grid_size.max(MIN_VALIDATION_GRID);
        let tolerance = tol.unwrap_or_else(|| self.default_mean_tolerance());
        let mut failures = Vec::new();

        if let QuantileKind::Table(t) = &self.kind {
            for (k, w) in t.q().windows(2).enumerate() {
                if w[1] < w[0] {
                    failures.push(ValidationFailure::Monotonicity {
                        u: t.u()[k + 1],
                        previous: w[0],
                        current: w[1],
                    });
                }
            }
        }
        let mut prev = f64::NEG_INFINITY;
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 1..=grid_size {
            let u = k as f64 / (grid_size + 1) as f64;
            let q = self.eval_raw(u);
            if !q.is_finite() {
                failures.push(ValidationFailure::NonFinite { u });
                continue;
            }
            if q < prev && !matches!(self.kind, QuantileKind::Table(_)) {
                failures.push(ValidationFailure::Monotonicity { u, previous: prev, current: q });
            }
            prev = q;
            min = min.min(q);
            max = max.max(q);
        }
        let degenerate = !(max - min > 0.0);
        if degenerate {
            failures.push(ValidationFailure::Degenerate);
        }
        let mean = self.numerical_mean();
        if !((mean - self.mean_declared).abs() <= tolerance) {
            failures.push(ValidationFailure::NonZeroMean { mean, tolerance });
        }
        ValidationReport { grid_size, mean, tolerance, degenerate, failures }
    }

    /// Validates and marks the spec usable, or returns the failure list.
    pub fn into_validated(mut self, grid_size: usize, tol: Option<f64>) -> Result<Self> {
        let report = self.validate(grid_size, tol);
        if !report.passed() {
            return Err(Error::Validation { failures: report.failures });
        }
        self.validated = true;
        Ok(self)
    }

    /// `phi(theta) = q(|theta| / pi)`, with the endpoint singularities flagged.
    pub fn fold_to_boundary(&self) -> Result<BoundaryFunction> {
        if !self.validated {
            return Err(Error::State("quantile spec has not been validated".into()));
        }
        Ok(BoundaryFunction::from_quantile(self.clone()))
    }
}
