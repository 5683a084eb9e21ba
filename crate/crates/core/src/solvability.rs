//! Numerical verdicts on the integrability conditions behind the embedding:
//! `L^p` membership of the boundary function, the Zygmund `L log L`
//! condition, and integrability of the conjugate function.
//!
//! Divergence is a classification, never a proof: each functional is
//! evaluated at a sequence of cutoffs approaching the singular endpoints and
//! flagged as diverging when it keeps growing by more than
//! [`GROWTH_THRESHOLD`] at the finest levels. The trace always travels with
//! the verdict.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, TracePoint};
use crate::harmonic::{analyze, hilbert_series, TrigSeries, DEFAULT_GRID, DEFAULT_TERMS};
use crate::quadrature::push_graded;
use crate::quantile::{BoundaryFunction, QuantileSpec};

pub const DEFAULT_LEVELS: usize = 15;
/// Relative growth per level above which a functional counts as diverging.
pub const GROWTH_THRESHOLD: f64 = 0.05;
/// Relative change between `N/2` and `N` harmonics accepted as convergence
/// of the conjugate `L^1` norm.
pub const HILBERT_L1_TOLERANCE: f64 = 0.01;
pub const DEFAULT_P_GRID: [f64; 6] = [0.5, 1.0, 1.1, 1.5, 2.0, 3.0];

/// Cutoff distance of refinement level `k`: `pi 10^{-10 (k + 1)}`.
pub fn level_cutoff(k: usize) -> f64 {
    PI * 10f64.powi(-10 * (k as i32 + 1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormValue {
    Finite(f64),
    Diverging,
}

impl NormValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, NormValue::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            NormValue::Finite(v) => Some(*v),
            NormValue::Diverging => None,
        }
    }
}

impl Serialize for NormValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormValue::Finite(v) => s.serialize_f64(*v),
            NormValue::Diverging => s.serialize_str("diverging"),
        }
    }
}

impl<'de> Deserialize<'de> for NormValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(NormValue::Finite(v)),
            Raw::Text(t) if t == "diverging" => Ok(NormValue::Diverging),
            Raw::Text(t) => Err(de::Error::custom(format!("unexpected norm value `{t}`"))),
        }
    }
}

/// A classified functional with the values it was classified from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub value: NormValue,
    pub trace: Vec<TracePoint>,
}

fn classify_trace(trace: &[TracePoint]) -> NormValue {
    let values: Vec<f64> = trace.iter().map(|t| t.value).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return NormValue::Diverging;
    }
    let growth = |a: f64, b: f64| b > a * (1.0 + GROWTH_THRESHOLD) && b > 0.0;
    let diverging = match values.as_slice() {
        [.., a, b, c] => growth(*a, *b) && growth(*b, *c),
        [a, b] => growth(*a, *b),
        _ => false,
    };
    if diverging {
        NormValue::Diverging
    } else {
        NormValue::Finite(*values.last().unwrap_or(&0.0))
    }
}

/// `(1/2pi) int g(phi(theta)) d theta` with the neighbourhoods of singular
/// points excluded down to each level's cutoff.
fn refine_functional<G: Fn(f64) -> f64 + Sync>(phi: &BoundaryFunction, g: G, levels: usize) -> Vec<TracePoint> {
    refine_log_functional(phi, |v| g(v).ln(), levels)
        .into_iter()
        .map(|t| TracePoint { grid: t.grid, value: t.value.exp() })
        .collect()
}

/// Log of the refined functional, for integrands `exp(lg(phi))` that would
/// overflow (`|phi|^p` next to a pole).
fn refine_log_functional<G: Fn(f64) -> f64>(phi: &BoundaryFunction, lg: G, levels: usize) -> Vec<TracePoint> {
    let levels = levels.max(1);
    let (rule, ends) = phi.circle_rule(level_cutoff(0), 0.05);
    let log_integral = |rule: &[(f64, f64)]| -> f64 {
        let terms: Vec<f64> = rule.iter().filter(|r| r.1 > 0.0).map(|&(t, w)| w.ln() + lg(phi.phi(t))).collect();
        log_sum_exp(&terms) - (2.0 * PI).ln()
    };
    let mut value = log_integral(&rule);
    let mut trace = vec![TracePoint { grid: level_cutoff(0), value }];
    let mut shell = Vec::new();
    for k in 1..levels {
        shell.clear();
        for &(s, dir, _) in &ends {
            let floor = s.abs() * 4.0 * f64::EPSILON;
            let lo = level_cutoff(k).max(floor);
            let hi = level_cutoff(k - 1).max(floor);
            push_graded(s, dir, lo, hi, &mut shell);
        }
        value = log_sum_exp(&[value, log_integral(&shell)]);
        trace.push(TracePoint { grid: level_cutoff(k), value });
    }
    trace
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY || top.is_nan() || top == f64::INFINITY {
        return top;
    }
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// `||phi||_p = ((1/2pi) int |phi|^p)^{1/p}`, classified under refinement.
pub fn lp_norm(phi: &BoundaryFunction, p: f64, refinement_levels: usize) -> Refinement {
    assert!(p > 0.0, "p must be positive");
    let mut trace = refine_log_functional(phi, |v| p * v.abs().ln(), refinement_levels);
    for t in trace.iter_mut() {
        t.value = (t.value / p).exp();
    }
    Refinement { value: classify_trace(&trace), trace }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogVariant {
    /// `max(log x, 0)`
    #[default]
    LogPlus,
    /// `log(1 + x)`
    Log1p,
}

/// `(1/2pi) int |phi| log+ |phi| d theta`.
pub fn zygmund_functional(phi: &BoundaryFunction, refinement_levels: usize, variant: LogVariant) -> Refinement {
    let g = move |v: f64| {
        let a = v.abs();
        match variant {
            LogVariant::LogPlus => {
                if a > 1.0 {
                    a * a.ln()
                } else {
                    0.0
                }
            }
            LogVariant::Log1p => a * a.ln_1p(),
        }
    };
    let trace = refine_functional(phi, g, refinement_levels);
    Refinement { value: classify_trace(&trace), trace }
}

/// `L^1` grid norm of the truncated conjugate series at `N/4`, `N/2`, `N`
/// harmonics; finite when the last two differ by less than 1%.
pub fn hilbert_l1(s: &TrigSeries, phi: &BoundaryFunction) -> Result<Refinement> {
    let l1 = lp_norm(phi, 1.0, DEFAULT_LEVELS);
    if l1.value == NormValue::Diverging {
        return Err(Error::NonIntegrable { trace: l1.trace });
    }
    let conj = hilbert_series(s);
    let n = s.n();
    let m = (8 * n).next_power_of_two().max(64);
    let mut trace = Vec::new();
    for k in [n / 4, n / 2, n] {
        if k == 0 {
            continue;
        }
        let grid = conj.truncated(k).boundary_grid(m);
        let value = grid.iter().map(|z| z.re.abs()).sum::<f64>() / m as f64;
        trace.push(TracePoint { grid: k as f64, value });
    }
    let value = match trace.as_slice() {
        [.., a, b] if (b.value - a.value).abs() <= HILBERT_L1_TOLERANCE * b.value.abs() => NormValue::Finite(b.value),
        [only] => NormValue::Finite(only.value),
        _ => NormValue::Diverging,
    };
    Ok(Refinement { value, trace })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "P_GT_1")]
    PGreaterThanOne,
    #[serde(rename = "ZYGMUND_SUFFICIENT")]
    ZygmundSufficient,
    #[serde(rename = "HILBERT_L1_DIRECT")]
    HilbertL1Direct,
    #[serde(rename = "NOT_ESTABLISHED")]
    NotEstablished,
    #[serde(rename = "NON_INTEGRABLE")]
    NonIntegrable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::PGreaterThanOne => "P_GT_1",
            Verdict::ZygmundSufficient => "ZYGMUND_SUFFICIENT",
            Verdict::HilbertL1Direct => "HILBERT_L1_DIRECT",
            Verdict::NotEstablished => "NOT_ESTABLISHED",
            Verdict::NonIntegrable => "NON_INTEGRABLE",
        }
    }

    /// Whether the verdict establishes an embedding.
    pub fn is_solvable(&self) -> bool {
        matches!(
            self,
            Verdict::PGreaterThanOne | Verdict::ZygmundSufficient | Verdict::HilbertL1Direct
        )
    }
}

/// `L^p` norms keyed by `p`, serialized as a JSON object in `p` order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpNorms(pub Vec<(f64, NormValue)>);

impl LpNorms {
    pub fn get(&self, p: f64) -> Option<NormValue> {
        self.0.iter().find(|(q, _)| *q == p).map(|(_, v)| *v)
    }
}

impl Serialize for LpNorms {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (p, v) in &self.0 {
            map.serialize_entry(&p.to_string(), v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for LpNorms {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = LpNorms;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a map from p to a norm value")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<LpNorms, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, NormValue>()? {
                    let p = k.parse::<f64>().map_err(de::Error::custom)?;
                    out.push((p, v));
                }
                Ok(LpNorms(out))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub test: String,
    pub grid: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityReport {
    pub lp_norms: LpNorms,
    pub zygmund_value: NormValue,
    pub hilbert_l1: NormValue,
    pub verdict: Verdict,
    pub refinement_trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    pub p_grid: Vec<f64>,
    pub levels: usize,
    pub n_terms: usize,
    pub grid_size: usize,
    pub log_variant: LogVariant,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            p_grid: DEFAULT_P_GRID.to_vec(),
            levels: DEFAULT_LEVELS,
            n_terms: DEFAULT_TERMS,
            grid_size: DEFAULT_GRID,
            log_variant: LogVariant::LogPlus,
        }
    }
}

/// Runs the three tests on the folded quantile.
pub fn classify(spec: &QuantileSpec, opts: &ClassifyOptions) -> Result<SolvabilityReport> {
    Ok(classify_boundary(&spec.fold_to_boundary()?, opts))
}

/// Verdict precedence: `P_GT_1 > ZYGMUND_SUFFICIENT > HILBERT_L1_DIRECT >
/// NOT_ESTABLISHED`, with `NON_INTEGRABLE` whenever `||phi||_1` diverges.
pub fn classify_boundary(phi: &BoundaryFunction, opts: &ClassifyOptions) -> SolvabilityReport {
    let mut p_grid = opts.p_grid.clone();
    if !p_grid.contains(&1.0) {
        p_grid.push(1.0);
    }
    p_grid.sort_by(f64::total_cmp);
    p_grid.dedup();

    let (norms, (zygmund, hilbert)) = rayon::join(
        || {
            p_grid
                .par_iter()
                .map(|&p| (p, lp_norm(phi, p, opts.levels)))
                .collect::<Vec<_>>()
        },
        || {
            rayon::join(
                || zygmund_functional(phi, opts.levels, opts.log_variant),
                || {
                    analyze(phi, opts.n_terms, opts.grid_size)
                        .and_then(|s| hilbert_l1(&s, phi))
                },
            )
        },
    );

    let mut refinement_trace = Vec::new();
    let mut push_trace = |test: String, r: &Refinement| {
        refinement_trace.extend(r.trace.iter().map(|t| TraceEntry { test: test.clone(), grid: t.grid, value: t.value }));
    };
    for (p, r) in &norms {
        push_trace(format!("lp_norm:{p}"), r);
    }
    push_trace("zygmund".into(), &zygmund);
    let hilbert_value = match &hilbert {
        Ok(r) => {
            push_trace("hilbert_l1".into(), r);
            r.value
        }
        Err(Error::NonIntegrable { trace }) => {
            push_trace(
                "hilbert_l1".into(),
                &Refinement { value: NormValue::Diverging, trace: trace.clone() },
            );
            NormValue::Diverging
        }
        Err(_) => NormValue::Diverging,
    };

    let lp_norms = LpNorms(norms.iter().map(|(p, r)| (*p, r.value)).collect());
    let l1_finite = lp_norms.get(1.0).is_some_and(|v| v.is_finite());
    let verdict = if !l1_finite {
        Verdict::NonIntegrable
    } else if lp_norms.0.iter().any(|(p, v)| *p > 1.0 && v.is_finite()) {
        Verdict::PGreaterThanOne
    } else if zygmund.value.is_finite() {
        Verdict::ZygmundSufficient
    } else if hilbert_value.is_finite() {
        Verdict::HilbertL1Direct
    } else {
        Verdict::NotEstablished
    };
    SolvabilityReport {
        lp_norms,
        zygmund_value: zygmund.value,
        hilbert_l1: hilbert_value,
        verdict,
        refinement_trace,
    }
}
