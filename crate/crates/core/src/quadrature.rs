//! Gauss-Legendre rules and the composite meshes used for boundary integrals.
//!
//! Integrable endpoint singularities are handled by a geometric (graded) mesh:
//! in the variable `t = ln d`, where `d` is the distance to the singular point,
//! panels of unit width carry a fixed Gauss rule, so algebraic-logarithmic
//! blow-ups like `1 / (d ln^3 d)` become smooth integrands.

use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on `[-1, 1]` via Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Appends the rule mapped onto `[a, b]`.
    pub fn push_mapped(&self, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            out.push((mid + half * x, half * w));
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

pub fn gl12() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(12))
}

/// Uniform composite panels of width at most `max_width` on `[a, b]`.
pub fn push_regular(a: f64, b: f64, max_width: f64, out: &mut Vec<(f64, f64)>) {
    if b <= a {
        return;
    }
    let panels = ((b - a) / max_width).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == panels { b } else { lo + width };
        gl16().push_mapped(lo, hi, out);
    }
}

/// Graded panels at `anchor + dir * d` for `d` in `[d_lo, d_hi]`, geometric in `d`.
/// Weights already include the Jacobian `dd = d dt`.
pub fn push_graded(anchor: f64, dir: f64, d_lo: f64, d_hi: f64, out: &mut Vec<(f64, f64)>) {
    if d_hi <= d_lo {
        return;
    }
    let t_lo = d_lo.ln();
    let t_hi = d_hi.ln();
    let panels = (t_hi - t_lo).ceil().max(1.0) as usize;
    let width = (t_hi - t_lo) / panels as f64;
    let mut buf = Vec::with_capacity(gl12().len());
    for k in 0..panels {
        let lo = t_lo + k as f64 * width;
        let hi = if k + 1 == panels { t_hi } else { lo + width };
        buf.clear();
        gl12().push_mapped(lo, hi, &mut buf);
        for &(t, w) in &buf {
            let d = t.exp();
            out.push((anchor + dir * d, w * d));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(16);
        let weight_sum: f64 = rule.weights.iter().sum();
        assert!((weight_sum - 2.0).abs() < 1e-14);
        // degree 31 is exact for 16 nodes
        let v = rule.integrate(0.0, 1.0, |x| x.powi(31));
        assert!((v - 1.0 / 32.0).abs() < 1e-14);
    }

    #[test]
    fn graded_mesh_integrates_log_singularity() {
        // int_0^1 ln(x) dx = -1, graded toward 0.
        let mut rule = Vec::new();
        push_graded(0.0, 1.0, 1e-300, 0.5, &mut rule);
        push_regular(0.5, 1.0, 0.5, &mut rule);
        let v: f64 = rule.iter().map(|&(x, w)| w * x.ln()).sum();
        assert!((v + 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn graded_mesh_handles_bertrand_type_singularity() {
        // int_0^{1/e} dx / (x ln^2 x) = 1 / ln(e) = 1, tail below d_lo is 1/ln(1/d_lo).
        let d_lo = 1e-150f64;
        let mut rule = Vec::new();
        push_graded(0.0, 1.0, d_lo, (-1.0f64).exp(), &mut rule);
        let v: f64 = rule.iter().map(|&(x, w)| w / (x * x.ln().powi(2))).sum();
        let expected = 1.0 - 1.0 / (1.0 / d_lo).ln();
        assert!((v - expected).abs() < 1e-12, "{v} vs {expected}");
    }
}
