use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::TrigSeries;
use crate::error::{Error, Result};
use crate::quadrature::{push_graded, push_regular};
use crate::quantile::{BoundaryFunction, GRADED_FLOOR};
use crate::solvability::{lp_norm, NormValue, DEFAULT_LEVELS};

pub const DEFAULT_TERMS: usize = 2048;
pub const DEFAULT_GRID: usize = 1 << 16;

/// Cells on each side of a singular node integrated on the graded sub-grid.
const SINGULAR_WINDOW_CELLS: i64 = 64;

/// Cosine/sine coefficients of `phi` from an `m`-point periodic grid.
///
/// Smooth stretches use the trapezoidal rule through one FFT. Cells that
/// contain a jump, and a window around each singular endpoint, are
/// integrated separately with Gauss panels (graded toward the singularity,
/// with the closed-form tail below the graded floor when `phi` provides one).
pub fn analyze(phi: &BoundaryFunction, n_terms: usize, m: usize) -> Result<TrigSeries> {
    if n_terms == 0 {
        return Err(Error::InvalidArgument("need at least one harmonic".into()));
    }
    if m < 4 * n_terms || m % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "grid size {m} must be even and at least 4N = {}",
            4 * n_terms
        )));
    }
    let l1 = lp_norm(phi, 1.0, DEFAULT_LEVELS);
    if l1.value == NormValue::Diverging {
        return Err(Error::NonIntegrable { trace: l1.trace });
    }

    let h = 2.0 * PI / m as f64;
    let mi = m as i64;
    let mut special = vec![false; m];
    let mut mark = |from: i64, to: i64| {
        for c in from..to {
            special[c.rem_euclid(mi) as usize] = true;
        }
    };
    let window = SINGULAR_WINDOW_CELLS.min(mi / 8);
    for &s in phi.singular_endpoints() {
        let node = (s / h).round() as i64;
        mark(node - window, node + window);
    }
    for &j in phi.jumps() {
        let x = j / h;
        let node = x.round() as i64;
        if (x - node as f64).abs() < 1e-9 {
            mark(node - 1, node + 1);
        } else {
            let c = x.floor() as i64;
            mark(c, c + 1);
        }
    }

    let weights = regular_weights(&special, h);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (j, slot) in buf.iter_mut().enumerate() {
        if weights[j] != 0.0 {
            *slot = Complex64::new(weights[j] * phi.phi(j as f64 * h), 0.0);
        }
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);

    // special runs of cells, integrated with panel rules
    let (rule, tails) = special_rule(phi, &special, h);
    let mut acc = vec![Complex64::new(0.0, 0.0); n_terms + 1];
    let mut add_point = |theta: f64, weight: f64| {
        if weight == 0.0 {
            return;
        }
        let step = Complex64::from_polar(1.0, theta);
        let mut rot = Complex64::new(weight, 0.0);
        for a in acc.iter_mut() {
            *a += rot;
            rot *= step;
        }
    };
    for &(theta, w) in &rule {
        let v = phi.phi(theta);
        add_point(theta, w * v);
    }
    for &(theta, mass) in &tails {
        add_point(theta, mass);
    }

    // sum_j w f(theta_j) e^{-i n theta_j} from the FFT, e^{+i n theta} from the panels
    let c0 = (buf[0].re + acc[0].re) / (2.0 * PI);
    let mut cos = Vec::with_capacity(n_terms);
    let mut sin = Vec::with_capacity(n_terms);
    for n in 1..=n_terms {
        cos.push((buf[n].re + acc[n].re) / PI);
        sin.push(if phi.even_symmetric() { 0.0 } else { (-buf[n].im + acc[n].im) / PI });
    }
    TrigSeries::new(c0, cos, sin, m)
}

type Rule = Vec<(f64, f64)>;

/// Trapezoid weights over the regular cells, with third-order Gregory end
/// corrections wherever a regular stretch meets a special run.
fn regular_weights(special: &[bool], h: f64) -> Vec<f64> {
    let m = special.len();
    let mut w = vec![0.0; m];
    for j in 0..m {
        let left = !special[(j + m - 1) % m];
        let right = !special[j];
        w[j] = 0.5 * h * (left as u8 + right as u8) as f64;
    }
    let Some(first_special) = special.iter().position(|&s| s) else {
        return w;
    };
    let c = h / 12.0;
    // walk regular runs of cells starting just after a special cell
    let mut k = 0;
    while k < m {
        let cell = (first_special + k) % m;
        if special[cell] {
            k += 1;
            continue;
        }
        let run_start = first_special + k;
        while k < m && !special[(first_special + k) % m] {
            k += 1;
        }
        let cells = first_special + k - run_start;
        if cells < 4 {
            continue;
        }
        let node = |i: usize| (run_start + i) % m;
        let end = cells;
        w[node(0)] -= 1.5 * c;
        w[node(1)] += 2.0 * c;
        w[node(2)] -= 0.5 * c;
        w[node(end)] -= 1.5 * c;
        w[node(end - 1)] += 2.0 * c;
        w[node(end - 2)] -= 0.5 * c;
    }
    w
}

/// Panel rule over maximal runs of special cells, plus point masses standing
/// for the parts of singular neighbourhoods below the graded floor.
fn special_rule(phi: &BoundaryFunction, special: &[bool], h: f64) -> (Rule, Vec<(f64, f64)>) {
    let m = special.len();
    let mut rule = Vec::new();
    let mut tails = Vec::new();
    if special.iter().all(|&s| s) {
        let (r, ends) = phi.circle_rule(GRADED_FLOOR, 0.25 * h.max(1e-3));
        for (s, dir, floor) in ends {
            tails.push((s, phi.tail_mass(s, dir, floor)));
        }
        return (r, tails);
    }
    // start scanning at a regular cell so runs never wrap
    let start = special.iter().position(|&s| !s).unwrap_or(0);
    let mut k = 0;
    while k < m {
        let c = (start + k) % m;
        if !special[c] {
            k += 1;
            continue;
        }
        let run_start = start + k;
        while k < m && special[(start + k) % m] {
            k += 1;
        }
        let run_end = start + k;
        let mut a = run_start as f64 * h;
        let mut b = run_end as f64 * h;
        // keep singular anchors near 0 exactly representable
        if a >= PI {
            a -= 2.0 * PI;
            b -= 2.0 * PI;
        }
        integrate_run(phi, a, b, &mut rule, &mut tails);
    }
    (rule, tails)
}

fn floor_at(anchor: f64) -> f64 {
    GRADED_FLOOR.max(anchor.abs() * 4.0 * f64::EPSILON)
}

/// Breakpoints of `phi` inside `[a, b]` (angles unwrapped to that range).
fn integrate_run(phi: &BoundaryFunction, a: f64, b: f64, rule: &mut Rule, tails: &mut Vec<(f64, f64)>) {
    let mut cuts: Vec<(f64, bool)> = vec![(a, false), (b, false)];
    let lift = |x: f64| -> Vec<f64> {
        (-2..=3)
            .map(|k| x + 2.0 * PI * k as f64)
            .filter(|&y| y >= a - 1e-12 && y <= b + 1e-12)
            .collect()
    };
    for &s in phi.singular_endpoints() {
        for y in lift(s) {
            cuts.push((y, true));
        }
    }
    for &j in phi.jumps() {
        for y in lift(j) {
            cuts.push((y, false));
        }
    }
    cuts.sort_by(|x, y| x.0.total_cmp(&y.0));
    // merge coincident cuts, keeping the singular flag
    let mut merged: Vec<(f64, bool)> = Vec::new();
    for c in cuts {
        match merged.last_mut() {
            Some(last) if (c.0 - last.0).abs() < 1e-12 => last.1 |= c.1,
            _ => merged.push(c),
        }
    }
    let panel = 0.25 * (b - a).min(1.0);
    for w in merged.windows(2) {
        let ((lo, sing_lo), (hi, sing_hi)) = (w[0], w[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        match (sing_lo, sing_hi) {
            (false, false) => push_regular(lo, hi, panel, rule),
            (true, false) => {
                let f = floor_at(lo);
                push_graded(lo, 1.0, f, mid - lo, rule);
                push_regular(mid, hi, panel, rule);
                tails.push((lo, phi.tail_mass(lo, 1.0, f)));
            }
            (false, true) => {
                let f = floor_at(hi);
                push_regular(lo, mid, panel, rule);
                push_graded(hi, -1.0, f, hi - mid, rule);
                tails.push((hi, phi.tail_mass(hi, -1.0, f)));
            }
            (true, true) => {
                let (fl, fh) = (floor_at(lo), floor_at(hi));
                push_graded(lo, 1.0, fl, mid - lo, rule);
                push_graded(hi, -1.0, fh, hi - mid, rule);
                tails.push((lo, phi.tail_mass(lo, 1.0, fl)));
                tails.push((hi, phi.tail_mass(hi, -1.0, fh)));
            }
        }
    }
}
