use std::io::BufRead;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Left-continuous step: `q(u) = q_k` for `u` in `(u_{k-1}, u_k]`.
    Step,
    /// Piecewise linear between table rows, constant on `(0, u_0]`.
    Linear,
}

/// Tabulated quantile: strictly increasing `u` in `(0, 1]` ending at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    u: Vec<f64>,
    q: Vec<f64>,
    interpolation: Interpolation,
}

impl QuantileTable {
    pub fn new(u: Vec<f64>, q: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if u.is_empty() || u.len() != q.len() {
            return Err(Error::Parse("table needs matching, non-empty u and q columns".into()));
        }
        if u.iter().chain(&q).any(|v| !v.is_finite()) {
            return Err(Error::Parse("table entries must be finite".into()));
        }
        if u[0] <= 0.0 || u.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parse("u column must be strictly increasing in (0, 1]".into()));
        }
        if *u.last().unwrap() != 1.0 {
            return Err(Error::Parse("u column must end at 1".into()));
        }
        Ok(Self { u, q, interpolation })
    }

    /// Parses a `u,q` CSV (header required, `#` comments and blank lines skipped).
    pub fn from_csv<R: BufRead>(reader: R, interpolation: Interpolation) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map_or(true, |l| {
                let t = l.trim();
                !t.is_empty() && !t.starts_with('#')
            }));
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => return Err(Error::Parse("empty quantile table".into())),
        };
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["u", "q"] {
            return Err(Error::Parse(format!("expected header `u,q`, got `{}`", header.trim())));
        }
        let (mut u, mut q) = (Vec::new(), Vec::new());
        for (lineno, line) in lines {
            let line = line?;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected 2 fields", lineno + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: `{s}`: {e}", lineno + 1)))
            };
            u.push(parse(fields[0])?);
            q.push(parse(fields[1])?);
        }
        Self::new(u, q, interpolation)
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub(crate) fn eval(&self, u: f64) -> f64 {
        let k = self.u.partition_point(|&x| x < u);
        if k >= self.u.len() {
            return *self.q.last().unwrap();
        }
        match self.interpolation {
            Interpolation::Step => self.q[k],
            Interpolation::Linear => {
                if k == 0 {
                    self.q[0]
                } else {
                    let t = (u - self.u[k - 1]) / (self.u[k] - self.u[k - 1]);
                    self.q[k - 1] + t * (self.q[k] - self.q[k - 1])
                }
            }
        }
    }

    /// `int_0^x q(u) du`.
    pub(crate) fn primitive(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let mut acc = self.q[0] * x.min(self.u[0]);
        for k in 1..self.u.len() {
            let (a, b) = (self.u[k - 1], self.u[k]);
            if x <= a {
                break;
            }
            let hi = x.min(b);
            acc += match self.interpolation {
                Interpolation::Step => self.q[k] * (hi - a),
                Interpolation::Linear => {
                    let slope = (self.q[k] - self.q[k - 1]) / (b - a);
                    let q_hi = self.q[k - 1] + slope * (hi - a);
                    0.5 * (self.q[k - 1] + q_hi) * (hi - a)
                }
            };
        }
        acc
    }

    pub(crate) fn cdf(&self, x: f64) -> f64 {
        let k = self.q.partition_point(|&v| v <= x);
        if k == 0 {
            return 0.0;
        }
        if k == self.q.len() {
            return 1.0;
        }
        match self.interpolation {
            Interpolation::Step => self.u[k - 1],
            Interpolation::Linear => {
                let (q0, q1) = (self.q[k - 1], self.q[k]);
                let (u0, u1) = (self.u[k - 1], self.u[k]);
                u0 + (x - q0) / (q1 - q0) * (u1 - u0)
            }
        }
    }
}
