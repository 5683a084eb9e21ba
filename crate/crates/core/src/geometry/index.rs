//! Uniform-grid spatial index over polyline segments.

use num_complex::Complex64;

use super::polygon::{closest_on_segment, winding_number};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CellState {
    Inside,
    Outside,
    Mixed,
}

#[derive(Debug, Clone)]
pub(crate) struct SegmentGrid {
    origin: Complex64,
    cell: f64,
    nx: usize,
    ny: usize,
    offsets: Vec<u32>,
    items: Vec<u32>,
    state: Vec<CellState>,
    /// Chebyshev distance, in cells, to the nearest cell holding a segment.
    ring: Vec<u32>,
}

const MAX_CELLS: usize = 1 << 22;

impl SegmentGrid {
    /// `pad` widens every segment's footprint so that a cell without segments
    /// is at least `pad` away from the polyline.
    pub fn build(v: &[Complex64], pad: f64) -> Self {
        let n = v.len();
        let (mut lo, mut hi) = (v[0], v[0]);
        for p in v {
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let w = (hi.re - lo.re).max(1e-300);
        let h = (hi.im - lo.im).max(1e-300);
        let target = (4 * n).clamp(64, MAX_CELLS) as f64;
        let mut cell = (w * h / target).sqrt().max(w.max(h) / target.sqrt() / 16.0);
        cell = cell.max(2.0 * pad);
        // One empty ring of cells around the polyline.
        let nx = ((w / cell).ceil() as usize + 3).min(MAX_CELLS);
        let ny = ((h / cell).ceil() as usize + 3).min(MAX_CELLS / nx.max(1)).max(3);
        let origin = lo - Complex64::new(cell, cell);

        let mut grid = Self {
            origin,
            cell,
            nx,
            ny,
            offsets: Vec::new(),
            items: Vec::new(),
            state: vec![CellState::Outside; nx * ny],
            ring: vec![0; nx * ny],
        };

        let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(2 * n);
        for k in 0..n {
            let (a, b) = (v[k], v[(k + 1) % n]);
            let pieces = ((b - a).norm() / cell).ceil().max(1.0) as usize;
            let mut last = usize::MAX;
            for p in 0..pieces {
                let pa = a + (b - a) * (p as f64 / pieces as f64);
                let pb = a + (b - a) * ((p + 1) as f64 / pieces as f64);
                let (x0, y0) = grid.cell_coords(Complex64::new(pa.re.min(pb.re) - pad, pa.im.min(pb.im) - pad));
                let (x1, y1) = grid.cell_coords(Complex64::new(pa.re.max(pb.re) + pad, pa.im.max(pb.im) + pad));
                for iy in y0..=y1 {
                    for ix in x0..=x1 {
                        let c = iy * nx + ix;
                        if c != last {
                            pairs.push((c as u32, k as u32));
                        }
                        last = c;
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = vec![0u32; nx * ny + 1];
        for &(c, _) in &pairs {
            offsets[c as usize + 1] += 1;
        }
        for c in 0..nx * ny {
            offsets[c + 1] += offsets[c];
        }
        grid.items = pairs.into_iter().map(|p| p.1).collect();
        grid.offsets = offsets;

        grid.classify_empty(v);
        grid.compute_rings();
        grid
    }

    fn classify_empty(&mut self, v: &[Complex64]) {
        let total = self.nx * self.ny;
        let mut seen = vec![false; total];
        for c in 0..total {
            if !self.segments(c).is_empty() {
                self.state[c] = CellState::Mixed;
                seen[c] = true;
            }
        }
        let mut stack = Vec::new();
        for start in 0..total {
            if seen[start] {
                continue;
            }
            let inside = winding_number(v, self.center(start)) % 2 != 0;
            let st = if inside { CellState::Inside } else { CellState::Outside };
            seen[start] = true;
            stack.push(start);
            while let Some(c) = stack.pop() {
                self.state[c] = st;
                let (ix, iy) = (c % self.nx, c / self.nx);
                let mut visit = |d: usize| {
                    if !seen[d] {
                        seen[d] = true;
                        stack.push(d);
                    }
                };
                if ix > 0 {
                    visit(c - 1);
                }
                if ix + 1 < self.nx {
                    visit(c + 1);
                }
                if iy > 0 {
                    visit(c - self.nx);
                }
                if iy + 1 < self.ny {
                    visit(c + self.nx);
                }
            }
        }
    }

    fn compute_rings(&mut self) {
        let (nx, ny) = (self.nx, self.ny);
        let inf = u32::MAX / 2;
        let ring = &mut self.ring;
        for c in 0..nx * ny {
            ring[c] = if self.state[c] == CellState::Mixed { 0 } else { inf };
        }
        // Two-pass chamfer transform; exact for the Chebyshev metric.
        for iy in 0..ny {
            for ix in 0..nx {
                let c = iy * nx + ix;
                let mut best = ring[c];
                if ix > 0 {
                    best = best.min(ring[c - 1] + 1);
                }
                if iy > 0 {
                    best = best.min(ring[c - nx] + 1);
                    if ix > 0 {
                        best = best.min(ring[c - nx - 1] + 1);
                    }
                    if ix + 1 < nx {
                        best = best.min(ring[c - nx + 1] + 1);
                    }
                }
                ring[c] = best;
            }
        }
        for iy in (0..ny).rev() {
            for ix in (0..nx).rev() {
                let c = iy * nx + ix;
                let mut best = ring[c];
                if ix + 1 < nx {
                    best = best.min(ring[c + 1] + 1);
                }
                if iy + 1 < ny {
                    best = best.min(ring[c + nx] + 1);
                    if ix + 1 < nx {
                        best = best.min(ring[c + nx + 1] + 1);
                    }
                    if ix > 0 {
                        best = best.min(ring[c + nx - 1] + 1);
                    }
                }
                ring[c] = best;
            }
        }
    }

    fn cell_coords(&self, p: Complex64) -> (usize, usize) {
        let fx = ((p.re - self.origin.re) / self.cell).floor();
        let fy = ((p.im - self.origin.im) / self.cell).floor();
        (
            fx.clamp(0.0, (self.nx - 1) as f64) as usize,
            fy.clamp(0.0, (self.ny - 1) as f64) as usize,
        )
    }

    fn center(&self, c: usize) -> Complex64 {
        let (ix, iy) = (c % self.nx, c / self.nx);
        self.origin + Complex64::new((ix as f64 + 0.5) * self.cell, (iy as f64 + 0.5) * self.cell)
    }

    pub fn contains(&self, p: Complex64) -> bool {
        let d = p - self.origin;
        d.re >= 0.0
            && d.im >= 0.0
            && d.re < self.nx as f64 * self.cell
            && d.im < self.ny as f64 * self.cell
    }

    pub fn locate(&self, p: Complex64) -> usize {
        let (ix, iy) = self.cell_coords(p);
        iy * self.nx + ix
    }

    pub fn segments(&self, c: usize) -> &[u32] {
        &self.items[self.offsets[c] as usize..self.offsets[c + 1] as usize]
    }

    pub fn state(&self, c: usize) -> CellState {
        self.state[c]
    }

    /// Parity of `p` by a rightward ray stopped at the first empty cell of the
    /// row; `p` must lie in the grid.
    pub fn parity_inside(&self, v: &[Complex64], p: Complex64) -> bool {
        let n = v.len();
        let c = self.locate(p);
        let (ix0, iy) = (c % self.nx, c / self.nx);
        let mut crossings = 0u32;
        for ix in ix0..self.nx {
            let cc = iy * self.nx + ix;
            let x_lo = self.origin.re + ix as f64 * self.cell;
            let x_hi = x_lo + self.cell;
            match self.state[cc] {
                CellState::Mixed => {}
                st => return (st == CellState::Inside) != (crossings % 2 == 1),
            }
            for &k in self.segments(cc) {
                let k = k as usize;
                let (a, b) = (v[k], v[(k + 1) % n]);
                if (a.im > p.im) == (b.im > p.im) {
                    continue;
                }
                let x = a.re + (p.im - a.im) * (b.re - a.re) / (b.im - a.im);
                let in_cell = x >= x_lo && (x < x_hi || ix + 1 == self.nx);
                if x > p.re && in_cell {
                    crossings += 1;
                }
            }
        }
        crossings % 2 == 1
    }

    /// Nearest point on the polyline to `p`, its distance and segment index.
    pub fn nearest(&self, v: &[Complex64], p: Complex64) -> (Complex64, f64, usize) {
        let n = v.len();
        let (cx, cy) = self.cell_coords(p);
        let c = cy * self.nx + cx;
        let offset = (p - self.center(c)).norm();
        let mut best = (p, f64::INFINITY, usize::MAX);
        let visit = |cell: usize, best: &mut (Complex64, f64, usize)| {
            for &k in self.segments(cell) {
                let k = k as usize;
                let q = closest_on_segment(p, v[k], v[(k + 1) % n]);
                let d = (q - p).norm();
                if d < best.1 || (d == best.1 && k < best.2) {
                    *best = (q, d, k);
                }
            }
        };
        for r in self.ring[c] as usize..=self.nx.max(self.ny) {
            let (x0, x1) = (cx.saturating_sub(r), (cx + r).min(self.nx - 1));
            let (y0, y1) = (cy.saturating_sub(r), (cy + r).min(self.ny - 1));
            for iy in y0..=y1 {
                if iy.abs_diff(cy) == r {
                    for ix in x0..=x1 {
                        visit(iy * self.nx + ix, &mut best);
                    }
                } else {
                    if cx >= r {
                        visit(iy * self.nx + cx - r, &mut best);
                    }
                    if cx + r < self.nx {
                        visit(iy * self.nx + cx + r, &mut best);
                    }
                }
            }
            // Cells beyond ring r are at least this far from p.
            if best.1 <= (r as f64 + 0.5) * self.cell - offset {
                break;
            }
        }
        best
    }

    /// Segments whose footprint meets the box spanned by `a` and `b`.
    pub fn segments_near(&self, a: Complex64, b: Complex64, out: &mut Vec<usize>) {
        out.clear();
        let (x0, y0) = self.cell_coords(Complex64::new(a.re.min(b.re), a.im.min(b.im)));
        let (x1, y1) = self.cell_coords(Complex64::new(a.re.max(b.re), a.im.max(b.im)));
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                out.extend(self.segments(iy * self.nx + ix).iter().map(|&k| k as usize));
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}
