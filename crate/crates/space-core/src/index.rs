/// Uniform-grid bucket index over a flat coordinate array.
///
/// Points are sorted by cell in row-major order (last axis fastest), so a run
/// of cells along the last axis maps to one contiguous slice of point ids.
#[derive(Clone, Debug)]
pub struct GridIndex {
    dim: usize,
    lo: Vec<f64>,
    cell: f64,
    shape: Vec<usize>,
    starts: Vec<u32>,
    order: Vec<u32>,
}

const MAX_CELLS_PER_POINT: usize = 8;

impl GridIndex {
    /// Builds an index with the given cell edge. The edge is enlarged when the
    /// bounding box would otherwise need far more cells than there are points.
    pub fn build(coords: &[f64], dim: usize, cell: f64) -> Self {
        assert!(dim > 0 && coords.len() % dim == 0);
        let n = coords.len() / dim;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in coords.chunks_exact(dim) {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if n == 0 {
            lo.iter_mut().for_each(|v| *v = 0.0);
            hi.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut cell = if cell.is_finite() && cell > 0.0 {
            cell
        } else {
            1.0
        };
        let budget = (MAX_CELLS_PER_POINT * n.max(1) + 64) as f64;
        let shape = loop {
            let shape: Vec<usize> = (0..dim)
                .map(|k| ((hi[k] - lo[k]) / cell).floor() as usize + 1)
                .collect();
            let total: f64 = shape.iter().map(|&s| s as f64).product();
            if total <= budget {
                break shape;
            }
            cell *= 1.5;
        };
        let total: usize = shape.iter().product();
        let mut cell_of = Vec::with_capacity(n);
        let mut counts = vec![0u32; total + 1];
        for p in coords.chunks_exact(dim) {
            let mut lin = 0usize;
            for k in 0..dim {
                let c = (((p[k] - lo[k]) / cell).floor() as usize).min(shape[k] - 1);
                lin = lin * shape[k] + c;
            }
            cell_of.push(lin);
            counts[lin + 1] += 1;
        }
        for i in 0..total {
            counts[i + 1] += counts[i];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut order = vec![0u32; n];
        for (i, &c) in cell_of.iter().enumerate() {
            order[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Self {
            dim,
            lo,
            cell,
            shape,
            starts,
            order,
        }
    }

    /// A cell edge giving a handful of points per cell for roughly uniform clouds.
    pub fn suggested_cell(coords: &[f64], dim: usize, spacing_hint: f64) -> f64 {
        if spacing_hint.is_finite() && spacing_hint > 0.0 {
            return 2.0 * spacing_hint;
        }
        let n = coords.len() / dim;
        let mut ext = vec![0.0f64; dim];
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in coords.chunks_exact(dim) {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        for k in 0..dim {
            ext[k] = (hi[k] - lo[k]).max(0.0);
        }
        let longest = ext.iter().cloned().fold(0.0, f64::max);
        if n <= 1 || longest == 0.0 {
            return 1.0;
        }
        let floor = longest / n as f64;
        let vol: f64 = ext.iter().map(|&e| e.max(floor)).product();
        (4.0 * vol / n as f64).powf(1.0 / dim as f64)
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    /// Calls `f` for every point whose cell meets the axis box of half-width
    /// `half` around `center`. Candidates are a superset of the box contents.
    pub fn for_each_candidate(&self, center: &[f64], half: f64, mut f: impl FnMut(usize)) {
        let dim = self.dim;
        let mut lo_c = vec![0usize; dim];
        let mut hi_c = vec![0usize; dim];
        for k in 0..dim {
            let a = ((center[k] - half - self.lo[k]) / self.cell).floor();
            let b = ((center[k] + half - self.lo[k]) / self.cell).floor();
            let max = (self.shape[k] - 1) as f64;
            if b < 0.0 || a > max || a.is_nan() || b.is_nan() {
                return;
            }
            lo_c[k] = a.max(0.0) as usize;
            hi_c[k] = b.min(max) as usize;
        }
        let last = dim - 1;
        let mut cur = lo_c.clone();
        loop {
            let mut base = 0usize;
            for k in 0..last {
                base = base * self.shape[k] + cur[k];
            }
            base *= self.shape[last];
            let a = self.starts[base + lo_c[last]] as usize;
            let b = self.starts[base + hi_c[last] + 1] as usize;
            for &i in &self.order[a..b] {
                f(i as usize);
            }
            let mut k = last;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if cur[k] < hi_c[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo_c[k];
            }
        }
    }
}
