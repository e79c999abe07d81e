//! Shared radial grid and monotone cubic interpolation.

use std::sync::Arc;

/// Strictly increasing radii spanning [r_start, r_max].
///
/// Log-uniform spacing: geometric through the core region and uniform in
/// log r out to the truncation radius, which resolves both the r^k origin
/// behaviour of ρ and the exponential tails with one grading.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    points: Vec<f64>,
}

impl RadialGrid {
    pub fn log_uniform(r_start: f64, r_max: f64, n: usize) -> Arc<Self> {
        assert!(r_start > 0.0 && r_max > r_start && n >= 2);
        let (a, b) = (r_start.ln(), r_max.ln());
        let mut points: Vec<f64> = (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect();
        // Pin the endpoints exactly; exp/ln round-trips drift in the last ulp.
        points[0] = r_start;
        points[n - 1] = r_max;
        Arc::new(Self { points })
    }

    /// Grid with every interval halved in log space (nested refinement:
    /// the original nodes are a subset).
    pub fn halved(&self) -> Arc<Self> {
        let mut points = Vec::with_capacity(self.points.len() * 2 - 1);
        for w in self.points.windows(2) {
            points.push(w[0]);
            points.push(((w[0].ln() + w[1].ln()) * 0.5).exp());
        }
        points.push(*self.points.last().unwrap());
        Arc::new(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn r_start(&self) -> f64 {
        self.points[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.points.last().unwrap()
    }

    /// Index of the last node with r_i <= r (clamped to len-2).
    pub fn cell_of(&self, r: f64) -> usize {
        match self
            .points
            .binary_search_by(|p| p.partial_cmp(&r).unwrap())
        {
            Ok(i) => i.min(self.points.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.points.len() - 2),
        }
    }
}

/// Cubic Hermite interpolant with slope limiting.
///
/// The trajectory integrator supplies exact derivatives at the nodes; they
/// are used as Hermite slopes but clamped to the Fritsch–Carlson monotone
/// region of the node values, so interpolation cannot manufacture
/// oscillations the lemma arguments forbid.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, derivatives: Vec<f64>) -> Self {
        let n = grid.len();
        assert_eq!(values.len(), n);
        assert_eq!(derivatives.len(), n);
        let x = grid.points();
        let mut slopes = derivatives;
        // Secants between neighbours.
        let sec: Vec<f64> = (0..n - 1)
            .map(|i| (values[i + 1] - values[i]) / (x[i + 1] - x[i]))
            .collect();
        for i in 0..n {
            let (lo, hi) = match i {
                0 => (sec[0], sec[0]),
                _ if i == n - 1 => (sec[n - 2], sec[n - 2]),
                _ => (sec[i - 1], sec[i]),
            };
            if lo * hi <= 0.0 {
                // Local extremum in the data: flat slope keeps monotone pieces.
                if lo != 0.0 || hi != 0.0 {
                    slopes[i] = 0.0;
                }
            } else {
                let bound = 3.0 * lo.abs().min(hi.abs());
                if slopes[i] * lo < 0.0 {
                    slopes[i] = 0.0;
                } else if slopes[i].abs() > bound {
                    slopes[i] = bound * slopes[i].signum();
                }
            }
        }
        Self { grid, values, slopes }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Value and derivative at r (r must lie within the grid span).
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let i = self.grid.cell_of(r);
        let x = self.grid.points();
        let h = x[i + 1] - x[i];
        let t = (r - x[i]) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let value = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1;
        let dh00 = 6.0 * t2 - 6.0 * t;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * t2 - 2.0 * t;
        let deriv = (dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1) / h;
        (value, deriv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_uniform_endpoints_and_order() {
        let g = RadialGrid::log_uniform(1e-3, 20.0, 500);
        assert_eq!(g.len(), 500);
        assert_eq!(g.r_start(), 1e-3);
        assert_eq!(g.r_max(), 20.0);
        assert!(g.points().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn halved_grid_is_nested() {
        let g = RadialGrid::log_uniform(1e-3, 20.0, 64);
        let h = g.halved();
        assert_eq!(h.len(), 127);
        for (i, &r) in g.points().iter().enumerate() {
            assert_eq!(h.points()[2 * i], r);
        }
        assert!(h.points().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn hermite_reproduces_smooth_function() {
        let g = RadialGrid::log_uniform(0.1, 10.0, 400);
        let vals: Vec<f64> = g.points().iter().map(|&r| (-0.7 * r).exp()).collect();
        let ders: Vec<f64> = g.points().iter().map(|&r| -0.7 * (-0.7 * r).exp()).collect();
        let interp = MonotoneCubic::new(g.clone(), vals, ders);
        for &r in &[0.137, 1.0, 2.5, 7.77, 9.99] {
            let (v, d) = interp.eval(r);
            assert!((v - (-0.7f64 * r).exp()).abs() < 1e-9, "value at {r}");
            assert!((d + 0.7 * (-0.7f64 * r).exp()).abs() < 1e-6, "deriv at {r}");
        }
    }

    #[test]
    fn monotone_data_stays_monotone() {
        // tanh is increasing; the interpolant must be too, sampled densely.
        let g = RadialGrid::log_uniform(0.01, 5.0, 40);
        let vals: Vec<f64> = g.points().iter().map(|&r| r.tanh()).collect();
        let ders: Vec<f64> = g.points().iter().map(|&r| 1.0 / r.cosh().powi(2)).collect();
        let interp = MonotoneCubic::new(g, vals, ders);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..2000 {
            let r = 0.01 * (500.0f64).powf(i as f64 / 1999.0);
            let (v, _) = interp.eval(r);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }
}
