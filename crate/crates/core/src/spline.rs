//! Natural cubic spline in second-derivative form, used to move field values
//! between trajectory grids and to integrate densities over a snapshot.

use crate::error::{Error, Result};

/// Interpolating natural cubic spline over strictly increasing knots.
#[derive(Debug, Clone)]
pub struct NaturalCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    y2: Vec<f64>,
}

impl NaturalCubic {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::Mismatch(format!(
                "spline knot/value length mismatch: {} vs {}",
                n,
                y.len()
            )));
        }
        if n < 2 {
            return Err(Error::TooFewPoints(n));
        }
        for w in x.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Mismatch(format!(
                    "spline knots not strictly increasing near x = {}",
                    w[0]
                )));
            }
        }
        let mut y2 = vec![0.0; n];
        if n > 2 {
            // Tridiagonal solve with natural boundary conditions, forward
            // sweep storing the decomposition in `u`.
            let mut u = vec![0.0; n - 1];
            for i in 1..n - 1 {
                let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
                let p = sig * y2[i - 1] + 2.0;
                y2[i] = (sig - 1.0) / p;
                let slope_r = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
                let slope_l = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
                u[i] = (6.0 * (slope_r - slope_l) / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
            }
            y2[n - 1] = 0.0;
            for i in (1..n - 1).rev() {
                y2[i] = y2[i] * y2[i + 1] + u[i];
            }
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            y2,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }

    fn segment(&self, t: f64) -> usize {
        // Rightmost segment whose left knot is <= t, clamped to valid range so
        // out-of-range targets evaluate on the end cubic.
        match self.x.partition_point(|&k| k <= t) {
            0 => 0,
            p => (p - 1).min(self.x.len() - 2),
        }
    }

    fn eval_on(&self, j: usize, t: f64) -> f64 {
        let h = self.x[j + 1] - self.x[j];
        let a = (self.x[j + 1] - t) / h;
        let b = (t - self.x[j]) / h;
        a * self.y[j]
            + b * self.y[j + 1]
            + ((a * a * a - a) * self.y2[j] + (b * b * b - b) * self.y2[j + 1]) * h * h / 6.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_on(self.segment(t), t)
    }

    /// First derivative of the piecewise cubic at t.
    pub fn deriv(&self, t: f64) -> f64 {
        let j = self.segment(t);
        let h = self.x[j + 1] - self.x[j];
        let a = (self.x[j + 1] - t) / h;
        let b = (t - self.x[j]) / h;
        (self.y[j + 1] - self.y[j]) / h
            + (-(3.0 * a * a - 1.0) * self.y2[j] + (3.0 * b * b - 1.0) * self.y2[j + 1]) * h / 6.0
    }

    /// Evaluate at an ascending list of targets, advancing the segment index
    /// monotonically instead of binary-searching each point.
    pub fn eval_sorted(&self, targets: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.reserve(targets.len());
        let last = self.x.len() - 2;
        let mut j = 0;
        for &t in targets {
            while j < last && self.x[j + 1] <= t {
                j += 1;
            }
            out.push(self.eval_on(j, t));
        }
    }

    /// Exact integral of the piecewise cubic over its full knot range.
    pub fn integrate(&self) -> f64 {
        let mut total = 0.0;
        for j in 0..self.x.len() - 1 {
            let h = self.x[j + 1] - self.x[j];
            total += h * (self.y[j] + self.y[j + 1]) / 2.0
                - h * h * h * (self.y2[j] + self.y2[j + 1]) / 24.0;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_at_knots_and_for_lines() {
        let x: Vec<f64> = (0..9).map(|i| 0.3 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 2.0 * v - 1.0).collect();
        let s = NaturalCubic::new(&x, &y).unwrap();
        for (&xi, &yi) in x.iter().zip(&y) {
            assert!((s.eval(xi) - yi).abs() < 1e-14);
        }
        assert!((s.eval(1.234) - (2.0 * 1.234 - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn interpolates_smooth_function() {
        let n = 60;
        let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64 * 3.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| v.sin()).collect();
        let s = NaturalCubic::new(&x, &y).unwrap();
        // the natural end condition forces s'' = 0 at the boundary while
        // sin''(3) does not vanish, so hold the tight bound away from the ends
        let mut worst: f64 = 0.0;
        for i in 0..200 {
            let t = 0.3 + i as f64 * (2.4 / 199.0);
            worst = worst.max((s.eval(t) - t.sin()).abs());
        }
        assert!(worst < 5e-7, "worst interior error {worst}");
        let mut worst_full: f64 = 0.0;
        for i in 0..200 {
            let t = 0.05 + i as f64 * (2.9 / 199.0);
            worst_full = worst_full.max((s.eval(t) - t.sin()).abs());
        }
        assert!(worst_full < 2e-5, "worst full-range error {worst_full}");
    }

    #[test]
    fn sorted_eval_matches_pointwise() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64).sqrt()).collect();
        let y: Vec<f64> = x.iter().map(|&v| (0.7 * v).cos()).collect();
        let s = NaturalCubic::new(&x, &y).unwrap();
        let targets: Vec<f64> = (0..77).map(|i| i as f64 * (x[19] / 76.0)).collect();
        let mut out = Vec::new();
        s.eval_sorted(&targets, &mut out);
        for (&t, &v) in targets.iter().zip(&out) {
            assert_eq!(v, s.eval(t));
        }
    }

    #[test]
    fn integral_matches_quadrature_of_spline() {
        let x: Vec<f64> = (0..25).map(|i| -1.0 + i as f64 * (2.0 / 24.0)).collect();
        let y: Vec<f64> = x.iter().map(|&v| (-v * v).exp()).collect();
        let s = NaturalCubic::new(&x, &y).unwrap();
        let direct = s.integrate();
        let via_quad = crate::quad::integrate(|t| s.eval(t), -1.0, 1.0, 1e-13);
        assert!((direct - via_quad).abs() < 1e-10);
        // and both are close to the true erf integral, within the
        // discretization error of 25 knots with natural ends
        let err = (direct - 1.493_648_265_624_854_2).abs();
        assert!(err < 5e-5, "integral error {err:.3e}");
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let x: Vec<f64> = (0..40).map(|i| -1.0 + i as f64 * (2.0 / 39.0)).collect();
        let y: Vec<f64> = x.iter().map(|&v| (2.5 * v).sin()).collect();
        let s = NaturalCubic::new(&x, &y).unwrap();
        let h = 1e-6;
        for i in 0..60 {
            let t = -0.9 + i as f64 * 0.03;
            let fd = (s.eval(t + h) - s.eval(t - h)) / (2.0 * h);
            assert!(
                (s.deriv(t) - fd).abs() < 1e-7,
                "at {t}: {} vs {}",
                s.deriv(t),
                fd
            );
        }
    }

    #[test]
    fn two_points_is_linear() {
        let s = NaturalCubic::new(&[0.0, 2.0], &[1.0, 5.0]).unwrap();
        assert!((s.eval(0.5) - 2.0).abs() < 1e-15);
        assert!((s.integrate() - 6.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(NaturalCubic::new(&[0.0], &[1.0]).is_err());
        assert!(NaturalCubic::new(&[0.0, 0.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(NaturalCubic::new(&[0.0, 1.0], &[1.0]).is_err());
    }
}
