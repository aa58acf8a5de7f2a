//! Polar interpolation: moving complex field values between incommensurate
//! grids through their density and unwrapped phase, which stay smooth where
//! the complex values themselves oscillate.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spline::NaturalCubic;

/// Map an angle into (-pi, pi].
pub fn wrap_to_pi(angle: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = angle - two_pi * (angle / two_pi).round();
    if a <= -std::f64::consts::PI {
        a += two_pi;
    }
    a
}

/// A complex field on its grid, with the phase trend (the WKB action times
/// the direction sign) that makes the residual phase slowly varying.
pub struct PolarSource<'a> {
    pub x: &'a [f64],
    pub values: &'a [Complex64],
    pub trend: &'a [f64],
}

/// Density and unwrapped residual-phase splines of a source field, reusable
/// across several target grids.
pub struct PolarSplines {
    rho: NaturalCubic,
    residual: NaturalCubic,
    first: (f64, Complex64),
    last: (f64, Complex64),
}

impl PolarSplines {
    pub fn build(src: &PolarSource) -> Result<Self> {
        let n = src.x.len();
        if n < 4 {
            return Err(Error::TooFewPoints(n));
        }
        if n != src.values.len() || n != src.trend.len() {
            return Err(Error::Mismatch(format!(
                "polar source length mismatch: x {}, values {}, trend {}",
                n,
                src.values.len(),
                src.trend.len()
            )));
        }
        let mut rho = Vec::with_capacity(n);
        let mut residual = Vec::with_capacity(n);
        let mut prev_raw = 0.0;
        let mut prev_unwrapped = 0.0;
        for k in 0..n {
            let v = src.values[k];
            rho.push(v.norm_sqr());
            let raw = v.arg() - src.trend[k];
            let unwrapped = if k == 0 {
                wrap_to_pi(raw)
            } else {
                prev_unwrapped + wrap_to_pi(raw - prev_raw)
            };
            residual.push(unwrapped);
            prev_raw = raw;
            prev_unwrapped = unwrapped;
        }
        Ok(Self {
            rho: NaturalCubic::new(src.x, &rho)?,
            residual: NaturalCubic::new(src.x, &residual)?,
            first: (src.x[0], src.values[0]),
            last: (src.x[n - 1], src.values[n - 1]),
        })
    }

    /// Interpolated value at a single target. `target_trend` is the source's
    /// phase trend evaluated at the target position. Targets outside the
    /// source range take the nearest extremal point's value unchanged, and a
    /// negative interpolated density is reset to zero.
    pub fn eval(&self, target: f64, target_trend: f64) -> Complex64 {
        if target <= self.first.0 {
            return self.first.1;
        }
        if target >= self.last.0 {
            return self.last.1;
        }
        let rho = self.rho.eval(target).max(0.0);
        let phase = self.residual.eval(target) + target_trend;
        Complex64::from_polar(rho.sqrt(), phase)
    }

    /// Raw interpolated density before the non-negativity reset (diagnostic).
    pub fn raw_density(&self, target: f64) -> f64 {
        self.rho.eval(target)
    }
}

/// One-shot interpolation of a source field onto a target grid.
pub fn interpolate_polar(
    src: &PolarSource,
    targets: &[f64],
    target_trend: &[f64],
) -> Result<Vec<Complex64>> {
    let splines = PolarSplines::build(src)?;
    Ok(targets
        .iter()
        .zip(target_trend)
        .map(|(&t, &w)| splines.eval(t, w))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_basics() {
        assert!((wrap_to_pi(0.3) - 0.3).abs() < 1e-15);
        assert!((wrap_to_pi(0.3 + 8.0 * std::f64::consts::PI) - 0.3).abs() < 1e-12);
        assert!((wrap_to_pi(-0.3 - 6.0 * std::f64::consts::PI) + 0.3).abs() < 1e-12);
        assert!(wrap_to_pi(std::f64::consts::PI) > 0.0);
    }

    fn plane_wave(k: f64, xs: &[f64]) -> Vec<Complex64> {
        xs.iter()
            .map(|&x| Complex64::from_polar(1.0, k * x))
            .collect()
    }

    #[test]
    fn plane_wave_midpoints_with_trend() {
        let k = 40.0;
        let xs: Vec<f64> = (0..61).map(|i| -3.0 + 0.1 * i as f64).collect();
        let values = plane_wave(k, &xs);
        let trend: Vec<f64> = xs.iter().map(|&x| k * x).collect();
        let src = PolarSource {
            x: &xs,
            values: &values,
            trend: &trend,
        };
        let targets: Vec<f64> = xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let ttrend: Vec<f64> = targets.iter().map(|&x| k * x).collect();
        let out = interpolate_polar(&src, &targets, &ttrend).unwrap();
        for (&t, v) in targets.iter().zip(&out) {
            let exact = Complex64::from_polar(1.0, k * t);
            assert!(
                (v - exact).norm() < 1e-12,
                "at {t}: {v} vs {exact} (fast wave, trend-assisted)"
            );
        }
    }

    #[test]
    fn plane_wave_midpoints_without_trend() {
        // slow enough that sequential unwrapping alone resolves the branch
        let k = 2.7;
        let xs: Vec<f64> = (0..61).map(|i| -3.0 + 0.1 * i as f64).collect();
        let values = plane_wave(k, &xs);
        let trend = vec![0.0; xs.len()];
        let src = PolarSource {
            x: &xs,
            values: &values,
            trend: &trend,
        };
        let targets: Vec<f64> = xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let ttrend = vec![0.0; targets.len()];
        let out = interpolate_polar(&src, &targets, &ttrend).unwrap();
        for (&t, v) in targets.iter().zip(&out) {
            let exact = Complex64::from_polar(1.0, k * t);
            assert!((v - exact).norm() < 1e-6, "at {t}: {v} vs {exact}");
        }
    }

    #[test]
    fn out_of_range_targets_clamp_to_extremal_values() {
        let xs: Vec<f64> = (0..12).map(|i| i as f64 * 0.5).collect();
        let values: Vec<Complex64> = xs
            .iter()
            .map(|&x| Complex64::from_polar(1.0 + 0.1 * x, 0.8 * x))
            .collect();
        let trend: Vec<f64> = xs.iter().map(|&x| 0.8 * x).collect();
        let src = PolarSource {
            x: &xs,
            values: &values,
            trend: &trend,
        };
        let out = interpolate_polar(&src, &[-1.0, 7.3], &[-0.8, 0.8 * 7.3]).unwrap();
        assert!((out[0] - values[0]).norm() < 1e-15);
        assert!((out[1] - values[11]).norm() < 1e-15);
    }

    #[test]
    fn negative_density_reset() {
        // sharp drop to a zero tail makes the density spline overshoot below
        // zero between knots
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let amps = [2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let values: Vec<Complex64> = amps.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        let trend = vec![0.0; xs.len()];
        let src = PolarSource {
            x: &xs,
            values: &values,
            trend: &trend,
        };
        let splines = PolarSplines::build(&src).unwrap();
        let mut saw_negative_raw = false;
        for i in 0..80 {
            let t = 1.0 + 7.0 * i as f64 / 79.0;
            if splines.raw_density(t) < 0.0 {
                saw_negative_raw = true;
                assert_eq!(splines.eval(t, 0.0).norm(), 0.0);
            }
        }
        assert!(saw_negative_raw, "test potential did not produce an overshoot");
    }

    #[test]
    fn too_few_points() {
        let xs = [0.0, 1.0, 2.0];
        let values = [Complex64::new(1.0, 0.0); 3];
        let trend = [0.0; 3];
        let src = PolarSource {
            x: &xs,
            values: &values,
            trend: &trend,
        };
        assert!(matches!(
            PolarSplines::build(&src),
            Err(Error::TooFewPoints(3))
        ));
    }

    #[test]
    fn smooth_modulated_wave() {
        // amplitude and phase both slowly varying on top of a fast carrier
        let k = 21.0;
        let xs: Vec<f64> = (0..80).map(|i| -4.0 + 0.1 * i as f64).collect();
        let field = |x: f64| {
            let rho: f64 = 1.0 + 0.5 * (-x * x).exp();
            let s = k * x + 0.7 * (0.5 * x).tanh();
            Complex64::from_polar(rho.sqrt(), s)
        };
        let values: Vec<Complex64> = xs.iter().map(|&x| field(x)).collect();
        let trend: Vec<f64> = xs.iter().map(|&x| k * x).collect();
        let src = PolarSource {
            x: &xs,
            values: &values,
            trend: &trend,
        };
        let targets: Vec<f64> = xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let ttrend: Vec<f64> = targets.iter().map(|&x| k * x).collect();
        let out = interpolate_polar(&src, &targets, &ttrend).unwrap();
        for (idx, (&t, v)) in targets.iter().zip(&out).enumerate() {
            // the natural end condition costs accuracy in the outermost
            // intervals, where the residual phase still has curvature
            let tol = if idx < 4 || idx + 4 >= targets.len() {
                2e-5
            } else {
                2e-6
            };
            assert!(
                (v - field(t)).norm() < tol,
                "at {t}: err {}",
                (v - field(t)).norm()
            );
        }
    }
}
