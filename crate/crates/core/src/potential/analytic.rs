//! Closed-form transmission and reflection coefficients for the sech^2
//! barrier and the smooth tanh step. These are the fastest reference values
//! available and anchor the calibrated shape constants in
//! [`super::benchmarks`].

use crate::error::{Error, Result};

/// log(sinh(x)) for x > 0 without overflow.
fn log_sinh(x: f64) -> f64 {
    x + (0.5 * (1.0 - (-2.0 * x).exp())).ln()
}

/// log(cosh(x)) without overflow.
fn log_cosh(x: f64) -> f64 {
    let x = x.abs();
    x + (0.5 * (1.0 + (-2.0 * x).exp())).ln()
}

/// Transmission coefficient of V(x) = V0 sech^2(a x) at energy `e`.
pub fn eckart_transmission(v0: f64, a: f64, mass: f64, e: f64, hbar: f64) -> Result<f64> {
    if e <= 0.0 {
        return Err(Error::Config(format!(
            "transmission requires a positive energy, got {e}"
        )));
    }
    if v0 <= 0.0 || a <= 0.0 {
        return Err(Error::Config("barrier height and width must be positive".into()));
    }
    let k = (2.0 * mass * e).sqrt() / hbar;
    let s = std::f64::consts::PI * k / a;
    let disc = 8.0 * mass * v0 / (hbar * hbar * a * a) - 1.0;
    // T = sinh^2(s) / (sinh^2(s) + cosh^2(c)), with cosh -> cos for thin
    // barriers where the discriminant goes negative
    let t = if disc >= 0.0 {
        let c = 0.5 * std::f64::consts::PI * disc.sqrt();
        if s < 300.0 && c < 300.0 {
            let sh = s.sinh();
            let ch = c.cosh();
            sh * sh / (sh * sh + ch * ch)
        } else {
            1.0 / (1.0 + (2.0 * (log_cosh(c) - log_sinh(s))).exp())
        }
    } else {
        let c = (0.5 * std::f64::consts::PI * (-disc).sqrt()).cos();
        let sh = if s < 300.0 { s.sinh() } else { f64::INFINITY };
        if sh.is_finite() {
            sh * sh / (sh * sh + c * c)
        } else {
            1.0
        }
    };
    Ok(t)
}

/// (P_refl, P_trans) for the sech^2 barrier with hbar = 1.
pub fn eckart_exact(v0: f64, a: f64, mass: f64, e: f64) -> Result<(f64, f64)> {
    let t = eckart_transmission(v0, a, mass, e, 1.0)?;
    Ok((1.0 - t, t))
}

/// (P_refl, P_trans) for the smooth step
/// V(x) = left + (right - left) (1 + tanh(beta x)) / 2 with hbar = 1.
/// Both asymptotic channels must be open.
pub fn step_exact(left: f64, right: f64, beta: f64, mass: f64, e: f64) -> Result<(f64, f64)> {
    if beta <= 0.0 {
        return Err(Error::Config("step steepness must be positive".into()));
    }
    for (asym, side) in [(left, 1), (right, 1)] {
        if e <= asym {
            return Err(Error::ClosedChannel {
                surface: side,
                energy: e,
                asymptote: asym,
            });
        }
    }
    let k_l = (2.0 * mass * (e - left)).sqrt();
    let k_r = (2.0 * mass * (e - right)).sqrt();
    // tanh(beta x) = tanh(x / 2d) with d = 1 / (2 beta)
    let d = 0.5 / beta;
    let num = std::f64::consts::PI * d * (k_l - k_r);
    let den = std::f64::consts::PI * d * (k_l + k_r);
    let r = if den < 300.0 {
        let q = num.sinh() / den.sinh();
        q * q
    } else {
        (2.0 * (log_sinh(num.abs()) - log_sinh(den))).exp()
    };
    Ok((r, 1.0 - r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::benchmarks::{
        ECKART_A_HEIGHT, ECKART_A_WIDTH, ECKART_B_HEIGHT, ECKART_B_WIDTH, RAMP_BETA, RAMP_RISE,
    };

    #[test]
    fn eckart_a_calibration_point() {
        let (r, t) = eckart_exact(ECKART_A_HEIGHT, ECKART_A_WIDTH, 2000.0, ECKART_A_HEIGHT).unwrap();
        assert!((t - 0.716641936131).abs() < 1e-12, "t = {t}");
        assert!((r - 0.283358063869).abs() < 1e-12);
    }

    #[test]
    fn eckart_b_deep_tunneling() {
        let t4 = eckart_exact(ECKART_B_HEIGHT, ECKART_B_WIDTH, 2000.0, 0.0044)
            .unwrap()
            .1;
        assert!((t4 / 1.559_371_131_39e-5 - 1.0).abs() < 1e-9, "t4 = {t4:e}");
        let t1 = eckart_exact(ECKART_B_HEIGHT, ECKART_B_WIDTH, 2000.0, 0.0011)
            .unwrap()
            .1;
        assert!((t1 / 9.920e-10 - 1.0).abs() < 1e-9, "t1 = {t1:e}");
        // barrier-top value for the same width
        let tb = eckart_exact(ECKART_B_HEIGHT, ECKART_B_WIDTH, 2000.0, ECKART_B_HEIGHT)
            .unwrap()
            .1;
        assert!((tb - 0.540395).abs() < 5e-7, "tb = {tb}");
    }

    #[test]
    fn unitarity_and_monotonicity() {
        let mut last = 0.0;
        for k in 1..200 {
            let e = 1e-4 * k as f64;
            let (r, t) = eckart_exact(ECKART_A_HEIGHT, ECKART_A_WIDTH, 2000.0, e).unwrap();
            assert!((r + t - 1.0).abs() < 1e-14);
            assert!(t > last, "not increasing at E = {e}");
            last = t;
        }
        assert!(
            eckart_transmission(ECKART_A_HEIGHT, ECKART_A_WIDTH, 2000.0, 0.2, 1.0).unwrap()
                > 0.999_999
        );
    }

    #[test]
    fn overflow_safe() {
        // enormous sinh/cosh arguments must still give a sane ratio
        let t = eckart_transmission(0.011, 0.01, 2000.0, 0.011, 1.0).unwrap();
        assert!(t.is_finite() && (0.0..=1.0).contains(&t));
        let t = eckart_transmission(0.011, 0.01, 2000.0, 0.1, 1.0).unwrap();
        assert!(t.is_finite() && t <= 1.0);
    }

    #[test]
    fn ramp_calibration_point() {
        let (r, t) = step_exact(0.0, RAMP_RISE, RAMP_BETA, 2000.0, 0.0023).unwrap();
        assert!((r - 0.023901).abs() < 1e-9, "r = {r}");
        assert!((t - 0.976099).abs() < 1e-9);
    }

    #[test]
    fn step_limits() {
        // high energy: reflection dies off
        let (r, _) = step_exact(0.0, RAMP_RISE, RAMP_BETA, 2000.0, 0.5).unwrap();
        assert!(r < 1e-30);
        // closed channel on the high side
        assert!(step_exact(0.0, RAMP_RISE, RAMP_BETA, 2000.0, 0.001).is_err());
        // symmetric step reflects nothing
        let (r, t) = step_exact(0.001, 0.001, 1.0, 2000.0, 0.002).unwrap();
        assert_eq!(r, 0.0);
        assert_eq!(t, 1.0);
    }

    #[test]
    fn rejects_nonpositive_energy() {
        assert!(eckart_exact(0.01, 1.0, 2000.0, 0.0).is_err());
        assert!(eckart_exact(0.01, 1.0, 2000.0, -1.0).is_err());
    }
}
