use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("turning point on surface {surface}: E - V_eff = {margin:.6e} at x = {x:.6}")]
    TurningPoint { surface: usize, x: f64, margin: f64 },

    #[error("closed channel: E = {energy:.6e} does not exceed the asymptote {asymptote:.6e} of surface {surface}")]
    ClosedChannel {
        surface: usize,
        energy: f64,
        asymptote: f64,
    },

    #[error("too few grid points: {0}")]
    TooFewPoints(usize),

    #[error("propagation diverged at t = {t:.4}: {what}")]
    Diverged { t: f64, what: String },

    #[error("step size underflow at t = {t:.4} (dt = {dt:.3e})")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("mismatch: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
