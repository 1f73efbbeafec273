use thiserror::Error;

use crate::fields::Picture;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("picture mismatch: expected {expected:?}, got {got:?}")]
    PictureMismatch { expected: Picture, got: Picture },

    #[error("jet order {0} out of range (0..=3)")]
    OrderOutOfRange(usize),

    #[error("flow step size underflow at u = {u}, t = {t}")]
    StepUnderflow { u: f64, t: f64 },

    #[error("flow exceeded {steps} steps at u = {u}, t = {t}")]
    TooManySteps { u: f64, t: f64, steps: usize },

    #[error("field vanishes on the trajectory from u = {u}; use the ODE flow")]
    VanishingField { u: f64 },

    #[error("root bracket [{lo}, {hi}] does not contain a sign change")]
    NoBracket { lo: f64, hi: f64 },

    #[error("map is not strictly increasing near u = {u}")]
    NonMonotonic { u: f64 },

    #[error("non-finite value in {op} at u = {u}")]
    NonFinite { op: &'static str, u: f64 },

    #[error("map is not localized: its non-affine region is unbounded")]
    NotLocalized,

    #[error("endpoint {point} is not fixed (image {image})")]
    EndpointNotFixed { point: f64, image: f64 },

    #[error("logarithm branch jump of {jump} between adjacent nodes near theta = {theta}")]
    BranchTracking { theta: f64, jump: f64 },

    #[error("quadrature did not converge: error estimate {err:e}")]
    QuadratureFailed { err: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
