//! Scalar math shims.
//!
//! Routed through `libm` so the crate builds without `std`; `f64` method
//! equivalents live in `std`, not `core`.

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

pub fn round(x: f64) -> f64 {
    libm::round(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
