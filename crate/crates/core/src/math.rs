//! Thin wrappers over `libm` so the crate builds without `std` float math.

#[inline(always)]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline(always)]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline(always)]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline(always)]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline(always)]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline(always)]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline(always)]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}
