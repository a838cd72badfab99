//! Standard-normal density, distribution, and quantile functions.
//!
//! The quantile is Acklam's rational approximation polished with one Halley
//! step against the erfc-based CDF; tail work beyond the reach of double
//! precision goes through `ln_sf` / `quantile_from_ln_sf`, which operate on
//! log survival probabilities.

use crate::math;

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_68;
pub const LN_2PI: f64 = 1.837_877_066_409_345_5;
const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Switch point beyond which `ln_sf` uses the asymptotic Mills series
/// (erfc underflows near x = 37.5).
const TAIL_SERIES_CUT: f64 = 37.0;

#[inline]
pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * math::exp(-0.5 * x * x)
}

#[inline]
pub fn ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * LN_2PI
}

/// Φ(x), accurate in both tails via erfc.
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * math::erfc(-x * FRAC_1_SQRT_2)
}

/// Survival function Φ̄(x) = 1 − Φ(x).
#[inline]
pub fn sf(x: f64) -> f64 {
    0.5 * math::erfc(x * FRAC_1_SQRT_2)
}

/// ln Φ̄(x), finite for any finite x.
pub fn ln_sf(x: f64) -> f64 {
    if x > TAIL_SERIES_CUT {
        // Mills series: Φ̄(x) = φ(x)/x (1 - 1/x² + 3/x⁴ - 15/x⁶ + 105/x⁸ …)
        let r = 1.0 / (x * x);
        let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
        ln_pdf(x) - math::ln(x) + math::ln(series)
    } else if x < -TAIL_SERIES_CUT {
        // Φ̄(x) = 1 - Φ̄(-x), with Φ̄(-x) astronomically small.
        math::ln_1p(-sf(-x))
    } else {
        math::ln(sf(x))
    }
}

/// Acklam's rational approximation to Φ⁻¹(p) for p <= 1/2; relative error
/// ~1.15e-9 before refinement. The upper half is handled by reflection in
/// [`quantile`].
fn quantile_acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = math::sqrt(-2.0 * math::ln(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Φ⁻¹(p) for p in (0,1). Panics in debug builds outside the open interval;
/// callers validate their own inputs.
pub fn quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0, "quantile requires p in (0,1)");
    if p > 0.5 {
        // 1 - p is exact for p >= 1/2, and the left tail is the
        // well-conditioned side of the erfc-based CDF.
        return -quantile(1.0 - p);
    }
    let x = quantile_acklam(p);
    // One Halley step against the erfc-based CDF.
    let e = cdf(x) - p;
    let u = e / INV_SQRT_2PI * math::exp(0.5 * x * x);
    x - u / (1.0 + 0.5 * x * u)
}

/// Inverse survival in the log domain: returns x with ln Φ̄(x) = `ln_s`.
///
/// Handles targets far below the underflow limit of plain probabilities,
/// which is what keeps truncated-normal draws honest past ±37σ.
pub fn quantile_from_ln_sf(ln_s: f64) -> f64 {
    const LN_HALF: f64 = -core::f64::consts::LN_2;
    debug_assert!(ln_s < 0.0, "log survival must be negative");
    if ln_s >= LN_HALF {
        // Survival >= 1/2 means x <= 0: well-conditioned in plain probability.
        let p = -libm::expm1(ln_s); // 1 - s, exact for s near 1
        return if p <= 0.0 { f64::NEG_INFINITY } else { quantile(p) };
    }
    let mut x = if ln_s > -700.0 {
        -quantile_acklam(math::exp(ln_s))
    } else {
        // Solve -x²/2 - ln x - ln(2π)/2 = ln_s by fixed point.
        let mut x = math::sqrt(-2.0 * ln_s);
        for _ in 0..4 {
            x = math::sqrt(-2.0 * (ln_s + math::ln(x) + 0.5 * LN_2PI));
        }
        x
    };
    // Newton on f(x) = ln_sf(x) - ln_s; f'(x) = -exp(ln_pdf - ln_sf).
    for _ in 0..3 {
        let f = ln_sf(x) - ln_s;
        x += f * math::exp(ln_sf(x) - ln_pdf(x));
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent CDF oracle: Simpson quadrature of the density from 0 to x.
    fn cdf_by_quadrature(x: f64) -> f64 {
        let n = 40_000usize;
        let h = x / n as f64;
        let mut acc = pdf(0.0) + pdf(x);
        for i in 1..n {
            let t = i as f64 * h;
            acc += if i % 2 == 1 { 4.0 * pdf(t) } else { 2.0 * pdf(t) };
        }
        0.5 + acc * h / 3.0
    }

    fn quantile_by_bisection(p: f64) -> f64 {
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if cdf_by_quadrature(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cdf_matches_quadrature() {
        for &x in &[-3.0, -1.0, -0.3, 0.0, 0.5, 1.0, 2.0, 4.0] {
            assert!((cdf(x) - cdf_by_quadrature(x)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn quantile_matches_bisection_oracle() {
        for &p in &[0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.975, 0.999] {
            let oracle = quantile_by_bisection(p);
            assert!((quantile(p) - oracle).abs() < 1e-9, "p = {p}");
        }
    }

    #[test]
    fn quantile_cdf_roundtrip() {
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let x = quantile(p);
            assert!((cdf(x) - p).abs() < 1e-13, "p = {p}");
        }
    }

    #[test]
    fn ln_sf_consistent_with_sf() {
        for &x in &[-5.0, -1.0, 0.0, 1.0, 5.0, 10.0, 30.0] {
            assert!((ln_sf(x) - sf(x).ln()).abs() < 1e-11, "x = {x}");
        }
    }

    #[test]
    fn ln_sf_series_joins_smoothly() {
        // Compare both branches just around the cut.
        let below = ln_sf(36.9);
        let above = ln_sf(37.1);
        assert!(below > above);
        assert!((ln_sf(37.0 + 1e-9) - ln_sf(37.0 - 1e-9)).abs() < 1e-6);
    }

    #[test]
    fn log_domain_inverse_roundtrip() {
        for &x in &[0.0, 1.0, 6.0, 10.0, 20.0, 37.0, 60.0, 150.0] {
            let back = quantile_from_ln_sf(ln_sf(x));
            assert!((back - x).abs() < 1e-8 * (1.0 + x), "x = {x}, back = {back}");
        }
        // Left half via the reflected branch.
        for &x in &[-3.0, -1.0, -0.2] {
            let back = quantile_from_ln_sf(ln_sf(x));
            assert!((back - x).abs() < 1e-9, "x = {x}");
        }
    }
}
