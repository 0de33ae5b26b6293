//! Central finite differences for checking hand-written gradients.

/// `|a - b| / max(|a|, |b|, floor)`. The floor keeps near-zero gradients from
/// turning rounding noise into large relative errors.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// `(f(x0 + h) - f(x0 - h)) / 2h`. `f` receives the perturbed coordinate.
pub fn central_difference<F: FnMut(f64) -> f64>(x0: f64, h: f64, mut f: F) -> f64 {
    (f(x0 + h) - f(x0 - h)) / (2.0 * h)
}
