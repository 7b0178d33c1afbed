#![allow(dead_code)]

use num_complex::Complex64;

/// Adaptive Simpson quadrature of a complex integrand on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `∫₀^∞ f(t) e^{−st} dt` for `f` decaying at least like `e^{−rate t}`,
/// split into unit panels up to where the integrand is negligible.
pub fn laplace_quadrature<F: Fn(f64) -> Complex64>(
    f: F,
    s: Complex64,
    decay_rate: f64,
) -> Complex64 {
    let cutoff = 40.0 / decay_rate;
    let panels = (cutoff / 0.5).ceil() as usize;
    let width = cutoff / panels as f64;
    let g = |t: f64| f(t) * (-s * t).exp();
    (0..panels)
        .map(|k| adaptive_simpson(&g, k as f64 * width, (k + 1) as f64 * width, 1e-14))
        .sum()
}
