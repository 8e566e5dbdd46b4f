/// Largest relative discrepancy between an analytic gradient and central
/// differences: `max_p |g_p - fd_p| / (|g_p| + eps)` with step `h`.
pub fn grad_check_with_step(
    f: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    point: &[f64],
    h: f64,
    eps: f64,
) -> f64 {
    let analytic = grad(point);
    let mut x = point.to_vec();
    let mut worst: f64 = 0.0;
    for p in 0..point.len() {
        let orig = x[p];
        x[p] = orig + h;
        let fp = f(&x);
        x[p] = orig - h;
        let fm = f(&x);
        x[p] = orig;
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((analytic[p] - fd).abs() / (analytic[p].abs() + eps));
    }
    worst
}

/// [`grad_check_with_step`] with a fixed step of 1e-6.
pub fn grad_check(
    f: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    point: &[f64],
    eps: f64,
) -> f64 {
    grad_check_with_step(f, grad, point, 1e-6, eps)
}
