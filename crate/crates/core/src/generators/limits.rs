//! One-sided limits of closures at a finite endpoint.

const STEPS: usize = 40;

/// `lim f(endpoint + direction·h)` as `h ↓ 0`, by Richardson extrapolation of
/// a geometric sequence of step sizes. Returns `±∞` when successive values
/// stop contracting, i.e. the sequence drifts at least logarithmically.
pub(super) fn one_sided_limit(f: &dyn Fn(f64) -> f64, endpoint: f64, direction: f64, width: f64) -> f64 {
    let mut h = 0.25 * width;
    let mut values = Vec::with_capacity(STEPS);
    let mut steps = Vec::with_capacity(STEPS);
    for _ in 0..STEPS {
        let x = endpoint + direction * h;
        if x == endpoint {
            break;
        }
        let y = f(x);
        if y.is_infinite() {
            return y;
        }
        if y.is_nan() {
            break;
        }
        values.push(y);
        steps.push(h);
        h *= 0.5;
    }
    let n = values.len();
    if n < 4 {
        return values.last().copied().unwrap_or(f64::NAN);
    }

    let d1 = values[n - 1] - values[n - 2];
    let d0 = values[n - 2] - values[n - 3];
    let scale = 1.0 + values[n - 1].abs();
    if d1.abs() <= 1e-14 * scale {
        return values[n - 1];
    }
    if d0 != 0.0 && (d1 / d0).abs() > 0.9 && d1.signum() == d0.signum() {
        return if d1 > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
    }

    // Neville's scheme on the last four points, extrapolated to h = 0.
    let xs = &steps[n - 4..];
    let mut p: Vec<f64> = values[n - 4..].to_vec();
    for level in 1..4 {
        for i in 0..4 - level {
            p[i] = (xs[i + level] * p[i] - xs[i] * p[i + 1]) / (xs[i + level] - xs[i]);
        }
    }
    p[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_limit() {
        let v = one_sided_limit(&|x: f64| x.exp(), 0.0, 1.0, 1.0);
        assert!((v - 1.0).abs() < 1e-12, "{v}");
        let v = one_sided_limit(&|x: f64| x.sin() / x, 0.0, -1.0, 1.0);
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn divergent_limits() {
        assert_eq!(one_sided_limit(&|x: f64| x.ln(), 0.0, 1.0, 1.0), f64::NEG_INFINITY);
        assert_eq!(one_sided_limit(&|x: f64| 1.0 / x, 0.0, 1.0, 1.0), f64::INFINITY);
        assert_eq!(one_sided_limit(&|x: f64| -(1.0 - x).ln(), 1.0, -1.0, 1.0), f64::INFINITY);
    }
}
