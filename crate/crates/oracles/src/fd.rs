//! Central finite differences.

/// `∂f/∂x_i ≈ (f(x + h e_i) - f(x - h e_i)) / 2h` for every coordinate.
pub fn gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let g = gradient(|x| x[0] * x[0] + 3.0 * x[0] * x[1], &[1.0, 2.0], 1e-5);
        assert!((g[0] - 8.0).abs() < 1e-8);
        assert!((g[1] - 3.0).abs() < 1e-8);
    }
}
