/// Derivative of samples `(t_i, v_i)` by the three-point formula on a
/// non-uniform mesh, one-sided at the ends.
pub fn derivative_nonuniform(t: &[f64], v: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut d = vec![0.0; n];
    for i in 0..n {
        let (a, b, c) = if i == 0 {
            (0, 1, 2)
        } else if i + 1 == n {
            (n - 3, n - 2, n - 1)
        } else {
            (i - 1, i, i + 1)
        };
        let (ta, tb, tc) = (t[a], t[b], t[c]);
        let x = t[i];
        // Derivative of the Lagrange interpolant through the three points.
        d[i] = v[a] * ((x - tb) + (x - tc)) / ((ta - tb) * (ta - tc))
            + v[b] * ((x - ta) + (x - tc)) / ((tb - ta) * (tb - tc))
            + v[c] * ((x - ta) + (x - tb)) / ((tc - ta) * (tc - tb));
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_quadratics_on_uneven_mesh() {
        let t = [0.0, 0.1, 0.35, 0.4, 0.9];
        let v: Vec<f64> = t.iter().map(|x| 2.0 - 3.0 * x + 5.0 * x * x).collect();
        let d = derivative_nonuniform(&t, &v);
        for (x, dx) in t.iter().zip(&d) {
            assert!((dx - (-3.0 + 10.0 * x)).abs() < 1e-12);
        }
    }
}
