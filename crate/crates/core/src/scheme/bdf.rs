use crate::error::{invalid, Result};
use crate::scalar::Real;

pub const MAX_BDF_ORDER: usize = 5;

/// Coefficients `alpha_0..=alpha_q` of the `q`-step backward difference
/// formula `d/dt c(t_n) ~ (1/dt) sum_i alpha_i c(t_{n-i})`.
pub fn bdf_coefficients<T: Real>(q: usize) -> Result<Vec<T>> {
    let table: &[f64] = match q {
        1 => &[1.0, -1.0],
        2 => &[1.5, -2.0, 0.5],
        3 => &[11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0],
        4 => &[25.0 / 12.0, -4.0, 3.0, -4.0 / 3.0, 0.25],
        5 => &[137.0 / 60.0, -5.0, 5.0, -10.0 / 3.0, 1.25, -0.2],
        _ => return invalid(format!("BDF order {q} outside 1..={MAX_BDF_ORDER}")),
    };
    Ok(table.iter().map(|&a| T::lit(a)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent derivation: solve `sum_i alpha_i (-i)^m = [m == 1]`,
    /// `m = 0..=q`, by Gaussian elimination on the Vandermonde system.
    fn derived(q: usize) -> Vec<f64> {
        let n = q + 1;
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|m| {
                let mut row: Vec<f64> = (0..n).map(|i| (-(i as f64)).powi(m as i32)).collect();
                row.push(if m == 1 { 1.0 } else { 0.0 });
                row
            })
            .collect();
        for c in 0..n {
            let p = (c..n)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .unwrap();
            a.swap(c, p);
            let pivot = a[c].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != c {
                    let f = row[c] / pivot[c];
                    for (x, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                        *x -= f * p;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][n] / a[i][i]).collect()
    }

    #[test]
    fn matches_vandermonde_solution() {
        for q in 1..=MAX_BDF_ORDER {
            let c: Vec<f64> = bdf_coefficients(q).unwrap();
            for (x, y) in c.iter().zip(derived(q)) {
                assert!((x - y).abs() < 1e-11, "q={q}");
            }
            assert!(c.iter().sum::<f64>().abs() < 1e-14);
        }
    }

    #[test]
    fn exact_on_polynomials() {
        for q in 1..=MAX_BDF_ORDER {
            let c: Vec<f64> = bdf_coefficients(q).unwrap();
            let (t, dt) = (0.7, 0.03);
            for m in 0..=q {
                let lhs: f64 = c
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a * (t - i as f64 * dt).powi(m as i32))
                    .sum();
                let rhs = if m == 0 {
                    0.0
                } else {
                    dt * m as f64 * t.powi(m as i32 - 1)
                };
                assert!((lhs - rhs).abs() < 1e-13, "q={q} m={m}");
            }
        }
    }

    #[test]
    fn rejects_unsupported_orders() {
        assert!(bdf_coefficients::<f64>(0).is_err());
        assert!(bdf_coefficients::<f64>(6).is_err());
    }
}
