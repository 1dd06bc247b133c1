//! Small numerical kernels shared by the solver and the analysis code.

/// Three-point derivative at interior node `k` of a nonuniform grid.
///
/// Exact for quadratics.
pub fn centered_derivative(x: &[f64], f: &[f64], k: usize) -> f64 {
    debug_assert!(k >= 1 && k + 1 < x.len());
    let hm = x[k] - x[k - 1];
    let hp = x[k + 1] - x[k];
    (-hp / (hm * (hm + hp))) * f[k - 1]
        + ((hp - hm) / (hm * hp)) * f[k]
        + (hm / (hp * (hm + hp))) * f[k + 1]
}

/// Derivative at every interior node; boundary entries are `None`.
pub fn interior_derivatives(x: &[f64], f: &[f64]) -> Vec<Option<f64>> {
    let n = x.len();
    (0..n)
        .map(|k| (k > 0 && k + 1 < n).then(|| centered_derivative(x, f, k)))
        .collect()
}

/// Cumulative trapezoid integral starting from zero at `x[0]`.
pub fn cumulative_trapezoid(x: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..x.len() {
        acc += 0.5 * (f[k] + f[k - 1]) * (x[k] - x[k - 1]);
        out.push(acc);
    }
    out
}

pub fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    cumulative_trapezoid(x, f).last().copied().unwrap_or(0.0)
}

/// Solves a tridiagonal system in place (Thomas algorithm).
///
/// `lower[0]` and `upper[n-1]` are ignored. Returns `None` on a zero pivot.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return None;
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return None;
        }
        c[i] = if i + 1 < n { upper[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

/// Least-squares line `y = intercept + slope * t` with its `r^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
}

pub fn fit_line(t: &[f64], y: &[f64]) -> LineFit {
    let m = t.len() as f64;
    let tm = t.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        stt += (ti - tm) * (ti - tm);
        sty += (ti - tm) * (yi - ym);
        syy += (yi - ym) * (yi - ym);
    }
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let ss_res: f64 = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let r = yi - intercept - slope * ti;
            r * r
        })
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    LineFit { intercept, slope, r2 }
}

/// Value at `t = 0` of the least-squares polynomial of the given degree.
///
/// Normal equations in a shifted/scaled variable; meant for short windows
/// and low degrees.
pub fn poly_extrapolate_to_zero(t: &[f64], y: &[f64], degree: usize) -> f64 {
    let scale = t.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let p = degree + 1;
    let mut ata = vec![vec![0.0; p]; p];
    let mut aty = vec![0.0; p];
    for (&ti, &yi) in t.iter().zip(y) {
        let s = ti / scale;
        let powers: Vec<f64> = (0..p).map(|e| s.powi(e as i32)).collect();
        for r in 0..p {
            aty[r] += powers[r] * yi;
            for c in 0..p {
                ata[r][c] += powers[r] * powers[c];
            }
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..p {
        let piv = (col..p)
            .max_by(|&a, &b| ata[a][col].abs().total_cmp(&ata[b][col].abs()))
            .unwrap();
        ata.swap(col, piv);
        aty.swap(col, piv);
        for row in col + 1..p {
            let f = ata[row][col] / ata[col][col];
            for c in col..p {
                ata[row][c] -= f * ata[col][c];
            }
            aty[row] -= f * aty[col];
        }
    }
    let mut coef = vec![0.0; p];
    for row in (0..p).rev() {
        let tail: f64 = (row + 1..p).map(|c| ata[row][c] * coef[c]).sum();
        coef[row] = (aty[row] - tail) / ata[row][row];
    }
    coef[0]
}

/// Richardson table for a quantity `D(h)` whose error expands in integer
/// powers of `h`, given samples at `h, 2h, 4h, ...` (finest first).
pub fn richardson_doubling(samples: &[f64]) -> f64 {
    let mut level: Vec<f64> = samples.to_vec();
    let mut factor = 2.0;
    while level.len() > 1 {
        level = level
            .windows(2)
            .map(|w| (factor * w[0] - w[1]) / (factor - 1.0))
            .collect();
        factor *= 2.0;
    }
    level[0]
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_difference_exact_on_quadratics() {
        let x = [0.0, 0.1, 0.35, 0.4];
        let f: Vec<f64> = x.iter().map(|&t| 3.0 * t * t - 2.0 * t + 1.0).collect();
        for k in 1..3 {
            let exact = 6.0 * x[k] - 2.0;
            assert!((centered_derivative(&x, &f, k) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn trapezoid_exact_on_lines() {
        let x = [0.0, 0.2, 0.7, 1.0];
        let f: Vec<f64> = x.iter().map(|&t| 2.0 * t + 1.0).collect();
        let c = cumulative_trapezoid(&x, &f);
        for (xi, ci) in x.iter().zip(&c) {
            assert!((ci - (xi * xi + xi)).abs() < 1e-14);
        }
    }

    #[test]
    fn thomas_matches_dense_solution() {
        // [2 1 0; 1 3 1; 0 1 4] u = [3, 5, 5] -> u = [1, 1, 1]
        let u = solve_tridiagonal(&[0.0, 1.0, 1.0], &[2.0, 3.0, 4.0], &[1.0, 1.0, 0.0], &[3.0, 5.0, 5.0])
            .unwrap();
        for v in u {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(solve_tridiagonal(&[0.0], &[0.0], &[0.0], &[1.0]).is_none());
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let fit = fit_line(&t, &y);
        assert!((fit.slope - 2.0).abs() < 1e-14);
        assert!((fit.intercept - 1.0).abs() < 1e-14);
        assert!((fit.r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn polynomial_extrapolation_exact_for_quadratics() {
        let t: Vec<f64> = (1..8).map(|k| 0.01 * k as f64).collect();
        let y: Vec<f64> = t.iter().map(|&s| 0.5 - 3.0 * s + 40.0 * s * s).collect();
        assert!((poly_extrapolate_to_zero(&t, &y, 2) - 0.5).abs() < 1e-11);
    }

    #[test]
    fn richardson_removes_polynomial_error() {
        let h = 0.01;
        let d = |h: f64| 2.0 + 0.3 * h - 5.0 * h * h + 7.0 * h * h * h;
        let samples = [d(h), d(2.0 * h), d(4.0 * h), d(8.0 * h)];
        assert!((richardson_doubling(&samples) - 2.0).abs() < 1e-12);
    }
}
