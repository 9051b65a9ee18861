//! Regularized incomplete gamma function for integer order, its inverse,
//! and the two scalar numerics the rest of the crate leans on: adaptive
//! Simpson quadrature and bracketed golden-section maximization.

use crate::error::{param, Result};

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// `Q(n, x) = e^{-x} sum_{k<n} x^k/k!`, the Erlang(n, 1) tail `P(X > x)`.
pub fn gamma_reg_upper(n: usize, x: f64) -> f64 {
    assert!(n >= 1, "order must be positive");
    if x <= 0.0 {
        return 1.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..n {
        term *= x / k as f64;
        sum += term;
    }
    if sum.is_finite() {
        return ((-x).exp() * sum).min(1.0);
    }
    // Very large x: sum in log space.
    let logs: Vec<f64> = (0..n).map(|k| k as f64 * x.ln() - ln_factorial(k)).collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logs.iter().map(|l| (l - m).exp()).sum();
    (m + s.ln() - x).exp()
}

/// `P(n, x) = 1 - Q(n, x)`, accurate when it is tiny.
pub fn gamma_reg_lower(n: usize, x: f64) -> f64 {
    assert!(n >= 1, "order must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x < n as f64 + 1.0 {
        // e^{-x} sum_{k>=n} x^k/k!
        let mut term = (n as f64 * x.ln() - x - ln_factorial(n)).exp();
        let mut sum = term;
        let mut k = n;
        loop {
            k += 1;
            term *= x / k as f64;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        sum.min(1.0)
    } else {
        1.0 - gamma_reg_upper(n, x)
    }
}

/// Erlang(n, 1) density `x^{n-1} e^{-x} / (n-1)!`.
pub fn erlang_pdf(n: usize, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return if n == 1 { 1.0 } else { 0.0 };
    }
    ((n - 1) as f64 * x.ln() - x - ln_factorial(n - 1)).exp()
}

/// Inverse of [`gamma_reg_upper`] in its second argument.
///
/// Safeguarded Newton on the logarithm of whichever tail is smaller, inside
/// a bisection bracket.
pub fn gamma_reg_upper_inv(n: usize, y: f64) -> Result<f64> {
    if n == 0 {
        return param("order must be positive");
    }
    if !(y > 0.0 && y <= 1.0) {
        return param(format!("gamma inverse needs y in (0, 1], got {y}"));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    let use_upper = y <= 0.5;
    let target = if use_upper { y.ln() } else { (1.0 - y).ln() };
    // g(x) is increasing in x in both branches.
    let g = |x: f64| -> f64 {
        if use_upper {
            -gamma_reg_upper(n, x).ln()
        } else {
            gamma_reg_lower(n, x).ln()
        }
    };
    let goal = if use_upper { -target } else { target };

    let mut lo = 0.0;
    let mut hi = n as f64 + 1.0;
    while g(hi) < goal {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return param(format!("gamma inverse target {y} is out of numeric range"));
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        let resid = gx - goal;
        if resid > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let pdf = erlang_pdf(n, x);
        let tail = if use_upper { gamma_reg_upper(n, x) } else { gamma_reg_lower(n, x) };
        let slope = pdf / tail;
        let mut next = if slope > 0.0 && slope.is_finite() { x - resid / slope } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // Seed with a uniform panel split so narrow features are not skipped.
    const PANELS: usize = 16;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == PANELS { b } else { lo + h };
            let flo = f(lo);
            let fhi = f(hi);
            let fm = f(0.5 * (lo + hi));
            let whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
            simpson_step(&f, lo, hi, flo, fm, fhi, whole, tol / PANELS as f64, 40)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Coarse grid scan followed by golden-section refinement around the best grid point.
pub fn grid_golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, grid: usize, tol: f64) -> (f64, f64) {
    let grid = grid.max(3);
    let step = (b - a) / (grid - 1) as f64;
    let (best, _) = (0..grid)
        .map(|i| (i, f(a + i as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let lo = a + best.saturating_sub(1) as f64 * step;
    let hi = (a + (best + 1) as f64 * step).min(b);
    golden_section_max(f, lo, hi, tol)
}
