use crate::error::{invalid, Error, Result};

/// Knill-Laflamme function `g(alpha) = tan(alpha^2) + tanh(alpha^2)`.
pub fn sweet_spot_g(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    a2.tan() + a2.tanh()
}

const SCAN: usize = 2000;

/// Every root of `g` in `[lo, hi]`, ascending. Sign changes of `g` that
/// straddle a pole of `tan` (where `cos(alpha^2)` changes sign) are skipped.
pub fn sweet_spot_roots(lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
        return Err(invalid("harness", "bracket", "need finite 0 <= lo < hi"));
    }
    let h = (hi - lo) / SCAN as f64;
    let mut roots = Vec::new();
    let mut a = lo;
    let mut ga = sweet_spot_g(a);
    for i in 1..=SCAN {
        let b = if i == SCAN { hi } else { lo + i as f64 * h };
        let gb = sweet_spot_g(b);
        let pole = (a * a).cos().signum() != (b * b).cos().signum();
        if ga == 0.0 {
            roots.push(a);
        } else if !pole && ga.signum() != gb.signum() && gb != 0.0 {
            roots.push(bisect(a, b, ga));
        }
        a = b;
        ga = gb;
    }
    if ga == 0.0 {
        roots.push(hi);
    }
    Ok(roots)
}

fn bisect(mut a: f64, mut b: f64, mut ga: f64) -> f64 {
    while b - a > 1e-10 {
        let m = 0.5 * (a + b);
        let gm = sweet_spot_g(m);
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    // the interval is below 1e-10; take the end with the smaller residual
    let m = 0.5 * (a + b);
    [a, m, b]
        .into_iter()
        .min_by(|x, y| sweet_spot_g(*x).abs().total_cmp(&sweet_spot_g(*y).abs()))
        .unwrap_or(m)
}

/// Smallest root of `tan(alpha^2) = -tanh(alpha^2)` in `[lo, hi]`.
pub fn sweet_spot_solve(lo: f64, hi: f64) -> Result<f64> {
    sweet_spot_roots(lo, hi)?.first().copied().ok_or_else(|| Error::Domain {
        module: "harness",
        msg: format!("no sign change of tan(a^2) + tanh(a^2) in [{lo}, {hi}]"),
    })
}

/// Least-squares line through `(ln x, ln y)` for points with `x` in `window`.
/// Returns `(slope, intercept)`.
pub fn fit_loglog(x: &[f64], y: &[f64], window: [f64; 2]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a >= window[0] * (1.0 - 1e-12) && **a <= window[1] * (1.0 + 1e-12) && **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Domain {
            module: "harness",
            msg: format!("{} positive points in the fit window", pts.len()),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain {
            module: "harness",
            msg: "fit window holds a single abscissa".into(),
        });
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
