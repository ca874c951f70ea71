//! Scalar special functions: associated Laguerre polynomials, integer-order
//! Bessel functions and the Gamma-regularized Kummer function.

use crate::error::{Error, Result};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Associated Laguerre polynomial `L_n^{(a)}(x)` for integer `a`.
///
/// Negative `a` with `n + a >= 0` goes through the reflection
/// `L_n^{(-d)}(x) = (-x)^d (n-d)!/n! L_{n-d}^{(d)}(x)`, which only multiplies
/// by powers of `x` and is therefore valid on the whole real line.
pub fn laguerre_assoc(n: usize, a: i32, x: f64) -> f64 {
    if a < 0 {
        let d = (-a) as usize;
        if d <= n {
            let mut pref = 1.0;
            for j in 0..d {
                pref *= -x / (n - j) as f64;
            }
            return pref * laguerre_real(n - d, d as f64, x);
        }
    }
    laguerre_real(n, a as f64, x)
}

/// `L_n^{(a)}(x)` for real `a` by the three-term forward recurrence.
pub fn laguerre_real(n: usize, a: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Bessel function of the first kind `J_n(x)` by Miller's backward
/// recurrence, normalized with `J_0 + 2 sum J_2k = 1`.
pub fn bessel_j(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let ax = x.abs();
    let top = {
        let m = (n as f64).max(ax) + ax + 30.0;
        let m = m.ceil() as usize;
        m + m % 2
    };
    let mut jp = 0.0; // J_{k+1}
    let mut j = 1e-300; // J_k
    let mut norm = 0.0;
    let mut out = 0.0;
    for k in (1..=top).rev() {
        let jm = 2.0 * k as f64 / ax * j - jp;
        jp = j;
        j = jm;
        if k - 1 == n {
            out = j;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            out *= 1e-250;
        }
    }
    norm += j;
    sign * out / norm
}

/// `1/Gamma(x)`, zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x < 0.5 {
        // reflection keeps statrs on its accurate half-line
        return gamma(1.0 - x) * (PI * x).sin() / PI;
    }
    if x > 171.5 {
        return 0.0;
    }
    1.0 / gamma(x)
}

fn is_nonpos_int(v: f64) -> bool {
    v <= 0.0 && v == v.floor()
}

const MAX_TERMS: usize = 10_000;

/// Regularized confluent hypergeometric function `1F1(a;b;z)/Gamma(b)`,
/// finite for every real `b`.
pub fn kummer_1f1_regularized(a: f64, b: f64, z: f64) -> Result<f64> {
    if is_nonpos_int(a) {
        return Ok(terminating(a, b, z));
    }
    if z < 0.0 {
        let c = b - a;
        if is_nonpos_int(c) {
            return Ok(z.exp() * terminating(c, b, -z));
        }
        return Ok(z.exp() * series(c, b, -z)?);
    }
    series(a, b, z)
}

// a = -n: M~(-n;b;x) = n! rgamma(b+n) L_n^{(b-1)}(x)
fn terminating(a: f64, b: f64, z: f64) -> f64 {
    let n = (-a).round() as usize;
    let rg = rgamma(b + n as f64);
    if rg == 0.0 {
        return 0.0;
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    fact * rg * laguerre_real(n, b - 1.0, z)
}

fn series(a: f64, b: f64, z: f64) -> Result<f64> {
    // rgamma(b+k) is evaluated directly while b+k may sit on a pole; past that
    // point the whole term advances by its ratio so nothing over/underflows.
    let direct_until = if b < 1.0 { (1.0 - b).ceil() as usize + 1 } else { 0 };
    let mut t = 1.0; // (a)_k z^k / k!
    let mut term = rgamma(b);
    let mut sum = term;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        if k <= direct_until {
            t *= (a + kf - 1.0) * z / kf;
            term = t * rgamma(b + kf);
        } else {
            term *= (a + kf - 1.0) * z / (kf * (b + kf - 1.0));
        }
        sum += term;
        if term == 0.0 && k > direct_until {
            return Ok(sum);
        }
        let tail_shrinks = ((a + kf) * z).abs() < ((kf + 1.0) * (b + kf)).abs();
        if k > direct_until && tail_shrinks && term.abs() <= 1e-17 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Convergence {
        module: "specfun",
        msg: format!("1F1 series for a={a}, b={b}, z={z} did not converge in {MAX_TERMS} terms"),
    })
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    statrs::function::gamma::ln_gamma(n as f64 + 1.0)
}
