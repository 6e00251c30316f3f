//! Bessel functions of the first kind for integer order, as needed for
//! phase-modulation sideband weights.

/// J_n(x) for integer `n` (negative orders via J_{−n} = (−1)ⁿ J_n).
///
/// Power series for |x| ≤ 12 (terms are summed until they stop contributing),
/// which covers every modulation index that appears in this crate. Larger
/// arguments use Miller's backward recurrence normalized with
/// J₀ + 2ΣJ_{2k} = 1.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    if n < 0 {
        let v = bessel_j(-n, x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x <= 12.0 {
        series(n as u32, x)
    } else {
        miller(n as u32, x)
    }
}

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // (x/2)^n / n!
    let mut term = (1..=n).fold(1.0, |acc, k| acc * half / k as f64);
    let mut sum = term;
    let q = -half * half;
    for k in 1..200u32 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(n: u32, x: f64) -> f64 {
    let start = 2 * ((n.max(x as u32) + 30 + (x.sqrt() * 10.0) as u32) / 2);
    let (mut j_next, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    let mut result = 0.0;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / x * j - j_next;
        j_next = j;
        j = j_prev;
        if j.abs() > 1e250 {
            j *= 1e-250;
            j_next *= 1e-250;
            result *= 1e-250;
            norm *= 1e-250;
        }
        if k - 1 == n {
            result = j;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
    }
    norm += j;
    result / norm
}

/// dJ_n/dx = (J_{n−1} − J_{n+1}) / 2.
pub fn bessel_j_prime(n: i32, x: f64) -> f64 {
    0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
}

/// Smallest m ≥ 0 with J₀(m)² = `ratio`, for `ratio` in (J₀(2.405)², 1]; the
/// carrier power falls monotonically over that range.
pub fn inverse_j0_squared(ratio: f64) -> Option<f64> {
    if !(0.0..=1.0).contains(&ratio) {
        return None;
    }
    const FIRST_ZERO: f64 = 2.404_825_557_695_773;
    let f = |m: f64| bessel_j(0, m).powi(2) - ratio;
    let (mut lo, mut hi) = (0.0, FIRST_ZERO);
    if f(hi) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}
