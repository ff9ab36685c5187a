//! Special functions: spherical Bessel functions of the first kind and the
//! oscillatory tail integrals `∫_x^∞ e^{it} t^{-n} dt` used to close the
//! large-λ end of the inverse spectral transform.

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Spherical Bessel function `j_l(x)` for `x >= 0`.
///
/// Uses the ascending series below `x = max(l, 1)` (no cancellation there) and
/// upward recurrence from `j_0`, `j_1` above it, where the recurrence is stable.
pub fn spherical_jn(l: usize, x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if x <= (l as f64).max(1.0) {
        return jn_series(l, x);
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if l == 0 {
        return j0;
    }
    let mut jm = j0;
    let mut j = s / (x * x) - c / x;
    for k in 1..l {
        let next = (2 * k + 1) as f64 / x * j - jm;
        jm = j;
        j = next;
    }
    j
}

fn jn_series(l: usize, x: f64) -> f64 {
    // x^l / (2l+1)!! * Σ_k (-x²/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))
    let mut pref_l = 1.0;
    for k in 1..=l {
        pref_l *= x / (2 * k + 1) as f64;
    }
    let y = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= y / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    pref_l * sum
}

/// Exponential integral `E_n(z) = ∫_1^∞ e^{-zs} s^{-n} ds` for complex `z`
/// with `Re z >= 0`, `z != 0`, `n >= 1`.
pub fn expint(n: usize, z: Complex64) -> Complex64 {
    assert!(n >= 1, "expint requires n >= 1");
    if z.norm() < 2.0 {
        // Ascending series for E_1, then upward recurrence
        // E_{k+1} = (e^{-z} - z E_k) / k, which is stable for |z| < 2.
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 1..200 {
            term *= -z / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.norm() < 1e-17 * sum.norm().max(1e-300) {
                break;
            }
        }
        let mut e = -EULER_GAMMA - z.ln() + sum;
        let ez = (-z).exp();
        for k in 1..n {
            e = (ez - z * e) / k as f64;
        }
        e
    } else {
        // Modified Lentz evaluation of the continued fraction.
        let tiny = 1e-300;
        let nf = n as f64;
        let mut b = z + nf;
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 1..10_000 {
            let fi = i as f64;
            let an = -fi * (nf - 1.0 + fi);
            b += 2.0;
            d = Complex64::new(1.0, 0.0) / (d * an + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h * (-z).exp()
    }
}

/// `∫_x^∞ e^{it} t^{-n} dt` for `x > 0`, `n >= 1`.
pub fn oscillatory_tail(n: usize, x: f64) -> Complex64 {
    assert!(x > 0.0, "oscillatory_tail requires x > 0");
    x.powi(1 - n as i32) * expint(n, Complex64::new(0.0, -x))
}
