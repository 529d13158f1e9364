//! Minimal special-function kit: gamma, factorials, binomials, erfc.
//!
//! Only what the interference and fading laws actually need; nothing here
//! aims to be a general-purpose library.

/// Lanczos coefficients (g = 7, 9 terms).
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments (poles at 0, -1, -2, ... return NaN-ish infs).
pub fn gamma(z: f64) -> f64 {
    if z < 0.5 {
        // reflection
        std::f64::consts::PI / ((std::f64::consts::PI * z).sin() * gamma(1.0 - z))
    } else {
        let z = z - 1.0;
        let mut acc = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + 7.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
    }
}

/// (n)! as f64; caller keeps n small (antenna counts).
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient C(m, n) as f64, multiplicative form.
pub fn binomial(m: u32, n: u32) -> f64 {
    if n > m {
        return 0.0;
    }
    let n = n.min(m - n);
    let mut acc = 1.0;
    for k in 0..n {
        acc = acc * (m - k) as f64 / (k + 1) as f64;
    }
    acc
}

/// Normalized sinc: sin(pi z) / (pi z).
pub fn sinc(z: f64) -> f64 {
    let x = std::f64::consts::PI * z;
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Complementary error function, via the regularized incomplete gamma
/// Q(1/2, x^2). Series for small arguments, Lentz continued fraction for
/// large; good to ~1e-14 relative.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x == 0.0 {
        return 1.0;
    }
    let a = x * x;
    if a < 2.25 {
        1.0 - gamma_p_half(a)
    } else {
        gamma_q_half_cf(a)
    }
}

/// P(1/2, a) by power series.
fn gamma_p_half(a: f64) -> f64 {
    let s = 0.5_f64;
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut n = 0.0;
    while term.abs() > sum.abs() * 1e-17 {
        n += 1.0;
        term *= a / (s + n);
        sum += term;
    }
    sum * (-a + s * a.ln() - ln_gamma_half()).exp()
}

/// Q(1/2, a) by modified Lentz continued fraction.
fn gamma_q_half_cf(a: f64) -> f64 {
    let s = 0.5;
    let tiny = 1e-300;
    let mut b = a + 1.0 - s;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..200 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-a + s * a.ln() - ln_gamma_half()).exp() * h
}

fn ln_gamma_half() -> f64 {
    // ln Gamma(1/2) = ln sqrt(pi)
    0.572_364_942_924_700_1
}
