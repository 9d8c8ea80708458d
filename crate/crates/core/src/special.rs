//! Complementary error function and its exponentially scaled form.

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `exp(x^2) erfc(x)`, finite for all `x` where the result is representable.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        // erfcx(-x) = 2 e^{x^2} - erfcx(x)
        let e = (x * x).exp();
        return 2.0 * e - erfcx(-x);
    }
    if x < 5.0 {
        return (x * x).exp() * libm::erfc(x);
    }
    // Continued fraction: erfcx(x) = (1/sqrt(pi)) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut f = x;
    for k in (1..=80).rev() {
        f = x + (k as f64 * 0.5) / f;
    }
    std::f64::consts::FRAC_2_SQRT_PI * 0.5 / f
}

/// `exp(-a) erfc(z)` evaluated without overflow or spurious underflow.
pub fn exp_neg_erfc(a: f64, z: f64) -> f64 {
    if z >= 0.0 {
        (-a - z * z).exp() * erfcx(z)
    } else {
        (-a).exp() * erfc(z)
    }
}

/// `ln erfc(z)`, accurate for large positive `z` where `erfc` underflows.
pub fn ln_erfc(z: f64) -> f64 {
    if z >= 0.0 {
        erfcx(z).ln() - z * z
    } else {
        erfc(z).ln()
    }
}

/// `ln(e^a + e^b)`.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}
