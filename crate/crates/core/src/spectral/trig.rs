//! `sin(πx)` and `cos(πx)` with exact argument reduction, so that integer and
//! half-integer arguments produce exact zeros.

use std::f64::consts::PI;

pub fn sin_pi(x: f64) -> f64 {
    // (-2, 2) -> (-1, 1]
    let mut r = x % 2.0;
    if r > 1.0 {
        r -= 2.0;
    } else if r <= -1.0 {
        r += 2.0;
    }
    if r > 0.5 {
        r = 1.0 - r;
    } else if r < -0.5 {
        r = -1.0 - r;
    }
    (r * PI).sin()
}

pub fn cos_pi(x: f64) -> f64 {
    // cos is even and 2-periodic: reduce to [0, 1]
    let mut r = x.abs() % 2.0;
    if r > 1.0 {
        r = 2.0 - r;
    }
    if r < 0.25 {
        (r * PI).cos()
    } else if r <= 0.75 {
        ((0.5 - r) * PI).sin()
    } else {
        -((1.0 - r) * PI).cos()
    }
}
