#![allow(dead_code)]

use teleport_core::{PhysicalParams, C64};

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

pub fn simpson_c(f: impl Fn(f64) -> C64, a: f64, b: f64, n: usize) -> C64 {
    let re = simpson(|x| f(x).re, a, b, n);
    let im = simpson(|x| f(x).im, a, b, n);
    C64::new(re, im)
}

/// Tensor-product Simpson rule over `[a, b]²`.
pub fn simpson_2d(f: impl Fn(f64, f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let w = |i: usize| {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut acc = 0.0;
    for i in 0..=n {
        let x = a + h * i as f64;
        for j in 0..=n {
            acc += w(i) * w(j) * f(x, a + h * j as f64);
        }
    }
    acc * h * h / 9.0
}

pub fn reference() -> PhysicalParams {
    PhysicalParams::reference()
}
