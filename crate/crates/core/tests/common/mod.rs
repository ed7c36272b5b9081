//! Reference implementations used only by the tests. None of these call into
//! the code paths they check.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

fn binom(n: u64, k: u64) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

/// `P[X <= m]`, `X ~ Binomial(n, v)`, in exact integer arithmetic on the
/// binary value of `v`: with `v = a / 2^e` every term shares the denominator
/// `2^(e n)`, so the sum is an integer until the final scaling.
pub fn exact_binomial_cdf(n: u64, m: u64, v: f64) -> f64 {
    assert!(v > 0.0 && v < 1.0);
    let (a, e) = dyadic(v);
    let a = BigInt::from(a);
    let b = (BigInt::one() << e) - &a;
    let m = m.min(n);
    let a_pow: Vec<BigInt> = std::iter::successors(Some(BigInt::one()), |p| Some(p * &a))
        .take(m as usize + 1)
        .collect();
    let mut b_pow = num_traits::pow(b.clone(), (n - m) as usize);
    let mut sum = BigInt::zero();
    for k in (0..=m).rev() {
        sum += binom(n, k) * &a_pow[k as usize] * &b_pow;
        b_pow *= &b;
    }
    to_f64_scaled(&sum, (e * n) as i64)
}

/// `v = a / 2^e` with `a` odd.
fn dyadic(v: f64) -> (u64, u64) {
    let bits = v.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let (mut mant, mut e) = if exp == 0 {
        (bits & ((1 << 52) - 1), 1074)
    } else {
        ((bits & ((1 << 52) - 1)) | (1 << 52), 1075 - exp)
    };
    while mant % 2 == 0 {
        mant /= 2;
        e -= 1;
    }
    (mant, e as u64)
}

/// `x / 2^shift` rounded to `f64`.
fn to_f64_scaled(x: &BigInt, shift: i64) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let excess = x.bits() as i64 - 64;
    let (top, shift) = if excess > 0 {
        (
            (x >> excess as usize).to_f64().expect("fits"),
            shift - excess,
        )
    } else {
        (x.to_f64().expect("fits"), shift)
    };
    let (mut value, mut shift) = (top, shift);
    while shift > 1000 {
        value *= 2f64.powi(-1000);
        shift -= 1000;
    }
    value * 2f64.powi(-(shift as i32))
}

/// Smallest `m` with exact CDF >= 1 - eps, by linear scan.
pub fn brute_force_min_spares(n: u64, v: f64, eps: f64) -> u64 {
    (0..=n)
        .find(|&m| exact_binomial_cdf(n, m, v) >= 1.0 - eps)
        .expect("m = n always qualifies")
}

/// `W(T) = C/T + (T/2 + R + D)/mu`, written out independently.
pub fn waste(c: f64, t: f64, mu: f64, r: f64, d: f64) -> f64 {
    c / t + (t / 2.0 + r + d) / mu
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
