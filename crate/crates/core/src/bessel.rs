//! Bessel functions of integer order for the separable oracles.
//!
//! Values are carried as mantissa · e^scale so that J_n, I_n (which underflow)
//! and Y_n, K_n (which overflow) stay representable for large n.

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const TINY: f64 = 1e-300;
const CF_EPS: f64 = 1e-16;
const MAX_CF_TERMS: usize = 100_000;

/// value = mantissa · e^{scale}
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub scale: f64,
}

impl Scaled {
    pub fn new(mantissa: f64, scale: f64) -> Self {
        Self { mantissa, scale }.normalized()
    }

    fn normalized(self) -> Self {
        if self.mantissa == 0.0 || !self.mantissa.is_finite() {
            return self;
        }
        let e = self.mantissa.abs().ln();
        Self {
            mantissa: self.mantissa.signum(),
            scale: self.scale + e,
        }
    }

    pub fn value(&self) -> f64 {
        self.mantissa * self.scale.exp()
    }

    /// log|value|
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.abs().ln() + self.scale
    }

    /// Value relative to e^{reference}.
    pub fn relative_to(&self, reference: f64) -> f64 {
        self.mantissa * (self.scale - reference).exp()
    }
}

/// Modified Lentz evaluation of b0 + a1/(b1 + a2/(b2 + …)).
fn lentz(b0: f64, term: impl Fn(usize) -> (f64, f64)) -> f64 {
    let mut f = if b0 == 0.0 { TINY } else { b0 };
    let mut c = f;
    let mut d = 0.0;
    for k in 1..MAX_CF_TERMS {
        let (a, b) = term(k);
        d = b + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = b + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            return f;
        }
    }
    f
}

/// J_{n+1}(x)/J_n(x) by the continued fraction x/(2(n+1) − x²/(2(n+2) − …)).
pub fn ratio_j(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    lentz(0.0, |k| {
        let a = if k == 1 { x } else { -x * x };
        (a, 2.0 * (n + k) as f64)
    })
}

/// I_{n+1}(x)/I_n(x) by x/(2(n+1) + x²/(2(n+2) + …)).
pub fn ratio_i(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    lentz(0.0, |k| {
        let a = if k == 1 { x } else { x * x };
        (a, 2.0 * (n + k) as f64)
    })
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// (x/2)^n/n! Σ_k (∓x²/4)^k/(k!(n+1)_k), sign − for J and + for I.
fn power_series(n: usize, x: f64, modified: bool) -> Scaled {
    if x == 0.0 {
        return if n == 0 { Scaled::new(1.0, 0.0) } else { Scaled { mantissa: 0.0, scale: 0.0 } };
    }
    let q = if modified { x * x / 4.0 } else { -x * x / 4.0 };
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    Scaled::new(sum, n as f64 * (x / 2.0).ln() - ln_factorial(n))
}

pub fn bessel_j(n: usize, x: f64) -> Scaled {
    power_series(n, x, false)
}

pub fn bessel_i(n: usize, x: f64) -> Scaled {
    power_series(n, x, true)
}

fn digamma_int(k: usize) -> f64 {
    // ψ(k) = −γ + H_{k−1}
    -EULER_GAMMA + (1..k).map(|j| 1.0 / j as f64).sum::<f64>()
}

/// Y_0 and Y_1 by their ascending series.
fn y01(x: f64) -> (f64, f64) {
    let ln = (x / 2.0).ln();
    let q = -x * x / 4.0;
    let (j0, j1) = (bessel_j(0, x).value(), bessel_j(1, x).value());
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut t0 = 1.0; // q^k/(k!)²
    let mut t1 = 1.0; // q^k/(k!(k+1)!)
    for k in 0..300 {
        if k > 0 {
            t0 *= q / (k * k) as f64;
            t1 *= q / (k * (k + 1)) as f64;
        }
        let d0 = 2.0 * digamma_int(k + 1) * t0;
        let d1 = (digamma_int(k + 1) + digamma_int(k + 2)) * t1;
        s0 += d0;
        s1 += d1;
        if k > 2 && d0.abs() < 1e-18 * s0.abs().max(1e-300) && d1.abs() < 1e-18 * s1.abs().max(1e-300) {
            break;
        }
    }
    let y0 = 2.0 / PI * ln * j0 - s0 / PI;
    let y1 = -2.0 / (PI * x) + 2.0 / PI * ln * j1 - (x / 2.0) * s1 / PI;
    (y0, y1)
}

/// K_0 and K_1 by their ascending series.
fn k01(x: f64) -> (f64, f64) {
    let ln = (x / 2.0).ln();
    let q = x * x / 4.0;
    let (i0, i1) = (bessel_i(0, x).value(), bessel_i(1, x).value());
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut t0 = 1.0;
    let mut t1 = 1.0;
    for k in 0..300 {
        if k > 0 {
            t0 *= q / (k * k) as f64;
            t1 *= q / (k * (k + 1)) as f64;
        }
        let d0 = digamma_int(k + 1) * t0;
        let d1 = (digamma_int(k + 1) + digamma_int(k + 2)) * t1;
        s0 += d0;
        s1 += d1;
        if k > 2 && d0.abs() < 1e-18 * s0.abs().max(1e-300) && d1.abs() < 1e-18 * s1.abs().max(1e-300) {
            break;
        }
    }
    let k0 = -ln * i0 + s0;
    let k1 = 1.0 / x + ln * i1 - (x / 4.0) * s1;
    (k0, k1)
}

/// Forward recurrence f_{n+1} = (2n/x) f_n + sign·f_{n−1} with rescaling.
fn forward_recurrence(f0: f64, f1: f64, x: f64, sign: f64, n_max: usize) -> Vec<Scaled> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(Scaled::new(f0, 0.0));
    if n_max == 0 {
        return out;
    }
    out.push(Scaled::new(f1, 0.0));
    let (mut prev, mut cur, mut scale) = (f0, f1, 0.0);
    for n in 1..n_max {
        let next = 2.0 * n as f64 / x * cur + sign * prev;
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            prev /= 1e100;
            cur /= 1e100;
            scale += 100.0 * std::f64::consts::LN_10;
        }
        out.push(Scaled::new(cur, scale));
    }
    out
}

/// Y_0(x), …, Y_{n_max}(x).
pub fn bessel_y_all(n_max: usize, x: f64) -> Vec<Scaled> {
    let (y0, y1) = y01(x);
    forward_recurrence(y0, y1, x, -1.0, n_max)
}

/// K_0(x), …, K_{n_max}(x).
pub fn bessel_k_all(n_max: usize, x: f64) -> Vec<Scaled> {
    let (k0, k1) = k01(x);
    forward_recurrence(k0, k1, x, 1.0, n_max)
}
