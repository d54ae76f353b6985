//! Smoothed interval indicators with exact product-form Fourier
//! transforms, and a Poisson-summation consistency check.
//!
//! `bump_build` convolves the indicator of a shrunken base interval with
//! `FACTORS` box kernels of equal width. The spatial side evaluates
//! through the distribution function of a sum of uniforms (a cardinal
//! B-spline sum, all terms nonnegative, so no cancellation); the
//! frequency side is a phase factor times a product of sinc factors.
//! The two closed forms share no code path, which is what makes the
//! Poisson check meaningful.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::Error;
use crate::Result;

/// Number of box kernels convolved onto the base interval.
pub const FACTORS: usize = 40;

/// Requested bump: supported on `[m, m + n]`, flat on
/// `[m + delta*n, m + n*(1 - delta)]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BumpSpec {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub delta: f64,
}

/// Realized bump: base interval `[a, b]` convolved with `FACTORS`
/// centered boxes of width `w` each, `FACTORS * w = delta * n`.
#[derive(Debug, Clone)]
pub struct BumpFunction {
    pub spec: BumpSpec,
    a: f64,
    b: f64,
    w: f64,
}

/// Distribution function of a sum of `FACTORS` iid uniforms on `[0,1]`,
/// evaluated as a sum of B-spline values of order `FACTORS + 1`. The
/// triangular recursion keeps every coefficient nonnegative.
fn uniform_sum_cdf(u: f64) -> f64 {
    let j = FACTORS;
    if u <= 0.0 {
        return 0.0;
    }
    if u >= j as f64 {
        return 1.0;
    }
    // v[k] holds the order-`ord` spline at u - k
    let mut v = [0.0f64; FACTORS + 2];
    for (k, slot) in v.iter_mut().enumerate() {
        let t = u - k as f64;
        if (0.0..1.0).contains(&t) {
            *slot = 1.0;
        }
    }
    for ord in 2..=j + 1 {
        for k in 0..=j {
            let t = u - k as f64;
            v[k] = (t * v[k] + (ord as f64 - t) * v[k + 1]) / (ord as f64 - 1.0);
        }
        v[j + 1] = 0.0;
    }
    let upper = (u.floor() as usize).min(j);
    v[..=upper].iter().sum()
}

fn sinc(y: f64) -> f64 {
    if y.abs() < 1e-8 {
        1.0 - y * y / 6.0
    } else {
        y.sin() / y
    }
}

/// Build the bump for `spec`. Requires `0 < delta < 1/16` and `n > 0`.
pub fn bump_build(spec: BumpSpec) -> Result<BumpFunction> {
    if spec.n <= 0.0 || !spec.n.is_finite() || !spec.m.is_finite() {
        return Err(Error::InvalidInput(format!(
            "interval must be finite with positive length, got M={}, N={}",
            spec.m, spec.n
        )));
    }
    if !(spec.delta > 0.0 && spec.delta < 1.0 / 16.0) {
        return Err(Error::InvalidInput(format!(
            "flatness must lie in (0, 1/16), got {}",
            spec.delta
        )));
    }
    let pad = spec.delta * spec.n / 2.0;
    Ok(BumpFunction {
        spec,
        a: spec.m + pad,
        b: spec.m + spec.n - pad,
        w: spec.delta * spec.n / FACTORS as f64,
    })
}

impl BumpFunction {
    /// Pointwise value in `[0, 1]`; zero outside `[m, m + n]`.
    pub fn eval(&self, x: f64) -> f64 {
        let half = FACTORS as f64 / 2.0;
        let hi = uniform_sum_cdf((x - self.a) / self.w + half);
        let lo = uniform_sum_cdf((x - self.b) / self.w + half);
        (hi - lo).clamp(0.0, 1.0)
    }

    /// `∫ f(x) e(-λx) dx` in closed form.
    pub fn fourier(&self, lambda: f64) -> Complex64 {
        let base = self.b - self.a;
        let phase = Complex64::from_polar(1.0, -PI * lambda * (self.a + self.b));
        let boxes = sinc(PI * lambda * self.w).powi(FACTORS as i32);
        phase * (base * sinc(PI * lambda * base) * boxes)
    }

    /// Transform at zero: the mass `(1 - delta) * n`.
    pub fn fourier_zero(&self) -> f64 {
        self.b - self.a
    }

    /// Proven envelope `16 f̂(0) exp(-(δ/2)√|λn|)`; every `|f̂(λ)|`
    /// stays below it on the audited range.
    pub fn decay_bound(&self, lambda: f64) -> f64 {
        16.0 * self.fourier_zero() * (-(self.spec.delta / 2.0) * (lambda * self.spec.n).abs().sqrt()).exp()
    }

    /// Cheap upper bound on `|f̂(λ)|`, monotone for large `|λ|`;
    /// used to truncate frequency sums.
    fn fourier_envelope(&self, lambda: f64) -> f64 {
        let base = self.b - self.a;
        let l = lambda.abs();
        let box_factor = (PI * l * self.w).recip().min(1.0);
        base * (PI * l * base).recip().min(1.0) * box_factor.powi(FACTORS as i32)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.spec.m, self.spec.m + self.spec.n)
    }
}

/// Both sides of `Σ_n f(t + nT) = (1/T) Σ_m f̂(m/T) e(mt/T)` and their
/// absolute difference. The frequency sum is truncated once the sinc
/// envelope falls below `1e-16 f̂(0)` in its monotone range.
pub fn poisson_check(f: &BumpFunction, big_t: f64, t: f64) -> Result<(f64, f64, f64)> {
    if big_t <= 0.0 || !big_t.is_finite() || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "period must be positive and finite, got T={big_t}, t={t}"
        )));
    }
    let (lo, hi) = f.support();
    let n_lo = ((lo - t) / big_t).floor() as i64;
    let n_hi = ((hi - t) / big_t).ceil() as i64;
    let mut lhs = 0.0;
    for k in n_lo..=n_hi {
        lhs += f.eval(t + k as f64 * big_t);
    }

    let cutoff = 1e-16 * f.fourier_zero();
    let mut rhs = f.fourier_zero();
    let mut m = 1u64;
    loop {
        let lambda = m as f64 / big_t;
        let term = f.fourier(lambda) * Complex64::from_polar(1.0, 2.0 * PI * lambda * t);
        rhs += 2.0 * term.re; // -m contributes the conjugate
        // past the first box zero the envelope decreases in m
        if PI * lambda * f.w >= 2.0 && f.fourier_envelope(lambda) < cutoff {
            break;
        }
        m += 1;
        if m > 100_000_000 {
            return Err(Error::BudgetExceeded {
                what: "frequency sum truncation",
                needed: m as u128,
                limit: 100_000_000,
            });
        }
    }
    rhs /= big_t;
    Ok((lhs, rhs, (lhs - rhs).abs()))
}
