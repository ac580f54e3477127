//! Semicircle and Marchenko-Pastur limit laws.
//!
//! The semicircle law on `[−1, 1]` has density `(2/π)√(1−x²)`; its even
//! moments are `C_{s/2} / 2^s` with `C_k` the Catalan numbers. The MP law
//! with ratio `γ ∈ (0, 1]` lives on `[(1−√γ)², (1+√γ)²]` and its moments are
//! the Narayana polynomials `Σ_{k=1}^{s} γ^{k−1} N(s, k)`,
//! `N(s, k) = C(s, k)·C(s, k−1)/s`.
//!
//! The MP cdf is integrated numerically after the substitution
//! `x = c + h·cos θ`, which turns the square-root edges into a smooth
//! integrand on `[0, π]`.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::quad::integrate;
use crate::{Error, Result};

/// Panels of the cached MP cdf table.
const MP_PANELS: usize = 64;
const MP_TOL: f64 = 1e-13;

pub fn semicircle_pdf(x: f64) -> f64 {
    if x.abs() > 1.0 {
        0.0
    } else {
        2.0 / PI * (1.0 - x * x).sqrt()
    }
}

pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else if x == 0.0 {
        0.5
    } else {
        (0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / PI).clamp(0.0, 1.0)
    }
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn catalan(k: u64) -> BigUint {
    binomial(2 * k, k) / (k + 1)
}

/// `N(s, k) = C(s, k)·C(s, k−1)/s`.
pub fn narayana(s: u64, k: u64) -> BigUint {
    if s == 0 || k == 0 || k > s {
        return BigUint::zero();
    }
    binomial(s, k) * binomial(s, k - 1) / s
}

/// Exact `s`-th semicircle moment.
pub fn semicircle_moment(s: u64) -> BigRational {
    if s % 2 == 1 {
        return BigRational::zero();
    }
    let num = catalan(s / 2);
    BigRational::new(num.into(), (BigUint::one() << s as usize).into())
}

/// Exact `s`-th MP moment for a rational ratio.
pub fn mp_moment(s: u64, gamma: &BigRational) -> BigRational {
    if s == 0 {
        return BigRational::one();
    }
    let mut acc = BigRational::zero();
    let mut power = BigRational::one();
    for k in 1..=s {
        acc += &power * BigRational::from_integer(narayana(s, k).into());
        power *= gamma;
    }
    acc
}

/// Converts a finite float exactly to a rational.
pub fn rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::invalid(format!("{x} is not finite")))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("γ = {gamma} outside (0, 1]")))
    }
}

/// MP support `(a, b)`.
pub fn mp_support(gamma: f64) -> (f64, f64) {
    let s = gamma.sqrt();
    ((1.0 - s).powi(2), (1.0 + s).powi(2))
}

pub fn mp_pdf(x: f64, gamma: f64) -> f64 {
    let (a, b) = mp_support(gamma);
    if x < a || x > b || x <= 0.0 {
        return 0.0;
    }
    ((b - x) * (x - a)).sqrt() / (2.0 * PI * gamma * x)
}

pub fn mp_cdf(x: f64, gamma: f64) -> Result<f64> {
    Ok(MpLaw::new(gamma)?.cdf(x))
}

/// Marchenko-Pastur law with a cached cdf table.
#[derive(Clone, Debug)]
pub struct MpLaw {
    gamma: f64,
    a: f64,
    half_width: f64,
    /// `prefix[j] = ∫_{θ_j}^{π} g`, with `θ_j = jπ/P`; `prefix[0]` is the total mass.
    prefix: Vec<f64>,
}

impl MpLaw {
    pub fn new(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let (a, _) = mp_support(gamma);
        let mut law = Self {
            gamma,
            a,
            half_width: 2.0 * gamma.sqrt(),
            prefix: vec![0.0; MP_PANELS + 1],
        };
        for j in (0..MP_PANELS).rev() {
            let (lo, hi) = (theta_at(j), theta_at(j + 1));
            law.prefix[j] = law.prefix[j + 1] + integrate(|t| law.integrand(t), lo, hi, MP_TOL)?;
        }
        Ok(law)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn support(&self) -> (f64, f64) {
        mp_support(self.gamma)
    }

    /// Density in θ: `h² sin²θ / (2πγ x(θ))`, with `x` and `sin θ` written
    /// in half-angle form to avoid cancellation at the edges.
    fn integrand(&self, theta: f64) -> f64 {
        let (s, c) = (0.5 * theta).sin_cos();
        let h = self.half_width;
        let x = self.a + 2.0 * h * c * c;
        let sin_theta = 2.0 * s * c;
        h * h * sin_theta * sin_theta / (2.0 * PI * self.gamma * x)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        mp_pdf(x, self.gamma)
    }

    /// Monotone by construction: panel prefixes bracket every value.
    pub fn cdf(&self, x: f64) -> f64 {
        let (a, b) = self.support();
        if x <= a {
            return 0.0;
        }
        if x >= b {
            return 1.0;
        }
        let cos_t = ((x - (a + b) / 2.0) / self.half_width).clamp(-1.0, 1.0);
        let theta = cos_t.acos();
        let j = ((theta / PI * MP_PANELS as f64) as usize).min(MP_PANELS - 1);
        let hi = theta_at(j + 1);
        // The integrand is smooth and positive, so a failed refinement only
        // happens on a sub-ulp interval; fall back to the panel bound.
        let partial = integrate(|t| self.integrand(t), theta, hi, MP_TOL).unwrap_or(0.0);
        let panel = self.prefix[j] - self.prefix[j + 1];
        (self.prefix[j + 1] + partial.clamp(0.0, panel)).clamp(0.0, 1.0)
    }

    pub fn moment(&self, s: u64) -> f64 {
        match rational(self.gamma) {
            Ok(g) => to_f64(&mp_moment(s, &g)),
            Err(_) => f64::NAN,
        }
    }
}

fn theta_at(j: usize) -> f64 {
    PI * j as f64 / MP_PANELS as f64
}

/// A limiting spectral law.
#[derive(Clone, Debug)]
pub enum LimitLaw {
    Semicircle,
    MarchenkoPastur(MpLaw),
}

/// Serializable description of a [`LimitLaw`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LawKind {
    Semicircle,
    MarchenkoPastur { gamma: f64 },
}

impl LimitLaw {
    pub fn marchenko_pastur(gamma: f64) -> Result<Self> {
        Ok(Self::MarchenkoPastur(MpLaw::new(gamma)?))
    }

    pub fn kind(&self) -> LawKind {
        match self {
            Self::Semicircle => LawKind::Semicircle,
            Self::MarchenkoPastur(l) => LawKind::MarchenkoPastur { gamma: l.gamma },
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Semicircle => (-1.0, 1.0),
            Self::MarchenkoPastur(l) => l.support(),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Self::Semicircle => semicircle_pdf(x),
            Self::MarchenkoPastur(l) => l.pdf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Semicircle => semicircle_cdf(x),
            Self::MarchenkoPastur(l) => l.cdf(x),
        }
    }

    pub fn moment(&self, s: u64) -> f64 {
        match self {
            Self::Semicircle => to_f64(&semicircle_moment(s)),
            Self::MarchenkoPastur(l) => l.moment(s),
        }
    }

    /// `(x, pdf, cdf)` on `points` equispaced abscissae over the support.
    pub fn curve(&self, points: usize) -> Vec<(f64, f64, f64)> {
        let (a, b) = self.support();
        let last = points.saturating_sub(1).max(1) as f64;
        (0..points)
            .map(|i| {
                let x = a + (b - a) * i as f64 / last;
                (x, self.pdf(x), self.cdf(x))
            })
            .collect()
    }
}
