//! Standard-normal kernel: density, survival function, inverse survival and
//! Mills ratio.
//!
//! The survival function and Mills ratio are evaluated through the
//! complementary error function and its scaled form
//! `erfcx(x) = exp(x²)·erfc(x)`, both using W. J. Cody's rational Chebyshev
//! approximations (CALERF). Working through `erfcx` keeps the Mills ratio
//! free of 0/0 cancellation long after `Φ̄(c)` and `φ(c)` underflow on
//! their own.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

/// 1/√(2π)
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const INV_SQRT_PI: f64 = 0.564_189_583_547_756_3;
/// √(π/2)
const SQRT_HALF_PI: f64 = 1.253_314_137_315_500_3;

const INV_SURVIVAL_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GaussianError {
    #[error("z-score must be finite, got {0}")]
    NonFinite(f64),
    #[error("probability must lie strictly inside (0, 1), got {0}")]
    ProbabilityOutOfRange(f64),
}

/// A finite standard-normal coordinate.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ZScore(f64);

impl ZScore {
    pub fn new(value: f64) -> Result<Self, GaussianError> {
        if value.is_finite() {
            Ok(Self(value))
        } else {
            Err(GaussianError::NonFinite(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ZScore {
    type Error = GaussianError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<ZScore> for f64 {
    fn from(z: ZScore) -> Self {
        z.0
    }
}

/// Standard normal density φ(z).
pub fn pdf(z: ZScore) -> f64 {
    pdf_raw(z.0)
}

/// Survival function Φ̄(z) = P(Z > z).
pub fn survival(z: ZScore) -> f64 {
    survival_raw(z.0)
}

/// Mills ratio Φ̄(c)/φ(c).
pub fn mills_ratio(c: ZScore) -> f64 {
    mills_ratio_raw(c.0)
}

/// Inverse of the survival function: the `z` with `Φ̄(z) = p`.
///
/// Newton iterations on `Φ̄(z) − p` inside a shrinking bracket; any step
/// that leaves the bracket is replaced by bisection.
pub fn inv_survival(p: f64) -> Result<ZScore, GaussianError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(GaussianError::ProbabilityOutOfRange(p));
    }
    if p == 0.5 {
        return Ok(ZScore(0.0));
    }
    let mut lo = -40.0_f64;
    let mut hi = 40.0_f64;
    let mut z = initial_quantile_guess(p);
    for _ in 0..INV_SURVIVAL_MAX_ITER {
        let f = survival_raw(z) - p;
        if f == 0.0 {
            break;
        }
        // Φ̄ is decreasing: a positive residual means z is too small.
        if f > 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let density = pdf_raw(z);
        let newton = z + f / density;
        let next = if density > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - z).abs();
        z = next;
        if step <= 1e-15 * (1.0 + z.abs()) {
            break;
        }
    }
    Ok(ZScore(z))
}

/// Abramowitz & Stegun 26.2.23, absolute error below 4.5e-4.
fn initial_quantile_guess(p: f64) -> f64 {
    let (q, sign) = if p < 0.5 { (p, 1.0) } else { (1.0 - p, -1.0) };
    let t = (-2.0 * q.ln()).sqrt();
    let num = 2.515_517 + t * (0.802_853 + t * 0.010_328);
    let den = 1.0 + t * (1.432_788 + t * (0.189_269 + t * 0.001_308));
    sign * (t - num / den)
}

pub(crate) fn pdf_raw(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

pub(crate) fn survival_raw(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

pub(crate) fn mills_ratio_raw(c: f64) -> f64 {
    SQRT_HALF_PI * erfcx(c * FRAC_1_SQRT_2)
}

// Cody's coefficients. A/B: erf on |x| <= 0.46875; C/D: erfc on
// (0.46875, 4]; P/Q: erfc asymptotic form on (4, ∞).
const A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_16,
    377.485_237_685_302_02,
    3_209.377_589_138_469_5,
    0.185_777_706_184_603_15,
];
const B: [f64; 4] = [
    23.601_290_952_344_12,
    244.024_637_934_444_17,
    1_282.616_526_077_372_3,
    2_844.236_833_439_170_6,
];
const C: [f64; 9] = [
    0.564_188_496_988_670_1,
    8.883_149_794_388_376,
    66.119_190_637_141_63,
    298.635_138_197_400_1,
    881.952_221_241_769_1,
    1_712.047_612_634_070_6,
    2_051.078_377_826_071_5,
    1_230.339_354_797_997_2,
    2.153_115_354_744_038_5e-8,
];
const D: [f64; 8] = [
    15.744_926_110_709_835,
    117.693_950_891_312_5,
    537.181_101_862_009_9,
    1_621.389_574_566_690_2,
    3_290.799_235_733_459_7,
    4_362.619_090_143_247,
    3_439.367_674_143_721_6,
    1_230.339_354_803_749_4,
];
const P: [f64; 6] = [
    0.305_326_634_961_232_36,
    0.360_344_899_949_804_45,
    0.125_781_726_111_229_26,
    0.016_083_785_148_742_275,
    6.587_491_615_298_378e-4,
    0.016_315_387_137_302_097,
];
const Q: [f64; 5] = [
    2.568_520_192_289_822,
    1.872_952_849_923_460_4,
    0.527_905_102_951_428_4,
    0.060_518_341_312_441_32,
    0.002_335_204_976_268_691_8,
];

const SMALL_ARG: f64 = 0.46875;
const ERFC_UNDERFLOW: f64 = 26.543;
const ERFCX_OVERFLOW_NEG: f64 = -26.628_735_713_751_4;

fn erf_small(z: f64) -> f64 {
    ((((A[4] * z + A[0]) * z + A[1]) * z + A[2]) * z + A[3])
        / ((((z + B[0]) * z + B[1]) * z + B[2]) * z + B[3])
}

fn erfcx_mid(y: f64) -> f64 {
    let mut num = C[8] * y;
    let mut den = y;
    for i in 0..7 {
        num = (num + C[i]) * y;
        den = (den + D[i]) * y;
    }
    (num + C[7]) / (den + D[7])
}

fn erfcx_tail(y: f64) -> f64 {
    let z = 1.0 / (y * y);
    let mut num = P[5] * z;
    let mut den = z;
    for i in 0..4 {
        num = (num + P[i]) * z;
        den = (den + Q[i]) * z;
    }
    let r = z * (num + P[4]) / (den + Q[4]);
    (INV_SQRT_PI - r) / y
}

/// exp(−y²) with the argument split at a multiple of 1/16 so the rounding
/// error of y² is not amplified.
fn exp_neg_square(y: f64) -> f64 {
    let head = (y * 16.0).trunc() / 16.0;
    let del = (y - head) * (y + head);
    (-head * head).exp() * (-del).exp()
}

fn exp_pos_square(y: f64) -> f64 {
    let head = (y * 16.0).trunc() / 16.0;
    let del = (y - head) * (y + head);
    (head * head).exp() * del.exp()
}

/// erfcx(|x|) for |x| above the small-argument threshold.
fn erfcx_abs(y: f64) -> f64 {
    if y <= 4.0 {
        erfcx_mid(y)
    } else {
        erfcx_tail(y)
    }
}

pub(crate) fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= SMALL_ARG {
        return 1.0 - x * erf_small(y * y);
    }
    let tail = if y >= ERFC_UNDERFLOW {
        0.0
    } else {
        erfcx_abs(y) * exp_neg_square(y)
    };
    if x < 0.0 {
        2.0 - tail
    } else {
        tail
    }
}

pub(crate) fn erfcx(x: f64) -> f64 {
    let y = x.abs();
    if y <= SMALL_ARG {
        let z = y * y;
        return z.exp() * (1.0 - x * erf_small(z));
    }
    if x < ERFCX_OVERFLOW_NEG {
        return f64::INFINITY;
    }
    let r = erfcx_abs(y);
    if x < 0.0 {
        2.0 * exp_pos_square(y) - r
    } else {
        r
    }
}
