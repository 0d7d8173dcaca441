//! Complex amplitudes and the squared-modulus probability rule.
//!
//! Amplitudes superpose additively; probabilities do not. The cross term
//! `2·Re(a·conj(b))` is what separates `|a + b|²` from `|a|² + |b|²`.

use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;

/// Dimensionless complex amplitude ψ.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Amplitude {
    pub re: f64,
    pub im: f64,
}

impl Amplitude {
    pub const ZERO: Amplitude = Amplitude { re: 0.0, im: 0.0 };
    pub const ONE: Amplitude = Amplitude { re: 1.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn born_probability(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn modulus(self) -> f64 {
        math::sqrt(self.born_probability())
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.re * s, self.im * s)
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// Argument in radians, in (-π, π].
    pub fn arg(self) -> f64 {
        libm::atan2(self.im, self.re)
    }
}

impl From<Complex64> for Amplitude {
    fn from(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }
}

impl From<Amplitude> for Complex64 {
    fn from(a: Amplitude) -> Self {
        Complex64::new(a.re, a.im)
    }
}

impl Add for Amplitude {
    type Output = Amplitude;
    fn add(self, rhs: Amplitude) -> Amplitude {
        Amplitude::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for Amplitude {
    type Output = Amplitude;
    fn sub(self, rhs: Amplitude) -> Amplitude {
        Amplitude::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Neg for Amplitude {
    type Output = Amplitude;
    fn neg(self) -> Amplitude {
        Amplitude::new(-self.re, -self.im)
    }
}

impl Mul for Amplitude {
    type Output = Amplitude;
    fn mul(self, rhs: Amplitude) -> Amplitude {
        Amplitude::new(self.re * rhs.re - self.im * rhs.im, self.re * rhs.im + self.im * rhs.re)
    }
}

/// `|ψ|²`, read as a probability density.
pub fn born_probability(psi: Amplitude) -> f64 {
    psi.born_probability()
}

pub fn superpose(a: Amplitude, b: Amplitude) -> Amplitude {
    a + b
}

/// Amplitude attached to a point: modulus `A(r)` and a winding `n` counted
/// in whole turns, so the phase factor is `e^{2πin}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSample {
    pub modulus: f64,
    pub winding: f64,
}

impl WaveSample {
    pub const fn new(modulus: f64, winding: f64) -> Self {
        Self { modulus, winding }
    }

    pub fn to_amplitude(self) -> Result<Amplitude> {
        phase_from_count(self)
    }
}

/// `e^{2πi·turns}`.
///
/// The winding is reduced to the nearest-integer remainder first, so integer
/// windings give exactly `1` and quarter turns land exactly on the axes.
pub fn unit_phase(turns: f64) -> Amplitude {
    let r = turns - math::round(turns);
    if r == 0.0 {
        Amplitude::ONE
    } else if r == 0.5 || r == -0.5 {
        Amplitude::new(-1.0, 0.0)
    } else if r == 0.25 {
        Amplitude::new(0.0, 1.0)
    } else if r == -0.25 {
        Amplitude::new(0.0, -1.0)
    } else {
        let (s, c) = math::sin_cos(math::TAU * r);
        Amplitude::new(c, s)
    }
}

/// `A·e^{2πin}`.
pub fn phase_from_count(sample: WaveSample) -> Result<Amplitude> {
    if sample.modulus < 0.0 || sample.modulus.is_nan() {
        return Err(Error::NegativeModulus(sample.modulus));
    }
    Ok(unit_phase(sample.winding).scale(sample.modulus))
}

/// Shifts the countable coordinate by `c`; only the phase moves.
pub fn shift_winding(sample: WaveSample, c: f64) -> WaveSample {
    WaveSample::new(sample.modulus, sample.winding + c)
}
