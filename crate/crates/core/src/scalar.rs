//! Scalar abstraction used throughout the crate.
//!
//! Energies are carried as exact integer pairs and only *realized* as a scalar
//! when a field strength `h` is supplied. Anything that only needs ordered
//! field arithmetic (energy realization, the barrier profile, admissibility
//! margins) is generic over [`Field`], which includes the exact
//! [`Rational`] type. The dynamics need transcendental functions and are
//! generic over [`Real`] (`f32`, `f64`, [`DoubleDouble`]).

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};

pub use crate::double_double::DoubleDouble;

/// Exact rational scalar.
pub type Rational = Ratio<i64>;

/// Ordered field with floor/ceil, enough to realize energies and evaluate the
/// barrier formulas.
pub trait Field:
    Copy
    + PartialOrd
    + Debug
    + Display
    + Num
    + Neg<Output = Self>
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    fn from_int(v: i64) -> Self;

    fn floor(self) -> Self;

    fn ceil(self) -> Self;

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }

    /// Nearest integer, halves rounded up.
    fn round_half_up(self) -> Self {
        (self + Self::from_int(1) / Self::from_int(2)).floor()
    }

    fn floor_int(self) -> i64 {
        self.floor().to_f64().unwrap_or(f64::NAN) as i64
    }

    fn ceil_int(self) -> i64 {
        self.ceil().to_f64().unwrap_or(f64::NAN) as i64
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `2^e` for a (possibly negative) integer exponent.
    fn pow2(e: i64) -> Self {
        let two = Self::from_int(2);
        let mut acc = Self::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc * two;
        }
        if e < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }
}

/// Field with the transcendental functions needed by the dynamics.
pub trait Real: Field {
    fn exp(self) -> Self;

    fn ln(self) -> Self;

    fn sqrt(self) -> Self;

    fn epsilon() -> Self;

    fn from_float(v: f64) -> Self;

    fn to_double_double(self) -> DoubleDouble {
        DoubleDouble::from(self.as_f64())
    }

    /// Nearest value of `Self`.
    fn from_double_double(x: DoubleDouble) -> Self {
        Self::from_float(x.hi())
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Field for $t {
            fn from_int(v: i64) -> Self {
                v as $t
            }
            fn floor(self) -> Self {
                <$t>::floor(self)
            }
            fn ceil(self) -> Self {
                <$t>::ceil(self)
            }
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            fn pow2(e: i64) -> Self {
                (2.0 as $t).powi(e as i32)
            }
        }

        impl Real for $t {
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            fn epsilon() -> Self {
                <$t>::EPSILON
            }
            fn from_float(v: f64) -> Self {
                v as $t
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Field for Rational {
    fn from_int(v: i64) -> Self {
        Ratio::from_integer(v)
    }
    fn floor(self) -> Self {
        Ratio::floor(&self)
    }
    fn ceil(self) -> Self {
        Ratio::ceil(&self)
    }
    fn floor_int(self) -> i64 {
        Ratio::floor(&self).to_integer()
    }
    fn ceil_int(self) -> i64 {
        Ratio::ceil(&self).to_integer()
    }
}

impl Field for DoubleDouble {
    fn from_int(v: i64) -> Self {
        DoubleDouble::from_i64_exact(v)
    }
    fn floor(self) -> Self {
        DoubleDouble::floor(self)
    }
    fn ceil(self) -> Self {
        DoubleDouble::ceil(self)
    }
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
}

impl Real for DoubleDouble {
    fn exp(self) -> Self {
        DoubleDouble::exp(self)
    }
    fn ln(self) -> Self {
        DoubleDouble::ln(self)
    }
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn epsilon() -> Self {
        DoubleDouble::EPSILON
    }
    fn from_float(v: f64) -> Self {
        DoubleDouble::from(v)
    }
    fn to_double_double(self) -> DoubleDouble {
        self
    }
    fn from_double_double(x: DoubleDouble) -> Self {
        x
    }
}
