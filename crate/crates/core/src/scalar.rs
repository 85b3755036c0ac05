//! Scalar abstractions shared by the linear-algebra layer.
//!
//! [`Real`] covers the floating-point types used for rotations and
//! covariance matrices; [`Scalar`] extends that to complex entries so the
//! same matrix and Pfaffian code runs on `f32`, `f64`, `Complex<f32>` and
//! `Complex<f64>`.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, One, Zero};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::Neg;

/// A real floating-point type.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
    + Scalar<Real = Self>
{
    /// Lossy conversion from `f64`; used for literals and tolerances.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon scaled to a reasonable default tolerance.
    fn default_tolerance() -> Self;
}

impl Real for f32 {
    fn default_tolerance() -> Self {
        1e-4
    }
}

impl Real for f64 {
    fn default_tolerance() -> Self {
        1e-10
    }
}

/// A real or complex matrix entry.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Zero
    + One
    + NumAssign
    + Neg<Output = Self>
    + Sum
    + Send
    + Sync
    + 'static
{
    type Real: Real;

    fn from_real(r: Self::Real) -> Self;
    fn re(self) -> Self::Real;
    fn conj(self) -> Self;
    /// Magnitude `|z|`.
    fn modulus(self) -> Self::Real;
    fn into_complex(self) -> Complex<Self::Real>;
    /// Real types keep only the real part.
    fn from_complex(z: Complex<Self::Real>) -> Self;
    fn is_complex() -> bool;
}

macro_rules! impl_real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;

            #[inline]
            fn from_real(r: $t) -> Self {
                r
            }
            #[inline]
            fn re(self) -> $t {
                self
            }
            #[inline]
            fn conj(self) -> Self {
                self
            }
            #[inline]
            fn modulus(self) -> $t {
                self.abs()
            }
            #[inline]
            fn into_complex(self) -> Complex<$t> {
                Complex::new(self, 0.0)
            }
            #[inline]
            fn from_complex(z: Complex<$t>) -> Self {
                z.re
            }
            fn is_complex() -> bool {
                false
            }
        }
    };
}

impl_real_scalar!(f32);
impl_real_scalar!(f64);

impl<T: Real> Scalar for Complex<T> {
    type Real = T;

    #[inline]
    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }
    #[inline]
    fn re(self) -> T {
        self.re
    }
    #[inline]
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    #[inline]
    fn modulus(self) -> T {
        self.norm()
    }
    #[inline]
    fn into_complex(self) -> Complex<T> {
        self
    }
    #[inline]
    fn from_complex(z: Complex<T>) -> Self {
        z
    }
    fn is_complex() -> bool {
        true
    }
}

/// `i^k` for integer `k`.
pub fn i_pow<T: Real>(k: i64) -> Complex<T> {
    match k.rem_euclid(4) {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}
