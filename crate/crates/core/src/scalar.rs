use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating-point type the numerical kernels are written against.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Send
    + Sync
    + FftNum
    + Field<Real = Self>
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Converts a count or index.
    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Entry type for vectors and matrices: either a real scalar or a complex one.
pub trait Field:
    Copy + NumAssign + Neg<Output = Self> + Debug + Sum + Send + Sync + 'static
{
    type Real: Real;
    const IS_COMPLEX: bool;

    fn from_real(r: Self::Real) -> Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> Self::Real;
    fn re(self) -> Self::Real;
    fn im(self) -> Self::Real;
    fn to_complex(self) -> Complex<Self::Real>;
    /// `None` when the value has a nonzero imaginary part and `Self` is real.
    fn from_complex(c: Complex<Self::Real>) -> Option<Self>;

    fn modulus(self) -> Self::Real {
        self.norm_sqr().sqrt()
    }

    fn scale(self, r: Self::Real) -> Self {
        self * Self::from_real(r)
    }
}

macro_rules! real_field {
    ($t:ty) => {
        impl Field for $t {
            type Real = $t;
            const IS_COMPLEX: bool = false;
            #[inline]
            fn from_real(r: $t) -> $t {
                r
            }
            #[inline]
            fn conj(self) -> $t {
                self
            }
            #[inline]
            fn norm_sqr(self) -> $t {
                self * self
            }
            #[inline]
            fn re(self) -> $t {
                self
            }
            #[inline]
            fn im(self) -> $t {
                0.0
            }
            #[inline]
            fn to_complex(self) -> Complex<$t> {
                Complex::new(self, 0.0)
            }
            #[inline]
            fn from_complex(c: Complex<$t>) -> Option<$t> {
                (c.im == 0.0).then_some(c.re)
            }
        }
    };
}

real_field!(f32);
real_field!(f64);

impl<T: Real> Field for Complex<T> {
    type Real = T;
    const IS_COMPLEX: bool = true;
    #[inline]
    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }
    #[inline]
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    #[inline]
    fn norm_sqr(self) -> T {
        Complex::norm_sqr(&self)
    }
    #[inline]
    fn re(self) -> T {
        self.re
    }
    #[inline]
    fn im(self) -> T {
        self.im
    }
    #[inline]
    fn to_complex(self) -> Complex<T> {
        self
    }
    #[inline]
    fn from_complex(c: Complex<T>) -> Option<Self> {
        Some(c)
    }
}

/// Signed power `|x|^p` evaluated without a sign branch at the call site.
#[inline]
pub fn abs_pow<T: Real>(x: T, p: T) -> T {
    x.abs().powf(p)
}
