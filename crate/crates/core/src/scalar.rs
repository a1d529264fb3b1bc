use std::fmt::{Debug, Display, LowerExp};

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar the toolkit is generic over: `f32` or `f64`.
///
/// Complex entries are `Complex<R>`; nalgebra's `RealField` supplies the
/// transcendental functions and the Hermitian eigensolver.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + Debug + Display + LowerExp
{
    /// Converts an `f64` literal or tolerance into this scalar.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub type C<R> = Complex<R>;

#[inline]
pub(crate) fn cplx<R: Scalar>(re: R, im: R) -> C<R> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn real<R: Scalar>(re: R) -> C<R> {
    Complex::new(re, R::zero())
}
