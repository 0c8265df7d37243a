use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type the model, trainer, and metrics are written against.
///
/// Implemented for `f32` and `f64`. Hyperparameters are carried as `f64`
/// and converted with [`Scalar::of`].
pub trait Scalar:
    'static
    + Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
{
    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }

    #[inline]
    fn of_count(n: u32) -> Self {
        Self::from_u32(n).expect("count is representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Norms below this are treated as zero by [`crate::cosine`].
pub const NORM_FLOOR: f64 = 1e-12;

pub(crate) fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    u.iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

pub(crate) fn norm<T: Scalar>(u: &[T]) -> T {
    dot(u, u).sqrt()
}
