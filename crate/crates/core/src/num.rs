//! Scalar abstraction shared by every module.
//!
//! All geometry, calculus and spectral code is written against [`Real`], which
//! gathers the num-traits conversions we need with nalgebra's `RealField` (so the
//! same scalar drives the dense linear algebra). `f64` is the working precision
//! for constant estimation; `f32` is supported for the geometric and calculus
//! layers.

use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    nalgebra::RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon of the concrete type.
    fn eps() -> Self;
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub(crate) fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Serde adapter for values that may be infinite: JSON has no infinity, so
/// non-finite values travel as the strings `"inf"`, `"-inf"` and `"nan"`.
pub mod extended {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Finite(f64),
        Special(String),
    }

    fn to_repr(v: f64) -> Repr {
        match v {
            v if v.is_finite() => Repr::Finite(v),
            v if v.is_nan() => Repr::Special("nan".into()),
            v if v > 0.0 => Repr::Special("inf".into()),
            _ => Repr::Special("-inf".into()),
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Finite(v) => Ok(v),
            Repr::Special(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("expected a number, found `{other}`"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    /// The same for a list of optional values.
    pub mod opt_vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Option<f64>], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(|x| x.map(to_repr)).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<f64>>, D::Error> {
            Vec::<Option<Repr>>::deserialize(d)?.into_iter().map(|x| x.map(from_repr).transpose()).collect()
        }
    }
}
