use nalgebra as na;
use num_complex::Complex;
use num_traits as nt;

/// Real scalar type the dense layer is generic over (`f32` or `f64`).
pub trait Real: na::RealField + nt::FloatConst + nt::FromPrimitive + Copy + Send + Sync {
    fn of(x: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(x).expect("finite literal")
    }

    fn to_f64(self) -> f64;
}

impl Real for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}

pub type C<R> = Complex<R>;

/// `exp(2πi k / m)`, with `k` reduced first so large exponents stay exact.
pub fn root_of_unity<R: Real>(k: i64, m: i64) -> C<R> {
    let k = k.rem_euclid(m);
    let theta = R::of(2.0 * std::f64::consts::PI * k as f64 / m as f64);
    C::new(theta.cos(), theta.sin())
}

pub fn cr<R: Real>(re: f64) -> C<R> {
    C::new(R::of(re), R::zero())
}
