use crate::scalar::Scalar;

/// Wraps an angle into the half-open interval `[-pi, pi)`.
pub fn wrap_angle<T: Scalar>(theta: T) -> T {
    let pi = T::PI();
    let two_pi = pi + pi;
    let mut r = theta - two_pi * ((theta + pi) / two_pi).floor();
    // floor() can leave the result a rounding step outside the interval
    if r >= pi {
        r = r - two_pi;
    }
    if r < -pi {
        r = r + two_pi;
    }
    r
}
