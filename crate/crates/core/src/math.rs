//! Elementary functions: the platform's with `std`, `libm` otherwise.
//! Results may differ in the last bit between the two builds.

#[cfg(any(feature = "std", test))]
mod imp {
    #[inline]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }

    #[inline]
    pub fn tanh(x: f64) -> f64 {
        x.tanh()
    }
}

#[cfg(not(any(feature = "std", test)))]
mod imp {
    #[inline]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }

    #[inline]
    pub fn tanh(x: f64) -> f64 {
        libm::tanh(x)
    }
}

pub(crate) use imp::{exp, tanh};
