//! The Cayley dictionary between discrete (disk) and continuous (half
//! plane) realizations, `Θ_c(s) = Θ_d(ζ(s))` with `ζ(s) = (1 - s)/(1 + s)`.
//!
//! Stable unitary realizations map to stable dissipative ones and back.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{self, identity, real};
use crate::realization::{Flavor, Realization};

/// Discrete to continuous:
/// `A_c = (A_d - I)(I + A_d)^{-1}`, `B_c = √2 (I + A_d)^{-1} B_d`,
/// `C_c = √2 C_d (I + A_d)^{-1}`, `D_c = D_d - C_d (I + A_d)^{-1} B_d`.
pub fn d2c(r: &Realization) -> Result<Realization> {
    if r.flavor() != Flavor::Discrete {
        return Err(Error::FlavorMismatch { expected: Flavor::Discrete, found: r.flavor() });
    }
    let n = r.state_dim();
    let inv = linalg::inverse(&(identity(n) + r.a()), "I + A_d")?;
    let a = (r.a() - identity(n)) * &inv;
    let b = &inv * r.b() * real(SQRT_2);
    let c = r.c() * &inv * real(SQRT_2);
    let d = r.d() - r.c() * &inv * r.b();
    Realization::continuous(a, b, c, d)
}

/// Continuous to discrete:
/// `A_d = (I - A_c)^{-1}(A_c + I)`, `B_d = √2 (I - A_c)^{-1} B_c`,
/// `C_d = √2 C_c (I - A_c)^{-1}`, `D_d = D_c + C_c (I - A_c)^{-1} B_c`.
pub fn c2d(r: &Realization) -> Result<Realization> {
    if r.flavor() != Flavor::Continuous {
        return Err(Error::FlavorMismatch { expected: Flavor::Continuous, found: r.flavor() });
    }
    let n = r.state_dim();
    let inv = linalg::inverse(&(identity(n) - r.a()), "I - A_c")?;
    let a = (identity(n) + r.a()) * &inv;
    let b = &inv * r.b() * real(SQRT_2);
    let c = r.c() * &inv * real(SQRT_2);
    let d = r.d() + r.c() * &inv * r.b();
    Realization::discrete(a, b, c, d)
}
