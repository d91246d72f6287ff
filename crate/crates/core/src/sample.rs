//! Random instances for property sweeps. Every generator draws from a
//! caller-supplied [`Rng`], so a seeded generator reproduces a run.

use num_complex::Complex64;
use rand::Rng;

use crate::blaschke::{blaschke_realization, BlaschkeSpec, Polynomial};
use crate::error::Result;
use crate::linalg::{self, identity, CMatrix};
use crate::realization::{cascade, direct_sum, unitary_twist, Flavor, Realization, Side, SymbolPair};

pub fn complex_in_box<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

pub fn unimodular<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// Pole with real part in `[-3, -0.1]` and imaginary part in `[-3, 3]`.
pub fn pole<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-3.0..=-0.1), rng.gen_range(-3.0..=3.0))
}

pub fn blaschke_spec<R: Rng + ?Sized>(rng: &mut R, degree: usize) -> BlaschkeSpec {
    let poles = (0..degree).map(|_| pole(rng)).collect();
    BlaschkeSpec::new(unimodular(rng), poles).expect("generated spec is valid")
}

/// Point in the open right half plane away from the axis.
pub fn right_half_point<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(0.1..=3.0), rng.gen_range(-3.0..=3.0))
}

/// Unitary factor of the QR decomposition of a random matrix, with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let m = CMatrix::from_fn(n, n, |_, _| complex_in_box(rng));
    let qr = m.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Hurwitz matrix: a random matrix shifted left past its spectral abscissa.
pub fn hurwitz<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let m = CMatrix::from_fn(n, n, |_, _| complex_in_box(rng) * 2.0);
    let abscissa = linalg::eigenvalues(&m).iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let shift = abscissa.max(0.0) + rng.gen_range(0.2..=1.5);
    m - identity(n) * linalg::real(shift)
}

/// Matrix with spectral radius below one.
pub fn schur_stable<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let m = CMatrix::from_fn(n, n, |_, _| complex_in_box(rng));
    let rho = linalg::spectral_radius(&m);
    let target = rng.gen_range(0.1..=0.9);
    if rho > 0.0 {
        m * linalg::real(target / rho)
    } else {
        m
    }
}

/// `(A, C)` with `A` Hurwitz and `A + A* = -C*C`, `C` a single row, in a
/// random orthonormal basis.
pub fn rank_one_dissipative<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<(CMatrix, CMatrix)> {
    let r = blaschke_realization(&blaschke_spec(rng, n))?;
    let t = unitary(rng, n);
    let a = t.adjoint() * r.a() * &t;
    let c = r.c() * &t;
    Ok((a, c))
}

/// Diagonal inner function `diag(b_1, ..., b_m)`; each entry has degree
/// `0..=max_degree`.
pub fn diagonal_inner<R: Rng + ?Sized>(rng: &mut R, size: usize, max_degree: usize) -> Result<Realization> {
    let mut acc = Realization::constant(identity(0), Flavor::Continuous)?;
    for _ in 0..size {
        let degree = rng.gen_range(0..=max_degree);
        acc = direct_sum(&acc, &blaschke_realization(&blaschke_spec(rng, degree))?)?;
    }
    Ok(acc)
}

/// `U_0 D_1 U_1 ... D_k U_k` with random unitaries `U_j` and diagonal
/// inner factors `D_j`.
pub fn inner<R: Rng + ?Sized>(rng: &mut R, size: usize, factors: usize, max_degree: usize) -> Result<Realization> {
    let mut acc = Realization::constant(unitary(rng, size), Flavor::Continuous)?;
    for _ in 0..factors {
        let d = diagonal_inner(rng, size, max_degree)?;
        let twisted = unitary_twist(&d, &unitary(rng, size), Side::Left)?;
        acc = cascade(&twisted, &acc)?;
    }
    Ok(acc)
}

/// Random pair of bi-inner factors of size `1..=max_size`.
pub fn symbol_pair<R: Rng + ?Sized>(rng: &mut R, max_size: usize, max_degree: usize) -> Result<SymbolPair> {
    let size = rng.gen_range(1..=max_size);
    let fv = rng.gen_range(1..=2);
    let fw = rng.gen_range(1..=2);
    let v = inner(rng, size, fv, max_degree)?;
    let w = inner(rng, size, fw, max_degree)?;
    SymbolPair::new(v, w)
}

/// Integer power list of length `1..=max_len` with entries in `-bound..=bound`.
pub fn power_list<R: Rng + ?Sized>(rng: &mut R, max_len: usize, bound: i32) -> Vec<i32> {
    let len = rng.gen_range(1..=max_len);
    (0..len).map(|_| rng.gen_range(-bound..=bound)).collect()
}

/// Polynomial of the given degree with coefficients in the complex unit box.
/// Half the draws come from random roots (rescaled into the box), so that
/// stable polynomials are well represented. Roots with `|Re| < margin` are
/// rejected.
pub fn polynomial<R: Rng + ?Sized>(rng: &mut R, degree: usize, margin: f64) -> Polynomial {
    loop {
        let p = if rng.gen_bool(0.5) {
            let coeffs: Vec<Complex64> = (0..=degree).map(|_| complex_in_box(rng)).collect();
            match Polynomial::new(coeffs) {
                Ok(p) => p,
                Err(_) => continue,
            }
        } else {
            let roots: Vec<Complex64> = (0..degree)
                .map(|_| Complex64::new(rng.gen_range(-1.5..=1.0), rng.gen_range(-1.5..=1.5)))
                .collect();
            let u = unimodular(rng);
            let rotated: Vec<Complex64> = Polynomial::from_roots(&roots).coeffs().iter().map(|c| c * u).collect();
            let scale = rotated.iter().map(|c| c.re.abs().max(c.im.abs())).fold(0.0, f64::max);
            let factor = rng.gen_range(0.1..=1.0) / scale;
            match Polynomial::new(rotated.iter().map(|c| c * factor).collect()) {
                Ok(p) => p,
                Err(_) => continue,
            }
        };
        if crate::oracle::roots(&p).iter().all(|r| r.re.abs() >= margin) {
            return p;
        }
    }
}
