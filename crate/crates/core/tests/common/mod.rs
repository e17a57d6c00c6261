//! Oracles shared by the integration tests.
#![allow(dead_code)]

use mmcert::qnm::Meromorphic;
use mmcert::C64;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Least-squares fit of `y ≈ a x + b` over complex data.
pub fn complex_linear_fit(x: &[f64], y: &[C64]) -> (C64, C64) {
    let a = DMatrix::<C64>::from_fn(x.len(), 2, |i, j| if j == 0 { C64::new(x[i], 0.0) } else { C64::new(1.0, 0.0) });
    let b = DVector::from_column_slice(y);
    let sol = a.svd(true, true).solve(&b, 1e-14).expect("least squares");
    (sol[0], sol[1])
}

/// Fits `(A + B ω)/(ω − z)` to `excess`, a line whose strength varies
/// linearly across it, via the linear system `excess·ω = z·excess + a + b ω`.
/// Returns the fitted `(center, width) = (Re z, −2 Im z)`.
pub fn fit_line(omega: &[f64], excess: &[C64]) -> (f64, f64) {
    let n = omega.len();
    let a = DMatrix::<C64>::from_fn(n, 3, |i, j| match j {
        0 => excess[i],
        1 => C64::new(1.0, 0.0),
        _ => C64::new(omega[i], 0.0),
    });
    let rhs = DVector::from_iterator(n, (0..n).map(|i| excess[i] * omega[i]));
    let sol = a.svd(true, true).solve(&rhs, 1e-15).expect("least squares");
    let z = sol[0];
    (z.re, -2.0 * z.im)
}

/// `g† A⁻¹ g` through an explicit dense inverse.
pub fn dense_inverse_levshift(h: &DMatrix<C64>, g: &[C64], omega: C64) -> C64 {
    let n = h.nrows();
    let a = DMatrix::<C64>::identity(n, n) * omega - h;
    let inv = a.try_inverse().expect("invertible");
    let g = DVector::from_column_slice(g);
    (g.adjoint() * inv * g)[(0, 0)]
}

/// `Σ r_i/(z − p_i) + k`.
#[derive(Clone, Debug)]
pub struct Rational {
    pub poles: Vec<C64>,
    pub residues: Vec<C64>,
    pub constant: C64,
}

impl Meromorphic for Rational {
    fn value(&self, z: C64) -> mmcert::Result<C64> {
        Ok(self.poles.iter().zip(&self.residues).map(|(p, r)| r / (z - p)).sum::<C64>() + self.constant)
    }
}

/// Up to five simple poles in `(0.3, 9.7) × (−1.7, −0.05)`, pairwise more than 0.2 apart.
pub fn random_rational<R: Rng>(r: &mut R) -> Rational {
    let n = r.gen_range(1..=5);
    let mut poles: Vec<C64> = Vec::with_capacity(n);
    while poles.len() < n {
        let p = c(r.gen_range(0.3..9.7), r.gen_range(-1.7..-0.05));
        if poles.iter().all(|q| (q - p).norm() > 0.2) {
            poles.push(p);
        }
    }
    let residues = (0..n).map(|_| C64::from_polar(r.gen_range(0.1..2.0), r.gen_range(-3.1..3.1))).collect();
    Rational { poles, residues, constant: c(0.0, 0.0) }
}
