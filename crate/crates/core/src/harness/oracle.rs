use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest matrix size the oracle accepts.
pub const ORACLE_MAX_N: usize = 6;
/// Largest number of matrices per call.
pub const ORACLE_MAX_COUNT: usize = 1_000_000;

/// Unitary-invariant matrix ensembles with unit-variance entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Ensemble {
    /// `n × n` Hermitian, real N(0,1) diagonal, complex off-diagonal with `E|h|² = 1`.
    Gue(usize),
    /// `Z Z*` for an `n × k` matrix of complex entries with `E|z|² = 1`.
    ComplexWishart(usize, usize),
    /// `(W₁ + W₂)^{-1/2} W₁ (W₁ + W₂)^{-1/2}` for independent
    /// `ComplexWishart(n, p)` and `ComplexWishart(n, q)`.
    JacobiUnitary(usize, usize, usize),
}

impl Ensemble {
    pub fn n(&self) -> usize {
        match *self {
            Ensemble::Gue(n) | Ensemble::ComplexWishart(n, _) | Ensemble::JacobiUnitary(n, _, _) => n,
        }
    }

    /// Parses `gue:n`, `wishart:n,k` or `jue:n,p,q`.
    pub fn from_id(id: &str) -> Result<Self> {
        let (head, args) = id.split_once(':').ok_or_else(|| Error::Config(format!("ensemble id '{id}' has no ':'")))?;
        let nums: Vec<usize> = args
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad size '{s}' in '{id}'"))))
            .collect::<Result<_>>()?;
        match (head.trim(), nums.as_slice()) {
            ("gue", &[n]) => Ok(Ensemble::Gue(n)),
            ("wishart", &[n, k]) => Ok(Ensemble::ComplexWishart(n, k)),
            ("jue", &[n, p, q]) => Ok(Ensemble::JacobiUnitary(n, p, q)),
            _ => Err(Error::Config(format!("unknown ensemble '{id}'"))),
        }
    }
}

fn cnormal<R: Rng + ?Sized>(rng: &mut R) -> Complex<f64> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gue<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex<f64>> {
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = Complex::new(rng.sample(StandardNormal), 0.0);
        for j in i + 1..n {
            let c = cnormal(rng);
            h[(i, j)] = c;
            h[(j, i)] = c.conj();
        }
    }
    h
}

fn wishart<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> DMatrix<Complex<f64>> {
    let z = DMatrix::from_fn(n, k, |_, _| cnormal(rng));
    &z * z.adjoint()
}

fn sorted_eigenvalues(m: DMatrix<Complex<f64>>) -> Vec<f64> {
    let sym = (&m + m.adjoint()) * Complex::new(0.5, 0.0);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// One draw of the ensemble's ordered spectrum.
pub fn sample_spectrum<R: Rng + ?Sized>(ensemble: &Ensemble, rng: &mut R) -> Result<Vec<f64>> {
    let m = match *ensemble {
        Ensemble::Gue(n) => gue(n, rng),
        Ensemble::ComplexWishart(n, k) => wishart(n, k, rng),
        Ensemble::JacobiUnitary(n, p, q) => {
            let w1 = wishart(n, p, rng);
            let w2 = wishart(n, q, rng);
            let chol = (&w1 + &w2)
                .cholesky()
                .ok_or_else(|| Error::DegenerateInput(format!("W₁ + W₂ singular for jue:{n},{p},{q}")))?;
            let l = chol.l();
            // L⁻¹ W₁ L⁻* has the spectrum of (W₁ + W₂)⁻¹ W₁.
            let a = l.solve_lower_triangular(&w1).expect("Cholesky factor is invertible");
            l.solve_lower_triangular(&a.adjoint()).expect("Cholesky factor is invertible")
        }
    };
    Ok(sorted_eigenvalues(m))
}

/// `count` independent ordered spectra drawn by direct matrix sampling and a
/// dense Hermitian eigen-solve.
pub fn rmt_oracle<R: Rng + ?Sized>(ensemble: &Ensemble, count: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let n = ensemble.n();
    if n == 0 || n > ORACLE_MAX_N {
        return Err(Error::Domain(format!("oracle matrices must have 1 ≤ n ≤ {ORACLE_MAX_N}, got {n}")));
    }
    if count > ORACLE_MAX_COUNT {
        return Err(Error::Budget(format!("{count} oracle samples requested, cap is {ORACLE_MAX_COUNT}")));
    }
    match *ensemble {
        Ensemble::ComplexWishart(_, 0) => return Err(Error::Domain("wishart needs k ≥ 1".into())),
        Ensemble::JacobiUnitary(n, p, q) if p + q < n => {
            return Err(Error::Domain(format!("jue:{n},{p},{q} needs p + q ≥ n")));
        }
        _ => {}
    }
    (0..count).map(|_| sample_spectrum(ensemble, rng)).collect()
}

/// Column `index` of a batch of ordered spectra, sorted.
pub fn order_statistic(spectra: &[Vec<f64>], index: usize) -> Vec<f64> {
    let mut v: Vec<f64> = spectra.iter().map(|s| s[index]).collect();
    v.sort_by(f64::total_cmp);
    v
}
