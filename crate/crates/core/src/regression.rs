//! Polynomial features and least-squares projections used as conditional
//! expectation estimators.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

/// Largest accepted condition number of a normal-equation matrix.
pub const MAX_CONDITION: f64 = 1e12;

const CHUNK: usize = 1024;

/// Per-component centring and scaling; constant components are dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Standardizer {
    keep: Vec<usize>,
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    /// Fits on `rows` samples of dimension `q` stored row-major.
    pub fn fit(states: &[f64], q: usize) -> Self {
        let rows = if q == 0 { 0 } else { states.len() / q };
        let mut keep = Vec::new();
        let mut mean = Vec::new();
        let mut scale = Vec::new();
        for i in 0..q {
            let mut mu = 0.0;
            for r in 0..rows {
                mu += states[r * q + i];
            }
            mu /= rows.max(1) as f64;
            let mut var = 0.0;
            for r in 0..rows {
                var += (states[r * q + i] - mu).powi(2);
            }
            let sd = (var / rows.max(1) as f64).sqrt();
            if sd > 1e-12 * (1.0 + mu.abs()) {
                keep.push(i);
                mean.push(mu);
                scale.push(sd);
            }
        }
        Standardizer { keep, mean, scale }
    }

    pub fn dim(&self) -> usize {
        self.keep.len()
    }

    pub fn apply(&self, raw: &[f64], out: &mut [f64]) {
        for (j, &i) in self.keep.iter().enumerate() {
            out[j] = (raw[i] - self.mean[j]) / self.scale[j];
        }
    }
}

/// All monomials of total degree at most `degree` in `dim` variables,
/// starting with the constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialBasis {
    dim: usize,
    monomials: Vec<Vec<usize>>,
}

impl PolynomialBasis {
    pub fn new(dim: usize, degree: usize) -> Self {
        let mut monomials: Vec<Vec<usize>> = vec![vec![]];
        let mut frontier: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..degree {
            let mut next = Vec::new();
            for m in &frontier {
                let start = m.last().copied().unwrap_or(0);
                for i in start..dim {
                    let mut n = m.clone();
                    n.push(i);
                    next.push(n);
                }
            }
            monomials.extend(next.iter().cloned());
            frontier = next;
        }
        PolynomialBasis { dim, monomials }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.monomials.len()
    }

    pub fn eval(&self, s: &[f64], out: &mut [f64]) {
        for (k, m) in self.monomials.iter().enumerate() {
            out[k] = m.iter().map(|&i| s[i]).product();
        }
    }
}

/// Why a projection could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub enum FitFailure {
    TooFewRows { rows: usize, features: usize },
    IllConditioned { condition: f64 },
}

/// Coefficients `p × r` (row `j` belongs to feature `j`).
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coef: Vec<f64>,
    pub features: usize,
    pub targets: usize,
    pub condition: f64,
}

impl LeastSquares {
    pub fn coefficient(&self, feature: usize, target: usize) -> f64 {
        self.coef[feature * self.targets + target]
    }
}

/// Solves the normal equations for `rows`, where `design(row, out)` fills the
/// `p` features and `target(row, out)` the `r` responses of a row. Partial
/// sums are formed over fixed-size chunks and added in order, so the result
/// does not depend on the number of worker threads.
pub fn least_squares<D, T>(rows: &[usize], p: usize, r: usize, design: D, target: T) -> Result<LeastSquares, FitFailure>
where
    D: Fn(usize, &mut [f64]) + Sync,
    T: Fn(usize, &mut [f64]) + Sync,
{
    if rows.len() < p {
        return Err(FitFailure::TooFewRows {
            rows: rows.len(),
            features: p,
        });
    }
    let partials: Vec<(Vec<f64>, Vec<f64>)> = rows
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut gram = vec![0.0; p * p];
            let mut rhs = vec![0.0; p * r];
            let mut phi = vec![0.0; p];
            let mut y = vec![0.0; r];
            for &row in chunk {
                design(row, &mut phi);
                target(row, &mut y);
                for i in 0..p {
                    let pi = phi[i];
                    for j in i..p {
                        gram[i * p + j] += pi * phi[j];
                    }
                    for k in 0..r {
                        rhs[i * r + k] += pi * y[k];
                    }
                }
            }
            (gram, rhs)
        })
        .collect();
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DMatrix::<f64>::zeros(p, r);
    for (g, b) in &partials {
        for i in 0..p {
            for j in i..p {
                gram[(i, j)] += g[i * p + j];
            }
            for k in 0..r {
                rhs[(i, k)] += b[i * r + k];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
    }
    let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(0.0, f64::max);
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(FitFailure::IllConditioned { condition });
    }
    let chol = gram.cholesky().ok_or(FitFailure::IllConditioned { condition })?;
    let sol = chol.solve(&rhs);
    let mut coef = vec![0.0; p * r];
    for i in 0..p {
        for k in 0..r {
            coef[i * r + k] = sol[(i, k)];
        }
    }
    Ok(LeastSquares {
        coef,
        features: p,
        targets: r,
        condition,
    })
}
