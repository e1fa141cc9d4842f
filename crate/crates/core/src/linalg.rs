//! Lowest eigenpairs of Hermitian operators: dense for small matrices,
//! matrix-free Lanczos with full reorthogonalization otherwise.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Lowest eigenvalue with its normalized eigenvector and the next eigenvalue
/// (when the space has more than one dimension).
#[derive(Debug, Clone)]
pub struct LowestEigen {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub next_value: Option<f64>,
    /// `‖Hv − λv‖` measured after convergence.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub tol: f64,
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            krylov_dim: 120,
            max_restarts: 60,
            seed: 0x5eed,
        }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Lowest eigenpair of a dense real symmetric matrix.
pub fn dense_lowest_real(m: &DMatrix<f64>) -> LowestEigen {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let k = order[0];
    let vector: Vec<Complex64> = eig
        .eigenvectors
        .column(k)
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    let hv = m * eig.eigenvectors.column(k);
    let residual = (hv - eig.eigenvectors.column(k) * eig.eigenvalues[k]).norm();
    LowestEigen {
        value: eig.eigenvalues[k],
        vector,
        next_value: order.get(1).map(|&j| eig.eigenvalues[j]),
        residual,
    }
}

/// Lowest eigenpair of a dense Hermitian matrix via its real embedding
/// `[[Re, −Im], [Im, Re]]`, whose spectrum is that of `h` doubled.
pub fn dense_lowest_hermitian(h: &DMatrix<Complex64>) -> LowestEigen {
    let n = h.nrows();
    let big = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = h[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let eig = SymmetricEigen::new(big);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let k = order[0];
    let col = eig.eigenvectors.column(k);
    let mut vector: Vec<Complex64> = (0..n).map(|i| Complex64::new(col[i], col[i + n])).collect();
    let nv = norm(&vector);
    vector.iter_mut().for_each(|x| *x /= nv);
    // each eigenvalue appears twice in the embedding
    let next_value = order.get(2).map(|&j| eig.eigenvalues[j]);
    let value = eig.eigenvalues[k];
    let hv = h * nalgebra::DVector::from_column_slice(&vector);
    let residual = hv
        .iter()
        .zip(&vector)
        .map(|(a, b)| (a - b * value).norm_sqr())
        .sum::<f64>()
        .sqrt();
    LowestEigen {
        value,
        vector,
        next_value,
        residual,
    }
}

/// Lanczos for the lowest eigenpair of the Hermitian operator `apply`
/// (writes `H x` into its second argument). `start` restricts the search to
/// its invariant subspace when the operator preserves it; `mask` zeroes
/// components outside an allowed subspace after every application.
pub fn lanczos_lowest<F>(
    dim: usize,
    apply: F,
    start: Option<&[Complex64]>,
    mask: Option<&[bool]>,
    opts: LanczosOptions,
) -> Result<LowestEigen>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let project = |v: &mut [Complex64]| {
        if let Some(mask) = mask {
            for (x, &keep) in v.iter_mut().zip(mask) {
                if !keep {
                    *x = Complex64::new(0.0, 0.0);
                }
            }
        }
    };
    let mut v0: Vec<Complex64> = match start {
        Some(s) => s.to_vec(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            (0..dim)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, 0.0))
                .collect()
        }
    };
    project(&mut v0);
    let n0 = norm(&v0);
    if n0 == 0.0 {
        return Err(Error::Dimension("Lanczos start vector is zero".into()));
    }
    v0.iter_mut().for_each(|x| *x /= n0);

    let kmax = opts.krylov_dim.min(dim).max(1);
    let mut best: Option<LowestEigen> = None;
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    for _ in 0..opts.max_restarts {
        let mut basis: Vec<Vec<Complex64>> = vec![v0.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        loop {
            let j = basis.len() - 1;
            apply(&basis[j], &mut w);
            project(&mut w);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            // full reorthogonalization, twice for stability
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let bnorm = norm(&w);
            if basis.len() >= kmax || bnorm < 1e-13 {
                break;
            }
            beta.push(bnorm);
            basis.push(w.iter().map(|x| x / bnorm).collect());
        }
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let lo = order[0];
        let y = eig.eigenvectors.column(lo);
        let mut ritz = vec![Complex64::new(0.0, 0.0); dim];
        for (coef, b) in y.iter().zip(&basis) {
            ritz.iter_mut().zip(b).for_each(|(x, v)| *x += b_scale(*coef) * v);
        }
        let nr = norm(&ritz);
        ritz.iter_mut().for_each(|x| *x /= nr);
        apply(&ritz, &mut w);
        project(&mut w);
        let value = dot(&ritz, &w).re;
        let residual = w
            .iter()
            .zip(&ritz)
            .map(|(a, b)| (a - b * value).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let cand = LowestEigen {
            value,
            vector: ritz.clone(),
            next_value: order.get(1).map(|&j| eig.eigenvalues[j]),
            residual,
        };
        let done = residual < opts.tol || k < kmax;
        best = Some(cand);
        if done {
            break;
        }
        v0 = ritz;
    }
    let best = best.expect("at least one Lanczos cycle");
    if best.residual > opts.tol.max(1e-9) {
        return Err(Error::NoConvergence {
            residual: best.residual,
        });
    }
    Ok(best)
}

#[inline]
fn b_scale(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}
