#![allow(dead_code)]

use adaptive_fisher::null_model::{CovariateMatrix, PhenotypeVector, TraitKind};
use adaptive_fisher::score::GenotypeMatrix;
use adaptive_fisher::stat_math::RngStream;

/// Dense Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let m = b.len();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for (offset, row) in lower.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[col + 1 + offset] -= f * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let s: f64 = (row + 1..m).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn design(n: usize, covariates: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| std::iter::once(1.0).chain(covariates.iter().map(|c| c[i])).collect())
        .collect()
}

/// Least-squares fitted values of `y` on an intercept plus `covariates`.
pub fn ols_fitted(y: &[f64], covariates: &[Vec<f64>]) -> Vec<f64> {
    let x = design(y.len(), covariates);
    let p = x[0].len();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (row, &yi) in x.iter().zip(y) {
        for a in 0..p {
            xty[a] += row[a] * yi;
            for b in 0..p {
                xtx[a][b] += row[a] * row[b];
            }
        }
    }
    let beta = solve(xtx, xty);
    x.iter().map(|row| row.iter().zip(&beta).map(|(a, b)| a * b).sum()).collect()
}

/// Fitted means of the null logistic model by plain Newton iterations.
pub fn logistic_fitted(y: &[f64], covariates: &[Vec<f64>]) -> Vec<f64> {
    let x = design(y.len(), covariates);
    let p = x[0].len();
    let mut beta = vec![0.0; p];
    let means = |beta: &[f64]| -> Vec<f64> {
        x.iter()
            .map(|row| {
                let eta: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
                1.0 / (1.0 + (-eta).exp())
            })
            .collect()
    };
    for _ in 0..100 {
        let mu = means(&beta);
        let mut info = vec![vec![0.0; p]; p];
        let mut grad = vec![0.0; p];
        for ((row, &yi), &m) in x.iter().zip(y).zip(&mu) {
            let w = m * (1.0 - m);
            for a in 0..p {
                grad[a] += row[a] * (yi - m);
                for b in 0..p {
                    info[a][b] += w * row[a] * row[b];
                }
            }
        }
        let step = solve(info, grad);
        for (b, s) in beta.iter_mut().zip(&step) {
            *b += s;
        }
        if step.iter().all(|s| s.abs() < 1e-15) {
            break;
        }
    }
    means(&beta)
}

/// Score `U_k = Σ_i G_ik (y_i - μ̂_i)` of the full GLM at `β = 0` with the
/// null nuisance fit, and `V_kk = σ̂² Σ_i (G_ik - Ĝ_ik)²`.
pub fn oracle_score(g: &[Vec<f64>], y: &[f64], covariates: &[Vec<f64>], binary: bool) -> (Vec<f64>, Vec<f64>) {
    let n = y.len() as f64;
    let mu = if binary { logistic_fitted(y, covariates) } else { ols_fitted(y, covariates) };
    let e: Vec<f64> = y.iter().zip(&mu).map(|(a, b)| a - b).collect();
    let sigma2 = if binary {
        mu.iter().map(|m| m * (1.0 - m)).sum::<f64>() / n
    } else {
        e.iter().map(|r| r * r).sum::<f64>() / (n - 1.0)
    };
    let mut u = Vec::new();
    let mut v = Vec::new();
    for col in g {
        u.push(col.iter().zip(&e).map(|(a, b)| a * b).sum());
        let fitted = ols_fitted(col, covariates);
        v.push(sigma2 * col.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum::<f64>());
    }
    (u, v)
}

pub fn relative_error(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

pub struct Dataset {
    pub g: GenotypeMatrix,
    pub y: PhenotypeVector,
    pub covariates: Option<CovariateMatrix>,
}

impl Dataset {
    pub fn g_columns(&self) -> Vec<Vec<f64>> {
        (0..self.g.k()).map(|k| self.g.column_f64(k)).collect()
    }

    pub fn covariate_columns(&self) -> Vec<Vec<f64>> {
        self.covariates.as_ref().map(|c| c.columns().to_vec()).unwrap_or_default()
    }
}

/// Genotypes with allele frequency `maf`; every column polymorphic, binary
/// traits with both classes present.
pub fn random_dataset(seed: u64, n: usize, k: usize, kind: TraitKind, n_cov: usize, maf: f64) -> Dataset {
    let mut rng = RngStream::new(seed, 0xDA7A);
    let columns: Vec<Vec<u8>> = (0..k)
        .map(|_| loop {
            let col: Vec<u8> = (0..n)
                .map(|_| (rng.uniform() < maf) as u8 + (rng.uniform() < maf) as u8)
                .collect();
            if col.iter().any(|&v| v != col[0]) {
                break col;
            }
        })
        .collect();
    let covs: Vec<Vec<f64>> = (0..n_cov).map(|_| (0..n).map(|_| rng.standard_normal()).collect()).collect();
    let y: Vec<f64> = match kind {
        TraitKind::Binary => loop {
            let y: Vec<f64> = (0..n)
                .map(|i| {
                    let eta = 0.4 * covs.iter().map(|c| c[i]).sum::<f64>() + 0.3 * columns[0][i] as f64;
                    (rng.uniform() < 1.0 / (1.0 + (-eta).exp())) as u8 as f64
                })
                .collect();
            let cases = y.iter().sum::<f64>();
            if cases >= 3.0 && cases <= n as f64 - 3.0 {
                break y;
            }
        },
        TraitKind::Continuous => (0..n)
            .map(|i| 1.5 + 0.5 * covs.iter().map(|c| c[i]).sum::<f64>() + 0.2 * columns[0][i] as f64 + rng.standard_normal())
            .collect(),
    };
    Dataset {
        g: GenotypeMatrix::from_columns(columns, None).unwrap(),
        y: PhenotypeVector::new(y, kind).unwrap(),
        covariates: (n_cov > 0).then(|| CovariateMatrix::from_columns(covs).unwrap()),
    }
}

/// Largest relative deviation of the library's `U` and `V` from the oracle,
/// with `U` errors measured against `max(|U|, √V)`,
/// over 20 datasets with `n = 50, K = 3` in each of the four model cases.
pub fn score_oracle_max_error() -> (f64, f64) {
    use adaptive_fisher::null_model::fit_null;
    use adaptive_fisher::score::{precompute_kernel, score};

    let mut worst = (0.0f64, 0.0f64);
    for (case, (kind, n_cov)) in [(TraitKind::Binary, 0), (TraitKind::Continuous, 0), (TraitKind::Binary, 2), (TraitKind::Continuous, 2)]
        .into_iter()
        .enumerate()
    {
        for rep in 0..20 {
            let data = random_dataset(1000 * case as u64 + rep, 50, 3, kind, n_cov, 0.25);
            let null = fit_null(&data.y, data.covariates.as_ref()).unwrap();
            let kernel = precompute_kernel(&data.g, &null).unwrap();
            let got = score(&kernel, null.residuals()).unwrap();
            let (u, v) = oracle_score(&data.g_columns(), data.y.values(), &data.covariate_columns(), kind == TraitKind::Binary);
            for k in 0..3 {
                // U is exactly zero for some integer designs; its null sd sets the scale there.
                let scale = u[k].abs().max(v[k].sqrt());
                worst.0 = worst.0.max((got.u[k] - u[k]).abs() / scale);
                worst.1 = worst.1.max(relative_error(got.v_diag[k], v[k]));
            }
        }
    }
    worst
}
