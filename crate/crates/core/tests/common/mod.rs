#![allow(dead_code, clippy::needless_range_loop)]

use factorank_core::dataset::IndicatorDataset;
use factorank_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..cols).map(|_| rng.sample(StandardNormal)).collect()).collect()
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let g = gaussian(rng, n, n);
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = 0.5 * (g[i][j] + g[j][i]);
        }
    }
    a
}

/// Orthonormal columns by modified Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let g = gaussian(rng, n, n);
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| g[i][j]).collect()).collect();
    for j in 0..n {
        for k in 0..j {
            let d: f64 = (0..n).map(|i| cols[j][i] * cols[k][i]).sum();
            for i in 0..n {
                cols[j][i] -= d * cols[k][i];
            }
        }
        let norm = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|v| *v /= norm);
    }
    let mut q = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            q[(i, j)] = cols[j][i];
        }
    }
    q
}

/// Gaussian elimination with partial pivoting, independent of the
/// eigen-based inverse under test.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(r, &v)| {
            let mut row = r.clone();
            row.push(v);
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, piv);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

pub fn dataset_from(rows: &[Vec<f64>]) -> IndicatorDataset {
    let n = rows.len();
    let p = rows[0].len();
    let ids = (0..n).map(|i| format!("case{i:03}")).collect();
    let names = (0..p).map(|j| format!("v{j}")).collect();
    IndicatorDataset::new(ids, names, Matrix::from_rows(rows).unwrap()).unwrap()
}

/// Plain Pearson correlation from raw columns.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Varimax criterion written out directly: Σ_k [mean(x⁴) − mean(x²)²].
pub fn criterion_oracle(l: &[Vec<f64>], normalize: bool) -> f64 {
    let p = l.len() as f64;
    let k = l[0].len();
    let rows: Vec<Vec<f64>> = l
        .iter()
        .map(|r| {
            let h = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if normalize && h > 0.0 {
                r.iter().map(|v| v / h).collect()
            } else {
                r.clone()
            }
        })
        .collect();
    (0..k)
        .map(|j| {
            let m2 = rows.iter().map(|r| r[j].powi(2)).sum::<f64>() / p;
            let m4 = rows.iter().map(|r| r[j].powi(4)).sum::<f64>() / p;
            m4 - m2 * m2
        })
        .sum()
}

/// Best criterion over planar rotations θ ∈ [0, π/2) of a p×2 loading matrix.
pub fn varimax_grid_oracle(l: &Matrix, normalize: bool, step: f64) -> f64 {
    assert_eq!(l.cols(), 2);
    let mut best = f64::NEG_INFINITY;
    let mut theta = 0.0;
    while theta < std::f64::consts::FRAC_PI_2 {
        let (c, s) = (theta.cos(), theta.sin());
        let rotated: Vec<Vec<f64>> = l.row_iter().map(|r| vec![c * r[0] + s * r[1], -s * r[0] + c * r[1]]).collect();
        best = best.max(criterion_oracle(&rotated, normalize));
        theta += step;
    }
    best
}

/// Overall KMO from partial correlations obtained by regressing each pair of
/// variables on all remaining ones and correlating the residuals.
pub fn kmo_regression_oracle(data: &[Vec<f64>]) -> f64 {
    let n = data.len();
    let p = data[0].len();
    let col = |j: usize| data.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let residual = |target: usize, others: &[usize]| -> Vec<f64> {
        // Design with intercept.
        let design: Vec<Vec<f64>> =
            data.iter().map(|r| std::iter::once(1.0).chain(others.iter().map(|&j| r[j])).collect()).collect();
        let m = others.len() + 1;
        let xtx: Vec<Vec<f64>> =
            (0..m).map(|a| (0..m).map(|b| design.iter().map(|r| r[a] * r[b]).sum()).collect()).collect();
        let y = col(target);
        let xty: Vec<f64> = (0..m).map(|a| design.iter().zip(&y).map(|(r, v)| r[a] * v).sum()).collect();
        let beta = solve(&xtx, &xty);
        (0..n).map(|i| y[i] - design[i].iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>()).collect()
    };
    let mut r2 = 0.0;
    let mut q2 = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let others: Vec<usize> = (0..p).filter(|&k| k != i && k != j).collect();
            let partial = pearson(&residual(i, &others), &residual(j, &others));
            r2 += pearson(&col(i), &col(j)).powi(2);
            q2 += partial * partial;
        }
    }
    r2 / (r2 + q2)
}

/// Generating loadings for a 12-variable, 3-factor simple structure.
pub fn planted_loadings() -> Vec<Vec<f64>> {
    let strengths = [0.85, 0.8, 0.75, 0.7];
    let mut l = vec![vec![0.0; 3]; 12];
    for f in 0..3 {
        for (v, s) in strengths.iter().enumerate() {
            l[f * 4 + v][f] = *s;
        }
    }
    l
}

/// `x = Λ f + e` with standard-normal factors and noise of the given sd.
pub fn planted_data(rng: &mut ChaCha8Rng, n: usize, loadings: &[Vec<f64>], noise_sd: f64) -> Vec<Vec<f64>> {
    let k = loadings[0].len();
    (0..n)
        .map(|_| {
            let f: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
            loadings
                .iter()
                .map(|row| {
                    let e: f64 = rng.sample(StandardNormal);
                    row.iter().zip(&f).map(|(l, x)| l * x).sum::<f64>() + noise_sd * e
                })
                .collect()
        })
        .collect()
}

pub fn tucker_congruence(a: &[f64], b: &[f64]) -> f64 {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    ab / (aa * bb).sqrt()
}

/// For each generating column, |congruence| with its best-matching
/// recovered column; `None` if the matching is not a permutation.
pub fn matched_congruences(truth: &[Vec<f64>], got: &Matrix) -> Option<Vec<f64>> {
    let k = truth[0].len();
    let mut used = vec![false; got.cols()];
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let t: Vec<f64> = truth.iter().map(|r| r[j]).collect();
        let (best, phi) = (0..got.cols())
            .map(|c| (c, tucker_congruence(&t, &got.column(c)).abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if used[best] {
            return None;
        }
        used[best] = true;
        out.push(phi);
    }
    Some(out)
}

/// F_jk = Σ_i X_ji W_ik, summed term by term.
pub fn naive_scores(z: &Matrix, w: &Matrix) -> Matrix {
    let mut f = Matrix::zeros(z.rows(), w.cols());
    for j in 0..z.rows() {
        for k in 0..w.cols() {
            let mut acc = 0.0;
            for i in 0..z.cols() {
                acc += w[(i, k)] * z[(j, i)];
            }
            f[(j, k)] = acc;
        }
    }
    f
}
