//! Reference computations written independently of the library code.

use rand::SeedableRng;
use rand_distr::{Distribution, Normal, Uniform};
use rand_xoshiro::Xoshiro256StarStar;
use vulnscore::learn::DesignMatrix;

/// Column means and population standard deviations; constant columns get
/// sd 0 and are dropped by the callers.
pub fn zscore(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let p = rows[0].len();
    let mean: Vec<f64> = (0..p).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let sd: Vec<f64> = (0..p)
        .map(|j| (rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    rows.iter()
        .map(|r| (0..p).map(|j| if sd[j] == 0.0 { 0.0 } else { (r[j] - mean[j]) / sd[j] }).collect())
        .collect()
}

/// Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Unit-norm Fisher direction on standardized data with the trace-scaled
/// ridge.
pub fn fda_direction(m: &DesignMatrix, lambda: f64) -> Vec<f64> {
    let z = zscore(&m.rows);
    let p = z[0].len();
    let mut means = [vec![0.0; p], vec![0.0; p]];
    let mut mass = [0.0; 2];
    for ((r, y), w) in z.iter().zip(&m.labels).zip(&m.weights) {
        let c = if *y > 0.0 { 0 } else { 1 };
        mass[c] += w;
        for j in 0..p {
            means[c][j] += w * r[j];
        }
    }
    for c in 0..2 {
        for j in 0..p {
            means[c][j] /= mass[c];
        }
    }
    let mut s = vec![vec![0.0; p]; p];
    for ((r, y), w) in z.iter().zip(&m.labels).zip(&m.weights) {
        let mu = &means[if *y > 0.0 { 0 } else { 1 }];
        for a in 0..p {
            for b in 0..p {
                s[a][b] += w * (r[a] - mu[a]) * (r[b] - mu[b]);
            }
        }
    }
    let trace: f64 = (0..p).map(|j| s[j][j]).sum();
    let scale = if trace > 0.0 { trace / p as f64 } else { 1.0 };
    for j in 0..p {
        s[j][j] += lambda * scale;
    }
    let diff: Vec<f64> = (0..p).map(|j| means[0][j] - means[1][j]).collect();
    let w = solve(s, diff);
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter().map(|v| v / norm).collect()
}

/// Relative distance between two directions up to sign.
pub fn direction_error(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let plus: f64 = a.iter().zip(b).map(|(x, y)| (x / na - y / nb).powi(2)).sum::<f64>().sqrt();
    let minus: f64 = a.iter().zip(b).map(|(x, y)| (x / na + y / nb).powi(2)).sum::<f64>().sqrt();
    plus.min(minus)
}

/// Accelerated projected gradient (with restarts) on the box-constrained
/// dual of the bias-augmented SVM. Returns the dual objective.
pub fn svm_dual_pg(m: &DesignMatrix, c: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let mut x = zscore(&m.rows);
    for r in &mut x {
        r.push(1.0);
    }
    let n = x.len();
    let y = &m.labels;
    let upper: Vec<f64> = m.weights.iter().map(|w| c * w).collect();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| y[i] * y[j] * x[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum::<f64>()).collect())
        .collect();
    // Power iteration for the largest eigenvalue of Q.
    let mut v = vec![1.0; n];
    let mut lip = 1.0;
    for _ in 0..200 {
        let qv: Vec<f64> = (0..n).map(|i| q[i].iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        lip = qv.iter().map(|t| t * t).sum::<f64>().sqrt();
        v = qv.iter().map(|t| t / lip).collect();
    }
    let lip = lip * 1.01 + 1e-12;
    let grad = |a: &[f64]| -> Vec<f64> {
        (0..n).map(|i| q[i].iter().zip(a).map(|(s, t)| s * t).sum::<f64>() - 1.0).collect()
    };
    let obj = |a: &[f64]| -> f64 {
        let g = grad(a);
        // f = 1/2 a'Qa - sum a = 1/2 a'(g + 1) - sum a
        let half: f64 = a.iter().zip(&g).map(|(ai, gi)| ai * (gi + 1.0)).sum::<f64>() * 0.5;
        a.iter().sum::<f64>() - half
    };
    let pg_max = |a: &[f64]| -> f64 {
        grad(a)
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                if a[i] <= 0.0 { g.min(0.0) } else if a[i] >= upper[i] { g.max(0.0) } else { g }
            }.abs())
            .fold(0.0, f64::max)
    };
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    let mut best = obj(&a);
    let mut viol = pg_max(&a);
    for _ in 0..max_iter {
        let g = grad(&z);
        let next: Vec<f64> = (0..n).map(|i| (z[i] - g[i] / lip).clamp(0.0, upper[i])).collect();
        let f_next = obj(&next);
        if f_next < best {
            // Objective went the wrong way (in maximization form): restart momentum.
            t = 1.0;
            z = a.clone();
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = (0..n).map(|i| next[i] + (t - 1.0) / t_next * (next[i] - a[i])).collect();
        a = next;
        t = t_next;
        best = f_next;
        viol = pg_max(&a);
        if viol <= tol {
            break;
        }
    }
    (best, viol)
}

/// Gaussian two-class data with random shifts, n rows by p columns.
pub fn random_problem(seed: u64, n: usize, p: usize) -> DesignMatrix {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let shift: Vec<f64> = (0..p).map(|_| normal.sample(&mut rng)).collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let y = if i % 2 == 0 { 1.0 } else { -1.0 };
        rows.push((0..p).map(|j| normal.sample(&mut rng) + 0.5 * y * shift[j]).collect());
        labels.push(y);
    }
    let u = Uniform::new(1.0, 2.0).unwrap();
    DesignMatrix {
        features: (0..p).map(|j| format!("l2.x{j}")).collect(),
        rows,
        labels,
        weights: (0..n).map(|_| u.sample(&mut rng)).collect(),
        imputation: vec![0.0; p],
    }
}
