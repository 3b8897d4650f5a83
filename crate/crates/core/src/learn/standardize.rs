use serde::{Deserialize, Serialize};

/// Per-column z-scoring fitted on training rows. Population standard
/// deviation; columns with no spread map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub zero_var: Vec<bool>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>], cols: usize) -> Self {
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; cols];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; cols];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let sd: Vec<f64> = var.iter().map(|s| (s / n).sqrt()).collect();
        let zero_var = sd
            .iter()
            .zip(&mean)
            .map(|(&s, m)| s <= 1e-12 * m.abs().max(1.0))
            .collect();
        Standardizer { mean, sd, zero_var }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| self.transform_one(j, v))
            .collect()
    }

    pub fn transform_one(&self, col: usize, v: f64) -> f64 {
        if self.zero_var[col] {
            0.0
        } else {
            (v - self.mean[col]) / self.sd[col]
        }
    }

    pub fn inverse_one(&self, col: usize, z: f64) -> f64 {
        if self.zero_var[col] {
            self.mean[col]
        } else {
            z * self.sd[col] + self.mean[col]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn training_columns_are_unit_scaled(
            rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..30)
        ) {
            let s = Standardizer::fit(&rows, 3);
            let z: Vec<Vec<f64>> = rows.iter().map(|r| s.transform(r)).collect();
            for j in 0..3 {
                let n = z.len() as f64;
                let mean = z.iter().map(|r| r[j]).sum::<f64>() / n;
                let var = z.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
                if s.zero_var[j] {
                    prop_assert!(z.iter().all(|r| r[j] == 0.0));
                } else {
                    prop_assert!(mean.abs() < 1e-9);
                    prop_assert!((var.sqrt() - 1.0).abs() < 1e-9);
                }
                for r in &rows {
                    let back = s.inverse_one(j, s.transform_one(j, r[j]));
                    if !s.zero_var[j] {
                        prop_assert!((back - r[j]).abs() <= 1e-9 * r[j].abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn constant_column_is_flagged() {
        let s = Standardizer::fit(&[vec![2.0, 1.0], vec![2.0, 3.0]], 2);
        assert_eq!(s.zero_var, vec![true, false]);
        assert_eq!(s.transform(&[9.0, 3.0]), vec![0.0, 1.0]);
    }
}
