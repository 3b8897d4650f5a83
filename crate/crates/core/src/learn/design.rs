use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::corpus::{Dataset, FeatureDictionary, Label, Layer};

/// Active feature names, always in dictionary order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureMask(Vec<String>);

impl FeatureMask {
    pub fn all(dict: &FeatureDictionary) -> Self {
        FeatureMask(dict.names().map(str::to_string).collect())
    }

    pub fn layers(dict: &FeatureDictionary, layers: &[Layer]) -> Self {
        FeatureMask(
            dict.iter()
                .filter(|d| layers.contains(&d.layer))
                .map(|d| d.name.clone())
                .collect(),
        )
    }

    /// Reorders `names` into dictionary order. Unknown names are an error.
    pub fn from_names<S: AsRef<str>>(
        dict: &FeatureDictionary,
        names: &[S],
    ) -> Result<Self, LearnError> {
        let mut pos = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            let p = dict
                .position(n)
                .ok_or_else(|| LearnError::UnknownFeature(n.to_string()))?;
            if !pos.contains(&p) {
                pos.push(p);
            }
        }
        pos.sort_unstable();
        Ok(FeatureMask(
            pos.into_iter()
                .map(|p| dict.descriptors()[p].name.clone())
                .collect(),
        ))
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|n| n == name)
    }

    pub fn without(&self, name: &str) -> Self {
        FeatureMask(self.0.iter().filter(|n| *n != name).cloned().collect())
    }
}

/// Rows in dataset order, columns in mask order, missing values already
/// imputed with the column mean of these rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub features: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// +1 vulnerable, -1 benign flaw.
    pub labels: Vec<f64>,
    pub weights: Vec<f64>,
    pub imputation: Vec<f64>,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.features.len()
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self, LearnError> {
        if weights.len() != self.rows.len() {
            return Err(LearnError::Invalid(format!(
                "{} weights for {} rows",
                weights.len(),
                self.rows.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(LearnError::Invalid("instance weights must be positive".into()));
        }
        self.weights = weights;
        Ok(self)
    }

    pub(crate) fn check_two_classes(&self) -> Result<(), LearnError> {
        if self.n_cols() == 0 {
            return Err(LearnError::EmptyMask);
        }
        let pos = self.labels.iter().any(|&y| y > 0.0);
        let neg = self.labels.iter().any(|&y| y < 0.0);
        if pos && neg {
            Ok(())
        } else {
            Err(LearnError::SingleClass)
        }
    }
}

/// Design matrix over every instance of `d`.
pub fn build_design_matrix(d: &Dataset, mask: &FeatureMask) -> Result<DesignMatrix, LearnError> {
    let all: Vec<usize> = (0..d.len()).collect();
    build_design_matrix_rows(d, mask, &all)
}

/// Design matrix over the instances at `rows`. Imputation values are the
/// means of present values among those rows only (0 when none present).
pub fn build_design_matrix_rows(
    d: &Dataset,
    mask: &FeatureMask,
    rows: &[usize],
) -> Result<DesignMatrix, LearnError> {
    if mask.is_empty() {
        return Err(LearnError::EmptyMask);
    }
    if let Some(n) = mask.names().iter().find(|n| !d.dictionary.contains(n)) {
        return Err(LearnError::UnknownFeature(n.clone()));
    }
    let imputation: Vec<f64> = mask
        .names()
        .iter()
        .map(|name| {
            let (sum, n) = rows
                .iter()
                .filter_map(|&r| d.instances[r].features.get(name))
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            if n == 0 {
                0.0
            } else {
                sum / n as f64
            }
        })
        .collect();
    let matrix = DesignMatrix {
        features: mask.names().to_vec(),
        rows: rows
            .iter()
            .map(|&r| {
                let f = &d.instances[r].features;
                mask.names()
                    .iter()
                    .zip(&imputation)
                    .map(|(name, &fill)| f.get(name).unwrap_or(fill))
                    .collect()
            })
            .collect(),
        labels: rows.iter().map(|&r| d.instances[r].label.sign()).collect(),
        weights: vec![1.0; rows.len()],
        imputation,
    };
    matrix.check_two_classes()?;
    Ok(matrix)
}

/// `1 + beta * (present nonzero L3 features) / (L3 features in dictionary)`
/// for every instance, so each weight lies in `[1, 1 + beta]`.
pub fn layer3_instance_weights(d: &Dataset, beta: f64) -> Result<Vec<f64>, LearnError> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(LearnError::Invalid(format!("beta must be a non-negative number, got {beta}")));
    }
    let l3: Vec<&str> = d
        .dictionary
        .iter()
        .filter(|f| f.layer == Layer::L3)
        .map(|f| f.name.as_str())
        .collect();
    Ok(d.instances
        .iter()
        .map(|inst| {
            if l3.is_empty() {
                return 1.0;
            }
            let present = l3
                .iter()
                .filter(|n| inst.features.get(n).is_some_and(|v| v != 0.0))
                .count();
            // Fraction first: beta * 1.0 is exact, so the bound holds bitwise.
            1.0 + beta * (present as f64 / l3.len() as f64)
        })
        .collect())
}

pub fn label_of_sign(decision: f64) -> Label {
    if decision >= 0.0 {
        Label::Vulnerable
    } else {
        Label::BenignFlaw
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{default_dictionary, FeatureVector, Instance};

    fn ds(rows: &[(Label, &[(&str, f64)])]) -> Dataset {
        let mut d = Dataset::new(default_dictionary());
        for (i, (label, feats)) in rows.iter().enumerate() {
            d.instances.push(Instance {
                id: format!("i{i}"),
                label: *label,
                features: feats.iter().copied().collect::<FeatureVector>(),
                provenance: Default::default(),
            });
        }
        d
    }

    #[test]
    fn builds_matrix_in_mask_order() {
        let d = ds(&[
            (Label::Vulnerable, &[("l2.sloc", 10.0), ("l1.null_deref", 1.0), ("l3.committers", 3.0)]),
            (Label::BenignFlaw, &[("l2.sloc", 20.0), ("l1.null_deref", 0.0), ("l3.committers", 5.0)]),
        ]);
        let mask = FeatureMask::from_names(&d.dictionary, &["l3.committers", "l2.sloc", "l1.null_deref"]).unwrap();
        assert_eq!(mask.names(), ["l1.null_deref", "l2.sloc", "l3.committers"]);
        let m = build_design_matrix(&d, &mask).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (2, 3));
        assert_eq!(m.rows[1], vec![0.0, 20.0, 5.0]);
        assert_eq!(m.labels, vec![1.0, -1.0]);
    }

    #[test]
    fn missing_values_take_training_mean() {
        let d = ds(&[
            (Label::Vulnerable, &[("l2.sloc", 3.0)]),
            (Label::BenignFlaw, &[("l2.sloc", 5.0)]),
            (Label::BenignFlaw, &[]),
        ]);
        let mask = FeatureMask::from_names(&d.dictionary, &["l2.sloc"]).unwrap();
        let m = build_design_matrix(&d, &mask).unwrap();
        assert_eq!(m.imputation, vec![4.0]);
        assert_eq!(m.rows[2], vec![4.0]);
    }

    #[test]
    fn empty_mask_and_single_class() {
        let d = ds(&[(Label::Vulnerable, &[]), (Label::BenignFlaw, &[])]);
        let empty = FeatureMask::from_names::<&str>(&d.dictionary, &[]).unwrap();
        assert!(matches!(build_design_matrix(&d, &empty), Err(LearnError::EmptyMask)));
        let one = ds(&[(Label::Vulnerable, &[]), (Label::Vulnerable, &[])]);
        let mask = FeatureMask::all(&one.dictionary);
        assert!(matches!(build_design_matrix(&one, &mask), Err(LearnError::SingleClass)));
    }

    #[test]
    fn weight_formula() {
        let dict = default_dictionary();
        let names: Vec<String> = dict
            .iter()
            .filter(|f| f.layer == Layer::L3)
            .map(|f| f.name.clone())
            .collect();
        let all10: Vec<(&str, f64)> = names.iter().map(|n| (n.as_str(), 1.0)).collect();
        let half = &all10[..5];
        let d = ds(&[
            (Label::Vulnerable, &[("l1.null_deref", 4.0)]),
            (Label::Vulnerable, &all10),
            (Label::BenignFlaw, half),
            (Label::BenignFlaw, &[("l3.committers", 0.0)]),
        ]);
        assert_eq!(layer3_instance_weights(&d, 1.0).unwrap(), vec![1.0, 2.0, 1.5, 1.0]);
        assert_eq!(layer3_instance_weights(&d, 0.5).unwrap()[2], 1.25);
        assert!(layer3_instance_weights(&d, 0.0).unwrap().iter().all(|&w| w == 1.0));
        assert!(layer3_instance_weights(&d, -0.1).is_err());
    }
}
