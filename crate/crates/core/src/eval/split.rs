use serde::Serialize;

use super::rng::SplitRng;
use super::EvalError;
use crate::corpus::{Dataset, Label};

pub const TEST_FRACTION: f64 = 0.25;

/// Holdout split, stratified CV folds over the whole dataset and bootstrap
/// resamples of the training portion, all drawn from one seeded stream in
/// that order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub folds: usize,
    /// Fold number of every instance, in dataset order.
    pub fold_of: Vec<usize>,
    pub bootstraps: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
}

impl SplitPlan {
    pub fn fold_train(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }

    pub fn fold_test(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }
}

/// Positions of each class within `labels`, vulnerable first.
fn by_class(labels: &[Label]) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (i, l) in labels.iter().enumerate() {
        out[usize::from(*l == Label::BenignFlaw)].push(i);
    }
    out
}

/// Fold count actually usable with these labels: at most the smaller class
/// size, never below 2.
pub fn effective_folds(labels: &[Label], folds: usize) -> usize {
    let [a, b] = by_class(labels);
    folds.min(a.len().min(b.len())).max(2)
}

/// Stratified fold assignment for `labels`: each class is shuffled, then
/// dealt round-robin with the dealer carrying over between classes, so
/// every fold holds within one instance of its share of each class.
pub fn stratified_folds(labels: &[Label], k: usize, rng: &mut SplitRng) -> Vec<usize> {
    let mut fold_of = vec![0; labels.len()];
    let mut dealer = 0;
    for mut members in by_class(labels) {
        rng.shuffle(&mut members);
        for i in members {
            fold_of[i] = dealer % k;
            dealer += 1;
        }
    }
    fold_of
}

/// Test-set size per class: `round(n/4)` overall split by largest
/// remainder, with at least one test instance from every class that has
/// two or more members (which can push tiny test sets above a quarter).
fn test_allocation(sizes: [usize; 2]) -> [usize; 2] {
    let n = sizes[0] + sizes[1];
    let total = (n as f64 * TEST_FRACTION).round() as usize;
    let quota = sizes.map(|s| total as f64 * s as f64 / n as f64);
    let mut alloc = quota.map(|q| q.floor() as usize);
    let mut rest = total - alloc[0] - alloc[1];
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| (quota[b] - quota[b].floor()).total_cmp(&(quota[a] - quota[a].floor())));
    for c in order {
        if rest > 0 {
            alloc[c] += 1;
            rest -= 1;
        }
    }
    for c in 0..2 {
        let other = 1 - c;
        if alloc[c] == 0 && sizes[c] >= 2 {
            alloc[c] = 1;
            if alloc[other] > 1 {
                alloc[other] -= 1;
            }
        }
        alloc[c] = alloc[c].min(sizes[c].saturating_sub(1));
    }
    alloc
}

pub fn make_split_plan(
    d: &Dataset,
    seed: u64,
    folds: usize,
    bootstraps: usize,
) -> Result<SplitPlan, EvalError> {
    if d.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let labels = d.labels();
    let classes = by_class(&labels);
    if classes.iter().any(Vec::is_empty) {
        return Err(EvalError::SingleClass);
    }
    if folds < 2 {
        return Err(EvalError::Invalid(format!("folds must be at least 2, got {folds}")));
    }
    let mut rng = SplitRng::new(seed);
    let mut warnings = Vec::new();

    let alloc = test_allocation([classes[0].len(), classes[1].len()]);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (members, take) in classes.iter().zip(alloc) {
        let mut members = members.clone();
        rng.shuffle(&mut members);
        test.extend_from_slice(&members[..take]);
        train.extend_from_slice(&members[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();

    let k = effective_folds(&labels, folds);
    if k != folds {
        warnings.push(format!(
            "fold count reduced from {folds} to {k}: smallest class has {} instances",
            classes[0].len().min(classes[1].len())
        ));
    }
    let fold_of = stratified_folds(&labels, k, &mut rng);

    let bootstraps = (0..bootstraps)
        .map(|_| (0..train.len()).map(|_| train[rng.below(train.len())]).collect())
        .collect();

    Ok(SplitPlan {
        seed,
        train,
        test,
        folds: k,
        fold_of,
        bootstraps,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{default_dictionary, Instance};
    use proptest::prelude::*;

    fn corpus(pos: usize, neg: usize) -> Dataset {
        let mut d = Dataset::new(default_dictionary());
        for i in 0..pos + neg {
            d.instances.push(Instance {
                id: format!("p{i}"),
                label: if i < pos { Label::Vulnerable } else { Label::BenignFlaw },
                features: Default::default(),
                provenance: Default::default(),
            });
        }
        d
    }

    #[test]
    fn default_corpus_shape_gives_56_19() {
        let d = corpus(50, 25);
        let plan = make_split_plan(&d, 42, 10, 100).unwrap();
        assert_eq!((plan.train.len(), plan.test.len()), (56, 19));
        let vuln = plan.test.iter().filter(|&&i| i < 50).count();
        assert_eq!((vuln, 19 - vuln), (13, 6));
        assert_eq!(plan.folds, 10);
        assert!(plan.warnings.is_empty());
        assert_eq!(plan.bootstraps.len(), 100);
        assert_eq!(plan, make_split_plan(&d, 42, 10, 100).unwrap());
        assert_ne!(plan.train, make_split_plan(&d, 43, 10, 100).unwrap().train);
    }

    #[test]
    fn tiny_dataset_reduces_folds() {
        let plan = make_split_plan(&corpus(2, 2), 1, 10, 0).unwrap();
        assert_eq!(plan.folds, 2);
        assert_eq!(plan.warnings.len(), 1);
        assert_eq!(plan.test.len(), 2);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(matches!(make_split_plan(&corpus(0, 0), 1, 10, 0), Err(EvalError::EmptyDataset)));
        assert!(matches!(make_split_plan(&corpus(3, 0), 1, 10, 0), Err(EvalError::SingleClass)));
    }

    proptest! {
        #[test]
        fn plan_invariants(pos in 1usize..60, neg in 1usize..60, seed: u64, folds in 2usize..12) {
            let d = corpus(pos, neg);
            let n = pos + neg;
            let plan = make_split_plan(&d, seed, folds, 3).unwrap();
            let mut all: Vec<usize> = plan.train.iter().chain(&plan.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            let expected = (n as f64 * 0.25).round() as usize;
            if pos >= 2 && neg >= 2 {
                prop_assert_eq!(plan.test.len(), expected.max(2));
                prop_assert!(plan.test.iter().any(|&i| i < pos));
                prop_assert!(plan.test.iter().any(|&i| i >= pos));
            }
            for f in 0..plan.folds {
                let members = plan.fold_test(f);
                let p = members.iter().filter(|&&i| i < pos).count() as f64;
                let share = members.len() as f64 * pos as f64 / n as f64;
                prop_assert!((p - share).abs() <= 1.0 + 1e-9);
                let exact = pos as f64 / plan.folds as f64;
                prop_assert!((p - exact).abs() < 1.0);
            }
            for b in &plan.bootstraps {
                prop_assert_eq!(b.len(), plan.train.len());
                prop_assert!(b.iter().all(|i| plan.train.binary_search(i).is_ok()));
            }
        }
    }
}
