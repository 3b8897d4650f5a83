//! Recursive feature elimination driven by linear-model weight magnitude,
//! with the final subset size chosen by inner cross-validation.

use serde::Serialize;

use super::rng::SplitRng;
use super::split::{effective_folds, stratified_folds, SplitPlan};
use super::{correct, train_rows, EvalConfig, EvalError};
use crate::corpus::{Dataset, Label};
use crate::learn::{layer3_instance_weights, FeatureMask, ModelKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Elimination {
    pub feature: String,
    /// 1 is the last feature standing.
    pub rank: usize,
    pub weight_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub size: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RfeTrace {
    /// Features dropped on the way down to the selected size, in order.
    pub eliminated: Vec<Elimination>,
    pub selected: FeatureMask,
    /// Every starting feature, best rank first.
    pub ranking: Vec<String>,
    /// Inner-CV accuracy at each size visited, largest size first.
    pub curve: Vec<CurvePoint>,
    pub warnings: Vec<String>,
}

/// RFE on the training portion of `plan`.
pub fn run_rfe(
    d: &Dataset,
    kind: ModelKind,
    plan: &SplitPlan,
    cfg: &EvalConfig,
) -> Result<RfeTrace, EvalError> {
    let weights = layer3_instance_weights(d, cfg.beta)?;
    run_rfe_rows(d, kind, &plan.train, &weights, super::derive_seed(plan.seed, 1), cfg)
}

/// RFE using only the instances at `rows`. The inner folds depend on the
/// labels of `rows` in the given order and on `seed`, nothing else.
pub fn run_rfe_rows(
    d: &Dataset,
    kind: ModelKind,
    rows: &[usize],
    weights: &[f64],
    seed: u64,
    cfg: &EvalConfig,
) -> Result<RfeTrace, EvalError> {
    cfg.validate()?;
    let params = cfg.train_params(kind);
    let labels: Vec<Label> = rows.iter().map(|&r| d.instances[r].label).collect();
    let k = effective_folds(&labels, cfg.rfe_folds).min(rows.len().max(2));
    let fold_of = stratified_folds(&labels, k, &mut SplitRng::new(seed));
    let inner: Vec<(Vec<usize>, Vec<usize>)> = (0..k)
        .map(|f| {
            let (mut tr, mut te) = (Vec::new(), Vec::new());
            for (pos, &r) in rows.iter().enumerate() {
                if fold_of[pos] == f { te.push(r) } else { tr.push(r) }
            }
            (tr, te)
        })
        .collect();

    let dict = &d.dictionary;
    let mut current: Vec<usize> = (0..dict.len()).collect();
    let mut warnings = Vec::new();
    let mut order: Vec<Elimination> = Vec::new();
    let mut curve = Vec::new();
    let mask_of = |pos: &[usize]| FeatureMask::from_names(dict, &pos.iter().map(|&p| dict.descriptors()[p].name.as_str()).collect::<Vec<_>>());

    loop {
        let mask = mask_of(&current)?;
        let mut hits = 0;
        for (tr, te) in &inner {
            let (model, warn) = train_rows(d, kind, &mask, tr, weights, &params)?;
            warnings.extend(warn);
            hits += correct(&model, d, te);
        }
        curve.push(CurvePoint {
            size: current.len(),
            accuracy: hits as f64 / rows.len().max(1) as f64,
        });
        if current.len() == 1 {
            break;
        }
        let (model, warn) = train_rows(d, kind, &mask, rows, weights, &params)?;
        warnings.extend(warn);
        let drop = cfg.rfe_step.min(current.len() - 1);
        let mut by_weight: Vec<(f64, usize)> = current
            .iter()
            .zip(&model.w)
            .map(|(&p, w)| (w.abs(), p))
            .collect();
        by_weight.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        for (i, &(wabs, p)) in by_weight[..drop].iter().enumerate() {
            order.push(Elimination {
                feature: dict.descriptors()[p].name.clone(),
                rank: current.len() - i,
                weight_abs: wabs,
            });
        }
        let gone: Vec<usize> = by_weight[..drop].iter().map(|&(_, p)| p).collect();
        current.retain(|p| !gone.contains(p));
    }

    let survivor = dict.descriptors()[current[0]].name.clone();
    let best = curve
        .iter()
        .fold(&curve[0], |b, c| if c.accuracy >= b.accuracy { c } else { b })
        .size;
    let mut ranking: Vec<String> = vec![survivor];
    ranking.extend(order.iter().rev().map(|e| e.feature.clone()));
    let eliminated: Vec<Elimination> = order.into_iter().filter(|e| e.rank > best).collect();
    let selected = FeatureMask::from_names(dict, &ranking[..best])?;
    warnings.sort();
    warnings.dedup();
    Ok(RfeTrace {
        eliminated,
        selected,
        ranking,
        curve,
        warnings,
    })
}
