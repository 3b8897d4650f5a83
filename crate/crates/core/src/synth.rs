//! Seeded synthetic corpora with known signal placement.
//!
//! [`generate_corpus`] mimics a real collection of flawed projects:
//! analyzer counts and code metrics differ only slightly between classes,
//! while a few project-metadata features separate them clearly (or not at
//! all, for the negative control). [`generate_rfe_benchmark`] plants a
//! linear signal in a handful of Gaussian columns among pure noise.
//! Either way the informative features are recorded in each instance's
//! provenance under `informative`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Bernoulli, Distribution, LogNormal, Normal, Poisson};
use rand_xoshiro::Xoshiro256StarStar;

use crate::corpus::{
    default_dictionary, Dataset, FeatureDescriptor, FeatureDictionary, FeatureKind, FeatureVector,
    Instance, Label, Layer,
};

/// Features that carry class signal when layer 3 is informative.
pub const INFORMATIVE_L3: [&str; 4] = [
    "l3.popularity_program",
    "l3.popularity_platform",
    "l3.security_related",
    "l3.exploit_history",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub instances: usize,
    /// Share of vulnerable instances, rounded to the nearest count.
    pub vulnerable_fraction: f64,
    pub informative_l3: bool,
}

impl SynthConfig {
    pub fn new(seed: u64) -> Self {
        SynthConfig {
            seed,
            instances: 75,
            vulnerable_fraction: 2.0 / 3.0,
            informative_l3: true,
        }
    }

    pub fn vulnerable_count(&self) -> usize {
        (self.instances as f64 * self.vulnerable_fraction).round() as usize
    }
}

fn poisson<R: Rng>(rng: &mut R, mean: f64) -> f64 {
    Poisson::new(mean).expect("positive mean").sample(rng)
}

fn bernoulli<R: Rng>(rng: &mut R, p: f64) -> f64 {
    f64::from(u8::from(Bernoulli::new(p).expect("probability").sample(rng)))
}

fn ordinal<R: Rng>(rng: &mut R, weights: &[f64]) -> f64 {
    WeightedIndex::new(weights).expect("weights").sample(rng) as f64
}

/// Labels with the requested class counts in random order.
fn labels<R: Rng>(rng: &mut R, n: usize, vulnerable: usize) -> Vec<Label> {
    let mut v: Vec<Label> = (0..n)
        .map(|i| if i < vulnerable { Label::Vulnerable } else { Label::BenignFlaw })
        .collect();
    v.shuffle(rng);
    v
}

fn layer12<R: Rng>(rng: &mut R, vuln: bool) -> FeatureVector {
    let s = if vuln { 0.5 } else { 0.0 };
    let mut f = FeatureVector::new();
    f.set("l1.memory_leak", poisson(rng, 1.2 + 0.1 * s));
    f.set("l1.null_deref", poisson(rng, 1.0 + 0.1 * s));
    f.set("l1.use_after_free", poisson(rng, 0.4 + 0.1 * s));
    f.set("l1.stack_return", poisson(rng, 0.3));
    f.set("l1.use_before_def", poisson(rng, 0.8));
    f.set("l1.buffer_write", poisson(rng, 0.9 + 0.15 * s));

    let sloc = LogNormal::new(8.0 + 0.1 * s, 0.8).expect("lognormal").sample(rng).round().max(50.0);
    let k = sloc / 1000.0;
    f.set("l2.sloc", sloc);
    f.set("l2.branch_count", poisson(rng, k * (60.0 + 8.0 * s)));
    f.set("l2.branch_max_depth", 1.0 + poisson(rng, 3.0 + 0.3 * s));
    f.set("l2.loop_count", poisson(rng, k * 20.0));
    f.set("l2.alloc_calls", poisson(rng, k * (4.0 + 0.5 * s)));
    f.set("l2.safe_lib_calls", poisson(rng, k * (3.0 - 0.3 * s)));
    f.set("l2.unsafe_lib_calls", poisson(rng, k * (1.0 + 0.2 * s)));
    f.set("l2.recursive_fns", poisson(rng, k * 0.8));
    f.set("l2.is_server", bernoulli(rng, 0.4 + 0.05 * s));
    f
}

/// Layer-3 values. With `signal`, vulnerable projects skew towards popular
/// programs and platforms, security-related roles and exploit history.
fn layer3<R: Rng>(rng: &mut R, vuln: bool, signal: bool) -> FeatureVector {
    let mut f = FeatureVector::new();
    f.set("l3.code_age_months", poisson(rng, 90.0));
    f.set("l3.committers", 1.0 + poisson(rng, 12.0));
    f.set("l3.platform_kind", ordinal(rng, &[1.0, 1.0, 2.0, 2.0]));
    f.set("l3.dev_reputation", ordinal(rng, &[1.0, 2.0, 3.0, 2.0, 1.0]));
    f.set("l3.code_status", ordinal(rng, &[1.0, 2.0, 3.0]));
    f.set("l3.is_legacy", bernoulli(rng, 0.3));

    let (pop, sec, exploits) = match (signal, vuln) {
        (true, true) => ([1.0, 1.0, 2.0, 4.0, 5.0], 0.75, 1.6),
        (true, false) => ([5.0, 4.0, 2.0, 1.0, 1.0], 0.2, 0.4),
        (false, _) => ([3.0, 2.5, 2.0, 2.5, 3.0], 0.475, 1.0),
    };
    f.set("l3.popularity_program", ordinal(rng, &pop));
    f.set("l3.popularity_platform", ordinal(rng, &pop));
    f.set("l3.security_related", bernoulli(rng, sec));
    f.set("l3.exploit_history", poisson(rng, exploits));
    f
}

pub fn generate_corpus(cfg: &SynthConfig) -> Dataset {
    let mut rng = Xoshiro256StarStar::seed_from_u64(cfg.seed);
    let informative = if cfg.informative_l3 { INFORMATIVE_L3.join(",") } else { String::new() };
    let mut d = Dataset::new(default_dictionary());
    let labels = labels(&mut rng, cfg.instances, cfg.vulnerable_count());
    for (i, label) in labels.into_iter().enumerate() {
        let vuln = label == Label::Vulnerable;
        let mut features = layer12(&mut rng, vuln);
        features.merge(&layer3(&mut rng, vuln, cfg.informative_l3));
        d.instances.push(Instance {
            id: format!("synth-{:04}", i + 1),
            label,
            features,
            provenance: BTreeMap::from([
                ("generator".to_string(), "synth".to_string()),
                ("seed".to_string(), cfg.seed.to_string()),
                ("informative".to_string(), informative.clone()),
                ("weak".to_string(), "l1,l2".to_string()),
            ]),
        });
    }
    d
}

/// Copy of `d` with labels permuted by a seeded shuffle, which destroys
/// any relation between features and labels while keeping class counts.
pub fn shuffle_labels(d: &Dataset, seed: u64) -> Dataset {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut labels = d.labels();
    labels.shuffle(&mut rng);
    let mut out = d.clone();
    for (inst, l) in out.instances.iter_mut().zip(labels) {
        inst.label = l;
        inst.provenance.insert("informative".into(), String::new());
    }
    out
}

/// Balanced two-class Gaussian data: `informative` columns have class means
/// at `+shift` / `-shift`, the rest are standard-normal noise. Informative
/// columns sit at seeded positions among `l2.x00`, `l2.x01`, ...
pub fn generate_rfe_benchmark(
    seed: u64,
    instances: usize,
    informative: usize,
    noise: usize,
    shift: f64,
) -> Dataset {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let p = informative + noise;
    let mut dict = FeatureDictionary::from(Vec::new());
    for j in 0..p {
        dict.push(FeatureDescriptor {
            name: format!("l2.x{j:02}"),
            layer: Layer::L2,
            kind: FeatureKind::Continuous,
            description: "synthetic Gaussian column".into(),
            range: None,
        })
        .expect("unique names");
    }
    let mut cols: Vec<usize> = (0..p).collect();
    cols.shuffle(&mut rng);
    let mut signal = cols[..informative].to_vec();
    signal.sort_unstable();
    let names: Vec<String> = signal.iter().map(|j| format!("l2.x{j:02}")).collect();
    let normal = Normal::new(0.0, 1.0).expect("normal");

    let mut d = Dataset::new(dict);
    let labels = labels(&mut rng, instances, instances / 2);
    for (i, label) in labels.into_iter().enumerate() {
        let y = label.sign();
        let features = (0..p)
            .map(|j| {
                let mean = if signal.contains(&j) { y * shift } else { 0.0 };
                (format!("l2.x{j:02}"), mean + normal.sample(&mut rng))
            })
            .collect();
        d.instances.push(Instance {
            id: format!("rfe-{:04}", i + 1),
            label,
            features,
            provenance: BTreeMap::from([
                ("generator".to_string(), "rfe-benchmark".to_string()),
                ("seed".to_string(), seed.to_string()),
                ("informative".to_string(), names.join(",")),
            ]),
        });
    }
    d
}

/// Informative feature names recorded by the generators.
pub fn informative_features(d: &Dataset) -> Vec<String> {
    d.instances
        .first()
        .and_then(|i| i.provenance.get("informative"))
        .map(|s| s.split(',').filter(|n| !n.is_empty()).map(str::to_string).collect())
        .unwrap_or_default()
}
