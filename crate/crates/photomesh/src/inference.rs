//! Toy classification workload used to measure how perturbations degrade
//! the accelerator's accuracy.

use photomesh_core::attack::inject_all;
use photomesh_core::physics::apply_phase_noise_accelerator;
use photomesh_core::random::{rng_from_seed, stream_seed};
use photomesh_core::Complex64;
use photomesh_core::{Accelerator, OpticalSystem, SignalVector, TransferMatrix, WeightMatrix};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{HarnessError, Result};

const TEST_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 0x4e;
const ATTACK_STREAM: u64 = 0x41;

/// Offset shared by every blob centre, so classes overlap a little.
const CENTRE_OFFSET: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct ToyDataset {
    pub classes: usize,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl ToyDataset {
    /// Class `k` is centred on `0.3·1 + e_k`; samples are the absolute
    /// value of centre plus isotropic Gaussian noise, so features stay
    /// non-negative. Samples are interleaved by class.
    pub fn gaussian_blobs(classes: usize, samples_per_class: usize, spread: f64, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let mut features = Vec::with_capacity(classes * samples_per_class);
        let mut labels = Vec::with_capacity(classes * samples_per_class);
        for _ in 0..samples_per_class {
            for k in 0..classes {
                let x = (0..classes)
                    .map(|j| {
                        let centre = CENTRE_OFFSET + if j == k { 1.0 } else { 0.0 };
                        let z: f64 = StandardNormal.sample(&mut rng);
                        (centre + spread * z).abs()
                    })
                    .collect();
                features.push(x);
                labels.push(k);
            }
        }
        Self { classes, features, labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Weight matrix whose row `k` is the unit-norm mean of class `k`.
pub fn train_centroid_classifier(data: &ToyDataset) -> WeightMatrix {
    let n = data.classes;
    let mut sums = vec![vec![0.0; n]; n];
    for (x, &k) in data.features.iter().zip(&data.labels) {
        for (s, v) in sums[k].iter_mut().zip(x) {
            *s += v;
        }
    }
    for row in &mut sums {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }
    let flat: Vec<f64> = sums.into_iter().flatten().collect();
    WeightMatrix::from_real(n, &flat).expect("centroids are finite")
}

/// L2-normalised amplitude encoding. The zero vector stays zero.
pub fn encode(features: &[f64]) -> SignalVector {
    let norm = features.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
    SignalVector::from_real(&features.iter().map(|v| v * scale).collect::<Vec<_>>())
}

/// Index of the brightest output port; ties go to the lower index.
pub fn classify(output: &SignalVector) -> usize {
    let mut best = 0;
    for (i, a) in output.iter().enumerate() {
        if a.norm_sqr() > output[best].norm_sqr() {
            best = i;
        }
    }
    best
}

pub fn accuracy<S: OpticalSystem + ?Sized>(system: &S, data: &ToyDataset) -> Result<f64> {
    let mut correct = 0usize;
    for (i, (x, &label)) in data.features.iter().zip(&data.labels).enumerate() {
        let out = system.propagate(&encode(x), i as u64).map_err(|e| HarnessError::core("inference", e))?;
        if classify(&out) == label {
            correct += 1;
        }
    }
    Ok(if data.is_empty() { 0.0 } else { correct as f64 / data.len() as f64 })
}

/// Accuracy of the dense product `W·x`, the reference for the mesh.
pub fn dense_accuracy(weights: &TransferMatrix, data: &ToyDataset) -> f64 {
    let correct = data
        .features
        .iter()
        .zip(&data.labels)
        .filter(|(x, &label)| {
            let v = encode(x);
            let y: Vec<Complex64> =
                (0..weights.nrows()).map(|r| (0..weights.ncols()).map(|c| weights[(r, c)] * v[c]).sum()).collect();
            classify(&SignalVector(y)) == label
        })
        .count();
    if data.is_empty() {
        0.0
    } else {
        correct as f64 / data.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    pub sigma: f64,
    pub mean_accuracy: f64,
    pub min_accuracy: f64,
    pub max_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub scenario: String,
    pub test_samples: usize,
    pub dense_accuracy: f64,
    pub clean_accuracy: f64,
    pub noise_seeds: u64,
    pub noise_curve: Vec<NoisePoint>,
    /// Accuracy with every configured attack injected at the final step;
    /// `None` without attacks.
    pub attacked_accuracy: Option<f64>,
}

/// Accuracy of each noisy copy of `acc`. Seed `k` uses the same unit
/// normals at every σ, so curves for different σ are directly comparable.
pub fn noisy_accuracies(acc: &Accelerator, data: &ToyDataset, sigma: f64, seeds: u64, seed: u64) -> Result<Vec<f64>> {
    (0..seeds)
        .map(|k| {
            let mut rng = rng_from_seed(stream_seed(seed, &[NOISE_STREAM, k]));
            let noisy =
                apply_phase_noise_accelerator(acc, sigma, &mut rng).map_err(|e| HarnessError::core("inference", e))?;
            accuracy(&noisy, data)
        })
        .collect()
}

/// Evaluates the configured weights on a held-out test set drawn from the
/// same blobs as the training set.
pub fn run_inference(config: &ScenarioConfig) -> Result<AccuracyReport> {
    let scenario = config.build_scenario()?;
    let weights = config.weight_matrix()?;
    let d = &config.dataset;
    let test = ToyDataset::gaussian_blobs(
        config.mesh.size,
        d.samples_per_class,
        d.spread,
        stream_seed(d.seed, &[TEST_STREAM]),
    );

    let clean_accuracy = accuracy(&scenario, &test)?;
    let mut noise_curve = Vec::with_capacity(config.inference.noise_sigmas.len());
    for &sigma in &config.inference.noise_sigmas {
        let acc = noisy_accuracies(&scenario.accelerator, &test, sigma, config.inference.noise_seeds, config.seed)?;
        noise_curve.push(NoisePoint {
            sigma,
            mean_accuracy: acc.iter().sum::<f64>() / acc.len() as f64,
            min_accuracy: acc.iter().copied().fold(f64::INFINITY, f64::min),
            max_accuracy: acc.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
    }

    let attacks = config.attack_specs();
    let attacked_accuracy = if attacks.is_empty() {
        None
    } else {
        let step = config.run.steps - 1;
        let perturbed = inject_all(&scenario, &attacks, step, stream_seed(config.seed, &[ATTACK_STREAM]))
            .map_err(|e| HarnessError::core(&config.name, e))?;
        Some(accuracy(&perturbed, &test)?)
    };

    Ok(AccuracyReport {
        scenario: config.name.clone(),
        test_samples: test.len(),
        dense_accuracy: dense_accuracy(&weights.normalized(), &test),
        clean_accuracy,
        noise_seeds: config.inference.noise_seeds,
        noise_curve,
        attacked_accuracy,
    })
}
