use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::dataset::{train_count, DatasetRecord};
use super::{
    metrics_from_predictions, multi_task_loss, AestheticNet, AestheticScores, DatasetManifest,
    EvalReport, ModelError, ModelInput, NetworkConfig,
};
use crate::nn::checkpoint::{is_tensor_file, read_tensor_file};
use crate::nn::{GradientStore, Sgd};

/// A decoded training or evaluation example.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: ModelInput,
    pub targets: AestheticScores,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingReport {
    /// Mean per-sample loss seen during each epoch (before each step).
    pub epoch_losses: Vec<f64>,
    /// Mean loss over the training split after the last epoch.
    pub final_train_loss: f64,
    pub n_train: usize,
    /// `None` when the test split ended up empty.
    pub test: Option<EvalReport>,
    /// Manifest rows plus records whose files could not be read.
    pub skipped: usize,
}

fn data_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Record order after the seeded shuffle that precedes the train/test split.
pub fn shuffled_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut data_rng(seed));
    order
}

/// Reads one record as a network input: standalone tensor files become
/// feature maps, anything else is decoded as an image.
pub fn load_sample(net: &AestheticNet, rec: &DatasetRecord) -> Result<Sample, ModelError> {
    let bytes = std::fs::read(&rec.path)?;
    let input = if is_tensor_file(&bytes) {
        ModelInput::Features(read_tensor_file(&rec.path)?)
    } else {
        net.prepare(&crate::image::decode(&bytes)?)?
    };
    Ok(Sample {
        input,
        targets: rec.targets,
    })
}

fn load_all<'a>(
    net: &AestheticNet,
    recs: impl IntoIterator<Item = &'a DatasetRecord>,
    skipped: &mut usize,
) -> Vec<Sample> {
    recs.into_iter()
        .filter_map(|r| match load_sample(net, r) {
            Ok(s) => Some(s),
            Err(e) => {
                log::warn!("skipping {}: {e}", r.path.display());
                *skipped += 1;
                None
            }
        })
        .collect()
}

/// Seeded shuffle, train/test split, then SGD with batch size 1.
pub fn train(
    manifest: &DatasetManifest,
    config: NetworkConfig,
) -> Result<(AestheticNet, TrainingReport), ModelError> {
    config.validate()?;
    if manifest.len() < 2 {
        return Err(ModelError::EmptyDataset(format!(
            "need at least 2 records, manifest has {}",
            manifest.len()
        )));
    }
    let net = AestheticNet::init(config.clone())?;
    let (train_recs, test_recs) = manifest.split(config.split_ratio, config.seed);
    let mut skipped = manifest.skipped_rows;
    let train_set = load_all(&net, train_recs, &mut skipped);
    let test_set = load_all(&net, test_recs, &mut skipped);
    fit(net, &train_set, &test_set, skipped)
}

/// Trains on already-split samples; `train` delegates here after loading.
pub fn train_on_samples(
    samples: &[Sample],
    config: NetworkConfig,
) -> Result<(AestheticNet, TrainingReport), ModelError> {
    config.validate()?;
    if samples.len() < 2 {
        return Err(ModelError::EmptyDataset(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    let net = AestheticNet::init(config.clone())?;
    let order = shuffled_order(samples.len(), config.seed);
    let n_train = train_count(samples.len(), config.split_ratio);
    let (train_idx, test_idx) = order.split_at(n_train);
    let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
    fit(net, &pick(train_idx), &pick(test_idx), 0)
}

fn fit(
    mut net: AestheticNet,
    train_set: &[Sample],
    test_set: &[Sample],
    skipped: usize,
) -> Result<(AestheticNet, TrainingReport), ModelError> {
    if train_set.is_empty() {
        return Err(ModelError::EmptyDataset("no readable training records".into()));
    }
    let config = net.config.clone();
    let mut sgd = Sgd::new(config.lr, config.momentum)?;
    let mut grads = GradientStore::zeros_like(net.parameters());
    let mut rng = data_rng(config.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let s = &train_set[i];
            let (loss, g) = net.loss_and_gradients(&s.input, &s.targets)?;
            total += loss;
            grads.reset();
            grads.accumulate(&g)?;
            sgd.step(net.parameters_mut(), &grads)?;
        }
        epoch_losses.push(total / train_set.len() as f64);
    }
    let final_train_loss = evaluate_samples(&net, train_set)?.mean_loss;
    let test = if test_set.is_empty() {
        None
    } else {
        Some(evaluate_samples(&net, test_set)?)
    };
    Ok((
        net,
        TrainingReport {
            epoch_losses,
            final_train_loss,
            n_train: train_set.len(),
            test,
            skipped,
        },
    ))
}

pub fn evaluate_samples(net: &AestheticNet, samples: &[Sample]) -> Result<EvalReport, ModelError> {
    if samples.is_empty() {
        return Err(ModelError::EmptyDataset("nothing to evaluate".into()));
    }
    let mut preds = Vec::with_capacity(samples.len());
    let mut losses = Vec::with_capacity(samples.len());
    for s in samples {
        let p = net.forward(&s.input)?;
        losses.push(multi_task_loss(&p, &s.targets, net.config.loss_weight_lambda, net.config.heads_mode));
        preds.push(p);
    }
    let targets: Vec<_> = samples.iter().map(|s| s.targets).collect();
    Ok(metrics_from_predictions(&preds, &targets, &losses))
}

/// Scores every readable record; unreadable ones are skipped with a warning.
pub fn evaluate<'a>(
    net: &AestheticNet,
    records: impl IntoIterator<Item = &'a DatasetRecord>,
) -> Result<(EvalReport, usize), ModelError> {
    let mut skipped = 0;
    let samples = load_all(net, records, &mut skipped);
    Ok((evaluate_samples(net, &samples)?, skipped))
}
