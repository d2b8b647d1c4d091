use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gradient, loss, ClassifierHead, Encoder};
use crate::context::ContextDocument;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Optimizer {
    /// Plain mini-batch gradient descent.
    Sgd,
    /// Adam with decoupled weight decay.
    AdamW { beta1: f64, beta2: f64, eps: f64, weight_decay: f64 },
}

impl Optimizer {
    pub fn adamw() -> Self {
        Optimizer::AdamW { beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub positive_weight: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            positive_weight: 10.0,
            epochs: 10,
            batch_size: 4,
            seed: 0,
            optimizer: Optimizer::Sgd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub head: ClassifierHead,
    /// Mean training loss over the whole corpus after each epoch.
    pub epoch_losses: Vec<f64>,
}

fn mean_loss(head: &ClassifierHead, corpus: &[(Vec<f64>, bool)], w: f64) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in corpus {
        total += loss(head.probability(x)?, *y, w);
    }
    Ok(total / corpus.len() as f64)
}

struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

/// Mini-batch descent on the mean weighted BCE of each batch.
pub fn train(corpus: &[(Vec<f64>, bool)], cfg: &TrainConfig) -> Result<TrainReport> {
    if corpus.is_empty() {
        return Err(Error::Training("empty corpus".into()));
    }
    let positives = corpus.iter().filter(|(_, y)| *y).count();
    if positives == 0 || positives == corpus.len() {
        return Err(Error::Training(format!(
            "corpus has a single class ({} positive, {} negative); both labels are required",
            positives,
            corpus.len() - positives
        )));
    }
    if !(cfg.learning_rate > 0.0) || !(cfg.positive_weight > 0.0) || cfg.batch_size == 0 {
        return Err(Error::Config("learning_rate, positive_weight and batch_size must be positive".into()));
    }
    let dim = corpus[0].0.len();
    if let Some((x, _)) = corpus.iter().find(|(x, _)| x.len() != dim) {
        return Err(Error::Config(format!("feature vectors differ in length ({dim} vs {})", x.len())));
    }
    let mut head = ClassifierHead::zeros(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut moments = Moments { m: vec![0.0; dim + 1], v: vec![0.0; dim + 1], t: 0 };
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let mut g = vec![0.0; dim + 1];
            for &i in batch {
                let (x, y) = &corpus[i];
                let (gw, gb) = gradient(&head, x, *y, cfg.positive_weight)?;
                g.iter_mut().zip(gw.iter().chain([&gb])).for_each(|(a, b)| *a += b);
            }
            let n = batch.len() as f64;
            g.iter_mut().for_each(|a| *a /= n);
            step(&mut head, &g, cfg, &mut moments);
        }
        epoch_losses.push(mean_loss(&head, corpus, cfg.positive_weight)?);
    }
    log::debug!("training losses per epoch: {epoch_losses:?}");
    Ok(TrainReport { head, epoch_losses })
}

fn step(head: &mut ClassifierHead, g: &[f64], cfg: &TrainConfig, mo: &mut Moments) {
    let lr = cfg.learning_rate;
    let dim = head.weights.len();
    match cfg.optimizer {
        Optimizer::Sgd => {
            head.weights.iter_mut().zip(g).for_each(|(w, d)| *w -= lr * d);
            head.bias -= lr * g[dim];
        }
        Optimizer::AdamW { beta1, beta2, eps, weight_decay } => {
            mo.t += 1;
            let c1 = 1.0 - beta1.powi(mo.t);
            let c2 = 1.0 - beta2.powi(mo.t);
            for k in 0..=dim {
                mo.m[k] = beta1 * mo.m[k] + (1.0 - beta1) * g[k];
                mo.v[k] = beta2 * mo.v[k] + (1.0 - beta2) * g[k] * g[k];
                let update = lr * (mo.m[k] / c1) / ((mo.v[k] / c2).sqrt() + eps);
                if k < dim {
                    head.weights[k] -= update + lr * weight_decay * head.weights[k];
                } else {
                    head.bias -= update;
                }
            }
        }
    }
}

/// Encode documents in parallel, then train.
pub fn train_documents(
    docs: &[(ContextDocument, bool)],
    encoder: &dyn Encoder,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    let corpus: Vec<(Vec<f64>, bool)> = docs.par_iter().map(|(d, y)| (encoder.encode(&d.text()), *y)).collect();
    train(&corpus, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::ReferenceEncoder;

    fn doc(body: &str) -> ContextDocument {
        ContextDocument { commit_message: String::new(), body: body.into(), token_count: 0 }
    }

    fn toy() -> Vec<(ContextDocument, bool)> {
        let mut out = Vec::new();
        for i in 0..12 {
            out.push((doc(&format!("x{i} = read(); sanitize(x{i}); use(x{i});")), true));
            out.push((doc(&format!("x{i} = read(); use(x{i}); log(x{i});")), false));
        }
        out
    }

    fn windowed_non_increasing(losses: &[f64]) -> bool {
        let avg: Vec<f64> = losses.windows(3).map(|w| w.iter().sum::<f64>() / 3.0).collect();
        avg.windows(2).all(|p| p[1] <= p[0] + 1e-12)
    }

    #[test]
    fn separable_corpus_reaches_low_loss() {
        let enc = ReferenceEncoder { dim: 512, ..Default::default() };
        let cfg = TrainConfig { learning_rate: 0.5, epochs: 300, positive_weight: 1.0, ..Default::default() };
        let report = train_documents(&toy(), &enc, &cfg).unwrap();
        let last = *report.epoch_losses.last().unwrap();
        assert!(last < 0.1, "final loss {last}");
        assert!(windowed_non_increasing(&report.epoch_losses));
    }

    #[test]
    fn default_config_loss_decreases() {
        let enc = ReferenceEncoder::default();
        let report = train_documents(&toy(), &enc, &TrainConfig::default()).unwrap();
        assert_eq!(report.epoch_losses.len(), 10);
        assert!(windowed_non_increasing(&report.epoch_losses));
    }

    #[test]
    fn identical_texts_have_a_loss_floor() {
        let enc = ReferenceEncoder { dim: 64, ..Default::default() };
        let docs = vec![(doc("same text"), true), (doc("same text"), false)];
        let cfg = TrainConfig { learning_rate: 0.5, epochs: 500, positive_weight: 1.0, ..Default::default() };
        let report = train_documents(&docs, &enc, &cfg).unwrap();
        // optimum is p = 0.5 with loss ln 2
        assert!(*report.epoch_losses.last().unwrap() > 0.69);
    }

    #[test]
    fn single_class_is_refused() {
        let enc = ReferenceEncoder { dim: 16, ..Default::default() };
        let docs = vec![(doc("a"), true), (doc("b"), true)];
        let err = train_documents(&docs, &enc, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Training(_)), "{err}");
    }

    #[test]
    fn seeded_runs_are_identical() {
        let enc = ReferenceEncoder { dim: 256, ..Default::default() };
        let cfg = TrainConfig { seed: 42, learning_rate: 0.1, ..Default::default() };
        let a = train_documents(&toy(), &enc, &cfg).unwrap();
        let b = train_documents(&toy(), &enc, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a.head).unwrap(), serde_json::to_string(&b.head).unwrap());
    }

    #[test]
    fn adamw_trains() {
        let enc = ReferenceEncoder { dim: 256, ..Default::default() };
        let cfg = TrainConfig { optimizer: Optimizer::adamw(), learning_rate: 0.05, epochs: 50, ..Default::default() };
        let report = train_documents(&toy(), &enc, &cfg).unwrap();
        assert!(report.epoch_losses.last().unwrap() < &report.epoch_losses[0]);
    }
}
