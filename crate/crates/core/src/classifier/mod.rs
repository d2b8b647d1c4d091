//! Encoder, logistic head, weighted-BCE training and a remote scorer client.

mod encoder;
mod head;
mod remote;
mod train;

pub use encoder::{Encoder, ReferenceEncoder};
pub use head::{gradient, loss, score, sigmoid, ClassifierHead, HEAD_FORMAT_VERSION, PROB_EPS};
pub use remote::{RemoteConfig, RemoteScore, RemoteScorer};
pub use train::{train, train_documents, Optimizer, TrainConfig, TrainReport};

use crate::context::ContextDocument;
use crate::error::Result;

/// Anything that maps a document to a probability.
pub trait DocScorer: Sync {
    fn score_document(&self, doc: &ContextDocument) -> Result<f64>;
}

/// Encoder plus trained head, evaluated in process.
pub struct LocalScorer<E: Encoder> {
    pub encoder: E,
    pub head: ClassifierHead,
}

impl<E: Encoder> DocScorer for LocalScorer<E> {
    fn score_document(&self, doc: &ContextDocument) -> Result<f64> {
        score(doc, &self.encoder, &self.head)
    }
}

impl DocScorer for RemoteScorer {
    fn score_document(&self, doc: &ContextDocument) -> Result<f64> {
        self.score(doc).map(|r| r.score)
    }
}
