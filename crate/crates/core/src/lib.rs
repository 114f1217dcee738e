//! Persian sentiment analysis: lexicon-driven features with polarity-shift
//! handling, multi-granularity scoring over dependency graphs, a stacked
//! classifier ensemble, and an embedding-based classifier.

pub mod classify;
pub mod embed;
pub mod eval;
pub mod features;
pub mod granularity;
pub mod lexicon;
pub mod model_file;
pub mod nn;
pub mod preprocess;
pub mod shift;
