//! Building blocks for abstractive summarization experiments on news text:
//! corpus filtering, subword tokenization, n-gram language models,
//! constrained decoding and ROUGE evaluation.

pub mod corpus;
pub mod decode;
pub mod eval;
pub mod lm;
pub mod tokenizer;

pub use corpus::{Article, FilterConfig, FilterReport};
pub use decode::{decode, DecodeConfig, DecodeResult, Method};
pub use eval::{EvalRecord, EvalSummary, Evaluator};
pub use lm::{Distribution, LanguageModel, NGramModel};
pub use tokenizer::{TokenId, TokenSequence, Vocabulary};
