//! litcat turns a corpus of research articles into a searchable catalog of
//! the datasets they use.
//!
//! The pipeline runs in stages: ingest, relevance gate, extraction,
//! verification, harmonization, linking and indexing. Every model call goes
//! through the traits in [`providers`], so a run with the deterministic
//! reference providers needs no network access.

pub mod article;
pub mod catalog;
pub mod evaluation;
pub mod extraction;
pub mod harmonization;
pub mod linking;
pub mod pipeline;
pub mod providers;
pub mod records;
pub mod schema;
pub mod synthetic;
pub mod text;
pub mod verification;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/quickstart.md")]
    mod quickstart {}
    #[doc = include_str!("../../../book/src/articles.md")]
    mod articles {}
    #[doc = include_str!("../../../book/src/cards.md")]
    mod cards {}
    #[doc = include_str!("../../../book/src/extraction.md")]
    mod extraction {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/harmonization.md")]
    mod harmonization {}
    #[doc = include_str!("../../../book/src/linking.md")]
    mod linking {}
    #[doc = include_str!("../../../book/src/catalog.md")]
    mod catalog {}
    #[doc = include_str!("../../../book/src/providers.md")]
    mod providers {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/synthetic.md")]
    mod synthetic {}
}
