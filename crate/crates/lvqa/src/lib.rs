//! Agentic long-video question answering toolkit.
//!
//! The crate is organized around a decoupled planner-inspector loop: a text-only
//! planner searches a clip index for candidate time spans, while a multimodal
//! inspector holds exclusive answer authority and terminates the episode only
//! when the inspected evidence is sufficient. Everything model-shaped sits
//! behind the [`backend`] traits, so the whole runtime is drivable offline with
//! scripted backends.
//!
//! Module map:
//! - [`timeline`]: timestamps, spans, temporal IoU, the fixed clip grid, frame plans
//! - [`clipindex`]: caption+embedding clip index with cosine top-k retrieval and the LLM filter stage
//! - [`protocol`]: prompt templates and parsers for every model-facing grammar
//! - [`backend`]: chat/embedding adapters (HTTP and scripted test doubles)
//! - [`engine`]: episode executor (decoupled and coupled modes), batch runner, calibration probes
//! - [`diagnostics`]: temporal/semantic groundedness, hallucination rates, trajectory-policy stats
//! - [`reward`]: outcome-only and evidence-gated terminal rewards
//! - [`cli`]: the `lvqa` operator commands

pub mod backend;
pub mod cli;
pub mod clipindex;
pub mod diagnostics;
pub mod engine;
pub mod protocol;
pub mod reward;
pub mod timeline;
