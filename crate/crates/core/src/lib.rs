//! Knowledge-augmented generation of single-page web applications from
//! annotated SVG wireframes.
//!
//! The pipeline runs front to back:
//! [`wireframe`] parses SVG pages into entities and visual context,
//! [`tree`] infers the component hierarchy, [`knowledge`] retrieves
//! component mappings, libraries and code samples, [`deps`] resolves
//! install scripts, [`prompt`] plans and renders budgeted prompts,
//! [`llm`] talks to a provider (or the offline stub), and [`generate`]
//! turns responses into a convention-structured project on disk.

pub mod deps;
pub mod generate;
pub mod knowledge;
pub mod llm;
pub mod par;
pub mod pipeline;
pub mod prompt;
pub mod tree;
pub mod wireframe;
