//! The long-form manual. Each submodule's documentation is a chapter of the
//! book under `book/`, included verbatim so the book's code blocks run as
//! doc-tests and cannot drift from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/quickstart.md")]
pub mod quickstart {}

#[doc = include_str!("../../../book/src/mesh-and-curve.md")]
pub mod mesh_and_curve {}

#[doc = include_str!("../../../book/src/surfaces-and-phases.md")]
pub mod surfaces_and_phases {}

#[doc = include_str!("../../../book/src/energy-and-volume.md")]
pub mod energy_and_volume {}

#[doc = include_str!("../../../book/src/flow.md")]
pub mod flow {}

#[doc = include_str!("../../../book/src/admissibility.md")]
pub mod admissibility {}

#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics {}

#[doc = include_str!("../../../book/src/file-formats.md")]
pub mod file_formats {}
