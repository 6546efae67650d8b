//! Structure extraction: dense low-doubling subsets, the Y / W / Γ′ₐ
//! construction, Freiman domains and shift recovery.

pub mod bsg;
pub mod gowers;
pub mod pipeline;
pub mod shift;

pub use bsg::{bsg_extract, graph_of, quadruple_degrees, BsgConfig, BsgOutcome};
pub use gowers::{
    build_y, choose_a, choose_w, constraint_count, measured_c, sample_w, y_from_ladder, yx_law_holds,
    CosetChoice, ParityConstraintSystem, SumsetLadder, WChoice,
};
pub use pipeline::{full_pipeline, Assertion, ExtractionReport, PipelineConfig, PipelineInput, Seeds};
pub use shift::{grow_freiman_domain, mod2_shift_fraction, shift_extract, shift_fraction_report, ShiftFraction, ShiftOutcome};
