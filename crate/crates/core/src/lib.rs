//! Subshifts of finite type on finitely generated groups.

pub mod calculus;
pub mod domino;
pub mod ends;
pub mod error;
pub mod group;
pub mod io;
pub mod qi;
pub mod qip;
pub mod search;
pub mod sft;
pub mod todd_coxeter;
pub mod transfer;

pub use calculus::{
    compile_derivative_sft, derivative, integrate, integrate_to_function, DerivativePatch,
    FunctionPatch,
};
pub use domino::{
    decide_domino, emptiness_certificate, z_transition_oracle, Certificate, DominoOutcome,
    OracleVerdict, Verdict, Witness, DEFAULT_BUDGET,
};
pub use ends::{
    construct_periodic_point, estimate_ends, find_axial, fundamental_domain, separates,
    AxialElement, EndsEstimate, FundamentalDomain,
};
pub use error::{Error, Result};
pub use group::{Ball, Distance, Element, Family, Gen, Group, GroupSpec, Word, WordProblem};
pub use qi::{
    higher_block, local_record, periodic_homomorphism_check, pullback, synthesize_quasi_inverse,
    verify_qi_pair, PeriodCheck, QIPairPatch, QiCheck,
};
pub use qip::{compile_pullback_sft, compile_qipair_sft, QipParams};
pub use sft::{locally_admissible, verify_periodic_point};
pub use sft::{
    Alphabet, Check, Component, Letter, LocalRule, Patch, Pattern, PatternSet, PeriodicConfig,
    View, WangTileSet,
};
pub use transfer::{domino_transfer, TransferOutcome, TransferPlan};
