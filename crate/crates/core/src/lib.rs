//! Verification engine for paracontact structures and h-almost
//! Ricci-Yamabe solitons on semi-Riemannian manifolds.

pub mod check;
pub mod expr;
pub mod geometry;
pub mod harness;
pub mod instance;
pub mod paracontact;
pub mod report;
pub mod soliton;
