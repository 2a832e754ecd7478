//! Exact computer algebra for one-dimensional formal group laws, elliptic
//! torsion algebras and Z/p^r-equivariant formal group laws.

pub mod elliptic;
pub mod equivariant;
pub mod expr;
pub mod fgl;
pub mod linalg;
pub mod poly;
pub mod report;
pub mod ring;
pub mod scenario;
pub mod series;
pub mod upoly;
