//! Instance generators: lower-bound layouts, the Exactly-1-3SAT gadget and
//! seeded random instances.

pub mod lower_bound;
pub mod random;
pub mod sat;

pub use lower_bound::{check_counting_certificate, gen_lower_bound, CertificateReport, LowerBoundLayout};
pub use random::gen_random;
pub use sat::{
    build_sat_solution, exactly1_3sat_oracle, exactly1_solutions, gen_sat_gadget, read_assignment, read_dimacs,
    Formula, Literal, SatGadgetLayout,
};
