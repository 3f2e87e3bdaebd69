//! Cut coefficients across the Farey sequence of order 8.

use icd::fractions::{farey_sequence, thomae_coefficient};

fn main() {
    for alpha in farey_sequence(8) {
        let c = thomae_coefficient(&alpha);
        let bar = "#".repeat((c.to_f64() * 20.0).round() as usize);
        println!("{alpha:>5} {c:>5} {bar}");
    }
}
