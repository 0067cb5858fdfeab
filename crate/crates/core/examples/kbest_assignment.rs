//! Ranked assignments of three tracks to two measurements with Murty's method.
//!
//! Usage: `cargo run --example kbest_assignment`

use nalgebra::DMatrix;

use pmbfusion::assignment::{murty_kbest, AssignmentProblem};
use pmbfusion::rfs::count_assignments;

fn main() -> pmbfusion::Result<()> {
    // Negative log weights; infinity forbids a pairing.
    let pair = DMatrix::from_row_slice(3, 2, &[0.2, 3.0, 2.5, 0.4, f64::INFINITY, 1.1]);
    let problem = AssignmentProblem::new(pair, &[1.5, 1.5, 0.9])?;
    let ranked = murty_kbest(&problem, 20);
    println!(
        "{} feasible assignments ({} without forbidden pairs)",
        ranked.len(),
        count_assignments(3, 2)?
    );
    for (rank, a) in ranked.iter().enumerate() {
        let pairs: Vec<String> = a.pairs(problem.partners()).map(|(i, j)| format!("({i},{j})")).collect();
        println!("{:>3}  cost {:7.3}  weight {:.4}  {{{}}}", rank + 1, a.total_cost, (-a.total_cost).exp(), pairs.join(","));
    }
    Ok(())
}
