//! Theoretical RANSAC iteration counts by sample size.
//!
//! Smaller minimal samples need dramatically fewer iterations at high
//! outlier ratios — the core argument for one- and two-point solvers. This
//! prints the 99%-confidence budget for sample sizes 1 through 6.

use gravpano::robust::iteration_budget;

fn main() {
    println!("outlier ratio | iterations needed (confidence 0.99) per sample size");
    println!("              |      m=1      m=2      m=3      m=4      m=5      m=6");
    for step in 0..=9 {
        let outlier = step as f64 * 0.1;
        print!("        {outlier:4.1}  |");
        for m in 1..=6 {
            let budget = iteration_budget(0.99, 1.0 - outlier, m, usize::MAX);
            print!(" {budget:8}");
        }
        println!();
    }
}
