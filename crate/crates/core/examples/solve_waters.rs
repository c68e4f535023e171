//! Solves the bundled WATERS instance for one policy and objective.
//!
//! `cargo run --release --example solve_waters -- npfp minmax-lat [timeout_s]`

use accelsched::milp::{build_model, decode, solve, verify_solution, HighsBackend};
use accelsched::model::builtin_waters_p15;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let policy = args.get(1).map_or("rr", String::as_str).parse().expect("policy");
    let objective = args.get(2).map_or("minmax-lat", String::as_str).parse().expect("objective");
    let timeout: f64 = args.get(3).map_or(Ok(600.0), |s| s.parse()).expect("timeout");
    let inst = builtin_waters_p15();
    let model = build_model(&inst, policy, objective).expect("model");
    println!("{} variables, {} rows", model.num_vars(), model.num_rows());
    let sol = solve(&model, &HighsBackend::default(), timeout).expect("solve");
    println!("status {} in {:.2}s, objective {:?}", sol.status, sol.wall_time_s, sol.objective_value);
    if !sol.status.has_solution() {
        return;
    }
    let d = decode(&model, &sol).expect("decode");
    println!("{:?}", d.assignment);
    match verify_solution(&inst, policy, &d) {
        Ok(r) => println!("verified: {}", r.to_json()),
        Err(e) => println!("verification failed: {e}"),
    }
}
