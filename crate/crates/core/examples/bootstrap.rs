//! Regularity bootstrap of the integrability exponents for a few pairs.

use spikelab::entire::{bootstrap_exponents, BootstrapTag, ExponentPair};

fn main() {
    let cases = [(2.0, 3.0, 3), (3.0, 4.0, 5), (1.5, 8.0, 4), (2.0, 2.5, 6), (3.0, 3.0, 5), (7.0, 7.0, 5)];
    println!("{:>5} {:>5} {:>3} {:>6} {:>10} {:>10} {:>20} {:>6}", "p", "q", "N", "HC", "alpha*", "beta*", "tag", "steps");
    for (p, q, n) in cases {
        let e = match ExponentPair::new(p, q, n) {
            Ok(e) => e,
            Err(err) => {
                println!("{p:>5} {q:>5} {n:>3}  {err}");
                continue;
            }
        };
        let (tag, steps, extra) = match bootstrap_exponents(&e, 200) {
            Ok(b) => {
                let extra = match (b.tag, b.backward_limit) {
                    (BootstrapTag::MaxIter, Some(q0)) => format!("fixed point {:.6}, backward limit {q0:.6}", b.fixed_point),
                    _ => String::new(),
                };
                (format!("{:?}", b.tag), b.steps.len(), extra)
            }
            Err(_) => ("ImmediateRegularity".to_string(), 0, String::new()),
        };
        println!(
            "{p:>5} {q:>5} {n:>3} {:>6} {:>10.4} {:>10.4} {tag:>20} {steps:>6}  {extra}",
            e.hc_holds, e.alpha_star, e.beta_star
        );
    }
}
