//! Radial ground state of the whole-space system and its moments.
//!
//! ```bash
//! cargo run --release --example ground_state -- 2 3 3
//! ```

use spikelab::entire::{solve_entire_ground_state, EntireParams, EtaSign, ExponentPair};

fn main() -> spikelab::error::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (p, q, n) = match args[..] {
        [p, q, n] => (p, q, n as usize),
        _ => (2.0, 3.0, 3),
    };
    let e = ExponentPair::new(p, q, n)?;
    let gs = solve_entire_ground_state(&e, EntireParams::default())?;
    let m = gs.moments();
    println!("p = {p}, q = {q}, N = {n}");
    println!("U(0) = {:.10}  V(0) = {:.10}", gs.u[0], gs.v[0]);
    println!("residual {:.2e} after {} Newton steps, ray t* = {:.12}", gs.residual_norm, gs.newton_iterations, gs.ray_t_star);
    println!("A0 = {:.8}  B0 = {:.8}", m.a0, m.b0);
    println!("M2U = {:.8}  M2V = {:.8}", m.m2u, m.m2v);
    println!("C_inf = {:.10}", gs.c_inf);
    println!("eta- = {:.6}  eta+ = {:.6}  int UV = {:.6}", gs.eta(EtaSign::Minus), gs.eta(EtaSign::Plus), gs.cross_mass());
    println!("decay: U ~ exp(-{:.6} r), V ~ exp(-{:.6} r)", gs.decay_u.rate, gs.decay_v.rate);
    println!();
    println!("{:>6} {:>14} {:>14}", "r", "U", "V");
    for r in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0] {
        println!("{r:>6.1} {:>14.6e} {:>14.6e}", gs.u_at(r), gs.v_at(r));
    }
    Ok(())
}
