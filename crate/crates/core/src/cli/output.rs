//! Deterministic CSV writers.
//!
//! Numbers use Rust's `{:?}` float formatting, which is the shortest string
//! that parses back to the same `f64`.

use std::fmt::Write as _;

use crate::stepper::{SimState, Trajectory};

pub const DIAGNOSTICS_HEADER: &str =
    "t,energy,theta_mean,chi_mean,theta_min,theta_max,chi_min,chi_max,dissipation,newton_iters";

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// One row per saved state.
pub fn diagnostics_csv(traj: &Trajectory) -> String {
    let mut s = String::with_capacity(64 * (traj.samples.len() + 1));
    s.push_str(DIAGNOSTICS_HEADER);
    s.push('\n');
    for sample in &traj.samples {
        let st = &sample.state;
        let r = &sample.report;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            num(st.t),
            num(r.energy.total),
            num(st.theta.mean()),
            num(st.chi.mean()),
            num(r.theta_min),
            num(r.theta_max),
            num(r.chi_min),
            num(r.chi_max),
            num(r.dissipation),
            r.newton_iters
        );
    }
    s
}

/// Cell centres and nodal values; `w` only for the conserved variant.
pub fn final_state_csv(state: &SimState) -> String {
    let mut s = String::from(if state.w.is_some() { "x,theta,chi,u,w\n" } else { "x,theta,chi,u\n" });
    let x = state.theta.grid().centers();
    for i in 0..x.len() {
        let _ = write!(
            s,
            "{},{},{},{}",
            num(x[i]),
            num(state.theta.values()[i]),
            num(state.chi.values()[i]),
            num(state.u.values()[i])
        );
        if let Some(w) = &state.w {
            let _ = write!(s, ",{}", num(w.values()[i]));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip() {
        for v in [0.1, 1.0, 1e-300, -2.5e17, 1.0 / 3.0, f64::MIN_POSITIVE] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(1e-7), "1e-7");
    }
}
