//! Closed-form per-cycle time budgets of the three network architectures.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConstants {
    /// Solve time per unknown.
    pub c_s: f64,
    /// Update time per unknown.
    pub c_u: f64,
    /// Connection setup time.
    pub c_0c: f64,
    /// Transmission time per unit of data.
    pub c_c: f64,
    /// Subproblem dimension.
    pub m: f64,
    pub n: f64,
    /// Maximal neighbor count.
    pub l_bar: f64,
    /// Server count of the server-client network.
    pub servers: f64,
}

impl Default for CostConstants {
    fn default() -> Self {
        Self { c_s: 10.0, c_u: 1.0, c_0c: 1.0, c_c: 1.0, m: 400.0, n: 400.0, l_bar: 8.0, servers: 20.0 }
    }
}

impl CostConstants {
    pub fn validate(&self) -> Result<()> {
        let all = [self.c_s, self.c_u, self.c_0c, self.c_c, self.m, self.n, self.l_bar, self.servers];
        if all.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Parameter("cost constants must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// `2(n+1)C0c + Cc n(M+1) + Cs max(M,n) + Cu n(M+1)`.
pub fn cycle_time_master_slave(c: &CostConstants) -> f64 {
    2.0 * (c.n + 1.0) * c.c_0c + c.c_c * c.n * (c.m + 1.0) + c.c_s * c.m.max(c.n) + c.c_u * c.n * (c.m + 1.0)
}

/// `2 l_bar (C0c + Cc M) + 2n(C0c + Cc) + Cs max(M,n) + Cu M`.
pub fn cycle_time_local(c: &CostConstants) -> f64 {
    2.0 * c.l_bar * (c.c_0c + c.c_c * c.m) + 2.0 * c.n * (c.c_0c + c.c_c) + c.c_s * c.m.max(c.n) + c.c_u * c.m
}

/// Local network where a neighbor solves a failed node's problem on top of its own.
pub fn cycle_time_local_doubled(c: &CostConstants) -> f64 {
    cycle_time_local(c) - c.c_s * c.m.max(c.n) + 2.0 * c.c_s * c.m
}

/// `2(n/L)(C0c + Cc M) + 2L(C0c + Cc n/L) + Cs max(M,n) + Cu (M+1) n/L`.
pub fn cycle_time_server_client(c: &CostConstants) -> Result<f64> {
    let l = c.servers;
    if !(l >= 1.0) || l > c.n {
        return Err(Error::Parameter(format!("server count L = {l} must lie in [1, n]")));
    }
    Ok(2.0 * (c.n / l) * (c.c_0c + c.c_c * c.m)
        + 2.0 * l * (c.c_0c + c.c_c * c.n / l)
        + c.c_s * c.m.max(c.n)
        + c.c_u * (c.m + 1.0) * c.n / l)
}

/// Fault mitigation strategy of the local network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mitigation {
    Redundancy,
    DoubledSolve,
}

/// Per-run cost of redundancy (with `slowdown` extra iterations factor) against the doubled solve.
pub fn compare_mitigation(c: &CostConstants, slowdown: f64) -> (Mitigation, f64, f64) {
    let red = cycle_time_local(c) * slowdown;
    let dbl = cycle_time_local_doubled(c);
    let best = if red <= dbl { Mitigation::Redundancy } else { Mitigation::DoubledSolve };
    (best, red, dbl)
}

/// Aligned three-architecture comparison table.
pub fn comparison_table(c: &CostConstants) -> Result<String> {
    c.validate()?;
    let rows = [
        ("master-slave", cycle_time_master_slave(c)),
        ("local-communication", cycle_time_local(c)),
        ("local (doubled solve)", cycle_time_local_doubled(c)),
        ("server-client", cycle_time_server_client(c)?),
    ];
    let mut out = format!("{:<24}{:>16}\n", "architecture", "cycle time");
    for (name, t) in rows {
        out.push_str(&format!("{name:<24}{t:>16.3}\n"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: f64, m: f64) -> CostConstants {
        CostConstants { c_s: 1.0, c_u: 1.0, c_0c: 1.0, c_c: 1.0, m, n, l_bar: 8.0, servers: 1.0 }
    }

    #[test]
    fn zero_constants() {
        let z = CostConstants { c_s: 0.0, c_u: 0.0, c_0c: 0.0, c_c: 0.0, servers: 1.0, ..Default::default() };
        assert_eq!(cycle_time_master_slave(&z), 0.0);
        assert_eq!(cycle_time_local(&z), 0.0);
        assert_eq!(cycle_time_server_client(&z).unwrap(), 0.0);
    }

    #[test]
    fn hand_values() {
        assert_eq!(cycle_time_master_slave(&ones(4.0, 3.0)), 46.0);
        let mut c = ones(400.0, 400.0);
        c.c_s = 10.0;
        assert_eq!(cycle_time_local(&c), 12416.0);
        c.servers = 20.0;
        assert_eq!(cycle_time_server_client(&c).unwrap(), 28900.0);
        c.servers = 401.0;
        assert!(cycle_time_server_client(&c).is_err());
    }

    #[test]
    fn doubled_solve_tradeoff() {
        let mut c = CostConstants { c_s: 1000.0, ..Default::default() };
        assert_eq!(compare_mitigation(&c, 1.1).0, Mitigation::Redundancy);
        c.c_s = 0.01;
        assert_eq!(compare_mitigation(&c, 1.1).0, Mitigation::DoubledSolve);
    }
}
