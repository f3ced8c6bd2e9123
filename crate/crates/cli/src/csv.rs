//! CSV tables. Numbers use Rust's shortest round-trip formatting, so every
//! cell carries full precision with a '.' decimal separator. Absent values
//! are empty cells.

use std::fmt::Write as _;

use lmeec_core::{RoundReport, SimResult};

use crate::sweep::{FigRow, SummaryRow};

pub const ROUNDS_HEADER: &str =
    "protocol,n,seed,round,time_s,alive,unreachable,ch_count,round_dissipated_J,total_residual_J";
pub const SUMMARY_HEADER: &str = "protocol,n,seed,deployment_hash,avg_dissipated_J,fnd_s,hnd_s,lnd_s,rounds_run";
pub const FIG1_HEADER: &str = "n,protocol,mean_avg_dissipated_J,stddev";
pub const FIG2_HEADER: &str = "n,protocol,mean_fnd_s,stddev";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn rounds_csv(result: &SimResult) -> String {
    let cfg = &result.config;
    let mut out = String::from(ROUNDS_HEADER);
    out.push('\n');
    for r in &result.rounds {
        let RoundReport {
            round,
            time_start,
            alive_count,
            unreachable_count,
            ch_count,
            energy_dissipated,
            total_residual,
            ..
        } = r;
        writeln!(
            out,
            "{},{},{},{round},{time_start},{alive_count},{unreachable_count},{ch_count},{energy_dissipated},{total_residual}",
            cfg.protocol.name(),
            cfg.n_nodes,
            cfg.seed,
        )
        .unwrap();
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:016x},{},{},{},{},{}",
            r.protocol.name(),
            r.n,
            r.seed,
            r.deployment_hash,
            r.avg_dissipated_j,
            opt(r.fnd_s),
            opt(r.hnd_s),
            opt(r.lnd_s),
            r.rounds_run
        )
        .unwrap();
    }
    out
}

pub fn fig_csv(header: &str, rows: &[FigRow]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        writeln!(out, "{},{},{},{}", r.n, r.protocol.name(), opt(r.mean), opt(r.stddev)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use lmeec_core::Protocol;

    #[test]
    fn golden_headers() {
        assert_eq!(
            ROUNDS_HEADER,
            "protocol,n,seed,round,time_s,alive,unreachable,ch_count,round_dissipated_J,total_residual_J"
        );
        assert_eq!(
            SUMMARY_HEADER,
            "protocol,n,seed,deployment_hash,avg_dissipated_J,fnd_s,hnd_s,lnd_s,rounds_run"
        );
        assert_eq!(FIG1_HEADER, "n,protocol,mean_avg_dissipated_J,stddev");
        assert_eq!(FIG2_HEADER, "n,protocol,mean_fnd_s,stddev");
    }

    #[test]
    fn summary_formatting() {
        let row = SummaryRow {
            protocol: Protocol::Leach,
            n: 50,
            seed: 7,
            deployment_hash: 0xabc,
            avg_dissipated_j: 0.1 + 0.2,
            fnd_s: Some(120.0),
            hnd_s: None,
            lnd_s: None,
            rounds_run: 9,
            conservation_error: 0.0,
        };
        let text = summary_csv(&[row]);
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "leach,50,7,0000000000000abc,0.30000000000000004,120,,,9"
        );
    }
}
