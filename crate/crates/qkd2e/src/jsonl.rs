//! JSON Lines session logs: one pair record per line.

use std::io::{BufRead, Write};

use anyhow::{Context, Result};
use qkd2e_core::protocol::PairRecord;

pub fn write_records<W: Write>(records: &[PairRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records<R: BufRead>(input: R) -> Result<Vec<PairRecord>> {
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()))
        .map(|(i, line)| {
            let line = line?;
            serde_json::from_str(&line).with_context(|| format!("line {}", i + 1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use qkd2e_core::protocol::{run_session, Channel, SessionConfig};
    use qkd2e_core::strategy::{EavesdropConfig, Strategy};

    #[test]
    fn round_trip() {
        let cfg =
            SessionConfig::bb84x2(Channel::Double, 200, 1).with_eve(EavesdropConfig::new(Strategy::Breidbart, 0.5));
        let log = run_session(cfg).unwrap();
        let mut buf = Vec::new();
        write_records(&log.records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 200);
        let first = text.lines().next().unwrap();
        let keys = ["idx", "a_basis", "b_basis", "a_out", "b_out", "eve", "eve_out", "sifted"];
        let pos: Vec<usize> = keys.iter().map(|k| first.find(&format!("\"{k}\":")).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{first}");
        assert_eq!(serde_json::from_str::<serde_json::Value>(first).unwrap().as_object().unwrap().len(), 8);

        let back = read_records(&buf[..]).unwrap();
        // The Eve basis is not part of the line format.
        let stripped: Vec<_> = log.records.into_iter().map(|r| PairRecord { eve_basis: None, ..r }).collect();
        assert_eq!(back, stripped);
    }

    #[test]
    fn bad_line_is_reported() {
        let err = read_records(&b"{\"idx\": 0}\n"[..]).unwrap_err();
        assert!(format!("{err:#}").contains("line 1"));
    }
}
