//! Pair-parallel execution. Every pair draws from its own substream and all
//! aggregates are integer counts, so results equal the sequential run
//! exactly.

use qkd2e_core::protocol::{wigner_config, Session, SessionConfig, SessionLog, SessionSummary, WignerRunData};
use qkd2e_core::wigner::WignerSettings;
use qkd2e_core::Result;
use rayon::prelude::*;

const CHUNK: u64 = 4096;

fn chunks(n: u64) -> Vec<(u64, u64)> {
    (0..n.div_ceil(CHUNK)).map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(n))).collect()
}

/// Runs every pair and keeps the records, in index order.
pub fn run_parallel(session: &Session) -> Result<SessionLog> {
    let records =
        (0..session.config().n_pairs).into_par_iter().map(|i| session.run_pair(i)).collect::<Result<Vec<_>>>()?;
    Ok(SessionLog { meta: session.meta(), records })
}

pub fn summarize_parallel(session: &Session) -> Result<SessionSummary> {
    let meta = session.meta();
    let parts = chunks(session.config().n_pairs)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut s = SessionSummary::new(&meta);
            for i in lo..hi {
                s.add(&session.run_pair(i)?);
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = SessionSummary::new(&meta);
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

/// Parallel counterpart of [`qkd2e_core::protocol::wigner_session`].
pub fn wigner_parallel(config: SessionConfig, settings: &WignerSettings) -> Result<WignerRunData> {
    let session = Session::prepare(wigner_config(config, settings)?)?;
    let dofs = session.config().channel.dofs();
    let parts = chunks(session.config().n_pairs)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut d = WignerRunData::new(*settings, dofs);
            for i in lo..hi {
                d.add(&session.run_pair(i)?);
            }
            Ok(d)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = WignerRunData::new(*settings, dofs);
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}
