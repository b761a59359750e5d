//! CSV and plot-data writers.

use std::io::{self, Write};

use crate::config::DetectorKind;
use crate::engine::BerRecord;

pub const CSV_HEADER: &str = "detector,snr_db,trials,bits,bit_errors,ber,coded,ce_mode,seed";

/// One header line, then one row per record in the given order. `ber` is
/// printed with six significant digits.
pub fn write_csv<W: Write>(records: &[BerRecord], mut sink: W) -> io::Result<()> {
    writeln!(sink, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            sink,
            "{},{},{},{},{},{:.5e},{},{},{}",
            r.detector, r.snr_db, r.trials, r.bits, r.bit_errors, r.ber, r.coded, r.ce_mode, r.seed
        )?;
    }
    sink.flush()
}

/// One block per detector: a `# detector <name>` comment line followed by
/// `snr_db ber` lines. Blocks are separated by a blank line.
pub fn emit_plot_data<W: Write>(records: &[BerRecord], mut sink: W) -> io::Result<()> {
    let mut order: Vec<DetectorKind> = Vec::new();
    for r in records {
        if !order.contains(&r.detector) {
            order.push(r.detector);
        }
    }
    for (i, d) in order.iter().enumerate() {
        if i > 0 {
            writeln!(sink)?;
        }
        writeln!(sink, "# detector {d}")?;
        for r in records.iter().filter(|r| r.detector == *d) {
            writeln!(sink, "{} {:.5e}", r.snr_db, r.ber)?;
        }
    }
    sink.flush()
}

/// Reads back a file produced by [`write_csv`]. `ber` is recomputed from
/// the integer counts.
pub fn read_csv(text: &str) -> Result<Vec<BerRecord>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(CSV_HEADER) => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(format!("row {}: expected 9 fields, got {}", i + 1, f.len()));
            }
            let bad = |what: &str| format!("row {}: bad {what}", i + 1);
            let bits: u64 = f[3].parse().map_err(|_| bad("bits"))?;
            let bit_errors: u64 = f[4].parse().map_err(|_| bad("bit_errors"))?;
            Ok(BerRecord {
                detector: f[0].parse().map_err(|_| bad("detector"))?,
                snr_db: f[1].parse().map_err(|_| bad("snr_db"))?,
                trials: f[2].parse().map_err(|_| bad("trials"))?,
                bits,
                bit_errors,
                ber: bit_errors as f64 / bits as f64,
                coded: f[6].parse().map_err(|_| bad("coded"))?,
                ce_mode: f[7].parse().map_err(|_| bad("ce_mode"))?,
                seed: f[8].parse().map_err(|_| bad("seed"))?,
            })
        })
        .collect()
}
