use num_complex::Complex64;

use super::tree::CandidateList;
use super::DetectError;
use crate::airlink::ConstellationSpec;

/// Magnitude bound on every emitted LLR.
pub const LLR_MAX: f64 = 30.0;

/// Max-log LLRs from a candidate list whose symbols are in user order.
///
/// For each user `u` and bit `b` (index `u·bits_per_symbol + b`) the LLR is
/// `min{metric : bit = 1} − min{metric : bit = 0}`, so positive values
/// favour 0. Missing hypotheses and large values clamp to `±LLR_MAX`.
pub fn compute_llrs(
    cands: &CandidateList,
    cons: &ConstellationSpec,
    n_users: usize,
) -> Result<Vec<f64>, DetectError> {
    if cands.is_empty() {
        return Err(DetectError::EmptyList);
    }
    let bps = cons.bits_per_symbol;
    let nbits = n_users * bps;
    let mut min0 = vec![f64::INFINITY; nbits];
    let mut min1 = vec![f64::INFINITY; nbits];
    for c in &cands.entries {
        if c.symbols.len() != n_users {
            return Err(DetectError::DimensionMismatch(format!(
                "candidate has {} symbols, expected {n_users}",
                c.symbols.len()
            )));
        }
        for (u, &s) in c.symbols.iter().enumerate() {
            for b in 0..bps {
                let slot = if cons.bit(s, b) == 0 { &mut min0 } else { &mut min1 };
                let i = u * bps + b;
                if c.metric < slot[i] {
                    slot[i] = c.metric;
                }
            }
        }
    }
    Ok(min0
        .iter()
        .zip(&min1)
        .map(|(&m0, &m1)| match (m0.is_finite(), m1.is_finite()) {
            (true, true) => (m1 - m0).clamp(-LLR_MAX, LLR_MAX),
            (true, false) => LLR_MAX,
            (false, true) => -LLR_MAX,
            (false, false) => 0.0,
        })
        .collect())
}

/// Max-log LLRs for one equalized symbol `z = s + e`, `e ~ CN(0, noise_var)`,
/// with the same sign convention and clamp as [`compute_llrs`].
pub fn demap_scalar(z: Complex64, noise_var: f64, cons: &ConstellationSpec) -> Vec<f64> {
    let scale = 1.0 / noise_var.max(f64::MIN_POSITIVE);
    let bps = cons.bits_per_symbol;
    let mut min0 = vec![f64::INFINITY; bps];
    let mut min1 = vec![f64::INFINITY; bps];
    for (s, p) in cons.points.iter().enumerate() {
        let d = (z - p).norm_sqr() * scale;
        for b in 0..bps {
            let slot = if cons.bit(s, b) == 0 {
                &mut min0[b]
            } else {
                &mut min1[b]
            };
            *slot = slot.min(d);
        }
    }
    min0.iter()
        .zip(&min1)
        .map(|(m0, m1)| {
            let l = m1 - m0;
            if l.is_nan() {
                0.0
            } else {
                l.clamp(-LLR_MAX, LLR_MAX)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airlink::{build_constellation, ConstellationKind};
    use crate::detectors::Candidate;

    fn list(items: &[(usize, f64)]) -> CandidateList {
        CandidateList {
            entries: items
                .iter()
                .map(|&(s, metric)| Candidate {
                    symbols: vec![s],
                    metric,
                })
                .collect(),
        }
    }

    #[test]
    fn two_term_difference() {
        let cons = build_constellation(ConstellationKind::Qpsk);
        // symbol 0 = bits 00, symbol 2 = bits 10
        let llr = compute_llrs(&list(&[(0, 1.0), (2, 3.0)]), &cons, 1).unwrap();
        assert_eq!(llr[0], 2.0);
        // bit 1 is 0 in both: only the 0 hypothesis is present
        assert_eq!(llr[1], LLR_MAX);
    }

    #[test]
    fn equal_metrics_give_zero() {
        let cons = build_constellation(ConstellationKind::Qpsk);
        let llr = compute_llrs(&list(&[(0, 1.5), (3, 1.5)]), &cons, 1).unwrap();
        assert_eq!(llr, vec![0.0, 0.0]);
    }

    #[test]
    fn missing_zero_hypothesis_clamps_negative() {
        let cons = build_constellation(ConstellationKind::Qpsk);
        let llr = compute_llrs(&list(&[(2, 0.5), (3, 0.7)]), &cons, 1).unwrap();
        assert_eq!(llr[0], -LLR_MAX);
    }

    #[test]
    fn complementing_bits_flips_sign() {
        let cons = build_constellation(ConstellationKind::Qam16);
        let items = [(0b0011, 0.4), (0b0101, 1.1), (0b1110, 2.5)];
        let flipped: Vec<_> = items.iter().map(|&(s, m)| (s ^ 0b1111, m)).collect();
        let a = compute_llrs(&list(&items), &cons, 1).unwrap();
        let b = compute_llrs(&list(&flipped), &cons, 1).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn scalar_demapper_matches_list_form() {
        let cons = build_constellation(ConstellationKind::Qam16);
        let z = Complex64::new(0.21, -0.47);
        let nv = 0.3;
        let cands = list(
            &(0..16)
                .map(|s| (s, (z - cons.points[s]).norm_sqr() / nv))
                .collect::<Vec<_>>(),
        );
        let want = compute_llrs(&cands, &cons, 1).unwrap();
        let got = demap_scalar(z, nv, &cons);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        // nearest point to z has bits that all get the favoured sign
        let hard = cons.slice(z);
        for (b, l) in got.iter().enumerate() {
            assert_eq!(cons.bit(hard, b) == 0, *l > 0.0);
        }
    }

    #[test]
    fn empty_list_rejected() {
        let cons = build_constellation(ConstellationKind::Qpsk);
        assert!(matches!(
            compute_llrs(&CandidateList::default(), &cons, 1),
            Err(DetectError::EmptyList)
        ));
    }
}
