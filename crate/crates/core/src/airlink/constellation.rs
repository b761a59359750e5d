use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::AirlinkError;

/// Supported modulation alphabets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstellationKind {
    Qpsk,
    Qam16,
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstellationKind::Qpsk => "qpsk",
            ConstellationKind::Qam16 => "qam16",
        })
    }
}

impl FromStr for ConstellationKind {
    type Err = AirlinkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qpsk" | "qam4" => Ok(ConstellationKind::Qpsk),
            "qam16" | "16qam" => Ok(ConstellationKind::Qam16),
            other => Err(AirlinkError::UnsupportedKind(other.to_string())),
        }
    }
}

/// Unit-energy Gray-mapped constellation.
///
/// A symbol index doubles as its bit label: bit `b` of symbol `s` is
/// `(s >> (bits_per_symbol − 1 − b)) & 1`, so `points[s]` is the point
/// carrying that label. The first half of the label drives the in-phase
/// axis and the second half the quadrature axis.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstellationSpec {
    pub kind: ConstellationKind,
    pub points: Vec<Complex64>,
    pub bits_per_symbol: usize,
}

/// Per-axis amplitude for a Gray-labelled axis of `bits` bits (before scaling).
fn axis_level(label: usize, bits: usize) -> f64 {
    match bits {
        // 0 → +1, 1 → −1
        1 => 1.0 - 2.0 * label as f64,
        // 00 → +1, 01 → +3, 10 → −1, 11 → −3; neighbours on the axis differ in one bit
        2 => {
            let hi = (label >> 1) & 1;
            let lo = label & 1;
            (1.0 - 2.0 * hi as f64) * (2.0 - (1.0 - 2.0 * lo as f64))
        }
        _ => unreachable!("unsupported axis width"),
    }
}

/// Builds the unit-energy Gray constellation for `kind`.
pub fn build_constellation(kind: ConstellationKind) -> ConstellationSpec {
    let (bits_per_symbol, norm) = match kind {
        ConstellationKind::Qpsk => (2, 2f64.sqrt()),
        ConstellationKind::Qam16 => (4, 10f64.sqrt()),
    };
    let half = bits_per_symbol / 2;
    let mask = (1 << half) - 1;
    let points = (0..1usize << bits_per_symbol)
        .map(|s| {
            let i = axis_level(s >> half, half);
            let q = axis_level(s & mask, half);
            Complex64::new(i, q) / norm
        })
        .collect();
    ConstellationSpec {
        kind,
        points,
        bits_per_symbol,
    }
}

impl ConstellationSpec {
    pub fn size(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn bit(&self, symbol: usize, b: usize) -> u8 {
        ((symbol >> (self.bits_per_symbol - 1 - b)) & 1) as u8
    }

    pub fn symbol_to_bits(&self, symbol: usize) -> Vec<u8> {
        (0..self.bits_per_symbol).map(|b| self.bit(symbol, b)).collect()
    }

    /// Symbol index for `bits` (MSB first). Panics on wrong length.
    pub fn bits_to_symbol(&self, bits: &[u8]) -> usize {
        assert_eq!(bits.len(), self.bits_per_symbol);
        bits.iter().fold(0, |acc, &b| (acc << 1) | (b as usize & 1))
    }

    /// Nearest constellation point, ties to the lowest index.
    pub fn slice(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (s, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = s;
            }
        }
        best
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(Complex64::norm_sqr).sum::<f64>() / self.points.len() as f64
    }

    /// Minimum distance between distinct points.
    pub fn min_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                d = d.min((a - b).norm());
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn qpsk_points() {
        let c = build_constellation(ConstellationKind::Qpsk);
        assert_eq!(c.bits_per_symbol, 2);
        assert_eq!(c.size(), 4);
        for p in &c.points {
            assert!((p.re.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
            assert!((p.im.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
        }
        let mut sorted: Vec<_> = c.points.iter().map(|p| (p.re > 0.0, p.im > 0.0)).collect();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
    }

    #[test]
    fn qam16_unit_energy_and_levels() {
        let c = build_constellation(ConstellationKind::Qam16);
        assert!((c.average_energy() - 1.0).abs() < 1e-12);
        let s10 = 10f64.sqrt();
        for p in &c.points {
            for v in [p.re, p.im] {
                let lv = (v * s10).round();
                assert!((v * s10 - lv).abs() < 1e-12);
                assert!([1.0, 3.0].contains(&lv.abs()));
            }
        }
    }

    #[test]
    fn qam16_adjacent_points_differ_in_one_bit() {
        let c = build_constellation(ConstellationKind::Qam16);
        let step = 2.0 / 10f64.sqrt();
        let mut pairs = 0;
        for a in 0..16 {
            for b in a + 1..16 {
                let d = (c.points[a] - c.points[b]).norm();
                if (d - step).abs() < 1e-9 {
                    pairs += 1;
                    assert_eq!((a ^ b).count_ones(), 1, "{a:04b} vs {b:04b}");
                }
            }
        }
        // 4 rows × 3 horizontal + 4 columns × 3 vertical
        assert_eq!(pairs, 24);
    }

    #[test]
    fn bits_round_trip() {
        for kind in [ConstellationKind::Qpsk, ConstellationKind::Qam16] {
            let c = build_constellation(kind);
            for s in 0..c.size() {
                assert_eq!(c.bits_to_symbol(&c.symbol_to_bits(s)), s);
                assert_eq!(c.slice(c.points[s]), s);
            }
        }
    }

    #[test]
    fn parse_kind() {
        assert_eq!(
            "QAM16".parse::<ConstellationKind>().unwrap(),
            ConstellationKind::Qam16
        );
        assert_eq!(
            "qpsk".parse::<ConstellationKind>().unwrap(),
            ConstellationKind::Qpsk
        );
        assert!(matches!(
            "qam64".parse::<ConstellationKind>(),
            Err(AirlinkError::UnsupportedKind(_))
        ));
    }
}
