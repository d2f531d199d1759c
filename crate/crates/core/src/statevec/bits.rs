use alloc::string::String;
use smallvec::SmallVec;

/// Computational basis label; bit `q` is qubit `q`. Up to 128 qubits are
/// stored inline.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct BitString(SmallVec<[u64; 2]>);

impl Clone for BitString {
    #[inline]
    fn clone(&self) -> Self {
        if let [w0, w1] = self.0.as_slice() {
            return BitString(SmallVec::from_buf([*w0, *w1]));
        }
        BitString(SmallVec::from_slice(&self.0))
    }
}

impl Ord for BitString {
    #[inline]
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        let (a, b) = (self.0.as_slice(), other.0.as_slice());
        if let ([a0, a1], [b0, b1]) = (a, b) {
            return a0.cmp(b0).then(a1.cmp(b1));
        }
        for (x, y) in a.iter().zip(b) {
            if x != y {
                return x.cmp(y);
            }
        }
        a.len().cmp(&b.len())
    }
}

impl PartialOrd for BitString {
    #[inline]
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl BitString {
    pub fn zeros(num_qubits: usize) -> Self {
        BitString(smallvec::smallvec![0; num_qubits.div_ceil(64).max(1)])
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut out = Self::zeros(bits.len());
        for (q, &b) in bits.iter().enumerate() {
            out.set(q, b);
        }
        out
    }

    /// Parses `"0110…"`, qubit 0 first.
    pub fn parse(text: &str) -> Option<Self> {
        let mut out = Self::zeros(text.len());
        for (q, c) in text.chars().enumerate() {
            match c {
                '0' => {}
                '1' => out.set(q, true),
                _ => return None,
            }
        }
        Some(out)
    }

    #[inline]
    pub fn get(&self, q: usize) -> bool {
        (self.0[q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, q: usize, value: bool) {
        let mask = 1u64 << (q % 64);
        if value {
            self.0[q / 64] |= mask;
        } else {
            self.0[q / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, q: usize) {
        self.0[q / 64] ^= 1u64 << (q % 64);
    }

    /// True when `self` and `other` agree on every bit that outranks `q` in
    /// the sort order.
    #[inline]
    pub(crate) fn same_above(&self, other: &Self, q: usize) -> bool {
        let w = q / 64;
        self.0[..w] == other.0[..w] && (self.0[w] >> (q % 64)) >> 1 == (other.0[w] >> (q % 64)) >> 1
    }

    pub fn with_flipped(&self, q: usize) -> Self {
        let mut out = self.clone();
        out.flip(q);
        out
    }

    pub fn count_ones(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    /// Renders the first `num_qubits` bits, qubit 0 first.
    pub fn render(&self, num_qubits: usize) -> String {
        (0..num_qubits)
            .map(|q| if self.get(q) { '1' } else { '0' })
            .collect()
    }
}
