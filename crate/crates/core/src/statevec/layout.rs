/// Telescope site. Photonic modes, memory registers (`Ā`, `B̄`) and the
/// local halves of the decoding Bell pairs (`C` at A, `D` at B) are all
/// tagged with the site that holds them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Site {
    A,
    B,
}

impl Site {
    pub const BOTH: [Site; 2] = [Site::A, Site::B];

    fn index(self) -> usize {
        match self {
            Site::A => 0,
            Site::B => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QubitRole {
    /// Single-rail photonic qubit for temporal mode `j` (1-based) and spatial
    /// mode `i` at a site.
    Photonic { site: Site, j: usize, i: usize },
    /// Memory qubit `k` (1-based) of spatial mode `i` in register `Ā`/`B̄`.
    Memory { site: Site, k: usize, i: usize },
    /// Bell-pair half `C_ki` (site A) or `D_ki` (site B).
    Ancilla { site: Site, k: usize, i: usize },
}

/// Flat qubit indexing for `M` temporal modes and `K` spatial modes:
/// `2MK` photonic qubits, then `2·M̄·K` memory qubits, then `2·M̄·K` ancillas,
/// with `M̄ = ⌈log2(M+1)⌉`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    temporal_modes: usize,
    spatial_modes: usize,
    memory_bits: usize,
}

impl RegisterLayout {
    /// # Panics
    /// If either mode count is zero.
    pub fn new(temporal_modes: usize, spatial_modes: usize) -> Self {
        assert!(temporal_modes >= 1 && spatial_modes >= 1, "mode counts must be positive");
        let memory_bits = (usize::BITS - temporal_modes.leading_zeros()) as usize;
        Self {
            temporal_modes,
            spatial_modes,
            memory_bits,
        }
    }

    /// `M`.
    pub fn temporal_modes(&self) -> usize {
        self.temporal_modes
    }

    /// `K`.
    pub fn spatial_modes(&self) -> usize {
        self.spatial_modes
    }

    /// `M̄`, memory qubits per site and spatial mode.
    pub fn memory_bits(&self) -> usize {
        self.memory_bits
    }

    fn photonic_count(&self) -> usize {
        2 * self.temporal_modes * self.spatial_modes
    }

    fn register_count(&self) -> usize {
        2 * self.memory_bits * self.spatial_modes
    }

    pub fn num_qubits(&self) -> usize {
        self.photonic_count() + 2 * self.register_count()
    }

    /// Photonic qubit `(site, j, i)`, `j ∈ 1..=M`, `i ∈ 0..K`.
    pub fn photonic(&self, site: Site, j: usize, i: usize) -> usize {
        assert!((1..=self.temporal_modes).contains(&j) && i < self.spatial_modes);
        (site.index() * self.temporal_modes + (j - 1)) * self.spatial_modes + i
    }

    /// Memory qubit `(ᾱ, k, i)`, `k ∈ 1..=M̄`.
    pub fn memory(&self, site: Site, k: usize, i: usize) -> usize {
        assert!((1..=self.memory_bits).contains(&k) && i < self.spatial_modes);
        self.photonic_count() + (site.index() * self.memory_bits + (k - 1)) * self.spatial_modes + i
    }

    /// Ancilla qubit `C_ki` (site A) or `D_ki` (site B).
    pub fn ancilla(&self, site: Site, k: usize, i: usize) -> usize {
        assert!((1..=self.memory_bits).contains(&k) && i < self.spatial_modes);
        self.photonic_count()
            + self.register_count()
            + (site.index() * self.memory_bits + (k - 1)) * self.spatial_modes
            + i
    }

    pub fn role(&self, qubit: usize) -> Option<QubitRole> {
        let (m, kk, mb) = (self.temporal_modes, self.spatial_modes, self.memory_bits);
        if qubit < self.photonic_count() {
            let site = if qubit / (m * kk) == 0 { Site::A } else { Site::B };
            let rest = qubit % (m * kk);
            return Some(QubitRole::Photonic { site, j: rest / kk + 1, i: rest % kk });
        }
        let mut q = qubit - self.photonic_count();
        let memory = q < self.register_count();
        if !memory {
            q -= self.register_count();
            if q >= self.register_count() {
                return None;
            }
        }
        let site = if q / (mb * kk) == 0 { Site::A } else { Site::B };
        let rest = q % (mb * kk);
        let (k, i) = (rest / kk + 1, rest % kk);
        Some(if memory {
            QubitRole::Memory { site, k, i }
        } else {
            QubitRole::Ancilla { site, k, i }
        })
    }

    /// `w_kj`: the `k`-th binary digit of `j`, `k = 1` least significant.
    pub fn digit(j: usize, k: usize) -> bool {
        (j >> (k - 1)) & 1 == 1
    }

    /// All photonic qubits of temporal mode `j`.
    pub fn temporal_support(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        Site::BOTH
            .into_iter()
            .flat_map(move |site| (0..self.spatial_modes).map(move |i| self.photonic(site, j, i)))
    }
}
