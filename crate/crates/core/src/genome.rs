//! Bitstring encoding of evolved circuits.
//!
//! Every grid cell is a 7-bit gene: three bits select the gate kind and four
//! bits select a rotation angle `n·π/8`, `n ∈ [1, 16]`. In PCA mode the string
//! is prefixed with a 7-bit header whose first six bits carry the number of
//! principal components (the seventh bit is unused).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bits per gate gene.
pub const GENE_BITS: usize = 7;
/// Bits in the PCA header (six used, one padding bit).
pub const HEADER_BITS: usize = 7;
/// Header bits that actually carry the component count.
pub const HEADER_VALUE_BITS: usize = 6;
/// Largest component count the header can express.
pub const MAX_PCA_COMPONENTS: usize = 1 << HEADER_VALUE_BITS;

/// Whether the individual carries a PCA component header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingMode {
    /// `7 + M·N·7` bits; the header selects the PCA dimensionality.
    PcaHeader,
    /// `M·N·7` bits; the input dimension is fixed by the data.
    FixedFeatures,
}

/// Total bitstring length for an `qubits × layers` grid.
pub fn genome_length(qubits: usize, layers: usize, mode: EncodingMode) -> usize {
    let grid = qubits * layers * GENE_BITS;
    match mode {
        EncodingMode::PcaHeader => HEADER_BITS + grid,
        EncodingMode::FixedFeatures => grid,
    }
}

/// A string of binary digits, most significant bit of every field first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString(vec![0; len])
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        BitString((0..len).map(|_| rng.gen_range(0..=1u8)).collect())
    }

    /// Builds a bitstring from arbitrary bytes; any nonzero byte is a 1.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        BitString(bits.into_iter().map(|b| u8::from(b != 0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, index: usize) -> u8 {
        self.0[index]
    }

    pub fn flip(&mut self, index: usize) {
        self.0[index] ^= 1;
    }

    /// Exchanges `self[range]` with `other[range]`.
    pub fn swap_segment(&mut self, other: &mut BitString, start: usize, end: usize) {
        self.0[start..end].swap_with_slice(&mut other.0[start..end]);
    }

    fn read_uint(&self, start: usize, width: usize) -> usize {
        self.0[start..start + width]
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    fn push_uint(&mut self, value: usize, width: usize) {
        for shift in (0..width).rev() {
            self.0.push(((value >> shift) & 1) as u8);
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Input(format!(
                    "bitstring character {i} is {other:?}, expected '0' or '1'"
                ))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitString)
    }
}

impl From<BitString> for String {
    fn from(b: BitString) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for BitString {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// The eight gate types of the encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    RxParam,
    RyParam,
    RzParam,
    Cnot,
    Identity,
    RxFixed,
    RyFixed,
    RzFixed,
}

/// Rotation axis of a single-qubit gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::RxParam,
        GateKind::RyParam,
        GateKind::RzParam,
        GateKind::Cnot,
        GateKind::Identity,
        GateKind::RxFixed,
        GateKind::RyFixed,
        GateKind::RzFixed,
    ];

    /// Decodes the 3-bit gate-type field.
    pub fn from_code(code: u8) -> GateKind {
        match code & 0b111 {
            0b000 => GateKind::RxParam,
            0b001 => GateKind::RyParam,
            0b011 => GateKind::RzParam,
            0b101 => GateKind::Cnot,
            0b100 => GateKind::Identity,
            0b110 => GateKind::RxFixed,
            0b111 => GateKind::RyFixed,
            0b010 => GateKind::RzFixed,
            _ => unreachable!(),
        }
    }

    pub fn code(self) -> u8 {
        match self {
            GateKind::RxParam => 0b000,
            GateKind::RyParam => 0b001,
            GateKind::RzParam => 0b011,
            GateKind::Cnot => 0b101,
            GateKind::Identity => 0b100,
            GateKind::RxFixed => 0b110,
            GateKind::RyFixed => 0b111,
            GateKind::RzFixed => 0b010,
        }
    }

    /// Rotation whose angle is multiplied by an input feature.
    pub fn is_param(self) -> bool {
        matches!(self, GateKind::RxParam | GateKind::RyParam | GateKind::RzParam)
    }

    /// Any single-qubit rotation, parameterized or fixed.
    pub fn is_rotation(self) -> bool {
        self.axis().is_some()
    }

    pub fn axis(self) -> Option<Axis> {
        match self {
            GateKind::RxParam | GateKind::RxFixed => Some(Axis::X),
            GateKind::RyParam | GateKind::RyFixed => Some(Axis::Y),
            GateKind::RzParam | GateKind::RzFixed => Some(Axis::Z),
            GateKind::Cnot | GateKind::Identity => None,
        }
    }
}

/// Angle index `n` of a rotation `n·π/8`, always in `[1, 16]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AngleStep(u8);

impl AngleStep {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 16;

    pub fn new(step: u8) -> Option<AngleStep> {
        (Self::MIN..=Self::MAX).contains(&step).then_some(AngleStep(step))
    }

    /// Decodes the 4-bit angle field: `0000 → π/8`, …, `1111 → 2π`.
    pub fn from_code(code: u8) -> AngleStep {
        AngleStep((code & 0b1111) + 1)
    }

    pub fn code(self) -> u8 {
        self.0 - 1
    }

    pub fn step(self) -> u8 {
        self.0
    }

    pub fn radians(self) -> f64 {
        f64::from(self.0) * std::f64::consts::PI / 8.0
    }

    /// Reduced fraction of π, e.g. `π/8`, `3π/4`, `π`, `2π`.
    pub fn label(self) -> String {
        let g = gcd(self.0 as u32, 8);
        let (num, den) = (self.0 as u32 / g, 8 / g);
        match (num, den) {
            (1, 1) => "π".to_string(),
            (n, 1) => format!("{n}π"),
            (1, d) => format!("π/{d}"),
            (n, d) => format!("{n}π/{d}"),
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// One decoded grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateGene {
    pub kind: GateKind,
    /// Decoded for every gene; ignored by CNOT and identity.
    pub angle: AngleStep,
}

impl GateGene {
    pub fn new(kind: GateKind, angle: AngleStep) -> Self {
        GateGene { kind, angle }
    }

    pub fn identity() -> Self {
        GateGene::new(GateKind::Identity, AngleStep(1))
    }

    pub fn code(self) -> u8 {
        (self.kind.code() << 4) | self.angle.code()
    }

    pub fn from_code(code: u8) -> Self {
        GateGene::new(GateKind::from_code(code >> 4), AngleStep::from_code(code))
    }
}

/// Decodes a single 7-bit gene. Every pattern is valid.
pub fn decode_gate(bits: &[u8]) -> Result<GateGene> {
    if bits.len() != GENE_BITS {
        return Err(Error::Config(format!(
            "a gate gene has {GENE_BITS} bits, got {}",
            bits.len()
        )));
    }
    let code = bits.iter().fold(0u8, |acc, &b| (acc << 1) | u8::from(b != 0));
    Ok(GateGene::from_code(code))
}

/// Structured form of an individual.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CircuitGenome {
    qubits: usize,
    layers: usize,
    /// Layer-major: `grid[layer * qubits + qubit]`.
    grid: Vec<GateGene>,
    pca_components: Option<usize>,
}

impl CircuitGenome {
    /// Builds a genome from a layer-major cell list.
    pub fn new(
        qubits: usize,
        layers: usize,
        grid: Vec<GateGene>,
        pca_components: Option<usize>,
    ) -> Result<Self> {
        if qubits == 0 || layers == 0 {
            return Err(Error::Config(format!(
                "grid must be at least 1×1, got {qubits}×{layers}"
            )));
        }
        if grid.len() != qubits * layers {
            return Err(Error::Config(format!(
                "grid has {} cells, expected {}",
                grid.len(),
                qubits * layers
            )));
        }
        if let Some(r) = pca_components {
            if !(1..=MAX_PCA_COMPONENTS).contains(&r) {
                return Err(Error::Config(format!(
                    "pca component count {r} outside [1, {MAX_PCA_COMPONENTS}]"
                )));
            }
        }
        Ok(CircuitGenome {
            qubits,
            layers,
            grid,
            pca_components,
        })
    }

    /// A grid filled with identity gates.
    pub fn identity(qubits: usize, layers: usize, pca_components: Option<usize>) -> Result<Self> {
        Self::new(
            qubits,
            layers,
            vec![GateGene::identity(); qubits * layers],
            pca_components,
        )
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn pca_components(&self) -> Option<usize> {
        self.pca_components
    }

    pub fn mode(&self) -> EncodingMode {
        if self.pca_components.is_some() {
            EncodingMode::PcaHeader
        } else {
            EncodingMode::FixedFeatures
        }
    }

    pub fn gene(&self, qubit: usize, layer: usize) -> GateGene {
        self.grid[layer * self.qubits + qubit]
    }

    pub fn set_gene(&mut self, qubit: usize, layer: usize, gene: GateGene) {
        self.grid[layer * self.qubits + qubit] = gene;
    }

    /// Cells in scan order (layer by layer, top to bottom).
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, GateGene)> + '_ {
        self.grid
            .iter()
            .enumerate()
            .map(|(i, &g)| (i % self.qubits, i / self.qubits, g))
    }
}

/// Decodes a full individual.
pub fn decode_genome(
    bits: &BitString,
    qubits: usize,
    layers: usize,
    mode: EncodingMode,
) -> Result<CircuitGenome> {
    if qubits == 0 || layers == 0 {
        return Err(Error::Config(format!(
            "grid must be at least 1×1, got {qubits}×{layers}"
        )));
    }
    let expected = genome_length(qubits, layers, mode);
    if bits.len() != expected {
        return Err(Error::Config(format!(
            "bitstring has {} bits, expected {expected} for a {qubits}×{layers} {mode:?} genome",
            bits.len()
        )));
    }
    let (pca_components, offset) = match mode {
        EncodingMode::PcaHeader => (Some(bits.read_uint(0, HEADER_VALUE_BITS) + 1), HEADER_BITS),
        EncodingMode::FixedFeatures => (None, 0),
    };
    let grid = (0..qubits * layers)
        .map(|cell| {
            let start = offset + cell * GENE_BITS;
            GateGene::from_code(bits.read_uint(start, GENE_BITS) as u8)
        })
        .collect();
    CircuitGenome::new(qubits, layers, grid, pca_components)
}

/// Inverse of [`decode_genome`]; the unused header bit is written as 0.
pub fn encode_genome(genome: &CircuitGenome) -> BitString {
    let mode = genome.mode();
    let mut out = BitString(Vec::with_capacity(genome_length(
        genome.qubits,
        genome.layers,
        mode,
    )));
    if let Some(r) = genome.pca_components {
        out.push_uint(r - 1, HEADER_VALUE_BITS);
        out.push_uint(0, HEADER_BITS - HEADER_VALUE_BITS);
    }
    for gene in &genome.grid {
        out.push_uint(gene.code() as usize, GENE_BITS);
    }
    out
}
