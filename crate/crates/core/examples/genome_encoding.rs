//! Decode a random bitstring into a circuit grid and print it.

use eqiml::circuit::build_feature_map;
use eqiml::genome::{decode_genome, encode_genome, genome_length, BitString, EncodingMode, GateKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> eqiml::Result<()> {
    let (qubits, layers) = (3, 4);
    let mode = EncodingMode::PcaHeader;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let bits = BitString::random(genome_length(qubits, layers, mode), &mut rng);
    println!("genome ({} bits): {bits}", bits.len());

    let genome = decode_genome(&bits, qubits, layers, mode)?;
    let components = genome.pca_components().unwrap_or(0);
    println!("pca components requested: {components}");
    for (qubit, layer, gene) in genome.cells() {
        let angle = if gene.kind.is_rotation() { gene.angle.label() } else { "-".into() };
        println!("  q{qubit} l{layer}: {:<9} code {:03b} angle {angle}", format!("{:?}", gene.kind), gene.kind.code());
    }

    let circuit = build_feature_map(&genome, components)?;
    println!("\n{}", circuit.diagram(&genome));
    let census = circuit.census();
    println!("local {}, cnot {}, identity {}, complexity {:.3}", census.n_local, census.n_cnot, census.n_identity, circuit.complexity());

    // The 7th header bit carries no information and is written back as 0.
    let mut padded = bits.clone();
    if padded.get(6) == 1 {
        padded.flip(6);
    }
    assert_eq!(encode_genome(&genome), padded);

    println!("\ngate table:");
    for kind in GateKind::ALL {
        println!("  {:03b} {kind:?}", kind.code());
    }
    Ok(())
}
