//! Groups, representations and supernatural numbers.

mod abelian;
mod characters;
mod finite;
mod represent;
mod spec;
mod supernatural;

pub use abelian::{AbelianElement, AbelianGroup, Generator, Real};
pub use characters::{character_table, CharacterTable};
pub use finite::{normal_core, FiniteGroup};
pub use represent::{
    check_homomorphism, induce, induced_character_defect, map_embedding, one_dim_characters, regular_representation,
    MapEmbedding, Representation,
};
pub use spec::{Element, GroupSpec, Order};
pub use supernatural::{factorize, same_type, supernatural_of, BlockPartition, FactorSequence, PrimeSet, SupernaturalNumber};
