use serde::Serialize;

use crate::error::Result;
use crate::groups::{same_type, supernatural_of, BlockPartition, FactorSequence};

/// A factor sequence together with a partition of its indices into consecutive blocks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Regrouping {
    pub source: FactorSequence,
    pub partition: BlockPartition,
    pub result: FactorSequence,
}

impl Regrouping {
    /// Sizes of the first `n` blocks.
    pub fn block_sizes(&self, n: usize) -> Result<Vec<u64>> {
        self.result.prefix(n)
    }

    /// Whether source and result have the same supernatural number.
    pub fn preserves_type(&self) -> Result<bool> {
        same_type(&supernatural_of(&self.source)?, &supernatural_of(&self.result)?)
    }
}

pub fn regroup(seq: &FactorSequence, partition: BlockPartition) -> Result<Regrouping> {
    seq.validate()?;
    let result = FactorSequence::Regrouped { source: Box::new(seq.clone()), partition: partition.clone() };
    Ok(Regrouping { source: seq.clone(), partition, result })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_of_two_and_three() {
        let r = regroup(&FactorSequence::periodic(vec![2, 3]), BlockPartition::new(vec![], vec![2]).unwrap()).unwrap();
        assert_eq!(r.block_sizes(3).unwrap(), vec![6, 6, 6]);
        assert!(r.preserves_type().unwrap());
    }

    #[test]
    fn singletons_are_the_identity() {
        let s = FactorSequence::Pattern { prefix: vec![5], period: vec![2, 3] };
        let r = regroup(&s, BlockPartition::singletons()).unwrap();
        assert_eq!(r.block_sizes(6).unwrap(), s.prefix(6).unwrap());
    }
}
