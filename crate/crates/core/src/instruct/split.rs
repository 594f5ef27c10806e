use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::InstructError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
    pub seed: u64,
}

/// Shuffles by seed, then cuts at floor(0.8 n) and floor(0.9 n).
pub fn split_dataset<T: Clone>(ids: &[T], seed: u64) -> Result<DatasetSplit<T>, InstructError> {
    let n = ids.len();
    if n < 10 {
        return Err(InstructError::TooFewRecords(n));
    }
    let mut v = ids.to_vec();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let a = n * 8 / 10;
    let b = n * 9 / 10;
    let test = v.split_off(b);
    let validation = v.split_off(a);
    Ok(DatasetSplit { train: v, validation, test, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(n: usize) -> (usize, usize, usize) {
        let ids: Vec<usize> = (0..n).collect();
        let s = split_dataset(&ids, 1).unwrap();
        (s.train.len(), s.validation.len(), s.test.len())
    }

    #[test]
    fn exact_ratios() {
        assert_eq!(sizes(10), (8, 1, 1));
        assert_eq!(sizes(100), (80, 10, 10));
        assert_eq!(sizes(15), (12, 1, 2));
    }

    #[test]
    fn too_few() {
        assert!(matches!(split_dataset(&[1, 2, 3], 0), Err(InstructError::TooFewRecords(3))));
    }

    #[test]
    fn seed_changes_order_not_membership() {
        let ids: Vec<u32> = (0..50).collect();
        let a = split_dataset(&ids, 1).unwrap();
        let b = split_dataset(&ids, 2).unwrap();
        assert_ne!(a.train, b.train);
        assert_eq!(a, split_dataset(&ids, 1).unwrap());
    }
}
