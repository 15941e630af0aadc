use crate::dataset::{Dataset, NEGATIVE, POSITIVE};
use crate::error::{Error, Result};
use crate::numerics::RandomStream;

/// One bootstrapped sub-training set: resampled negatives plus every positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SubTrainingSet {
    pub subset_id: usize,
    pub dataset: Dataset,
}

/// Builds `k` sub-training sets with `round(ir_prime * |S1|)` negatives each,
/// drawn uniformly with replacement. Subset `i` draws from `stream.derive(i)`.
pub fn bootstrap_subsets(
    ds: &Dataset,
    k: usize,
    ir_prime: f64,
    stream: &RandomStream,
) -> Result<Vec<SubTrainingSet>> {
    if k == 0 {
        return Err(Error::invalid("bef.k", "need at least one subset"));
    }
    if !(ir_prime.is_finite() && ir_prime >= 1.0) {
        return Err(Error::invalid("bef.ir_prime", format!("must be >= 1, got {ir_prime}")));
    }
    let negatives = ds.class_indices(NEGATIVE);
    let positives = ds.class_indices(POSITIVE);
    if positives.is_empty() {
        return Err(Error::InsufficientClass { class: POSITIVE, count: 0, required: 1 });
    }
    if negatives.is_empty() {
        return Err(Error::InsufficientClass { class: NEGATIVE, count: 0, required: 1 });
    }
    let n_draw = (ir_prime * positives.len() as f64).round() as usize;
    Ok((0..k)
        .map(|subset_id| {
            let mut s = stream.derive(subset_id as u64);
            let mut rows: Vec<usize> = (0..n_draw).map(|_| negatives[s.index(negatives.len())]).collect();
            rows.extend_from_slice(&positives);
            SubTrainingSet { subset_id, dataset: ds.select(&rows) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn fixture(neg: usize, pos: usize) -> Dataset {
        let n = neg + pos;
        let x = Array2::from_shape_fn((n, 1), |(i, _)| i as f64);
        Dataset::new("b", x, (0..n).map(|i| u8::from(i >= neg)).collect()).unwrap()
    }

    #[test]
    fn cardinality_rule() {
        let ds = fixture(200, 10);
        let subsets = bootstrap_subsets(&ds, 4, 3.0, &RandomStream::new(1)).unwrap();
        assert_eq!(subsets.len(), 4);
        for (i, s) in subsets.iter().enumerate() {
            assert_eq!(s.subset_id, i);
            assert_eq!(s.dataset.class_counts(), (30, 10));
            assert_eq!(s.dataset.class_features(POSITIVE), ds.class_features(POSITIVE));
        }
    }

    #[test]
    fn balanced_when_ir_prime_is_one() {
        let ds = fixture(50, 7);
        let s = bootstrap_subsets(&ds, 2, 1.0, &RandomStream::new(0)).unwrap();
        assert_eq!(s[0].dataset.class_counts(), (7, 7));
    }

    #[test]
    fn subsets_differ() {
        let ds = fixture(1000, 10);
        for seed in 0..20 {
            let s = bootstrap_subsets(&ds, 2, 2.0, &RandomStream::new(seed)).unwrap();
            assert_ne!(s[0].dataset.class_features(NEGATIVE), s[1].dataset.class_features(NEGATIVE));
        }
    }

    #[test]
    fn errors() {
        let ds = fixture(10, 0);
        assert!(bootstrap_subsets(&ds, 2, 2.0, &RandomStream::new(0)).is_err());
        let ds = fixture(10, 2);
        assert!(bootstrap_subsets(&ds, 0, 2.0, &RandomStream::new(0)).is_err());
        assert!(bootstrap_subsets(&ds, 1, 0.5, &RandomStream::new(0)).is_err());
    }
}
