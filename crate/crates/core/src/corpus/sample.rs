use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use super::Keyed;
use crate::error::{Error, Result};

/// Result of balancing a corpus down to a target size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Balanced<T> {
    /// Kept documents in their original relative order.
    pub kept: Vec<T>,
    /// Ids of the dropped documents in their original relative order.
    pub excluded: Vec<String>,
}

/// Draws `target_size` documents uniformly without replacement.
///
/// The generator is xoshiro256** seeded through SplitMix64 from `seed`, and
/// index draws are bounded `u64` draws with rejection, so the kept set depends
/// only on `(items, target_size, seed)` and not on the platform.
pub fn subsample_balanced<T: Keyed + Clone>(
    items: &[T],
    target_size: usize,
    seed: u64,
) -> Result<Balanced<T>> {
    let n = items.len();
    if target_size > n {
        return Err(Error::invalid(format!(
            "target size {target_size} exceeds corpus size {n}"
        )));
    }

    // Partial Fisher-Yates: the first `target_size` slots end up holding a
    // uniform sample of indices.
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..target_size {
        let j = i + rng.gen_range(0..(n - i) as u64) as usize;
        order.swap(i, j);
    }
    let mut keep = vec![false; n];
    for &idx in &order[..target_size] {
        keep[idx] = true;
    }

    let mut kept = Vec::with_capacity(target_size);
    let mut excluded = Vec::with_capacity(n - target_size);
    for (item, keep) in items.iter().zip(keep) {
        if keep {
            kept.push(item.clone());
        } else {
            excluded.push(item.id().to_owned());
        }
    }
    Ok(Balanced { kept, excluded })
}

/// Drops exactly the listed ids. Every listed id must exist.
pub fn apply_exclusions<T: Keyed + Clone>(items: &[T], excluded: &[String]) -> Result<Balanced<T>> {
    let drop: HashSet<&str> = excluded.iter().map(String::as_str).collect();
    let known: HashSet<&str> = items.iter().map(Keyed::id).collect();
    if let Some(missing) = excluded.iter().find(|id| !known.contains(id.as_str())) {
        return Err(Error::invalid(format!("excluded id `{missing}` is not in the corpus")));
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for item in items {
        if drop.contains(item.id()) {
            dropped.push(item.id().to_owned());
        } else {
            kept.push(item.clone());
        }
    }
    Ok(Balanced {
        kept,
        excluded: dropped,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::corpus::RawDocument;

    fn songs(n: usize) -> Vec<RawDocument> {
        (0..n)
            .map(|i| RawDocument {
                id: format!("song-{i}"),
                title: String::new(),
                collection: "album".into(),
                text: "x".into(),
            })
            .collect()
    }

    #[test]
    fn balances_232_songs_to_154() {
        let b = subsample_balanced(&songs(232), 154, 7).unwrap();
        assert_eq!(b.kept.len(), 154);
        assert_eq!(b.excluded.len(), 78);
    }

    #[test]
    fn full_target_is_identity() {
        let docs = songs(10);
        let b = subsample_balanced(&docs, 10, 1).unwrap();
        assert_eq!(b.kept, docs);
        assert!(b.excluded.is_empty());
    }

    #[test]
    fn oversized_target_is_an_error() {
        assert!(subsample_balanced(&songs(3), 4, 0).is_err());
    }

    #[test]
    fn same_seed_same_sample() {
        let docs = songs(50);
        let a = subsample_balanced(&docs, 20, 99).unwrap();
        let b = subsample_balanced(&docs, 20, 99).unwrap();
        assert_eq!(a, b);
        let c = subsample_balanced(&docs, 20, 100).unwrap();
        assert_ne!(a.excluded, c.excluded);
    }

    #[test]
    fn exclusion_list_pins_the_sample() {
        let docs = songs(5);
        let b = apply_exclusions(&docs, &["song-1".into(), "song-3".into()]).unwrap();
        let kept: Vec<_> = b.kept.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(kept, ["song-0", "song-2", "song-4"]);
        assert!(apply_exclusions(&docs, &["nope".into()]).is_err());
    }

    proptest! {
        #[test]
        fn kept_and_excluded_partition_the_input(n in 0usize..80, frac in 0.0f64..=1.0, seed: u64) {
            let docs = songs(n);
            let target = (n as f64 * frac) as usize;
            let b = subsample_balanced(&docs, target, seed).unwrap();
            prop_assert_eq!(b.kept.len(), target);
            let mut all: Vec<String> = b.kept.iter().map(|d| d.id.clone()).chain(b.excluded.iter().cloned()).collect();
            all.sort();
            let mut expected: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
            expected.sort();
            prop_assert_eq!(all, expected);
            // relative order preserved
            let pos: Vec<usize> = b.kept.iter().map(|d| docs.iter().position(|x| x.id == d.id).unwrap()).collect();
            prop_assert!(pos.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
