//! Set partitions of {0, .., m-1} in restricted-growth-string order.
//!
//! A restricted growth string assigns element i the index of its block,
//! scanning blocks in first-occurrence order: a[0] = 0 and
//! a[i] <= 1 + max(a[0..i]). Lexicographic enumeration of these strings
//! visits every set partition exactly once, starting from the single-block
//! partition and ending at the all-singletons one. The adversary search
//! relies on this order for deterministic tie-breaking.

/// Iterator over all set partitions of m elements, as growth strings.
pub struct SetPartitions {
    current: Vec<usize>,
    started: bool,
    done: bool,
}

impl SetPartitions {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "partitions of an empty set are not useful here");
        Self {
            current: vec![0; m],
            started: false,
            done: false,
        }
    }
}

fn advance(a: &mut [usize]) -> bool {
    // Rightmost position that can still grow; everything after it resets.
    for j in (1..a.len()).rev() {
        let max_prefix = a[..j].iter().copied().max().unwrap();
        if a[j] <= max_prefix {
            a[j] += 1;
            a[j + 1..].fill(0);
            return true;
        }
    }
    false
}

impl Iterator for SetPartitions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.current.clone());
        }
        if advance(&mut self.current) {
            Some(self.current.clone())
        } else {
            self.done = true;
            None
        }
    }
}

/// Relabel an arbitrary block assignment into its canonical growth string
/// (blocks numbered by first occurrence).
pub fn canonical_growth_string(assignment: &[usize]) -> Vec<usize> {
    let labels = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut map: Vec<Option<usize>> = vec![None; labels];
    let mut next = 0;
    assignment
        .iter()
        .map(|&g| {
            *map[g].get_or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BELL: [usize; 10] = [1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];

    #[test]
    fn counts_match_bell_numbers() {
        for (m, &want) in (1..=10).zip(BELL.iter()) {
            assert_eq!(SetPartitions::new(m).count(), want, "m = {m}");
        }
    }

    #[test]
    fn order_is_lexicographic_from_single_block() {
        let all: Vec<Vec<usize>> = SetPartitions::new(3).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 0, 0],
                vec![0, 0, 1],
                vec![0, 1, 0],
                vec![0, 1, 1],
                vec![0, 1, 2],
            ]
        );
    }

    #[test]
    fn canonicalization_relabels_by_first_occurrence() {
        assert_eq!(canonical_growth_string(&[2, 2, 0, 1]), vec![0, 0, 1, 2]);
        assert_eq!(canonical_growth_string(&[1, 0, 1, 0]), vec![0, 1, 0, 1]);
    }
}
