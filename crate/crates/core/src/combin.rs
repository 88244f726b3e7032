//! Fixed-size subsets in lexicographic order of positions.

/// Iterator over the `k`-subsets of `items`, in lexicographic order of positions.
pub struct Combinations<'a, T> {
    items: &'a [T],
    idx: Vec<usize>,
    done: bool,
}

impl<'a, T: Clone> Combinations<'a, T> {
    pub fn new(items: &'a [T], k: usize) -> Self {
        Combinations {
            items,
            idx: (0..k).collect(),
            done: k > items.len(),
        }
    }
}

impl<T: Clone> Iterator for Combinations<'_, T> {
    type Item = Vec<T>;

    fn next(&mut self) -> Option<Vec<T>> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|&i| self.items[i].clone()).collect();
        let (n, k) = (self.items.len(), self.idx.len());
        match (0..k).rev().find(|&p| self.idx[p] < n - k + p) {
            Some(p) => {
                self.idx[p] += 1;
                for q in p + 1..k {
                    self.idx[q] = self.idx[q - 1] + 1;
                }
            }
            None => self.done = true,
        }
        Some(out)
    }
}

/// Binomial coefficient, saturating.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| {
        acc.saturating_mul((n - i) as u64) / (i as u64 + 1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_in_order() {
        let v: Vec<Vec<char>> = Combinations::new(&['a', 'b', 'c'], 2).collect();
        assert_eq!(v, [vec!['a', 'b'], vec!['a', 'c'], vec!['b', 'c']]);
    }

    #[test]
    fn edge_sizes() {
        assert_eq!(Combinations::new(&[1, 2], 0).collect::<Vec<_>>(), [Vec::<i32>::new()]);
        assert_eq!(Combinations::new(&[1, 2], 3).count(), 0);
        assert_eq!(Combinations::<u8>::new(&[], 0).count(), 1);
    }

    #[test]
    fn counts_match_binomial() {
        let items: Vec<usize> = (0..9).collect();
        for k in 0..=10 {
            assert_eq!(Combinations::new(&items, k).count() as u64, binomial(9, k));
        }
        assert_eq!(binomial(30, 15), 155_117_520);
    }
}
