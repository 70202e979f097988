/// Sorted, disjoint, non-adjacent half-open byte intervals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RangeSet(Vec<(u64, u64)>);

impl RangeSet {
    pub fn new() -> RangeSet {
        RangeSet(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(u64, u64)> {
        self.0.iter()
    }

    pub fn insert(&mut self, lo: u64, hi: u64) {
        if lo >= hi {
            return;
        }
        let (mut lo, mut hi) = (lo, hi);
        let mut out = Vec::with_capacity(self.0.len() + 1);
        let mut placed = false;
        for &(a, b) in &self.0 {
            if b < lo {
                out.push((a, b));
            } else if hi < a {
                if !placed {
                    out.push((lo, hi));
                    placed = true;
                }
                out.push((a, b));
            } else {
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
        if !placed {
            out.push((lo, hi));
        }
        out.sort_unstable();
        self.0 = out;
    }

    pub fn union(&self, o: &RangeSet) -> RangeSet {
        let mut r = self.clone();
        for &(a, b) in &o.0 {
            r.insert(a, b);
        }
        r
    }

    pub fn intersects(&self, lo: u64, hi: u64) -> bool {
        self.0.iter().any(|&(a, b)| a < hi && lo < b)
    }

    pub fn covers(&self, lo: u64, hi: u64) -> bool {
        lo >= hi || self.0.iter().any(|&(a, b)| a <= lo && hi <= b)
    }

    pub fn is_subset(&self, o: &RangeSet) -> bool {
        self.0.iter().all(|&(a, b)| o.covers(a, b))
    }

    /// The parts of `[0, size)` outside the set.
    pub fn complement(&self, size: u64) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut pos = 0;
        for &(a, b) in &self.0 {
            if a > pos {
                out.push((pos, a.min(size)));
            }
            pos = pos.max(b);
        }
        if pos < size {
            out.push((pos, size));
        }
        out.retain(|(a, b)| a < b);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_and_complement() {
        let mut r = RangeSet::new();
        r.insert(4, 6);
        r.insert(0, 1);
        r.insert(5, 8);
        r.insert(1, 2);
        assert_eq!(r.iter().copied().collect::<Vec<_>>(), vec![(0, 2), (4, 8)]);
        assert_eq!(r.complement(10), vec![(2, 4), (8, 10)]);
        assert!(r.intersects(7, 9) && !r.intersects(2, 4));
        assert!(r.covers(4, 8) && !r.covers(1, 5));
    }
}
