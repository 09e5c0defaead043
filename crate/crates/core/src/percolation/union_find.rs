/// Disjoint-set forest with union by size and path compression.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    count: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            count: n,
        }
    }

    /// Makes every node its own cluster again.
    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
        self.count = self.parent.len();
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Number of distinct clusters.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    /// Merges the clusters of `a` and `b`; returns the surviving root.
    pub fn union(&mut self, a: u32, b: u32) -> u32 {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.count -= 1;
        ra
    }

    pub fn same(&mut self, a: u32, b: u32) -> bool {
        self.find(a) == self.find(b)
    }

    /// Size of the cluster containing `x`.
    pub fn size_of(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.size[r as usize]
    }

    /// Root label of every node.
    pub fn labels(&mut self) -> Vec<u32> {
        (0..self.len() as u32).map(|x| self.find(x)).collect()
    }
}

/// Union-find that also stores each node's displacement (in unit cells) from
/// its root, so that closing a loop with a non-zero net displacement reveals
/// a cluster wrapping the torus.
#[derive(Debug, Clone)]
pub(crate) struct WrapUnionFind {
    parent: Vec<u32>,
    offset: Vec<[i32; 2]>,
    size: Vec<u32>,
    qualified: Vec<u32>,
    wraps: Vec<bool>,
    stack: Vec<u32>,
}

/// Outcome of one union in a [`WrapUnionFind`].
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Merge {
    /// Qualified nodes that joined a wrapping cluster in this step.
    pub newly_wrapping: u32,
    pub root_size: u32,
    pub wraps: bool,
}

impl WrapUnionFind {
    pub fn new(qualified: &[bool]) -> Self {
        let n = qualified.len();
        Self {
            parent: (0..n as u32).collect(),
            offset: vec![[0, 0]; n],
            size: vec![1; n],
            qualified: qualified.iter().map(|&q| q as u32).collect(),
            wraps: vec![false; n],
            stack: Vec::new(),
        }
    }

    pub fn reset(&mut self, qualified: &[bool]) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.offset.fill([0, 0]);
        self.size.fill(1);
        for (q, &b) in self.qualified.iter_mut().zip(qualified) {
            *q = b as u32;
        }
        self.wraps.fill(false);
    }

    /// Root of `x` and the displacement of `x` relative to that root.
    pub fn find(&mut self, x: u32) -> (u32, [i32; 2]) {
        let mut root = x;
        self.stack.clear();
        while self.parent[root as usize] != root {
            self.stack.push(root);
            root = self.parent[root as usize];
        }
        // Walk back from the node nearest the root, accumulating offsets.
        let mut acc = [0i32; 2];
        while let Some(n) = self.stack.pop() {
            let o = self.offset[n as usize];
            acc = [acc[0] + o[0], acc[1] + o[1]];
            self.offset[n as usize] = acc;
            self.parent[n as usize] = root;
        }
        (root, self.offset_to_root(x, root))
    }

    fn offset_to_root(&self, x: u32, root: u32) -> [i32; 2] {
        if x == root {
            [0, 0]
        } else {
            self.offset[x as usize]
        }
    }

    /// Joins `a` and `b`, where `d` is the unwrapped displacement from `a` to `b`.
    pub fn union(&mut self, a: u32, b: u32, d: [i32; 2]) -> Merge {
        let (ra, oa) = self.find(a);
        let (rb, ob) = self.find(b);
        // Displacement from ra to rb implied by this connection.
        let rel = [oa[0] + d[0] - ob[0], oa[1] + d[1] - ob[1]];
        if ra == rb {
            let mut newly = 0;
            if rel != [0, 0] && !self.wraps[ra as usize] {
                self.wraps[ra as usize] = true;
                newly = self.qualified[ra as usize];
            }
            return Merge {
                newly_wrapping: newly,
                root_size: self.size[ra as usize],
                wraps: self.wraps[ra as usize],
            };
        }
        let (wa, wb) = (self.wraps[ra as usize], self.wraps[rb as usize]);
        let wraps = wa || wb;
        let mut newly = 0;
        if wraps {
            if !wa {
                newly += self.qualified[ra as usize];
            }
            if !wb {
                newly += self.qualified[rb as usize];
            }
        }
        let (big, small, off) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb, rel)
        } else {
            (rb, ra, [-rel[0], -rel[1]])
        };
        self.parent[small as usize] = big;
        self.offset[small as usize] = off;
        self.size[big as usize] += self.size[small as usize];
        self.qualified[big as usize] += self.qualified[small as usize];
        self.wraps[big as usize] = wraps;
        Merge {
            newly_wrapping: newly,
            root_size: self.size[big as usize],
            wraps,
        }
    }

    #[cfg(test)]
    pub fn wraps(&mut self, x: u32) -> bool {
        let (r, _) = self.find(x);
        self.wraps[r as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_union_find() {
        let mut uf = UnionFind::new(6);
        uf.union(0, 1);
        uf.union(2, 3);
        uf.union(1, 3);
        assert_eq!(uf.count(), 3);
        assert!(uf.same(0, 2));
        assert!(!uf.same(0, 4));
        assert_eq!(uf.size_of(3), 4);
    }

    #[test]
    fn ring_wraps() {
        // A ring of 4 nodes with unit steps: closing it gives net displacement 4.
        let q = vec![true, false, true, false];
        let mut uf = WrapUnionFind::new(&q);
        let mut total = 0;
        for i in 0..3 {
            let m = uf.union(i, i + 1, [1, 0]);
            assert!(!m.wraps);
            total += m.newly_wrapping;
        }
        let m = uf.union(3, 0, [1, 0]);
        total += m.newly_wrapping;
        assert!(m.wraps);
        assert_eq!(total, 2);
        assert!(uf.wraps(1));
    }

    #[test]
    fn contractible_loop_does_not_wrap() {
        let mut uf = WrapUnionFind::new(&[false; 4]);
        uf.union(0, 1, [1, 0]);
        uf.union(1, 2, [0, 1]);
        uf.union(2, 3, [-1, 0]);
        let m = uf.union(3, 0, [0, -1]);
        assert!(!m.wraps);
        assert_eq!(m.root_size, 4);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn matches_naive_partition(
                n in 1usize..40,
                pairs in proptest::collection::vec((0u32..40, 0u32..40), 0..80),
            ) {
                let mut uf = UnionFind::new(n);
                let mut naive: Vec<usize> = (0..n).collect();
                for &(a, b) in &pairs {
                    let (a, b) = (a % n as u32, b % n as u32);
                    uf.union(a, b);
                    let (la, lb) = (naive[a as usize], naive[b as usize]);
                    for l in naive.iter_mut() {
                        if *l == lb {
                            *l = la;
                        }
                    }
                    prop_assert_eq!(uf.find(a), uf.find(b));
                }
                let mut distinct = naive.clone();
                distinct.sort_unstable();
                distinct.dedup();
                prop_assert_eq!(uf.count(), distinct.len());
                let mut total = 0;
                for x in 0..n as u32 {
                    let r = uf.find(x);
                    prop_assert_eq!(uf.find(r), r);
                    if r == x {
                        total += uf.size_of(x);
                    }
                    for y in 0..n as u32 {
                        prop_assert_eq!(uf.same(x, y), naive[x as usize] == naive[y as usize]);
                    }
                }
                prop_assert_eq!(total as usize, n);
            }

            #[test]
            fn offsets_are_consistent(
                n in 2usize..20,
                steps in proptest::collection::vec((0u32..20, 0u32..20, -2i32..3, -2i32..3), 0..40),
            ) {
                // Nodes carry hidden integer positions; a union with the true
                // difference never creates a wrap.
                let pos: Vec<[i32; 2]> = (0..n as i32).map(|i| [i * 3 % 7, i * 5 % 11]).collect();
                let mut uf = WrapUnionFind::new(&vec![true; n]);
                for &(a, b, _, _) in &steps {
                    let (a, b) = (a % n as u32, b % n as u32);
                    let d = [pos[b as usize][0] - pos[a as usize][0], pos[b as usize][1] - pos[a as usize][1]];
                    prop_assert!(!uf.union(a, b, d).wraps);
                }
                for &(a, b, dx, dy) in &steps {
                    let (a, b) = (a % n as u32, b % n as u32);
                    let d = [pos[b as usize][0] - pos[a as usize][0] + dx, pos[b as usize][1] - pos[a as usize][1] + dy];
                    let (ra, oa) = uf.find(a);
                    let (rb, ob) = uf.find(b);
                    if ra == rb && uf.wraps(a) {
                        continue;
                    }
                    let closes_loop = ra == rb && [ob[0] - oa[0], ob[1] - oa[1]] != d;
                    prop_assert_eq!(uf.union(a, b, d).wraps, closes_loop);
                    break;
                }
            }
        }
    }
}
