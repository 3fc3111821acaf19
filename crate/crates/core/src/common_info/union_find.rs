/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` if `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    /// Dense labels `0..k` assigned in order of first appearance in `order`.
    pub fn labels_in_order(&mut self, order: impl IntoIterator<Item = usize>) -> Vec<Option<usize>> {
        let n = self.parent.len();
        let mut root_label = vec![None; n];
        let mut labels = vec![None; n];
        let mut next = 0;
        for x in order {
            let r = self.find(x);
            let l = *root_label[r].get_or_insert_with(|| {
                next += 1;
                next - 1
            });
            labels[x] = Some(l);
        }
        labels
    }
}
