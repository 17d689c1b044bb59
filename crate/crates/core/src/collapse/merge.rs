use std::collections::BTreeMap;

use crate::taskgraph::NodeId;

/// Union-find over node identities. The smaller NodeId of a merged group
/// is always its representative, matching the surviving node of a collapse.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeMap {
    parent: BTreeMap<NodeId, NodeId>,
}

impl MergeMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn find(&self, mut n: NodeId) -> NodeId {
        while let Some(&p) = self.parent.get(&n) {
            n = p;
        }
        n
    }

    /// Merges the groups of `a` and `b`; returns the representative.
    pub fn union(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        let (keep, gone) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent.insert(gone, keep);
        // Flatten so that `find` stays shallow.
        let absorbed: Vec<NodeId> = self.parent.iter().filter(|(_, p)| **p == gone).map(|(k, _)| *k).collect();
        for k in absorbed {
            self.parent.insert(k, keep);
        }
        keep
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Number of absorbed nodes, i.e. accepted collapses.
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    /// `{representative: [absorbed ids]}`, both sides ascending.
    pub fn history(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut out: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for &n in self.parent.keys() {
            out.entry(self.find(n)).or_default().push(n);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_id_represents() {
        let mut m = MergeMap::new();
        assert_eq!(m.union(NodeId(5), NodeId(3)), NodeId(3));
        assert_eq!(m.union(NodeId(7), NodeId(5)), NodeId(3));
        assert_eq!(m.union(NodeId(2), NodeId(7)), NodeId(2));
        for n in [2, 3, 5, 7] {
            assert_eq!(m.find(NodeId(n)), NodeId(2));
        }
        assert_eq!(m.find(NodeId(9)), NodeId(9));
        assert_eq!(m.history()[&NodeId(2)], vec![NodeId(3), NodeId(5), NodeId(7)]);
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn find_is_idempotent() {
        let mut m = MergeMap::new();
        m.union(NodeId(4), NodeId(1));
        let r = m.find(NodeId(4));
        assert_eq!(m.find(r), r);
        assert_eq!(m.union(NodeId(1), NodeId(4)), NodeId(1));
        assert_eq!(m.len(), 1);
    }
}
