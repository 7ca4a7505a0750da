//! Block-level dominance for one region.

use std::collections::HashMap;

use super::module::{BlockId, IrModule, RegionId};

/// Dominator sets over the blocks of a region, rooted at its entry block.
#[derive(Debug, Clone)]
pub struct Dominance {
    index: HashMap<BlockId, usize>,
    reachable: Vec<bool>,
    /// `doms[b][a]` is true iff block `a` dominates block `b`.
    doms: Vec<Vec<bool>>,
}

impl Dominance {
    pub fn compute(module: &IrModule, region: RegionId) -> Self {
        let blocks = &module.region(region).blocks;
        let n = blocks.len();
        let index: HashMap<BlockId, usize> = blocks.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, &b) in blocks.iter().enumerate() {
            for &op in &module.block(b).operations {
                for s in &module.op(op).successors {
                    if let Some(&j) = index.get(&s.block) {
                        succs[i].push(j);
                        preds[j].push(i);
                    }
                }
            }
        }

        let mut reachable = vec![false; n];
        if n > 0 {
            let mut stack = vec![0];
            reachable[0] = true;
            while let Some(b) = stack.pop() {
                for &s in &succs[b] {
                    if !reachable[s] {
                        reachable[s] = true;
                        stack.push(s);
                    }
                }
            }
        }

        let mut doms = vec![vec![true; n]; n];
        if n > 0 {
            doms[0] = vec![false; n];
            doms[0][0] = true;
        }
        let mut changed = true;
        while changed {
            changed = false;
            for b in 1..n {
                if !reachable[b] {
                    continue;
                }
                let mut next = vec![true; n];
                for &p in preds[b].iter().filter(|&&p| reachable[p]) {
                    for (x, d) in next.iter_mut().zip(&doms[p]) {
                        *x &= *d;
                    }
                }
                next[b] = true;
                if next != doms[b] {
                    doms[b] = next;
                    changed = true;
                }
            }
        }
        Dominance { index, reachable, doms }
    }

    pub fn is_reachable(&self, b: BlockId) -> bool {
        self.index.get(&b).is_some_and(|&i| self.reachable[i])
    }

    /// Whether block `a` dominates block `b` (reflexive).
    pub fn dominates(&self, a: BlockId, b: BlockId) -> bool {
        match (self.index.get(&a), self.index.get(&b)) {
            (Some(&ia), Some(&ib)) => self.doms[ib][ia],
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::OperationState;

    #[test]
    fn diamond() {
        let mut m = IrModule::new();
        let r = m.new_region();
        let b: Vec<_> = (0..4).map(|_| m.append_block(r, &[])).collect();
        let br = |m: &mut IrModule, from: BlockId, to: &[BlockId]| {
            m.set_insertion_block(from);
            let mut st = OperationState::new("cf.br");
            for &t in to {
                st = st.successor(t, vec![]);
            }
            m.create_op(st).unwrap();
        };
        br(&mut m, b[0], &[b[1], b[2]]);
        br(&mut m, b[1], &[b[3]]);
        br(&mut m, b[2], &[b[3]]);
        let d = Dominance::compute(&m, r);
        assert!(d.dominates(b[0], b[3]));
        assert!(!d.dominates(b[1], b[3]));
        assert!(!d.dominates(b[2], b[3]));
        assert!(d.dominates(b[3], b[3]));
        assert!(d.is_reachable(b[3]));
    }
}
