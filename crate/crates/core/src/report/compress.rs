use std::collections::BTreeMap;

use super::{Tree, TreeNode};
use crate::symexec::NodeId;

/// Merges uninteresting nodes into their only child.
///
/// Level 0 is the identity. Level 1 folds a non-root node into its only
/// child when that child adds no constraint; level 2 folds every non-root
/// node with exactly one child. A folded chain keeps the id of its lowest
/// node, so leaves keep their ids.
pub fn compress(tree: &Tree, level: u8) -> Tree {
    if level == 0 {
        return tree.clone();
    }
    let by_id: BTreeMap<NodeId, &TreeNode> = tree.nodes.iter().map(|n| (n.id, n)).collect();
    let folds = |n: &TreeNode| -> bool {
        if n.parent.is_none() || n.children.len() != 1 {
            return false;
        }
        level >= 2 || by_id[&n.children[0]].constraints.is_empty()
    };
    // Bottom-most node each node is folded into.
    let mut rep: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    fn find(id: NodeId, by_id: &BTreeMap<NodeId, &TreeNode>, folds: &dyn Fn(&TreeNode) -> bool, rep: &mut BTreeMap<NodeId, NodeId>) -> NodeId {
        if let Some(r) = rep.get(&id) {
            return *r;
        }
        let mut chain = vec![id];
        let mut cur = id;
        while folds(by_id[&cur]) {
            cur = by_id[&cur].children[0];
            chain.push(cur);
        }
        for c in chain {
            rep.insert(c, cur);
        }
        cur
    }
    for n in &tree.nodes {
        find(n.id, &by_id, &folds, &mut rep);
    }
    let mut out: Vec<TreeNode> = Vec::new();
    for n in &tree.nodes {
        if rep[&n.id] != n.id {
            continue;
        }
        // Walk up through the nodes folded into this one.
        let mut chain = vec![n];
        while let Some(p) = chain.last().unwrap().parent {
            if rep[&p] == n.id {
                chain.push(by_id[&p]);
            } else {
                break;
            }
        }
        chain.reverse();
        let top = chain[0];
        let mut m = n.clone();
        m.parent = top.parent.map(|p| rep[&p]);
        m.pc_start = top.pc_start;
        m.constraints = chain.iter().flat_map(|c| c.constraints.iter().cloned()).collect();
        m.instructions = chain.iter().flat_map(|c| c.instructions.iter().cloned()).collect();
        m.snapshots = chain.iter().flat_map(|c| c.snapshots.iter().cloned()).collect();
        let mut flags: Vec<_> = chain.iter().flat_map(|c| c.flags.iter().copied()).collect();
        flags.sort();
        flags.dedup();
        m.flags = flags;
        m.merged = chain
            .iter()
            .flat_map(|c| c.merged.iter().copied().chain(std::iter::once(c.id)))
            .filter(|id| *id != n.id)
            .collect();
        m.children = n.children.iter().map(|c| rep[c]).collect();
        out.push(m);
    }
    Tree {
        nodes: out,
        leaves: tree.leaves.clone(),
    }
}
