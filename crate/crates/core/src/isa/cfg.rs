use std::collections::{BTreeMap, BTreeSet};

use super::{Opcode, Program};

/// Instruction indices that start a basic block: the entry, every in-range
/// jump/call target, and the instruction after any block-ending instruction.
pub fn block_leaders(p: &Program) -> BTreeSet<u32> {
    let mut leaders = BTreeSet::new();
    leaders.insert(p.entry);
    for (pc, ins) in p.code.iter().enumerate() {
        let pc = pc as u32;
        if let Some(t) = ins.jump_target(pc) {
            if (0..p.len() as i64).contains(&t) {
                leaders.insert(t as u32);
            }
        }
        if ins.opcode.ends_block() && pc + 1 < p.len() {
            leaders.insert(pc + 1);
        }
    }
    leaders
}

/// Static control-flow graph over basic blocks.
#[derive(Clone, Debug)]
pub struct Cfg {
    /// Half-open instruction ranges, keyed by leader.
    pub blocks: BTreeMap<u32, u32>,
    pub edges: BTreeSet<(u32, u32)>,
}

impl Cfg {
    pub fn build(p: &Program) -> Cfg {
        let mut leaders = block_leaders(p);
        // Code before the first leader still forms a block.
        leaders.insert(0);
        let starts: Vec<u32> = leaders.iter().copied().collect();
        let mut blocks = BTreeMap::new();
        let mut edges = BTreeSet::new();
        for (i, &start) in starts.iter().enumerate() {
            let end = starts.get(i + 1).copied().unwrap_or(p.len());
            blocks.insert(start, end);
            let last = end - 1;
            let ins = &p.code[last as usize];
            let in_range = |t: i64| (0..p.len() as i64).contains(&t);
            let target = ins.jump_target(last).filter(|&t| in_range(t));
            let fall = (end < p.len()).then_some(end);
            match ins.opcode {
                Opcode::Beqz | Opcode::Bnez | Opcode::Call => {
                    edges.extend(target.map(|t| (start, t as u32)));
                    edges.extend(fall.map(|f| (start, f)));
                }
                Opcode::Jmp => edges.extend(target.map(|t| (start, t as u32))),
                Opcode::Halt | Opcode::Ret => {}
                _ => edges.extend(fall.map(|f| (start, f))),
            }
        }
        Cfg { blocks, edges }
    }

    /// Leader of the block containing `pc`.
    pub fn block_of(&self, pc: u32) -> Option<u32> {
        self.blocks
            .range(..=pc)
            .next_back()
            .filter(|(_, &end)| pc < end)
            .map(|(&start, _)| start)
    }

    /// Blocks with no successor.
    pub fn exits(&self) -> Vec<u32> {
        let sources: BTreeSet<u32> = self.edges.iter().map(|e| e.0).collect();
        self.blocks.keys().copied().filter(|b| !sources.contains(b)).collect()
    }

    fn count_components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> usize {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (a, b) in edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        (0..n).filter(|&i| find(&mut parent, i) == i).count()
    }

    fn index(&self) -> BTreeMap<u32, usize> {
        self.blocks.keys().enumerate().map(|(i, &b)| (b, i)).collect()
    }

    pub fn components(&self) -> usize {
        let index = self.index();
        Cfg::count_components(index.len(), self.edges.iter().map(|(a, b)| (index[a], index[b])))
    }

    /// `E - N + 2P`, with every exit block joined to one virtual exit node.
    pub fn cyclomatic(&self) -> usize {
        let index = self.index();
        let exits = self.exits();
        let exit_node = index.len();
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|(a, b)| (index[a], index[b]))
            .chain(exits.iter().map(|x| (index[x], exit_node)))
            .collect();
        let n = index.len() + usize::from(!exits.is_empty());
        let p = Cfg::count_components(n, edges.iter().copied());
        (edges.len() as i64 - n as i64 + 2 * p as i64).max(1) as usize
    }
}

pub fn cyclomatic_complexity(p: &Program) -> usize {
    Cfg::build(p).cyclomatic()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::assemble;

    #[test]
    fn straight_line() {
        let p = assemble("const r1, 1\nadd r2, r1, r1\nout 0, r2\nhalt").unwrap();
        assert_eq!(block_leaders(&p), BTreeSet::from([0]));
        assert_eq!(cyclomatic_complexity(&p), 1);
    }

    #[test]
    fn separate_exits_count_as_paths() {
        let p = assemble("beqz r1, a\nhalt\na: beqz r2, b\nhalt\nb: halt").unwrap();
        assert_eq!(cyclomatic_complexity(&p), 3);
        let diamond = assemble("beqz r1, a\nconst r2, 1\na: halt").unwrap();
        assert_eq!(cyclomatic_complexity(&diamond), 2);
    }

    #[test]
    fn branch_leaders() {
        // beqz at index 3 targets index 7.
        let p = assemble(
            "const r1, 1\nconst r2, 2\nconst r3, 3\nbeqz r1, t\nconst r4, 4\nconst r5, 5\nhalt\nt: halt",
        )
        .unwrap();
        let l = block_leaders(&p);
        assert!(l.is_superset(&BTreeSet::from([0, 4, 7])), "{l:?}");
    }

    #[test]
    fn call_leaders() {
        let src = "const r1, 1\nconst r2, 1\ncall f\nhalt\nhalt\nhalt\nhalt\nhalt\nhalt\nf: ret";
        let p = assemble(src).unwrap();
        assert_eq!(p.label("f"), Some(9));
        let l = block_leaders(&p);
        assert!(l.is_superset(&BTreeSet::from([0, 3, 9])), "{l:?}");
    }

    #[test]
    fn diamond_and_two_diamonds() {
        let diamond = "
                beqz r1, else
                const r2, 1
                jmp end
            else: const r2, 2
            end:  halt";
        assert_eq!(cyclomatic_complexity(&assemble(diamond).unwrap()), 2);

        let two = "
                beqz r1, e1
                const r2, 1
                jmp j1
            e1: const r2, 2
            j1: beqz r3, e2
                const r4, 1
                jmp j2
            e2: const r4, 2
            j2: halt";
        assert_eq!(cyclomatic_complexity(&assemble(two).unwrap()), 3);
    }

    #[test]
    fn block_lookup() {
        let p = assemble("beqz r1, t\nconst r2, 1\nhalt\nt: halt").unwrap();
        let cfg = Cfg::build(&p);
        assert_eq!(cfg.block_of(0), Some(0));
        assert_eq!(cfg.block_of(2), Some(1));
        assert_eq!(cfg.block_of(3), Some(3));
        assert_eq!(cfg.block_of(4), None);
    }
}
