use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use super::config::{Directive, DirectiveKind, Harness, ProgramSetup};
use super::state::*;
use crate::isa::{self, Cfg, Opcode, Program, RunOptions, TrapKind};
use crate::solver::{Solver, SolverError};
use crate::term::{parse_expr, parse_pred, pretty, Assignment, Evaluator, Term, TermError, Var};

#[derive(Debug, Error)]
pub enum ExecError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("exploration exceeded the state limit of {limit}; tighten preconditions or the loop bound")]
    StateLimit { limit: usize },
    #[error("preconditions are unsatisfiable")]
    PreconditionsUnsat,
    #[error("{what} at pc {pc}: {err}")]
    Expr { what: String, pc: u32, err: TermError },
}

/// Explores one program of a harness. Owns the execution tree; states
/// refer to tree nodes by id.
pub struct Explorer<'h> {
    pub side: Side,
    harness: &'h Harness,
    setup: &'h ProgramSetup,
    solver: &'h Solver,
    leaders: BTreeSet<u32>,
    directives_at: BTreeMap<u32, Vec<&'h Directive>>,
    postconditions: Vec<&'h Directive>,
    hooks: BTreeMap<u32, usize>,
    disasm: Vec<String>,
    opts: RunOptions,
    pub tree: Vec<ExecNode>,
    pub discarded: usize,
}

fn extend_zero(w: &Assignment, t: &Term) -> Assignment {
    let mut out = w.clone();
    for v in t.vars() {
        if !out.contains(&v.name) {
            out.insert(&v, 0);
        }
    }
    out
}

/// Label-aware disassembly of every instruction.
pub fn disassembly_lines(p: &Program) -> Vec<String> {
    let names: BTreeMap<u32, String> = p.labels.iter().map(|(n, &pc)| (pc, n.clone())).collect();
    p.code
        .iter()
        .enumerate()
        .map(|(pc, ins)| {
            let text = isa::disassemble_one(ins, Some((pc as u32, &names)));
            match p.symbolize(pc as u32) {
                Some((label, 0)) => format!("{pc:4}  {label}: {text}"),
                _ => format!("{pc:4}  {text}"),
            }
        })
        .collect()
}

impl<'h> Explorer<'h> {
    pub fn new(harness: &'h Harness, side: Side, solver: &'h Solver) -> Self {
        let setup = harness.setup(side);
        let mut directives_at: BTreeMap<u32, Vec<&Directive>> = BTreeMap::new();
        let mut postconditions = Vec::new();
        for d in &setup.directives {
            match (d.kind, d.pc) {
                (DirectiveKind::Postcondition, _) => postconditions.push(d),
                (_, Some(pc)) => directives_at.entry(pc).or_default().push(d),
                (_, None) => {}
            }
        }
        let hooks = setup.hooks.iter().enumerate().map(|(i, h)| (h.target, i)).collect();
        Explorer {
            side,
            harness,
            setup,
            solver,
            leaders: isa::block_leaders(&setup.program),
            directives_at,
            postconditions,
            hooks,
            disasm: disassembly_lines(&setup.program),
            opts: RunOptions {
                call_depth_max: harness.config.call_depth_max,
                ..RunOptions::default()
            },
            tree: Vec::new(),
            discarded: 0,
        }
    }

    pub fn program(&self) -> &'h Program {
        &self.setup.program
    }

    fn new_node(&mut self, parent: Option<NodeId>, pc: u32) -> NodeId {
        let id = self.tree.len() as NodeId;
        self.tree.push(ExecNode::new(id, parent, pc));
        if let Some(p) = parent {
            self.tree[p as usize].children.push(id);
        }
        id
    }

    fn node(&mut self, s: &SymState) -> &mut ExecNode {
        &mut self.tree[s.node_id as usize]
    }

    fn event(&mut self, s: &SymState, e: Event) {
        self.node(s).events.push(e);
    }

    /// The initial state: inputs installed, preconditions applied.
    pub fn root(&mut self) -> Result<SymState, ExecError> {
        let p = &self.setup.program;
        let zero = Term::constant(0, 32);
        let mut regs: [Term; isa::NUM_REGS] = std::array::from_fn(|_| zero.clone());
        let mut mem = BTreeMap::new();
        for (i, b) in p.data.iter().enumerate() {
            mem.insert(p.data_base.wrapping_add(i as u32), Term::constant(*b as u32, 8));
        }
        for (a, b) in &self.harness.init_memory {
            mem.insert(*a, Term::constant(*b as u32, 8));
        }
        for d in &self.harness.config.inputs {
            let v = Term::var(&d.name, d.width);
            match &d.bind {
                Some(super::config::Binding::Reg(r)) => regs[*r as usize] = v.zx(32).unwrap(),
                Some(super::config::Binding::Mem(addr)) => {
                    if d.width < 8 {
                        mem.insert(*addr, v.zx(8).unwrap());
                    } else {
                        for k in 0..d.width / 8 {
                            mem.insert(addr.wrapping_add(k as u32), v.extract(8 * k, 8).unwrap());
                        }
                    }
                }
                None => {}
            }
        }
        let constraints: Vec<Term> = self
            .harness
            .preconditions()
            .into_iter()
            .filter(|c| !c.is_true())
            .collect();
        let witness = self
            .solver
            .sat(constraints.clone())?
            .ok_or(ExecError::PreconditionsUnsat)?;
        let node_id = self.new_node(None, p.entry);
        self.tree[node_id as usize].added = constraints.clone();
        Ok(SymState {
            regs,
            mem,
            pc: p.entry,
            constraints,
            call_stack: vec![],
            effects: BTreeMap::new(),
            block_history: vec![],
            visit_counts: BTreeMap::new(),
            in_cursors: BTreeMap::new(),
            hook_cursors: BTreeMap::new(),
            written: BTreeSet::new(),
            node_id,
            parent_id: None,
            terminal: None,
            witness,
        })
    }

    /// A model of `s.constraints ∧ extra`, if one exists.
    fn feasible(&self, s: &SymState, extra: &Term) -> Result<Option<Assignment>, ExecError> {
        if extra.is_true() {
            return Ok(Some(s.witness.clone()));
        }
        if extra.is_false() {
            return Ok(None);
        }
        let w = extend_zero(&s.witness, extra);
        if Evaluator::new(&w).holds(extra).unwrap_or(false) {
            return Ok(Some(w));
        }
        let mut clauses = s.constraints.clone();
        clauses.push(extra.clone());
        Ok(self.solver.sat(clauses)?)
    }

    fn terminate(&mut self, s: &mut SymState, kind: TerminalKind) {
        let flag = match &kind {
            TerminalKind::Trap { .. } => Some(Flag::Error),
            TerminalKind::LoopBound { .. } => Some(Flag::LoopBound),
            TerminalKind::AssertFailed { .. } => Some(Flag::AssertFailed),
            TerminalKind::PostconditionFailed { .. } => Some(Flag::PostconditionFailed),
            TerminalKind::ErrorDirective { .. } => Some(Flag::ErrorDirective),
            _ => None,
        };
        let node = self.node(s);
        node.flags.extend(flag);
        node.terminal = Some(kind.clone());
        s.terminal = Some(kind);
    }

    fn trap(&mut self, s: &mut SymState, reason: TrapKind) {
        self.terminate(s, TerminalKind::Trap { reason });
    }

    /// A child of `s` in a fresh node, with `cond` appended.
    fn fork(&mut self, s: &SymState, cond: Term, witness: Assignment) -> SymState {
        let mut c = s.clone();
        let id = self.new_node(Some(s.node_id), s.pc);
        self.tree[id as usize].added.push(cond.clone());
        c.parent_id = Some(s.node_id);
        c.node_id = id;
        c.constraints.push(cond);
        c.witness = witness;
        c
    }

    fn parse_pred_at(&self, s: &SymState, d: &Directive) -> Result<Term, ExecError> {
        let env = StateEnv {
            state: s,
            inputs: &self.harness.inputs,
        };
        parse_pred(&d.text, &env).map_err(|err| ExecError::Expr {
            what: d.kind.name().to_string(),
            pc: s.pc,
            err,
        })
    }

    fn parse_value(&self, s: &SymState, text: &str, width: u8, what: &str) -> Result<Term, ExecError> {
        let env = StateEnv {
            state: s,
            inputs: &self.harness.inputs,
        };
        parse_expr(text, &env, width).map_err(|err| ExecError::Expr {
            what: what.to_string(),
            pc: s.pc,
            err,
        })
    }

    fn emit(&mut self, s: &mut SymState, channel: u32, payload: Term) {
        debug_assert_eq!(payload.width(), 8);
        s.effects.entry(channel).or_default().push(EffectRecord {
            channel,
            payload: payload.clone(),
            node: s.node_id,
        });
        self.event(s, Event::Effect { channel, payload });
    }

    /// Splits `s` on a 1-bit condition that should hold. Returns the state
    /// that continues (if `cond` can hold) and marks a failing child with
    /// `fail_kind` (if it can fail).
    fn check_split(
        &mut self,
        s: SymState,
        cond: Term,
        fail_kind: TerminalKind,
        out: &mut Vec<SymState>,
    ) -> Result<Option<SymState>, ExecError> {
        let neg = cond.not();
        let fail = self.feasible(&s, &neg)?;
        let pass = self.feasible(&s, &cond)?;
        Ok(match (pass, fail) {
            (Some(pw), Some(fw)) => {
                let mut f = self.fork(&s, neg, fw);
                self.terminate(&mut f, fail_kind);
                out.push(f);
                Some(self.fork(&s, cond, pw))
            }
            (None, Some(_)) => {
                let mut s = s;
                self.terminate(&mut s, fail_kind);
                out.push(s);
                None
            }
            (Some(_), None) => Some(s),
            (None, None) => {
                self.discarded += 1;
                None
            }
        })
    }

    fn apply_directive(&mut self, mut s: SymState, d: &Directive, out: &mut Vec<SymState>) -> Result<(), ExecError> {
        let detail = if d.message.is_empty() { d.text.clone() } else { d.message.clone() };
        self.event(
            &s,
            Event::Directive {
                kind: d.kind.name(),
                detail,
            },
        );
        match d.kind {
            DirectiveKind::Assume => {
                let cond = self.parse_pred_at(&s, d)?;
                if cond.is_true() {
                    out.push(s);
                } else if let Some(w) = self.feasible(&s, &cond)? {
                    s.constraints.push(cond.clone());
                    s.witness = w;
                    self.node(&s).added.push(cond);
                    out.push(s);
                } else {
                    self.discarded += 1;
                }
            }
            DirectiveKind::Assert => {
                let cond = self.parse_pred_at(&s, d)?;
                let kind = TerminalKind::AssertFailed {
                    message: d.message.clone(),
                };
                if let Some(c) = self.check_split(s, cond, kind, out)? {
                    out.push(c);
                }
            }
            DirectiveKind::Error => {
                self.terminate(
                    &mut s,
                    TerminalKind::ErrorDirective {
                        message: d.message.clone(),
                    },
                );
                out.push(s);
            }
            DirectiveKind::VirtualPrint => {
                let v = self.parse_value(&s, &d.text, 32, "virtual-print")?;
                let v = if v.width() < 8 { v.zx(8).unwrap() } else { v };
                for k in 0..v.width() / 8 {
                    let byte = v.extract(8 * k, 8).unwrap();
                    self.emit(&mut s, isa::channel::VIRTUAL_PRINT, byte);
                }
                out.push(s);
            }
            DirectiveKind::BreakpointLog => {
                let regs = s.regs.iter().enumerate().map(|(i, r)| format!("r{i} = {}", pretty(r))).collect();
                let pc = s.pc;
                self.node(&s).snapshots.push((pc, regs));
                out.push(s);
            }
            DirectiveKind::Postcondition => out.push(s),
        }
        Ok(())
    }

    /// Normal completion: postconditions, then `halted`.
    fn complete(&mut self, s: SymState, out: &mut Vec<SymState>) -> Result<(), ExecError> {
        let mut live = vec![s];
        for d in self.postconditions.clone() {
            let mut next = Vec::new();
            for s in live {
                let cond = self.parse_pred_at(&s, d)?;
                let kind = TerminalKind::PostconditionFailed {
                    message: d.message.clone(),
                };
                if let Some(c) = self.check_split(s, cond, kind, out)? {
                    next.push(c);
                }
            }
            live = next;
        }
        for mut s in live {
            self.terminate(&mut s, TerminalKind::Halted);
            out.push(s);
        }
        Ok(())
    }

    /// Concrete value of an address term, if the constraints pin it down.
    fn concretize(&self, s: &SymState, addr: &Term) -> Result<Option<u32>, ExecError> {
        if let Some(a) = addr.as_const() {
            return Ok(Some(a));
        }
        let w = extend_zero(&s.witness, addr);
        let v = Evaluator::new(&w).eval(addr).expect("witness covers the address");
        let other = addr.ne_(&Term::constant(v, 32));
        Ok(match self.feasible(s, &other)? {
            None => Some(v),
            Some(_) => None,
        })
    }

    fn jump_target(&self, pc: u32, imm: i32) -> Result<u32, TrapKind> {
        let target = pc as i64 + imm as i64;
        if target < 0 || target >= self.setup.program.len() as i64 {
            Err(TrapKind::BadJump { target })
        } else {
            Ok(target as u32)
        }
    }

    /// One instruction (plus block bookkeeping and directives at its pc).
    /// Returns the successors; terminal ones are marked.
    pub fn step(&mut self, mut s: SymState) -> Result<Vec<SymState>, ExecError> {
        debug_assert!(!s.is_terminal());
        let pc = s.pc;
        let mut out = Vec::new();
        if pc >= self.setup.program.len() {
            self.trap(&mut s, TrapKind::BadJump { target: pc as i64 });
            return Ok(vec![s]);
        }
        if self.leaders.contains(&pc) {
            if self.tree[s.node_id as usize].executed_any() {
                let parent = s.node_id;
                s.node_id = self.new_node(Some(parent), pc);
                s.parent_id = Some(parent);
            }
            s.block_history.push(pc);
            let visits = s.visit_counts.entry(pc).or_insert(0);
            *visits += 1;
            if *visits > self.harness.config.loop_bound {
                self.terminate(&mut s, TerminalKind::LoopBound { block: pc });
                return Ok(vec![s]);
            }
        }
        let mut live = vec![s];
        if let Some(ds) = self.directives_at.get(&pc).cloned() {
            for d in ds {
                let mut next = Vec::new();
                for s in live {
                    if s.is_terminal() {
                        out.push(s);
                    } else {
                        self.apply_directive(s, d, &mut next)?;
                    }
                }
                live = next;
            }
        }
        for s in live {
            if s.is_terminal() {
                out.push(s);
            } else {
                self.execute(s, &mut out)?;
            }
        }
        Ok(out)
    }

    fn execute(&mut self, mut s: SymState, out: &mut Vec<SymState>) -> Result<(), ExecError> {
        let pc = s.pc;
        let ins = self.setup.program.code[pc as usize];
        let text = self.disasm[pc as usize].clone();
        {
            let node = self.node(&s);
            node.events.push(Event::Instr { pc, text });
            node.pc_end = pc;
        }
        let reg = |s: &SymState, r: u8| s.regs[r as usize].clone();
        let mut next = pc + 1;
        let set = |this: &mut Self, s: &mut SymState, rd: u8, v: Term| {
            this.event(s, Event::RegWrite { reg: rd, value: v.clone() });
            s.regs[rd as usize] = v;
        };
        match ins.opcode {
            Opcode::Halt => return self.complete(s, out),
            Opcode::Const => set(self, &mut s, ins.rd, Term::constant(ins.imm as u32, 32)),
            Opcode::Mov => {
                let v = reg(&s, ins.rs);
                set(self, &mut s, ins.rd, v)
            }
            Opcode::Add
            | Opcode::Sub
            | Opcode::Mul
            | Opcode::And
            | Opcode::Or
            | Opcode::Xor
            | Opcode::Shl
            | Opcode::Shrl
            | Opcode::Shra
            | Opcode::CmpEq
            | Opcode::CmpLts
            | Opcode::CmpLtu => {
                let (a, b) = (reg(&s, ins.rs), reg(&s, ins.rt));
                let amt = || b.and(&Term::constant(31, 32));
                let v = match ins.opcode {
                    Opcode::Add => a.add(&b),
                    Opcode::Sub => a.sub(&b),
                    Opcode::Mul => a.mul(&b),
                    Opcode::And => a.and(&b),
                    Opcode::Or => a.or(&b),
                    Opcode::Xor => a.xor(&b),
                    Opcode::Shl => a.shl(&amt()),
                    Opcode::Shrl => a.shrl(&amt()),
                    Opcode::Shra => a.shra(&amt()),
                    Opcode::CmpEq => a.eq_(&b).zx(32).unwrap(),
                    Opcode::CmpLts => a.slt(&b).zx(32).unwrap(),
                    Opcode::CmpLtu => a.ult(&b).zx(32).unwrap(),
                    _ => unreachable!(),
                };
                set(self, &mut s, ins.rd, v)
            }
            Opcode::Addi => {
                let v = reg(&s, ins.rs).add(&Term::constant(ins.imm as u32, 32));
                set(self, &mut s, ins.rd, v)
            }
            Opcode::Beqz | Opcode::Bnez => {
                let r = reg(&s, ins.rs);
                let zero = r.eq_(&Term::constant(0, 32));
                let taken = if ins.opcode == Opcode::Beqz { zero } else { zero.not() };
                let not_taken = taken.not();
                let go = |this: &mut Self, mut st: SymState, jump: bool, out: &mut Vec<SymState>| {
                    if jump {
                        match this.jump_target(pc, ins.imm) {
                            Ok(t) => st.pc = t,
                            Err(trap) => {
                                this.trap(&mut st, trap);
                                out.push(st);
                                return;
                            }
                        }
                    } else {
                        st.pc = pc + 1;
                    }
                    out.push(st);
                };
                let t = self.feasible(&s, &taken)?;
                let f = self.feasible(&s, &not_taken)?;
                match (t, f) {
                    (Some(tw), Some(fw)) => {
                        let a = self.fork(&s, taken, tw);
                        let b = self.fork(&s, not_taken, fw);
                        go(self, a, true, out);
                        go(self, b, false, out);
                    }
                    (Some(_), None) => go(self, s, true, out),
                    (None, Some(_)) => go(self, s, false, out),
                    (None, None) => self.discarded += 1,
                }
                return Ok(());
            }
            Opcode::Jmp => match self.jump_target(pc, ins.imm) {
                Ok(t) => next = t,
                Err(trap) => {
                    self.trap(&mut s, trap);
                    out.push(s);
                    return Ok(());
                }
            },
            Opcode::Load | Opcode::Store => {
                let addr_t = reg(&s, ins.rs).add(&Term::constant(ins.imm as u32, 32));
                let Some(addr) = self.concretize(&s, &addr_t)? else {
                    self.trap(&mut s, TrapKind::UnconstrainedAddress);
                    out.push(s);
                    return Ok(());
                };
                if !self.opts.address_ok(addr) {
                    self.trap(&mut s, TrapKind::MemoryRange { addr });
                    out.push(s);
                    return Ok(());
                }
                if ins.opcode == Opcode::Load {
                    let v = s.read32(addr);
                    self.event(&s, Event::Read { addr, value: v.clone() });
                    set(self, &mut s, ins.rd, v);
                } else {
                    let v = reg(&s, ins.rt);
                    self.event(&s, Event::Write { addr, value: v.clone() });
                    s.write32(addr, &v);
                }
            }
            Opcode::Call => {
                let target = match self.jump_target(pc, ins.imm) {
                    Ok(t) => t,
                    Err(trap) => {
                        self.trap(&mut s, trap);
                        out.push(s);
                        return Ok(());
                    }
                };
                if let Some(&hi) = self.hooks.get(&target) {
                    self.apply_hook(&mut s, hi)?;
                } else {
                    if s.call_stack.len() >= self.opts.call_depth_max {
                        self.trap(&mut s, TrapKind::CallDepth);
                        out.push(s);
                        return Ok(());
                    }
                    s.call_stack.push(pc + 1);
                    next = target;
                }
            }
            Opcode::Ret => match s.call_stack.pop() {
                Some(r) => next = r,
                None => return self.complete(s, out),
            },
            Opcode::Out => {
                let byte = reg(&s, ins.rs).extract(0, 8).unwrap();
                self.emit(&mut s, ins.imm as u32, byte);
            }
            Opcode::In => {
                let ch = ins.imm as u32;
                let k = s.in_cursors.get(&ch).copied().unwrap_or(0);
                if k >= self.harness.config.max_in_bytes {
                    self.terminate(&mut s, TerminalKind::InputExhausted { channel: ch });
                    out.push(s);
                    return Ok(());
                }
                s.in_cursors.insert(ch, k + 1);
                let v = Term::var(&in_var_name(ch, k), 8).zx(32).unwrap();
                set(self, &mut s, ins.rd, v);
            }
        }
        s.pc = next;
        out.push(s);
        Ok(())
    }

    fn apply_hook(&mut self, s: &mut SymState, index: usize) -> Result<(), ExecError> {
        let hook = &self.setup.hooks[index];
        let k = s.hook_cursors.get(&hook.name).copied().unwrap_or(0);
        let value = match &hook.returns {
            None => Term::var(&hook_var_name(&hook.name, k), 32),
            Some(expr) => {
                let v = self.parse_value(s, expr, 32, "hook return")?;
                if v.width() < 32 {
                    v.zx(32).unwrap()
                } else {
                    v
                }
            }
        };
        if let Some(e) = &hook.effect {
            let b = self.parse_value(s, &e.expr, 8, "hook effect")?;
            let b = match b.width() {
                8 => b,
                w if w < 8 => b.zx(8).unwrap(),
                _ => b.extract(0, 8).unwrap(),
            };
            self.emit(s, e.channel, b);
        }
        s.hook_cursors.insert(hook.name.clone(), k + 1);
        let name = hook.name.clone();
        let node = self.node(s);
        node.flags.insert(Flag::HookCall);
        node.events.push(Event::Hook {
            name,
            value: value.clone(),
        });
        s.regs[0] = value;
        Ok(())
    }

    pub fn finish(self, mut terminals: Vec<SymState>) -> RunResult {
        terminals.sort_by_key(|s| s.node_id);
        let cfg = Cfg::build(&self.setup.program);
        RunResult {
            side: self.side,
            terminals,
            tree: self.tree,
            blocks: cfg.blocks.len(),
            cyclomatic: cfg.cyclomatic(),
            discarded: self.discarded,
        }
    }
}

/// Breadth-first exploration until every state is terminal.
pub fn execute_complete(h: &Harness, side: Side, solver: &Solver) -> Result<RunResult, ExecError> {
    let mut ex = Explorer::new(h, side, solver);
    let mut frontier = VecDeque::from([ex.root()?]);
    let mut terminals = Vec::new();
    let limit = h.config.state_limit;
    while let Some(s) = frontier.pop_front() {
        for c in ex.step(s)? {
            if c.is_terminal() {
                terminals.push(c);
            } else {
                frontier.push_back(c);
            }
        }
        if frontier.len() + terminals.len() > limit {
            return Err(ExecError::StateLimit { limit });
        }
    }
    Ok(ex.finish(terminals))
}

/// Every shared variable a run mentions, plus the declared inputs.
pub fn vocabulary(h: &Harness, runs: &[&RunResult]) -> BTreeSet<Var> {
    let mut out = h.declared_vars();
    for r in runs {
        out.extend(r.vars());
    }
    out
}
