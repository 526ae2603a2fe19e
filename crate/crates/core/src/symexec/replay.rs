use std::collections::{BTreeMap, BTreeSet};

use super::config::{Binding, Directive, DirectiveKind, Harness, ProgramSetup};
use super::state::{hook_var_name, implicit_var, in_var_name, Side};
use crate::isa::{self, run_concrete, MachineState, Monitor, Opcode, Program, RunOptions, Terminal};
use crate::term::{parse_expr, parse_pred, Assignment, Env, Evaluator, Term, Var};

/// A concrete run of one side under an assignment to the shared inputs.
#[derive(Clone, Debug)]
pub struct Replay {
    pub terminal: Terminal,
    pub state: MachineState,
    pub block_history: Vec<u32>,
    pub steps: u64,
}

impl Replay {
    /// The terminal in the vocabulary of the symbolic executor.
    pub fn terminal_name(&self) -> &str {
        match &self.terminal {
            Terminal::Halt => "halted",
            Terminal::Trap(_) => "trap",
            Terminal::StepLimit => "step-limit",
            Terminal::InputExhausted => "input-exhausted",
            Terminal::Stopped(s) => s,
        }
    }
}

struct ConcreteEnv<'a> {
    state: &'a MachineState,
    inputs: &'a BTreeMap<String, Var>,
}

impl Env for ConcreteEnv<'_> {
    fn register(&self, index: usize) -> Option<Term> {
        self.state.regs.get(index).map(|&v| Term::constant(v, 32))
    }

    fn mem8(&self, addr: u32) -> Option<Term> {
        Some(Term::constant(self.state.read_u8(addr) as u32, 8))
    }

    fn input(&self, name: &str) -> Option<Term> {
        self.inputs
            .get(name)
            .cloned()
            .or_else(|| implicit_var(name))
            .map(|v| Term::from_var(&v))
    }
}

struct ReplayMonitor<'a> {
    harness: &'a Harness,
    setup: &'a ProgramSetup,
    assignment: &'a Assignment,
    leaders: BTreeSet<u32>,
    directives_at: BTreeMap<u32, Vec<&'a Directive>>,
    history: Vec<u32>,
    visits: BTreeMap<u32, u32>,
    hook_cursors: BTreeMap<String, u32>,
}

impl ReplayMonitor<'_> {
    fn value(&self, state: &MachineState, text: &str, width: u8, pred: bool) -> u32 {
        let env = ConcreteEnv {
            state,
            inputs: &self.harness.inputs,
        };
        let t = if pred {
            parse_pred(text, &env)
        } else {
            parse_expr(text, &env, width)
        }
        .expect("expressions are validated at load time");
        let mut a = self.assignment.clone();
        for v in t.vars() {
            if !a.contains(&v.name) {
                a.insert(&v, 0);
            }
        }
        Evaluator::new(&a).eval(&t).expect("assignment completed")
    }
}

impl Monitor for ReplayMonitor<'_> {
    fn before_step(&mut self, _program: &Program, state: &mut MachineState) -> Option<Terminal> {
        let pc = state.pc;
        if self.leaders.contains(&pc) {
            self.history.push(pc);
            let v = self.visits.entry(pc).or_insert(0);
            *v += 1;
            if *v > self.harness.config.loop_bound {
                return Some(Terminal::Stopped("loop-bound".into()));
            }
        }
        for d in self.directives_at.get(&pc).cloned().unwrap_or_default() {
            match d.kind {
                DirectiveKind::Assume if self.value(state, &d.text, 1, true) == 0 => {
                    return Some(Terminal::Stopped("assume-violated".into()));
                }
                DirectiveKind::Assert if self.value(state, &d.text, 1, true) == 0 => {
                    return Some(Terminal::Stopped("assert-failed".into()));
                }
                DirectiveKind::Error => return Some(Terminal::Stopped("error-directive".into())),
                DirectiveKind::VirtualPrint => {
                    let env = ConcreteEnv {
                        state,
                        inputs: &self.harness.inputs,
                    };
                    let width = parse_expr(&d.text, &env, 32).map(|t| t.width()).unwrap_or(32);
                    let v = self.value(state, &d.text, 32, false);
                    for k in 0..(width / 8).max(1) {
                        state.emit(isa::channel::VIRTUAL_PRINT, (v >> (8 * k)) as u8);
                    }
                }
                _ => {}
            }
        }
        None
    }

    fn on_call(&mut self, state: &mut MachineState, target: u32) -> bool {
        let Some(hook) = self.setup.hooks.iter().find(|h| h.target == target) else {
            return false;
        };
        let k = self.hook_cursors.get(&hook.name).copied().unwrap_or(0);
        let ret = match &hook.returns {
            None => self.assignment.get(&hook_var_name(&hook.name, k)).unwrap_or(0),
            Some(e) => self.value(state, e, 32, false),
        };
        if let Some(e) = &hook.effect {
            let b = self.value(state, &e.expr, 8, false);
            state.emit(e.channel, b as u8);
        }
        self.hook_cursors.insert(hook.name.clone(), k + 1);
        state.regs[0] = ret;
        state.pc += 1;
        true
    }

    fn on_complete(&mut self, state: &mut MachineState) -> Option<Terminal> {
        for d in &self.setup.directives {
            if d.kind == DirectiveKind::Postcondition && self.value(state, &d.text, 1, true) == 0 {
                return Some(Terminal::Stopped("postcondition-failed".into()));
            }
        }
        None
    }
}

/// Input bytes per channel, initial registers and initial memory.
pub type ConcreteInputs = (BTreeMap<u32, Vec<u8>>, [u32; isa::NUM_REGS], BTreeMap<u32, u8>);

/// Concrete input channels, registers and memory for an assignment.
pub fn concrete_inputs(h: &Harness, program: &Program, a: &Assignment) -> ConcreteInputs {
    let mut channels = BTreeMap::new();
    for ins in &program.code {
        if ins.opcode == Opcode::In {
            let ch = ins.imm as u32;
            channels.entry(ch).or_insert_with(|| {
                (0..h.config.max_in_bytes)
                    .map(|k| a.get(&in_var_name(ch, k)).unwrap_or(0) as u8)
                    .collect::<Vec<u8>>()
            });
        }
    }
    let mut regs = [0u32; isa::NUM_REGS];
    let mut mem = h.init_memory.clone();
    for d in &h.config.inputs {
        let v = a.get(&d.name).unwrap_or(0);
        match d.bind {
            Some(Binding::Reg(r)) => regs[r as usize] = v,
            Some(Binding::Mem(addr)) => {
                for k in 0..(d.width as u32 / 8).max(1) {
                    mem.insert(addr.wrapping_add(k), (v >> (8 * k)) as u8);
                }
            }
            None => {}
        }
    }
    (channels, regs, mem)
}

/// Runs one side concretely with the harness directives and hooks applied.
pub fn replay(h: &Harness, side: Side, a: &Assignment) -> Replay {
    let setup = h.setup(side);
    let mut directives_at: BTreeMap<u32, Vec<&Directive>> = BTreeMap::new();
    for d in &setup.directives {
        if let (Some(pc), false) = (d.pc, d.kind == DirectiveKind::Postcondition) {
            directives_at.entry(pc).or_default().push(d);
        }
    }
    let mut m = ReplayMonitor {
        harness: h,
        setup,
        assignment: a,
        leaders: isa::block_leaders(&setup.program),
        directives_at,
        history: vec![],
        visits: BTreeMap::new(),
        hook_cursors: BTreeMap::new(),
    };
    let (inputs, regs, mem) = concrete_inputs(h, &setup.program, a);
    let opts = RunOptions {
        call_depth_max: h.config.call_depth_max,
        ..RunOptions::default()
    };
    let run = run_concrete(&setup.program, &inputs, regs, &mem, &opts, &mut m);
    Replay {
        terminal: run.terminal,
        state: run.state,
        block_history: m.history,
        steps: run.steps,
    }
}
