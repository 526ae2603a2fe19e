use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Instruction, Opcode, Program, DEFAULT_CALL_DEPTH, NUM_REGS};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MachineState {
    pub regs: [u32; NUM_REGS],
    pub mem: BTreeMap<u32, u8>,
    pub pc: u32,
    pub call_stack: Vec<u32>,
    pub channels_out: BTreeMap<u32, Vec<u8>>,
    pub channels_in_cursor: BTreeMap<u32, usize>,
}

impl MachineState {
    pub fn read_u8(&self, addr: u32) -> u8 {
        self.mem.get(&addr).copied().unwrap_or(0)
    }

    pub fn read_u32(&self, addr: u32) -> u32 {
        u32::from_le_bytes(std::array::from_fn(|i| {
            self.read_u8(addr.wrapping_add(i as u32))
        }))
    }

    pub fn write_u32(&mut self, addr: u32, value: u32) {
        for (i, b) in value.to_le_bytes().into_iter().enumerate() {
            self.mem.insert(addr.wrapping_add(i as u32), b);
        }
    }

    pub fn emit(&mut self, channel: u32, byte: u8) {
        self.channels_out.entry(channel).or_default().push(byte);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TrapKind {
    MemoryRange { addr: u32 },
    BadJump { target: i64 },
    CallDepth,
    UnconstrainedAddress,
}

impl fmt::Display for TrapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrapKind::MemoryRange { addr } => write!(f, "memory access out of range at 0x{addr:x}"),
            TrapKind::BadJump { target } => write!(f, "control transfer to invalid index {target}"),
            TrapKind::CallDepth => write!(f, "call stack overflow"),
            TrapKind::UnconstrainedAddress => write!(f, "unconstrained address"),
        }
    }
}

/// Why a concrete run stopped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Terminal {
    /// `halt`, or `ret` with an empty call stack (return from the entry function).
    Halt,
    Trap(TrapKind),
    StepLimit,
    InputExhausted,
    /// Stopped by a [`Monitor`].
    Stopped(String),
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub step_limit: u64,
    pub call_depth_max: usize,
    /// Exclusive upper bound of addressable memory; a 4-byte access at `a`
    /// traps unless `a + 4 <= mem_limit`.
    pub mem_limit: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            step_limit: 1_000_000,
            call_depth_max: DEFAULT_CALL_DEPTH,
            mem_limit: 1 << 32,
        }
    }
}

impl RunOptions {
    pub fn address_ok(&self, addr: u32) -> bool {
        addr as u64 + 4 <= self.mem_limit
    }
}

/// Observation and interception points for [`run_concrete`].
pub trait Monitor {
    /// Runs before the instruction at `state.pc` executes.
    fn before_step(&mut self, _program: &Program, _state: &mut MachineState) -> Option<Terminal> {
        None
    }

    /// Offered every `call` before it is taken. Returning `true` means the
    /// monitor handled it (and advanced `pc` itself).
    fn on_call(&mut self, _state: &mut MachineState, _target: u32) -> bool {
        false
    }

    /// Runs when the program completes normally, before `Terminal::Halt` is
    /// reported. May replace the outcome.
    fn on_complete(&mut self, _state: &mut MachineState) -> Option<Terminal> {
        None
    }
}

pub struct NoMonitor;

impl Monitor for NoMonitor {}

#[derive(Clone, Debug)]
pub struct ConcreteRun {
    pub state: MachineState,
    pub terminal: Terminal,
    pub steps: u64,
}

fn signed_lt(a: u32, b: u32) -> bool {
    (a as i32) < (b as i32)
}

/// Executes `program` from its entry point.
///
/// `init_mem` is applied after the data segment, so it may override it.
pub fn run_concrete(
    program: &Program,
    inputs: &BTreeMap<u32, Vec<u8>>,
    init_regs: [u32; NUM_REGS],
    init_mem: &BTreeMap<u32, u8>,
    opts: &RunOptions,
    monitor: &mut dyn Monitor,
) -> ConcreteRun {
    assert!(opts.step_limit > 0, "step limit must be positive");
    let mut s = MachineState {
        regs: init_regs,
        pc: program.entry,
        ..Default::default()
    };
    for (i, b) in program.data.iter().enumerate() {
        s.mem.insert(program.data_base.wrapping_add(i as u32), *b);
    }
    s.mem.extend(init_mem.iter().map(|(a, b)| (*a, *b)));

    let mut steps = 0u64;
    let terminal = loop {
        if steps >= opts.step_limit {
            break Terminal::StepLimit;
        }
        let Some(&ins) = program.get(s.pc) else {
            break Terminal::Trap(TrapKind::BadJump { target: s.pc as i64 });
        };
        if let Some(t) = monitor.before_step(program, &mut s) {
            break t;
        }
        steps += 1;
        match step(program, &mut s, &ins, inputs, opts, monitor) {
            Ok(()) => {}
            Err(Terminal::Halt) => {
                break monitor.on_complete(&mut s).unwrap_or(Terminal::Halt);
            }
            Err(t) => break t,
        }
    };
    ConcreteRun {
        state: s,
        terminal,
        steps,
    }
}

fn jump(program: &Program, pc: u32, imm: i32) -> Result<u32, Terminal> {
    let target = pc as i64 + imm as i64;
    if target < 0 || target >= program.len() as i64 {
        Err(Terminal::Trap(TrapKind::BadJump { target }))
    } else {
        Ok(target as u32)
    }
}

fn step(
    program: &Program,
    s: &mut MachineState,
    ins: &Instruction,
    inputs: &BTreeMap<u32, Vec<u8>>,
    opts: &RunOptions,
    monitor: &mut dyn Monitor,
) -> Result<(), Terminal> {
    let r = |s: &MachineState, i: u8| s.regs[i as usize];
    let pc = s.pc;
    let mut next = pc + 1;
    match ins.opcode {
        Opcode::Halt => return Err(Terminal::Halt),
        Opcode::Const => s.regs[ins.rd as usize] = ins.imm as u32,
        Opcode::Mov => s.regs[ins.rd as usize] = r(s, ins.rs),
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
            let (a, b) = (r(s, ins.rs), r(s, ins.rt));
            let sh = b & 31;
            s.regs[ins.rd as usize] = match ins.opcode {
                Opcode::Add => a.wrapping_add(b),
                Opcode::Sub => a.wrapping_sub(b),
                Opcode::Mul => a.wrapping_mul(b),
                Opcode::And => a & b,
                Opcode::Or => a | b,
                Opcode::Xor => a ^ b,
                Opcode::Shl => a << sh,
                Opcode::Shrl => a >> sh,
                Opcode::Shra => ((a as i32) >> sh) as u32,
                Opcode::CmpEq => (a == b) as u32,
                Opcode::CmpLts => signed_lt(a, b) as u32,
                Opcode::CmpLtu => (a < b) as u32,
                _ => unreachable!(),
            };
        }
        Opcode::Addi => s.regs[ins.rd as usize] = r(s, ins.rs).wrapping_add(ins.imm as u32),
        Opcode::Beqz => {
            if r(s, ins.rs) == 0 {
                next = jump(program, pc, ins.imm)?;
            }
        }
        Opcode::Bnez => {
            if r(s, ins.rs) != 0 {
                next = jump(program, pc, ins.imm)?;
            }
        }
        Opcode::Jmp => next = jump(program, pc, ins.imm)?,
        Opcode::Load => {
            let addr = r(s, ins.rs).wrapping_add(ins.imm as u32);
            if !opts.address_ok(addr) {
                return Err(Terminal::Trap(TrapKind::MemoryRange { addr }));
            }
            s.regs[ins.rd as usize] = s.read_u32(addr);
        }
        Opcode::Store => {
            let addr = r(s, ins.rs).wrapping_add(ins.imm as u32);
            if !opts.address_ok(addr) {
                return Err(Terminal::Trap(TrapKind::MemoryRange { addr }));
            }
            let v = r(s, ins.rt);
            s.write_u32(addr, v);
        }
        Opcode::Call => {
            let target = jump(program, pc, ins.imm)?;
            if monitor.on_call(s, target) {
                return Ok(());
            }
            if s.call_stack.len() >= opts.call_depth_max {
                return Err(Terminal::Trap(TrapKind::CallDepth));
            }
            s.call_stack.push(pc + 1);
            next = target;
        }
        Opcode::Ret => match s.call_stack.pop() {
            Some(ret) => next = ret,
            None => return Err(Terminal::Halt),
        },
        Opcode::Out => {
            let byte = r(s, ins.rs) as u8;
            s.emit(ins.imm as u32, byte);
        }
        Opcode::In => {
            let ch = ins.imm as u32;
            let cursor = s.channels_in_cursor.entry(ch).or_insert(0);
            let Some(&byte) = inputs.get(&ch).and_then(|bytes| bytes.get(*cursor)) else {
                return Err(Terminal::InputExhausted);
            };
            *cursor += 1;
            s.regs[ins.rd as usize] = byte as u32;
        }
    }
    s.pc = next;
    Ok(())
}
