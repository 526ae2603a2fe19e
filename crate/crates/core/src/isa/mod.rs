//! The compact 32-bit instruction set that both program versions are written in.
//!
//! Eight general purpose 32-bit registers, a byte-granular sparse memory, a
//! shadow return stack for `call`/`ret`, and byte-oriented IO channels. Every
//! instruction is 8 bytes on disk (see [`container`]).

mod asm;
mod cfg;
pub mod container;
mod interp;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use asm::{assemble, disassemble, disassemble_one};
pub use cfg::{block_leaders, cyclomatic_complexity, Cfg};
pub use interp::{
    run_concrete, ConcreteRun, MachineState, Monitor, NoMonitor, RunOptions, Terminal, TrapKind,
};

pub const NUM_REGS: usize = 8;
pub const DEFAULT_CALL_DEPTH: usize = 64;

/// Channel conventions shared by the executor, the report and the UI.
pub mod channel {
    pub const STDOUT: u32 = 0;
    pub const STDERR: u32 = 1;
    pub const VIRTUAL_PRINT: u32 = 2;
    pub const NETWORK: u32 = 3;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Opcode {
    Halt = 0x00,
    Const = 0x01,
    Mov = 0x02,
    Add = 0x03,
    Sub = 0x04,
    Mul = 0x05,
    And = 0x06,
    Or = 0x07,
    Xor = 0x08,
    Shl = 0x09,
    Shrl = 0x0A,
    Shra = 0x0B,
    Addi = 0x0C,
    CmpEq = 0x0D,
    CmpLts = 0x0E,
    CmpLtu = 0x0F,
    Beqz = 0x10,
    Bnez = 0x11,
    Jmp = 0x12,
    Load = 0x13,
    Store = 0x14,
    Call = 0x15,
    Ret = 0x16,
    Out = 0x17,
    In = 0x18,
}

impl Opcode {
    pub const ALL: [Opcode; 25] = [
        Opcode::Halt,
        Opcode::Const,
        Opcode::Mov,
        Opcode::Add,
        Opcode::Sub,
        Opcode::Mul,
        Opcode::And,
        Opcode::Or,
        Opcode::Xor,
        Opcode::Shl,
        Opcode::Shrl,
        Opcode::Shra,
        Opcode::Addi,
        Opcode::CmpEq,
        Opcode::CmpLts,
        Opcode::CmpLtu,
        Opcode::Beqz,
        Opcode::Bnez,
        Opcode::Jmp,
        Opcode::Load,
        Opcode::Store,
        Opcode::Call,
        Opcode::Ret,
        Opcode::Out,
        Opcode::In,
    ];

    pub fn from_byte(b: u8) -> Option<Opcode> {
        Opcode::ALL.get(b as usize).copied()
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Halt => "halt",
            Opcode::Const => "const",
            Opcode::Mov => "mov",
            Opcode::Add => "add",
            Opcode::Sub => "sub",
            Opcode::Mul => "mul",
            Opcode::And => "and",
            Opcode::Or => "or",
            Opcode::Xor => "xor",
            Opcode::Shl => "shl",
            Opcode::Shrl => "shrl",
            Opcode::Shra => "shra",
            Opcode::Addi => "addi",
            Opcode::CmpEq => "cmpeq",
            Opcode::CmpLts => "cmplts",
            Opcode::CmpLtu => "cmpltu",
            Opcode::Beqz => "beqz",
            Opcode::Bnez => "bnez",
            Opcode::Jmp => "jmp",
            Opcode::Load => "load",
            Opcode::Store => "store",
            Opcode::Call => "call",
            Opcode::Ret => "ret",
            Opcode::Out => "out",
            Opcode::In => "in",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Opcode> {
        Opcode::ALL.iter().copied().find(|op| op.mnemonic() == s)
    }

    /// Instructions whose immediate is a relative control-flow offset.
    pub fn is_relative_jump(self) -> bool {
        matches!(self, Opcode::Beqz | Opcode::Bnez | Opcode::Jmp | Opcode::Call)
    }

    pub fn is_conditional(self) -> bool {
        matches!(self, Opcode::Beqz | Opcode::Bnez)
    }

    /// Instructions after which control does not simply fall through.
    pub fn ends_block(self) -> bool {
        matches!(
            self,
            Opcode::Halt
                | Opcode::Beqz
                | Opcode::Bnez
                | Opcode::Jmp
                | Opcode::Call
                | Opcode::Ret
        )
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instruction {
    pub opcode: Opcode,
    pub rd: u8,
    pub rs: u8,
    pub rt: u8,
    pub imm: i32,
}

impl Instruction {
    pub fn new(opcode: Opcode, rd: u8, rs: u8, rt: u8, imm: i32) -> Self {
        Instruction {
            opcode,
            rd,
            rs,
            rt,
            imm,
        }
    }

    pub fn halt() -> Self {
        Instruction::new(Opcode::Halt, 0, 0, 0, 0)
    }

    /// Absolute target of a relative jump located at `pc`, or `None` when the
    /// offset leaves the 32-bit index space.
    pub fn jump_target(&self, pc: u32) -> Option<i64> {
        self.opcode
            .is_relative_jump()
            .then(|| pc as i64 + self.imm as i64)
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&disassemble_one(self, None))
    }
}

/// A loaded program: code, an initial data segment and optional symbol names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub entry: u32,
    pub code: Vec<Instruction>,
    pub data_base: u32,
    pub data: Vec<u8>,
    /// Label name to instruction index. Not stored in the binary container.
    #[serde(default)]
    pub labels: BTreeMap<String, u32>,
}

impl Program {
    pub fn new(code: Vec<Instruction>) -> Self {
        Program {
            entry: 0,
            code,
            data_base: 0,
            data: Vec::new(),
            labels: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> u32 {
        self.code.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    pub fn get(&self, pc: u32) -> Option<&Instruction> {
        self.code.get(pc as usize)
    }

    pub fn label(&self, name: &str) -> Option<u32> {
        self.labels.get(name).copied()
    }

    /// Nearest label at or before `pc`, for display as `label+off`.
    pub fn symbolize(&self, pc: u32) -> Option<(&str, u32)> {
        self.labels
            .iter()
            .filter(|(_, &at)| at <= pc)
            .max_by_key(|(name, &at)| (at, std::cmp::Reverse(name.as_str())))
            .map(|(name, &at)| (name.as_str(), pc - at))
    }

    /// Program equality ignoring label names, which the container drops.
    pub fn same_code(&self, other: &Program) -> bool {
        self.entry == other.entry
            && self.code == other.code
            && self.data_base == other.data_base
            && self.data == other.data
    }

    pub fn validate(&self) -> Result<(), IsaError> {
        if self.code.is_empty() {
            return Err(IsaError::EmptyProgram);
        }
        if self.entry >= self.len() {
            return Err(IsaError::EntryOutOfRange {
                entry: self.entry,
                len: self.len(),
            });
        }
        for (i, ins) in self.code.iter().enumerate() {
            if ins.rd as usize >= NUM_REGS || ins.rs as usize >= NUM_REGS || ins.rt as usize >= NUM_REGS {
                return Err(IsaError::BadRegister { index: i as u32 });
            }
        }
        for (name, &at) in &self.labels {
            if at > self.len() {
                return Err(IsaError::LabelOutOfRange {
                    label: name.clone(),
                    at,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsaError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undefined label `{label}`")]
    UndefinedLabel { line: usize, label: String },
    #[error("line {line}: immediate {value} out of range")]
    ImmediateRange { line: usize, value: i64 },
    #[error("bad magic {0:02x?}, expected \"CZB1\"")]
    BadMagic(Vec<u8>),
    #[error("unsupported container version {0}")]
    BadVersion(u8),
    #[error("truncated container: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("code_count is zero")]
    EmptyCode,
    #[error("unknown opcode 0x{opcode:02x} at instruction {index}")]
    UnknownOpcode { opcode: u8, index: u32 },
    #[error("register index out of range at instruction {index}")]
    BadRegister { index: u32 },
    #[error("program has no instructions")]
    EmptyProgram,
    #[error("entry {entry} outside code of length {len}")]
    EntryOutOfRange { entry: u32, len: u32 },
    #[error("label `{label}` points outside code ({at})")]
    LabelOutOfRange { label: String, at: u32 },
}
