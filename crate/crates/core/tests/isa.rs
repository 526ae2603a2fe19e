mod common;

use std::collections::BTreeMap;

use duet::isa::container::{decode, encode};
use duet::isa::{
    assemble, block_leaders, cyclomatic_complexity, disassemble, run_concrete, Instruction, NoMonitor, Opcode,
    Program, RunOptions, Terminal,
};
use proptest::prelude::*;

fn run(p: &Program, regs: [u32; 8]) -> duet::isa::ConcreteRun {
    run_concrete(p, &BTreeMap::new(), regs, &BTreeMap::new(), &RunOptions::default(), &mut NoMonitor)
}

#[test]
fn halt_matches_golden_container() {
    let golden = std::fs::read(common::samples_dir().join("golden/halt.czb")).unwrap();
    let bytes = encode(&assemble("halt").unwrap());
    assert_eq!(bytes, golden);
    assert_eq!(bytes.len(), 21 + 8);
    assert_eq!(&bytes[..4], b"CZB1");
    assert_eq!(bytes[4], 1);
    assert_eq!(&bytes[9..13], &1u32.to_le_bytes());
    assert_eq!(&bytes[21..], &[0u8; 8]);
}

#[test]
fn echo_sample_round_trips_through_the_container() {
    let dir = common::samples_dir().join("echo");
    let src = std::fs::read_to_string(dir.join("echo.asm")).unwrap();
    let bin = std::fs::read(dir.join("echo.czb")).unwrap();
    assert!(assemble(&src).unwrap().same_code(&decode(&bin).unwrap()));
    let inputs = BTreeMap::from([(0, vec![0x41])]);
    let r = run_concrete(
        &decode(&bin).unwrap(),
        &inputs,
        [0; 8],
        &BTreeMap::new(),
        &RunOptions::default(),
        &mut NoMonitor,
    );
    assert_eq!(r.terminal, Terminal::Halt);
    assert_eq!(r.state.channels_out[&0], vec![0x41]);
}

#[test]
fn leaders_of_branch_and_call_samples() {
    let p = assemble("nop0: const r0, 0\nconst r1, 1\nconst r2, 2\nbeqz r1, t\nconst r3, 3\nconst r4, 4\nconst r5, 5\nt: halt").unwrap();
    let l = block_leaders(&p);
    assert!(l.is_superset(&[0, 4, 7].into()));
    let p = assemble("const r0, 0\nconst r1, 1\ncall f\nhalt\nconst r0, 0\nconst r0, 0\nconst r0, 0\nconst r0, 0\nconst r0, 0\nf: ret").unwrap();
    assert!(block_leaders(&p).is_superset(&[0, 3, 9].into()));
    assert_eq!(cyclomatic_complexity(&assemble("const r0, 1\nhalt").unwrap()), 1);
}

/// Reference semantics, written independently of the interpreter.
fn reference(op: Opcode, a: u32, b: u32) -> u32 {
    match op {
        Opcode::Add => a.wrapping_add(b),
        Opcode::Sub => a.wrapping_sub(b),
        Opcode::Mul => a.wrapping_mul(b),
        Opcode::And => a & b,
        Opcode::Or => a | b,
        Opcode::Xor => a ^ b,
        Opcode::Shl => a << (b % 32),
        Opcode::Shrl => a >> (b % 32),
        Opcode::Shra => ((a as i32) >> (b % 32)) as u32,
        Opcode::CmpEq => (a == b) as u32,
        Opcode::CmpLts => ((a as i32) < (b as i32)) as u32,
        Opcode::CmpLtu => (a < b) as u32,
        _ => unreachable!(),
    }
}

const BINARY: [Opcode; 12] = [
    Opcode::Add,
    Opcode::Sub,
    Opcode::Mul,
    Opcode::And,
    Opcode::Or,
    Opcode::Xor,
    Opcode::Shl,
    Opcode::Shrl,
    Opcode::Shra,
    Opcode::CmpEq,
    Opcode::CmpLts,
    Opcode::CmpLtu,
];

fn valid_instruction(len: u32) -> impl Strategy<Value = Instruction> {
    (0u8..=0x18, 0u8..8, 0u8..8, 0u8..8, any::<i32>(), 0..len)
        .prop_map(move |(op, rd, rs, rt, imm, target)| canonical(Opcode::from_byte(op).unwrap(), rd, rs, rt, imm, target))
}

/// Zeroes the fields an opcode does not use; jumps get an absolute target
/// that `program` rebases.
fn canonical(op: Opcode, rd: u8, rs: u8, rt: u8, imm: i32, target: u32) -> Instruction {
    use Opcode::*;
    let (rd, rs, rt, imm) = match op {
        Halt | Ret => (0, 0, 0, 0),
        Const => (rd, 0, 0, imm),
        Mov => (rd, rs, 0, 0),
        Addi => (rd, rs, 0, imm),
        Beqz | Bnez => (0, rs, 0, target as i32),
        Jmp | Call => (0, 0, 0, target as i32),
        Load => (rd, rs, 0, imm),
        Store => (0, rs, rt, imm),
        Out => (0, rs, 0, imm & 0xff),
        In => (rd, 0, 0, imm & 0xff),
        _ => (rd, rs, rt, 0),
    };
    Instruction::new(op, rd, rs, rt, imm)
}

fn program(len: usize) -> impl Strategy<Value = Program> {
    proptest::collection::vec(valid_instruction(len as u32), len).prop_map(|mut code| {
        for (pc, ins) in code.iter_mut().enumerate() {
            if ins.opcode.is_relative_jump() {
                ins.imm -= pc as i32;
            }
        }
        Program::new(code)
    })
}

proptest! {
    #[test]
    fn binary_opcodes_match_reference(op in 0usize..12, a: u32, b: u32) {
        let op = BINARY[op];
        let p = Program::new(vec![Instruction::new(op, 0, 1, 2, 0), Instruction::halt()]);
        let r = run(&p, [0, a, b, 0, 0, 0, 0, 0]);
        prop_assert_eq!(r.state.regs[0], reference(op, a, b));
    }

    #[test]
    fn immediate_forms(a: u32, imm: i32) {
        let p = Program::new(vec![
            Instruction::new(Opcode::Addi, 2, 1, 0, imm),
            Instruction::new(Opcode::Const, 3, 0, 0, imm),
            Instruction::new(Opcode::Mov, 4, 1, 0, 0),
            Instruction::halt(),
        ]);
        let r = run(&p, [0, a, 0, 0, 0, 0, 0, 0]);
        prop_assert_eq!(r.state.regs[2], a.wrapping_add(imm as u32));
        prop_assert_eq!(r.state.regs[3], imm as u32);
        prop_assert_eq!(r.state.regs[4], a);
    }

    #[test]
    fn branches_follow_the_register(v: u32, taken_on_zero: bool) {
        let op = if taken_on_zero { Opcode::Beqz } else { Opcode::Bnez };
        let p = Program::new(vec![
            Instruction::new(op, 0, 1, 0, 2),
            Instruction::new(Opcode::Const, 0, 0, 0, 1),
            Instruction::halt(),
        ]);
        let taken = (v == 0) == taken_on_zero;
        prop_assert_eq!(run(&p, [0, v, 0, 0, 0, 0, 0, 0]).state.regs[0], if taken { 0 } else { 1 });
    }

    #[test]
    fn store_then_load_is_little_endian(v: u32, addr in 0u32..0x1000, off in -8i32..8) {
        let base = addr + 16;
        let p = Program::new(vec![
            Instruction::new(Opcode::Store, 0, 1, 2, off),
            Instruction::new(Opcode::Load, 3, 1, 0, off),
            Instruction::new(Opcode::Out, 0, 2, 0, 0),
            Instruction::halt(),
        ]);
        let r = run(&p, [0, base, v, 0, 0, 0, 0, 0]);
        prop_assert_eq!(r.state.regs[3], v);
        let at = base.wrapping_add(off as u32);
        for (i, b) in v.to_le_bytes().into_iter().enumerate() {
            prop_assert_eq!(r.state.read_u8(at + i as u32), b);
        }
        prop_assert_eq!(&r.state.channels_out[&0], &vec![v as u8]);
    }

    #[test]
    fn container_round_trip(p in program(50)) {
        prop_assert!(p.validate().is_ok());
        prop_assert_eq!(decode(&encode(&p)).unwrap(), p);
    }

    #[test]
    fn disassembly_reassembles(p in program(30)) {
        let q = assemble(&disassemble(&p)).unwrap();
        prop_assert!(q.same_code(&p));
    }

    #[test]
    fn runs_are_deterministic(p in program(20), regs: [u32; 8]) {
        let opts = RunOptions { step_limit: 500, ..Default::default() };
        let inputs = BTreeMap::from([(0, vec![1, 2, 3]), (1, vec![4])]);
        let a = run_concrete(&p, &inputs, regs, &BTreeMap::new(), &opts, &mut NoMonitor);
        let b = run_concrete(&p, &inputs, regs, &BTreeMap::new(), &opts, &mut NoMonitor);
        prop_assert_eq!(a.state, b.state);
        prop_assert_eq!(a.terminal, b.terminal);
    }
}
