use std::collections::BTreeMap;

use super::{Instruction, IsaError, Opcode, Program};

/// Operand shapes, one per mnemonic family.
#[derive(Clone, Copy)]
enum Form {
    None,
    RdImm,
    RdRs,
    RdRsRt,
    RdRsImm,
    RsTarget,
    Target,
    Load,
    Store,
    Out,
    In,
}

fn form(op: Opcode) -> Form {
    use Opcode::*;
    match op {
        Halt | Ret => Form::None,
        Const => Form::RdImm,
        Mov => Form::RdRs,
        Add | Sub | Mul | And | Or | Xor | Shl | Shrl | Shra | CmpEq | CmpLts | CmpLtu => {
            Form::RdRsRt
        }
        Addi => Form::RdRsImm,
        Beqz | Bnez => Form::RsTarget,
        Jmp | Call => Form::Target,
        Load => Form::Load,
        Store => Form::Store,
        Out => Form::Out,
        In => Form::In,
    }
}

enum Target {
    Relative(i64),
    Label(String),
}

struct Pending {
    line: usize,
    ins: Instruction,
    target: Option<Target>,
}

/// Assembles source text into a [`Program`].
///
/// Besides instructions and `label:` definitions, three directives are
/// accepted: `.entry <label>`, `.data <addr>` (sets the data segment base) and
/// `.byte <v>, ...` (appends bytes to the data segment). Character literals
/// such as `';'` are accepted wherever an immediate is.
pub fn assemble(source: &str) -> Result<Program, IsaError> {
    let mut labels: BTreeMap<String, u32> = BTreeMap::new();
    let mut pending: Vec<Pending> = Vec::new();
    let mut entry_label: Option<(usize, String)> = None;
    let mut data_base = 0u32;
    let mut data = Vec::new();

    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let mut text = strip_comment(raw).trim();

        // Any number of leading `label:` definitions.
        while let Some(colon) = label_split(text) {
            let name = text[..colon].trim();
            if !is_ident(name) {
                return Err(syntax(line_no, format!("bad label name `{name}`")));
            }
            if labels.insert(name.to_string(), pending.len() as u32).is_some() {
                return Err(syntax(line_no, format!("duplicate label `{name}`")));
            }
            text = text[colon + 1..].trim();
        }
        if text.is_empty() {
            continue;
        }

        let (head, rest) = match text.find(char::is_whitespace) {
            Some(i) => (&text[..i], text[i..].trim()),
            None => (text, ""),
        };

        if let Some(directive) = head.strip_prefix('.') {
            match directive {
                "entry" => {
                    if !is_ident(rest) {
                        return Err(syntax(line_no, "`.entry` expects a label".into()));
                    }
                    entry_label = Some((line_no, rest.to_string()));
                }
                "data" => {
                    let v = parse_imm(rest, line_no)?;
                    data_base = fit_u32(v, line_no)?;
                }
                "byte" => {
                    for part in split_operands(rest) {
                        let v = parse_imm(part, line_no)?;
                        if !(-128..=255).contains(&v) {
                            return Err(IsaError::ImmediateRange { line: line_no, value: v });
                        }
                        data.push(v as u8);
                    }
                }
                other => return Err(syntax(line_no, format!("unknown directive `.{other}`"))),
            }
            continue;
        }

        let op = Opcode::from_mnemonic(head)
            .ok_or_else(|| syntax(line_no, format!("unknown mnemonic `{head}`")))?;
        let ops = split_operands(rest);
        let p = parse_instruction(op, &ops, line_no)?;
        pending.push(p);
    }

    let mut code = Vec::with_capacity(pending.len());
    for (pc, p) in pending.into_iter().enumerate() {
        let mut ins = p.ins;
        match p.target {
            None => {}
            Some(Target::Relative(v)) => ins.imm = fit_i32(v, p.line)?,
            Some(Target::Label(name)) => {
                let at = *labels.get(&name).ok_or(IsaError::UndefinedLabel {
                    line: p.line,
                    label: name.clone(),
                })?;
                ins.imm = fit_i32(at as i64 - pc as i64, p.line)?;
            }
        }
        code.push(ins);
    }

    let entry = match entry_label {
        None => 0,
        Some((line, name)) => *labels
            .get(&name)
            .ok_or(IsaError::UndefinedLabel { line, label: name })?,
    };

    let program = Program {
        entry,
        code,
        data_base,
        data,
        labels,
    };
    program.validate()?;
    Ok(program)
}

fn syntax(line: usize, msg: String) -> IsaError {
    IsaError::Syntax { line, msg }
}

/// Drops a trailing `;` comment, ignoring semicolons inside character literals.
fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\'' if i + 2 < bytes.len() && bytes[i + 2] == b'\'' => i += 3,
            b';' => return &line[..i],
            _ => i += 1,
        }
    }
    line
}

/// Position of a label-terminating colon at the start of the line, if any.
fn label_split(text: &str) -> Option<usize> {
    let colon = text.find(':')?;
    let name = text[..colon].trim();
    (!name.is_empty() && !name.contains(char::is_whitespace) && !name.starts_with('\''))
        .then_some(colon)
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn split_operands(rest: &str) -> Vec<&str> {
    if rest.trim().is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    let bytes = rest.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\'' if i + 2 < bytes.len() && bytes[i + 2] == b'\'' => {
                i += 3;
                continue;
            }
            b'[' => depth += 1,
            b']' => depth -= 1,
            b',' if depth == 0 => {
                out.push(rest[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
        i += 1;
    }
    out.push(rest[start..].trim());
    out
}

fn parse_reg(s: &str, line: usize) -> Result<u8, IsaError> {
    let idx = s
        .strip_prefix('r')
        .and_then(|n| n.parse::<u8>().ok())
        .filter(|&n| n < 8 && s.len() == 2)
        .ok_or_else(|| syntax(line, format!("expected register r0-r7, found `{s}`")))?;
    Ok(idx)
}

pub(crate) fn parse_imm(s: &str, line: usize) -> Result<i64, IsaError> {
    let s = s.trim();
    let bad = || syntax(line, format!("bad immediate `{s}`"));
    if s.len() == 3 && s.starts_with('\'') && s.ends_with('\'') {
        let c = s.as_bytes()[1];
        return Ok(c as i64);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let v = if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        i64::from_str_radix(hex, 16).map_err(|_| bad())?
    } else if !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit()) {
        body.parse::<i64>().map_err(|_| IsaError::ImmediateRange { line, value: i64::MAX })?
    } else {
        return Err(bad());
    };
    Ok(if neg { -v } else { v })
}

fn fit_i32(v: i64, line: usize) -> Result<i32, IsaError> {
    i32::try_from(v).map_err(|_| IsaError::ImmediateRange { line, value: v })
}

fn fit_u32(v: i64, line: usize) -> Result<u32, IsaError> {
    u32::try_from(v).map_err(|_| IsaError::ImmediateRange { line, value: v })
}

/// 32-bit constant: accepts both signed and unsigned spellings.
fn fit_word(v: i64, line: usize) -> Result<i32, IsaError> {
    if (i32::MIN as i64..=u32::MAX as i64).contains(&v) {
        Ok(v as u32 as i32)
    } else {
        Err(IsaError::ImmediateRange { line, value: v })
    }
}

fn parse_channel(s: &str, line: usize) -> Result<i32, IsaError> {
    let v = parse_imm(s, line)?;
    if (0..=255).contains(&v) {
        Ok(v as i32)
    } else {
        Err(IsaError::ImmediateRange { line, value: v })
    }
}

fn parse_target(s: &str, line: usize) -> Result<Target, IsaError> {
    if is_ident(s) {
        Ok(Target::Label(s.to_string()))
    } else {
        Ok(Target::Relative(parse_imm(s, line)?))
    }
}

/// `[rs]`, `[rs+imm]` or `[rs-imm]`.
fn parse_mem(s: &str, line: usize) -> Result<(u8, i32), IsaError> {
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| syntax(line, format!("expected memory operand `[rs+imm]`, found `{s}`")))?
        .trim();
    if let Some(pos) = inner.find(['+', '-']) {
        let reg = parse_reg(inner[..pos].trim(), line)?;
        let mut off = parse_imm(inner[pos + 1..].trim(), line)?;
        if inner.as_bytes()[pos] == b'-' {
            off = -off;
        }
        Ok((reg, fit_i32(off, line)?))
    } else {
        Ok((parse_reg(inner, line)?, 0))
    }
}

fn parse_instruction(op: Opcode, ops: &[&str], line: usize) -> Result<Pending, IsaError> {
    let expect = |n: usize| -> Result<(), IsaError> {
        if ops.len() == n {
            Ok(())
        } else {
            Err(syntax(
                line,
                format!("`{}` takes {n} operand(s), found {}", op.mnemonic(), ops.len()),
            ))
        }
    };
    let mut ins = Instruction::new(op, 0, 0, 0, 0);
    let mut target = None;
    match form(op) {
        Form::None => expect(0)?,
        Form::RdImm => {
            expect(2)?;
            ins.rd = parse_reg(ops[0], line)?;
            ins.imm = fit_word(parse_imm(ops[1], line)?, line)?;
        }
        Form::RdRs => {
            expect(2)?;
            ins.rd = parse_reg(ops[0], line)?;
            ins.rs = parse_reg(ops[1], line)?;
        }
        Form::RdRsRt => {
            expect(3)?;
            ins.rd = parse_reg(ops[0], line)?;
            ins.rs = parse_reg(ops[1], line)?;
            ins.rt = parse_reg(ops[2], line)?;
        }
        Form::RdRsImm => {
            expect(3)?;
            ins.rd = parse_reg(ops[0], line)?;
            ins.rs = parse_reg(ops[1], line)?;
            ins.imm = fit_word(parse_imm(ops[2], line)?, line)?;
        }
        Form::RsTarget => {
            expect(2)?;
            ins.rs = parse_reg(ops[0], line)?;
            target = Some(parse_target(ops[1], line)?);
        }
        Form::Target => {
            expect(1)?;
            target = Some(parse_target(ops[0], line)?);
        }
        Form::Load => {
            expect(2)?;
            ins.rd = parse_reg(ops[0], line)?;
            let (rs, off) = parse_mem(ops[1], line)?;
            ins.rs = rs;
            ins.imm = off;
        }
        Form::Store => {
            expect(2)?;
            let (rs, off) = parse_mem(ops[0], line)?;
            ins.rs = rs;
            ins.imm = off;
            ins.rt = parse_reg(ops[1], line)?;
        }
        Form::Out => {
            expect(2)?;
            ins.imm = parse_channel(ops[0], line)?;
            ins.rs = parse_reg(ops[1], line)?;
        }
        Form::In => {
            expect(2)?;
            ins.rd = parse_reg(ops[0], line)?;
            ins.imm = parse_channel(ops[1], line)?;
        }
    }
    Ok(Pending { line, ins, target })
}

/// Renders one instruction. When `labels` is given, relative targets that land
/// on a labelled index are printed by name.
pub fn disassemble_one(ins: &Instruction, at: Option<(u32, &BTreeMap<u32, String>)>) -> String {
    let m = ins.opcode.mnemonic();
    let target = || -> String {
        if let Some((pc, names)) = at {
            let abs = pc as i64 + ins.imm as i64;
            if let Some(name) = u32::try_from(abs).ok().and_then(|a| names.get(&a)) {
                return name.clone();
            }
        }
        ins.imm.to_string()
    };
    let mem = |reg: u8| -> String {
        match ins.imm {
            0 => format!("[r{reg}]"),
            i if i < 0 => format!("[r{reg}-{}]", (i as i64).unsigned_abs()),
            i => format!("[r{reg}+{i}]"),
        }
    };
    match form(ins.opcode) {
        Form::None => m.to_string(),
        Form::RdImm => format!("{m} r{}, {}", ins.rd, ins.imm),
        Form::RdRs => format!("{m} r{}, r{}", ins.rd, ins.rs),
        Form::RdRsRt => format!("{m} r{}, r{}, r{}", ins.rd, ins.rs, ins.rt),
        Form::RdRsImm => format!("{m} r{}, r{}, {}", ins.rd, ins.rs, ins.imm),
        Form::RsTarget => format!("{m} r{}, {}", ins.rs, target()),
        Form::Target => format!("{m} {}", target()),
        Form::Load => format!("{m} r{}, {}", ins.rd, mem(ins.rs)),
        Form::Store => format!("{m} {}, r{}", mem(ins.rs), ins.rt),
        Form::Out => format!("{m} {}, r{}", ins.imm, ins.rs),
        Form::In => format!("{m} r{}, {}", ins.rd, ins.imm),
    }
}

/// Renders a whole program as source text that reassembles to the same code.
pub fn disassemble(p: &Program) -> String {
    let mut names: BTreeMap<u32, String> = BTreeMap::new();
    for (name, &at) in &p.labels {
        names.entry(at).or_insert_with(|| name.clone());
    }
    let mut out = String::new();
    if p.entry != 0 {
        let name = names
            .entry(p.entry)
            .or_insert_with(|| format!("L{}", p.entry))
            .clone();
        out.push_str(&format!(".entry {name}\n"));
    }
    if !p.data.is_empty() {
        out.push_str(&format!(".data 0x{:x}\n", p.data_base));
        for chunk in p.data.chunks(16) {
            let bytes: Vec<String> = chunk.iter().map(|b| format!("0x{b:02x}")).collect();
            out.push_str(&format!(".byte {}\n", bytes.join(", ")));
        }
    }
    for (pc, ins) in p.code.iter().enumerate() {
        if let Some(name) = names.get(&(pc as u32)) {
            out.push_str(&format!("{name}:\n"));
        }
        out.push_str("    ");
        out.push_str(&disassemble_one(ins, Some((pc as u32, &names))));
        out.push('\n');
    }
    if let Some(name) = names.get(&p.len()) {
        out.push_str(&format!("{name}:\n"));
    }
    out
}
