//! The `CZB1` binary container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "CZB1"
//! 4       1     version (1)
//! 5       4     entry        u32 LE
//! 9       4     code_count   u32 LE
//! 13      4     data_base    u32 LE
//! 17      4     data_len     u32 LE
//! 21      8*n   instructions: opcode u8, rd u8, rs u8, rt u8, imm i32 LE
//! ..      m     data bytes
//! ```
//!
//! Label names are not stored.

use super::{Instruction, IsaError, Opcode, Program};

pub const MAGIC: &[u8; 4] = b"CZB1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 21;
pub const INSTRUCTION_LEN: usize = 8;

pub fn encode(p: &Program) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + p.code.len() * INSTRUCTION_LEN + p.data.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&p.entry.to_le_bytes());
    out.extend_from_slice(&(p.code.len() as u32).to_le_bytes());
    out.extend_from_slice(&p.data_base.to_le_bytes());
    out.extend_from_slice(&(p.data.len() as u32).to_le_bytes());
    for ins in &p.code {
        out.extend_from_slice(&[ins.opcode as u8, ins.rd, ins.rs, ins.rt]);
        out.extend_from_slice(&ins.imm.to_le_bytes());
    }
    out.extend_from_slice(&p.data);
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

pub fn decode(bytes: &[u8]) -> Result<Program, IsaError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(IsaError::BadMagic(bytes.iter().take(4).copied().collect()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(IsaError::Truncated {
            need: HEADER_LEN,
            have: bytes.len(),
        });
    }
    if bytes[4] != VERSION {
        return Err(IsaError::BadVersion(bytes[4]));
    }
    let entry = u32_at(bytes, 5);
    let code_count = u32_at(bytes, 9) as usize;
    let data_base = u32_at(bytes, 13);
    let data_len = u32_at(bytes, 17) as usize;
    if code_count == 0 {
        return Err(IsaError::EmptyCode);
    }
    let need = code_count
        .checked_mul(INSTRUCTION_LEN)
        .and_then(|c| c.checked_add(HEADER_LEN))
        .and_then(|c| c.checked_add(data_len))
        .unwrap_or(usize::MAX);
    if bytes.len() < need {
        return Err(IsaError::Truncated {
            need,
            have: bytes.len(),
        });
    }

    let mut code = Vec::with_capacity(code_count);
    for i in 0..code_count {
        let at = HEADER_LEN + i * INSTRUCTION_LEN;
        let raw = &bytes[at..at + INSTRUCTION_LEN];
        let opcode = Opcode::from_byte(raw[0]).ok_or(IsaError::UnknownOpcode {
            opcode: raw[0],
            index: i as u32,
        })?;
        code.push(Instruction {
            opcode,
            rd: raw[1],
            rs: raw[2],
            rt: raw[3],
            imm: i32::from_le_bytes(raw[4..8].try_into().unwrap()),
        });
    }
    let data_at = HEADER_LEN + code_count * INSTRUCTION_LEN;
    let program = Program {
        entry,
        code,
        data_base,
        data: bytes[data_at..data_at + data_len].to_vec(),
        labels: Default::default(),
    };
    program.validate()?;
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::assemble;

    #[test]
    fn halt_layout() {
        let bytes = encode(&assemble("halt").unwrap());
        assert_eq!(bytes.len(), HEADER_LEN + INSTRUCTION_LEN);
        assert_eq!(&bytes[..5], b"CZB1\x01");
        assert_eq!(&bytes[9..13], &1u32.to_le_bytes());
        assert_eq!(bytes[HEADER_LEN], 0x00);
    }

    #[test]
    fn empty_code_is_rejected() {
        let mut bytes = Vec::from(&MAGIC[..]);
        bytes.push(VERSION);
        bytes.extend_from_slice(&[0; 16]);
        assert_eq!(decode(&bytes).unwrap_err().to_string(), "code_count is zero");
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(decode(b"ELF\x7f"), Err(IsaError::BadMagic(_))));
        let mut bytes = encode(&assemble("halt\nhalt").unwrap());
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(decode(&bytes), Err(IsaError::Truncated { .. })));
        let mut bytes = encode(&assemble("halt").unwrap());
        bytes[HEADER_LEN] = 0x40;
        assert!(matches!(
            decode(&bytes),
            Err(IsaError::UnknownOpcode { opcode: 0x40, index: 0 })
        ));
    }
}
