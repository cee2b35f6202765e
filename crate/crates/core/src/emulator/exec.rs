use crate::assembler::AssembledProgram;
use crate::isa::{decode, DecodedInstruction, Mnemonic, Reg};

use super::memory::Width;
use super::{Fault, HaltStatus, MachineState, StepResult};

fn mulh(a: u32, b: u32) -> u32 {
    ((a as i32 as i64 * b as i32 as i64) >> 32) as u32
}

fn mulhsu(a: u32, b: u32) -> u32 {
    ((a as i32 as i64 * b as i64) >> 32) as u32
}

fn mulhu(a: u32, b: u32) -> u32 {
    ((a as u64 * b as u64) >> 32) as u32
}

fn alu(m: Mnemonic, a: u32, b: u32) -> u32 {
    use Mnemonic::*;
    match m {
        Add | Addi => a.wrapping_add(b),
        Sub => a.wrapping_sub(b),
        Sll | Slli => a << (b & 31),
        Srl | Srli => a >> (b & 31),
        Sra | Srai => ((a as i32) >> (b & 31)) as u32,
        Slt | Slti => ((a as i32) < (b as i32)) as u32,
        Sltu | Sltiu => (a < b) as u32,
        Xor | Xori => a ^ b,
        Or | Ori => a | b,
        And | Andi => a & b,
        Mul => a.wrapping_mul(b),
        Mulh => mulh(a, b),
        Mulhsu => mulhsu(a, b),
        Mulhu => mulhu(a, b),
        _ => unreachable!("{m} is not an ALU operation"),
    }
}

fn branch_taken(m: Mnemonic, a: u32, b: u32) -> bool {
    use Mnemonic::*;
    match m {
        Beq => a == b,
        Bne => a != b,
        Blt => (a as i32) < (b as i32),
        Bge => (a as i32) >= (b as i32),
        Bltu => a < b,
        Bgeu => a >= b,
        _ => unreachable!("{m} is not a branch"),
    }
}

fn load_width(m: Mnemonic) -> (Width, bool) {
    use Mnemonic::*;
    match m {
        Lb => (Width::Byte, true),
        Lh => (Width::Half, true),
        Lw => (Width::Word, false),
        Lbu => (Width::Byte, false),
        Lhu => (Width::Half, false),
        Sb => (Width::Byte, false),
        Sh => (Width::Half, false),
        Sw => (Width::Word, false),
        _ => unreachable!("{m} is not a memory access"),
    }
}

fn check_target(program: &AssembledProgram, target: u32) -> Result<u32, Fault> {
    if !target.is_multiple_of(4) {
        return Err(Fault::MisalignedJump { target });
    }
    if !program.is_instruction_address(target) {
        return Err(Fault::JumpOutsideText { target });
    }
    Ok(target)
}

struct Step<'a> {
    state: &'a mut MachineState,
    result: StepResult,
}

impl Step<'_> {
    fn write_reg(&mut self, r: Reg, value: u32) {
        if r != Reg::ZERO && self.state.reg(r) != value {
            self.state.set_reg(r, value);
            self.result.changed_registers.push(r);
        }
    }
}

fn execute(step: &mut Step<'_>, program: &AssembledProgram, i: &DecodedInstruction) -> Result<Option<u32>, Fault> {
    use Mnemonic::*;
    let pc = step.state.pc;
    let rs1 = step.state.reg(i.rs1_or_zero());
    let rs2 = step.state.reg(i.rs2_or_zero());
    let imm = i.imm_or_zero() as u32;
    let rd = i.rd_or_zero();
    let m = i.mnemonic;

    match m {
        Lui => step.write_reg(rd, imm),
        Auipc => step.write_reg(rd, pc.wrapping_add(imm)),
        Jal => {
            let target = check_target(program, pc.wrapping_add(imm))?;
            step.write_reg(rd, pc.wrapping_add(4));
            return Ok(Some(target));
        }
        Jalr => {
            let target = check_target(program, rs1.wrapping_add(imm) & !1)?;
            step.write_reg(rd, pc.wrapping_add(4));
            return Ok(Some(target));
        }
        Beq | Bne | Blt | Bge | Bltu | Bgeu => {
            if branch_taken(m, rs1, rs2) {
                return Ok(Some(check_target(program, pc.wrapping_add(imm))?));
            }
        }
        Lb | Lh | Lw | Lbu | Lhu => {
            let (width, signed) = load_width(m);
            let value = step.state.memory.read(rs1.wrapping_add(imm), width, signed)?;
            step.write_reg(rd, value);
        }
        Sb | Sh | Sw => {
            let (width, _) = load_width(m);
            if let Some(change) = step.state.memory.write(rs1.wrapping_add(imm), width, rs2)? {
                step.result.changed_memory.push(change);
            }
        }
        Addi | Slti | Sltiu | Xori | Ori | Andi | Slli | Srli | Srai => step.write_reg(rd, alu(m, rs1, imm)),
        Add | Sub | Sll | Slt | Sltu | Xor | Srl | Sra | Or | And | Mul | Mulh | Mulhsu | Mulhu => {
            step.write_reg(rd, alu(m, rs1, rs2))
        }
        Fence => {}
        Ecall | Ebreak => {}
    }
    Ok(None)
}

/// One fetch-decode-execute cycle. The caller has checked the machine may run.
pub(super) fn step(state: &mut MachineState, program: &AssembledProgram) -> StepResult {
    let pc = state.pc;
    let mut step = Step { state, result: StepResult { pc_before: pc, pc_after: pc, ..Default::default() } };

    let fetched = if program.is_instruction_address(pc) {
        let word = step.state.memory.read_word(pc);
        decode(word).map_err(|_| Fault::IllegalInstruction { pc, word })
    } else {
        Err(Fault::FetchOutsideText { pc })
    };

    let outcome = fetched.and_then(|instr| Ok((instr, execute(&mut step, program, &instr)?)));
    let Step { state, mut result } = step;
    match outcome {
        Err(fault) => {
            state.halt = HaltStatus::Fault;
            state.fault = Some(fault);
        }
        Ok((instr, redirect)) => {
            state.step_count += 1;
            match instr.mnemonic {
                Mnemonic::Ecall => state.halt = HaltStatus::Ecall,
                Mnemonic::Ebreak => state.halt = HaltStatus::Ebreak,
                _ => {
                    state.pc = redirect.unwrap_or(pc.wrapping_add(4));
                    if state.pc == program.exit_address {
                        state.halt = HaltStatus::Exit;
                    }
                }
            }
        }
    }
    result.pc_after = state.pc;
    result.changed_registers.sort();
    result.halt = Some(state.halt);
    result
}
