//! Straight-line reference machine over a flat byte array.
//!
//! Written from the instruction semantics directly, without touching the
//! library's decoder, interpreter or memory model.

use std::collections::BTreeSet;

use rand::Rng;

pub const DATA_BASE: u32 = 0x1000_0000;
pub const STACK_TOP: u32 = 0x7fff_fff0;
const GP: usize = 3;

#[derive(Debug, Clone)]
pub enum Op {
    Reg3(&'static str, usize, usize, usize),
    RegImm(&'static str, usize, usize, i32),
    Li(usize, u32),
    Lui(usize, u32),
    Auipc(usize, u32),
    Load(&'static str, usize, u32),
    Store(&'static str, usize, u32),
}

impl Op {
    pub fn to_asm(&self) -> String {
        match self {
            Op::Reg3(m, d, a, b) => format!("{m} x{d}, x{a}, x{b}"),
            Op::RegImm(m, d, a, i) => format!("{m} x{d}, x{a}, {i}"),
            Op::Li(d, v) => format!("li x{d}, 0x{v:x}"),
            Op::Lui(d, v) => format!("lui x{d}, {v}"),
            Op::Auipc(d, v) => format!("auipc x{d}, 0x{v:x}"),
            Op::Load(m, d, off) => format!("{m} x{d}, {off}(gp)"),
            Op::Store(m, s, off) => format!("{m} x{s}, {off}(gp)"),
        }
    }

    /// Machine instructions this op assembles to.
    pub fn slots(&self) -> usize {
        match self {
            Op::Li(_, v) if *v <= 2047 => 1,
            Op::Li(..) => 2,
            _ => 1,
        }
    }
}

const REG3: &[&str] =
    &["add", "sub", "sll", "slt", "sltu", "xor", "srl", "sra", "or", "and", "mul", "mulh", "mulhsu", "mulhu"];
const REGIMM: &[&str] = &["addi", "slti", "sltiu", "xori", "ori", "andi", "slli", "srli", "srai"];
const LOADS: &[(&str, u32)] = &[("lb", 1), ("lh", 2), ("lw", 4), ("lbu", 1), ("lhu", 2)];
const STORES: &[(&str, u32)] = &[("sb", 1), ("sh", 2), ("sw", 4)];

fn dest<R: Rng>(rng: &mut R) -> usize {
    // never clobber gp, the scratch base
    loop {
        let r = rng.random_range(0..32);
        if r != GP {
            return r;
        }
    }
}

fn interesting<R: Rng>(rng: &mut R) -> u32 {
    match rng.random_range(0..4) {
        0 => [0, 1, u32::MAX, 0x8000_0000, 0x7fff_ffff, 0x800, 0xfff][rng.random_range(0..7)],
        1 => rng.random_range(0..4096),
        _ => rng.random(),
    }
}

fn offset<R: Rng>(rng: &mut R, width: u32, limit: u32) -> u32 {
    rng.random_range(0..limit / width) * width
}

/// A random straight-line program of at most `max_slots` machine instructions.
pub fn random_program<R: Rng>(rng: &mut R, max_slots: usize) -> Vec<Op> {
    let mut ops = Vec::new();
    let mut slots = 0;
    let target = rng.random_range(1..=max_slots);
    while slots < target {
        let op = match rng.random_range(0..10) {
            0 | 1 => Op::Li(dest(rng), interesting(rng)),
            2 | 3 => Op::Reg3(
                REG3[rng.random_range(0..REG3.len())],
                dest(rng),
                rng.random_range(0..32),
                rng.random_range(0..32),
            ),
            4 | 5 => {
                let m = REGIMM[rng.random_range(0..REGIMM.len())];
                let imm = if m.starts_with("sl") || m.starts_with("sr") {
                    rng.random_range(0..32)
                } else {
                    rng.random_range(-2048..=2047)
                };
                Op::RegImm(m, dest(rng), rng.random_range(0..32), imm)
            }
            6 => {
                if rng.random_bool(0.5) {
                    Op::Lui(dest(rng), rng.random_range(0..=0xfffff))
                } else {
                    Op::Auipc(dest(rng), rng.random_range(0..=0xfffff))
                }
            }
            7 => {
                let (m, w) = LOADS[rng.random_range(0..LOADS.len())];
                Op::Load(m, dest(rng), offset(rng, w, super::SCRATCH_BYTES))
            }
            _ => {
                let (m, w) = STORES[rng.random_range(0..STORES.len())];
                Op::Store(m, rng.random_range(0..32), offset(rng, w, super::SCRATCH_BYTES))
            }
        };
        if slots + op.slots() > target {
            break;
        }
        slots += op.slots();
        ops.push(op);
    }
    ops
}

pub fn render(ops: &[Op]) -> String {
    ops.iter().map(|o| o.to_asm() + "\n").collect()
}

pub struct RefMachine {
    pub regs: [u32; 32],
    pub scratch: Vec<u8>,
    pub touched: BTreeSet<u32>,
}

impl RefMachine {
    /// State after the kernel prefix: sp and gp set, everything else zero.
    pub fn new() -> Self {
        let mut regs = [0u32; 32];
        regs[2] = STACK_TOP;
        regs[GP] = DATA_BASE;
        Self { regs, scratch: vec![0; super::SCRATCH_BYTES as usize], touched: BTreeSet::new() }
    }

    fn set(&mut self, r: usize, v: u32) {
        if r != 0 {
            self.regs[r] = v;
        }
    }

    fn load(&self, off: u32, width: u32, signed: bool) -> u32 {
        let mut v: u64 = 0;
        for i in (0..width).rev() {
            v = (v << 8) | self.scratch[(off + i) as usize] as u64;
        }
        let bits = 8 * width as u64;
        if signed && v >> (bits - 1) & 1 == 1 {
            (v | (u64::MAX << bits)) as u32
        } else {
            v as u32
        }
    }

    fn store(&mut self, off: u32, width: u32, value: u32) {
        for i in 0..width {
            self.scratch[(off + i) as usize] = (value >> (8 * i)) as u8;
            self.touched.insert(DATA_BASE + ((off + i) / 4) * 4);
        }
    }

    /// Runs ops whose first instruction sits at `pc`.
    pub fn execute(&mut self, ops: &[Op], mut pc: u32) {
        for op in ops {
            match *op {
                Op::Reg3(m, d, a, b) => {
                    let (x, y) = (self.regs[a], self.regs[b]);
                    let (sx, sy) = (x as i32 as i128, y as i32 as i128);
                    let (ux, uy) = (x as u128, y as u128);
                    let v = match m {
                        "add" => (ux + uy) as u32,
                        "sub" => (ux.wrapping_sub(uy)) as u32,
                        "sll" => ((ux << (y % 32)) & 0xffff_ffff) as u32,
                        "slt" => (sx < sy) as u32,
                        "sltu" => (ux < uy) as u32,
                        "xor" => x ^ y,
                        "srl" => (ux >> (y % 32)) as u32,
                        "sra" => (sx >> (y % 32)) as u32,
                        "or" => x | y,
                        "and" => x & y,
                        "mul" => (sx * sy) as u32,
                        "mulh" => ((sx * sy) >> 32) as u32,
                        "mulhsu" => ((sx * uy as i128) >> 32) as u32,
                        "mulhu" => ((ux * uy) >> 32) as u32,
                        _ => unreachable!(),
                    };
                    self.set(d, v);
                }
                Op::RegImm(m, d, a, imm) => {
                    let x = self.regs[a];
                    let i = imm as u32;
                    let v = match m {
                        "addi" => x.wrapping_add(i),
                        "slti" => ((x as i32) < imm) as u32,
                        "sltiu" => (x < i) as u32,
                        "xori" => x ^ i,
                        "ori" => x | i,
                        "andi" => x & i,
                        "slli" => x.checked_shl(i).unwrap_or(0),
                        "srli" => x.checked_shr(i).unwrap_or(0),
                        "srai" => ((x as i32 as i64) >> i) as u32,
                        _ => unreachable!(),
                    };
                    self.set(d, v);
                }
                Op::Li(d, v) => self.set(d, v),
                Op::Lui(d, v) => self.set(d, v << 12),
                Op::Auipc(d, v) => self.set(d, pc.wrapping_add(v << 12)),
                Op::Load(m, d, off) => {
                    let (width, signed) = match m {
                        "lb" => (1, true),
                        "lh" => (2, true),
                        "lw" => (4, false),
                        "lbu" => (1, false),
                        _ => (2, false),
                    };
                    let v = self.load(off, width, signed);
                    self.set(d, v);
                }
                Op::Store(m, s, off) => {
                    let width = match m {
                        "sb" => 1,
                        "sh" => 2,
                        _ => 4,
                    };
                    self.store(off, width, self.regs[s]);
                }
            }
            pc += 4 * op.slots() as u32;
        }
    }

    /// Touched words and their final values.
    pub fn touched_words(&self) -> Vec<(u32, u32)> {
        self.touched.iter().map(|&a| (a, self.load(a - DATA_BASE, 4, false))).collect()
    }
}
