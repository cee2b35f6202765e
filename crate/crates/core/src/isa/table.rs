use std::fmt;
use std::str::FromStr;

use super::{Format, IsaError};

/// Opcode, funct3 and funct7/funct12 values for one implemented instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpSpec {
    pub mnemonic: Mnemonic,
    pub format: Format,
    pub opcode: u8,
    pub funct3: Option<u8>,
    /// Bits 31..25. For shift-immediates this discriminates SRLI from SRAI.
    pub funct7: Option<u8>,
    /// Bits 31..20, only used by ECALL/EBREAK where the immediate is fixed.
    pub funct12: Option<u16>,
}

macro_rules! instructions {
    ($( $variant:ident => $name:literal, $fmt:ident, $opcode:literal, $f3:expr, $f7:expr, $f12:expr; )*) => {
        /// Every mnemonic the encoder and interpreter understand.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Mnemonic {
            $( $variant, )*
        }

        impl Mnemonic {
            pub const ALL: &'static [Mnemonic] = &[ $( Mnemonic::$variant, )* ];

            pub fn as_str(self) -> &'static str {
                match self {
                    $( Mnemonic::$variant => $name, )*
                }
            }
        }

        pub(crate) static OP_TABLE: &[OpSpec] = &[
            $( OpSpec {
                mnemonic: Mnemonic::$variant,
                format: Format::$fmt,
                opcode: $opcode,
                funct3: $f3,
                funct7: $f7,
                funct12: $f12,
            }, )*
        ];
    };
}

instructions! {
    Lui    => "lui",    U, 0b0110111, None, None, None;
    Auipc  => "auipc",  U, 0b0010111, None, None, None;
    Jal    => "jal",    J, 0b1101111, None, None, None;
    Jalr   => "jalr",   I, 0b1100111, Some(0b000), None, None;
    Beq    => "beq",    B, 0b1100011, Some(0b000), None, None;
    Bne    => "bne",    B, 0b1100011, Some(0b001), None, None;
    Blt    => "blt",    B, 0b1100011, Some(0b100), None, None;
    Bge    => "bge",    B, 0b1100011, Some(0b101), None, None;
    Bltu   => "bltu",   B, 0b1100011, Some(0b110), None, None;
    Bgeu   => "bgeu",   B, 0b1100011, Some(0b111), None, None;
    Lb     => "lb",     I, 0b0000011, Some(0b000), None, None;
    Lh     => "lh",     I, 0b0000011, Some(0b001), None, None;
    Lw     => "lw",     I, 0b0000011, Some(0b010), None, None;
    Lbu    => "lbu",    I, 0b0000011, Some(0b100), None, None;
    Lhu    => "lhu",    I, 0b0000011, Some(0b101), None, None;
    Sb     => "sb",     S, 0b0100011, Some(0b000), None, None;
    Sh     => "sh",     S, 0b0100011, Some(0b001), None, None;
    Sw     => "sw",     S, 0b0100011, Some(0b010), None, None;
    Addi   => "addi",   I, 0b0010011, Some(0b000), None, None;
    Slti   => "slti",   I, 0b0010011, Some(0b010), None, None;
    Sltiu  => "sltiu",  I, 0b0010011, Some(0b011), None, None;
    Xori   => "xori",   I, 0b0010011, Some(0b100), None, None;
    Ori    => "ori",    I, 0b0010011, Some(0b110), None, None;
    Andi   => "andi",   I, 0b0010011, Some(0b111), None, None;
    Slli   => "slli",   I, 0b0010011, Some(0b001), Some(0b0000000), None;
    Srli   => "srli",   I, 0b0010011, Some(0b101), Some(0b0000000), None;
    Srai   => "srai",   I, 0b0010011, Some(0b101), Some(0b0100000), None;
    Add    => "add",    R, 0b0110011, Some(0b000), Some(0b0000000), None;
    Sub    => "sub",    R, 0b0110011, Some(0b000), Some(0b0100000), None;
    Sll    => "sll",    R, 0b0110011, Some(0b001), Some(0b0000000), None;
    Slt    => "slt",    R, 0b0110011, Some(0b010), Some(0b0000000), None;
    Sltu   => "sltu",   R, 0b0110011, Some(0b011), Some(0b0000000), None;
    Xor    => "xor",    R, 0b0110011, Some(0b100), Some(0b0000000), None;
    Srl    => "srl",    R, 0b0110011, Some(0b101), Some(0b0000000), None;
    Sra    => "sra",    R, 0b0110011, Some(0b101), Some(0b0100000), None;
    Or     => "or",     R, 0b0110011, Some(0b110), Some(0b0000000), None;
    And    => "and",    R, 0b0110011, Some(0b111), Some(0b0000000), None;
    Fence  => "fence",  I, 0b0001111, Some(0b000), None, None;
    Ecall  => "ecall",  I, 0b1110011, Some(0b000), None, Some(0);
    Ebreak => "ebreak", I, 0b1110011, Some(0b000), None, Some(1);
    Mul    => "mul",    R, 0b0110011, Some(0b000), Some(0b0000001), None;
    Mulh   => "mulh",   R, 0b0110011, Some(0b001), Some(0b0000001), None;
    Mulhsu => "mulhsu", R, 0b0110011, Some(0b010), Some(0b0000001), None;
    Mulhu  => "mulhu",  R, 0b0110011, Some(0b011), Some(0b0000001), None;
}

impl Mnemonic {
    pub fn spec(self) -> &'static OpSpec {
        // The table is declared in enum order.
        &OP_TABLE[self as usize]
    }

    pub fn format(self) -> Format {
        self.spec().format
    }

    pub fn is_load(self) -> bool {
        matches!(self, Mnemonic::Lb | Mnemonic::Lh | Mnemonic::Lw | Mnemonic::Lbu | Mnemonic::Lhu)
    }

    pub fn is_shift_imm(self) -> bool {
        matches!(self, Mnemonic::Slli | Mnemonic::Srli | Mnemonic::Srai)
    }

    /// Instructions whose operands are implied (no register or immediate in assembly).
    pub fn is_system(self) -> bool {
        matches!(self, Mnemonic::Ecall | Mnemonic::Ebreak)
    }
}

impl fmt::Display for Mnemonic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mnemonic {
    type Err = IsaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mnemonic::ALL
            .iter()
            .copied()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| IsaError::UnknownMnemonic(s.to_string()))
    }
}

/// Case-insensitive lookup of an implemented instruction.
pub fn lookup_opspec(mnemonic: &str) -> Result<&'static OpSpec, IsaError> {
    mnemonic.parse::<Mnemonic>().map(Mnemonic::spec)
}
