// Decoder/encoder checks against instruction words produced by an external
// RISC-V assembler (frozen below), plus round-trip and field-presence
// properties.

#include <gtest/gtest.h>

#include <cctype>
#include <sstream>
#include <vector>

#include "lcsynth/isa.hpp"

using namespace lcsynth;

namespace {

struct Golden {
  u32 word;
  const char* asm_text;
};

// Assembled with an independent toolchain (clang -target riscv32 -march=rv32im)
// and extracted from the linked image. Branch/jump offsets are relative.
const std::vector<Golden> kGolden = {
    {0x003100B3u, "add x1, x2, x3"},
    {0x01DF0FB3u, "add x31, x30, x29"},
    {0x00588033u, "add x0, x17, x5"},
    {0x403100B3u, "sub x1, x2, x3"},
    {0x41DF0FB3u, "sub x31, x30, x29"},
    {0x40588033u, "sub x0, x17, x5"},
    {0x003110B3u, "sll x1, x2, x3"},
    {0x01DF1FB3u, "sll x31, x30, x29"},
    {0x00589033u, "sll x0, x17, x5"},
    {0x003120B3u, "slt x1, x2, x3"},
    {0x01DF2FB3u, "slt x31, x30, x29"},
    {0x0058A033u, "slt x0, x17, x5"},
    {0x003130B3u, "sltu x1, x2, x3"},
    {0x01DF3FB3u, "sltu x31, x30, x29"},
    {0x0058B033u, "sltu x0, x17, x5"},
    {0x003140B3u, "xor x1, x2, x3"},
    {0x01DF4FB3u, "xor x31, x30, x29"},
    {0x0058C033u, "xor x0, x17, x5"},
    {0x003150B3u, "srl x1, x2, x3"},
    {0x01DF5FB3u, "srl x31, x30, x29"},
    {0x0058D033u, "srl x0, x17, x5"},
    {0x403150B3u, "sra x1, x2, x3"},
    {0x41DF5FB3u, "sra x31, x30, x29"},
    {0x4058D033u, "sra x0, x17, x5"},
    {0x003160B3u, "or x1, x2, x3"},
    {0x01DF6FB3u, "or x31, x30, x29"},
    {0x0058E033u, "or x0, x17, x5"},
    {0x003170B3u, "and x1, x2, x3"},
    {0x01DF7FB3u, "and x31, x30, x29"},
    {0x0058F033u, "and x0, x17, x5"},
    {0x02C40233u, "mul x4, x8, x12"},
    {0x02A50533u, "mul x10, x10, x10"},
    {0x02C41233u, "mulh x4, x8, x12"},
    {0x02A51533u, "mulh x10, x10, x10"},
    {0x02C42233u, "mulhsu x4, x8, x12"},
    {0x02A52533u, "mulhsu x10, x10, x10"},
    {0x02C43233u, "mulhu x4, x8, x12"},
    {0x02A53533u, "mulhu x10, x10, x10"},
    {0x02C44233u, "div x4, x8, x12"},
    {0x02A54533u, "div x10, x10, x10"},
    {0x02C45233u, "divu x4, x8, x12"},
    {0x02A55533u, "divu x10, x10, x10"},
    {0x02C46233u, "rem x4, x8, x12"},
    {0x02A56533u, "rem x10, x10, x10"},
    {0x02C47233u, "remu x4, x8, x12"},
    {0x02A57533u, "remu x10, x10, x10"},
    {0x80038313u, "addi x6, x7, -2048"},
    {0x7FF38313u, "addi x6, x7, 2047"},
    {0x00038313u, "addi x6, x7, 0"},
    {0xFFF3A313u, "slti x6, x7, -1"},
    {0x7FF3B313u, "sltiu x6, x7, 2047"},
    {0xAAB3C313u, "xori x6, x7, -1365"},
    {0x0F03E313u, "ori x6, x7, 240"},
    {0xF003F313u, "andi x6, x7, -256"},
    {0x00029213u, "slli x4, x5, 0"},
    {0x01F29213u, "slli x4, x5, 31"},
    {0x0012D213u, "srli x4, x5, 1"},
    {0x00D2D213u, "srli x4, x5, 13"},
    {0x41F2D213u, "srai x4, x5, 31"},
    {0x40D2D213u, "srai x4, x5, 13"},
    {0xFFF50283u, "lb x5, -1(x10)"},
    {0x80051283u, "lh x5, -2048(x10)"},
    {0x00852283u, "lw x5, 8(x10)"},
    {0x7FF54283u, "lbu x5, 2047(x10)"},
    {0x00655283u, "lhu x5, 6(x10)"},
    {0x00758123u, "sb x7, 2(x11)"},
    {0xFE759E23u, "sh x7, -4(x11)"},
    {0x7E75AE23u, "sw x7, 2044(x11)"},
    {0xFFFFF4B7u, "lui x9, 0xfffff"},
    {0x000000B7u, "lui x1, 0x0"},
    {0x800007B7u, "lui x15, 0x80000"},
    {0x12345197u, "auipc x3, 0x12345"},
    {0x00001017u, "auipc x0, 0x1"},
    {0x010100E7u, "jalr x1, 16(x2)"},
    {0xFFCF8067u, "jalr x0, -4(x31)"},
    {0x000302E7u, "jalr x5, 0(x6)"},
    {0x00208263u, "beq x1, x2, 4"},
    {0xFE419EE3u, "bne x3, x4, -4"},
    {0x0062CA63u, "blt x5, x6, 20"},
    {0xFE83DEE3u, "bge x7, x8, -4"},
    {0x00A4E663u, "bltu x9, x10, 12"},
    {0x00C5F263u, "bgeu x11, x12, 4"},
    {0x7CE68A63u, "beq x13, x14, 2004"},
    {0x008000EFu, "jal x1, 8"},
    {0xFFDFF06Fu, "jal x0, -4"},
    {0x00000FEFu, "jal x31, 0"},
};

// Tiny assembly reader, independent of the decoder under test.
DecodedInst parse_asm(const std::string& text) {
  std::string s = text;
  for (char& c : s)
    if (c == ',' || c == '(' || c == ')') c = ' ';
  std::istringstream in(s);
  std::string mn;
  in >> mn;
  for (char& c : mn) c = std::toupper(static_cast<unsigned char>(c));
  const Mnemonic m = *mnemonic_from_name(mn);

  auto next = [&]() -> std::string {
    std::string t;
    in >> t;
    return t;
  };
  auto reg = [](const std::string& t) -> u8 {
    return static_cast<u8>(std::stoi(t.substr(1)));
  };
  auto num = [](const std::string& t) -> i32 {
    return static_cast<i32>(std::stol(t, nullptr, 0));
  };

  DecodedInst d;
  d.mnemonic = m;
  switch (mnemonic_info(m).format) {
    case InstFormat::R: {
      d.rd = reg(next());
      d.rs1 = reg(next());
      d.rs2 = reg(next());
      break;
    }
    case InstFormat::I: {
      d.rd = reg(next());
      if (is_load(m) || m == Mnemonic::JALR) {
        d.imm = num(next());
        d.rs1 = reg(next());
      } else {
        d.rs1 = reg(next());
        d.imm = num(next());
      }
      break;
    }
    case InstFormat::S: {
      d.rs2 = reg(next());
      d.imm = num(next());
      d.rs1 = reg(next());
      break;
    }
    case InstFormat::B: {
      d.rs1 = reg(next());
      d.rs2 = reg(next());
      d.imm = num(next());
      break;
    }
    case InstFormat::U: {
      d.rd = reg(next());
      d.imm = num(next()) << 12;  // assembler syntax carries the raw field
      break;
    }
    case InstFormat::J: {
      d.rd = reg(next());
      d.imm = num(next());
      break;
    }
  }
  return d;
}

TEST(Decode, MatchesExternalAssembler) {
  for (const auto& g : kGolden) {
    SCOPED_TRACE(g.asm_text);
    const auto decoded = decode(g.word);
    ASSERT_TRUE(decoded.has_value());
    const DecodedInst expected = parse_asm(g.asm_text);
    EXPECT_EQ(decoded->mnemonic, expected.mnemonic);
    EXPECT_EQ(decoded->rd, expected.rd);
    EXPECT_EQ(decoded->rs1, expected.rs1);
    EXPECT_EQ(decoded->rs2, expected.rs2);
    EXPECT_EQ(decoded->imm, expected.imm);
    EXPECT_EQ(decoded->raw, g.word);
  }
}

TEST(Encode, MatchesExternalAssembler) {
  for (const auto& g : kGolden) {
    SCOPED_TRACE(g.asm_text);
    EXPECT_EQ(encode(parse_asm(g.asm_text)), g.word);
  }
}

TEST(Decode, CanonicalNop) {
  const auto d = decode(0x00000013u);
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->mnemonic, Mnemonic::ADDI);
  EXPECT_EQ(*d->rd, 0);
  EXPECT_EQ(*d->rs1, 0);
  EXPECT_EQ(*d->imm, 0);
}

TEST(Decode, RejectsIllegalWords) {
  EXPECT_FALSE(decode(0xFFFFFFFFu).has_value());
  EXPECT_FALSE(decode(0x00000000u).has_value());
  EXPECT_FALSE(decode(0x0000007Fu).has_value());  // unused opcode
  // FENCE, ECALL, CSR are outside the supported subset
  EXPECT_FALSE(decode(0x0000000Fu).has_value());
  EXPECT_FALSE(decode(0x00000073u).has_value());
  // funct7 garbage in an R-type slot
  EXPECT_FALSE(decode(0x063100B3u).has_value());
  // branch funct3 = 2 does not exist
  EXPECT_FALSE(decode(0x0020A063u).has_value());
}

TEST(Decode, HaltWordIsJumpToSelf) {
  const auto d = decode(kHaltWord);
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->mnemonic, Mnemonic::JAL);
  EXPECT_EQ(*d->rd, 0);
  EXPECT_EQ(*d->imm, 0);
}

TEST(Encode, RejectsOddBranchOffset) {
  DecodedInst d;
  d.mnemonic = Mnemonic::BEQ;
  d.rs1 = 1;
  d.rs2 = 2;
  d.imm = 1;
  EXPECT_THROW(encode(d), EncodeError);
}

TEST(Encode, RejectsOutOfRangeFields) {
  DecodedInst d;
  d.mnemonic = Mnemonic::ADDI;
  d.rd = 1;
  d.rs1 = 1;
  d.imm = 2048;
  EXPECT_THROW(encode(d), EncodeError);
  d.imm = -2049;
  EXPECT_THROW(encode(d), EncodeError);
  DecodedInst sh;
  sh.mnemonic = Mnemonic::SLLI;
  sh.rd = 1;
  sh.rs1 = 1;
  sh.imm = 32;
  EXPECT_THROW(encode(sh), EncodeError);
  DecodedInst u;
  u.mnemonic = Mnemonic::LUI;
  u.rd = 1;
  u.imm = 0x123;  // low 12 bits must be clear
  EXPECT_THROW(encode(u), EncodeError);
}

// Round trip over every mnemonic with randomized legal fields.
TEST(EncodeDecode, RoundTripAllMnemonics) {
  Rng rng(0xD15EA5E);
  for (u32 mi = 0; mi < kMnemonicCount; ++mi) {
    const auto m = static_cast<Mnemonic>(mi);
    for (int iter = 0; iter < 200; ++iter) {
      DecodedInst d;
      d.mnemonic = m;
      if (has_rd(m)) d.rd = static_cast<u8>(rng.below(32));
      if (has_rs1(m)) d.rs1 = static_cast<u8>(rng.below(32));
      if (has_rs2(m)) d.rs2 = static_cast<u8>(rng.below(32));
      if (has_imm(m)) {
        switch (mnemonic_info(m).format) {
          case InstFormat::I:
            d.imm = is_shift_imm(m) ? rng.range(0, 31) : rng.range(-2048, 2047);
            break;
          case InstFormat::S:
            d.imm = rng.range(-2048, 2047);
            break;
          case InstFormat::B:
            d.imm = rng.range(-2048, 2047) * 2;
            break;
          case InstFormat::U:
            d.imm = static_cast<i32>(rng.next_u32() & 0xfffff000u);
            break;
          case InstFormat::J:
            d.imm = rng.range(-524288, 524287) * 2;
            break;
          default:
            break;
        }
      }
      d.raw = encode(d);
      const auto back = decode(d.raw);
      ASSERT_TRUE(back.has_value()) << inst_to_string(d);
      EXPECT_EQ(*back, d) << inst_to_string(d);
    }
  }
}

TEST(Mnemonics, CatalogShape) {
  EXPECT_EQ(kMnemonicCount, 45u);  // 37 from the base set + 8 multiply/divide
  for (u32 i = 0; i < kMnemonicCount; ++i) {
    const auto m = static_cast<Mnemonic>(i);
    EXPECT_EQ(mnemonic_from_name(mnemonic_name(m)), m);
  }
  EXPECT_FALSE(mnemonic_from_name("FENCE").has_value());
  EXPECT_FALSE(mnemonic_from_name("ECALL").has_value());
}

}  // namespace
