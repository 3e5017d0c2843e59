#pragma once

// RV32IM instruction set: mnemonic catalog, decoder and encoder.
// Covers the 37 computational/control/memory instructions of RV32I plus the
// 8 M-extension instructions. FENCE/ECALL/EBREAK/CSR are out of scope.

#include <array>
#include <cstdio>
#include <optional>
#include <string>

#include "lcsynth/common.hpp"

namespace lcsynth {

enum class Mnemonic : u8 {
  LUI, AUIPC, JAL, JALR,
  BEQ, BNE, BLT, BGE, BLTU, BGEU,
  LB, LH, LW, LBU, LHU,
  SB, SH, SW,
  ADDI, SLTI, SLTIU, XORI, ORI, ANDI, SLLI, SRLI, SRAI,
  ADD, SUB, SLL, SLT, SLTU, XOR, SRL, SRA, OR, AND,
  MUL, MULH, MULHSU, MULHU, DIV, DIVU, REM, REMU,
};

inline constexpr u32 kMnemonicCount = 45;

enum class InstFormat : u8 { R, I, S, B, U, J };

struct MnemonicInfo {
  const char* name;
  InstFormat format;
  u8 opcode;
  u8 funct3;  // 0xff = unused
  u8 funct7;  // 0xff = unused
};

inline const MnemonicInfo& mnemonic_info(Mnemonic m) {
  static const std::array<MnemonicInfo, kMnemonicCount> table = {{
      {"LUI", InstFormat::U, 0x37, 0xff, 0xff},
      {"AUIPC", InstFormat::U, 0x17, 0xff, 0xff},
      {"JAL", InstFormat::J, 0x6f, 0xff, 0xff},
      {"JALR", InstFormat::I, 0x67, 0x0, 0xff},
      {"BEQ", InstFormat::B, 0x63, 0x0, 0xff},
      {"BNE", InstFormat::B, 0x63, 0x1, 0xff},
      {"BLT", InstFormat::B, 0x63, 0x4, 0xff},
      {"BGE", InstFormat::B, 0x63, 0x5, 0xff},
      {"BLTU", InstFormat::B, 0x63, 0x6, 0xff},
      {"BGEU", InstFormat::B, 0x63, 0x7, 0xff},
      {"LB", InstFormat::I, 0x03, 0x0, 0xff},
      {"LH", InstFormat::I, 0x03, 0x1, 0xff},
      {"LW", InstFormat::I, 0x03, 0x2, 0xff},
      {"LBU", InstFormat::I, 0x03, 0x4, 0xff},
      {"LHU", InstFormat::I, 0x03, 0x5, 0xff},
      {"SB", InstFormat::S, 0x23, 0x0, 0xff},
      {"SH", InstFormat::S, 0x23, 0x1, 0xff},
      {"SW", InstFormat::S, 0x23, 0x2, 0xff},
      {"ADDI", InstFormat::I, 0x13, 0x0, 0xff},
      {"SLTI", InstFormat::I, 0x13, 0x2, 0xff},
      {"SLTIU", InstFormat::I, 0x13, 0x3, 0xff},
      {"XORI", InstFormat::I, 0x13, 0x4, 0xff},
      {"ORI", InstFormat::I, 0x13, 0x6, 0xff},
      {"ANDI", InstFormat::I, 0x13, 0x7, 0xff},
      {"SLLI", InstFormat::I, 0x13, 0x1, 0x00},
      {"SRLI", InstFormat::I, 0x13, 0x5, 0x00},
      {"SRAI", InstFormat::I, 0x13, 0x5, 0x20},
      {"ADD", InstFormat::R, 0x33, 0x0, 0x00},
      {"SUB", InstFormat::R, 0x33, 0x0, 0x20},
      {"SLL", InstFormat::R, 0x33, 0x1, 0x00},
      {"SLT", InstFormat::R, 0x33, 0x2, 0x00},
      {"SLTU", InstFormat::R, 0x33, 0x3, 0x00},
      {"XOR", InstFormat::R, 0x33, 0x4, 0x00},
      {"SRL", InstFormat::R, 0x33, 0x5, 0x00},
      {"SRA", InstFormat::R, 0x33, 0x5, 0x20},
      {"OR", InstFormat::R, 0x33, 0x6, 0x00},
      {"AND", InstFormat::R, 0x33, 0x7, 0x00},
      {"MUL", InstFormat::R, 0x33, 0x0, 0x01},
      {"MULH", InstFormat::R, 0x33, 0x1, 0x01},
      {"MULHSU", InstFormat::R, 0x33, 0x2, 0x01},
      {"MULHU", InstFormat::R, 0x33, 0x3, 0x01},
      {"DIV", InstFormat::R, 0x33, 0x4, 0x01},
      {"DIVU", InstFormat::R, 0x33, 0x5, 0x01},
      {"REM", InstFormat::R, 0x33, 0x6, 0x01},
      {"REMU", InstFormat::R, 0x33, 0x7, 0x01},
  }};
  return table[static_cast<size_t>(m)];
}

inline const char* mnemonic_name(Mnemonic m) { return mnemonic_info(m).name; }

inline std::optional<Mnemonic> mnemonic_from_name(const std::string& name) {
  for (u32 i = 0; i < kMnemonicCount; ++i) {
    auto m = static_cast<Mnemonic>(i);
    if (name == mnemonic_info(m).name) return m;
  }
  return std::nullopt;
}

// ---- structural predicates ------------------------------------------------

inline bool has_rd(Mnemonic m) {
  auto f = mnemonic_info(m).format;
  return f == InstFormat::R || f == InstFormat::I || f == InstFormat::U ||
         f == InstFormat::J;
}
inline bool has_rs1(Mnemonic m) {
  auto f = mnemonic_info(m).format;
  return f == InstFormat::R || f == InstFormat::I || f == InstFormat::S ||
         f == InstFormat::B;
}
inline bool has_rs2(Mnemonic m) {
  auto f = mnemonic_info(m).format;
  return f == InstFormat::R || f == InstFormat::S || f == InstFormat::B;
}
inline bool has_imm(Mnemonic m) {
  return mnemonic_info(m).format != InstFormat::R;
}

inline bool is_load(Mnemonic m) {
  return m == Mnemonic::LB || m == Mnemonic::LH || m == Mnemonic::LW ||
         m == Mnemonic::LBU || m == Mnemonic::LHU;
}
inline bool is_store(Mnemonic m) {
  return m == Mnemonic::SB || m == Mnemonic::SH || m == Mnemonic::SW;
}
inline bool is_branch(Mnemonic m) {
  return mnemonic_info(m).format == InstFormat::B;
}
inline bool is_jump(Mnemonic m) {
  return m == Mnemonic::JAL || m == Mnemonic::JALR;
}
inline bool is_mul(Mnemonic m) {
  return m == Mnemonic::MUL || m == Mnemonic::MULH || m == Mnemonic::MULHSU ||
         m == Mnemonic::MULHU;
}
inline bool is_div(Mnemonic m) {
  return m == Mnemonic::DIV || m == Mnemonic::DIVU || m == Mnemonic::REM ||
         m == Mnemonic::REMU;
}
inline bool is_shift_imm(Mnemonic m) {
  return m == Mnemonic::SLLI || m == Mnemonic::SRLI || m == Mnemonic::SRAI;
}

// access width in bytes for loads/stores
inline u32 access_width(Mnemonic m) {
  switch (m) {
    case Mnemonic::LB: case Mnemonic::LBU: case Mnemonic::SB: return 1;
    case Mnemonic::LH: case Mnemonic::LHU: case Mnemonic::SH: return 2;
    case Mnemonic::LW: case Mnemonic::SW: return 4;
    default: return 0;
  }
}

// ---- decoded instruction ----------------------------------------------------

struct DecodedInst {
  Mnemonic mnemonic = Mnemonic::ADDI;
  std::optional<u8> rd;
  std::optional<u8> rs1;
  std::optional<u8> rs2;
  std::optional<i32> imm;
  u32 raw = 0;

  bool operator==(const DecodedInst&) const = default;
};

inline i32 sign_extend(u32 v, unsigned bits) {
  u32 m = 1u << (bits - 1);
  return static_cast<i32>((v ^ m) - m);
}

// The reserved word that terminates execution: JAL x0, 0 (jump to self).
inline constexpr u32 kHaltWord = 0x0000006f;

inline std::optional<DecodedInst> decode(u32 word) {
  const u32 opcode = word & 0x7f;
  const u8 rd = (word >> 7) & 0x1f;
  const u8 funct3 = (word >> 12) & 0x7;
  const u8 rs1 = (word >> 15) & 0x1f;
  const u8 rs2 = (word >> 20) & 0x1f;
  const u8 funct7 = (word >> 25) & 0x7f;

  const auto imm_i = [&] { return sign_extend(word >> 20, 12); };
  const auto imm_s = [&] {
    return sign_extend(((word >> 25) << 5) | rd, 12);
  };
  const auto imm_b = [&] {
    u32 v = ((word >> 31) << 12) | (((word >> 7) & 1) << 11) |
            (((word >> 25) & 0x3f) << 5) | (((word >> 8) & 0xf) << 1);
    return sign_extend(v, 13);
  };
  const auto imm_u = [&] { return static_cast<i32>(word & 0xfffff000u); };
  const auto imm_j = [&] {
    u32 v = ((word >> 31) << 20) | (((word >> 12) & 0xff) << 12) |
            (((word >> 20) & 1) << 11) | (((word >> 21) & 0x3ff) << 1);
    return sign_extend(v, 21);
  };

  DecodedInst d;
  d.raw = word;
  switch (opcode) {
    case 0x37:
      d.mnemonic = Mnemonic::LUI;
      d.rd = rd; d.imm = imm_u();
      return d;
    case 0x17:
      d.mnemonic = Mnemonic::AUIPC;
      d.rd = rd; d.imm = imm_u();
      return d;
    case 0x6f:
      d.mnemonic = Mnemonic::JAL;
      d.rd = rd; d.imm = imm_j();
      return d;
    case 0x67:
      if (funct3 != 0) return std::nullopt;
      d.mnemonic = Mnemonic::JALR;
      d.rd = rd; d.rs1 = rs1; d.imm = imm_i();
      return d;
    case 0x63: {
      Mnemonic m;
      switch (funct3) {
        case 0: m = Mnemonic::BEQ; break;
        case 1: m = Mnemonic::BNE; break;
        case 4: m = Mnemonic::BLT; break;
        case 5: m = Mnemonic::BGE; break;
        case 6: m = Mnemonic::BLTU; break;
        case 7: m = Mnemonic::BGEU; break;
        default: return std::nullopt;
      }
      d.mnemonic = m;
      d.rs1 = rs1; d.rs2 = rs2; d.imm = imm_b();
      return d;
    }
    case 0x03: {
      Mnemonic m;
      switch (funct3) {
        case 0: m = Mnemonic::LB; break;
        case 1: m = Mnemonic::LH; break;
        case 2: m = Mnemonic::LW; break;
        case 4: m = Mnemonic::LBU; break;
        case 5: m = Mnemonic::LHU; break;
        default: return std::nullopt;
      }
      d.mnemonic = m;
      d.rd = rd; d.rs1 = rs1; d.imm = imm_i();
      return d;
    }
    case 0x23: {
      Mnemonic m;
      switch (funct3) {
        case 0: m = Mnemonic::SB; break;
        case 1: m = Mnemonic::SH; break;
        case 2: m = Mnemonic::SW; break;
        default: return std::nullopt;
      }
      d.mnemonic = m;
      d.rs1 = rs1; d.rs2 = rs2; d.imm = imm_s();
      return d;
    }
    case 0x13: {
      Mnemonic m;
      switch (funct3) {
        case 0: m = Mnemonic::ADDI; break;
        case 1: m = Mnemonic::SLLI; break;
        case 2: m = Mnemonic::SLTI; break;
        case 3: m = Mnemonic::SLTIU; break;
        case 4: m = Mnemonic::XORI; break;
        case 5: m = (funct7 == 0x20) ? Mnemonic::SRAI : Mnemonic::SRLI; break;
        case 6: m = Mnemonic::ORI; break;
        case 7: m = Mnemonic::ANDI; break;
        default: return std::nullopt;
      }
      d.mnemonic = m;
      d.rd = rd; d.rs1 = rs1;
      if (is_shift_imm(m)) {
        if (funct7 != mnemonic_info(m).funct7) return std::nullopt;
        d.imm = rs2;  // shift amount
      } else {
        d.imm = imm_i();
      }
      return d;
    }
    case 0x33: {
      for (u32 i = 0; i < kMnemonicCount; ++i) {
        auto m = static_cast<Mnemonic>(i);
        const auto& info = mnemonic_info(m);
        if (info.opcode == 0x33 && info.funct3 == funct3 &&
            info.funct7 == funct7) {
          d.mnemonic = m;
          d.rd = rd; d.rs1 = rs1; d.rs2 = rs2;
          return d;
        }
      }
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

inline u32 encode(const DecodedInst& inst) {
  const auto& info = mnemonic_info(inst.mnemonic);
  const std::string nm = info.name;
  const auto need = [&](const std::optional<u8>& f, const char* what) -> u32 {
    if (!f) throw EncodeError(nm + ": missing field " + what);
    if (*f > 31) throw EncodeError(nm + ": register index out of range");
    return *f;
  };
  const auto need_imm = [&]() -> i32 {
    if (!inst.imm) throw EncodeError(nm + ": missing immediate");
    return *inst.imm;
  };
  const auto check = [&](bool ok, const char* msg) {
    if (!ok) throw EncodeError(nm + ": " + msg);
  };

  u32 word = info.opcode;
  switch (info.format) {
    case InstFormat::R: {
      word |= need(inst.rd, "rd") << 7;
      word |= static_cast<u32>(info.funct3) << 12;
      word |= need(inst.rs1, "rs1") << 15;
      word |= need(inst.rs2, "rs2") << 20;
      word |= static_cast<u32>(info.funct7) << 25;
      break;
    }
    case InstFormat::I: {
      word |= need(inst.rd, "rd") << 7;
      word |= static_cast<u32>(info.funct3) << 12;
      word |= need(inst.rs1, "rs1") << 15;
      i32 imm = need_imm();
      if (is_shift_imm(inst.mnemonic)) {
        check(imm >= 0 && imm <= 31, "shift amount not in [0,31]");
        word |= static_cast<u32>(imm) << 20;
        word |= static_cast<u32>(info.funct7) << 25;
      } else {
        check(imm >= -2048 && imm <= 2047, "immediate not in 12-bit range");
        word |= (static_cast<u32>(imm) & 0xfff) << 20;
      }
      break;
    }
    case InstFormat::S: {
      i32 imm = need_imm();
      check(imm >= -2048 && imm <= 2047, "immediate not in 12-bit range");
      u32 u = static_cast<u32>(imm) & 0xfff;
      word |= (u & 0x1f) << 7;
      word |= static_cast<u32>(info.funct3) << 12;
      word |= need(inst.rs1, "rs1") << 15;
      word |= need(inst.rs2, "rs2") << 20;
      word |= (u >> 5) << 25;
      break;
    }
    case InstFormat::B: {
      i32 imm = need_imm();
      check((imm & 1) == 0, "branch offset must be even");
      check(imm >= -4096 && imm <= 4094, "branch offset out of range");
      u32 u = static_cast<u32>(imm);
      word |= (((u >> 11) & 1) << 7) | (((u >> 1) & 0xf) << 8);
      word |= static_cast<u32>(info.funct3) << 12;
      word |= need(inst.rs1, "rs1") << 15;
      word |= need(inst.rs2, "rs2") << 20;
      word |= (((u >> 5) & 0x3f) << 25) | (((u >> 12) & 1) << 31);
      break;
    }
    case InstFormat::U: {
      i32 imm = need_imm();
      check((static_cast<u32>(imm) & 0xfff) == 0,
            "U-type immediate must have zero low 12 bits");
      word |= need(inst.rd, "rd") << 7;
      word |= static_cast<u32>(imm) & 0xfffff000u;
      break;
    }
    case InstFormat::J: {
      i32 imm = need_imm();
      check((imm & 1) == 0, "jump offset must be even");
      check(imm >= -1048576 && imm <= 1048574, "jump offset out of range");
      u32 u = static_cast<u32>(imm);
      word |= need(inst.rd, "rd") << 7;
      word |= ((u >> 12) & 0xff) << 12;
      word |= ((u >> 11) & 1) << 20;
      word |= ((u >> 1) & 0x3ff) << 21;
      word |= ((u >> 20) & 1) << 31;
      break;
    }
  }
  return word;
}

// Convenience builders; they fill `raw` so round-trip equality holds.
inline DecodedInst make_inst(Mnemonic m, std::optional<u8> rd,
                             std::optional<u8> rs1, std::optional<u8> rs2,
                             std::optional<i32> imm) {
  DecodedInst d;
  d.mnemonic = m;
  d.rd = rd;
  d.rs1 = rs1;
  d.rs2 = rs2;
  d.imm = imm;
  d.raw = encode(d);
  return d;
}

inline DecodedInst inst_r(Mnemonic m, u8 rd, u8 rs1, u8 rs2) {
  return make_inst(m, rd, rs1, rs2, std::nullopt);
}
inline DecodedInst inst_i(Mnemonic m, u8 rd, u8 rs1, i32 imm) {
  return make_inst(m, rd, rs1, std::nullopt, imm);
}
inline DecodedInst inst_s(Mnemonic m, u8 rs1, u8 rs2, i32 imm) {
  return make_inst(m, std::nullopt, rs1, rs2, imm);
}
inline DecodedInst inst_b(Mnemonic m, u8 rs1, u8 rs2, i32 imm) {
  return make_inst(m, std::nullopt, rs1, rs2, imm);
}
inline DecodedInst inst_u(Mnemonic m, u8 rd, i32 imm) {
  return make_inst(m, rd, std::nullopt, std::nullopt, imm);
}
inline DecodedInst inst_j(u8 rd, i32 imm) {
  return make_inst(Mnemonic::JAL, rd, std::nullopt, std::nullopt, imm);
}
inline DecodedInst inst_nop() { return inst_i(Mnemonic::ADDI, 0, 0, 0); }

inline std::string inst_to_string(const DecodedInst& d) {
  std::string s = mnemonic_name(d.mnemonic);
  auto app = [&](const std::string& t) { s += " " + t; };
  if (d.rd) app("x" + std::to_string(*d.rd));
  if (d.rs1) app("x" + std::to_string(*d.rs1));
  if (d.rs2) app("x" + std::to_string(*d.rs2));
  if (d.imm) app(std::to_string(*d.imm));
  return s;
}

}  // namespace lcsynth
