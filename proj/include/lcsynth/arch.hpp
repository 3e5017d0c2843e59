#pragma once

// Architectural simulator for RV32IM: machine state, single-instruction step
// and bounded execution producing a trace of retirement events.

#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lcsynth/isa.hpp"

namespace lcsynth {

// Code and data live in two configured regions of a flat, little-endian,
// sparse byte store. Accesses outside both regions fault.
struct MemLayout {
  AddrRange code{0x00001000, 0x00008000};
  AddrRange data{0x00100000, 0x00001000};

  bool accessible(u32 addr, u32 len) const {
    return code.contains(addr, len) || data.contains(addr, len);
  }
  bool operator==(const MemLayout&) const = default;
};

using ProgramImage = std::vector<std::pair<u32, u32>>;  // (address, word)

struct ArchState {
  u32 pc = 0;
  std::array<u32, 32> regs{};
  std::unordered_map<u32, u8> mem;
  u64 retired_count = 0;

  u8 read_byte(u32 addr) const {
    auto it = mem.find(addr);
    return it == mem.end() ? 0 : it->second;
  }
  u32 read(u32 addr, u32 len) const {
    u32 v = 0;
    for (u32 i = 0; i < len; ++i) v |= static_cast<u32>(read_byte(addr + i)) << (8 * i);
    return v;
  }
  void write(u32 addr, u32 len, u32 value) {
    for (u32 i = 0; i < len; ++i) mem[addr + i] = static_cast<u8>(value >> (8 * i));
  }
  void load_image(const ProgramImage& image) {
    for (const auto& [addr, word] : image) write(addr, 4, word);
  }
};

struct MemAccess {
  u32 addr = 0;
  u8 width = 0;
  u32 data = 0;
  bool operator==(const MemAccess&) const = default;
};

// The architectural facts of one retired instruction; everything the contract
// atoms observe.
struct RetiredEvent {
  u64 order = 0;
  DecodedInst inst;
  u32 pc_before = 0;
  u32 pc_after = 0;
  std::optional<u32> rs1_value;
  std::optional<u32> rs2_value;
  std::optional<u32> rd_value;
  std::optional<MemAccess> mem_read;
  std::optional<MemAccess> mem_write;
  std::optional<bool> branch_taken;

  bool operator==(const RetiredEvent&) const = default;
};

enum class HaltReason : u8 { FuelExhausted, HaltInstruction, Fault };

enum class FaultKind : u8 { IllegalInstruction, MemoryFault };

struct FaultInfo {
  FaultKind kind = FaultKind::IllegalInstruction;
  u32 pc = 0;
  u32 addr = 0;
  bool operator==(const FaultInfo&) const = default;
};

struct ArchFault : std::runtime_error {
  FaultInfo info;
  explicit ArchFault(FaultInfo f)
      : std::runtime_error(f.kind == FaultKind::IllegalInstruction
                               ? "illegal instruction"
                               : "memory fault"),
        info(f) {}
};

struct ArchTrace {
  std::vector<RetiredEvent> events;
  HaltReason halted = HaltReason::FuelExhausted;
  std::optional<FaultInfo> fault;
};

namespace detail {

inline u32 branch_taken_eval(Mnemonic m, u32 a, u32 b) {
  switch (m) {
    case Mnemonic::BEQ: return a == b;
    case Mnemonic::BNE: return a != b;
    case Mnemonic::BLT: return static_cast<i32>(a) < static_cast<i32>(b);
    case Mnemonic::BGE: return static_cast<i32>(a) >= static_cast<i32>(b);
    case Mnemonic::BLTU: return a < b;
    case Mnemonic::BGEU: return a >= b;
    default: return 0;
  }
}

inline u32 alu_eval(Mnemonic m, u32 a, u32 b) {
  switch (m) {
    case Mnemonic::ADD: case Mnemonic::ADDI: return a + b;
    case Mnemonic::SUB: return a - b;
    case Mnemonic::SLL: case Mnemonic::SLLI: return a << (b & 31);
    case Mnemonic::SLT: case Mnemonic::SLTI:
      return static_cast<i32>(a) < static_cast<i32>(b) ? 1 : 0;
    case Mnemonic::SLTU: case Mnemonic::SLTIU: return a < b ? 1 : 0;
    case Mnemonic::XOR: case Mnemonic::XORI: return a ^ b;
    case Mnemonic::SRL: case Mnemonic::SRLI: return a >> (b & 31);
    case Mnemonic::SRA: case Mnemonic::SRAI:
      return static_cast<u32>(static_cast<i32>(a) >> (b & 31));
    case Mnemonic::OR: case Mnemonic::ORI: return a | b;
    case Mnemonic::AND: case Mnemonic::ANDI: return a & b;
    case Mnemonic::MUL: return a * b;
    case Mnemonic::MULH:
      return static_cast<u32>(
          (static_cast<i64>(static_cast<i32>(a)) * static_cast<i32>(b)) >> 32);
    case Mnemonic::MULHSU:
      return static_cast<u32>(
          (static_cast<i64>(static_cast<i32>(a)) * static_cast<i64>(b)) >> 32);
    case Mnemonic::MULHU:
      return static_cast<u32>((static_cast<u64>(a) * b) >> 32);
    // Division follows the RISC-V convention: divide-by-zero yields an
    // all-ones quotient and the dividend as remainder; the signed overflow
    // case (INT_MIN / -1) yields INT_MIN quotient and zero remainder.
    case Mnemonic::DIV:
      if (b == 0) return 0xffffffffu;
      if (a == 0x80000000u && b == 0xffffffffu) return 0x80000000u;
      return static_cast<u32>(static_cast<i32>(a) / static_cast<i32>(b));
    case Mnemonic::DIVU:
      return b == 0 ? 0xffffffffu : a / b;
    case Mnemonic::REM:
      if (b == 0) return a;
      if (a == 0x80000000u && b == 0xffffffffu) return 0;
      return static_cast<u32>(static_cast<i32>(a) % static_cast<i32>(b));
    case Mnemonic::REMU:
      return b == 0 ? a : a % b;
    default: return 0;
  }
}

}  // namespace detail

// Executes the instruction at state.pc, mutating the state. Throws ArchFault
// on illegal instructions or out-of-region accesses; the state is unchanged
// in that case.
inline RetiredEvent step_in_place(ArchState& st, const MemLayout& layout) {
  if ((st.pc & 3) != 0 || !layout.accessible(st.pc, 4))
    throw ArchFault({FaultKind::MemoryFault, st.pc, st.pc});
  const u32 word = st.read(st.pc, 4);
  const auto decoded = decode(word);
  if (!decoded) throw ArchFault({FaultKind::IllegalInstruction, st.pc, st.pc});
  const DecodedInst& d = *decoded;

  RetiredEvent ev;
  ev.order = st.retired_count;
  ev.inst = d;
  ev.pc_before = st.pc;

  const u32 a = d.rs1 ? st.regs[*d.rs1] : 0;
  const u32 b = d.rs2 ? st.regs[*d.rs2] : 0;
  if (d.rs1) ev.rs1_value = a;
  if (d.rs2) ev.rs2_value = b;

  u32 next_pc = st.pc + 4;
  std::optional<u32> rd_result;

  const Mnemonic m = d.mnemonic;
  if (is_load(m)) {
    const u32 addr = a + static_cast<u32>(*d.imm);
    const u32 w = access_width(m);
    if (!layout.accessible(addr, w))
      throw ArchFault({FaultKind::MemoryFault, st.pc, addr});
    const u32 raw = st.read(addr, w);
    ev.mem_read = MemAccess{addr, static_cast<u8>(w), raw};
    u32 v = raw;
    if (m == Mnemonic::LB) v = static_cast<u32>(sign_extend(raw, 8));
    if (m == Mnemonic::LH) v = static_cast<u32>(sign_extend(raw, 16));
    rd_result = v;
  } else if (is_store(m)) {
    const u32 addr = a + static_cast<u32>(*d.imm);
    const u32 w = access_width(m);
    if (!layout.accessible(addr, w))
      throw ArchFault({FaultKind::MemoryFault, st.pc, addr});
    const u32 v = b & (w == 4 ? 0xffffffffu : (1u << (8 * w)) - 1);
    st.write(addr, w, v);
    ev.mem_write = MemAccess{addr, static_cast<u8>(w), v};
  } else if (is_branch(m)) {
    const bool taken = detail::branch_taken_eval(m, a, b) != 0;
    ev.branch_taken = taken;
    if (taken) next_pc = st.pc + static_cast<u32>(*d.imm);
  } else if (m == Mnemonic::JAL) {
    rd_result = st.pc + 4;
    next_pc = st.pc + static_cast<u32>(*d.imm);
  } else if (m == Mnemonic::JALR) {
    rd_result = st.pc + 4;
    next_pc = (a + static_cast<u32>(*d.imm)) & ~1u;
  } else if (m == Mnemonic::LUI) {
    rd_result = static_cast<u32>(*d.imm);
  } else if (m == Mnemonic::AUIPC) {
    rd_result = st.pc + static_cast<u32>(*d.imm);
  } else {
    const u32 operand_b = d.rs2 ? b : static_cast<u32>(*d.imm);
    rd_result = detail::alu_eval(m, a, operand_b);
  }

  if (d.rd) {
    if (*d.rd != 0) st.regs[*d.rd] = *rd_result;
    ev.rd_value = st.regs[*d.rd];  // x0 stays hard-wired to zero
  }
  st.pc = next_pc;
  st.retired_count += 1;
  ev.pc_after = next_pc;
  return ev;
}

// Pure single-step interface; returns the successor state and the event.
inline std::pair<ArchState, RetiredEvent> step(const ArchState& state,
                                               const MemLayout& layout) {
  ArchState next = state;
  RetiredEvent ev = step_in_place(next, layout);
  return {std::move(next), ev};
}

// Runs until fuel is exhausted, the halt word is reached, or a fault occurs.
// Faults are recorded in the trace, never thrown.
inline ArchTrace run(const ArchState& init, const MemLayout& layout, u64 fuel) {
  ArchTrace trace;
  ArchState st = init;
  for (u64 i = 0; i < fuel; ++i) {
    if ((st.pc & 3) == 0 && layout.accessible(st.pc, 4) &&
        st.read(st.pc, 4) == kHaltWord) {
      trace.halted = HaltReason::HaltInstruction;
      return trace;
    }
    try {
      trace.events.push_back(step_in_place(st, layout));
    } catch (const ArchFault& f) {
      trace.halted = HaltReason::Fault;
      trace.fault = f.info;
      return trace;
    }
  }
  // fuel gone; report a clean halt if we stopped right on the halt word
  if ((st.pc & 3) == 0 && layout.accessible(st.pc, 4) &&
      st.read(st.pc, 4) == kHaltWord)
    trace.halted = HaltReason::HaltInstruction;
  else
    trace.halted = HaltReason::FuelExhausted;
  return trace;
}

}  // namespace lcsynth
