#pragma once

// Configurable cycle-accurate in-order pipeline with toggleable timing-leak
// mechanisms, plus the retirement-timing attacker projection.
//
// The model is a scoreboard over a linear stage array: `front` fetch/decode
// stages, one execute stage, and `post` memory/writeback stages; an
// instruction retires when it leaves the last stage. Only retirement timing
// is attacker-visible, so the model tracks stage entry cycles per
// instruction rather than gate-level structure.

#include <algorithm>
#include <bit>
#include <optional>
#include <string>
#include <vector>

#include "lcsynth/arch.hpp"

namespace lcsynth {

struct DivLatency {
  enum class Kind : u8 { Fixed, DataDependent } kind = Kind::Fixed;
  u32 cycles = 3;  // used by Fixed

  bool operator==(const DivLatency&) const = default;
};

struct CacheConfig {
  u32 lines = 64;
  u32 line_size = 16;  // bytes, power of two
  u32 hit_cycles = 1;
  u32 miss_cycles = 8;

  bool operator==(const CacheConfig&) const = default;
};

enum class Forwarding : u8 { Full, AluOnly, None };

struct UarchConfig {
  std::string preset_name;
  u32 pipeline_depth = 5;
  DivLatency div_latency;
  u32 mul_latency = 1;
  u32 mem_latency = 1;
  // misaligned loads not fully inside one word cost one extra bus access
  bool alignment_splitting = false;
  std::optional<CacheConfig> data_cache;
  // flush cycles on every taken branch/jump, even to the fall-through target
  u32 branch_taken_penalty = 0;
  Forwarding forwarding = Forwarding::Full;
  // when false, multiplication results bypass no forwarding path and are
  // only readable after writeback (a one-cycle hazard for adjacent readers)
  bool mul_result_forwarding = true;
  // when false, branch and indirect-jump operands are read from the register
  // file at issue, one stage before execute, with no forwarding
  bool branch_operand_forwarding = true;

  bool operator==(const UarchConfig&) const = default;

  void validate() const {
    if (pipeline_depth < 3 || pipeline_depth > 16)
      throw std::invalid_argument("pipeline depth must be in [3,16]");
    if (mul_latency < 1 || mem_latency < 1 ||
        (div_latency.kind == DivLatency::Kind::Fixed && div_latency.cycles < 1))
      throw std::invalid_argument("latencies must be >= 1");
    if (data_cache) {
      auto pow2 = [](u32 v) { return v && (v & (v - 1)) == 0; };
      if (!pow2(data_cache->lines) || !pow2(data_cache->line_size))
        throw std::invalid_argument("cache parameters must be powers of two");
      if (data_cache->hit_cycles < 1 || data_cache->miss_cycles < 1)
        throw std::invalid_argument("cache latencies must be >= 1");
    }
  }
};

struct UarchEvent {
  RetiredEvent event;
  u32 retire_cycle = 0;

  bool operator==(const UarchEvent&) const = default;
};

struct UarchTrace {
  std::vector<UarchEvent> events;
  u32 total_cycles = 0;
  bool truncated = false;
  HaltReason halted = HaltReason::FuelExhausted;
  std::optional<FaultInfo> fault;

  std::vector<RetiredEvent> arch_events() const {
    std::vector<RetiredEvent> out;
    out.reserve(events.size());
    for (const auto& e : events) out.push_back(e.event);
    return out;
  }
};

using AttackerTrace = std::vector<u32>;

// µAtk: the attacker observes the cycle of every retirement, in order.
inline AttackerTrace attacker_trace(const UarchTrace& trace) {
  AttackerTrace out;
  out.reserve(trace.events.size());
  for (const auto& e : trace.events) out.push_back(e.retire_cycle);
  return out;
}

namespace detail {

// early-terminating divider: latency grows with the bit-length gap between
// dividend and divisor magnitudes
inline u32 div_cycles(const DivLatency& dl, Mnemonic m, u32 rs1, u32 rs2) {
  if (dl.kind == DivLatency::Kind::Fixed) return dl.cycles;
  u32 a = rs1, b = rs2;
  if (m == Mnemonic::DIV || m == Mnemonic::REM) {
    if (static_cast<i32>(a) < 0) a = 0u - a;
    if (static_cast<i32>(b) < 0) b = 0u - b;
  }
  const i32 la = static_cast<i32>(std::bit_width(a));
  const i32 lb = static_cast<i32>(std::bit_width(b));
  return 2 + static_cast<u32>(std::max<i32>(1, la - lb));
}

struct CacheState {
  std::vector<u32> tag;
  std::vector<char> valid;

  void reset(const CacheConfig& c) {
    tag.assign(c.lines, 0);
    valid.assign(c.lines, 0);
  }
  // returns true on hit; allocates on miss
  bool lookup(const CacheConfig& c, u32 addr) {
    const u32 block = addr / c.line_size;
    const u32 idx = block % c.lines;
    if (valid[idx] && tag[idx] == block) return true;
    valid[idx] = 1;
    tag[idx] = block;
    return false;
  }
};

}  // namespace detail

// Simulates the program on the configured pipeline from reset state (empty
// pipeline, empty cache). Retirement order equals program order; the
// embedded event sequence matches the architectural simulator's trace.
inline UarchTrace simulate(const ProgramImage& image,
                           const std::array<u32, 32>& init_regs,
                           const MemLayout& layout, const UarchConfig& cfg,
                           u32 max_cycles) {
  cfg.validate();
  if (max_cycles == 0) throw std::invalid_argument("max_cycles must be > 0");

  ArchState st;
  st.load_image(image);
  st.pc = layout.code.base;
  st.regs = init_regs;
  st.regs[0] = 0;

  const u32 front = cfg.pipeline_depth >= 4 ? 2 : 1;
  const u32 post = cfg.pipeline_depth - front - 1;

  UarchTrace trace;
  detail::CacheState cache;
  if (cfg.data_cache) cache.reset(*cfg.data_cache);

  u32 last_fetch = 0, redirect = 1, exec_free = 1, mem_free = 1,
      last_retire = 0;
  std::array<u32, 32> fwd_avail{};  // earliest execute entry for consumers
  std::array<u32, 32> rf_avail{};   // earliest register-file read

  for (;;) {
    if ((st.pc & 3) == 0 && layout.accessible(st.pc, 4) &&
        st.read(st.pc, 4) == kHaltWord) {
      trace.halted = HaltReason::HaltInstruction;
      break;
    }
    RetiredEvent ev;
    try {
      ev = step_in_place(st, layout);
    } catch (const ArchFault& f) {
      trace.halted = HaltReason::Fault;
      trace.fault = f.info;
      break;
    }
    const Mnemonic m = ev.inst.mnemonic;

    const u32 fetch = std::max(last_fetch + 1, redirect);
    last_fetch = fetch;

    u32 disp = std::max(fetch + front, exec_free);
    const bool rf_only_operands =
        !cfg.branch_operand_forwarding && (is_branch(m) || m == Mnemonic::JALR);
    const auto need = [&](const std::optional<u8>& r) {
      if (!r || *r == 0) return;
      disp = std::max(disp, rf_only_operands ? rf_avail[*r] + 1 : fwd_avail[*r]);
    };
    need(ev.inst.rs1);
    need(ev.inst.rs2);

    u32 dur = 1;
    if (is_mul(m)) dur = cfg.mul_latency;
    if (is_div(m))
      dur = detail::div_cycles(cfg.div_latency, m, *ev.rs1_value,
                               *ev.rs2_value);
    exec_free = disp + dur;

    u32 mem_start = std::max(disp + dur, mem_free);
    u32 service = 1;
    std::optional<MemAccess> access = ev.mem_read ? ev.mem_read : ev.mem_write;
    if (access) {
      const bool crosses = (access->addr & 3u) + access->width > 4;
      const u32 accesses =
          1 + (cfg.alignment_splitting && ev.mem_read && crosses ? 1 : 0);
      service = 0;
      for (u32 i = 0; i < accesses; ++i) {
        if (cfg.data_cache && ev.mem_read) {
          const u32 a = (access->addr & ~3u) + 4 * i;
          service += cache.lookup(*cfg.data_cache, a)
                         ? cfg.data_cache->hit_cycles
                         : cfg.data_cache->miss_cycles;
        } else {
          service += cfg.mem_latency;
        }
      }
    }
    const u32 mem_done = mem_start + service - 1;
    mem_free = mem_done + 1;

    const u32 retire = std::max(mem_done + post - 1, last_retire + 1);
    if (retire > max_cycles) {
      trace.truncated = true;
      break;
    }
    last_retire = retire;

    if (ev.inst.rd && *ev.inst.rd != 0) {
      const u8 rd = *ev.inst.rd;
      u32 avail;
      switch (cfg.forwarding) {
        case Forwarding::Full:
          avail = disp + dur;
          break;
        case Forwarding::AluOnly:
          avail = ev.mem_read ? mem_done + 1 : disp + dur;
          break;
        case Forwarding::None:
          avail = retire + 1;
          break;
      }
      if (is_mul(m) && !cfg.mul_result_forwarding) avail = retire + 1;
      fwd_avail[rd] = avail;
      rf_avail[rd] = retire + 1;
    }

    const bool taken =
        (ev.branch_taken && *ev.branch_taken) || is_jump(m);
    if (taken)
      redirect = std::max(redirect,
                          disp + dur + cfg.branch_taken_penalty - front);

    trace.events.push_back({ev, retire});
  }

  trace.total_cycles = trace.truncated ? max_cycles : last_retire;
  return trace;
}

// Shipped pipeline configurations reproducing the leak classes of a small
// in-order core ("ibex-like") and a deeper in-order core ("cva6-like").
inline UarchConfig preset(const std::string& name) {
  UarchConfig c;
  c.preset_name = name;
  if (name == "ibex-like") {
    c.pipeline_depth = 3;
    c.div_latency = {DivLatency::Kind::DataDependent, 0};
    c.mul_latency = 1;
    c.mem_latency = 1;
    c.alignment_splitting = true;
    c.branch_taken_penalty = 2;
    c.forwarding = Forwarding::Full;
    c.mul_result_forwarding = false;
    c.branch_operand_forwarding = true;
    return c;
  }
  if (name == "cva6-like") {
    c.pipeline_depth = 6;
    c.div_latency = {DivLatency::Kind::DataDependent, 0};
    c.mul_latency = 2;
    c.mem_latency = 1;
    c.alignment_splitting = false;
    c.branch_taken_penalty = 5;
    c.forwarding = Forwarding::AluOnly;
    c.mul_result_forwarding = true;
    c.branch_operand_forwarding = false;
    return c;
  }
  throw UnknownPresetError("unknown preset '" + name + "'");
}

// All leak mechanisms disabled: timing depends only on the per-class
// instruction schedule, never on data values.
inline UarchConfig no_leak_config() {
  UarchConfig c;
  c.preset_name = "no-leak";
  c.pipeline_depth = 5;
  c.div_latency = {DivLatency::Kind::Fixed, 3};
  c.mul_latency = 1;
  c.mem_latency = 1;
  c.alignment_splitting = false;
  c.branch_taken_penalty = 0;
  c.forwarding = Forwarding::Full;
  return c;
}

}  // namespace lcsynth
