#pragma once

// Contract atoms and templates. An atom pairs an instruction type with a
// leakage source; a template is the universe of candidate atoms; a contract
// selects a subset. Observation traces over architectural traces drive
// distinguishability checks.

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "lcsynth/arch.hpp"

namespace lcsynth {

enum class SourceKind : u8 {
  // instruction leakages (IL): fields of the encoding
  Op, Rd, Rs1, Rs2, Imm,
  // register leakages (RL): operand and result values
  RegRs1, RegRs2, RegRd,
  // memory leakages (ML): addresses and transferred data
  MemRAddr, MemWAddr, MemRData, MemWData,
  // alignment leakages (AL): low address bits of an access
  IsWordAligned, IsHalfAligned,
  // branch leakages (BL)
  BranchTaken, NewPc,
  // data-dependency leakages (DL), parameterized by retirement distance
  RawRs1, RawRs2, RawRd, Waw,
};

enum class Family : u8 { IL, RL, ML, AL, BL, DL };

inline constexpr u32 family_bit(Family f) { return 1u << static_cast<u32>(f); }
inline constexpr u32 kAllFamilies = 0x3f;

inline Family source_family(SourceKind k) {
  switch (k) {
    case SourceKind::Op: case SourceKind::Rd: case SourceKind::Rs1:
    case SourceKind::Rs2: case SourceKind::Imm:
      return Family::IL;
    case SourceKind::RegRs1: case SourceKind::RegRs2: case SourceKind::RegRd:
      return Family::RL;
    case SourceKind::MemRAddr: case SourceKind::MemWAddr:
    case SourceKind::MemRData: case SourceKind::MemWData:
      return Family::ML;
    case SourceKind::IsWordAligned: case SourceKind::IsHalfAligned:
      return Family::AL;
    case SourceKind::BranchTaken: case SourceKind::NewPc:
      return Family::BL;
    default:
      return Family::DL;
  }
}

inline const char* family_name(Family f) {
  static const char* names[] = {"IL", "RL", "ML", "AL", "BL", "DL"};
  return names[static_cast<u32>(f)];
}

// A leakage source identifier; distance is meaningful for DL kinds only.
struct LeakageSource {
  SourceKind kind = SourceKind::Op;
  u8 distance = 0;

  bool operator==(const LeakageSource&) const = default;
  auto operator<=>(const LeakageSource&) const = default;
};

inline std::string source_name(const LeakageSource& s) {
  switch (s.kind) {
    case SourceKind::Op: return "OP";
    case SourceKind::Rd: return "RD";
    case SourceKind::Rs1: return "RS1";
    case SourceKind::Rs2: return "RS2";
    case SourceKind::Imm: return "IMM";
    case SourceKind::RegRs1: return "REG_RS1";
    case SourceKind::RegRs2: return "REG_RS2";
    case SourceKind::RegRd: return "REG_RD";
    case SourceKind::MemRAddr: return "MEM_R_ADDR";
    case SourceKind::MemWAddr: return "MEM_W_ADDR";
    case SourceKind::MemRData: return "MEM_R_DATA";
    case SourceKind::MemWData: return "MEM_W_DATA";
    case SourceKind::IsWordAligned: return "IS_WORD_ALIGNED";
    case SourceKind::IsHalfAligned: return "IS_HALF_ALIGNED";
    case SourceKind::BranchTaken: return "BRANCH_TAKEN";
    case SourceKind::NewPc: return "NEW_PC";
    case SourceKind::RawRs1: return "RAW_RS1_" + std::to_string(s.distance);
    case SourceKind::RawRs2: return "RAW_RS2_" + std::to_string(s.distance);
    case SourceKind::RawRd: return "RAW_RD_" + std::to_string(s.distance);
    case SourceKind::Waw: return "WAW_" + std::to_string(s.distance);
  }
  return "?";
}

struct ContractAtom {
  Mnemonic inst_type;
  LeakageSource source;
  std::string id;  // "<MNEMONIC>:<SOURCE>", unique within a template
};

// Whether a (mnemonic, source) pair makes sense at all, e.g. no immediate
// atom for R-type mnemonics and no memory atom for non-memory mnemonics.
inline bool source_applies_to(SourceKind kind, Mnemonic m) {
  switch (kind) {
    case SourceKind::Op: return true;
    case SourceKind::Rd: case SourceKind::RegRd: return has_rd(m);
    case SourceKind::Rs1: case SourceKind::RegRs1: return has_rs1(m);
    case SourceKind::Rs2: case SourceKind::RegRs2: return has_rs2(m);
    case SourceKind::Imm: return has_imm(m);
    case SourceKind::MemRAddr: case SourceKind::MemRData: return is_load(m);
    case SourceKind::MemWAddr: case SourceKind::MemWData: return is_store(m);
    case SourceKind::IsWordAligned: case SourceKind::IsHalfAligned:
      return is_load(m) || is_store(m);
    case SourceKind::BranchTaken: return is_branch(m);
    case SourceKind::NewPc: return is_branch(m) || is_jump(m);
    case SourceKind::RawRs1: return has_rs1(m);
    case SourceKind::RawRs2: return has_rs2(m);
    case SourceKind::RawRd: case SourceKind::Waw: return has_rd(m);
  }
  return false;
}

class Template {
 public:
  std::vector<ContractAtom> atoms;
  u32 max_dependency_distance = 4;
  u32 families = kAllFamilies;

  u32 size() const { return static_cast<u32>(atoms.size()); }

  i32 index_of(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? -1 : static_cast<i32>(it->second);
  }
  i32 index_of(Mnemonic m, SourceKind k, u8 distance = 0) const {
    return lut_[lut_index(m, k, distance)];
  }
  // indices of all atoms whose instruction type is m
  const std::vector<u32>& atoms_of(Mnemonic m) const {
    return by_mnemonic_[static_cast<u32>(m)];
  }

  void rebuild_index() {
    by_id_.clear();
    lut_.assign(kMnemonicCount * 20 * (kMaxDistance + 1), -1);
    for (auto& v : by_mnemonic_) v.clear();
    for (u32 i = 0; i < atoms.size(); ++i) {
      const auto& a = atoms[i];
      by_id_[a.id] = i;
      lut_[lut_index(a.inst_type, a.source.kind, a.source.distance)] =
          static_cast<i32>(i);
      by_mnemonic_[static_cast<u32>(a.inst_type)].push_back(i);
    }
  }

  static constexpr u32 kMaxDistance = 8;

 private:
  static u32 lut_index(Mnemonic m, SourceKind k, u8 distance) {
    return (static_cast<u32>(m) * 20 + static_cast<u32>(k)) *
               (kMaxDistance + 1) +
           distance;
  }

  std::unordered_map<std::string, u32> by_id_;
  std::vector<i32> lut_;
  std::array<std::vector<u32>, kMnemonicCount> by_mnemonic_;
};

// Builds all applicable (mnemonic, source) atoms, one instruction type per
// mnemonic. `families` restricts the template to the given source families.
inline Template build_template(u32 n_max = 4, u32 families = kAllFamilies) {
  if (n_max < 1 || n_max > Template::kMaxDistance)
    throw std::invalid_argument("dependency distance bound must be in [1,8]");
  static const SourceKind kOrder[] = {
      SourceKind::Op, SourceKind::Rd, SourceKind::Rs1, SourceKind::Rs2,
      SourceKind::Imm, SourceKind::RegRs1, SourceKind::RegRs2,
      SourceKind::RegRd, SourceKind::MemRAddr, SourceKind::MemWAddr,
      SourceKind::MemRData, SourceKind::MemWData, SourceKind::IsWordAligned,
      SourceKind::IsHalfAligned, SourceKind::BranchTaken, SourceKind::NewPc,
      SourceKind::RawRs1, SourceKind::RawRs2, SourceKind::RawRd,
      SourceKind::Waw};
  Template t;
  t.max_dependency_distance = n_max;
  t.families = families;
  for (u32 mi = 0; mi < kMnemonicCount; ++mi) {
    const auto m = static_cast<Mnemonic>(mi);
    for (SourceKind k : kOrder) {
      if (!(families & family_bit(source_family(k)))) continue;
      if (!source_applies_to(k, m)) continue;
      const bool dl = source_family(k) == Family::DL;
      const u8 dmax = dl ? static_cast<u8>(n_max) : 1;
      for (u8 d = 1; d <= dmax; ++d) {
        LeakageSource src{k, dl ? d : static_cast<u8>(0)};
        t.atoms.push_back(
            {m, src, std::string(mnemonic_name(m)) + ":" + source_name(src)});
      }
    }
  }
  t.rebuild_index();
  return t;
}

// One line per atom so synthesized contracts can be audited by hand.
inline std::string template_catalog(const Template& t) {
  std::string out;
  for (const auto& a : t.atoms) {
    out += a.id;
    out += '\t';
    out += mnemonic_name(a.inst_type);
    out += '\t';
    out += source_name({a.source.kind, 0});
    if (source_family(a.source.kind) == Family::DL)
      out.erase(out.size() - 2);  // drop the "_0" suffix of the distance-free name
    out += '\t';
    out += std::to_string(a.source.distance);
    out += '\n';
  }
  return out;
}

// Observation values are tagged scalars: a mnemonic tag, a 32-bit value, or
// a boolean.
using ObsValue = std::variant<Mnemonic, u32, bool>;

// π: the atom observes this event iff the instruction type matches (all
// sources of an applicable pair are then defined for the event).
inline bool applicable(const ContractAtom& atom, const RetiredEvent& ev) {
  return atom.inst_type == ev.inst.mnemonic &&
         source_applies_to(atom.source.kind, ev.inst.mnemonic);
}

namespace detail {

inline const RetiredEvent* nth_previous(std::span<const RetiredEvent> history,
                                        u8 n) {
  if (n == 0 || history.size() < n) return nullptr;
  return &history[history.size() - n];
}

inline bool wrote_reg(const RetiredEvent& ev, u8 reg) {
  return ev.inst.rd && *ev.inst.rd == reg;
}
inline bool read_reg(const RetiredEvent& ev, u8 reg) {
  return (ev.inst.rs1 && *ev.inst.rs1 == reg) ||
         (ev.inst.rs2 && *ev.inst.rs2 == reg);
}

}  // namespace detail

// φ: the observation of an atom on a retired event. `history` holds the
// events retired before this one, oldest first. Returns nothing when the
// atom is not applicable.
inline std::optional<ObsValue> observe(const ContractAtom& atom,
                                       const RetiredEvent& ev,
                                       std::span<const RetiredEvent> history) {
  if (!applicable(atom, ev)) return std::nullopt;
  const auto mem_addr = [&]() -> u32 {
    return ev.mem_read ? ev.mem_read->addr : ev.mem_write->addr;
  };
  switch (atom.source.kind) {
    case SourceKind::Op: return ObsValue{ev.inst.mnemonic};
    case SourceKind::Rd: return ObsValue{static_cast<u32>(*ev.inst.rd)};
    case SourceKind::Rs1: return ObsValue{static_cast<u32>(*ev.inst.rs1)};
    case SourceKind::Rs2: return ObsValue{static_cast<u32>(*ev.inst.rs2)};
    case SourceKind::Imm: return ObsValue{static_cast<u32>(*ev.inst.imm)};
    case SourceKind::RegRs1: return ObsValue{*ev.rs1_value};
    case SourceKind::RegRs2: return ObsValue{*ev.rs2_value};
    case SourceKind::RegRd: return ObsValue{*ev.rd_value};
    case SourceKind::MemRAddr: return ObsValue{ev.mem_read->addr};
    case SourceKind::MemRData: return ObsValue{ev.mem_read->data};
    case SourceKind::MemWAddr: return ObsValue{ev.mem_write->addr};
    case SourceKind::MemWData: return ObsValue{ev.mem_write->data};
    case SourceKind::IsWordAligned: return ObsValue{(mem_addr() & 3u) == 0};
    case SourceKind::IsHalfAligned: return ObsValue{(mem_addr() & 3u) != 3};
    case SourceKind::BranchTaken: return ObsValue{*ev.branch_taken};
    case SourceKind::NewPc: return ObsValue{ev.pc_after};
    // Dependency observations consider register structure only; x0 never
    // carries a dependency and a missing n-th predecessor means none.
    case SourceKind::RawRs1: {
      const u8 reg = *ev.inst.rs1;
      const auto* prev = detail::nth_previous(history, atom.source.distance);
      return ObsValue{reg != 0 && prev && detail::wrote_reg(*prev, reg)};
    }
    case SourceKind::RawRs2: {
      const u8 reg = *ev.inst.rs2;
      const auto* prev = detail::nth_previous(history, atom.source.distance);
      return ObsValue{reg != 0 && prev && detail::wrote_reg(*prev, reg)};
    }
    case SourceKind::RawRd: {
      const u8 reg = *ev.inst.rd;
      const auto* prev = detail::nth_previous(history, atom.source.distance);
      return ObsValue{reg != 0 && prev && detail::read_reg(*prev, reg)};
    }
    case SourceKind::Waw: {
      const u8 reg = *ev.inst.rd;
      const auto* prev = detail::nth_previous(history, atom.source.distance);
      return ObsValue{reg != 0 && prev && detail::wrote_reg(*prev, reg)};
    }
  }
  return std::nullopt;
}

// Per-event observation sequence; entries without a value mark inapplicable
// states. Length always equals the trace length.
using ObservationTrace = std::vector<std::optional<ObsValue>>;

inline ObservationTrace atom_trace(const ContractAtom& atom,
                                   const ArchTrace& trace) {
  ObservationTrace out;
  out.reserve(trace.events.size());
  for (size_t i = 0; i < trace.events.size(); ++i) {
    out.push_back(observe(atom, trace.events[i],
                          std::span(trace.events.data(), i)));
  }
  return out;
}

// The set of atoms whose observation traces differ between the two traces.
// A missing value differs from every concrete value, and traces of unequal
// length differ for every atom. Returns sorted template indices.
//
// Implementation note: scanning both traces once and only evaluating atoms
// around indices where events differ is equivalent to comparing all atom
// traces pairwise, because observations at an index depend only on the event
// itself and the preceding max-distance window.
inline std::vector<u32> distinguishing_atoms(const ArchTrace& ta,
                                             const ArchTrace& tb,
                                             const Template& tmpl) {
  std::vector<u32> result;
  if (ta.events.size() != tb.events.size()) {
    result.resize(tmpl.size());
    for (u32 i = 0; i < tmpl.size(); ++i) result[i] = i;
    return result;
  }
  const size_t n = ta.events.size();
  const u32 window = tmpl.max_dependency_distance;
  std::vector<char> hit(tmpl.size(), 0);

  size_t clean_run = 0;  // consecutive equal events ending just before i
  for (size_t i = 0; i < n; ++i) {
    const RetiredEvent& ea = ta.events[i];
    const RetiredEvent& eb = tb.events[i];
    const bool eq = ea == eb;
    if (eq && clean_run >= window) {
      ++clean_run;
      continue;
    }
    const auto ha = std::span(ta.events.data(), i);
    const auto hb = std::span(tb.events.data(), i);
    const auto check = [&](u32 atom_idx) {
      if (hit[atom_idx]) return;
      const auto& atom = tmpl.atoms[atom_idx];
      if (observe(atom, ea, ha) != observe(atom, eb, hb)) hit[atom_idx] = 1;
    };
    for (u32 idx : tmpl.atoms_of(ea.inst.mnemonic)) check(idx);
    if (eb.inst.mnemonic != ea.inst.mnemonic)
      for (u32 idx : tmpl.atoms_of(eb.inst.mnemonic)) check(idx);
    clean_run = eq ? clean_run + 1 : 0;
  }
  for (u32 i = 0; i < tmpl.size(); ++i)
    if (hit[i]) result.push_back(i);
  return result;
}

inline std::vector<std::string> atom_ids(const std::vector<u32>& indices,
                                         const Template& tmpl) {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (u32 i : indices) out.push_back(tmpl.atoms[i].id);
  return out;
}

// A contract is a subset of a template's atoms, kept as sorted indices.
struct Contract {
  std::vector<u32> selected;

  bool contains(u32 atom_idx) const {
    return std::binary_search(selected.begin(), selected.end(), atom_idx);
  }
};

inline Contract full_contract(const Template& tmpl) {
  Contract c;
  c.selected.resize(tmpl.size());
  for (u32 i = 0; i < tmpl.size(); ++i) c.selected[i] = i;
  return c;
}

// Per-state observation sets: {(source, value) | atom selected & applicable}.
// Multiple atoms may feed the same source.
using ObservationSet = std::set<std::pair<LeakageSource, ObsValue>>;

inline std::vector<ObservationSet> contract_observations(
    const Contract& contract, const ArchTrace& trace, const Template& tmpl) {
  std::vector<ObservationSet> out(trace.events.size());
  for (size_t i = 0; i < trace.events.size(); ++i) {
    const auto hist = std::span(trace.events.data(), i);
    for (u32 idx : contract.selected) {
      const auto& atom = tmpl.atoms[idx];
      if (auto v = observe(atom, trace.events[i], hist))
        out[i].insert({atom.source, *v});
    }
  }
  return out;
}

}  // namespace lcsynth
