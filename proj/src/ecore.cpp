#include "episim/ecore.hpp"

#include <algorithm>
#include <limits>

namespace epi {

const char* to_string(RunState s) {
  switch (s) {
  case RunState::Stopped: return "stopped";
  case RunState::Running: return "running";
  case RunState::Idle: return "idle";
  case RunState::Halted: return "halted";
  }
  return "?";
}

const char* to_string(HaltReason r) {
  switch (r) {
  case HaltReason::None: return "none";
  case HaltReason::Trap: return "trap";
  case HaltReason::Breakpoint: return "breakpoint";
  case HaltReason::MultiBreakpoint: return "multi_breakpoint";
  case HaltReason::Faulted: return "fault";
  case HaltReason::Host: return "host";
  }
  return "?";
}

namespace {

bool reads_fpu_flags(const Instruction& i) {
  const bool fcond = i.cond >= Cond::FEQ && i.cond <= Cond::FLTE;
  if (i.op == Op::B || (i.op == Op::MOV && !i.use_imm)) return fcond;
  return i.op == Op::MOVFS && i.imm == int(sreg::STATUS);
}

unsigned flops_of(Op op) {
  switch (op) {
  case Op::FMADD: case Op::FMSUB: return 2;
  case Op::FADD: case Op::FSUB: case Op::FMUL: return 1;
  default: return 0;
  }
}

bool overlaps(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  for (auto x : a)
    if (std::find(b.begin(), b.end(), x) != b.end()) return true;
  return false;
}

// Integer-side register-file ports used by a non-FPU instruction. Store data
// and load results travel on the 64-bit load/store port instead.
bool within_port_budget(const Instruction& i) {
  if (op_class(i.op) == OpClass::Fpu) {
    const RegUse u = reg_use(i);
    return u.reads.size() <= 3 && u.writes.size() <= 1;
  }
  unsigned reads = 0, writes = 0;
  if (i.op == Op::LDR || i.op == Op::STR) {
    reads = 1 + (i.amode == AddrMode::Index ? 1 : 0);
    writes = i.amode == AddrMode::Postmodify ? 1 : 0;
  } else {
    const RegUse u = reg_use(i);
    reads = unsigned(u.reads.size());
    writes = unsigned(u.writes.size());
  }
  return reads <= 2 && writes <= 1;
}

} // namespace

bool issue_pair_allowed(const Instruction& first, const Instruction& second) {
  const OpClass a = op_class(first.op), b = op_class(second.op);
  if (a == OpClass::Control || b == OpClass::Control) return false;
  if (first.op == Op::TESTSET || second.op == Op::TESTSET) return false;
  const bool fpu_pair = (a == OpClass::Fpu) != (b == OpClass::Fpu);
  if (a != OpClass::Nop && b != OpClass::Nop && !fpu_pair) return false;
  const RegUse ua = reg_use(first), ub = reg_use(second);
  if (overlaps(ua.writes, ub.reads) || overlaps(ua.writes, ub.writes)) return false;
  if (reads_fpu_flags(second) && a == OpClass::Fpu) return false;
  return within_port_budget(first) && within_port_budget(second);
}

unsigned result_latency(const Instruction& i, RoundingMode rm) {
  if (op_class(i.op) == OpClass::Fpu) return rm == RoundingMode::Truncate ? 3 : 4;
  if (i.op == Op::LDR || i.op == Op::TESTSET) return 2;
  return 1;
}

bool Core::FetchBuffer::holds(std::uint32_t addr, unsigned len) const {
  if (count == 0) return false;
  const std::uint32_t first = addr & ~7u, last = (addr + len - 1) & ~7u;
  return first >= line[0] && last <= line[0] + 8 * (count - 1);
}

void Core::FetchBuffer::retire_below(std::uint32_t pc) {
  const std::uint32_t want = pc & ~7u;
  if (count && (want < line[0] || want > line[0] + 8 * (count - 1))) {
    count = 0;
    return;
  }
  while (count && line[0] < want) {
    line[0] = line[1];
    --count;
  }
}

Core::Core(NodeAddress id, std::uint32_t mem_bytes) : id_(id), mem_bytes_(mem_bytes) { reset(); }

void Core::reset() {
  s_ = ArchState{};
  s_.coreid = id_;
  // Every maskable interrupt starts masked.
  s_.imask = ((1u << kInterruptSlots) - 1) & ~1u;
  run_ = RunState::Stopped;
  halt_ = HaltReason::None;
  trap_code_.reset();
  ready_.fill(0);
  fpu_flags_ready_ = 0;
  penalty_ = 0;
  fetch_.flush();
  waiting_ = false;
  resume_at_ = 0;
  stats_ = {};
}

void Core::start(std::uint32_t entry) {
  s_.pc = entry;
  run_ = RunState::Running;
  halt_ = HaltReason::None;
  trap_code_.reset();
  penalty_ = 0;
  fetch_.flush();
}

void Core::halt(HaltReason why) {
  run_ = RunState::Halted;
  halt_ = why;
}

void Core::raise(Interrupt slot) { s_.ilat |= 1u << unsigned(slot); }

std::optional<unsigned> Core::serviceable() const {
  const std::uint32_t pending = s_.ilat & (~s_.imask | 1u);
  for (unsigned k = 0; k < kInterruptSlots; ++k) {
    if (!(pending & (1u << k))) continue;
    if (k == 0) return 0;
    if (s_.gid) return std::nullopt;
    if (s_.ipend & ((2u << k) - 1)) return std::nullopt;
    return k;
  }
  return std::nullopt;
}

void Core::redirect(std::uint32_t target) {
  s_.pc = target;
  penalty_ = kBranchPenalty;
  fetch_.flush();
}

bool Core::try_vector() {
  const auto k = serviceable();
  if (!k) return false;
  s_.iret = s_.pc;
  s_.ilat &= ~(1u << *k);
  s_.ipend |= 1u << *k;
  s_.gid = true;
  if (run_ == RunState::Idle) run_ = RunState::Running;
  redirect(ivt_entry(Interrupt(*k)));
  ++stats_.interrupts;
  return true;
}

void Core::fetch(const Scratchpad& mem, BankClaims& banks) {
  (void)mem;
  fetch_.retire_below(s_.pc);
  if (fetch_.count >= 2) return;
  const std::uint32_t next = fetch_.count ? fetch_.line[fetch_.count - 1] + 8 : (s_.pc & ~7u);
  if (next >= mem_bytes_ || !banks.claim(next)) return;
  fetch_.line[fetch_.count++] = next;
}

bool Core::regs_ready(const Instruction& i, std::uint64_t now) const {
  const RegUse u = reg_use(i);
  for (auto r : u.reads)
    if (ready_[r] > now) return false;
  for (auto r : u.writes)
    if (ready_[r] > now) return false;
  if (reads_fpu_flags(i) && fpu_flags_ready_ > now) return false;
  return true;
}

void Core::record_issue(const Instruction& i, std::uint64_t now) {
  const unsigned lat = result_latency(i, s_.rounding());
  const RegUse u = reg_use(i);
  for (auto r : u.writes)
    ready_[r] = now + lat;
  if (i.op == Op::LDR && i.amode == AddrMode::Postmodify)
    ready_[i.rn] = now + 1;
  if (op_class(i.op) == OpClass::Fpu)
    fpu_flags_ready_ = now + lat;
  ++stats_.instructions;
  stats_.flops += flops_of(i.op);
}

void Core::complete_remote(std::uint64_t value, std::uint64_t now) {
  if (!waiting_) return;
  complete_load(s_, pending_load_, value);
  for (auto r : reg_use(pending_load_).writes)
    if (ready_[r] == std::numeric_limits<std::uint64_t>::max()) ready_[r] = now + 1;
  waiting_ = false;
  resume_at_ = now + 1;
}

CoreEvent Core::cycle(std::uint64_t now, const Scratchpad& mem, BankClaims& banks, DataPort& port) {
  CoreEvent ev;
  if (run_ == RunState::Stopped || run_ == RunState::Halted) return ev;
  ++stats_.active_cycles;

  static constexpr std::uint32_t kTimerEnable[2] = {config_bits::kTimer0Enable,
                                                    config_bits::kTimer1Enable};
  for (unsigned k = 0; k < 2; ++k)
    if ((s_.config & kTimerEnable[k]) && s_.ctimer[k] > 0 && --s_.ctimer[k] == 0)
      raise(k == 0 ? Interrupt::Timer0 : Interrupt::Timer1);

  if (waiting_ || now < resume_at_) {
    ++stats_.remote_wait_cycles;
    fetch(mem, banks);
    return ev;
  }
  if (penalty_ > 0) {
    --penalty_;
    ++stats_.penalty_cycles;
    fetch(mem, banks);
    return ev;
  }
  if (run_ == RunState::Idle) {
    const auto k = serviceable();
    if (!k) {
      ++stats_.idle_cycles;
      return ev;
    }
    try_vector();
    ev = {CoreEvent::Vectored, *k};
    fetch(mem, banks);
    return ev;
  }

  enum class Got { Ok, Fetch, Fault };
  auto fetch_instr = [&](std::uint32_t pc, Instruction& out, unsigned& len) {
    if ((pc & 1u) || pc + 2 > mem_bytes_) return Got::Fault;
    if (!fetch_.holds(pc, 2)) return Got::Fetch;
    const auto hw0 = std::uint16_t(mem.read(pc, Width::B16));
    len = encoded_length(hw0);
    if (pc + 2 * len > mem_bytes_) return Got::Fault;
    if (!fetch_.holds(pc, 2 * len)) return Got::Fetch;
    std::array<std::uint16_t, 2> hw{hw0, 0};
    if (len == 2) hw[1] = std::uint16_t(mem.read(pc + 2, Width::B16));
    out = decode(std::span<const std::uint16_t>(hw.data(), len)).instr;
    return Got::Ok;
  };

  // Applies the non-stall outcome of one executed instruction. Returns false
  // when nothing more may issue this cycle.
  auto apply = [&](const Instruction& i, const Effect& e, std::uint64_t t) {
    switch (e.kind) {
    case EffectKind::Stall: return false;
    case EffectKind::MemoryFault:
    case EffectKind::SoftwareException: {
      s_.pc = e.next_pc;
      const auto slot = e.kind == EffectKind::MemoryFault ? Interrupt::MemoryFault
                                                          : Interrupt::SoftwareException;
      raise(slot);
      if (serviceable() == unsigned(slot)) {
        try_vector();
        ev = {CoreEvent::Vectored, unsigned(slot)};
      } else {
        halt(HaltReason::Faulted);
        ev = {CoreEvent::Halted, unsigned(slot)};
      }
      return false;
    }
    default: break;
    }
    record_issue(i, t);
    s_.pc = e.next_pc;
    switch (e.kind) {
    case EffectKind::Pending:
      waiting_ = true;
      pending_load_ = i;
      for (auto r : reg_use(i).writes)
        if (!(i.op == Op::LDR && i.amode == AddrMode::Postmodify && r == i.rn))
          ready_[r] = std::numeric_limits<std::uint64_t>::max();
      return false;
    case EffectKind::Trap:
      trap_code_ = e.code;
      halt(HaltReason::Trap);
      ev = {CoreEvent::Halted, 0};
      return false;
    case EffectKind::Breakpoint:
      halt(HaltReason::Breakpoint);
      ev = {CoreEvent::Halted, 0};
      return false;
    case EffectKind::MultiBreakpoint:
      halt(HaltReason::MultiBreakpoint);
      ev = {CoreEvent::MultiBreakpoint, 0};
      return false;
    case EffectKind::Idle:
      run_ = RunState::Idle;
      return false;
    case EffectKind::Sync:
      ev = {CoreEvent::Sync, 0};
      return false;
    case EffectKind::Wand:
      ev = {CoreEvent::Wand, 0};
      return false;
    default: break;
    }
    if (e.taken) {
      ++stats_.taken_branches;
      redirect(e.next_pc);
      return false;
    }
    return op_class(i.op) != OpClass::Control;
  };

  auto fault_fetch = [&]() {
    raise(Interrupt::MemoryFault);
    if (serviceable() == unsigned(Interrupt::MemoryFault)) {
      try_vector();
      ev = {CoreEvent::Vectored, unsigned(Interrupt::MemoryFault)};
    } else {
      halt(HaltReason::Faulted);
      ev = {CoreEvent::Halted, unsigned(Interrupt::MemoryFault)};
    }
  };

  Instruction first;
  unsigned len1 = 1;
  const std::uint32_t pc1 = s_.pc;
  switch (fetch_instr(pc1, first, len1)) {
  case Got::Fault:
    fault_fetch();
    return ev;
  case Got::Fetch:
    ++stats_.fetch_stalls;
    fetch(mem, banks);
    return ev;
  case Got::Ok: break;
  }
  if (!regs_ready(first, now)) {
    ++stats_.dependency_stalls;
    fetch(mem, banks);
    return ev;
  }
  Effect e1 = execute(first, 2 * len1, s_, port);
  if (e1.kind == EffectKind::Stall) {
    ++stats_.memory_stalls;
    fetch(mem, banks);
    return ev;
  }
  ++stats_.issue_cycles;
  const bool more = apply(first, e1, now);

  if (more && run_ == RunState::Running) {
    Instruction second;
    unsigned len2 = 1;
    const std::uint32_t pc2 = s_.pc;
    if (fetch_instr(pc2, second, len2) == Got::Ok && issue_pair_allowed(first, second) &&
        regs_ready(second, now)) {
      const ArchState saved = s_;
      Effect e2 = execute(second, 2 * len2, s_, port);
      if (e2.kind == EffectKind::Stall) {
        s_ = saved;
      } else if (e2.kind == EffectKind::MemoryFault) {
        // Leave the fault to be taken when it issues alone.
        s_ = saved;
      } else {
        ++stats_.dual_issues;
        apply(second, e2, now);
      }
    }
  }

  if ((run_ == RunState::Running || run_ == RunState::Idle) && !waiting_ &&
      ev.kind == CoreEvent::None && serviceable()) {
    const unsigned k = *serviceable();
    try_vector();
    ev = {CoreEvent::Vectored, k};
  }
  fetch(mem, banks);
  return ev;
}

} // namespace epi
