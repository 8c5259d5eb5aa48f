#include "episim/semantics.hpp"

namespace epi {

bool eval_condition(Cond c, const Flags& f) {
  switch (c) {
  case Cond::EQ: return f.az;
  case Cond::NE: return !f.az;
  case Cond::GTU: return f.ac && !f.az;
  case Cond::GTEU: return f.ac;
  case Cond::LTEU: return !f.ac || f.az;
  case Cond::LTU: return !f.ac;
  case Cond::GT: return !f.az && f.an == f.av;
  case Cond::GTE: return f.an == f.av;
  case Cond::LT: return f.an != f.av;
  case Cond::LTE: return f.az || f.an != f.av;
  case Cond::FEQ: return f.bz;
  case Cond::FNE: return !f.bz;
  case Cond::FLT: return f.bn && !f.bz;
  case Cond::FLTE: return f.bn || f.bz;
  case Cond::AL: return true;
  case Cond::Reserved: return false;
  }
  return false;
}

// STATUS layout: bit1 GID, bits 4..9 AZ AN AC AV BZ BN, bits 12..14 sticky
// invalid / overflow / underflow.
std::uint32_t ArchState::status() const {
  return (gid ? 1u << 1 : 0) | (flags.az << 4) | (flags.an << 5) | (flags.ac << 6) | (flags.av << 7) |
         (flags.bz << 8) | (flags.bn << 9) | (flags.invalid << 12) | (flags.overflow << 13) |
         (flags.underflow << 14);
}

void ArchState::set_status(std::uint32_t v) {
  gid = v & (1u << 1);
  flags.az = v & (1u << 4);
  flags.an = v & (1u << 5);
  flags.ac = v & (1u << 6);
  flags.av = v & (1u << 7);
  flags.bz = v & (1u << 8);
  flags.bn = v & (1u << 9);
  flags.invalid = v & (1u << 12);
  flags.overflow = v & (1u << 13);
  flags.underflow = v & (1u << 14);
}

std::uint32_t bit_reverse(std::uint32_t v) {
  std::uint32_t out = 0;
  for (int k = 0; k < 32; ++k)
    out |= ((v >> k) & 1u) << (31 - k);
  return out;
}

namespace {

void logic_flags(Flags& f, std::uint32_t res) {
  f.az = res == 0;
  f.an = res >> 31;
  f.ac = false;
  f.av = false;
}

std::uint32_t add_flags(Flags& f, std::uint32_t a, std::uint32_t b) {
  const std::uint64_t wide = std::uint64_t(a) + b;
  const std::uint32_t res = std::uint32_t(wide);
  f.az = res == 0;
  f.an = res >> 31;
  f.ac = wide >> 32;
  f.av = ((~(a ^ b) & (a ^ res)) >> 31) & 1;
  return res;
}

std::uint32_t sub_flags(Flags& f, std::uint32_t a, std::uint32_t b) {
  const std::uint32_t res = a - b;
  f.az = res == 0;
  f.an = res >> 31;
  f.ac = a >= b;
  f.av = (((a ^ b) & (a ^ res)) >> 31) & 1;
  return res;
}

void fpu_flags(Flags& f, const FpuResult& r, bool integer_result = false) {
  if (integer_result) {
    f.bz = r.bits == 0;
    f.bn = r.bits >> 31;
  } else {
    const bool nan = (r.bits & 0x7f800000u) == 0x7f800000u && (r.bits & 0x7fffffu);
    f.bz = (r.bits & 0x7fffffffu) == 0;
    f.bn = !nan && (r.bits >> 31);
  }
  f.invalid |= r.invalid;
  f.overflow |= r.overflow;
  f.underflow |= r.underflow;
}

bool aligned(std::uint32_t addr, Width w) { return addr % bytes_of(w) == 0; }

std::uint32_t read_special(const ArchState& s, unsigned idx, DataPort& port) {
  switch (idx) {
  case sreg::CONFIG: return s.config;
  case sreg::STATUS: return s.status();
  case sreg::PC: return s.pc;
  case sreg::IRET: return s.iret;
  case sreg::IMASK: return s.imask;
  case sreg::ILAT: return s.ilat;
  case sreg::IPEND: return s.ipend;
  case sreg::CTIMER0: return s.ctimer[0];
  case sreg::CTIMER1: return s.ctimer[1];
  case sreg::MULTICAST: return s.multicast;
  case sreg::COREID: return s.coreid.id();
  default: return port.read_device(idx);
  }
}

void write_special(ArchState& s, unsigned idx, std::uint32_t v, DataPort& port) {
  constexpr std::uint32_t kSlots = (1u << kInterruptSlots) - 1;
  switch (idx) {
  case sreg::CONFIG: s.config = v; break;
  case sreg::STATUS: s.set_status(v); break;
  case sreg::IRET: s.iret = v; break;
  case sreg::IMASK: s.imask = v & kSlots; break;
  case sreg::ILATCL: s.ilat &= ~v; break;
  case sreg::CTIMER0: s.ctimer[0] = v; break;
  case sreg::CTIMER1: s.ctimer[1] = v; break;
  case sreg::MULTICAST: s.multicast = v & 0xfff; break;
  case sreg::PC: case sreg::ILAT: case sreg::IPEND: case sreg::COREID: break; // read-only
  default: port.write_device(idx, v); break;
  }
}

} // namespace

void complete_load(ArchState& s, const Instruction& load, std::uint64_t value) {
  if (load.op == Op::TESTSET) {
    s.r[load.rd] = std::uint32_t(value);
    return;
  }
  s.r[load.rd] = std::uint32_t(value);
  if (load.width == Width::B64)
    s.r[load.rd + 1u] = std::uint32_t(value >> 32);
}

Effect execute(const Instruction& i, unsigned length_bytes, ArchState& s, DataPort& port) {
  Effect e;
  e.next_pc = s.pc + length_bytes;
  auto& r = s.r;
  Flags& f = s.flags;
  const RoundingMode rm = s.rounding();

  auto fault = [&](EffectKind k) {
    e.kind = k;
    return e;
  };

  switch (i.op) {
  case Op::FADD: { auto x = fpu_add(r[i.rn], r[i.rm], rm); fpu_flags(f, x); r[i.rd] = x.bits; break; }
  case Op::FSUB: { auto x = fpu_sub(r[i.rn], r[i.rm], rm); fpu_flags(f, x); r[i.rd] = x.bits; break; }
  case Op::FMUL: { auto x = fpu_mul(r[i.rn], r[i.rm], rm); fpu_flags(f, x); r[i.rd] = x.bits; break; }
  case Op::FMADD: { auto x = fpu_madd(r[i.rd], r[i.rn], r[i.rm], rm); fpu_flags(f, x); r[i.rd] = x.bits; break; }
  case Op::FMSUB: { auto x = fpu_msub(r[i.rd], r[i.rn], r[i.rm], rm); fpu_flags(f, x); r[i.rd] = x.bits; break; }
  case Op::FIX: { auto x = fpu_fix(r[i.rn], rm); fpu_flags(f, x, true); r[i.rd] = x.bits; break; }
  case Op::FLOAT: { auto x = fpu_float(r[i.rn], rm); fpu_flags(f, x); r[i.rd] = x.bits; break; }
  case Op::FABS: { auto x = fpu_abs(r[i.rn]); fpu_flags(f, x); r[i.rd] = x.bits; break; }

  case Op::ADD:
    r[i.rd] = add_flags(f, r[i.rn], i.use_imm ? std::uint32_t(i.imm) : r[i.rm]);
    break;
  case Op::SUB:
    r[i.rd] = sub_flags(f, r[i.rn], i.use_imm ? std::uint32_t(i.imm) : r[i.rm]);
    break;
  case Op::LSL: case Op::LSR: case Op::ASR: {
    const unsigned sh = (i.use_imm ? std::uint32_t(i.imm) : r[i.rm]) & 31;
    std::uint32_t v = r[i.rn];
    if (i.op == Op::LSL) v <<= sh;
    else if (i.op == Op::LSR) v >>= sh;
    else v = std::uint32_t(std::int32_t(v) >> sh);
    logic_flags(f, v);
    r[i.rd] = v;
    break;
  }
  case Op::EOR: r[i.rd] = r[i.rn] ^ r[i.rm]; logic_flags(f, r[i.rd]); break;
  case Op::ORR: r[i.rd] = r[i.rn] | r[i.rm]; logic_flags(f, r[i.rd]); break;
  case Op::AND: r[i.rd] = r[i.rn] & r[i.rm]; logic_flags(f, r[i.rd]); break;
  case Op::BITR: r[i.rd] = bit_reverse(r[i.rn]); logic_flags(f, r[i.rd]); break;

  case Op::NOP: break;
  case Op::MOV:
    if (i.use_imm)
      r[i.rd] = std::uint32_t(i.imm);
    else if (eval_condition(i.cond, f))
      r[i.rd] = r[i.rn];
    break;
  case Op::MOVT: r[i.rd] = (r[i.rd] & 0xffffu) | (std::uint32_t(i.imm) << 16); break;
  case Op::MOVFS: r[i.rd] = read_special(s, unsigned(i.imm), port); break;
  case Op::MOVTS: write_special(s, unsigned(i.imm), r[i.rn], port); break;

  case Op::TESTSET: {
    const std::uint32_t addr = r[i.rn] + r[i.rm];
    if (!aligned(addr, Width::B32))
      return fault(EffectKind::MemoryFault);
    const LoadResult lr = port.testset(addr, r[i.rd]);
    if (lr.status == Access::Stall) return fault(EffectKind::Stall);
    if (lr.status == Access::Fault) return fault(EffectKind::MemoryFault);
    if (lr.status == Access::Pending) {
      e.kind = EffectKind::Pending;
      return e;
    }
    r[i.rd] = std::uint32_t(lr.value);
    break;
  }
  case Op::LDR: case Op::STR: {
    const std::uint32_t base = r[i.rn];
    std::uint32_t addr = base;
    if (i.amode == AddrMode::Displacement)
      addr = base + std::uint32_t(i.imm);
    else if (i.amode == AddrMode::Index)
      addr = base + r[i.rm];
    if (!aligned(addr, i.width))
      return fault(EffectKind::MemoryFault);
    bool pending = false;
    if (i.op == Op::LDR) {
      const LoadResult lr = port.load(addr, i.width);
      if (lr.status == Access::Stall) return fault(EffectKind::Stall);
      if (lr.status == Access::Fault) return fault(EffectKind::MemoryFault);
      pending = lr.status == Access::Pending;
      if (i.amode == AddrMode::Postmodify)
        r[i.rn] = base + std::uint32_t(i.imm);
      if (!pending)
        complete_load(s, i, lr.value);
    } else {
      std::uint64_t v = r[i.rd];
      if (i.width == Width::B64)
        v |= std::uint64_t(r[i.rd + 1u]) << 32;
      const Access a = port.store(addr, i.width, v);
      if (a == Access::Stall) return fault(EffectKind::Stall);
      if (a == Access::Fault) return fault(EffectKind::MemoryFault);
      if (i.amode == AddrMode::Postmodify)
        r[i.rn] = base + std::uint32_t(i.imm);
    }
    if (pending)
      e.kind = EffectKind::Pending;
    break;
  }

  case Op::B:
    if (eval_condition(i.cond, f)) {
      e.next_pc = s.pc + std::uint32_t(i.imm);
      e.taken = true;
    }
    break;
  case Op::BL:
    r[kLinkRegister] = s.pc + length_bytes;
    e.next_pc = s.pc + std::uint32_t(i.imm);
    e.taken = true;
    break;
  case Op::JR: case Op::JALR: {
    const std::uint32_t target = r[i.rn];
    const GlobalAddress g = decode_address(target);
    if (g.node.id() != 0 && g.node != s.coreid)
      return fault(EffectKind::MemoryFault);
    if (i.op == Op::JALR)
      r[kLinkRegister] = s.pc + length_bytes;
    e.next_pc = g.offset;
    e.taken = true;
    break;
  }

  case Op::IDLE: e.kind = EffectKind::Idle; break;
  case Op::TRAP: e.kind = EffectKind::Trap; e.code = std::uint32_t(i.imm); break;
  case Op::BKPT: e.kind = EffectKind::Breakpoint; break;
  case Op::MBKPT: e.kind = EffectKind::MultiBreakpoint; break;
  case Op::SYNC: e.kind = EffectKind::Sync; break;
  case Op::WAND: e.kind = EffectKind::Wand; break;
  case Op::GID: s.gid = true; break;
  case Op::GIE: s.gid = false; break;
  case Op::RTI: {
    // Leave the highest-priority service routine in progress.
    for (unsigned k = 0; k < kInterruptSlots; ++k)
      if (s.ipend & (1u << k)) {
        s.ipend &= ~(1u << k);
        break;
      }
    s.gid = false;
    e.next_pc = s.iret;
    e.taken = true;
    break;
  }
  case Op::UNIMPL:
    return fault(EffectKind::SoftwareException);
  }
  return e;
}

} // namespace epi
