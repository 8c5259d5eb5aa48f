#include "episim/isa.hpp"

#include "episim/error.hpp"

#include <cstdio>

namespace epi {

namespace {

constexpr const char* kMnemonics[kOpCount] = {
    "FADD", "FSUB", "FMUL", "FMADD", "FMSUB", "FIX", "FLOAT", "FABS",
    "ADD", "SUB", "LSL", "LSR", "ASR", "EOR", "ORR", "AND", "BITR",
    "NOP", "MOV", "MOVT", "MOVFS", "MOVTS", "TESTSET", "LDR", "STR",
    "B", "BL", "JR", "JALR",
    "IDLE", "TRAP", "BKPT", "RTI", "GID", "GIE", "UNIMPL",
    "SYNC", "MBKPT", "WAND",
};

constexpr const char* kSuffixes[16] = {
    "EQ", "NE", "GTU", "GTEU", "LTEU", "LTU", "GT", "GTE", "LT", "LTE",
    "FEQ", "FNE", "FLT", "FLTE", "", "??",
};

// Opcode numbers shared by both encodings (see docs/isa.md).
enum Code : unsigned {
  kSys = 0,
  kFadd = 1, kFsub, kFmul, kFmadd, kFmsub, kAdd, kSub, kLsl, kLsr, kAsr, kEor, kOrr, kAnd,
  kFix = 14, kFloat, kFabs, kBitr,
  kAddi = 18, kSubi, kLsli, kLsri, kAsri,
  kMov = 23, kMovi, kLdr, kStr, kB, kBl, kJr, kJalr,
  kMovt = 31, kMovfs, kMovts, kTestset,
  kLongCodes,
};

constexpr unsigned kSysSubCount = 11;

// Zeroed memory decodes as UNIMPL (sub-op 0) and traps.
int sys_sub(Op op) {
  switch (op) {
  case Op::UNIMPL: return 0;
  case Op::NOP: return 1;
  case Op::IDLE: return 2;
  case Op::BKPT: return 3;
  case Op::RTI: return 4;
  case Op::GID: return 5;
  case Op::GIE: return 6;
  case Op::SYNC: return 7;
  case Op::MBKPT: return 8;
  case Op::WAND: return 9;
  case Op::TRAP: return 10;
  default: return -1;
  }
}

Op sys_op(unsigned sub) {
  constexpr Op table[] = {Op::UNIMPL, Op::NOP, Op::IDLE, Op::BKPT, Op::RTI, Op::GID,
                          Op::GIE, Op::SYNC, Op::MBKPT, Op::WAND, Op::TRAP};
  return table[sub];
}

unsigned code_of(const Instruction& i) {
  switch (i.op) {
  case Op::FADD: return kFadd;
  case Op::FSUB: return kFsub;
  case Op::FMUL: return kFmul;
  case Op::FMADD: return kFmadd;
  case Op::FMSUB: return kFmsub;
  case Op::ADD: return i.use_imm ? kAddi : kAdd;
  case Op::SUB: return i.use_imm ? kSubi : kSub;
  case Op::LSL: return i.use_imm ? kLsli : kLsl;
  case Op::LSR: return i.use_imm ? kLsri : kLsr;
  case Op::ASR: return i.use_imm ? kAsri : kAsr;
  case Op::EOR: return kEor;
  case Op::ORR: return kOrr;
  case Op::AND: return kAnd;
  case Op::FIX: return kFix;
  case Op::FLOAT: return kFloat;
  case Op::FABS: return kFabs;
  case Op::BITR: return kBitr;
  case Op::MOV: return i.use_imm ? kMovi : kMov;
  case Op::LDR: return kLdr;
  case Op::STR: return kStr;
  case Op::B: return kB;
  case Op::BL: return kBl;
  case Op::JR: return kJr;
  case Op::JALR: return kJalr;
  case Op::MOVT: return kMovt;
  case Op::MOVFS: return kMovfs;
  case Op::MOVTS: return kMovts;
  case Op::TESTSET: return kTestset;
  default: return kSys;
  }
}

constexpr bool fits_signed(std::int64_t v, unsigned bits) {
  return v >= -(std::int64_t(1) << (bits - 1)) && v < (std::int64_t(1) << (bits - 1));
}
constexpr bool fits_unsigned(std::int64_t v, unsigned bits) {
  return v >= 0 && v < (std::int64_t(1) << bits);
}
constexpr std::uint32_t field(std::int64_t v, unsigned bits) {
  return std::uint32_t(v) & ((1u << bits) - 1);
}
constexpr std::int32_t sext(std::uint32_t v, unsigned bits) {
  const std::uint32_t m = 1u << (bits - 1);
  v &= (1u << bits) - 1;
  return std::int32_t((v ^ m) - m);
}

bool low(unsigned r) { return r < 8; }

[[noreturn]] void illegal(const Instruction& i, const char* why) {
  throw Error(ErrorCode::IllegalOpcode, std::string(why) + " in " + format_instruction(i));
}
[[noreturn]] void out_of_range(const Instruction& i) {
  throw Error(ErrorCode::ImmediateOutOfRange, "immediate out of range in " + format_instruction(i));
}

void check_well_formed(const Instruction& i) {
  if (i.rd >= 64 || i.rn >= 64 || i.rm >= 64)
    illegal(i, "register index >= 64");
  if (i.cond == Cond::Reserved)
    illegal(i, "reserved condition");
  if ((i.op == Op::LDR || i.op == Op::STR) && i.width == Width::B64 && (i.rd & 1))
    illegal(i, "64-bit access needs an even register");
}

// 16-bit payload (10 bits), valid only when fits_short(i).
std::uint32_t short_payload(const Instruction& i) {
  switch (code_of(i)) {
  case kSys:
    return std::uint32_t(sys_sub(i.op)) | (i.op == Op::TRAP ? field(i.imm, 6) << 4 : 0);
  case kFix: case kFloat: case kFabs: case kBitr:
    return i.rd | (i.rn << 3);
  case kAddi: case kSubi: case kLsli: case kLsri: case kAsri:
    return i.rd | (i.rn << 3) | (field(i.imm, 4) << 6);
  case kMov:
    return i.rd | (i.rn << 3) | (unsigned(i.cond) << 6);
  case kMovi:
    return i.rd | (field(i.imm, 7) << 3);
  case kLdr: case kStr:
    return i.rd | (i.rn << 3) | (unsigned(i.width) << 6) |
           (std::uint32_t(i.imm / int(bytes_of(i.width))) << 8);
  case kB:
    return unsigned(i.cond) | (field(i.imm / 2, 6) << 4);
  case kBl:
    return field(i.imm / 2, 10);
  case kJr: case kJalr:
    return i.rn;
  default: // R3
    return i.rd | (i.rn << 3) | (i.rm << 6);
  }
}

std::uint32_t long_payload(const Instruction& i) {
  switch (code_of(i)) {
  case kSys:
    return std::uint32_t(sys_sub(i.op)) | (i.op == Op::TRAP ? field(i.imm, 6) << 4 : 0);
  case kFix: case kFloat: case kFabs: case kBitr:
    return i.rd | (i.rn << 6);
  case kAddi: case kSubi:
    return i.rd | (i.rn << 6) | (field(i.imm, 12) << 12);
  case kLsli: case kLsri: case kAsri:
    return i.rd | (i.rn << 6) | (field(i.imm, 5) << 12);
  case kMov:
    return i.rd | (i.rn << 6) | (unsigned(i.cond) << 12);
  case kMovi: case kMovt:
    return i.rd | (field(i.imm, 16) << 6);
  case kMovfs:
    return i.rd | (field(i.imm, 6) << 6);
  case kMovts:
    return field(i.imm, 6) | (i.rn << 6);
  case kLdr: case kStr: {
    std::uint32_t x = i.amode == AddrMode::Index ? i.rm : field(i.imm / int(bytes_of(i.width)), 8);
    return i.rd | (i.rn << 6) | (unsigned(i.width) << 12) | (unsigned(i.amode) << 14) | (x << 16);
  }
  case kB:
    return unsigned(i.cond) | (field(i.imm / 2, 20) << 4);
  case kBl:
    return field(i.imm / 2, 24);
  case kJr: case kJalr:
    return i.rn;
  default: // R3 and TESTSET
    return i.rd | (i.rn << 6) | (i.rm << 12);
  }
}

// Range check for the 32-bit form.
bool fits_long(const Instruction& i) {
  switch (code_of(i)) {
  case kSys: return i.op != Op::TRAP || fits_unsigned(i.imm, 6);
  case kAddi: case kSubi: return fits_signed(i.imm, 12);
  case kLsli: case kLsri: case kAsri: return fits_unsigned(i.imm, 5);
  case kMovi: case kMovt: return fits_unsigned(i.imm, 16);
  case kMovfs: case kMovts: return fits_unsigned(i.imm, 6);
  case kLdr: case kStr: {
    if (i.amode == AddrMode::Index)
      return true;
    const int size = int(bytes_of(i.width));
    return i.imm % size == 0 && fits_signed(i.imm / size, 8);
  }
  case kB: return i.imm % 2 == 0 && fits_signed(i.imm / 2, 20);
  case kBl: return i.imm % 2 == 0 && fits_signed(i.imm / 2, 24);
  default: return true;
  }
}

} // namespace

const char* mnemonic(Op op) { return kMnemonics[unsigned(op)]; }
const char* suffix(Cond c) { return kSuffixes[unsigned(c)]; }

OpClass op_class(Op op) {
  switch (op) {
  case Op::FADD: case Op::FSUB: case Op::FMUL: case Op::FMADD: case Op::FMSUB:
  case Op::FIX: case Op::FLOAT: case Op::FABS:
    return OpClass::Fpu;
  case Op::ADD: case Op::SUB: case Op::LSL: case Op::LSR: case Op::ASR: case Op::EOR:
  case Op::ORR: case Op::AND: case Op::BITR: case Op::MOV: case Op::MOVT:
    return OpClass::Integer;
  case Op::LDR: case Op::STR: case Op::TESTSET:
    return OpClass::LoadStore;
  case Op::NOP:
    return OpClass::Nop;
  default:
    return OpClass::Control;
  }
}

bool is_branch(Op op) { return op == Op::B || op == Op::BL || op == Op::JR || op == Op::JALR; }

namespace ins {
Instruction r3(Op op, unsigned rd, unsigned rn, unsigned rm) {
  Instruction i;
  i.op = op;
  i.rd = std::uint8_t(rd);
  i.rn = std::uint8_t(rn);
  i.rm = std::uint8_t(rm);
  return i;
}
Instruction r2(Op op, unsigned rd, unsigned rn) { return r3(op, rd, rn, 0); }
Instruction ri(Op op, unsigned rd, unsigned rn, std::int32_t imm) {
  Instruction i = r3(op, rd, rn, 0);
  i.imm = imm;
  i.use_imm = true;
  return i;
}
Instruction mov(unsigned rd, unsigned rn, Cond c) {
  Instruction i = r3(Op::MOV, rd, rn, 0);
  i.cond = c;
  return i;
}
Instruction movi(unsigned rd, std::uint32_t imm16) {
  Instruction i = r3(Op::MOV, rd, 0, 0);
  i.imm = std::int32_t(imm16);
  i.use_imm = true;
  return i;
}
Instruction movt(unsigned rd, std::uint32_t imm16) {
  Instruction i = r3(Op::MOVT, rd, 0, 0);
  i.imm = std::int32_t(imm16);
  return i;
}
Instruction movfs(unsigned rd, unsigned s) {
  Instruction i = r3(Op::MOVFS, rd, 0, 0);
  i.imm = std::int32_t(s);
  return i;
}
Instruction movts(unsigned s, unsigned rn) {
  Instruction i = r3(Op::MOVTS, 0, rn, 0);
  i.imm = std::int32_t(s);
  return i;
}
Instruction mem(Op op, unsigned rd, unsigned rn, Width w, AddrMode m, std::int32_t imm_or_rm) {
  Instruction i = r3(op, rd, rn, 0);
  i.width = w;
  i.amode = m;
  if (m == AddrMode::Index)
    i.rm = std::uint8_t(imm_or_rm);
  else
    i.imm = imm_or_rm;
  return i;
}
Instruction testset(unsigned rd, unsigned rn, unsigned rm) { return r3(Op::TESTSET, rd, rn, rm); }
Instruction branch(Cond c, std::int32_t disp) {
  Instruction i;
  i.op = Op::B;
  i.cond = c;
  i.imm = disp;
  return i;
}
Instruction bl(std::int32_t disp) {
  Instruction i;
  i.op = Op::BL;
  i.imm = disp;
  return i;
}
Instruction jr(Op op, unsigned rn) { return r3(op, 0, rn, 0); }
Instruction trap(unsigned code) {
  Instruction i;
  i.op = Op::TRAP;
  i.imm = std::int32_t(code);
  return i;
}
Instruction bare(Op op) {
  Instruction i;
  i.op = op;
  return i;
}
} // namespace ins

RegUse reg_use(const Instruction& i) {
  RegUse u;
  auto rd = [&](unsigned r) { u.writes.push_back(std::uint8_t(r)); };
  auto rs = [&](unsigned r) { u.reads.push_back(std::uint8_t(r)); };
  switch (i.op) {
  case Op::FADD: case Op::FSUB: case Op::FMUL:
  case Op::EOR: case Op::ORR: case Op::AND:
    rs(i.rn); rs(i.rm); rd(i.rd);
    break;
  case Op::FMADD: case Op::FMSUB:
    rs(i.rd); rs(i.rn); rs(i.rm); rd(i.rd);
    break;
  case Op::ADD: case Op::SUB: case Op::LSL: case Op::LSR: case Op::ASR:
    rs(i.rn);
    if (!i.use_imm)
      rs(i.rm);
    rd(i.rd);
    break;
  case Op::FIX: case Op::FLOAT: case Op::FABS: case Op::BITR:
    rs(i.rn); rd(i.rd);
    break;
  case Op::MOV:
    if (!i.use_imm) {
      rs(i.rn);
      if (i.cond != Cond::AL)
        rs(i.rd); // conditional move keeps the old value
    }
    rd(i.rd);
    break;
  case Op::MOVT:
    rs(i.rd); rd(i.rd);
    break;
  case Op::MOVFS:
    rd(i.rd);
    break;
  case Op::MOVTS: case Op::JR:
    rs(i.rn);
    break;
  case Op::JALR:
    rs(i.rn); rd(kLinkRegister);
    break;
  case Op::BL:
    rd(kLinkRegister);
    break;
  case Op::LDR:
    rs(i.rn);
    if (i.amode == AddrMode::Index)
      rs(i.rm);
    rd(i.rd);
    if (i.width == Width::B64)
      rd(i.rd + 1u);
    if (i.amode == AddrMode::Postmodify)
      rd(i.rn);
    break;
  case Op::STR:
    rs(i.rd);
    if (i.width == Width::B64)
      rs(i.rd + 1u);
    rs(i.rn);
    if (i.amode == AddrMode::Index)
      rs(i.rm);
    if (i.amode == AddrMode::Postmodify)
      rd(i.rn);
    break;
  case Op::TESTSET:
    rs(i.rd); rs(i.rn); rs(i.rm); rd(i.rd);
    break;
  default:
    break;
  }
  return u;
}

bool fits_short(const Instruction& i) {
  switch (code_of(i)) {
  case kSys: return i.op != Op::TRAP || fits_unsigned(i.imm, 6);
  case kMovt: case kMovfs: case kMovts: case kTestset: return false;
  case kFix: case kFloat: case kFabs: case kBitr: return low(i.rd) && low(i.rn);
  case kAddi: case kSubi: return low(i.rd) && low(i.rn) && fits_signed(i.imm, 4);
  case kLsli: case kLsri: case kAsri: return low(i.rd) && low(i.rn) && fits_unsigned(i.imm, 4);
  case kMov: return low(i.rd) && low(i.rn);
  case kMovi: return low(i.rd) && fits_unsigned(i.imm, 7);
  case kLdr: case kStr: {
    if (!low(i.rd) || !low(i.rn) || i.amode != AddrMode::Displacement)
      return false;
    const int size = int(bytes_of(i.width));
    return i.imm % size == 0 && fits_unsigned(i.imm / size, 2);
  }
  case kB: return i.imm % 2 == 0 && fits_signed(i.imm / 2, 6);
  case kBl: return i.imm % 2 == 0 && fits_signed(i.imm / 2, 10);
  case kJr: case kJalr: return low(i.rn);
  default: return low(i.rd) && low(i.rn) && low(i.rm);
  }
}

EncodedInstruction encode(const Instruction& i) {
  check_well_formed(i);
  EncodedInstruction e;
  const unsigned code = code_of(i);
  if (fits_short(i)) {
    e.count = 1;
    e.halfwords[0] = std::uint16_t((code << 1) | (short_payload(i) << 6));
    return e;
  }
  if (!fits_long(i))
    out_of_range(i);
  const std::uint32_t w = 1u | (code << 1) | (long_payload(i) << 8);
  e.count = 2;
  e.halfwords[0] = std::uint16_t(w & 0xffff);
  e.halfwords[1] = std::uint16_t(w >> 16);
  return e;
}

namespace {

// Builds the instruction named by (code, payload) for either form. Returns
// nullopt for reserved opcodes; other canonicality problems are caught by
// re-encoding.
std::optional<Instruction> build(unsigned code, std::uint32_t p, bool is_long) {
  const unsigned rbits = is_long ? 6 : 3;
  const std::uint32_t rmask = (1u << rbits) - 1;
  auto reg = [&](unsigned slot) { return std::uint8_t((p >> (slot * rbits)) & rmask); };
  Instruction i;
  switch (code) {
  case kSys: {
    const unsigned sub = p & 15;
    if (sub >= kSysSubCount)
      return std::nullopt;
    i.op = sys_op(sub);
    if (i.op == Op::TRAP)
      i.imm = std::int32_t((p >> 4) & 63);
    return i;
  }
  case kFadd: case kFsub: case kFmul: case kFmadd: case kFmsub: case kAdd: case kSub:
  case kLsl: case kLsr: case kAsr: case kEor: case kOrr: case kAnd: {
    constexpr Op ops[] = {Op::FADD, Op::FSUB, Op::FMUL, Op::FMADD, Op::FMSUB, Op::ADD, Op::SUB,
                          Op::LSL, Op::LSR, Op::ASR, Op::EOR, Op::ORR, Op::AND};
    return ins::r3(ops[code - kFadd], reg(0), reg(1), reg(2));
  }
  case kFix: case kFloat: case kFabs: case kBitr: {
    constexpr Op ops[] = {Op::FIX, Op::FLOAT, Op::FABS, Op::BITR};
    return ins::r2(ops[code - kFix], reg(0), reg(1));
  }
  case kAddi: case kSubi:
    return ins::ri(code == kAddi ? Op::ADD : Op::SUB, reg(0), reg(1),
                   is_long ? sext(p >> 12, 12) : sext(p >> 6, 4));
  case kLsli: case kLsri: case kAsri: {
    constexpr Op ops[] = {Op::LSL, Op::LSR, Op::ASR};
    return ins::ri(ops[code - kLsli], reg(0), reg(1),
                   std::int32_t(is_long ? (p >> 12) & 31 : (p >> 6) & 15));
  }
  case kMov:
    return ins::mov(reg(0), reg(1), Cond((p >> (2 * rbits)) & 15));
  case kMovi:
    return ins::movi(reg(0), is_long ? (p >> 6) & 0xffff : (p >> 3) & 0x7f);
  case kLdr: case kStr: {
    const Op op = code == kLdr ? Op::LDR : Op::STR;
    const Width w = Width((p >> (2 * rbits)) & 3);
    const int size = int(bytes_of(w));
    if (!is_long)
      return ins::mem(op, reg(0), reg(1), w, AddrMode::Displacement, std::int32_t((p >> 8) & 3) * size);
    const unsigned mode = (p >> 14) & 3;
    if (mode == 3)
      return std::nullopt;
    const std::uint32_t x = (p >> 16) & 0xff;
    if (AddrMode(mode) == AddrMode::Index)
      return ins::mem(op, reg(0), reg(1), w, AddrMode::Index, std::int32_t(x));
    return ins::mem(op, reg(0), reg(1), w, AddrMode(mode), sext(x, 8) * size);
  }
  case kB:
    return ins::branch(Cond(p & 15), (is_long ? sext(p >> 4, 20) : sext(p >> 4, 6)) * 2);
  case kBl:
    return ins::bl((is_long ? sext(p, 24) : sext(p, 10)) * 2);
  case kJr: case kJalr:
    return ins::jr(code == kJr ? Op::JR : Op::JALR, p & rmask);
  case kMovt:
    return is_long ? std::optional(ins::movt(reg(0), (p >> 6) & 0xffff)) : std::nullopt;
  case kMovfs:
    return is_long ? std::optional(ins::movfs(reg(0), (p >> 6) & 63)) : std::nullopt;
  case kMovts:
    return is_long ? std::optional(ins::movts(p & 63, (p >> 6) & 63)) : std::nullopt;
  case kTestset:
    return is_long ? std::optional(ins::testset(reg(0), reg(1), reg(2))) : std::nullopt;
  default:
    return std::nullopt;
  }
}

} // namespace

Decoded decode(std::span<const std::uint16_t> hw) {
  Decoded d;
  d.instr = ins::bare(Op::UNIMPL);
  if (hw.empty()) {
    d.legal = false;
    d.length = 0;
    return d;
  }
  const bool is_long = hw[0] & 1;
  if (is_long && hw.size() < 2) {
    d.legal = false;
    return d;
  }
  d.length = is_long ? 2 : 1;
  const std::uint32_t word = is_long ? (std::uint32_t(hw[0]) | (std::uint32_t(hw[1]) << 16)) : hw[0];
  const unsigned code = is_long ? (word >> 1) & 0x7f : (word >> 1) & 0x1f;
  const std::uint32_t payload = is_long ? word >> 8 : word >> 6;
  auto built = build(code, payload, is_long);
  if (!built) {
    d.legal = false;
    return d;
  }
  // Canonical check: exactly one encoding per instruction.
  try {
    const EncodedInstruction again = encode(*built);
    if (again.count != d.length || again.halfwords[0] != hw[0] || (is_long && again.halfwords[1] != hw[1])) {
      d.legal = false;
      return d;
    }
  } catch (const Error&) {
    d.legal = false;
    return d;
  }
  d.instr = *built;
  return d;
}

std::string format_instruction(const Instruction& i) {
  char buf[96];
  const char* m = mnemonic(i.op);
  auto R = [](unsigned r) { return "R" + std::to_string(r); };
  switch (i.op) {
  case Op::FADD: case Op::FSUB: case Op::FMUL: case Op::FMADD: case Op::FMSUB:
  case Op::EOR: case Op::ORR: case Op::AND:
    std::snprintf(buf, sizeof buf, "%s %s, %s, %s", m, R(i.rd).c_str(), R(i.rn).c_str(), R(i.rm).c_str());
    break;
  case Op::ADD: case Op::SUB: case Op::LSL: case Op::LSR: case Op::ASR:
    if (i.use_imm)
      std::snprintf(buf, sizeof buf, "%s %s, %s, #%d", m, R(i.rd).c_str(), R(i.rn).c_str(), i.imm);
    else
      std::snprintf(buf, sizeof buf, "%s %s, %s, %s", m, R(i.rd).c_str(), R(i.rn).c_str(), R(i.rm).c_str());
    break;
  case Op::FIX: case Op::FLOAT: case Op::FABS: case Op::BITR:
    std::snprintf(buf, sizeof buf, "%s %s, %s", m, R(i.rd).c_str(), R(i.rn).c_str());
    break;
  case Op::MOV:
    if (i.use_imm)
      std::snprintf(buf, sizeof buf, "MOV %s, #%d", R(i.rd).c_str(), i.imm);
    else
      std::snprintf(buf, sizeof buf, "MOV%s %s, %s", suffix(i.cond), R(i.rd).c_str(), R(i.rn).c_str());
    break;
  case Op::MOVT:
    std::snprintf(buf, sizeof buf, "MOVT %s, #%d", R(i.rd).c_str(), i.imm);
    break;
  case Op::MOVFS:
    std::snprintf(buf, sizeof buf, "MOVFS %s, %s", R(i.rd).c_str(), sreg::name(unsigned(i.imm)).c_str());
    break;
  case Op::MOVTS:
    std::snprintf(buf, sizeof buf, "MOVTS %s, %s", sreg::name(unsigned(i.imm)).c_str(), R(i.rn).c_str());
    break;
  case Op::LDR: case Op::STR: {
    constexpr const char* wsuf[] = {"B", "H", "", "D"};
    const std::string name = std::string(m) + wsuf[unsigned(i.width)];
    if (i.amode == AddrMode::Index)
      std::snprintf(buf, sizeof buf, "%s %s, [%s, %s]", name.c_str(), R(i.rd).c_str(), R(i.rn).c_str(), R(i.rm).c_str());
    else if (i.amode == AddrMode::Postmodify)
      std::snprintf(buf, sizeof buf, "%s %s, [%s], #%d", name.c_str(), R(i.rd).c_str(), R(i.rn).c_str(), i.imm);
    else
      std::snprintf(buf, sizeof buf, "%s %s, [%s, #%d]", name.c_str(), R(i.rd).c_str(), R(i.rn).c_str(), i.imm);
    break;
  }
  case Op::TESTSET:
    std::snprintf(buf, sizeof buf, "TESTSET %s, [%s, %s]", R(i.rd).c_str(), R(i.rn).c_str(), R(i.rm).c_str());
    break;
  case Op::B:
    std::snprintf(buf, sizeof buf, "B%s #%d", suffix(i.cond), i.imm);
    break;
  case Op::BL:
    std::snprintf(buf, sizeof buf, "BL #%d", i.imm);
    break;
  case Op::JR: case Op::JALR:
    std::snprintf(buf, sizeof buf, "%s %s", m, R(i.rn).c_str());
    break;
  case Op::TRAP:
    std::snprintf(buf, sizeof buf, "TRAP #%d", i.imm);
    break;
  default:
    std::snprintf(buf, sizeof buf, "%s", m);
  }
  return buf;
}

namespace sreg {

namespace {
constexpr const char* kNames[] = {"CONFIG", "STATUS", "PC", "IRET", "IMASK", "ILAT", "ILATCL",
                                  "IPEND", "CTIMER0", "CTIMER1", "MULTICAST", "COREID", "CYCLES"};
constexpr const char* kDmaFields[] = {"SRC", "DST", "COUNT", "STRIDE", "CONFIG", "STATUS"};
} // namespace

std::optional<unsigned> parse(const std::string& name) {
  for (unsigned k = 0; k < std::size(kNames); ++k)
    if (name == kNames[k])
      return k;
  for (unsigned ch = 0; ch < 2; ++ch)
    for (unsigned f = 0; f < std::size(kDmaFields); ++f)
      if (name == "DMA" + std::to_string(ch) + "_" + kDmaFields[f])
        return DMA_BASE + 8 * ch + f;
  if (name.size() > 1 && name[0] == 'S' && name.find_first_not_of("0123456789", 1) == std::string::npos) {
    const unsigned long v = std::stoul(name.substr(1));
    if (v < 64)
      return unsigned(v);
  }
  return std::nullopt;
}

std::string name(unsigned index) {
  if (index < std::size(kNames))
    return kNames[index];
  if (index >= DMA_BASE && index < DMA_BASE + 16) {
    const unsigned ch = (index - DMA_BASE) / 8;
    const unsigned f = (index - DMA_BASE) % 8;
    if (f < std::size(kDmaFields))
      return "DMA" + std::to_string(ch) + "_" + kDmaFields[f];
  }
  return "S" + std::to_string(index);
}

} // namespace sreg

} // namespace epi
