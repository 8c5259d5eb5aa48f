#include "episim/assembler.hpp"

#include "episim/error.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

namespace epi {

bool ProgramImage::well_formed() const {
  if (bytes.size() % 2 != 0)
    return false;
  if (bytes.empty())
    return entry == base;
  return entry >= base && entry < end();
}

std::vector<std::uint16_t> ProgramImage::halfwords() const {
  std::vector<std::uint16_t> hw(bytes.size() / 2);
  for (std::size_t k = 0; k < hw.size(); ++k)
    hw[k] = std::uint16_t(bytes[2 * k] | (bytes[2 * k + 1] << 8));
  return hw;
}

namespace {

std::string upper(std::string s) {
  for (auto& c : s)
    c = char(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

struct Line {
  int number;
  std::string mnemonic; // upper-case; empty for label-only lines
  std::vector<std::string> operands;
};

[[noreturn]] void syntax(int line, const std::string& what) {
  throw Error(ErrorCode::SyntaxError, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_operands(const std::string& text, int line) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : text) {
    if (c == '[' || c == '(')
      ++depth;
    if (c == ']' || c == ')')
      --depth;
    if (depth < 0)
      syntax(line, "unbalanced brackets");
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (depth != 0)
    syntax(line, "unbalanced brackets");
  if (!trim(cur).empty() || !out.empty())
    out.push_back(trim(cur));
  for (const auto& o : out)
    if (o.empty())
      syntax(line, "empty operand");
  return out;
}

using Symbols = std::map<std::string, std::int64_t>;

// Recursive-descent evaluator for `term (+|- term)*`. Unknown symbols
// evaluate to 0 and set `undefined` so sizing passes can proceed.
class ExprEval {
public:
  ExprEval(const std::string& text, const Symbols& syms, std::int64_t dot, int line)
      : s_(text), syms_(syms), dot_(dot), line_(line) {}

  std::int64_t run() {
    const std::int64_t v = sum();
    skip();
    if (pos_ != s_.size())
      syntax(line_, "unexpected '" + s_.substr(pos_) + "' in expression");
    return v;
  }
  const std::optional<std::string>& undefined() const { return undefined_; }

private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }
  std::int64_t sum() {
    std::int64_t v = unary();
    for (;;) {
      skip();
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
        const char op = s_[pos_++];
        const std::int64_t rhs = unary();
        v = op == '+' ? v + rhs : v - rhs;
      } else {
        return v;
      }
    }
  }
  std::int64_t unary() {
    skip();
    if (pos_ < s_.size() && s_[pos_] == '-') {
      ++pos_;
      return -unary();
    }
    if (pos_ < s_.size() && s_[pos_] == '+') {
      ++pos_;
      return unary();
    }
    return primary();
  }
  std::int64_t primary() {
    skip();
    if (pos_ >= s_.size())
      syntax(line_, "missing expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      const std::int64_t v = sum();
      expect(')');
      return v;
    }
    if (c == '%') {
      ++pos_;
      std::string fn;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_])))
        fn += char(std::tolower(static_cast<unsigned char>(s_[pos_++])));
      expect('(');
      const std::int64_t v = sum();
      expect(')');
      if (fn == "low")
        return v & 0xffff;
      if (fn == "high")
        return (std::uint64_t(v) >> 16) & 0xffff;
      syntax(line_, "unknown function %" + fn);
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t used = 0;
      const std::string rest = s_.substr(pos_);
      std::int64_t v = 0;
      try {
        if (rest.size() > 2 && rest[0] == '0' && (rest[1] == 'b' || rest[1] == 'B'))
          v = std::stoll(rest.substr(2), &used, 2), used += 2;
        else
          v = std::stoll(rest, &used, 0);
      } catch (const std::logic_error&) {
        syntax(line_, "bad number '" + rest + "'");
      }
      pos_ += used;
      return v;
    }
    if (c == '.' && (pos_ + 1 >= s_.size() || !is_ident_char(s_[pos_ + 1]))) {
      ++pos_;
      return dot_;
    }
    if (is_ident_start(c)) {
      std::string name;
      while (pos_ < s_.size() && is_ident_char(s_[pos_]))
        name += s_[pos_++];
      auto it = syms_.find(name);
      if (it == syms_.end()) {
        if (!undefined_)
          undefined_ = name;
        return 0;
      }
      return it->second;
    }
    syntax(line_, "unexpected '" + std::string(1, c) + "' in expression");
  }
  void expect(char c) {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != c)
      syntax(line_, std::string("expected '") + c + "'");
    ++pos_;
  }

  const std::string& s_;
  const Symbols& syms_;
  std::int64_t dot_;
  int line_;
  std::size_t pos_ = 0;
  std::optional<std::string> undefined_;
};

struct EvalContext {
  const Symbols& syms;
  std::int64_t dot;
  int line;
  bool final_pass;

  std::int64_t operator()(const std::string& text) const {
    ExprEval e(text, syms, dot, line);
    const std::int64_t v = e.run();
    if (e.undefined() && final_pass)
      throw Error(ErrorCode::UndefinedLabel, "line " + std::to_string(line) + ": undefined label '" + *e.undefined() + "'");
    return v;
  }
};

std::optional<unsigned> parse_reg(const std::string& text) {
  const std::string u = upper(trim(text));
  if (u == "SP")
    return kStackRegister;
  if (u == "LR")
    return kLinkRegister;
  if (u.size() >= 2 && u[0] == 'R' && u.find_first_not_of("0123456789", 1) == std::string::npos &&
      u.size() <= 3) {
    const unsigned v = unsigned(std::stoul(u.substr(1)));
    if (v < 64)
      return v;
  }
  return std::nullopt;
}

unsigned reg(const std::string& text, int line) {
  auto r = parse_reg(text);
  if (!r)
    syntax(line, "expected a register, got '" + text + "'");
  return *r;
}

std::string immediate_text(const std::string& text, int line) {
  const std::string t = trim(text);
  if (t.empty() || t[0] != '#')
    syntax(line, "expected an immediate '#...', got '" + text + "'");
  return t.substr(1);
}

std::optional<Cond> parse_cond(const std::string& s) {
  if (s.empty())
    return Cond::AL;
  if (s == "AL")
    return Cond::AL;
  for (unsigned c = 0; c < 14; ++c)
    if (s == suffix(Cond(c)))
      return Cond(c);
  return std::nullopt;
}

void expect_count(const Line& l, std::size_t n) {
  if (l.operands.size() != n)
    syntax(l.number, l.mnemonic + " expects " + std::to_string(n) + " operand(s)");
}

std::int32_t checked_imm(std::int64_t v, int line) {
  if (v < INT32_MIN || v > INT32_MAX)
    throw Error(ErrorCode::ImmediateOutOfRange, "line " + std::to_string(line) + ": immediate too large");
  return std::int32_t(v);
}

// Builds the Instruction for one source line at address `here`.
Instruction build(const Line& l, const EvalContext& eval, std::int64_t here) {
  const std::string& m = l.mnemonic;
  const int line = l.number;
  auto R = [&](std::size_t k) { return reg(l.operands[k], line); };
  auto I = [&](std::size_t k) { return checked_imm(eval(immediate_text(l.operands[k], line)), line); };
  auto is_imm = [&](std::size_t k) { return !l.operands[k].empty() && l.operands[k][0] == '#'; };

  static const std::map<std::string, Op> r3 = {
      {"FADD", Op::FADD}, {"FSUB", Op::FSUB}, {"FMUL", Op::FMUL}, {"FMADD", Op::FMADD},
      {"FMSUB", Op::FMSUB}, {"EOR", Op::EOR}, {"ORR", Op::ORR}, {"AND", Op::AND}};
  static const std::map<std::string, Op> r3i = {
      {"ADD", Op::ADD}, {"SUB", Op::SUB}, {"LSL", Op::LSL}, {"LSR", Op::LSR}, {"ASR", Op::ASR}};
  static const std::map<std::string, Op> r2 = {
      {"FIX", Op::FIX}, {"FLOAT", Op::FLOAT}, {"FABS", Op::FABS}, {"BITR", Op::BITR}};
  static const std::map<std::string, Op> bare = {
      {"NOP", Op::NOP}, {"IDLE", Op::IDLE}, {"BKPT", Op::BKPT}, {"RTI", Op::RTI},
      {"GID", Op::GID}, {"GIE", Op::GIE}, {"UNIMPL", Op::UNIMPL}, {"SYNC", Op::SYNC},
      {"MBKPT", Op::MBKPT}, {"WAND", Op::WAND}};

  if (auto it = r3.find(m); it != r3.end()) {
    expect_count(l, 3);
    return ins::r3(it->second, R(0), R(1), R(2));
  }
  if (auto it = r3i.find(m); it != r3i.end()) {
    expect_count(l, 3);
    return is_imm(2) ? ins::ri(it->second, R(0), R(1), I(2)) : ins::r3(it->second, R(0), R(1), R(2));
  }
  if (auto it = r2.find(m); it != r2.end()) {
    expect_count(l, 2);
    return ins::r2(it->second, R(0), R(1));
  }
  if (auto it = bare.find(m); it != bare.end()) {
    expect_count(l, 0);
    return ins::bare(it->second);
  }
  if (m == "TRAP") {
    expect_count(l, 1);
    return ins::trap(unsigned(I(0)));
  }
  if (m == "MOVT") {
    expect_count(l, 2);
    return ins::movt(R(0), std::uint32_t(I(1)));
  }
  if (m == "MOVFS" || m == "MOVTS") {
    expect_count(l, 2);
    const std::string& sname = l.operands[m == "MOVFS" ? 1 : 0];
    auto s = sreg::parse(upper(trim(sname)));
    if (!s)
      syntax(line, "unknown special register '" + sname + "'");
    return m == "MOVFS" ? ins::movfs(R(0), *s) : ins::movts(*s, R(1));
  }
  if (m.rfind("MOV", 0) == 0) {
    auto c = parse_cond(m.substr(3));
    if (!c)
      syntax(line, "unknown mnemonic '" + m + "'");
    expect_count(l, 2);
    if (is_imm(1)) {
      if (*c != Cond::AL)
        syntax(line, "conditional MOV takes a register source");
      const std::int32_t v = I(1);
      Instruction i = ins::movi(R(0), 0);
      i.imm = v;
      return i;
    }
    return ins::mov(R(0), R(1), *c);
  }
  if (m == "JR" || m == "JALR") {
    expect_count(l, 1);
    return ins::jr(m == "JR" ? Op::JR : Op::JALR, R(0));
  }
  if (m == "TESTSET") {
    expect_count(l, 2);
    const std::string addr = trim(l.operands[1]);
    if (addr.size() < 2 || addr.front() != '[' || addr.back() != ']')
      syntax(line, "TESTSET expects [Rn, Rm]");
    auto parts = split_operands(addr.substr(1, addr.size() - 2), line);
    if (parts.size() != 2)
      syntax(line, "TESTSET expects [Rn, Rm]");
    return ins::testset(R(0), reg(parts[0], line), reg(parts[1], line));
  }
  if (m.rfind("LDR", 0) == 0 || m.rfind("STR", 0) == 0) {
    const Op op = m[0] == 'L' ? Op::LDR : Op::STR;
    const std::string ws = m.substr(3);
    Width w;
    if (ws.empty()) w = Width::B32;
    else if (ws == "B") w = Width::B8;
    else if (ws == "H") w = Width::B16;
    else if (ws == "D") w = Width::B64;
    else syntax(line, "unknown mnemonic '" + m + "'");
    if (l.operands.size() != 2 && l.operands.size() != 3)
      syntax(line, m + " expects rd, [address]");
    const unsigned rd = R(0);
    const std::string addr = trim(l.operands[1]);
    if (addr.size() < 2 || addr.front() != '[' || addr.back() != ']')
      syntax(line, "expected a bracketed address");
    auto parts = split_operands(addr.substr(1, addr.size() - 2), line);
    if (parts.empty() || parts.size() > 2)
      syntax(line, "bad address operand");
    const unsigned rn = reg(parts[0], line);
    if (l.operands.size() == 3) {
      if (parts.size() != 1)
        syntax(line, "post-modify form is [Rn], #imm");
      return ins::mem(op, rd, rn, w, AddrMode::Postmodify, I(2));
    }
    if (parts.size() == 1)
      return ins::mem(op, rd, rn, w, AddrMode::Displacement, 0);
    if (!parts[1].empty() && parts[1][0] == '#')
      return ins::mem(op, rd, rn, w, AddrMode::Displacement,
                      checked_imm(eval(parts[1].substr(1)), line));
    return ins::mem(op, rd, rn, w, AddrMode::Index, std::int32_t(reg(parts[1], line)));
  }
  if (m == "BL" || (m[0] == 'B' && parse_cond(m.substr(1)))) {
    expect_count(l, 1);
    const std::string& t = l.operands[0];
    const std::int64_t disp = is_imm(0) ? eval(t.substr(1)) : eval(t) - here;
    if (disp % 2 != 0)
      syntax(line, "branch target must be halfword aligned");
    if (m == "BL")
      return ins::bl(checked_imm(disp, line));
    return ins::branch(*parse_cond(m.substr(1)), checked_imm(disp, line));
  }
  syntax(line, "unknown mnemonic '" + m + "'");
}

enum class Kind { Instr, Org, Align, Space, Word, Hword, Float, Equ, Entry, Label };

struct Item {
  Kind kind;
  Line line;
  std::string label; // for Label
  std::uint32_t size = 0;
};

std::vector<Item> parse_source(const std::string& source) {
  std::vector<Item> items;
  std::istringstream in(source);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string text = raw;
    if (auto p = text.find(';'); p != std::string::npos)
      text.erase(p);
    if (auto p = text.find("//"); p != std::string::npos)
      text.erase(p);
    text = trim(text);
    // Leading labels.
    for (;;) {
      std::size_t k = 0;
      while (k < text.size() && is_ident_char(text[k]))
        ++k;
      if (k > 0 && k < text.size() && text[k] == ':' && is_ident_start(text[0])) {
        items.push_back({Kind::Label, {number, {}, {}}, text.substr(0, k)});
        text = trim(text.substr(k + 1));
      } else {
        break;
      }
    }
    if (text.empty())
      continue;
    std::size_t sp = 0;
    while (sp < text.size() && !std::isspace(static_cast<unsigned char>(text[sp])))
      ++sp;
    Line l{number, upper(text.substr(0, sp)), split_operands(trim(text.substr(sp)), number)};
    Kind kind = Kind::Instr;
    if (l.mnemonic[0] == '.') {
      static const std::map<std::string, Kind> directives = {
          {".ORG", Kind::Org}, {".ALIGN", Kind::Align}, {".SPACE", Kind::Space},
          {".WORD", Kind::Word}, {".HWORD", Kind::Hword}, {".FLOAT", Kind::Float},
          {".EQU", Kind::Equ}, {".SET", Kind::Equ}, {".ENTRY", Kind::Entry}};
      auto it = directives.find(l.mnemonic);
      if (it == directives.end())
        syntax(number, "unknown directive '" + l.mnemonic + "'");
      kind = it->second;
      if (l.operands.empty())
        syntax(number, l.mnemonic + " needs an argument");
      if (kind == Kind::Equ && l.operands.size() != 2)
        syntax(number, ".equ expects name, value");
    }
    items.push_back({kind, std::move(l), {}, 0});
  }
  return items;
}

std::uint32_t float_bits(const std::string& text, int line) {
  char* end = nullptr;
  const std::string t = trim(text);
  const float f = std::strtof(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0')
    syntax(line, "bad float '" + text + "'");
  return std::bit_cast<std::uint32_t>(f);
}

} // namespace

ProgramImage assemble(const std::string& source) {
  std::vector<Item> items = parse_source(source);
  for (auto& it : items) {
    if (it.kind == Kind::Instr)
      it.size = 2;
    else if (it.kind == Kind::Word || it.kind == Kind::Float)
      it.size = std::uint32_t(4 * it.line.operands.size());
    else if (it.kind == Kind::Hword)
      it.size = std::uint32_t(2 * it.line.operands.size());
  }

  Symbols syms;
  std::uint32_t base = 0;
  // Lays out items with the current instruction sizes; returns true when any
  // instruction size changed.
  auto layout = [&](bool final_pass, bool allow_shrink, ProgramImage* out) {
    Symbols next;
    std::int64_t loc = 0;
    bool emitted = false;
    bool changed = false;
    std::optional<std::int64_t> entry;
    auto emit = [&](std::uint64_t value, unsigned n) {
      if (out)
        for (unsigned k = 0; k < n; ++k)
          out->bytes.push_back(std::uint8_t(value >> (8 * k)));
    };
    auto pad_to = [&](std::int64_t target, int line) {
      if (target < loc)
        syntax(line, ".org moves backwards");
      if (emitted && out)
        out->bytes.resize(out->bytes.size() + std::size_t(target - loc), 0);
      loc = target;
    };
    auto start_emit = [&] {
      if (!emitted) {
        emitted = true;
        base = std::uint32_t(loc);
      }
    };
    for (auto& it : items) {
      const EvalContext eval{syms, loc, it.line.number, final_pass};
      switch (it.kind) {
      case Kind::Label:
        if (next.count(it.label))
          syntax(it.line.number, "duplicate label '" + it.label + "'");
        next[it.label] = loc;
        break;
      case Kind::Equ: {
        const std::string name = trim(it.line.operands[0]);
        if (next.count(name))
          syntax(it.line.number, "duplicate symbol '" + name + "'");
        next[name] = eval(it.line.operands[1]);
        break;
      }
      case Kind::Entry:
        entry = eval(it.line.operands[0]);
        break;
      case Kind::Org:
        pad_to(eval(it.line.operands[0]), it.line.number);
        break;
      case Kind::Align: {
        const std::int64_t a = eval(it.line.operands[0]);
        if (a <= 0 || (a & (a - 1)))
          syntax(it.line.number, ".align needs a power of two");
        pad_to((loc + a - 1) / a * a, it.line.number);
        break;
      }
      case Kind::Space: {
        const std::int64_t n = eval(it.line.operands[0]);
        if (n < 0)
          syntax(it.line.number, ".space needs a non-negative size");
        start_emit();
        if (out)
          out->bytes.resize(out->bytes.size() + std::size_t(n), 0);
        loc += n;
        break;
      }
      case Kind::Word: case Kind::Hword: case Kind::Float:
        start_emit();
        for (const auto& op : it.line.operands) {
          if (it.kind == Kind::Float)
            emit(float_bits(op, it.line.number), 4);
          else
            emit(std::uint64_t(eval(op)), it.kind == Kind::Word ? 4 : 2);
        }
        loc += it.size;
        break;
      case Kind::Instr: {
        if (loc % 2 != 0)
          syntax(it.line.number, "instruction at odd address");
        start_emit();
        Instruction ins = build(it.line, eval, loc);
        std::uint32_t need;
        if (final_pass) {
          EncodedInstruction e;
          try {
            e = encode(ins);
          } catch (const Error& err) {
            if (err.code() == ErrorCode::ImmediateOutOfRange && (ins.op == Op::B || ins.op == Op::BL))
              throw Error(ErrorCode::BranchOutOfRange,
                          "line " + std::to_string(it.line.number) + ": branch target out of range");
            throw Error(err.code(), "line " + std::to_string(it.line.number) + ": " + err.what());
          }
          if (e.bytes() != it.size)
            syntax(it.line.number, "layout did not converge");
          for (unsigned k = 0; k < e.count; ++k)
            emit(e.halfwords[k], 2);
          need = e.bytes();
        } else {
          need = fits_short(ins) ? 2 : 4;
          if (need != it.size && (need > it.size || allow_shrink)) {
            it.size = need;
            changed = true;
          }
          need = it.size;
        }
        loc += need;
        break;
      }
      }
      if (loc > 0xffffffffll)
        syntax(it.line.number, "image exceeds the address space");
    }
    syms = std::move(next);
    if (out) {
      if (out->bytes.size() % 2)
        out->bytes.push_back(0);
      out->base = emitted ? base : std::uint32_t(0);
      out->entry = entry ? std::uint32_t(*entry)
                         : syms.count("_start") ? std::uint32_t(syms["_start"])
                         : syms.count("start") ? std::uint32_t(syms["start"])
                                               : out->base;
      for (const auto& [k, v] : syms)
        out->symbols[k] = std::uint32_t(v);
    }
    return changed;
  };

  // First pass collects symbols; then iterate sizes to a fixed point.
  layout(false, false, nullptr);
  bool changed = true;
  for (int iter = 0; changed && iter < 64; ++iter)
    changed = layout(false, iter < 32, nullptr);
  ProgramImage image;
  layout(true, false, &image);
  if (!image.well_formed())
    throw Error(ErrorCode::SyntaxError, "entry point outside the image");
  return image;
}

std::vector<ListingEntry> decode_image(const ProgramImage& image) {
  const auto hw = image.halfwords();
  std::vector<ListingEntry> out;
  std::size_t k = 0;
  while (k < hw.size()) {
    Decoded d = decode(std::span(hw).subspan(k));
    if (encoded_length(hw[k]) == 2 && k + 1 >= hw.size())
      throw Error(ErrorCode::IllegalOpcode, "image ends inside a 32-bit instruction at offset " +
                                                std::to_string(image.base + 2 * k));
    out.push_back({std::uint32_t(image.base + 2 * k), d});
    k += d.legal ? d.length : 1;
  }
  return out;
}

std::string disassemble(const ProgramImage& image) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, ".org 0x%x\n", image.base);
  out << buf;
  for (const auto& [name, value] : image.symbols) {
    std::snprintf(buf, sizeof buf, ".equ %s, 0x%x\n", name.c_str(), value);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, ".entry 0x%x\n", image.entry);
  out << buf;
  const auto hw = image.halfwords();
  std::size_t k = 0;
  while (k < hw.size()) {
    const std::uint32_t off = image.base + std::uint32_t(2 * k);
    const Decoded d = decode(std::span(hw).subspan(k));
    std::string text;
    std::string note;
    if (d.legal) {
      text = format_instruction(d.instr);
      if (d.instr.op == Op::B || d.instr.op == Op::BL) {
        std::snprintf(buf, sizeof buf, " -> 0x%x", off + std::uint32_t(d.instr.imm));
        note = buf;
      }
      k += d.length;
    } else {
      std::snprintf(buf, sizeof buf, ".hword 0x%04x", hw[k]);
      text = buf;
      note = " data";
      k += 1;
    }
    std::snprintf(buf, sizeof buf, "    %-32s ; %05x", text.c_str(), off);
    out << buf << note << "\n";
  }
  return out.str();
}

std::string manifest_text(const ProgramImage& image) {
  std::ostringstream out;
  char buf[96];
  out << "episim-image 1\n";
  std::snprintf(buf, sizeof buf, "load 0x%x\nentry 0x%x\nsize %zu\n", image.base, image.entry, image.bytes.size());
  out << buf;
  for (const auto& [name, value] : image.symbols) {
    std::snprintf(buf, sizeof buf, "symbol %s 0x%x\n", name.c_str(), value);
    out << buf;
  }
  return out.str();
}

void apply_manifest(ProgramImage& image, const std::string& text) {
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  if (trim(header) != "episim-image 1")
    throw Error(ErrorCode::BadImage, "manifest header missing");
  std::string line;
  std::optional<std::size_t> size;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key))
      continue;
    try {
      if (key == "load" || key == "entry" || key == "size") {
        std::string v;
        ls >> v;
        const unsigned long n = std::stoul(v, nullptr, 0);
        if (key == "load") image.base = std::uint32_t(n);
        else if (key == "entry") image.entry = std::uint32_t(n);
        else size = n;
      } else if (key == "symbol") {
        std::string name, v;
        ls >> name >> v;
        image.symbols[name] = std::uint32_t(std::stoul(v, nullptr, 0));
      } else {
        throw Error(ErrorCode::BadImage, "unknown manifest key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::BadImage, "bad manifest line '" + line + "'");
    }
  }
  if (size && *size != image.bytes.size())
    throw Error(ErrorCode::BadImage, "manifest size does not match binary");
}

void save_image(const ProgramImage& image, const std::string& path) {
  std::ofstream bin(path, std::ios::binary);
  bin.write(reinterpret_cast<const char*>(image.bytes.data()), std::streamsize(image.bytes.size()));
  std::ofstream man(path + ".manifest");
  man << manifest_text(image);
  if (!bin || !man)
    throw Error(ErrorCode::BadImage, "cannot write image '" + path + "'");
}

ProgramImage load_image(const std::string& path) {
  std::ifstream bin(path, std::ios::binary);
  if (!bin)
    throw Error(ErrorCode::BadImage, "cannot open image '" + path + "'");
  ProgramImage image;
  image.bytes.assign(std::istreambuf_iterator<char>(bin), {});
  std::ifstream man(path + ".manifest");
  if (man) {
    std::stringstream ss;
    ss << man.rdbuf();
    apply_manifest(image, ss.str());
  }
  if (!image.well_formed())
    throw Error(ErrorCode::BadImage, "image length odd or entry outside image");
  decode_image(image); // rejects a truncated trailing instruction
  return image;
}

} // namespace epi
