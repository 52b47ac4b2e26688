#include "sqed/isa.hpp"

#include <algorithm>
#include <sstream>

#include "sqed/expr.hpp"

namespace sqed {

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::NOP: return "NOP";
    case Opcode::ADD: return "ADD";
    case Opcode::SUB: return "SUB";
    case Opcode::AND: return "AND";
    case Opcode::OR: return "OR";
    case Opcode::XOR: return "XOR";
    case Opcode::SLL: return "SLL";
    case Opcode::SRL: return "SRL";
    case Opcode::MUL: return "MUL";
    case Opcode::ADDI: return "ADDI";
    case Opcode::LW: return "LW";
    case Opcode::SW: return "SW";
  }
  return "?";
}

bool opcode_uses_rs2(Opcode op) {
  switch (op) {
    case Opcode::ADD: case Opcode::SUB: case Opcode::AND: case Opcode::OR:
    case Opcode::XOR: case Opcode::SLL: case Opcode::SRL: case Opcode::MUL:
      return true;
    default:
      return false;
  }
}

bool opcode_uses_imm(Opcode op) {
  return op == Opcode::ADDI || op == Opcode::LW || op == Opcode::SW;
}

bool opcode_reads_rs1(Opcode op) { return op != Opcode::NOP; }

bool opcode_writes_reg(Opcode op) { return op != Opcode::NOP && op != Opcode::SW; }

bool opcode_is_mem(Opcode op) { return op == Opcode::LW || op == Opcode::SW; }

uint16_t encode(const Instruction& i) {
  if (i.op == Opcode::NOP) return 0;
  auto reg_ok = [](int r) { return r >= 0 && r < 8; };
  if (!reg_ok(i.rd)) throw FieldRange("rd=" + std::to_string(i.rd));
  if (!reg_ok(i.rs1)) throw FieldRange("rs1=" + std::to_string(i.rs1));
  uint16_t bits = static_cast<uint16_t>(static_cast<int>(i.op)) << 12;
  bits |= static_cast<uint16_t>(i.rd) << 9;
  bits |= static_cast<uint16_t>(i.rs1) << 6;
  if (opcode_uses_rs2(i.op)) {
    if (!reg_ok(i.rs2)) throw FieldRange("rs2=" + std::to_string(i.rs2));
    bits |= static_cast<uint16_t>(i.rs2);
  } else {
    if (i.imm < -32 || i.imm > 31) throw FieldRange("imm=" + std::to_string(i.imm));
    bits |= static_cast<uint16_t>(i.imm & 0x3f);
  }
  return bits;
}

std::optional<Instruction> decode(uint16_t bits) {
  int opnum = bits >> 12;
  if (opnum >= kNumOpcodes) return std::nullopt;
  Instruction i;
  i.op = static_cast<Opcode>(opnum);
  if (i.op == Opcode::NOP) {
    if (bits != 0) return std::nullopt;
    return i;
  }
  i.rd = (bits >> 9) & 7;
  i.rs1 = (bits >> 6) & 7;
  if (opcode_uses_rs2(i.op)) {
    if ((bits >> 3) & 7) return std::nullopt;  // reserved bits of the rs2 slot
    i.rs2 = bits & 7;
  } else {
    int raw = bits & 0x3f;
    i.imm = raw >= 32 ? raw - 64 : raw;
  }
  return i;
}

ArchState make_arch_state(uint32_t num_regs, uint32_t mem_words, uint32_t width) {
  ArchState st;
  st.width = width;
  st.regs.assign(num_regs, 0);
  st.mem.assign(mem_words, 0);
  return st;
}

void ref_step(ArchState& st, const Instruction& i) {
  const uint64_t m = mask_width(st.width);
  auto reg = [&](int r) -> uint64_t& {
    if (r < 0 || r >= (int)st.regs.size()) throw FieldRange("reg index " + std::to_string(r));
    return st.regs[r];
  };
  switch (i.op) {
    case Opcode::NOP:
      return;
    case Opcode::ADD: reg(i.rd) = (reg(i.rs1) + reg(i.rs2)) & m; return;
    case Opcode::SUB: reg(i.rd) = (reg(i.rs1) - reg(i.rs2)) & m; return;
    case Opcode::AND: reg(i.rd) = reg(i.rs1) & reg(i.rs2); return;
    case Opcode::OR: reg(i.rd) = reg(i.rs1) | reg(i.rs2); return;
    case Opcode::XOR: reg(i.rd) = reg(i.rs1) ^ reg(i.rs2); return;
    case Opcode::SLL: {
      uint64_t sh = reg(i.rs2);
      reg(i.rd) = sh >= st.width ? 0 : (reg(i.rs1) << sh) & m;
      return;
    }
    case Opcode::SRL: {
      uint64_t sh = reg(i.rs2);
      reg(i.rd) = sh >= st.width ? 0 : reg(i.rs1) >> sh;
      return;
    }
    case Opcode::MUL: reg(i.rd) = (reg(i.rs1) * reg(i.rs2)) & m; return;
    case Opcode::ADDI: reg(i.rd) = (reg(i.rs1) + static_cast<uint64_t>(int64_t(i.imm))) & m; return;
    case Opcode::LW: {
      uint64_t ea = (reg(i.rs1) + static_cast<uint64_t>(int64_t(i.imm))) % st.mem.size();
      reg(i.rd) = st.mem[ea];
      return;
    }
    case Opcode::SW: {
      uint64_t ea = (reg(i.rs1) + static_cast<uint64_t>(int64_t(i.imm))) % st.mem.size();
      st.mem[ea] = reg(i.rd);
      return;
    }
  }
  throw FieldRange("bad opcode");
}

std::string print_instr(const Instruction& i) {
  std::ostringstream os;
  os << opcode_name(i.op);
  if (i.op == Opcode::NOP) return os.str();
  os << " r" << i.rd << ", r" << i.rs1 << ", ";
  if (opcode_uses_rs2(i.op))
    os << "r" << i.rs2;
  else
    os << i.imm;
  return os.str();
}

std::string disassemble(uint16_t bits) {
  auto d = decode(bits);
  if (!d) {
    char buf[24];
    snprintf(buf, sizeof buf, "invalid(0x%04x)", bits);
    return buf;
  }
  return print_instr(*d);
}

namespace {

Opcode opcode_from_name(const std::string& name, int line_no) {
  std::string up = name;
  std::transform(up.begin(), up.end(), up.begin(), ::toupper);
  for (int k = 0; k < kNumOpcodes; ++k)
    if (up == opcode_name(static_cast<Opcode>(k))) return static_cast<Opcode>(k);
  throw ParseError("line " + std::to_string(line_no) + ": unknown mnemonic " + name);
}

int parse_reg(const std::string& tok, int line_no) {
  if (tok.size() < 2 || (tok[0] != 'r' && tok[0] != 'R'))
    throw ParseError("line " + std::to_string(line_no) + ": expected register, got " + tok);
  try {
    return std::stoi(tok.substr(1));
  } catch (...) {
    throw ParseError("line " + std::to_string(line_no) + ": bad register " + tok);
  }
}

}  // namespace

std::vector<Instruction> parse_asm(const std::string& text) {
  std::vector<Instruction> out;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ls(line);
    std::string mnem;
    if (!(ls >> mnem)) continue;
    Instruction i;
    i.op = opcode_from_name(mnem, line_no);
    if (i.op == Opcode::NOP) {
      std::string extra;
      if (ls >> extra) throw ParseError("line " + std::to_string(line_no) + ": NOP takes no operands");
      out.push_back(i);
      continue;
    }
    std::string a, b, c;
    if (!(ls >> a >> b >> c))
      throw ParseError("line " + std::to_string(line_no) + ": expected three operands");
    std::string extra;
    if (ls >> extra) throw ParseError("line " + std::to_string(line_no) + ": trailing operands");
    i.rd = parse_reg(a, line_no);
    i.rs1 = parse_reg(b, line_no);
    if (opcode_uses_rs2(i.op)) {
      i.rs2 = parse_reg(c, line_no);
    } else {
      try {
        i.imm = std::stoi(c);
      } catch (...) {
        throw ParseError("line " + std::to_string(line_no) + ": bad immediate " + c);
      }
    }
    // Round-trip through the codec so range errors surface at parse time.
    encode(i);
    out.push_back(i);
  }
  return out;
}

}  // namespace sqed
