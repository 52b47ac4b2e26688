#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqed/errors.hpp"

namespace sqed {

// Straight-line integer ISA, 16-bit encodings:
//   op[15:12] rd[11:9] rs1[8:6] rs2[2:0] / imm[5:0]
// R-type keeps bits [5:3] zero; NOP is exactly 0x0000. imm is 6-bit two's
// complement. Loads and stores address data memory with (rs1 + imm) mod M;
// SW stores regs[rd].
enum class Opcode : uint8_t {
  NOP = 0,
  ADD,
  SUB,
  AND,
  OR,
  XOR,
  SLL,
  SRL,
  MUL,
  ADDI,
  LW,
  SW,
};

constexpr int kNumOpcodes = 12;

const char* opcode_name(Opcode op);

bool opcode_uses_rs2(Opcode op);    // register-register ALU forms
bool opcode_uses_imm(Opcode op);    // ADDI, LW, SW
bool opcode_reads_rs1(Opcode op);   // everything but NOP
bool opcode_writes_reg(Opcode op);  // everything but NOP and SW
bool opcode_is_mem(Opcode op);      // LW, SW

struct Instruction {
  Opcode op = Opcode::NOP;
  int rd = 0;
  int rs1 = 0;
  int rs2 = 0;
  int imm = 0;  // signed, -32..31

  bool operator==(const Instruction&) const = default;
};

// FieldRange when a used field does not fit its encoding slot. NOP always
// encodes as 0x0000.
uint16_t encode(const Instruction& instr);

// nullopt for invalid opcodes and non-canonical encodings (nonzero unused
// bits), so decode-then-encode is the identity on every accepted pattern.
std::optional<Instruction> decode(uint16_t bits);

struct ArchState {
  uint32_t width = 8;
  std::vector<uint64_t> regs;
  std::vector<uint64_t> mem;
};

ArchState make_arch_state(uint32_t num_regs, uint32_t mem_words, uint32_t width);

// One-instruction architectural semantics; FieldRange if a register or
// memory index falls outside the state's bounds.
void ref_step(ArchState& st, const Instruction& instr);

std::string print_instr(const Instruction& instr);  // e.g. "ADDI r1, r0, 5"
std::string disassemble(uint16_t bits);             // "invalid(0x...)" when undecodable

// One instruction per line, '#' comments, blank lines ignored.
std::vector<Instruction> parse_asm(const std::string& text);

}  // namespace sqed
