#pragma once

#include <initializer_list>
#include <vector>

#include "sqed/cores.hpp"
#include "sqed/expr.hpp"
#include "sqed/isa.hpp"

namespace sqed {
namespace detail {

inline Expr op_const(Opcode op) { return bv_const(static_cast<uint64_t>(op), 4); }

inline Expr op_is(const Expr& op4, Opcode op) { return bv_eq(op4, op_const(op)); }

inline Expr op_in(const Expr& op4, std::initializer_list<Opcode> ops) {
  std::vector<Expr> terms;
  for (Opcode op : ops) terms.push_back(op_is(op4, op));
  return bv_or_many(terms);
}

// Decoded fields of a raw 16-bit word, with validity. An invalid encoding or
// an invalid fetch decays to NOP downstream.
struct DecodedInstr {
  Expr op;     // 4
  Expr rd;     // 3
  Expr rs1;    // 3
  Expr rs2;    // 3
  Expr imm;    // sign-extended to data width
  Expr valid;  // encoding is canonical
};

inline DecodedInstr decode_instr(const Expr& word, uint32_t width) {
  DecodedInstr d;
  d.op = bv_extract(word, 15, 12);
  d.rd = bv_extract(word, 11, 9);
  d.rs1 = bv_extract(word, 8, 6);
  d.rs2 = bv_extract(word, 2, 0);
  d.imm = bv_sext(bv_extract(word, 5, 0), width);
  Expr op_known = bv_ult(d.op, bv_const(kNumOpcodes, 4));
  Expr r_type = op_in(d.op, {Opcode::ADD, Opcode::SUB, Opcode::AND, Opcode::OR, Opcode::XOR,
                             Opcode::SLL, Opcode::SRL, Opcode::MUL});
  Expr pad_zero = bv_eq(bv_extract(word, 5, 3), bv_const(0, 3));
  Expr nop_canon = bv_implies(op_is(d.op, Opcode::NOP), bv_eq(word, bv_const(0, 16)));
  d.valid = bv_and_many({op_known, bv_implies(r_type, pad_zero), nop_canon});
  return d;
}

inline Expr uses_rs2(const Expr& op4) {
  return op_in(op4, {Opcode::ADD, Opcode::SUB, Opcode::AND, Opcode::OR, Opcode::XOR, Opcode::SLL,
                     Opcode::SRL, Opcode::MUL});
}
inline Expr uses_imm(const Expr& op4) {
  return op_in(op4, {Opcode::ADDI, Opcode::LW, Opcode::SW});
}
inline Expr reads_rs1(const Expr& op4) { return bv_not(op_is(op4, Opcode::NOP)); }
inline Expr writes_reg(const Expr& op4) {
  return bv_not(bv_or(op_is(op4, Opcode::NOP), op_is(op4, Opcode::SW)));
}
inline Expr is_mem(const Expr& op4) { return op_in(op4, {Opcode::LW, Opcode::SW}); }

// Indexed read over a register/memory file.
inline Expr read_file(const std::vector<Expr>& cells, const Expr& addr) {
  Expr out = cells.back();
  for (size_t i = cells.size() - 1; i-- > 0;) {
    out = bv_ite(bv_eq(addr, bv_const(i, addr.width())), cells[i], out);
  }
  return out;
}

// ALU shared by both cores. Shift amounts come from the full operand value,
// so any amount >= width yields zero.
inline Expr alu_compute(const Expr& op4, const Expr& a, const Expr& b, const Expr& imm) {
  Expr opb = bv_ite(uses_imm(op4), imm, b);
  Expr r = bv_add(a, opb);
  r = bv_ite(op_is(op4, Opcode::SUB), bv_sub(a, b), r);
  r = bv_ite(op_is(op4, Opcode::AND), bv_and(a, b), r);
  r = bv_ite(op_is(op4, Opcode::OR), bv_or(a, b), r);
  r = bv_ite(op_is(op4, Opcode::XOR), bv_xor(a, b), r);
  r = bv_ite(op_is(op4, Opcode::SLL), bv_shl(a, b), r);
  r = bv_ite(op_is(op4, Opcode::SRL), bv_lshr(a, b), r);
  r = bv_ite(op_is(op4, Opcode::MUL), bv_mul(a, b), r);
  return r;
}

// Effective address for memory ops: natural address modulo M, except that a
// duplicated instruction is steered into the upper half of memory.
inline Expr effective_addr(const Expr& base, const Expr& imm, const Expr& dup, uint32_t mem_bits) {
  Expr nat = bv_extract(bv_add(base, imm), mem_bits - 1, 0);
  Expr high = mem_bits == 1 ? bv_const(1, 1)
                            : bv_concat(bv_const(1, 1), bv_extract(nat, mem_bits - 2, 0));
  return bv_ite(dup, high, nat);
}

}  // namespace detail
}  // namespace sqed
