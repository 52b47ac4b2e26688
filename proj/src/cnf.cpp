#include "sqed/cnf.hpp"

#include <sstream>

namespace sqed {

std::string to_dimacs(const Cnf& cnf) {
  std::ostringstream os;
  os << "p cnf " << cnf.num_vars << " " << cnf.clauses.size() << "\n";
  for (const auto& cl : cnf.clauses) {
    for (int l : cl) os << l << " ";
    os << "0\n";
  }
  return os.str();
}

Cnf parse_dimacs(const std::string& text) {
  std::istringstream is(text);
  std::string tok;
  Cnf cnf;
  bool header = false;
  size_t expect_clauses = 0;
  std::vector<int> cur;
  while (is >> tok) {
    if (tok == "c") {
      std::string rest;
      std::getline(is, rest);
      continue;
    }
    if (tok == "p") {
      std::string kind;
      long vars = 0, ncl = 0;
      if (!(is >> kind >> vars >> ncl) || kind != "cnf" || vars < 0 || ncl < 0)
        throw ParseError("bad dimacs header");
      cnf.num_vars = static_cast<int>(vars);
      expect_clauses = static_cast<size_t>(ncl);
      header = true;
      continue;
    }
    long v = 0;
    try {
      v = std::stol(tok);
    } catch (...) {
      throw ParseError("bad dimacs token: " + tok);
    }
    if (!header) throw ParseError("clause before header");
    if (v == 0) {
      cnf.clauses.push_back(cur);
      cur.clear();
    } else {
      int av = static_cast<int>(v < 0 ? -v : v);
      if (av > cnf.num_vars) throw ParseError("literal exceeds declared vars: " + tok);
      cur.push_back(static_cast<int>(v));
    }
  }
  if (!header) throw ParseError("missing dimacs header");
  if (!cur.empty()) throw ParseError("unterminated clause");
  if (cnf.clauses.size() != expect_clauses)
    throw ParseError("clause count mismatch: declared " + std::to_string(expect_clauses) +
                     ", found " + std::to_string(cnf.clauses.size()));
  return cnf;
}

}  // namespace sqed
