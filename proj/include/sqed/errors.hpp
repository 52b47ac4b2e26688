#pragma once

#include <stdexcept>
#include <string>

namespace sqed {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct WidthMismatch : Error {
  explicit WidthMismatch(const std::string& msg) : Error("width mismatch: " + msg) {}
};

struct BadExtract : Error {
  explicit BadExtract(const std::string& msg) : Error("bad extract: " + msg) {}
};

struct UnboundVar : Error {
  explicit UnboundVar(const std::string& msg) : Error("unbound variable: " + msg) {}
};

struct NameCollision : Error {
  explicit NameCollision(const std::string& msg) : Error("name collision: " + msg) {}
};

struct PortMissing : Error {
  explicit PortMissing(const std::string& msg) : Error("port missing: " + msg) {}
};

struct FieldRange : Error {
  explicit FieldRange(const std::string& msg) : Error("field out of range: " + msg) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error("parse error: " + msg) {}
};

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& msg) : Error("shape mismatch: " + msg) {}
};

struct BadParams : Error {
  explicit BadParams(const std::string& msg) : Error("bad parameters: " + msg) {}
};

struct BadMapping : Error {
  explicit BadMapping(const std::string& msg) : Error("bad mapping: " + msg) {}
};

struct NotOriginal : Error {
  explicit NotOriginal(const std::string& msg) : Error("not an original-half instruction: " + msg) {}
};

struct UnsupportedOnCore : Error {
  explicit UnsupportedOnCore(const std::string& msg) : Error("unsupported on core: " + msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error("io error: " + msg) {}
};

struct SpuriousCounterexample : Error {
  explicit SpuriousCounterexample(const std::string& msg) : Error("spurious counterexample: " + msg) {}
};

}  // namespace sqed
