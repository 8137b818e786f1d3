#pragma once

#include <stdexcept>
#include <string>

namespace dppmb {

enum class ErrorKind { invalid_argument, numeric, io, parse };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}
[[noreturn]] inline void fail_arg(const std::string& msg) {
  fail(ErrorKind::invalid_argument, msg);
}
[[noreturn]] inline void fail_numeric(const std::string& msg) {
  fail(ErrorKind::numeric, msg);
}
[[noreturn]] inline void fail_io(const std::string& msg) {
  fail(ErrorKind::io, msg);
}
[[noreturn]] inline void fail_parse(const std::string& msg) {
  fail(ErrorKind::parse, msg);
}

}  // namespace dppmb
