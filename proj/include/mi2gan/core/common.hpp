#ifndef MI2GAN_CORE_COMMON_HPP
#define MI2GAN_CORE_COMMON_HPP

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mi2gan {

// Raised when an argument violates an operation's precondition (shape,
// range, missing field). Maps to a usage-style failure at the CLI.
class ValueError : public std::invalid_argument {
 public:
  explicit ValueError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Raised on filesystem / decode failures.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::string shape_str(const std::vector<int64_t>& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw ValueError(msg);
}

}  // namespace mi2gan

#endif
