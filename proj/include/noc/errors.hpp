#ifndef NOC_ERRORS_HPP
#define NOC_ERRORS_HPP

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace noc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// flit codec
struct CoordinateOverflow : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct PacketTooLarge : Error { using Error::Error; };

// router
struct InvalidLocalPort : Error { using Error::Error; };
struct DuplicateInput : Error { using Error::Error; };
struct HandshakeViolation : Error { using Error::Error; };

// network interface
struct FifoFull : Error { using Error::Error; };
struct FifoEmpty : Error { using Error::Error; };
struct InvalidTiming : Error { using Error::Error; };

// engine
struct TopologyError : Error { using Error::Error; };
struct DeadlockSuspected : Error { using Error::Error; };

// One problem found while reading a scenario file, tied to its line.
struct ParseIssue {
  int line = 0;
  std::string message;
};

inline std::string join_issues(const std::vector<ParseIssue>& issues) {
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "\n";
    os << "line " << issues[i].line << ": " << issues[i].message;
  }
  return os.str();
}

// Syntax-level failure; carries every issue found, not just the first.
struct ParseError : Error {
  explicit ParseError(std::vector<ParseIssue> v)
      : Error(join_issues(v)), issues(std::move(v)) {}
  std::vector<ParseIssue> issues;
};

// The file was readable but its contents are out of range or inconsistent.
struct ValidationError : Error {
  explicit ValidationError(std::vector<ParseIssue> v)
      : Error(join_issues(v)), issues(std::move(v)) {}
  ValidationError(int line, const std::string& message)
      : ValidationError(std::vector<ParseIssue>{{line, message}}) {}
  std::vector<ParseIssue> issues;
};

}  // namespace noc

#endif  // NOC_ERRORS_HPP
