#ifndef CATE_ERROR_HPP_
#define CATE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cate {

enum class ErrorKind {
  kMalformed,     // document does not match its schema
  kInvalidInput,  // schema-valid but violates an invariant
  kUnreachable,
  kUnknownId,
  kNumerical,
  kLimit,         // instance too large for the requested engine
  kConfig,
  kIo,
};

std::string_view to_string(ErrorKind kind);

/// Every engine failure is reported through this type; `kind()` drives the
/// CLI's machine-parsable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformed: return "malformed";
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kUnreachable: return "unreachable";
    case ErrorKind::kUnknownId: return "unknown-id";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kLimit: return "limit";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace cate

#endif  // CATE_ERROR_HPP_
