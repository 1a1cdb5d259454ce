#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace weir {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// -- gateway --------------------------------------------------------------

class TransportError : public Error {
 public:
  using Error::Error;
};

class RateLimited : public Error {
 public:
  explicit RateLimited(const std::string& what, std::optional<double> retry_after_s = {})
      : Error(what), retry_after_s(retry_after_s) {}
  std::optional<double> retry_after_s;
};

// Scripted backend ran out of canned replies. Always a test bug.
class ScriptExhausted : public Error {
 public:
  using Error::Error;
};

// -- cost ledger ----------------------------------------------------------

class ModelMismatch : public Error {
 public:
  using Error::Error;
};

class UnknownModel : public Error {
 public:
  using Error::Error;
};

// -- action environment ---------------------------------------------------

class EnvError : public Error {
 public:
  enum class Kind {
    PathEscapesSandbox,
    FileNotFound,
    NotADirectory,
    OverwriteRefused,
    NothingToUndo,
    InvalidRange,
    Timeout,
    SpawnFailure,
  };

  EnvError(Kind kind, const std::string& what, std::string payload = "")
      : Error(what), kind(kind), payload(std::move(payload)) {}
  Kind kind;
  std::string payload;  // e.g. the partial output captured before a timeout
};

// -- cascade --------------------------------------------------------------

class LifelinesExhausted : public Error {
 public:
  using Error::Error;
};

// -- memory / trace -------------------------------------------------------

class IndexGap : public Error {
 public:
  using Error::Error;
};

class TraceCorrupt : public Error {
 public:
  TraceCorrupt(std::size_t line_number, const std::string& what)
      : Error("trace line " + std::to_string(line_number) + ": " + what),
        line_number(line_number) {}
  std::size_t line_number;
};

// -- tasks / config / metrics ----------------------------------------------

class TaskPackageInvalid : public Error {
 public:
  explicit TaskPackageInvalid(std::vector<std::string> diagnostics)
      : Error(join(diagnostics)), diagnostics(std::move(diagnostics)) {}
  std::vector<std::string> diagnostics;

 private:
  static std::string join(const std::vector<std::string>& ds) {
    std::string out = "invalid task package";
    for (const auto& d : ds) out += "\n  - " + d;
    return out;
  }
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path(path) {}
  std::string path;  // JSON-pointer-ish location of the offending field
};

class BaselineDegenerate : public Error {
 public:
  using Error::Error;
};

class EmptyRunSet : public Error {
 public:
  using Error::Error;
};

}  // namespace weir
