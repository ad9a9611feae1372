#pragma once

#include <stdexcept>
#include <string>

namespace firstreply {

// Error taxonomy mapped to CLI exit codes:
//   ConfigError      -> 2
//   DataError        -> 3 (includes missing stage artifacts)
//   ConvergenceError -> 4 (non-convergence, separation, unidentifiable fits)
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// A stage was run before its predecessor produced the artifact it needs.
class MissingArtifactError : public DataError {
 public:
  explicit MissingArtifactError(const std::string& artifact)
      : DataError("missing predecessor artifact: " + artifact), artifact_(artifact) {}
  const std::string& artifact() const { return artifact_; }

 private:
  std::string artifact_;
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& msg) : Error(msg) {}
};

// Remote scorer failures carry a kind so callers can decide whether the stub
// fallback applies (auth/quota) or the run should abort (transport).
class ScorerError : public Error {
 public:
  enum class Kind { auth, quota, transport };
  ScorerError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }
  bool stub_fallback_applies() const { return kind_ == Kind::auth || kind_ == Kind::quota; }

 private:
  Kind kind_;
};

}  // namespace firstreply
