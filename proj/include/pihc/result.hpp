#pragma once

#include <string>
#include <utility>
#include <variant>

namespace pihc {

// First failing stage of a construction attempt, in pipeline order. Failures
// are values so experiments can tally them; exceptions stay reserved for
// precondition violations.
enum class FailStage {
  AOutsideWindow,   // degree event not reached inside the density window
  NotHandsome,      // a neighbourhood condition H1-H3 failed (detail = 1..3)
  PathBuildFailed,  // short-path collection stuck (detail = offending vertex)
  MatchingFailed,   // an inter-bin matching was not perfect (detail = step)
  HCNotFound,       // solver exhausted on the contracted digraph
};

const char* to_string(FailStage stage);

struct Failure {
  FailStage stage;
  int detail = -1;  // stage-specific index, -1 when meaningless
  std::string message;
};

template <typename T>
class Result {
 public:
  Result(T value) : v_(std::move(value)) {}
  Result(Failure failure) : v_(std::move(failure)) {}

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  T& value() { return std::get<T>(v_); }
  const T& value() const { return std::get<T>(v_); }
  const Failure& error() const { return std::get<Failure>(v_); }

 private:
  std::variant<T, Failure> v_;
};

}  // namespace pihc
