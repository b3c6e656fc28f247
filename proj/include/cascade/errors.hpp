#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

// Invalid configuration: malformed documents, inconsistent vocabularies,
// out-of-range parameters. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two artifacts that must agree (trace vs. spec, paired corpora) do not.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A requested construction (e.g. a planted accuracy profile) is not
// realisable on the given corpus.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A stage model failed while producing an output (remote timeouts,
// malformed responses, arity mismatches).
class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Objective evaluation failed during an attack phase.
class AttackError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cascade
