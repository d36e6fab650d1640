#pragma once

#include <stdexcept>
#include <string>

namespace trajpace {

// Error categories surfaced by the library.  Input-shaped problems (malformed
// trees, bad configs) are distinguished from domain facts discovered during a
// computation (violated hypotheses, exhausted search budgets) so that callers
// can map them to different exit codes.
enum class Errc {
  empty_input,
  inconsistent_root,
  prefix_conflict,
  unknown_node,
  terminal_node,
  depth_out_of_range,
  length_mismatch,
  incompatible_horizons,
  invalid_tau_spacing,
  budget_exceeded,
  invalid_config,
  invalid_model,
  empty_chart,
  unbounded_payoff,
  hypothesis_violated,
  invalid_input,
};

const char* errc_name(Errc code);

// True for errors that describe malformed input rather than a result of the
// computation itself.
bool is_input_error(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace trajpace
