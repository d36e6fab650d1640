#include "trajpace/errors.hpp"

namespace trajpace {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::empty_input: return "EmptyInput";
    case Errc::inconsistent_root: return "InconsistentRoot";
    case Errc::prefix_conflict: return "PrefixConflict";
    case Errc::unknown_node: return "UnknownNode";
    case Errc::terminal_node: return "TerminalNode";
    case Errc::depth_out_of_range: return "DepthOutOfRange";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::incompatible_horizons: return "IncompatibleHorizons";
    case Errc::invalid_tau_spacing: return "InvalidTauSpacing";
    case Errc::budget_exceeded: return "BudgetExceeded";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::invalid_model: return "InvalidModel";
    case Errc::empty_chart: return "EmptyChart";
    case Errc::unbounded_payoff: return "UnboundedPayoff";
    case Errc::hypothesis_violated: return "HypothesisViolated";
    case Errc::invalid_input: return "InvalidInput";
  }
  return "UnknownError";
}

bool is_input_error(Errc code) {
  switch (code) {
    case Errc::empty_input:
    case Errc::inconsistent_root:
    case Errc::prefix_conflict:
    case Errc::unknown_node:
    case Errc::depth_out_of_range:
    case Errc::length_mismatch:
    case Errc::invalid_config:
    case Errc::invalid_model:
    case Errc::empty_chart:
    case Errc::invalid_input:
      return true;
    default:
      return false;
  }
}

}  // namespace trajpace
