#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "csmaopt/experiments.hpp"
#include "csmaopt/lp.hpp"
#include "csmaopt/simulator.hpp"

namespace csmaopt {

/// `0b...`, `0x...` or decimal.
SubnetworkMask parse_mask(std::string_view text);

/// Comma- or whitespace-separated reals; `#` starts a comment.
std::vector<double> parse_vector(std::string_view text);

/// Inline list if `arg` parses as one, otherwise the contents of file `arg`.
std::vector<double> read_vector_arg(const std::string& arg);

nlohmann::json to_json(const LpSolution& sol);
nlohmann::json to_json(const SimResult& res, bool include_queue = true);
nlohmann::json to_json(const PooledResult& pooled);
nlohmann::json to_json(const SettingResult& result);

}  // namespace csmaopt
