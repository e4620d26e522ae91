#pragma once

#include <ostream>
#include <string>

#include "conquer/domain.hpp"

namespace conquer::cli {

/// Entry point for the `conquer` binary, callable in-process by tests.
/// Exit codes: 0 success (per-question failures included), 1 hard failure,
/// 2 usage or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// `<variant>-<12 hex>`: digest of the config, the dataset digest and a
/// stamp (wall-clock time, or the seed in mock mode).
std::string make_run_id(const RunConfig& cfg, const std::string& dataset_digest, const std::string& stamp);

}  // namespace conquer::cli
