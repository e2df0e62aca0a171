#pragma once

#include <optional>
#include <string>

#include "fracsing/green_operator.hpp"

namespace fracsing {

/// Binary cache of the assembled kernel core keyed by (N, s, grading), with a
/// versioned header. Returns the cache file path for a key.
std::string kernel_cache_path(const std::string& dir, int n, double s, const std::string& grading);

/// Load an operator from a cache file if it exists and matches the key.
std::optional<GreenOperator> try_load_kernel(const std::string& path, const Grid& grid, double s);

void save_kernel(const std::string& path, const GreenOperator& op);

/// Assemble with caching: loads from `cache_dir` when possible (unless
/// no_cache), else assembles and stores.
GreenOperator load_or_assemble(const Grid& grid, double s, const AssembleOptions& opts,
                               const std::string& cache_dir, bool no_cache);

}  // namespace fracsing
