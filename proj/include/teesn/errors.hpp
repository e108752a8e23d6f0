#pragma once
#include <stdexcept>
#include <string>

namespace teesn {

// Missing model/data file or broken artifact. CLI maps this to exit code 2.
struct artifact_error : std::runtime_error {
  explicit artifact_error(const std::string& m) : std::runtime_error(m) {}
};

// Numeric failure (divergence, singular solve, non-convergence). Exit code 3.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace teesn
