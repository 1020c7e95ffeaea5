#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "clusterlab/length_fit.hpp"

namespace clusterlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitUsage = 64;

inline constexpr double kValidationTolerance = 0.08;

/// "start:stop:step", inclusive of stop up to rounding.
std::vector<double> parse_grid(const std::string& text);

struct Figure2Config {
  std::vector<double> b_grid;
  int n = 12;
  int l_max = 40;  // analytic correlation series
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
  int anneal_steps = 200;
  int anneal_proposals = 50;
};

struct Figure2Point {
  double b = 0.0;
  std::optional<LengthEstimate> correlation;
  std::optional<LengthEstimate> entanglement;
  std::vector<int> distances;  // L = distance + 1
  std::vector<double> e_loc;
  std::string error;
};

std::vector<Figure2Point> figure2(const Figure2Config& cfg, std::ostream* log = nullptr);

void write_correlation_csv(std::ostream& out, const std::vector<Figure2Point>& pts);
void write_entanglement_csv(std::ostream& out, const std::vector<Figure2Point>& pts);
void write_sweep_csv(std::ostream& out, const std::vector<Figure2Point>& pts);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace clusterlab::cli
