#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "io.hpp"

namespace dlh::io {

/// Flags shared by every subcommand. The walk spec is parsed before dispatch.
struct CommonConfig {
  std::string walk_path;
  std::optional<std::uint64_t> seed;
  Side side = Side::One;
  unsigned threads = 1;
};

struct AnalyzeConfig {
  double grid_min = -2.0;
  double grid_max = 2.0;
  double grid_step = 0.25;
};

struct CoeffsConfig {
  std::size_t truncation = 200;
  double tolerance = 1e-8;
  double tail_tolerance = 1e-6;
};

struct KernelConfig {
  std::string x = R"({"hor":0})";
  std::string xi = R"({"anchor":{"hor":0}})";
  std::size_t truncation = 200;
  double tolerance = 1e-10;  // harmonicity at x
};

struct VerifyConfig {
  int radius = 3;
  int deep = 50;
  std::int64_t extent = 12;
  std::size_t truncation = 200;
  double tolerance = 1e-10;
};

struct SimulateConfig {
  std::string mode = "coefficients";  // trajectory | coefficients | transience
  std::uint64_t runs = 100'000;
  std::uint64_t steps = 10'000;
  std::uint64_t window = 50;
  std::int64_t depth_margin = 30;
  std::int64_t max_j = 10;
  std::size_t truncation = 200;
  double sigmas = 4.0;
  std::string x0;  // empty: the root
};

struct MartinConfig {
  std::string x = R"({"hor":0})";
  std::string xi = R"({"anchor":{"hor":0}})";
  std::vector<std::int64_t> depths = {4, 6, 8, 10};
  std::uint64_t n_max = 300;
  std::size_t truncation = 200;
  double tolerance = 0.05;
};

struct ClassifyConfig {
  std::size_t truncation = 200;
  double tolerance = 1e-8;
};

/// Each command returns a finished report; Report::passed() decides exit 0/1.
/// Library errors propagate as dlh::Error.
Report cmd_analyze(const WalkSpec& spec, const CommonConfig& common, const AnalyzeConfig& cfg);
Report cmd_coeffs(const WalkSpec& spec, const CommonConfig& common, const CoeffsConfig& cfg);
Report cmd_kernel(const WalkSpec& spec, const CommonConfig& common, const KernelConfig& cfg);
Report cmd_verify(const WalkSpec& spec, const CommonConfig& common, const VerifyConfig& cfg);
Report cmd_simulate(const WalkSpec& spec, const CommonConfig& common, const SimulateConfig& cfg);
Report cmd_martin(const WalkSpec& spec, const CommonConfig& common, const MartinConfig& cfg);
Report cmd_classify(const WalkSpec& spec, const CommonConfig& common, const ClassifyConfig& cfg);

}  // namespace dlh::io
