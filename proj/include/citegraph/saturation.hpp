#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace citegraph {

// Exact 1-D Wasserstein-1 distance between two empirical distributions of
// possibly different sizes (area between the quantile functions).
double wasserstein1(std::vector<double> a, std::vector<double> b);

// {0.2, 0.3, ..., 1.0}
std::vector<double> default_fractions();

struct SaturationPoint {
  double fraction = 0;
  double w1 = 0;
};

// For each fraction after the first, the mean over n_perms random run orders
// of W1 between the first ceil(f * n) runs and the first ceil(f_prev * n).
std::vector<SaturationPoint> saturation_curve(const std::vector<double>& runs, const std::vector<double>& fractions,
                                              int n_perms, std::uint64_t seed);

void write_saturation_csv(const std::filesystem::path& path, const std::vector<SaturationPoint>& curve);

}  // namespace citegraph
