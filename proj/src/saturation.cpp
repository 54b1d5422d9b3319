#include "citegraph/saturation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "citegraph/csv.hpp"
#include "citegraph/errors.hpp"
#include "citegraph/rng.hpp"

namespace citegraph {

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ValidationError("wasserstein1 needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size(), m = b.size();
  // Walk the merged breakpoints i/n and j/m with integer arithmetic; between
  // two breakpoints both quantile functions are constant.
  double total = 0;
  std::size_t i = 0, j = 0;
  std::size_t t = 0;  // current position in units of 1/(n*m)
  while (i < n && j < m) {
    const std::size_t next_a = (i + 1) * m, next_b = (j + 1) * n;
    const std::size_t next = std::min(next_a, next_b);
    total += static_cast<double>(next - t) * std::abs(a[i] - b[j]);
    t = next;
    if (next_a == next) ++i;
    if (next_b == next) ++j;
  }
  return total / (static_cast<double>(n) * static_cast<double>(m));
}

std::vector<double> default_fractions() {
  std::vector<double> f;
  for (int k = 2; k <= 10; ++k) f.push_back(k / 10.0);
  return f;
}

std::vector<SaturationPoint> saturation_curve(const std::vector<double>& runs, const std::vector<double>& fractions,
                                              int n_perms, std::uint64_t seed) {
  if (runs.size() < 5) throw ValidationError("saturation analysis needs at least 5 runs");
  if (n_perms < 1) throw ValidationError("n_perms must be at least 1");
  if (fractions.size() < 2) throw ValidationError("saturation analysis needs at least two fractions");
  for (std::size_t k = 0; k < fractions.size(); ++k)
    if (!(fractions[k] > 0 && fractions[k] <= 1) || (k && fractions[k] <= fractions[k - 1]))
      throw ValidationError("fractions must be increasing within (0, 1]");

  const auto n = static_cast<double>(runs.size());
  std::vector<std::size_t> counts;
  for (double f : fractions)
    counts.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(f * n - 1e-9))));

  std::vector<double> sums(fractions.size() - 1, 0.0);
  Rng rng(derive_seed(seed, "saturation"));
  std::vector<double> order(runs);
  for (int p = 0; p < n_perms; ++p) {
    rng.shuffle(order);
    for (std::size_t k = 1; k < fractions.size(); ++k) {
      std::vector<double> cur(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(counts[k]));
      std::vector<double> prev(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(counts[k - 1]));
      sums[k - 1] += wasserstein1(std::move(cur), std::move(prev));
    }
  }
  std::vector<SaturationPoint> curve;
  for (std::size_t k = 1; k < fractions.size(); ++k) curve.push_back({fractions[k], sums[k - 1] / n_perms});
  return curve;
}

void write_saturation_csv(const std::filesystem::path& path, const std::vector<SaturationPoint>& curve) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << "fraction,w1\n";
  for (const auto& p : curve) out << format_number(p.fraction) << ',' << format_number(p.w1) << '\n';
}

}  // namespace citegraph
