#include "citegraph/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "citegraph/errors.hpp"
#include "citegraph/rng.hpp"

namespace citegraph {

namespace {
constexpr double kGolden = 0.6180339887498949;
constexpr std::size_t kMinFocals = 10;
}  // namespace

Folds make_splits(const std::vector<PaperKey>& focals, const SplitPlan& plan,
                  const std::map<PaperKey, std::string>& strata) {
  if (focals.size() < kMinFocals)
    throw ValidationError("splitting needs at least " + std::to_string(kMinFocals) + " focal papers, got " +
                          std::to_string(focals.size()));
  if (plan.train < 0 || plan.val < 0 || plan.test < 0 || std::abs(plan.train + plan.val + plan.test - 1.0) > 1e-9)
    throw ValidationError("split fractions must be nonnegative and sum to 1");
  std::set<PaperKey> unique(focals.begin(), focals.end());
  if (unique.size() != focals.size()) throw ValidationError("focal ids passed to make_splits repeat");

  // Canonical input order so the folds do not depend on how ids were listed.
  std::map<std::string, std::vector<PaperKey>> groups;
  for (const auto& f : unique) {
    auto it = strata.find(f);
    groups[it == strata.end() ? std::string() : it->second].push_back(f);
  }

  Rng rng(derive_seed(plan.seed, "splits"));
  // (position in [0,1), stratum rank, index within stratum, id)
  std::vector<std::tuple<double, std::size_t, std::size_t, PaperKey>> keyed;
  std::size_t rank = 0;
  for (auto& [label, ids] : groups) {
    rng.shuffle(ids);
    const double offset = rng.uniform();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      double pos = offset + static_cast<double>(i + 1) * kGolden;
      pos -= std::floor(pos);
      keyed.emplace_back(pos, rank, i, ids[i]);
    }
    ++rank;
  }
  std::sort(keyed.begin(), keyed.end());

  const std::size_t n = keyed.size();
  const auto n_train = static_cast<std::size_t>(std::llround(plan.train * static_cast<double>(n)));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(plan.val * static_cast<double>(n))));
  Folds folds;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = std::get<3>(keyed[i]);
    (i < n_train ? folds.train : i < n_train + n_val ? folds.val : folds.test).push_back(id);
  }
  return folds;
}

}  // namespace citegraph
