#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "citegraph/data_model.hpp"

namespace citegraph {

struct SplitPlan {
  double train = 0.70, val = 0.15, test = 0.15;
  std::uint64_t seed = 0;
};

// Folds hold focal ids; every graph of a focal follows its focal.
struct Folds {
  std::vector<PaperKey> train, val, test;
};

// Stratified when strata is given (focal id -> stratum label). Each stratum
// is shuffled and spread over the unit interval with a golden-ratio sequence
// so every fold receives its share of each stratum; the merged order is then
// cut at round(train * n) and round((train + val) * n).
Folds make_splits(const std::vector<PaperKey>& focals, const SplitPlan& plan,
                  const std::map<PaperKey, std::string>& strata = {});

}  // namespace citegraph
