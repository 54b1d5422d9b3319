#include "citegraph/baselines.hpp"

#include <algorithm>
#include <climits>
#include <numeric>
#include <unordered_map>

#include "citegraph/errors.hpp"
#include "citegraph/rng.hpp"

namespace citegraph {

namespace {

// Availability counts over pool positions with order-statistic lookup.
class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {
    for (std::size_t i = 1; i <= n; ++i) {
      tree_[i] += 1;
      std::size_t parent = i + (i & (~i + 1));
      if (parent <= n) tree_[parent] += tree_[i];
    }
  }

  void add(std::size_t pos, int delta) {
    for (std::size_t i = pos + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

  // Number of available positions in [0, n).
  int prefix(std::size_t n) const {
    int s = 0;
    for (std::size_t i = n; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

  // Position of the k-th (0-based) available entry.
  std::size_t kth(int k) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 < tree_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      if (pos + step < tree_.size() && tree_[pos + step] <= k) {
        pos += step;
        k -= tree_[pos];
      }
    }
    return pos;
  }

 private:
  std::vector<int> tree_;
};

constexpr int kUnknownYear = INT_MIN;

}  // namespace

std::vector<PaperKey> assign_stratum(const FieldStratum& stratum, std::uint64_t seed, const ShuffleOptions& options) {
  const std::size_t n_slots = stratum.members.size();
  if (stratum.pool.size() != n_slots)
    throw ValidationError("stratum '" + stratum.key + "' has " + std::to_string(n_slots) + " slots but " +
                          std::to_string(stratum.pool.size()) + " pool items");
  if (n_slots == 0) return {};

  // Intern keys so conflict checks compare integers.
  std::unordered_map<PaperKey, int> key_id;
  auto intern = [&](const PaperKey& k) {
    auto [it, inserted] = key_id.emplace(k, static_cast<int>(key_id.size()));
    return it->second;
  };

  // Pool sorted by year; unknown years come first and fit every slot.
  std::vector<std::size_t> pool_order(n_slots);
  std::iota(pool_order.begin(), pool_order.end(), 0);
  std::stable_sort(pool_order.begin(), pool_order.end(), [&](std::size_t a, std::size_t b) {
    return stratum.pool[a].year.value_or(kUnknownYear) < stratum.pool[b].year.value_or(kUnknownYear);
  });
  std::vector<int> pos_year(n_slots), pos_key(n_slots);
  for (std::size_t p = 0; p < n_slots; ++p) {
    const auto& item = stratum.pool[pool_order[p]];
    pos_year[p] = item.year.value_or(kUnknownYear);
    pos_key[p] = intern(item.key);
  }

  std::unordered_map<PaperKey, int> focal_index;
  std::vector<int> slot_focal(n_slots), focal_self_key;
  for (std::size_t s = 0; s < n_slots; ++s) {
    const auto& f = stratum.members[s].focal_id;
    auto [it, inserted] = focal_index.emplace(f, static_cast<int>(focal_index.size()));
    if (inserted) focal_self_key.push_back(intern(f));
    slot_focal[s] = it->second;
  }
  std::vector<std::vector<int>> focal_keys(focal_index.size());

  // Slots in ascending ceiling order; ties keep member order.
  std::vector<std::size_t> slot_order(n_slots);
  std::iota(slot_order.begin(), slot_order.end(), 0);
  auto ceiling = [&](std::size_t s) { return stratum.members[s].year_ceiling.value_or(INT_MAX); };
  std::stable_sort(slot_order.begin(), slot_order.end(),
                   [&](std::size_t a, std::size_t b) { return ceiling(a) < ceiling(b); });
  std::vector<std::size_t> admissible(n_slots);
  for (std::size_t d = 0; d < n_slots; ++d) {
    int c = ceiling(slot_order[d]);
    admissible[d] = static_cast<std::size_t>(std::upper_bound(pos_year.begin(), pos_year.end(), c) - pos_year.begin());
    // Nested admissible sets: feasible on years alone iff every prefix of
    // slots has at least as many admissible items.
    if (admissible[d] < d + 1) throw StratumInfeasibleError(stratum.key);
  }

  Fenwick avail(n_slots);
  std::vector<char> available(n_slots, 1);
  std::vector<int> chosen(n_slots, -1);
  std::vector<std::vector<int>> tried(n_slots);  // keys rejected at each depth
  Rng rng(seed);

  auto conflicts = [&](int focal, int key) {
    if (options.exclude_self && focal_self_key[focal] == key) return true;
    const auto& ks = focal_keys[focal];
    return std::find(ks.begin(), ks.end(), key) != ks.end();
  };
  auto was_tried = [&](std::size_t depth, int key) {
    const auto& t = tried[depth];
    return std::find(t.begin(), t.end(), key) != t.end();
  };

  auto choose = [&](std::size_t depth) -> int {
    const std::size_t prefix = admissible[depth];
    const int count = avail.prefix(prefix);
    if (count == 0) return -1;
    const int focal = slot_focal[slot_order[depth]];
    for (int attempt = 0; attempt < 16; ++attempt) {
      auto pos = avail.kth(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(count))));
      int key = pos_key[pos];
      if (!conflicts(focal, key) && !was_tried(depth, key)) return static_cast<int>(pos);
    }
    std::vector<int> candidates;
    for (std::size_t p = 0; p < prefix; ++p)
      if (available[p] && !conflicts(focal, pos_key[p]) && !was_tried(depth, pos_key[p]))
        candidates.push_back(static_cast<int>(p));
    if (candidates.empty()) return -1;
    return candidates[rng.uniform_index(candidates.size())];
  };

  const std::size_t max_steps = options.max_steps ? options.max_steps : 64 * n_slots + 100000;
  std::size_t steps = 0;
  std::size_t depth = 0;
  while (depth < n_slots) {
    if (++steps > max_steps) throw StratumInfeasibleError(stratum.key);
    const int focal = slot_focal[slot_order[depth]];
    int pos = choose(depth);
    if (pos >= 0) {
      chosen[depth] = pos;
      available[pos] = 0;
      avail.add(static_cast<std::size_t>(pos), -1);
      focal_keys[focal].push_back(pos_key[pos]);
      ++depth;
      if (depth < n_slots) tried[depth].clear();
      continue;
    }
    tried[depth].clear();
    if (depth == 0) throw StratumInfeasibleError(stratum.key);
    --depth;
    const int prev = chosen[depth];
    const int prev_focal = slot_focal[slot_order[depth]];
    auto& ks = focal_keys[prev_focal];
    ks.erase(std::find(ks.begin(), ks.end(), pos_key[prev]));
    available[prev] = 1;
    avail.add(static_cast<std::size_t>(prev), +1);
    tried[depth].push_back(pos_key[prev]);
    chosen[depth] = -1;
  }

  std::vector<PaperKey> out(n_slots);
  for (std::size_t d = 0; d < n_slots; ++d) out[slot_order[d]] = stratum.pool[pool_order[chosen[d]]].key;
  return out;
}

std::vector<PaperKey> temporal_assignment(const FieldStratum& stratum, std::uint64_t seed,
                                          const ShuffleOptions& options) {
  for (const auto& m : stratum.members)
    if (!m.year_ceiling) throw ValidationError("temporal stratum '" + stratum.key + "' has a slot without a year ceiling");
  return assign_stratum(stratum, seed, options);
}

std::vector<FieldStratum> build_strata(const Dataset& dataset, BaselineKind kind) {
  std::map<std::string, FieldStratum> strata;
  auto add_focal = [&](const std::string& key, const ReferenceList& list, const PaperRecord& focal) {
    auto& s = strata[key];
    s.key = key;
    for (std::size_t j = 0; j < list.refs.size(); ++j) {
      std::optional<int> ceiling;
      if (kind == BaselineKind::TemporalFieldShuffle) ceiling = focal.year;
      s.members.push_back({list.focal_id, j, ceiling});
      const PaperRecord* r = dataset.find(list.refs[j]);
      s.pool.push_back({list.refs[j], r ? std::optional<int>(r->year) : std::nullopt});
    }
  };

  std::map<std::string, std::vector<const ReferenceList*>> subfield_groups;
  for (const auto& focal : dataset.focals()) {
    const ReferenceList* list = dataset.list_for(focal, Source::ground_truth());
    const PaperRecord* rec = dataset.find(focal);
    if (kind == BaselineKind::SubfieldShuffle) {
      subfield_groups[rec->top_field + "/" + rec->subfield].push_back(list);
    } else {
      add_focal(rec->top_field, *list, *rec);
    }
  }
  if (kind == BaselineKind::SubfieldShuffle) {
    for (const auto& [key, lists] : subfield_groups) {
      std::size_t pool = 0;
      for (const auto* l : lists) pool += l->refs.size();
      for (const auto* l : lists) {
        const PaperRecord* rec = dataset.find(l->focal_id);
        add_focal(pool >= kMinSubfieldPool ? key : rec->top_field + "/*", *l, *rec);
      }
    }
  }
  std::vector<FieldStratum> out;
  out.reserve(strata.size());
  for (auto& [key, s] : strata) out.push_back(std::move(s));
  return out;
}

std::map<PaperKey, ReferenceList> field_shuffle(const Dataset& dataset, BaselineKind kind, std::uint64_t seed,
                                                const ShuffleOptions& options) {
  std::map<PaperKey, ReferenceList> out;
  const std::string purpose = "baseline/" + std::string(to_string(kind)) + "/";
  for (const auto& stratum : build_strata(dataset, kind)) {
    auto assigned = assign_stratum(stratum, derive_seed(seed, purpose + stratum.key), options);
    for (std::size_t i = 0; i < stratum.members.size(); ++i) {
      const auto& m = stratum.members[i];
      auto& list = out[m.focal_id];
      list.focal_id = m.focal_id;
      list.source = Source::baseline(kind);
      if (list.refs.size() <= m.slot) list.refs.resize(m.slot + 1);
      list.refs[m.slot] = assigned[i];
    }
  }
  return out;
}

TemporalCounts count_temporal_order(const Dataset& dataset, const std::vector<ReferenceList>& lists) {
  TemporalCounts c;
  for (const auto& l : lists) {
    const PaperRecord* f = dataset.find(l.focal_id);
    if (!f) continue;
    for (const auto& r : l.refs) {
      const PaperRecord* rec = dataset.find(r);
      if (!rec) continue;
      ++c.pairs;
      if (rec->year <= f->year) ++c.preserved;
    }
  }
  return c;
}

}  // namespace citegraph
