#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "citegraph/data_model.hpp"

namespace citegraph {

// Minimum pool size for a subfield stratum; smaller subfields fall back to a
// residual stratum of their top field.
inline constexpr std::size_t kMinSubfieldPool = 30;

struct StratumMember {
  PaperKey focal_id;
  std::size_t slot = 0;
  // References admitted to this slot must be published no later than this.
  std::optional<int> year_ceiling;
};

struct PoolItem {
  PaperKey key;
  // Unknown for references without a paper record; such items fit any slot.
  std::optional<int> year;
};

// One reference slot per member; the pool holds the original references of
// all members, so |members| == |pool|.
struct FieldStratum {
  std::string key;
  std::vector<StratumMember> members;
  std::vector<PoolItem> pool;
};

struct ShuffleOptions {
  // Forbid assigning a focal paper to itself.
  bool exclude_self = true;
  // Upper bound on search steps per stratum before declaring it infeasible.
  std::size_t max_steps = 0;  // 0: 64 * slots + 100000
};

// Groups ground-truth slots into strata for the given kind.
std::vector<FieldStratum> build_strata(const Dataset& dataset, BaselineKind kind);

// Assigns one pool item to every member. Slots are processed in ascending
// year-ceiling order, each drawing uniformly among the remaining admissible
// items, backtracking when a slot has no admissible item. A member never
// receives its own focal id (when excluded) or the same key twice.
// Returns the assigned key per member, aligned with stratum.members.
std::vector<PaperKey> assign_stratum(const FieldStratum& stratum, std::uint64_t seed,
                                     const ShuffleOptions& options = {});

// assign_stratum with year ceilings enforced; throws StratumInfeasibleError
// when no valid assignment exists.
std::vector<PaperKey> temporal_assignment(const FieldStratum& stratum, std::uint64_t seed,
                                          const ShuffleOptions& options = {});

// Permutes ground-truth references within strata and re-attaches them to
// their focal papers. Keyed by focal id.
std::map<PaperKey, ReferenceList> field_shuffle(const Dataset& dataset, BaselineKind kind, std::uint64_t seed,
                                                const ShuffleOptions& options = {});

struct TemporalCounts {
  std::size_t pairs = 0;       // pairs with both years known
  std::size_t preserved = 0;   // year(ref) <= year(focal)
  double preserved_fraction() const { return pairs ? double(preserved) / double(pairs) : 1.0; }
};

// Brute-force count over every focal-reference pair of the lists.
TemporalCounts count_temporal_order(const Dataset& dataset, const std::vector<ReferenceList>& lists);

}  // namespace citegraph
