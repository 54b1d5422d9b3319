#include "citegraph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "citegraph/baselines.hpp"
#include "citegraph/errors.hpp"
#include "citegraph/rng.hpp"

namespace citegraph {

void SynthParams::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("synthetic dataset: " + what); };
  if (n_focals < 20) fail("n_focals must be at least 20");
  if (min_refs < 2 || max_refs < min_refs) fail("reference counts must satisfy 2 <= min_refs <= max_refs");
  if (!(min_shared >= 0 && max_shared <= 1 && min_shared <= max_shared)) fail("shared shares must lie in [0, 1]");
  if (!(mean_degree >= 0)) fail("mean_degree must be nonnegative");
  if (!(triadic_closure >= 0 && triadic_closure <= 1)) fail("triadic_closure must lie in [0, 1]");
  if (!(isolate_prob >= 0 && isolate_prob < 1)) fail("isolate_prob must lie in [0, 1)");
  if (drift_dims == 0 || dim <= drift_dims) fail("dim must exceed drift_dims > 0");
  if (!(drift >= 0) || !(ref_noise > 0) || !(isolated_noise >= 0) || !(focal_noise >= 0) || !(topic_scale >= 0))
    fail("semantic knobs must be nonnegative (ref_noise positive)");
  if (generators.empty()) fail("at least one generator is required");
  if (std::set<std::string>(generators.begin(), generators.end()).size() != generators.size())
    fail("generator names repeat");
  if (!(hallucination_rate >= 0 && hallucination_rate < 1)) fail("hallucination_rate must lie in [0, 1)");
  if (!(all_hallucinated >= 0 && all_hallucinated <= 1)) fail("all_hallucinated must lie in [0, 1]");
  if (n_fields == 0 || subfields_per_field == 0) fail("field counts must be positive");
  if (min_year < 1800 || max_year > 2100 || max_year - min_year < 10) fail("year range must span 10 years in [1800, 2100]");
}

namespace {

std::string focal_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "F%06zu", i);
  return buf;
}

std::string ref_id(const std::string& focal, std::size_t j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "-r%03zu", j);
  return focal + buf;
}

// Role of a candidate reference in a focal's pool.
constexpr int kShared = -2, kGroundTruth = -1;  // >= 0: generator index

struct Candidate {
  int role;
  int year;
  bool isolate;
};

}  // namespace

SynthDataset synth_dataset(const SynthParams& p) {
  p.validate();
  Rng rng(derive_seed(p.seed, "synth"));
  const std::size_t G = p.generators.size();
  const std::size_t dim = p.dim;

  std::vector<std::vector<double>> field_centroid(p.n_fields), subfield_offset(p.n_fields * p.subfields_per_field);
  auto topic_vector = [&](double scale) {
    std::vector<double> v(dim, 0.0);
    for (std::size_t d = p.drift_dims; d < dim; ++d) v[d] = scale * rng.normal();
    return v;
  };
  for (auto& c : field_centroid) c = topic_vector(p.topic_scale);
  for (auto& s : subfield_offset) s = topic_vector(0.5 * p.topic_scale);
  std::vector<double> drift_dir(dim, 0.0);
  for (std::size_t d = 0; d < p.drift_dims; ++d) drift_dir[d] = 1.0 / std::sqrt(static_cast<double>(p.drift_dims));

  std::vector<PaperRecord> papers;
  CitationEdgeSet edges;
  std::vector<ReferenceList> lists;
  SynthDataset out;
  out.ref_embeddings = EmbeddingTable(dim);
  out.focal_embeddings = EmbeddingTable(dim);
  std::vector<double> vec(dim);

  for (std::size_t fi = 0; fi < p.n_focals; ++fi) {
    const std::string fid = focal_id(fi);
    const std::size_t field = rng.uniform_index(p.n_fields);
    const std::size_t sub = rng.uniform_index(p.subfields_per_field);
    const int fyear = p.min_year + 10 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(p.max_year - p.min_year - 9)));
    const std::string field_name = "field" + std::to_string(field);
    const std::string sub_name = field_name + ".sub" + std::to_string(sub);
    papers.push_back({fid, fyear, field_name, sub_name, "Synthetic focal paper " + fid, "Synthetic abstract of " + fid});

    std::vector<double> mu(dim);
    const auto& fc = field_centroid[field];
    const auto& so = subfield_offset[field * p.subfields_per_field + sub];
    std::vector<double> own = topic_vector(0.5 * p.topic_scale);
    for (std::size_t d = 0; d < dim; ++d) mu[d] = fc[d] + so[d] + own[d];

    // Pool of candidates with randomly assigned roles.
    const std::size_t n = p.min_refs + rng.uniform_index(p.max_refs - p.min_refs + 1);
    std::size_t m = static_cast<std::size_t>(std::llround(rng.uniform(p.min_shared, p.max_shared) * static_cast<double>(n)));
    m = std::min(m, n);
    std::vector<int> roles;
    for (std::size_t j = 0; j < m; ++j) roles.push_back(kShared);
    for (std::size_t j = m; j < n; ++j) {
      roles.push_back(kGroundTruth);
      for (std::size_t g = 0; g < G; ++g) roles.push_back(static_cast<int>(g));
    }
    rng.shuffle(roles);
    const std::size_t U = roles.size();
    std::vector<int> years(U);
    for (auto& y : years)
      y = std::max(p.min_year, fyear - 1 - static_cast<int>(std::floor(-6.0 * std::log(1.0 - rng.uniform()))));
    std::sort(years.begin(), years.end());
    std::vector<Candidate> cand(U);
    for (std::size_t j = 0; j < U; ++j) cand[j] = {roles[j], years[j], rng.bernoulli(p.isolate_prob)};

    // Arrival process in publication order: hub-biased first link, further
    // links close triangles with the configured probability.
    std::vector<std::vector<std::size_t>> adj(U);
    const double links_per_node =
        p.mean_degree * static_cast<double>(U) / static_cast<double>(n) / 2.0 / (1.0 - p.isolate_prob);
    std::vector<std::size_t> active;
    for (std::size_t t = 0; t < U; ++t) {
      if (cand[t].isolate) continue;
      if (!active.empty()) {
        std::size_t k = static_cast<std::size_t>(std::floor(links_per_node));
        if (rng.bernoulli(links_per_node - std::floor(links_per_node))) ++k;
        k = std::min(k, active.size());
        std::vector<std::size_t> chosen;
        auto linked = [&](std::size_t v) { return std::find(chosen.begin(), chosen.end(), v) != chosen.end(); };
        auto preferential = [&]() -> std::size_t {
          double total = 0;
          for (auto v : active)
            if (!linked(v)) total += static_cast<double>(adj[v].size()) + 1.0;
          double r = rng.uniform() * total;
          for (auto v : active) {
            if (linked(v)) continue;
            r -= static_cast<double>(adj[v].size()) + 1.0;
            if (r < 0) return v;
          }
          for (auto it = active.rbegin(); it != active.rend(); ++it)
            if (!linked(*it)) return *it;
          return active.back();
        };
        while (chosen.size() < k) {
          std::size_t target = SIZE_MAX;
          if (!chosen.empty() && rng.bernoulli(p.triadic_closure)) {
            std::vector<std::size_t> options;
            for (auto c : chosen)
              for (auto nb : adj[c])
                if (!linked(nb) && std::find(options.begin(), options.end(), nb) == options.end()) options.push_back(nb);
            std::sort(options.begin(), options.end());
            if (!options.empty()) target = options[rng.uniform_index(options.size())];
          }
          if (target == SIZE_MAX) target = preferential();
          chosen.push_back(target);
        }
        for (auto c : chosen) {
          adj[t].push_back(c);
          adj[c].push_back(t);
        }
      }
      active.push_back(t);
    }

    std::vector<std::string> ids(U);
    for (std::size_t j = 0; j < U; ++j) {
      ids[j] = ref_id(fid, j);
      const bool same_sub = rng.bernoulli(0.6);
      const std::size_t rsub = same_sub ? sub : rng.uniform_index(p.subfields_per_field);
      papers.push_back({ids[j], cand[j].year, field_name, field_name + ".sub" + std::to_string(rsub),
                        "Synthetic reference " + ids[j], std::nullopt});
    }
    for (std::size_t j = 0; j < U; ++j)
      for (auto c : adj[j])
        if (c < j) edges.add(ids[j], ids[c]);

    ReferenceList gt{fid, Source::ground_truth(), {}};
    for (std::size_t j = 0; j < U; ++j)
      if (cand[j].role == kShared || cand[j].role == kGroundTruth) {
        gt.refs.push_back(ids[j]);
        edges.add(fid, ids[j]);
      }
    lists.push_back(gt);

    // Generated lists; a reference is isolated within a list when none of its
    // links reach another member of that list.
    std::vector<double> noise_scale(U, 1.0);
    std::vector<char> gen_only(U, 0);
    for (std::size_t g = 0; g < G; ++g) {
      const bool wipe = rng.bernoulli(p.all_hallucinated);
      ReferenceList gen{fid, Source::generated(p.generators[g]), {}};
      std::vector<char> member(U, 0);
      std::size_t phantom = 0;
      for (std::size_t j = 0; j < U; ++j) {
        if (cand[j].role != kShared && cand[j].role != static_cast<int>(g)) continue;
        if (wipe || (cand[j].role >= 0 && rng.bernoulli(p.hallucination_rate))) {
          gen.refs.push_back(fid + "-" + p.generators[g] + "-h" + std::to_string(phantom++));
          continue;
        }
        gen.refs.push_back(ids[j]);
        member[j] = 1;
      }
      for (std::size_t j = 0; j < U; ++j) {
        if (cand[j].role != static_cast<int>(g)) continue;
        gen_only[j] = 1;
        bool isolated = true;
        for (auto c : adj[j])
          if (member[c]) isolated = false;
        if (isolated) noise_scale[j] = 1.0 + p.isolated_noise * p.drift;
      }
      lists.push_back(std::move(gen));
    }

    for (std::size_t j = 0; j < U; ++j) {
      for (std::size_t d = 0; d < dim; ++d) {
        double v = mu[d] + p.ref_noise * noise_scale[j] * rng.normal();
        if (gen_only[j]) v += p.drift * drift_dir[d];
        vec[d] = v;
      }
      out.ref_embeddings.set(ids[j], vec);
    }
    for (std::size_t d = 0; d < dim; ++d) vec[d] = mu[d] + p.ref_noise * rng.normal();
    out.ref_embeddings.set(fid, vec);
    for (std::size_t d = 0; d < dim; ++d) vec[d] = mu[d] + p.focal_noise * rng.normal();
    out.focal_embeddings.set(fid, vec);
  }

  out.dataset = Dataset(std::move(papers), std::move(edges), std::move(lists));
  if (p.with_baselines) {
    std::vector<ReferenceList> baselines;
    for (auto kind : {BaselineKind::FieldShuffle, BaselineKind::SubfieldShuffle, BaselineKind::TemporalFieldShuffle})
      for (auto& [focal, list] : field_shuffle(out.dataset, kind, derive_seed(p.seed, "synth/baselines")))
        baselines.push_back(std::move(list));
    out.dataset.put_lists(std::move(baselines));
  }
  return out;
}

}  // namespace citegraph
