#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "citegraph/data_model.hpp"

namespace citegraph {

struct SynthParams {
  std::size_t n_focals = 2000;
  std::uint64_t seed = 0;

  // Topology. Every focal has its own pool of candidate references; ground
  // truth and each generator draw their lists from it with identical rules.
  std::size_t min_refs = 12, max_refs = 30;
  double min_shared = 0.25, max_shared = 0.55;  // share of a list common to both sides
  double mean_degree = 3.0;                     // expected reference-reference degree within one list
  double triadic_closure = 0.7;                 // chance that a further link closes a triangle
  double isolate_prob = 0.12;                   // chance that a candidate cites nothing

  // Semantics.
  std::size_t dim = 32;
  double drift = 0.8;           // shift of generated-only references along the drift direction
  double ref_noise = 0.5;       // per-coordinate noise of reference vectors
  double isolated_noise = 1.5;  // extra noise factor of isolated generated references, scaled by drift
  double focal_noise = 0.3;
  double topic_scale = 1.0;
  std::size_t drift_dims = 4;   // leading coordinates that carry the drift and no topic signal

  // Generators and their failure modes.
  std::vector<std::string> generators = {"gen-a", "gen-b"};
  double hallucination_rate = 0.08;  // generated references without a paper record
  double all_hallucinated = 0.05;    // focals whose generated list is entirely unresolvable

  std::size_t n_fields = 4, subfields_per_field = 5;
  int min_year = 1990, max_year = 2022;

  // Baseline lists of every kind are added when set.
  bool with_baselines = true;

  void validate() const;
};

struct SynthDataset {
  Dataset dataset;
  EmbeddingTable ref_embeddings;    // title vectors of every paper
  EmbeddingTable focal_embeddings;  // title+abstract vectors of focal papers
};

SynthDataset synth_dataset(const SynthParams& params);

}  // namespace citegraph
