#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace citegraph {

using PaperKey = std::string;

struct PaperRecord {
  PaperKey id;
  int year = 0;
  std::string top_field;
  std::string subfield;
  std::string title;
  std::optional<std::string> abstract_text;

  bool operator==(const PaperRecord&) const = default;
};

enum class BaselineKind { FieldShuffle, SubfieldShuffle, TemporalFieldShuffle };

std::string_view to_string(BaselineKind kind);
// Accepts "field", "subfield" and "temporal".
BaselineKind parse_baseline_kind(std::string_view text);

// Where a reference list (and the graph built from it) came from.
class Source {
 public:
  enum class Kind { GroundTruth, Generated, Baseline };

  static Source ground_truth() { return Source(Kind::GroundTruth, {}, BaselineKind::FieldShuffle); }
  static Source generated(std::string generator) {
    return Source(Kind::Generated, std::move(generator), BaselineKind::FieldShuffle);
  }
  static Source baseline(BaselineKind kind) { return Source(Kind::Baseline, {}, kind); }
  // "ground_truth" | "generated:<name>" | "baseline:<kind>"
  static Source parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  const std::string& generator() const noexcept { return generator_; }
  BaselineKind baseline_kind() const noexcept { return baseline_; }
  std::string to_string() const;

  bool operator==(const Source& other) const { return to_string() == other.to_string(); }
  auto operator<=>(const Source& other) const { return to_string() <=> other.to_string(); }

 private:
  Source(Kind kind, std::string generator, BaselineKind baseline)
      : kind_(kind), generator_(std::move(generator)), baseline_(baseline) {}

  Kind kind_;
  std::string generator_;
  BaselineKind baseline_;
};

using Provenance = Source;

struct ReferenceList {
  PaperKey focal_id;
  Source source = Source::ground_truth();
  std::vector<PaperKey> refs;

  bool operator==(const ReferenceList&) const = default;
};

// Throws ValidationError when refs is empty, contains the focal, or repeats a key.
void validate(const ReferenceList& list);

// Directed citation pairs with set semantics. An undirected neighbor index is
// kept alongside for graph construction.
class CitationEdgeSet {
 public:
  CitationEdgeSet() = default;

  // Returns false if the pair was already present. Self pairs are rejected.
  bool add(const PaperKey& citing, const PaperKey& cited);
  bool contains(const PaperKey& citing, const PaperKey& cited) const;
  bool connected(const PaperKey& a, const PaperKey& b) const;
  // Undirected neighbors of a key; empty when the key takes part in no edge.
  std::span<const PaperKey> neighbors(const PaperKey& key) const;

  std::size_t size() const noexcept { return edges_.size(); }
  const std::vector<std::pair<PaperKey, PaperKey>>& edges() const noexcept { return edges_; }

  bool operator==(const CitationEdgeSet& other) const { return edges_ == other.edges_; }

 private:
  std::vector<std::pair<PaperKey, PaperKey>> edges_;
  std::unordered_map<PaperKey, std::vector<PaperKey>> out_;
  std::unordered_map<PaperKey, std::vector<PaperKey>> undirected_;
};

// Dense vectors keyed by paper id, uniform dimension, finite entries.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool contains(const PaperKey& id) const { return index_.count(id) != 0; }
  // Empty span when the id is absent.
  std::span<const double> get(const PaperKey& id) const;
  const std::vector<PaperKey>& ids() const noexcept { return ids_; }

  // Inserts or replaces. Throws DimensionMismatchError / ValidationError.
  void set(const PaperKey& id, std::span<const double> vec);

  bool operator==(const EmbeddingTable& other) const;

 private:
  std::size_t dim_;
  std::vector<PaperKey> ids_;
  std::vector<double> data_;
  std::unordered_map<PaperKey, std::size_t> index_;
};

struct DatasetCounts {
  std::size_t papers = 0;
  std::size_t edges = 0;
  std::size_t lists = 0;
  bool operator==(const DatasetCounts&) const = default;
};

class Dataset {
 public:
  Dataset() = default;

  // Validates invariants and builds indexes. Throws on duplicate ids or
  // unresolved focal papers.
  Dataset(std::vector<PaperRecord> papers, CitationEdgeSet edges, std::vector<ReferenceList> lists);

  const std::vector<PaperRecord>& papers() const noexcept { return papers_; }
  const CitationEdgeSet& edges() const noexcept { return edges_; }
  const std::vector<ReferenceList>& lists() const noexcept { return lists_; }

  const PaperRecord* find(const PaperKey& id) const;
  bool resolvable(const PaperKey& id) const { return find(id) != nullptr; }
  // Reference keys with no paper record, sorted.
  const std::vector<PaperKey>& unresolved_refs() const noexcept { return unresolved_; }
  // Null when the focal has no list of that source.
  const ReferenceList* list_for(const PaperKey& focal, const Source& source) const;
  // Focal ids that own a ground-truth list, sorted.
  std::vector<PaperKey> focals() const;
  // Names of every generator that has at least one list, sorted.
  std::vector<std::string> generators() const;
  DatasetCounts counts() const { return {papers_.size(), edges_.size(), lists_.size()}; }

  // Adds or replaces the list for (focal, source).
  void put_list(ReferenceList list);
  void put_lists(std::vector<ReferenceList> lists);

  bool operator==(const Dataset& other) const {
    return papers_ == other.papers_ && edges_ == other.edges_ && lists_ == other.lists_;
  }

 private:
  void reindex();

  std::vector<PaperRecord> papers_;
  CitationEdgeSet edges_;
  std::vector<ReferenceList> lists_;
  std::unordered_map<PaperKey, std::size_t> paper_index_;
  std::map<std::pair<PaperKey, std::string>, std::size_t> list_index_;
  std::vector<PaperKey> unresolved_;
};

// Fixed file names inside a dataset directory.
inline constexpr const char* kPapersFile = "papers.jsonl";
inline constexpr const char* kCitationsFile = "citations.tsv";
inline constexpr const char* kReflistsFile = "reflists.jsonl";
inline constexpr const char* kEmbeddingsFile = "embeddings.jsonl";
inline constexpr const char* kFocalEmbeddingsFile = "focal_embeddings.jsonl";

Dataset load_dataset(const std::filesystem::path& papers_path, const std::filesystem::path& edges_path,
                     const std::filesystem::path& reflists_path);
Dataset load_dataset(const std::filesystem::path& dir);

std::vector<PaperRecord> read_papers(const std::filesystem::path& path);
CitationEdgeSet read_citations(const std::filesystem::path& path);
std::vector<ReferenceList> read_reflists(const std::filesystem::path& path);

void write_papers(const std::filesystem::path& path, const std::vector<PaperRecord>& papers);
void write_citations(const std::filesystem::path& path, const CitationEdgeSet& edges);
void write_reflists(const std::filesystem::path& path, std::span<const ReferenceList> lists);
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t expected_dim);
void write_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);
// Paper ids of the dataset (papers and list members) that have no vector, sorted.
std::vector<PaperKey> missing_embeddings(const Dataset& dataset, const EmbeddingTable& table);

// Source of embedding vectors for a paper given its text.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<double> fetch(const PaperKey& id, std::string_view text) = 0;
};

// Serves vectors from a preloaded table; the text is ignored.
class FileEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit FileEmbeddingProvider(std::shared_ptr<const EmbeddingTable> table) : table_(std::move(table)) {}
  std::vector<double> fetch(const PaperKey& id, std::string_view text) override;

 private:
  std::shared_ptr<const EmbeddingTable> table_;
};

// Wire format of the optional network provider: POST {"input": text},
// response {"embedding": [..]}.
std::string make_embedding_request(std::string_view text);
std::vector<double> parse_embedding_response(std::string_view body);

}  // namespace citegraph
