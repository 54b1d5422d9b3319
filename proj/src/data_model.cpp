#include "citegraph/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "citegraph/errors.hpp"

namespace citegraph {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::FieldShuffle:
      return "field";
    case BaselineKind::SubfieldShuffle:
      return "subfield";
    case BaselineKind::TemporalFieldShuffle:
      return "temporal";
  }
  return "field";
}

BaselineKind parse_baseline_kind(std::string_view text) {
  if (text == "field") return BaselineKind::FieldShuffle;
  if (text == "subfield") return BaselineKind::SubfieldShuffle;
  if (text == "temporal") return BaselineKind::TemporalFieldShuffle;
  throw ValidationError("unknown baseline kind '" + std::string(text) + "'");
}

Source Source::parse(std::string_view text) {
  if (text == "ground_truth") return ground_truth();
  constexpr std::string_view gen = "generated:";
  constexpr std::string_view base = "baseline:";
  if (text.substr(0, gen.size()) == gen && text.size() > gen.size())
    return generated(std::string(text.substr(gen.size())));
  if (text.substr(0, base.size()) == base) return baseline(parse_baseline_kind(text.substr(base.size())));
  throw ValidationError("unknown source '" + std::string(text) + "'");
}

std::string Source::to_string() const {
  switch (kind_) {
    case Kind::GroundTruth:
      return "ground_truth";
    case Kind::Generated:
      return "generated:" + generator_;
    case Kind::Baseline:
      return "baseline:" + std::string(citegraph::to_string(baseline_));
  }
  return {};
}

void validate(const ReferenceList& list) {
  if (list.focal_id.empty()) throw ValidationError("reference list has an empty focal id");
  if (list.refs.empty()) throw ValidationError("reference list of '" + list.focal_id + "' is empty");
  std::unordered_set<std::string_view> seen;
  for (const auto& r : list.refs) {
    if (r.empty()) throw ValidationError("reference list of '" + list.focal_id + "' has an empty key");
    if (r == list.focal_id)
      throw ValidationError("reference list of '" + list.focal_id + "' cites its own focal paper");
    if (!seen.insert(r).second)
      throw ValidationError("reference list of '" + list.focal_id + "' repeats '" + r + "'");
  }
}

// ---------------------------------------------------------------------------

bool CitationEdgeSet::add(const PaperKey& citing, const PaperKey& cited) {
  if (citing == cited) throw ValidationError("self citation '" + citing + "'");
  auto& out = out_[citing];
  if (std::find(out.begin(), out.end(), cited) != out.end()) return false;
  out.push_back(cited);
  edges_.emplace_back(citing, cited);
  auto& ua = undirected_[citing];
  if (std::find(ua.begin(), ua.end(), cited) == ua.end()) {
    ua.push_back(cited);
    undirected_[cited].push_back(citing);
  }
  return true;
}

bool CitationEdgeSet::contains(const PaperKey& citing, const PaperKey& cited) const {
  auto it = out_.find(citing);
  if (it == out_.end()) return false;
  return std::find(it->second.begin(), it->second.end(), cited) != it->second.end();
}

bool CitationEdgeSet::connected(const PaperKey& a, const PaperKey& b) const {
  return contains(a, b) || contains(b, a);
}

std::span<const PaperKey> CitationEdgeSet::neighbors(const PaperKey& key) const {
  auto it = undirected_.find(key);
  if (it == undirected_.end()) return {};
  return it->second;
}

// ---------------------------------------------------------------------------

std::span<const double> EmbeddingTable::get(const PaperKey& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return {};
  return std::span<const double>(data_.data() + it->second * dim_, dim_);
}

void EmbeddingTable::set(const PaperKey& id, std::span<const double> vec) {
  if (dim_ == 0) throw ValidationError("embedding table dimension must be positive");
  if (vec.size() != dim_) throw DimensionMismatchError(id, dim_, vec.size());
  for (double v : vec)
    if (!std::isfinite(v)) throw ValidationError("embedding '" + id + "' has a non-finite entry");
  auto [it, inserted] = index_.emplace(id, ids_.size());
  if (inserted) {
    ids_.push_back(id);
    data_.insert(data_.end(), vec.begin(), vec.end());
  } else {
    std::copy(vec.begin(), vec.end(), data_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
  }
}

bool EmbeddingTable::operator==(const EmbeddingTable& other) const {
  if (dim_ != other.dim_ || size() != other.size()) return false;
  for (const auto& id : ids_) {
    auto a = get(id);
    auto b = other.get(id);
    if (b.empty() || !std::equal(a.begin(), a.end(), b.begin())) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

Dataset::Dataset(std::vector<PaperRecord> papers, CitationEdgeSet edges, std::vector<ReferenceList> lists)
    : papers_(std::move(papers)), edges_(std::move(edges)), lists_(std::move(lists)) {
  reindex();
}

void Dataset::reindex() {
  paper_index_.clear();
  list_index_.clear();
  for (std::size_t i = 0; i < papers_.size(); ++i) {
    const auto& p = papers_[i];
    if (p.id.empty()) throw ValidationError("paper record " + std::to_string(i + 1) + " has an empty id");
    auto [it, inserted] = paper_index_.emplace(p.id, i);
    if (!inserted) throw DuplicateIdError(p.id, it->second + 1, i + 1);
  }
  std::set<PaperKey> unresolved;
  for (std::size_t i = 0; i < lists_.size(); ++i) {
    const auto& list = lists_[i];
    validate(list);
    if (!paper_index_.count(list.focal_id)) throw UnresolvedFocalError(list.focal_id);
    auto [it, inserted] = list_index_.emplace(std::make_pair(list.focal_id, list.source.to_string()), i);
    if (!inserted)
      throw ValidationError("focal '" + list.focal_id + "' has two lists with source '" +
                            list.source.to_string() + "'");
    for (const auto& r : list.refs)
      if (!paper_index_.count(r)) unresolved.insert(r);
  }
  unresolved_.assign(unresolved.begin(), unresolved.end());
}

const PaperRecord* Dataset::find(const PaperKey& id) const {
  auto it = paper_index_.find(id);
  return it == paper_index_.end() ? nullptr : &papers_[it->second];
}

const ReferenceList* Dataset::list_for(const PaperKey& focal, const Source& source) const {
  auto it = list_index_.find({focal, source.to_string()});
  return it == list_index_.end() ? nullptr : &lists_[it->second];
}

std::vector<PaperKey> Dataset::focals() const {
  std::vector<PaperKey> out;
  for (const auto& l : lists_)
    if (l.source.kind() == Source::Kind::GroundTruth) out.push_back(l.focal_id);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Dataset::generators() const {
  std::set<std::string> names;
  for (const auto& l : lists_)
    if (l.source.kind() == Source::Kind::Generated) names.insert(l.source.generator());
  return {names.begin(), names.end()};
}

void Dataset::put_list(ReferenceList list) {
  validate(list);
  if (!find(list.focal_id)) throw UnresolvedFocalError(list.focal_id);
  auto key = std::make_pair(list.focal_id, list.source.to_string());
  auto it = list_index_.find(key);
  if (it != list_index_.end()) {
    lists_[it->second] = std::move(list);
  } else {
    lists_.push_back(std::move(list));
  }
  reindex();
}

void Dataset::put_lists(std::vector<ReferenceList> lists) {
  for (auto& list : lists) {
    validate(list);
    if (!find(list.focal_id)) throw UnresolvedFocalError(list.focal_id);
    auto key = std::make_pair(list.focal_id, list.source.to_string());
    auto it = list_index_.find(key);
    if (it != list_index_.end()) {
      lists_[it->second] = std::move(list);
    } else {
      list_index_.emplace(key, lists_.size());
      lists_.push_back(std::move(list));
    }
  }
  reindex();
}

// ---------------------------------------------------------------------------

namespace {

template <typename Fn>
void for_each_line(const fs::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(line, lineno);
  }
}

json parse_json_line(const fs::path& path, const std::string& line, std::size_t lineno) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw ParseError(path.filename().string(), lineno, "<record>", "expected a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ParseError(path.filename().string(), lineno, "<record>", e.what());
  }
}

const json& require(const json& j, const char* field, const fs::path& path, std::size_t lineno) {
  auto it = j.find(field);
  if (it == j.end()) throw ParseError(path.filename().string(), lineno, field, "missing");
  return *it;
}

std::string require_string(const json& j, const char* field, const fs::path& path, std::size_t lineno,
                           bool nonempty = true) {
  const json& v = require(j, field, path, lineno);
  if (!v.is_string()) throw ParseError(path.filename().string(), lineno, field, "expected a string");
  std::string s = v.get<std::string>();
  if (nonempty && s.empty()) throw ParseError(path.filename().string(), lineno, field, "must be nonempty");
  return s;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

std::vector<PaperRecord> read_papers(const fs::path& path) {
  std::vector<PaperRecord> papers;
  std::unordered_map<std::string, std::size_t> first_line;
  const std::string file = path.filename().string();
  for_each_line(path, [&](const std::string& line, std::size_t lineno) {
    json j = parse_json_line(path, line, lineno);
    PaperRecord p;
    p.id = require_string(j, "id", path, lineno);
    const json& year = require(j, "year", path, lineno);
    if (!year.is_number_integer()) throw ParseError(file, lineno, "year", "expected an integer");
    p.year = year.get<int>();
    if (p.year < 1800 || p.year > 2100) throw ParseError(file, lineno, "year", "outside [1800, 2100]");
    p.top_field = require_string(j, "top_field", path, lineno);
    p.subfield = require_string(j, "subfield", path, lineno, false);
    p.title = require_string(j, "title", path, lineno, false);
    if (auto it = j.find("abstract"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(file, lineno, "abstract", "expected a string or null");
      p.abstract_text = it->get<std::string>();
    }
    auto [it, inserted] = first_line.emplace(p.id, lineno);
    if (!inserted) throw DuplicateIdError(p.id, it->second, lineno);
    papers.push_back(std::move(p));
  });
  return papers;
}

CitationEdgeSet read_citations(const fs::path& path) {
  CitationEdgeSet edges;
  const std::string file = path.filename().string();
  for_each_line(path, [&](const std::string& line, std::size_t lineno) {
    auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw ParseError(file, lineno, "citing_id", "expected two tab-separated columns");
    std::string citing = line.substr(0, tab);
    std::string cited = line.substr(tab + 1);
    if (citing.empty()) throw ParseError(file, lineno, "citing_id", "must be nonempty");
    if (cited.empty()) throw ParseError(file, lineno, "cited_id", "must be nonempty");
    if (citing == cited) throw ParseError(file, lineno, "cited_id", "self citation");
    edges.add(citing, cited);
  });
  return edges;
}

std::vector<ReferenceList> read_reflists(const fs::path& path) {
  std::vector<ReferenceList> lists;
  const std::string file = path.filename().string();
  for_each_line(path, [&](const std::string& line, std::size_t lineno) {
    json j = parse_json_line(path, line, lineno);
    ReferenceList list;
    list.focal_id = require_string(j, "focal", path, lineno);
    try {
      list.source = Source::parse(require_string(j, "source", path, lineno));
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(file, lineno, "source", e.what());
    }
    const json& refs = require(j, "refs", path, lineno);
    if (!refs.is_array()) throw ParseError(file, lineno, "refs", "expected an array of strings");
    for (const auto& r : refs) {
      if (!r.is_string()) throw ParseError(file, lineno, "refs", "expected an array of strings");
      list.refs.push_back(r.get<std::string>());
    }
    try {
      validate(list);
    } catch (const ValidationError& e) {
      throw ParseError(file, lineno, "refs", e.what());
    }
    lists.push_back(std::move(list));
  });
  return lists;
}

Dataset load_dataset(const fs::path& papers_path, const fs::path& edges_path, const fs::path& reflists_path) {
  return Dataset(read_papers(papers_path), read_citations(edges_path), read_reflists(reflists_path));
}

Dataset load_dataset(const fs::path& dir) {
  return load_dataset(dir / kPapersFile, dir / kCitationsFile, dir / kReflistsFile);
}

void write_papers(const fs::path& path, const std::vector<PaperRecord>& papers) {
  std::vector<std::string> lines;
  lines.reserve(papers.size());
  for (const auto& p : papers) {
    json j;
    j["id"] = p.id;
    j["year"] = p.year;
    j["top_field"] = p.top_field;
    j["subfield"] = p.subfield;
    j["title"] = p.title;
    j["abstract"] = p.abstract_text ? json(*p.abstract_text) : json(nullptr);
    lines.push_back(j.dump());
  }
  write_lines(path, lines);
}

void write_citations(const fs::path& path, const CitationEdgeSet& edges) {
  std::vector<std::string> lines;
  lines.reserve(edges.size());
  for (const auto& [a, b] : edges.edges()) lines.push_back(a + "\t" + b);
  write_lines(path, lines);
}

void write_reflists(const fs::path& path, std::span<const ReferenceList> lists) {
  std::vector<std::string> lines;
  lines.reserve(lists.size());
  for (const auto& l : lists) {
    json j;
    j["focal"] = l.focal_id;
    j["source"] = l.source.to_string();
    j["refs"] = l.refs;
    lines.push_back(j.dump());
  }
  write_lines(path, lines);
}

void write_dataset(const fs::path& dir, const Dataset& dataset) {
  fs::create_directories(dir);
  write_papers(dir / kPapersFile, dataset.papers());
  write_citations(dir / kCitationsFile, dataset.edges());
  write_reflists(dir / kReflistsFile, dataset.lists());
}

EmbeddingTable load_embeddings(const fs::path& path, std::size_t expected_dim) {
  if (expected_dim == 0) throw ValidationError("expected embedding dimension must be positive");
  EmbeddingTable table(expected_dim);
  const std::string file = path.filename().string();
  std::vector<double> vec;
  for_each_line(path, [&](const std::string& line, std::size_t lineno) {
    json j = parse_json_line(path, line, lineno);
    std::string id = require_string(j, "id", path, lineno);
    const json& dim = require(j, "dim", path, lineno);
    const json& v = require(j, "vec", path, lineno);
    if (!v.is_array()) throw ParseError(file, lineno, "vec", "expected an array of numbers");
    vec.clear();
    for (const auto& x : v) {
      if (x.is_null()) throw ValidationError("embedding '" + id + "' has a non-finite entry");
      if (!x.is_number()) throw ParseError(file, lineno, "vec", "expected an array of numbers");
      vec.push_back(x.get<double>());
    }
    if (!dim.is_number_integer() || dim.get<long long>() != static_cast<long long>(vec.size()))
      throw DimensionMismatchError(id, expected_dim, vec.size());
    if (table.contains(id)) throw ParseError(file, lineno, "id", "duplicate embedding id '" + id + "'");
    table.set(id, vec);
  });
  return table;
}

void write_embeddings(const fs::path& path, const EmbeddingTable& table) {
  std::vector<std::string> lines;
  lines.reserve(table.size());
  for (const auto& id : table.ids()) {
    auto v = table.get(id);
    json j;
    j["id"] = id;
    j["dim"] = table.dim();
    j["vec"] = std::vector<double>(v.begin(), v.end());
    lines.push_back(j.dump());
  }
  write_lines(path, lines);
}

std::vector<PaperKey> missing_embeddings(const Dataset& dataset, const EmbeddingTable& table) {
  std::set<PaperKey> missing;
  for (const auto& p : dataset.papers())
    if (!table.contains(p.id)) missing.insert(p.id);
  for (const auto& l : dataset.lists())
    for (const auto& r : l.refs)
      if (!table.contains(r)) missing.insert(r);
  return {missing.begin(), missing.end()};
}

std::vector<double> FileEmbeddingProvider::fetch(const PaperKey& id, std::string_view) {
  auto v = table_->get(id);
  if (v.empty()) throw MissingEmbeddingError(id);
  return {v.begin(), v.end()};
}

std::string make_embedding_request(std::string_view text) {
  json j;
  j["input"] = std::string(text);
  return j.dump();
}

std::vector<double> parse_embedding_response(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed embedding response: ") + e.what());
  }
  auto it = j.find("embedding");
  if (it == j.end() || !it->is_array()) throw ValidationError("embedding response lacks an 'embedding' array");
  std::vector<double> out;
  for (const auto& x : *it) {
    if (!x.is_number()) throw ValidationError("embedding response has a non-numeric entry");
    double v = x.get<double>();
    if (!std::isfinite(v)) throw ValidationError("embedding response has a non-finite entry");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("embedding response is empty");
  return out;
}

}  // namespace citegraph
