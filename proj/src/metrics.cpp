#include <algorithm>
#include <cmath>
#include <fstream>

#include "citegraph/csv.hpp"
#include "citegraph/errors.hpp"
#include "citegraph/forest.hpp"

namespace citegraph {

Metrics evaluate(const Labels& y_true, const Labels& y_pred) {
  if (y_true.size() != y_pred.size()) throw ValidationError("label vectors differ in length");
  if (y_true.empty()) throw ValidationError("cannot evaluate zero predictions");
  std::size_t confusion[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < y_true.size(); ++i) ++confusion[y_true[i] != 0][y_pred[i] != 0];
  Metrics m;
  m.accuracy = static_cast<double>(confusion[0][0] + confusion[1][1]) / static_cast<double>(y_true.size());
  for (int c = 0; c < 2; ++c) {
    const double tp = static_cast<double>(confusion[c][c]);
    const double fp = static_cast<double>(confusion[1 - c][c]);
    const double fn = static_cast<double>(confusion[c][1 - c]);
    const double denom = 2 * tp + fp + fn;
    m.f1 += denom > 0 ? 2 * tp / denom : 0.0;
  }
  m.f1 /= 2;
  return m;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double ss = 0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

void write_report_csv(const std::filesystem::path& path, const std::vector<ClassificationReport>& reports) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << "task,seed,accuracy,f1\n";
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.accuracy.size(); ++i)
      out << r.task << ',' << (i < r.seeds.size() ? r.seeds[i] : i) << ',' << format_number(r.accuracy[i]) << ','
          << format_number(r.f1[i]) << '\n';
}

}  // namespace citegraph
