#include "altrec/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <spdlog/spdlog.h>

#include "altrec/error.hpp"
#include "altrec/io.hpp"

namespace altrec {

std::size_t AttributeSchema::dimension() const {
  std::size_t d = 0;
  for (const auto& a : attributes) d += a.width();
  return d;
}

AttributeSchema AttributeSchema::load(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  AttributeSchema schema;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = io::trim(line);
    if (body.empty()) continue;
    const auto cols = io::split(body, ',');
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (cols.size() != 3) throw DataError(where + ": expected name,kind,spec");
    AttributeSpec spec;
    spec.name = std::string(io::trim(cols[0]));
    const auto kind = io::trim(cols[1]);
    auto parts = io::split(io::trim(cols[2]), '|');
    if (kind == "categorical") {
      spec.kind = AttributeSpec::Kind::categorical;
      for (auto& p : parts) spec.values.emplace_back(io::trim(p));
    } else if (kind == "numerical") {
      spec.kind = AttributeSpec::Kind::numerical;
      if (parts.size() != 2) throw DataError(where + ": numerical spec must be min|max");
      try {
        spec.min = std::stod(parts[0]);
        spec.max = std::stod(parts[1]);
      } catch (const std::exception&) {
        throw DataError(where + ": numerical spec must be min|max");
      }
      if (spec.max < spec.min) throw DataError(where + ": max < min");
    } else {
      if (line_no == 1) continue;  // header
      throw DataError(where + ": unknown attribute kind '" + std::string(kind) + "'");
    }
    schema.attributes.push_back(std::move(spec));
  }
  return schema;
}

void AttributeSchema::save(const std::filesystem::path& path) const {
  auto out = io::open_output(path);
  for (const auto& a : attributes) {
    out << a.name << ',';
    if (a.kind == AttributeSpec::Kind::categorical) {
      out << "categorical,";
      for (std::size_t i = 0; i < a.values.size(); ++i) out << (i ? "|" : "") << a.values[i];
    } else {
      out << "numerical," << io::format_double(a.min) << '|' << io::format_double(a.max);
    }
    out << '\n';
  }
}

AttributeTable load_attributes(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  AttributeTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = io::trim(line);
    if (body.empty()) continue;
    const auto cols = io::split(body, ',');
    if (cols.size() != 3 || cols[0].empty() || cols[1].empty()) {
      spdlog::warn("{}:{}: skipped malformed attribute line", path.string(), line_no);
      continue;
    }
    table[cols[0]][cols[1]] = cols[2];
  }
  return table;
}

void save_attributes(const std::filesystem::path& path, const AttributeTable& table) {
  auto out = io::open_output(path);
  for (const auto& [id, attrs] : table) {
    for (const auto& [name, value] : attrs) out << id << ',' << name << ',' << value << '\n';
  }
}

AttributeVectors build_attribute_vectors(const std::vector<std::string>& catalog_ids,
                                         const AttributeTable& table, const AttributeSchema& schema) {
  AttributeVectors out;
  const auto dim = schema.dimension();
  for (const auto& id : catalog_ids) {
    const auto row = table.find(id);
    std::vector<double> values(dim, 0.0);
    bool has_any = false;
    std::size_t offset = 0;
    for (const auto& spec : schema.attributes) {
      const auto width = spec.width();
      if (row != table.end()) {
        if (auto it = row->second.find(spec.name); it != row->second.end()) {
          has_any = true;
          const auto& raw = it->second;
          if (spec.kind == AttributeSpec::Kind::categorical) {
            const auto pos = std::find(spec.values.begin(), spec.values.end(), raw);
            if (pos == spec.values.end()) {
              ++out.unknown_values;
            } else {
              values[offset + static_cast<std::size_t>(pos - spec.values.begin())] = 1.0;
            }
          } else {
            try {
              const double x = std::stod(raw);
              values[offset] = spec.max > spec.min ? (x - spec.min) / (spec.max - spec.min) : 0.0;
            } catch (const std::exception&) {
              ++out.unknown_values;
            }
          }
        }
      }
      offset += width;
    }
    if (has_any) {
      out.vectors.push_back({id, std::move(values)});
    } else {
      out.excluded.push_back(id);
    }
  }
  if (out.unknown_values > 0) {
    spdlog::warn("attribute vectors: {} unknown or unparseable attribute values encoded as zeros",
                 out.unknown_values);
  }
  return out;
}

AttributeRecommender::AttributeRecommender(const std::vector<AttributeVector>& vectors) {
  for (const auto& v : vectors) {
    if (!vectors_.emplace(v.product_id, v.values).second) throw DuplicateIdError(v.product_id);
  }
}

namespace {

double cosine_or_zero(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(aa * bb), -1.0, 1.0);
}

}  // namespace

std::vector<Recommendation> AttributeRecommender::recommend_or_throw(const std::string& anchor_id,
                                                                     std::size_t n) const {
  const auto anchor = vectors_.find(anchor_id);
  if (anchor == vectors_.end()) throw NoCoverageError("no attribute vector for " + anchor_id);
  std::vector<std::pair<double, const std::string*>> scored;
  scored.reserve(vectors_.size());
  // vectors_ is id-sorted, so a stable sort keeps id-ascending order on ties.
  for (const auto& [id, v] : vectors_) {
    if (id != anchor_id) scored.emplace_back(cosine_or_zero(anchor->second, v), &id);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<Recommendation> out;
  for (std::size_t i = 0; i < scored.size() && i < n; ++i) {
    out.push_back({anchor_id, *scored[i].second, scored[i].first, static_cast<int>(i) + 1});
  }
  return out;
}

std::vector<Recommendation> AttributeRecommender::recommend(const std::string& anchor_id, std::size_t n) const {
  if (!covers(anchor_id)) return {};
  return recommend_or_throw(anchor_id, n);
}

std::vector<Recommendation> attribute_recommend(const std::string& anchor_id,
                                                const AttributeRecommender& vectors, std::size_t n) {
  return vectors.recommend_or_throw(anchor_id, n);
}

void CoCompareCounts::add(const ComparePair& pair, int times) {
  if (times < 1) throw UsageError("co-compare count increment must be positive");
  if (pair.product_id_1 == pair.product_id_2) throw DataError("self-pair " + pair.product_id_1);
  counts_[pair] += times;
  for (const auto& [a, b] : {std::pair{pair.product_id_1, pair.product_id_2},
                             std::pair{pair.product_id_2, pair.product_id_1}}) {
    auto& list = partners_[a];
    auto it = std::find_if(list.begin(), list.end(), [&](const auto& e) { return e.first == b; });
    if (it == list.end()) {
      list.emplace_back(b, times);
    } else {
      it->second += times;
    }
  }
}

int CoCompareCounts::count(const std::string& a, const std::string& b) const {
  const auto it = counts_.find(ComparePair::make(a, b));
  return it == counts_.end() ? 0 : it->second;
}

const std::vector<std::pair<std::string, int>>& CoCompareCounts::partners(const std::string& anchor) const {
  static const std::vector<std::pair<std::string, int>> kNone;
  const auto it = partners_.find(anchor);
  return it == partners_.end() ? kNone : it->second;
}

CoCompareCounts build_cocompare_counts(const std::vector<ComparePair>& stream) {
  CoCompareCounts counts;
  for (const auto& p : stream) counts.add(p);
  return counts;
}

CoCompareCounts build_cocompare_counts(const std::filesystem::path& pairs_path) {
  return build_cocompare_counts(read_pair_stream(pairs_path).pairs);
}

std::vector<Recommendation> frequently_compared_recommend(const std::string& anchor_id,
                                                          const CoCompareCounts& counts, std::size_t n) {
  auto partners = counts.partners(anchor_id);
  std::sort(partners.begin(), partners.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<Recommendation> out;
  for (std::size_t i = 0; i < partners.size() && i < n; ++i) {
    out.push_back({anchor_id, partners[i].first, static_cast<double>(partners[i].second), static_cast<int>(i) + 1});
  }
  return out;
}

}  // namespace altrec
