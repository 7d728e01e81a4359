#include "altrec/recommendation.hpp"

#include "altrec/error.hpp"
#include "altrec/io.hpp"

namespace altrec {

void save_recommendations(const std::filesystem::path& path, const std::vector<Recommendation>& recs) {
  auto out = io::open_output(path);
  for (const auto& r : recs) {
    out << r.anchor_id << ',' << r.neighbor_id << ',' << r.rank << ',' << io::format_double(r.similarity)
        << '\n';
  }
}

std::vector<Recommendation> load_recommendations(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  std::vector<Recommendation> recs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    const auto cols = io::split(io::trim(line), ',');
    if (cols.size() != 4) throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 4 columns");
    recs.push_back({cols[0], cols[1], std::stod(cols[3]), std::stoi(cols[2])});
  }
  return recs;
}

}  // namespace altrec
