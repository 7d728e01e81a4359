#include "altrec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "altrec/error.hpp"
#include "altrec/io.hpp"

namespace altrec {
namespace {

const std::vector<std::string> kFunctionWords = {
    "the", "with", "for", "and", "of", "in", "a", "this", "offers", "features", "durable", "new",
    "model", "series", "design", "easy", "use", "home", "quality", "premium", "compact", "heavy",
    "duty", "standard", "includes", "provides", "reliable", "performance", "finish", "set"};
const std::vector<std::string> kBrands = {"kelvo", "marden", "ostrix", "pellway", "quanto", "rivek",
                                          "sorrel", "tamber", "ulvar", "vexim", "wendal", "yorvik"};
const std::vector<std::string> kUnits = {"gal", "in", "ft", "lb", "watt", "volt", "psi", "oz"};
const std::vector<std::string> kOnsets = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
                                          "br", "dr", "gr", "kl", "pl", "st", "tr", "sk"};
const std::vector<std::string> kVowels = {"a", "e", "i", "o", "u", "ai", "ou", "ea"};
const std::vector<std::string> kCodas = {"", "n", "r", "l", "s", "x", "m", "nd", "rt"};
const std::vector<std::string> kColors = {"black", "white", "silver", "red", "blue"};
const std::vector<std::string> kMaterials = {"steel", "plastic", "wood", "aluminum"};

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

std::string pseudo_word(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> syllables(2, 3);
  std::string w;
  for (int s = syllables(rng); s > 0; --s) w += pick(kOnsets, rng) + pick(kVowels, rng);
  return w + pick(kCodas, rng);
}

std::string capitalize(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

SynthData generate_synth(const SynthOptions& o) {
  if (o.families < 2) throw UsageError("synth: families must be >= 2");
  if (o.products_per_family < 3) throw UsageError("synth: products_per_family must be >= 3");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Disjoint noun sets per family; no collisions with the shared words.
  std::set<std::string> taken(kFunctionWords.begin(), kFunctionWords.end());
  taken.insert(kBrands.begin(), kBrands.end());
  taken.insert(kUnits.begin(), kUnits.end());
  constexpr std::size_t kNounsPerFamily = 24;
  std::vector<std::vector<std::string>> nouns(o.families);
  for (auto& family_nouns : nouns) {
    while (family_nouns.size() < kNounsPerFamily) {
      auto w = pseudo_word(rng);
      if (taken.insert(w).second) family_nouns.push_back(std::move(w));
    }
  }

  SynthData data;
  std::vector<std::vector<std::string>> members(o.families);
  for (std::size_t f = 0; f < o.families; ++f) {
    for (std::size_t i = 0; i < o.products_per_family; ++i) {
      char id[32];
      std::snprintf(id, sizeof(id), "%08zu", 10000000 + f * 100000 + i);
      std::uniform_int_distribution<int> n_title(2, 4), n_desc(14, 28), number(2, 120);
      std::vector<std::string> title{capitalize(pick(kBrands, rng))};
      title.push_back(std::to_string(number(rng)));
      title.push_back(capitalize(pick(kUnits, rng)) + ".");
      for (int k = n_title(rng); k > 0; --k) title.push_back(capitalize(pick(nouns[f], rng)));
      if (unit(rng) < 0.5) title.push_back("in " + capitalize(pick(kColors, rng)));
      std::vector<std::string> desc{"This"};
      desc.push_back(pick(nouns[f], rng));
      for (int k = n_desc(rng); k > 0; --k) {
        const double r = unit(rng);
        if (r < 0.4) {
          desc.push_back(pick(nouns[f], rng));
        } else if (r < 0.9) {
          desc.push_back(pick(kFunctionWords, rng));
        } else {
          desc.push_back(std::to_string(number(rng)) + " " + pick(kUnits, rng));
        }
      }
      Product p{id, join(title), join(desc) + "."};
      data.family.emplace(p.product_id, f);
      members[f].push_back(p.product_id);
      data.products.push_back(std::move(p));
    }
  }

  // Co-compare pairs: a random spanning tree plus extra edges over the
  // compared subset of each family, each emitted 1-4 times.
  const auto uncompared = static_cast<std::size_t>(std::llround(o.uncompared_fraction * o.products_per_family));
  if (uncompared + 2 > o.products_per_family) throw UsageError("synth: uncompared_fraction too large");
  for (std::size_t f = 0; f < o.families; ++f) {
    auto compared = members[f];
    std::shuffle(compared.begin(), compared.end(), rng);
    compared.resize(o.products_per_family - uncompared);
    std::vector<ComparePair> edges;
    for (std::size_t i = 1; i < compared.size(); ++i) {
      std::uniform_int_distribution<std::size_t> earlier(0, i - 1);
      edges.push_back(ComparePair::make(compared[i], compared[earlier(rng)]));
    }
    std::uniform_int_distribution<std::size_t> any(0, compared.size() - 1);
    for (std::size_t e = 0; e < compared.size() / 2; ++e) {
      const auto a = any(rng), b = any(rng);
      if (a != b) edges.push_back(ComparePair::make(compared[a], compared[b]));
    }
    std::uniform_int_distribution<int> times(1, 4);
    for (const auto& edge : edges) {
      for (int t = times(rng); t > 0; --t) {
        if (unit(rng) < 0.5) {
          data.pair_lines.emplace_back(edge.product_id_1, edge.product_id_2);
        } else {
          data.pair_lines.emplace_back(edge.product_id_2, edge.product_id_1);
        }
      }
    }
  }
  std::shuffle(data.pair_lines.begin(), data.pair_lines.end(), rng);

  // Attributes: a family-flavoured type, colour, material and capacity.
  AttributeSpec type{"type", AttributeSpec::Kind::categorical, {}, 0, 0};
  for (std::size_t f = 0; f < o.families; ++f) {
    for (int v = 0; v < 3; ++v) type.values.push_back("type" + std::to_string(f) + "_" + std::to_string(v));
  }
  data.schema.attributes = {
      type,
      {"color", AttributeSpec::Kind::categorical, kColors, 0, 0},
      {"material", AttributeSpec::Kind::categorical, kMaterials, 0, 0},
      {"capacity", AttributeSpec::Kind::numerical, {}, 10.0, 30.0},
  };
  const auto without = static_cast<std::size_t>(std::llround(o.no_attribute_fraction * o.products_per_family));
  if (without > o.products_per_family) throw UsageError("synth: no_attribute_fraction too large");
  for (std::size_t f = 0; f < o.families; ++f) {
    auto with = members[f];
    std::shuffle(with.begin(), with.end(), rng);
    with.resize(o.products_per_family - without);
    for (const auto& id : with) {
      auto& row = data.attributes[id];
      if (unit(rng) < 0.8) row["type"] = type.values[3 * f + static_cast<std::size_t>(unit(rng) * 3) % 3];
      if (unit(rng) < 0.8) row["color"] = pick(kColors, rng);
      if (unit(rng) < 0.8) row["material"] = pick(kMaterials, rng);
      if (row.empty() || unit(rng) < 0.8) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f", 10.0 + 20.0 * unit(rng));
        row["capacity"] = buf;
      }
    }
  }

  // Sessions.
  std::uniform_int_distribution<std::size_t> any_product(0, data.products.size() - 1);
  std::uniform_int_distribution<std::size_t> any_member(0, o.products_per_family - 1);
  std::uniform_int_distribution<std::size_t> other_family(0, o.families - 2);
  std::uniform_int_distribution<int> purchases(1, 3);
  for (std::size_t s = 0; s < o.sessions; ++s) {
    char sid[32];
    std::snprintf(sid, sizeof(sid), "s%06zu", s + 1);
    const auto& anchor = data.products[any_product(rng)].product_id;
    const auto f = data.family.at(anchor);
    Session session{sid, anchor, {}};
    for (int k = purchases(rng); k > 0; --k) {
      auto target = f;
      if (unit(rng) >= o.in_family_purchase_probability) {
        target = other_family(rng);
        if (target >= f) ++target;
      }
      auto bought = members[target][any_member(rng)];
      while (bought == anchor) bought = members[target][any_member(rng)];
      session.purchased_ids.insert(bought);
    }
    data.sessions.push_back(std::move(session));
  }
  return data;
}

void write_synth(const SynthData& data, const SynthPaths& paths) {
  {
    auto out = io::open_output(paths.catalog);
    for (const auto& p : data.products) {
      nlohmann::json j{{"product_id", p.product_id}, {"title", p.title}, {"description", p.description}};
      out << j.dump() << '\n';
    }
  }
  {
    auto out = io::open_output(paths.pairs);
    out << "product_id_1,product_id_2,co_compared\n";
    for (const auto& [a, b] : data.pair_lines) out << a << ',' << b << ",1\n";
  }
  save_sessions(paths.sessions, data.sessions);
  save_attributes(paths.attributes, data.attributes);
  data.schema.save(paths.schema);
  auto out = io::open_output(paths.families);
  for (const auto& [id, f] : data.family) out << id << ',' << f << '\n';
}

std::map<std::string, std::size_t> load_families(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  std::map<std::string, std::size_t> families;
  std::string line;
  while (std::getline(in, line)) {
    const auto cols = io::split(io::trim(line), ',');
    if (cols.size() == 2) families[cols[0]] = std::stoul(cols[1]);
  }
  return families;
}

}  // namespace altrec
