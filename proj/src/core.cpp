#include "trusteq/core.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "trusteq/error.hpp"

namespace trusteq {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c >= 0x80;
}

bool is_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

bool only_whitespace(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n) {
      const auto c = static_cast<unsigned char>(text[j]);
      if (is_word_byte(c)) {
        ++j;
        continue;
      }
      // Mid-word joiners: don't, 3.14, 1,000.
      if (j + 1 < n && j > i) {
        const auto prev = static_cast<unsigned char>(text[j - 1]);
        const auto next = static_cast<unsigned char>(text[j + 1]);
        if (c == '\'' && is_alpha(prev) && is_alpha(next)) {
          ++j;
          continue;
        }
        if ((c == '.' || c == ',') && is_digit(prev) && is_digit(next)) {
          ++j;
          continue;
        }
      }
      break;
    }
    words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

FeatureSpace tokenize(const Instance& instance) {
  FeatureSpace space;
  std::map<std::string, int> index;
  auto add_segment = [&](Segment segment, std::string_view text) {
    const auto s = static_cast<std::size_t>(segment);
    space.tokens[s] = split_words(text);
    space.feature_of[s].reserve(space.tokens[s].size());
    for (std::size_t t = 0; t < space.tokens[s].size(); ++t) {
      std::string surface = to_lower(space.tokens[s][t]);
      auto [it, inserted] = index.try_emplace(surface, space.size());
      if (inserted) space.features.push_back(Feature{it->second, surface, {}});
      space.features[it->second].positions.push_back(TokenPosition{segment, static_cast<int>(t)});
      space.feature_of[s].push_back(it->second);
    }
  };
  add_segment(Segment::kA, instance.text_a);
  if (instance.text_b) add_segment(Segment::kB, *instance.text_b);
  if (space.features.empty()) {
    throw Error(ErrorCode::kEmptyInstance, "instance '" + instance.id + "' has no word tokens");
  }
  return space;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, "manifest " + path.string() + ": " + e.what());
  }
  Manifest m;
  try {
    m.num_classes = j.at("num_classes").get<int>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, "manifest " + path.string() + ": " + e.what());
  }
  if (m.num_classes < 2 || static_cast<int>(m.class_names.size()) != m.num_classes) {
    throw Error(ErrorCode::kConfigError,
                "manifest needs num_classes >= 2 and one class name per class");
  }
  return m;
}

Dataset load_dataset(const std::filesystem::path& path, const Manifest& manifest,
                     std::string name) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open dataset " + path.string());
  Dataset ds;
  ds.name = name.empty() ? path.stem().string() : std::move(name);
  ds.num_classes = manifest.num_classes;
  ds.class_names = manifest.class_names;

  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (only_whitespace(line)) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    Instance inst;
    try {
      const auto j = nlohmann::json::parse(line);
      inst.id = j.at("id").get<std::string>();
      inst.text_a = j.at("text_a").get<std::string>();
      if (auto it = j.find("text_b"); it != j.end() && !it->is_null()) {
        inst.text_b = it->get<std::string>();
      }
      inst.label = j.at("label").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, where + ": " + e.what());
    }
    if (only_whitespace(inst.text_a)) {
      throw Error(ErrorCode::kParseError, where + ": empty text_a");
    }
    if (!seen.insert(inst.id).second) {
      throw Error(ErrorCode::kParseError, where + ": duplicate id '" + inst.id + "'");
    }
    if (inst.label < 0 || inst.label >= ds.num_classes) {
      throw Error(ErrorCode::kLabelOutOfRange,
                  where + ": label " + std::to_string(inst.label) + " outside [0, " +
                      std::to_string(ds.num_classes) + ")");
    }
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void fnv1a(std::uint64_t& h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view instance_id,
                          std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int i = 0; i < 8; ++i) {
    h ^= (global_seed >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ULL;
  }
  fnv1a(h, instance_id);
  fnv1a(h, std::string_view("\0", 1));
  fnv1a(h, tag);
  return splitmix64(h);
}

std::uint64_t uniform_index(Engine& engine, std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection sampling over the largest multiple of n.
  const std::uint64_t limit = Engine::max() - (Engine::max() % n + 1) % n;
  std::uint64_t x;
  do {
    x = engine();
  } while (x > limit);
  return x % n;
}

double uniform_unit(Engine& engine) { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }

}  // namespace trusteq
