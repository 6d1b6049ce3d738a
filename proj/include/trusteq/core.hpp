#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace trusteq {

/// One labeled datapoint; `text_b` is set for sentence-pair tasks.
struct Instance {
  std::string id;
  std::string text_a;
  std::optional<std::string> text_b;
  int label = 0;
};

/// Segment of a sentence pair a token came from.
enum class Segment : std::uint8_t { kA = 0, kB = 1 };

struct TokenPosition {
  Segment segment;
  int index;  // into FeatureSpace::tokens[segment]

  friend bool operator==(const TokenPosition&, const TokenPosition&) = default;
};

struct Feature {
  int id;
  std::string surface;  // lowercase
  std::vector<TokenPosition> positions;

  friend bool operator==(const Feature&, const Feature&) = default;
};

/// Interpretable features of one instance: unique lowercase words, each
/// grouping every occurrence across both segments.
struct FeatureSpace {
  std::vector<Feature> features;
  // Word tokens of each segment in original case; `feature_of` maps a token
  // back to its feature id.
  std::array<std::vector<std::string>, 2> tokens;
  std::array<std::vector<int>, 2> feature_of;

  int size() const { return static_cast<int>(features.size()); }

  friend bool operator==(const FeatureSpace&, const FeatureSpace&) = default;
};

struct Manifest {
  int num_classes = 0;
  std::vector<std::string> class_names;
};

struct Dataset {
  std::string name;
  int num_classes = 0;
  std::vector<std::string> class_names;
  std::vector<Instance> instances;
};

/// Splits text into word tokens, discarding punctuation and whitespace.
/// A word is a maximal run of ASCII letters/digits, underscores and non-ASCII
/// (UTF-8) bytes; an apostrophe between letters and a '.' or ',' between
/// digits stay inside the word.
std::vector<std::string> split_words(std::string_view text);

/// ASCII lowercase; non-ASCII bytes pass through unchanged.
std::string to_lower(std::string_view text);

/// Throws Error(kEmptyInstance) if neither segment has a word token.
FeatureSpace tokenize(const Instance& instance);

Manifest load_manifest(const std::filesystem::path& path);

/// Reads JSONL (`id`, `text_a`, optional `text_b`, `label`). Throws
/// kParseError / kLabelOutOfRange with the offending 1-based line number.
Dataset load_dataset(const std::filesystem::path& path, const Manifest& manifest,
                     std::string name = {});

// --- Seeding ---------------------------------------------------------------

using Engine = std::mt19937_64;

/// Stream seed for one (global seed, instance, tag) triple. Independent of
/// dataset order and of which worker runs the instance.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view instance_id,
                          std::string_view tag);

inline Engine make_engine(std::uint64_t global_seed, std::string_view instance_id,
                          std::string_view tag) {
  return Engine(derive_seed(global_seed, instance_id, tag));
}

/// Uniform integer in [0, n). Portable across standard libraries, unlike
/// std::uniform_int_distribution.
std::uint64_t uniform_index(Engine& engine, std::uint64_t n);

/// Uniform double in [0, 1) with 53 random bits.
double uniform_unit(Engine& engine);

}  // namespace trusteq
