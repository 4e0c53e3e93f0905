#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "absa/polarity.hpp"

namespace absa {

// One labeled (review, aspect) pair. `occurrence` disambiguates duplicate
// (review_id, aspect) records; it is assigned by Corpus::add and is not
// part of the on-disk record.
struct AspectInstance {
  std::string review_id;
  std::string text;
  std::string aspect;
  Polarity polarity = Polarity::positive;
  int occurrence = 0;

  bool operator==(const AspectInstance&) const = default;
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::string source_name)
      : source_name_(std::move(source_name)) {}

  // Appends an instance, assigning its occurrence index. Throws
  // std::invalid_argument on empty text or aspect.
  void add(AspectInstance instance);

  const std::vector<AspectInstance>& instances() const { return instances_; }
  const AspectInstance& operator[](std::size_t i) const {
    return instances_[i];
  }
  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }

  const std::string& source_name() const { return source_name_; }
  void set_source_name(std::string name) { source_name_ = std::move(name); }

 private:
  std::vector<AspectInstance> instances_;
  std::string source_name_;
  std::unordered_map<std::string, int> next_occurrence_;
};

inline bool same_instances(const Corpus& a, const Corpus& b) {
  return a.instances() == b.instances();
}

struct ClassCounts {
  std::array<std::int64_t, kNumPolarities> per_class{};
  std::int64_t total_instances = 0;
  std::int64_t distinct_reviews = 0;

  std::int64_t count(Polarity p) const { return per_class[ordinal(p)]; }
  bool operator==(const ClassCounts&) const = default;
};

enum class CorpusFormat {
  // One JSON object per line: review_id, text, aspect, polarity.
  canonical_jsonl,
  // Upstream Pars-ABSA layout: records of three lines (sentence with a $T$
  // target slot, aspect term, polarity in {1, 0, -1}).
  pars_absa_adapter,
};

CorpusFormat corpus_format_from_string(std::string_view s);
std::string_view to_string(CorpusFormat f);

// Reads a corpus file. Malformed records are rejected with
// std::runtime_error carrying the 1-based line number and field.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);

ClassCounts corpus_stats(const Corpus& corpus);

// Deterministic per-class split: each class contributes
// round(class_count * test_fraction) instances to the test side. Instance
// order within each side follows corpus order.
std::pair<Corpus, Corpus> stratified_split(const Corpus& corpus,
                                           double test_fraction,
                                           std::uint64_t seed);

// Canonical JSONL writer; load_corpus(write_canonical(c)) == c.
void write_canonical(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace absa
