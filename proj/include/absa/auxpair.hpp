#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absa/corpus.hpp"
#include "absa/polarity.hpp"

namespace absa {

// The four auxiliary-sentence constructions. M-modes keep one 3-class
// example per instance; B-modes expand each instance into three yes/no
// examples, one per candidate polarity.
enum class AuxMode {
  qa_m,
  nli_m,
  qa_b,
  nli_b,
};

constexpr bool is_binary_mode(AuxMode m) {
  return m == AuxMode::qa_b || m == AuxMode::nli_b;
}

constexpr int num_classes(AuxMode m) { return is_binary_mode(m) ? 2 : 3; }

// Display form: "QA-M", "NLI-M", "QA-B", "NLI-B".
std::string_view mode_label(AuxMode m);
// CLI form: "qa-m", "nli-m", "qa-b", "nli-b".
std::string_view mode_cli_name(AuxMode m);
AuxMode mode_from_string(std::string_view s);

// Auxiliary-sentence templates. English defaults produce the canonical
// strings; a Persian set is selected with language_tag "fa". The polarity
// words fill the {polarity} slot of qa_b_template and the suffix of NLI-B.
struct TemplateSet {
  std::string qa_m_template = "What do you think of the {aspect}";
  std::string qa_b_template = "The polarity of aspect {aspect} is {polarity}";
  std::string nli_b_separator = "-";
  std::string language_tag = "en";
  std::array<std::string, kNumPolarities> polarity_words = {
      "positive", "negative", "neutral"};

  static TemplateSet english();
  static TemplateSet persian();
  static TemplateSet for_language(std::string_view tag);

  // Throws std::invalid_argument if a template does not carry its required
  // placeholder exactly once.
  void validate() const;
};

// Binary label for B-mode examples.
inline constexpr int kLabelNo = 0;
inline constexpr int kLabelYes = 1;

struct PairExample {
  std::size_t instance_index = 0;  // position in the source corpus
  std::string review_id;
  std::string aspect;
  Polarity gold = Polarity::positive;           // source polarity
  std::optional<Polarity> candidate;            // set for B-modes
  std::string sentence_a;                       // review text verbatim
  std::string sentence_b;                       // auxiliary sentence
  int label = 0;  // M-modes: polarity ordinal; B-modes: kLabelYes/kLabelNo

  bool operator==(const PairExample&) const = default;
};

struct PairDataset {
  AuxMode mode = AuxMode::nli_m;
  std::vector<PairExample> examples;
  // B-modes: per source instance, the indices of its three examples in
  // canonical polarity order. Empty for M-modes.
  std::vector<std::array<std::size_t, kNumPolarities>> groups;

  std::size_t num_instances() const {
    return is_binary_mode(mode) ? groups.size() : examples.size();
  }
};

// Builds the second sentence for one aspect. `candidate` is required for
// B-modes and rejected for M-modes.
std::string build_auxiliary(const std::string& aspect, AuxMode mode,
                            const TemplateSet& templates,
                            std::optional<Polarity> candidate = std::nullopt);

PairDataset expand_corpus(const Corpus& corpus, AuxMode mode,
                          const TemplateSet& templates);

// Argmax with ties broken in canonical polarity order. Probabilities must be
// nonnegative and sum to 1 within 1e-6.
Polarity decode_m(const std::array<double, kNumPolarities>& class_probabilities);

// Picks the candidate with the highest yes-probability; the three values are
// independent binary scores in [0, 1] and need not sum to 1.
Polarity decode_b(const std::array<double, kNumPolarities>& yes_probabilities);

// JSONL round-trip for expanded datasets.
void write_pairs_jsonl(const PairDataset& dataset,
                       const std::filesystem::path& path);
PairDataset read_pairs_jsonl(const std::filesystem::path& path, AuxMode mode);

}  // namespace absa
