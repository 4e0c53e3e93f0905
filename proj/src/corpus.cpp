#include "absa/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace absa {

namespace {

std::string location(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line,
                       const std::string& what) {
  throw std::runtime_error(location(path, line) + ": " + what);
}

std::string occurrence_key(const AspectInstance& inst) {
  return inst.review_id + '\x1f' + inst.aspect;
}

Corpus load_canonical_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open corpus file: " + path.string());
  }
  Corpus corpus(path.filename().string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded()) {
      fail(path, line_no, "malformed JSON record");
    }
    if (!record.is_object()) {
      fail(path, line_no, "record is not a JSON object");
    }
    AspectInstance inst;
    for (const char* field : {"review_id", "text", "aspect", "polarity"}) {
      if (!record.contains(field) || !record[field].is_string()) {
        fail(path, line_no,
             std::string("missing or non-string field '") + field + "'");
      }
    }
    inst.review_id = record["review_id"].get<std::string>();
    inst.text = record["text"].get<std::string>();
    inst.aspect = record["aspect"].get<std::string>();
    auto polarity = try_polarity_from_string(
        record["polarity"].get<std::string>());
    if (!polarity) {
      fail(path, line_no,
           "unknown polarity '" + record["polarity"].get<std::string>() +
               "' in field 'polarity'");
    }
    inst.polarity = *polarity;
    if (inst.text.empty()) fail(path, line_no, "empty field 'text'");
    if (inst.aspect.empty()) fail(path, line_no, "empty field 'aspect'");
    corpus.add(std::move(inst));
  }
  return corpus;
}

// Field mapping for the upstream repository layout is isolated here: three
// lines per record (sentence with $T$ marking the target slot, aspect term,
// polarity as 1/0/-1). The review text is reconstructed by substituting the
// aspect back into the $T$ slot; identical reconstructed texts share one
// review_id so that distinct-review counts match the source dataset.
Corpus load_pars_absa(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open corpus file: " + path.string());
  }
  Corpus corpus(path.filename().string());
  std::unordered_map<std::string, std::string> review_ids;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // A single trailing blank line is permitted.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() % 3 != 0) {
    fail(path, lines.size(),
         "incomplete record: file length is not a multiple of 3 lines");
  }
  for (std::size_t i = 0; i < lines.size(); i += 3) {
    const std::size_t line_no = i + 1;
    const std::string& sentence = lines[i];
    const std::string& aspect = lines[i + 1];
    const std::string& polarity_token = lines[i + 2];
    if (sentence.empty()) fail(path, line_no, "empty sentence line");
    if (aspect.empty()) fail(path, line_no + 1, "empty aspect line");

    Polarity polarity;
    if (polarity_token == "1") {
      polarity = Polarity::positive;
    } else if (polarity_token == "-1") {
      polarity = Polarity::negative;
    } else if (polarity_token == "0") {
      polarity = Polarity::neutral;
    } else {
      fail(path, line_no + 2,
           "unknown polarity token '" + polarity_token +
               "' (expected 1, 0 or -1)");
    }

    std::string text = sentence;
    for (std::size_t pos = text.find("$T$"); pos != std::string::npos;
         pos = text.find("$T$", pos + aspect.size())) {
      text.replace(pos, 3, aspect);
    }

    auto [it, inserted] = review_ids.try_emplace(
        text, "r" + std::to_string(review_ids.size()));
    AspectInstance inst;
    inst.review_id = it->second;
    inst.text = text;
    inst.aspect = aspect;
    inst.polarity = polarity;
    corpus.add(std::move(inst));
    (void)inserted;
  }
  return corpus;
}

}  // namespace

void Corpus::add(AspectInstance instance) {
  if (instance.text.empty()) {
    throw std::invalid_argument("aspect instance with empty text");
  }
  if (instance.aspect.empty()) {
    throw std::invalid_argument("aspect instance with empty aspect");
  }
  int& next = next_occurrence_[occurrence_key(instance)];
  instance.occurrence = next++;
  instances_.push_back(std::move(instance));
}

CorpusFormat corpus_format_from_string(std::string_view s) {
  if (s == "canonical-jsonl") return CorpusFormat::canonical_jsonl;
  if (s == "pars-absa-adapter") return CorpusFormat::pars_absa_adapter;
  throw std::invalid_argument("unknown corpus format '" + std::string(s) +
                              "' (expected canonical-jsonl|pars-absa-adapter)");
}

std::string_view to_string(CorpusFormat f) {
  switch (f) {
    case CorpusFormat::canonical_jsonl: return "canonical-jsonl";
    case CorpusFormat::pars_absa_adapter: return "pars-absa-adapter";
  }
  return "invalid";
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  switch (format) {
    case CorpusFormat::canonical_jsonl: return load_canonical_jsonl(path);
    case CorpusFormat::pars_absa_adapter: return load_pars_absa(path);
  }
  throw std::invalid_argument("invalid corpus format");
}

ClassCounts corpus_stats(const Corpus& corpus) {
  ClassCounts counts;
  std::unordered_set<std::string> reviews;
  for (const AspectInstance& inst : corpus.instances()) {
    ++counts.per_class[ordinal(inst.polarity)];
    ++counts.total_instances;
    reviews.insert(inst.review_id);
  }
  counts.distinct_reviews = static_cast<std::int64_t>(reviews.size());
  return counts;
}

std::pair<Corpus, Corpus> stratified_split(const Corpus& corpus,
                                           double test_fraction,
                                           std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  }
  if (corpus.empty()) {
    throw std::invalid_argument("cannot split: every class is empty");
  }

  std::vector<bool> in_test(corpus.size(), false);
  std::mt19937_64 rng(seed);
  // Classes are processed in canonical polarity order so that the RNG
  // consumption order is fixed.
  for (Polarity p : kAllPolarities) {
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].polarity == p) indices.push_back(i);
    }
    if (indices.empty()) continue;
    std::shuffle(indices.begin(), indices.end(), rng);
    const auto take = static_cast<std::size_t>(
        std::llround(static_cast<double>(indices.size()) * test_fraction));
    for (std::size_t j = 0; j < take && j < indices.size(); ++j) {
      in_test[indices[j]] = true;
    }
  }

  Corpus train(corpus.source_name());
  Corpus test(corpus.source_name());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    AspectInstance inst = corpus[i];
    (in_test[i] ? test : train).add(std::move(inst));
  }
  return {std::move(train), std::move(test)};
}

void write_canonical(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + path.string());
  }
  for (const AspectInstance& inst : corpus.instances()) {
    nlohmann::ordered_json record;
    record["review_id"] = inst.review_id;
    record["text"] = inst.text;
    record["aspect"] = inst.aspect;
    record["polarity"] = std::string(to_string(inst.polarity));
    out << record.dump() << '\n';
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace absa
