#include "absa/auxpair.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace absa {

namespace {

std::size_t count_occurrences(const std::string& haystack,
                              const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

// Substitutes a placeholder that must occur exactly once.
std::string substitute(const std::string& tmpl, const std::string& placeholder,
                       const std::string& value) {
  const std::size_t n = count_occurrences(tmpl, placeholder);
  if (n != 1) {
    throw std::invalid_argument("template must contain " + placeholder +
                                " exactly once, found " + std::to_string(n) +
                                ": '" + tmpl + "'");
  }
  std::string out = tmpl;
  out.replace(out.find(placeholder), placeholder.size(), value);
  return out;
}

}  // namespace

std::string_view mode_label(AuxMode m) {
  switch (m) {
    case AuxMode::qa_m: return "QA-M";
    case AuxMode::nli_m: return "NLI-M";
    case AuxMode::qa_b: return "QA-B";
    case AuxMode::nli_b: return "NLI-B";
  }
  return "invalid";
}

std::string_view mode_cli_name(AuxMode m) {
  switch (m) {
    case AuxMode::qa_m: return "qa-m";
    case AuxMode::nli_m: return "nli-m";
    case AuxMode::qa_b: return "qa-b";
    case AuxMode::nli_b: return "nli-b";
  }
  return "invalid";
}

AuxMode mode_from_string(std::string_view s) {
  for (AuxMode m : {AuxMode::qa_m, AuxMode::nli_m, AuxMode::qa_b,
                    AuxMode::nli_b}) {
    if (s == mode_cli_name(m) || s == mode_label(m)) return m;
  }
  throw std::invalid_argument("unknown auxiliary-sentence mode '" +
                              std::string(s) +
                              "' (expected qa-m|nli-m|qa-b|nli-b)");
}

TemplateSet TemplateSet::english() { return TemplateSet{}; }

TemplateSet TemplateSet::persian() {
  TemplateSet t;
  t.qa_m_template = "نظر شما در مورد {aspect} چیست";
  t.qa_b_template = "قطبیت جنبه {aspect} {polarity} است";
  t.nli_b_separator = "-";
  t.language_tag = "fa";
  t.polarity_words = {"مثبت", "منفی", "خنثی"};
  return t;
}

TemplateSet TemplateSet::for_language(std::string_view tag) {
  if (tag == "en") return english();
  if (tag == "fa") return persian();
  throw std::invalid_argument("no template defaults for language tag '" +
                              std::string(tag) + "' (expected en|fa)");
}

void TemplateSet::validate() const {
  if (count_occurrences(qa_m_template, "{aspect}") != 1) {
    throw std::invalid_argument(
        "qa_m_template must contain {aspect} exactly once: '" + qa_m_template +
        "'");
  }
  if (count_occurrences(qa_b_template, "{aspect}") != 1 ||
      count_occurrences(qa_b_template, "{polarity}") != 1) {
    throw std::invalid_argument(
        "qa_b_template must contain {aspect} and {polarity} exactly once: '" +
        qa_b_template + "'");
  }
  for (const std::string& word : polarity_words) {
    if (word.empty()) {
      throw std::invalid_argument("polarity words must be nonempty");
    }
  }
}

std::string build_auxiliary(const std::string& aspect, AuxMode mode,
                            const TemplateSet& templates,
                            std::optional<Polarity> candidate) {
  if (is_binary_mode(mode) && !candidate) {
    throw std::invalid_argument(std::string(mode_label(mode)) +
                                " requires a candidate polarity");
  }
  if (!is_binary_mode(mode) && candidate) {
    throw std::invalid_argument(std::string(mode_label(mode)) +
                                " takes no candidate polarity");
  }
  switch (mode) {
    case AuxMode::nli_m:
      return aspect;
    case AuxMode::qa_m:
      return substitute(templates.qa_m_template, "{aspect}", aspect);
    case AuxMode::nli_b:
      return aspect + templates.nli_b_separator +
             templates.polarity_words[ordinal(*candidate)];
    case AuxMode::qa_b:
      return substitute(
          substitute(templates.qa_b_template, "{aspect}", aspect), "{polarity}",
          templates.polarity_words[ordinal(*candidate)]);
  }
  throw std::invalid_argument("invalid auxiliary-sentence mode");
}

PairDataset expand_corpus(const Corpus& corpus, AuxMode mode,
                          const TemplateSet& templates) {
  templates.validate();
  PairDataset dataset;
  dataset.mode = mode;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const AspectInstance& inst = corpus[i];
    if (is_binary_mode(mode)) {
      std::array<std::size_t, kNumPolarities> group{};
      for (Polarity candidate : kAllPolarities) {
        PairExample ex;
        ex.instance_index = i;
        ex.review_id = inst.review_id;
        ex.aspect = inst.aspect;
        ex.gold = inst.polarity;
        ex.candidate = candidate;
        ex.sentence_a = inst.text;
        ex.sentence_b = build_auxiliary(inst.aspect, mode, templates, candidate);
        ex.label = (candidate == inst.polarity) ? kLabelYes : kLabelNo;
        group[ordinal(candidate)] = dataset.examples.size();
        dataset.examples.push_back(std::move(ex));
      }
      dataset.groups.push_back(group);
    } else {
      PairExample ex;
      ex.instance_index = i;
      ex.review_id = inst.review_id;
      ex.aspect = inst.aspect;
      ex.gold = inst.polarity;
      ex.sentence_a = inst.text;
      ex.sentence_b = build_auxiliary(inst.aspect, mode, templates);
      ex.label = ordinal(inst.polarity);
      dataset.examples.push_back(std::move(ex));
    }
  }
  return dataset;
}

Polarity decode_m(
    const std::array<double, kNumPolarities>& class_probabilities) {
  double sum = 0.0;
  for (double p : class_probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument(
          "class probabilities must be finite and nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw std::invalid_argument("class probabilities must sum to 1 (got " +
                                std::to_string(sum) + ")");
  }
  int best = 0;
  for (int c = 1; c < kNumPolarities; ++c) {
    if (class_probabilities[c] > class_probabilities[best]) best = c;
  }
  return polarity_from_ordinal(best);
}

Polarity decode_b(const std::array<double, kNumPolarities>& yes_probabilities) {
  for (double p : yes_probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("yes-probabilities must lie in [0, 1]");
    }
  }
  int best = 0;
  for (int c = 1; c < kNumPolarities; ++c) {
    if (yes_probabilities[c] > yes_probabilities[best]) best = c;
  }
  return polarity_from_ordinal(best);
}

void write_pairs_jsonl(const PairDataset& dataset,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + path.string());
  }
  for (const PairExample& ex : dataset.examples) {
    nlohmann::ordered_json record;
    record["sentence_a"] = ex.sentence_a;
    record["sentence_b"] = ex.sentence_b;
    if (is_binary_mode(dataset.mode)) {
      record["label"] = ex.label == kLabelYes ? "yes" : "no";
      record["candidate"] = std::string(to_string(*ex.candidate));
    } else {
      record["label"] = std::string(to_string(polarity_from_ordinal(ex.label)));
    }
    record["gold"] = std::string(to_string(ex.gold));
    record["review_id"] = ex.review_id;
    record["aspect"] = ex.aspect;
    record["instance_index"] = ex.instance_index;
    out << record.dump() << '\n';
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

PairDataset read_pairs_jsonl(const std::filesystem::path& path, AuxMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open pairs file: " + path.string());
  }
  PairDataset dataset;
  dataset.mode = mode;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": malformed JSON record");
    }
    PairExample ex;
    ex.sentence_a = record.at("sentence_a").get<std::string>();
    ex.sentence_b = record.at("sentence_b").get<std::string>();
    ex.review_id = record.at("review_id").get<std::string>();
    ex.aspect = record.at("aspect").get<std::string>();
    ex.gold = polarity_from_string(record.at("gold").get<std::string>());
    ex.instance_index = record.at("instance_index").get<std::size_t>();
    const std::string label = record.at("label").get<std::string>();
    if (is_binary_mode(mode)) {
      ex.candidate =
          polarity_from_string(record.at("candidate").get<std::string>());
      if (label != "yes" && label != "no") {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                 ": binary label must be yes|no, got '" +
                                 label + "'");
      }
      ex.label = label == "yes" ? kLabelYes : kLabelNo;
    } else {
      ex.label = ordinal(polarity_from_string(label));
    }
    dataset.examples.push_back(std::move(ex));
  }
  if (is_binary_mode(mode)) {
    if (dataset.examples.size() % kNumPolarities != 0) {
      throw std::runtime_error(path.string() +
                               ": binary pair file must hold groups of 3");
    }
    for (std::size_t i = 0; i < dataset.examples.size(); i += kNumPolarities) {
      std::array<std::size_t, kNumPolarities> group{};
      for (int c = 0; c < kNumPolarities; ++c) {
        const PairExample& ex = dataset.examples[i + c];
        if (!ex.candidate || ordinal(*ex.candidate) != c ||
            ex.instance_index != dataset.examples[i].instance_index) {
          throw std::runtime_error(
              path.string() +
              ": binary groups must be contiguous in canonical polarity order");
        }
        group[c] = i + c;
      }
      dataset.groups.push_back(group);
    }
  }
  return dataset;
}

}  // namespace absa
