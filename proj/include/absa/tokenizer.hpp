#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absa/auxpair.hpp"
#include "absa/polarity.hpp"

namespace absa {

// Subword vocabulary with the four special tokens at fixed low ids and
// "##"-prefixed continuation pieces. Ids are dense from 0; the on-disk form
// is one token per line with the line number as id.
class Vocab {
 public:
  static constexpr std::string_view kPad = "[PAD]";
  static constexpr std::string_view kUnk = "[UNK]";
  static constexpr std::string_view kCls = "[CLS]";
  static constexpr std::string_view kSep = "[SEP]";
  static constexpr std::int32_t kPadId = 0;
  static constexpr std::int32_t kUnkId = 1;
  static constexpr std::int32_t kClsId = 2;
  static constexpr std::int32_t kSepId = 3;
  static constexpr int kNumSpecialTokens = 4;

  // Builds from an ordered token list. The list must start with the special
  // tokens and contain no duplicates.
  static Vocab from_tokens(std::vector<std::string> tokens);

  std::int32_t lookup(std::string_view token) const;  // -1 when absent
  bool contains(std::string_view token) const { return lookup(token) >= 0; }
  const std::string& token_of(std::int32_t id) const;
  std::int32_t size() const { return static_cast<std::int32_t>(tokens_.size()); }

  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

// Frequency-based vocabulary: special tokens, then one single-character
// token plus its "##" continuation per character meeting min_frequency, then
// the most frequent whole words until target_size. Deterministic for fixed
// inputs.
Vocab train_vocab(const std::vector<std::string>& corpus_texts,
                  int target_size, int min_frequency);

// Greedy longest-prefix-match segmentation of one whitespace-free word.
// Non-initial pieces carry "##"; an unsegmentable word becomes [UNK].
std::vector<std::string> wordpiece_tokenize(const std::string& word,
                                            const Vocab& vocab);

std::vector<std::string> whitespace_split(const std::string& text);

// Whitespace pre-split + WordPiece over each word, mapped to ids.
std::vector<std::int32_t> tokenize_to_ids(const std::string& text,
                                          const Vocab& vocab);

// One packed sentence pair: [CLS] A [SEP] B [SEP] [PAD]... with segment 0
// through the first [SEP], segment 1 through the second, and mask 1 exactly
// on non-[PAD] positions.
struct EncodedSequence {
  std::vector<std::int32_t> token_ids;
  std::vector<std::int32_t> segment_ids;
  std::vector<std::int32_t> attention_mask;
  std::int32_t label = -1;

  bool operator==(const EncodedSequence&) const = default;
};

// Packs a pair into max_len positions. Over-length pairs are truncated by
// repeatedly dropping the last token of the currently longer sentence (ties
// drop from sentence A, keeping the short auxiliary sentence whole).
EncodedSequence encode_pair(const std::string& sentence_a,
                            const std::string& sentence_b, const Vocab& vocab,
                            int max_len);

// A PairDataset after tokenization, ready for batching. Grouping and gold
// labels carry over so B-mode predictions can be decoded per instance.
struct EncodedDataset {
  AuxMode mode = AuxMode::nli_m;
  int max_len = 0;
  std::vector<EncodedSequence> sequences;
  std::vector<std::array<std::size_t, kNumPolarities>> groups;
  std::vector<Polarity> gold;  // one per source instance

  std::size_t size() const { return sequences.size(); }
};

EncodedDataset encode_dataset(const PairDataset& dataset, const Vocab& vocab,
                              int max_len);

}  // namespace absa
