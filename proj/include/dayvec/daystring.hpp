#pragma once

#include "dayvec/ingest.hpp"
#include "dayvec/random.hpp"
#include "dayvec/types.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace dayvec {

constexpr int kWindowMinutes = 20;
constexpr int kWindowsPerDay = 24 * 60 / kWindowMinutes;  // 72
inline const std::string kNowhereToken = "Nowhere";
inline const std::string kPadToken = "[PAD]";

// Closed, ordered token vocabulary. Data tokens get ids 0..n-1 in list
// order; the reserved PAD token always sits last and is never produced by
// aggregation or accepted by tokenize().
class Vocabulary {
 public:
  // `data_tokens` must be unique, non-empty and contain "Nowhere".
  explicit Vocabulary(std::vector<std::string> data_tokens);

  static Vocabulary default_vocabulary();

  int id(const std::string& token) const;       // throws on unknown token
  bool contains(const std::string& token) const;
  const std::string& token(int id) const;

  int pad_id() const { return static_cast<int>(tokens_.size()) - 1; }
  int nowhere_id() const { return nowhere_id_; }
  // Total size including PAD; this is the encoder's vocab_size.
  int size() const { return static_cast<int>(tokens_.size()); }
  int n_data_tokens() const { return size() - 1; }

  // Data tokens only (excludes PAD), in id order.
  std::vector<std::string> data_tokens() const;
  std::set<std::string> data_token_set() const;

 private:
  std::vector<std::string> tokens_;  // data tokens then PAD
  std::map<std::string, int> ids_;
  int nowhere_id_ = -1;
};

struct TokenSequence {
  std::string participant_id;
  Date date = 0;
  std::vector<std::string> tokens;  // exactly kWindowsPerDay entries
};

struct DayString {
  std::string participant_id;
  Date date = 0;
  std::string text;  // tokens joined by single spaces
};

// Reduces a day to 72 window tokens: the modal location of each 20-minute
// window, "Nowhere" where the window has no events. Ties are broken by a
// uniform draw over the tied tokens sorted by vocabulary id, consuming
// exactly one rng.bounded(n_tied) per tie window.
TokenSequence aggregate_day(const DayRecord& day, const Vocabulary& vocab,
                            Rng& rng);

DayString render_string(const TokenSequence& seq);

// Whitespace-split words mapped to vocabulary ids. Rejects unknown words and
// sequences longer than 255 tokens.
std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab);

constexpr int kMaxTokens = 255;

// JSON-lines corpus of day strings: {"participant_id", "date", "text"}.
void write_daystring_corpus(std::ostream& out,
                            const std::vector<DayString>& corpus);
std::vector<DayString> read_daystring_corpus(std::istream& in);

}  // namespace dayvec
