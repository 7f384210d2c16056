#ifndef LBD_INGEST_HPP_
#define LBD_INGEST_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lbd {

struct Document {
  std::string doc_id;
  std::string title;
  std::string body;

  bool operator==(const Document&) const = default;
};

// One sentence of a document. sent_id is "s:<doc_id>:<index>" with a 0-based
// index that runs over the title's sentences first, then the body's.
struct Sentence {
  std::string sent_id;
  std::string text;
  std::string doc_id;
};

struct VocabularyEntry {
  std::string code;
  std::string canonical_name;
  std::vector<std::string> synonyms;
};

// Controlled vocabulary keyed by lowercase code ("c0079201").
class Vocabulary {
 public:
  // Appends a synonym row. Rows for one code must agree on canonical_name.
  void add(std::string_view code, std::string_view canonical_name,
           std::string_view synonym);

  const VocabularyEntry* find(std::string_view code) const;
  // Canonical name, or an empty string for unknown codes.
  std::string label(std::string_view code) const;

  const std::vector<VocabularyEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<VocabularyEntry> entries_;
  std::unordered_map<std::string, std::size_t> by_code_;
};

enum class TokenType { kLemma, kNgram, kEntity, kCoded };

std::string_view token_type_name(TokenType type);

struct Token {
  std::string key;
  TokenType type;
  std::string surface;
};

// Parses a token key (`l:<pos>:<word>`, `n:<w1>_<w2>[_<w3>]`,
// `e:<phrase>`, `m:<code>`). Returns nullopt when the key does not follow
// that grammar.
std::optional<Token> parse_token(std::string_view key);
std::optional<TokenType> token_type_of(std::string_view key);

// Multiset of token keys for one sentence. Counts are always >= 1.
struct TokenSet {
  std::string sent_id;
  std::map<std::string, std::uint32_t> counts;

  std::uint64_t total() const;
  bool operator==(const TokenSet&) const = default;
};

// Corpus: one JSON object per line with string fields doc_id, title, body.
std::vector<Document> parse_corpus(std::string_view contents);
std::vector<Document> load_corpus(const std::filesystem::path& path);

// Vocabulary: TSV rows `code<TAB>canonical_name<TAB>synonym`. An optional
// header row starting with "code" is skipped.
Vocabulary parse_vocabulary(std::string_view contents);
Vocabulary load_vocabulary(const std::filesystem::path& path);
std::string serialize_vocabulary(const Vocabulary& vocab);

// One lowercase phrase per line; blank lines and '#' comments skipped.
std::vector<std::string> load_phrase_list(const std::filesystem::path& path);
// `word<TAB>pos` rows.
std::map<std::string, std::string> load_pos_lexicon(const std::filesystem::path& path);

std::vector<std::string> split_sentences(std::string_view text);
std::vector<Sentence> sentences_of(const Document& doc);

// Lowercases, replaces punctuation with whitespace, drops apostrophes and
// splits into words. Non-ASCII bytes are kept as word characters.
std::vector<std::string> normalize_words(std::string_view text);
// Rule-based suffix stripping (-s, -es, -ies, -ing, -ed).
std::string lemmatize(std::string_view word);

const std::set<std::string, std::less<>>& default_stopwords();
const std::map<std::string, std::string>& default_pos_lexicon();

// Bigrams and trigrams (no stopword constituents) occurring at least
// min_count times across the word sequences, as underscore-joined lemmas.
std::vector<std::string> build_ngram_list(
    std::span<const std::vector<std::string>> word_sequences, int min_count,
    const std::set<std::string, std::less<>>& stopwords = default_stopwords());

class Tokenizer {
 public:
  Tokenizer(const Vocabulary& vocab, std::span<const std::string> entity_lexicon,
            std::span<const std::string> ngram_list,
            std::map<std::string, std::string> pos_lexicon = default_pos_lexicon(),
            std::set<std::string, std::less<>> stopwords = default_stopwords());

  TokenSet tokenize(const Sentence& sentence) const;

 private:
  struct PhraseIndex {
    std::unordered_map<std::string, std::string> value_by_phrase;
    std::size_t max_words = 0;
  };

  static void add_phrase(PhraseIndex& index, std::string_view phrase,
                         const std::string& value, bool keep_smallest);

  PhraseIndex coded_;
  PhraseIndex entities_;
  std::set<std::string, std::less<>> ngrams_;
  std::map<std::string, std::string> pos_lexicon_;
  std::set<std::string, std::less<>> stopwords_;
};

struct IngestOptions {
  std::vector<std::string> entity_lexicon;
  std::map<std::string, std::string> pos_lexicon = default_pos_lexicon();
  std::set<std::string, std::less<>> stopwords = default_stopwords();
  int ngram_min_count = 3;
};

struct IngestResult {
  std::vector<Sentence> sentences;
  std::vector<std::string> ngrams;
  std::vector<TokenSet> token_sets;
};

// Splits every document, builds the n-gram list over the whole corpus and
// tokenizes each sentence. Output follows document order.
IngestResult ingest_corpus(std::span<const Document> docs, const Vocabulary& vocab,
                           const IngestOptions& options);

// Token store: one JSON object per line {"sent_id": ..., "tokens": {key: n}}.
std::string serialize_token_sets(std::span<const TokenSet> sets);
std::vector<TokenSet> parse_token_sets(std::string_view contents);

}  // namespace lbd

#endif  // LBD_INGEST_HPP_
