#include "lbd/ingest.hpp"

#include <algorithm>
#include <cctype>
#include "json.hpp"

#include "lbd/error.hpp"
#include "lbd/text_format.hpp"

namespace lbd {

namespace {

using json = nlohmann::json;

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

bool is_valid_id_text(std::string_view id) {
  if (id.empty()) return false;
  return std::none_of(id.begin(), id.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c));
  });
}

// A word piece inside a token key: non-empty, no separators.
bool is_key_word(std::string_view word) {
  if (word.empty()) return false;
  return std::all_of(word.begin(), word.end(), [](char c) {
    return c != ':' && c != '_' && !std::isspace(static_cast<unsigned char>(c));
  });
}

std::string join(std::span<const std::string> words, char sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out.push_back(sep);
    out += words[i];
  }
  return out;
}

std::vector<std::string> lemmas_of(std::span<const std::string> words) {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(lemmatize(w));
  return out;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

const std::vector<std::string_view>& abbreviations() {
  static const std::vector<std::string_view> kAbbreviations = {
      "e.g.", "i.e.", "et al.", "dr.", "vs."};
  return kAbbreviations;
}

// True when text (ending at a '.') ends with a guarded abbreviation that
// starts at a word boundary.
bool ends_with_abbreviation(std::string_view text) {
  const std::string lower = to_lower(text);
  for (std::string_view abbrev : abbreviations()) {
    if (!ends_with(lower, abbrev)) continue;
    const std::size_t start = lower.size() - abbrev.size();
    if (start == 0 || !std::isalnum(static_cast<unsigned char>(lower[start - 1]))) {
      return true;
    }
  }
  return false;
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace

// ---------------------------------------------------------------------------
// Vocabulary

void Vocabulary::add(std::string_view code, std::string_view canonical_name,
                     std::string_view synonym) {
  std::string key = to_lower(trim(code));
  if (!is_valid_id_text(key) || key.find(':') != std::string::npos) {
    throw Error(ErrorKind::kMalformedRecord, "invalid vocabulary code '" +
                                                 std::string(code) + "'");
  }
  std::string name(trim(canonical_name));
  // An empty synonym column lists the canonical name alone.
  std::string syn(trim(synonym).empty() ? name : std::string(trim(synonym)));
  if (syn.empty()) {
    throw Error(ErrorKind::kMalformedRecord, "empty name and synonym for code " + key);
  }
  auto it = by_code_.find(key);
  if (it == by_code_.end()) {
    by_code_.emplace(key, entries_.size());
    entries_.push_back({key, std::move(name), {std::move(syn)}});
    return;
  }
  VocabularyEntry& entry = entries_[it->second];
  if (entry.canonical_name != name) {
    throw Error(ErrorKind::kMalformedRecord,
                "conflicting canonical names for code " + key);
  }
  entry.synonyms.push_back(std::move(syn));
}

const VocabularyEntry* Vocabulary::find(std::string_view code) const {
  auto it = by_code_.find(to_lower(code));
  return it == by_code_.end() ? nullptr : &entries_[it->second];
}

std::string Vocabulary::label(std::string_view code) const {
  const VocabularyEntry* entry = find(code);
  return entry ? entry->canonical_name : std::string();
}

// ---------------------------------------------------------------------------
// Tokens

std::string_view token_type_name(TokenType type) {
  switch (type) {
    case TokenType::kLemma: return "lemma";
    case TokenType::kNgram: return "ngram";
    case TokenType::kEntity: return "entity";
    case TokenType::kCoded: return "coded";
  }
  return "unknown";
}

std::optional<Token> parse_token(std::string_view key) {
  if (key.size() < 3 || key[1] != ':') return std::nullopt;
  const std::string_view rest = key.substr(2);
  switch (key[0]) {
    case 'l': {
      const std::size_t colon = rest.find(':');
      if (colon == std::string_view::npos || colon == 0) return std::nullopt;
      const std::string_view pos = rest.substr(0, colon);
      const std::string_view word = rest.substr(colon + 1);
      if (!std::all_of(pos.begin(), pos.end(),
                       [](char c) { return c >= 'a' && c <= 'z'; })) {
        return std::nullopt;
      }
      if (!is_key_word(word)) return std::nullopt;
      return Token{std::string(key), TokenType::kLemma, std::string(word)};
    }
    case 'n':
    case 'e': {
      const auto parts = split(rest, '_');
      if (!std::all_of(parts.begin(), parts.end(), is_key_word)) return std::nullopt;
      const bool ngram = key[0] == 'n';
      if (ngram && (parts.size() < 2 || parts.size() > 3)) return std::nullopt;
      std::string surface(rest);
      std::replace(surface.begin(), surface.end(), '_', ' ');
      return Token{std::string(key), ngram ? TokenType::kNgram : TokenType::kEntity,
                   std::move(surface)};
    }
    case 'm': {
      if (!is_valid_id_text(rest) || rest.find(':') != std::string_view::npos) {
        return std::nullopt;
      }
      return Token{std::string(key), TokenType::kCoded, std::string(rest)};
    }
    default:
      return std::nullopt;
  }
}

std::optional<TokenType> token_type_of(std::string_view key) {
  if (key.size() < 3 || key[1] != ':') return std::nullopt;
  switch (key[0]) {
    case 'l': return TokenType::kLemma;
    case 'n': return TokenType::kNgram;
    case 'e': return TokenType::kEntity;
    case 'm': return TokenType::kCoded;
    default: return std::nullopt;
  }
}

std::uint64_t TokenSet::total() const {
  std::uint64_t sum = 0;
  for (const auto& [key, count] : counts) sum += count;
  return sum;
}

// ---------------------------------------------------------------------------
// File formats

std::vector<Document> parse_corpus(std::string_view contents) {
  std::vector<Document> docs;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (std::string_view line : split(contents, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto malformed = [&](const std::string& why) {
      return Error(ErrorKind::kMalformedRecord,
                   "line " + std::to_string(line_no) + ": " + why);
    };
    json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!record.is_object()) throw malformed("not a JSON object");
    Document doc;
    for (auto [field, target] : {std::pair{"doc_id", &doc.doc_id},
                                 std::pair{"title", &doc.title},
                                 std::pair{"body", &doc.body}}) {
      auto it = record.find(field);
      if (it == record.end() || !it->is_string()) {
        throw malformed(std::string("missing string field '") + field + "'");
      }
      *target = it->get<std::string>();
    }
    if (!is_valid_id_text(doc.doc_id)) throw malformed("invalid doc_id");
    if (trim(doc.title).empty() && trim(doc.body).empty()) {
      throw malformed("both title and body are empty");
    }
    if (!seen.insert(doc.doc_id).second) {
      throw Error(ErrorKind::kDuplicateDocId, doc.doc_id);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path));
}

Vocabulary parse_vocabulary(std::string_view contents) {
  Vocabulary vocab;
  std::size_t line_no = 0;
  for (std::string_view line : split(contents, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw Error(ErrorKind::kMalformedRecord,
                  "vocabulary line " + std::to_string(line_no) +
                      ": expected 3 tab-separated columns");
    }
    if (line_no == 1 && to_lower(trim(fields[0])) == "code") continue;
    try {
      vocab.add(fields[0], fields[1], fields[2]);
    } catch (const Error& e) {
      throw Error(e.kind(), "vocabulary line " + std::to_string(line_no) + ": " +
                                e.what());
    }
  }
  return vocab;
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  return parse_vocabulary(read_file(path));
}

std::string serialize_vocabulary(const Vocabulary& vocab) {
  std::string out = "code\tcanonical_name\tsynonym\n";
  for (const auto& entry : vocab.entries()) {
    for (const auto& syn : entry.synonyms) {
      out += entry.code + '\t' + entry.canonical_name + '\t' + syn + '\n';
    }
  }
  return out;
}

std::vector<std::string> load_phrase_list(const std::filesystem::path& path) {
  std::vector<std::string> phrases;
  for (std::string_view line : split(read_file(path), '\n')) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    phrases.push_back(to_lower(line));
  }
  return phrases;
}

std::map<std::string, std::string> load_pos_lexicon(const std::filesystem::path& path) {
  std::map<std::string, std::string> lexicon;
  std::size_t line_no = 0;
  for (std::string_view line : split(read_file(path), '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    const std::string pos = fields.size() == 2 ? to_lower(trim(fields[1])) : "";
    if (pos.empty() || !std::all_of(pos.begin(), pos.end(),
                                    [](char c) { return c >= 'a' && c <= 'z'; })) {
      throw Error(ErrorKind::kMalformedRecord,
                  "pos lexicon line " + std::to_string(line_no));
    }
    lexicon[to_lower(trim(fields[0]))] = pos;
  }
  return lexicon;
}

// ---------------------------------------------------------------------------
// Text processing

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> fragments;
  const auto emit = [&](std::string_view piece) {
    piece = trim(piece);
    if (!piece.empty()) fragments.emplace_back(piece);
  };
  const std::size_t n = text.size();
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < n) {
    if (!is_terminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t last = i;
    while (last + 1 < n && is_terminator(text[last + 1])) ++last;
    const std::size_t after = last + 1;
    bool boundary = after == n;
    if (!boundary && std::isspace(static_cast<unsigned char>(text[after]))) {
      std::size_t next = after;
      while (next < n && std::isspace(static_cast<unsigned char>(text[next]))) ++next;
      boundary = next == n || std::isupper(static_cast<unsigned char>(text[next]));
    }
    if (boundary && last == i && text[i] == '.' &&
        ends_with_abbreviation(text.substr(0, after))) {
      boundary = false;
    }
    if (boundary) {
      emit(text.substr(start, after - start));
      start = after;
    }
    i = after;
  }
  if (start < n) emit(text.substr(start));
  return fragments;
}

std::vector<Sentence> sentences_of(const Document& doc) {
  std::vector<Sentence> out;
  for (const std::string* part : {&doc.title, &doc.body}) {
    for (auto& fragment : split_sentences(*part)) {
      out.push_back({"s:" + doc.doc_id + ":" + std::to_string(out.size()),
                     std::move(fragment), doc.doc_id});
    }
  }
  return out;
}

std::vector<std::string> normalize_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c == '\'') continue;
    if (is_word_byte(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::string lemmatize(std::string_view word) {
  std::string w(word);
  if (w.size() <= 3) return w;
  if (ends_with(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  if (ends_with(w, "sses")) return w.substr(0, w.size() - 2);
  if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) return w;
  if (ends_with(w, "es")) {
    const std::string stem = w.substr(0, w.size() - 2);
    if (ends_with(stem, "s") || ends_with(stem, "x") || ends_with(stem, "z") ||
        ends_with(stem, "ch") || ends_with(stem, "sh")) {
      return stem;
    }
    return w.substr(0, w.size() - 1);
  }
  if (ends_with(w, "s")) return w.substr(0, w.size() - 1);
  for (std::string_view suffix : {std::string_view("ing"), std::string_view("ed")}) {
    if (!ends_with(w, suffix)) continue;
    std::string stem = w.substr(0, w.size() - suffix.size());
    if (stem.size() < 3 || std::none_of(stem.begin(), stem.end(), is_vowel)) {
      return w;
    }
    const char last = stem.back();
    const char prev = stem[stem.size() - 2];
    if (last == prev && !is_vowel(last) && last != 'l' && last != 's' && last != 'z') {
      stem.pop_back();
    } else if (ends_with(stem, "at") || ends_with(stem, "bl") || ends_with(stem, "iz")) {
      stem.push_back('e');
    }
    return stem;
  }
  return w;
}

const std::set<std::string, std::less<>>& default_stopwords() {
  static const std::set<std::string, std::less<>> kStopwords = {
      "a", "about", "above", "after", "again", "against", "all", "also", "am",
      "among", "an", "and", "any", "are", "as", "at", "be", "because", "been",
      "before", "being", "below", "between", "both", "but", "by", "can",
      "could", "did", "do", "does", "doing", "done", "down", "during", "each",
      "either", "et", "al", "etc", "few", "for", "from", "further", "had",
      "has", "have", "having", "he", "her", "here", "hers", "herself", "him",
      "himself", "his", "how", "however", "i", "if", "in", "into", "is", "it",
      "its", "itself", "just", "may", "me", "might", "more", "most", "much",
      "must", "my", "myself", "neither", "no", "nor", "not", "now", "of",
      "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves",
      "out", "over", "own", "per", "same", "shall", "she", "should", "since",
      "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
      "themselves", "then", "there", "these", "they", "this", "those",
      "through", "thus", "to", "too", "under", "until", "up", "upon", "us",
      "very", "via", "was", "we", "were", "what", "when", "where", "whereas",
      "whether", "which", "while", "who", "whom", "whose", "why", "will",
      "with", "within", "without", "would", "yet", "you", "your", "yours",
      "yourself", "yourselves", "although", "across", "along", "around",
      "towards", "toward", "onto", "whereby", "wherein", "hence",
  };
  return kStopwords;
}

const std::map<std::string, std::string>& default_pos_lexicon() {
  static const std::map<std::string, std::string> kLexicon = {
      {"associate", "verb"}, {"cause", "verb"},     {"describe", "verb"},
      {"follow", "verb"},    {"find", "verb"},      {"found", "verb"},
      {"increase", "verb"},  {"decrease", "verb"},  {"accelerate", "verb"},
      {"reduce", "verb"},    {"show", "verb"},      {"suggest", "verb"},
      {"report", "verb"},    {"observe", "verb"},   {"induce", "verb"},
      {"clinical", "adj"},   {"rural", "adj"},      {"urban", "adj"},
      {"central", "adj"},    {"significant", "adj"}, {"high", "adj"},
      {"low", "adj"},        {"new", "adj"},        {"human", "adj"},
      {"viral", "adj"},      {"tropical", "adj"},   {"global", "adj"},
      {"environmental", "adj"}, {"infectious", "adj"}, {"fungal", "adj"},
      {"recent", "adj"},     {"statistically", "adv"}, {"significantly", "adv"},
      {"rapidly", "adv"},
  };
  return kLexicon;
}

std::vector<std::string> build_ngram_list(
    std::span<const std::vector<std::string>> word_sequences, int min_count,
    const std::set<std::string, std::less<>>& stopwords) {
  if (min_count < 2) {
    throw Error(ErrorKind::kInvalidArgument, "ngram min_count must be >= 2");
  }
  std::map<std::string, int> counts;
  for (const auto& words : word_sequences) {
    const std::vector<std::string> lemmas = lemmas_of(words);
    for (std::size_t i = 0; i < words.size(); ++i) {
      for (std::size_t len = 2; len <= 3 && i + len <= words.size(); ++len) {
        if (stopwords.contains(words[i + len - 1])) break;
        if (stopwords.contains(words[i])) break;
        if (len == 3 && stopwords.contains(words[i + 1])) break;
        ++counts[join(std::span(lemmas).subspan(i, len), '_')];
      }
    }
  }
  std::vector<std::string> out;
  for (const auto& [ngram, count] : counts) {
    if (count >= min_count) out.push_back(ngram);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tokenizer

Tokenizer::Tokenizer(const Vocabulary& vocab,
                     std::span<const std::string> entity_lexicon,
                     std::span<const std::string> ngram_list,
                     std::map<std::string, std::string> pos_lexicon,
                     std::set<std::string, std::less<>> stopwords)
    : ngrams_(ngram_list.begin(), ngram_list.end()),
      pos_lexicon_(std::move(pos_lexicon)),
      stopwords_(std::move(stopwords)) {
  for (const auto& entry : vocab.entries()) {
    add_phrase(coded_, entry.canonical_name, entry.code, /*keep_smallest=*/true);
    for (const auto& syn : entry.synonyms) {
      add_phrase(coded_, syn, entry.code, /*keep_smallest=*/true);
    }
  }
  for (const auto& phrase : entity_lexicon) {
    const auto lemmas = lemmas_of(normalize_words(phrase));
    if (lemmas.empty()) continue;
    add_phrase(entities_, phrase, join(lemmas, '_'), /*keep_smallest=*/true);
  }
}

void Tokenizer::add_phrase(PhraseIndex& index, std::string_view phrase,
                           const std::string& value, bool keep_smallest) {
  const auto lemmas = lemmas_of(normalize_words(phrase));
  if (lemmas.empty()) return;
  const std::string key = join(lemmas, ' ');
  auto [it, inserted] = index.value_by_phrase.emplace(key, value);
  if (!inserted && keep_smallest && value < it->second) it->second = value;
  index.max_words = std::max(index.max_words, lemmas.size());
}

TokenSet Tokenizer::tokenize(const Sentence& sentence) const {
  TokenSet out;
  out.sent_id = sentence.sent_id;
  const std::vector<std::string> words = normalize_words(sentence.text);
  const std::vector<std::string> lemmas = lemmas_of(words);
  const std::size_t n = words.size();

  // Greedy leftmost-longest phrase matching.
  const auto match_phrases = [&](const PhraseIndex& index, std::string_view prefix) {
    std::size_t i = 0;
    while (i < n) {
      std::size_t matched = 0;
      for (std::size_t len = std::min(index.max_words, n - i); len >= 1; --len) {
        auto it = index.value_by_phrase.find(
            join(std::span(lemmas).subspan(i, len), ' '));
        if (it != index.value_by_phrase.end()) {
          ++out.counts[std::string(prefix) + it->second];
          matched = len;
          break;
        }
      }
      i += matched > 0 ? matched : 1;
    }
  };
  match_phrases(coded_, "m:");
  match_phrases(entities_, "e:");

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t len = 2; len <= 3 && i + len <= n; ++len) {
      if (stopwords_.contains(words[i + len - 1]) || stopwords_.contains(words[i])) break;
      if (len == 3 && stopwords_.contains(words[i + 1])) break;
      const std::string key = join(std::span(lemmas).subspan(i, len), '_');
      if (ngrams_.contains(key)) ++out.counts["n:" + key];
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (words[i].size() < 3 || stopwords_.contains(words[i])) continue;
    std::string pos = "noun";
    if (auto it = pos_lexicon_.find(lemmas[i]); it != pos_lexicon_.end()) {
      pos = it->second;
    } else if (auto jt = pos_lexicon_.find(words[i]); jt != pos_lexicon_.end()) {
      pos = jt->second;
    }
    ++out.counts["l:" + pos + ":" + lemmas[i]];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus ingestion

IngestResult ingest_corpus(std::span<const Document> docs, const Vocabulary& vocab,
                           const IngestOptions& options) {
  IngestResult result;
  for (const auto& doc : docs) {
    for (auto& sentence : sentences_of(doc)) {
      result.sentences.push_back(std::move(sentence));
    }
  }
  std::vector<std::vector<std::string>> sequences;
  sequences.reserve(result.sentences.size());
  for (const auto& sentence : result.sentences) {
    sequences.push_back(normalize_words(sentence.text));
  }
  result.ngrams = build_ngram_list(sequences, options.ngram_min_count, options.stopwords);
  const Tokenizer tokenizer(vocab, options.entity_lexicon, result.ngrams,
                            options.pos_lexicon, options.stopwords);
  result.token_sets.reserve(result.sentences.size());
  for (const auto& sentence : result.sentences) {
    result.token_sets.push_back(tokenizer.tokenize(sentence));
  }
  return result;
}

std::string serialize_token_sets(std::span<const TokenSet> sets) {
  std::string out;
  for (const auto& set : sets) {
    json tokens = json::object();
    for (const auto& [key, count] : set.counts) tokens[key] = count;
    out += json{{"sent_id", set.sent_id}, {"tokens", tokens}}.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<TokenSet> parse_token_sets(std::string_view contents) {
  std::vector<TokenSet> sets;
  std::size_t line_no = 0;
  for (std::string_view line : split(contents, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto malformed = [&] {
      return Error(ErrorKind::kMalformedRecord,
                   "token store line " + std::to_string(line_no));
    };
    json record = json::parse(line, nullptr, false);
    if (!record.is_object() || !record.contains("sent_id") ||
        !record["sent_id"].is_string() || !record.contains("tokens") ||
        !record["tokens"].is_object()) {
      throw malformed();
    }
    TokenSet set;
    set.sent_id = record["sent_id"].get<std::string>();
    for (const auto& [key, count] : record["tokens"].items()) {
      if (!count.is_number_unsigned() || count.get<std::uint64_t>() == 0 ||
          !parse_token(key)) {
        throw malformed();
      }
      set.counts[key] = count.get<std::uint32_t>();
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

}  // namespace lbd
