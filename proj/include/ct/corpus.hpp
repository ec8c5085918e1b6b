#pragma once

#include <Eigen/SparseCore>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ct/time.hpp"

namespace ct {

using Index = Eigen::Index;

/// Term-by-bin matrix of one feed. Row-major so nonzeros iterate term-major.
using SparseSeries = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

struct Document {
  std::string feed_id;
  Instant timestamp;
  std::string text;
};

struct TokenizerConfig {
  std::unordered_set<std::string> stopwords;
  bool stem = true;
};

/// A small English stop word list used when no list is supplied.
std::unordered_set<std::string> default_stopwords();

/// Lowercases, splits on runs of non-alphanumeric ASCII, drops purely numeric
/// tokens and stop words, and Porter-stems when enabled. Bytes >= 0x80 are
/// treated as word characters so UTF-8 words stay intact.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config);

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Terms must be unique; their order defines the index.
  explicit Vocabulary(std::vector<std::string> terms);

  Index size() const { return static_cast<Index>(terms_.size()); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::string& term(Index i) const { return terms_[static_cast<std::size_t>(i)]; }
  std::optional<Index> index_of(std::string_view term) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.terms_ == b.terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, Index> index_;
};

/// Lexicographically sorted set of surviving tokens. Throws EmptyCorpus when nothing survives.
Vocabulary build_vocabulary(std::span<const Document> docs, const TokenizerConfig& config,
                            std::size_t min_document_frequency = 1);

struct FeedSeries {
  std::string feed_id;
  SparseSeries matrix;
};

enum class Normalization { Counts, Tfidf };

std::string_view normalization_name(Normalization n);

struct Corpus {
  Vocabulary vocabulary;
  Instant t0{};
  Millis bin_width{std::chrono::hours{1}};
  Index num_bins = 0;
  std::vector<FeedSeries> feeds;
  Normalization normalization = Normalization::Counts;
  /// Synthetic corpora may hold negative values.
  bool synthetic = false;
  UtcOffset timezone{};

  Index num_terms() const { return vocabulary.size(); }
  Index num_feeds() const { return static_cast<Index>(feeds.size()); }
  std::optional<Index> feed_index(std::string_view feed_id) const;

  /// Checks shapes, unique feed ids and value constraints. Throws FormatError.
  void validate() const;
};

/// Bit-exact comparison of values, metadata and ordering.
bool operator==(const Corpus& a, const Corpus& b);

struct FeaturizeResult {
  Corpus corpus;
  std::size_t ingested = 0;
  std::size_t dropped = 0;
};

/// Counts vocabulary terms per (feed, bin). Documents outside
/// [t0, t0 + num_bins * bin_width) are dropped and counted. When `feed_ids`
/// is empty the feeds are the sorted distinct ids of the stream.
FeaturizeResult featurize(std::span<const Document> docs, const Vocabulary& vocabulary,
                          const TokenizerConfig& config, Instant t0, Millis bin_width, Index num_bins,
                          std::vector<std::string> feed_ids = {});

/// Scales every count by idf(w) = max(0, ln(F*T / (1 + df(w)))) where df counts
/// (feed, bin) cells holding the term.
Corpus tfidf_normalize(const Corpus& counts);

inline constexpr int kCorpusFormatVersion = 1;

void store_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

/// Canonical text forms written by store_corpus.
std::string corpus_meta_json(const Corpus& corpus);
std::string corpus_matrix_csv(const Corpus& corpus);

/// Digest of the canonical stored form; binds reports and models to their data.
std::string corpus_hash(const Corpus& corpus);

/// Reads {"feed","timestamp","text"} JSON lines. Blank lines are skipped.
/// Throws FormatError naming the 1-based line number of the first bad line.
std::vector<Document> read_documents_jsonl(std::istream& in);

}  // namespace ct
