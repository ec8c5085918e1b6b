#include "ct/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "ct/error.hpp"
#include "ct/json_io.hpp"
#include "ct/porter_stemmer.hpp"

namespace ct {
namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

bool all_digits(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string offset_name(UtcOffset offset) {
  if (offset.minutes.count() == 0) return "UTC";
  const std::string formatted = format_rfc3339(Instant{}, offset);
  return formatted.substr(formatted.size() - 6);
}

[[noreturn]] void format_error(const std::string& what) { throw Error(Errc::FormatError, what); }

}  // namespace

std::unordered_set<std::string> default_stopwords() {
  return {"a",     "about", "after", "all",   "also",  "an",    "and",   "any",   "are",   "as",    "at",
          "be",    "been",  "but",   "by",    "can",   "could", "did",   "do",    "does",  "for",   "from",
          "had",   "has",   "have",  "he",    "her",   "his",   "how",   "i",     "if",    "in",    "into",
          "is",    "it",    "its",   "just",  "more",  "most",  "my",    "new",   "no",    "not",   "now",
          "of",    "on",    "one",   "only",  "or",    "other", "our",   "out",   "over",  "she",   "so",
          "some",  "than",  "that",  "the",   "their", "them",  "then",  "there", "these", "they",  "this",
          "to",    "up",    "us",    "was",   "we",    "were",  "what",  "when",  "which", "who",   "will",
          "with",  "would", "you",   "your"};
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (!all_digits(current) && !config.stopwords.contains(current)) {
      std::string term = config.stem ? porter_stem(current) : current;
      if (!term.empty() && !config.stopwords.contains(term)) out.push_back(std::move(term));
    }
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], static_cast<Index>(i)).second) {
      throw Error(Errc::InvalidArgument, "duplicate vocabulary term '" + terms_[i] + "'");
    }
  }
}

std::optional<Index> Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocabulary(std::span<const Document> docs, const TokenizerConfig& config,
                            std::size_t min_document_frequency) {
  std::map<std::string, std::size_t> document_frequency;
  for (const auto& doc : docs) {
    auto tokens = tokenize(doc.text, config);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& t : tokens) ++document_frequency[t];
  }
  std::vector<std::string> terms;
  for (const auto& [term, df] : document_frequency) {
    if (df >= min_document_frequency) terms.push_back(term);
  }
  if (terms.empty()) throw Error(Errc::EmptyCorpus, "no token survived tokenization and filtering");
  return Vocabulary(std::move(terms));
}

std::string_view normalization_name(Normalization n) {
  return n == Normalization::Counts ? "counts" : "tfidf";
}

std::optional<Index> Corpus::feed_index(std::string_view feed_id) const {
  for (std::size_t i = 0; i < feeds.size(); ++i) {
    if (feeds[i].feed_id == feed_id) return static_cast<Index>(i);
  }
  return std::nullopt;
}

void Corpus::validate() const {
  if (num_bins <= 0) throw Error(Errc::NoBins, "corpus has no time bins");
  if (bin_width.count() <= 0) format_error("bin width must be positive");
  std::set<std::string> seen;
  for (const auto& feed : feeds) {
    if (feed.feed_id.empty()) format_error("empty feed id");
    if (!seen.insert(feed.feed_id).second) format_error("duplicate feed id '" + feed.feed_id + "'");
    if (feed.matrix.rows() != num_terms() || feed.matrix.cols() != num_bins) {
      format_error("feed '" + feed.feed_id + "' has shape " + std::to_string(feed.matrix.rows()) + "x" +
                   std::to_string(feed.matrix.cols()) + ", expected " + std::to_string(num_terms()) + "x" +
                   std::to_string(num_bins));
    }
    for (Index r = 0; r < feed.matrix.outerSize(); ++r) {
      for (SparseSeries::InnerIterator it(feed.matrix, r); it; ++it) {
        if (!std::isfinite(it.value())) format_error("non-finite value in feed '" + feed.feed_id + "'");
        if (!synthetic && it.value() < 0) format_error("negative value in feed '" + feed.feed_id + "'");
      }
    }
  }
}

bool operator==(const Corpus& a, const Corpus& b) {
  if (!(a.vocabulary == b.vocabulary) || a.t0 != b.t0 || a.bin_width != b.bin_width || a.num_bins != b.num_bins ||
      a.normalization != b.normalization || a.synthetic != b.synthetic || !(a.timezone == b.timezone) ||
      a.feeds.size() != b.feeds.size()) {
    return false;
  }
  for (std::size_t f = 0; f < a.feeds.size(); ++f) {
    const auto& ma = a.feeds[f].matrix;
    const auto& mb = b.feeds[f].matrix;
    if (a.feeds[f].feed_id != b.feeds[f].feed_id || ma.rows() != mb.rows() || ma.cols() != mb.cols() ||
        ma.nonZeros() != mb.nonZeros()) {
      return false;
    }
    for (Index r = 0; r < ma.outerSize(); ++r) {
      SparseSeries::InnerIterator ia(ma, r);
      SparseSeries::InnerIterator ib(mb, r);
      for (; ia && ib; ++ia, ++ib) {
        if (ia.col() != ib.col() || ia.value() != ib.value()) return false;
      }
      if (ia || ib) return false;
    }
  }
  return true;
}

FeaturizeResult featurize(std::span<const Document> docs, const Vocabulary& vocabulary,
                          const TokenizerConfig& config, Instant t0, Millis bin_width, Index num_bins,
                          std::vector<std::string> feed_ids) {
  if (num_bins <= 0) throw Error(Errc::NoBins, "T must be at least 1");
  if (bin_width.count() <= 0) throw Error(Errc::InvalidArgument, "bin width must be positive");

  if (feed_ids.empty()) {
    std::set<std::string> ids;
    for (const auto& doc : docs) ids.insert(doc.feed_id);
    feed_ids.assign(ids.begin(), ids.end());
  }
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < feed_ids.size(); ++i) {
    if (feed_ids[i].empty()) throw Error(Errc::InvalidArgument, "empty feed id");
    if (!slot.emplace(feed_ids[i], i).second) {
      throw Error(Errc::InvalidArgument, "duplicate feed id '" + feed_ids[i] + "'");
    }
  }

  // Integer counts make the per-cell sum exact and independent of document order.
  std::vector<std::map<std::pair<Index, Index>, double>> cells(feed_ids.size());
  FeaturizeResult result;
  const auto end = t0 + bin_width * num_bins;
  for (const auto& doc : docs) {
    auto it = slot.find(doc.feed_id);
    if (it == slot.end()) {
      throw Error(Errc::UnknownFeed, "document feed '" + doc.feed_id + "' has no feed slot");
    }
    if (doc.timestamp < t0 || doc.timestamp >= end) {
      ++result.dropped;
      continue;
    }
    ++result.ingested;
    const Index bin = static_cast<Index>((doc.timestamp - t0) / bin_width);
    for (const auto& token : tokenize(doc.text, config)) {
      if (auto term = vocabulary.index_of(token)) cells[it->second][{*term, bin}] += 1.0;
    }
  }

  Corpus& corpus = result.corpus;
  corpus.vocabulary = vocabulary;
  corpus.t0 = t0;
  corpus.bin_width = bin_width;
  corpus.num_bins = num_bins;
  corpus.normalization = Normalization::Counts;
  for (std::size_t f = 0; f < feed_ids.size(); ++f) {
    std::vector<Eigen::Triplet<double, Index>> triplets;
    triplets.reserve(cells[f].size());
    for (const auto& [key, count] : cells[f]) triplets.emplace_back(key.first, key.second, count);
    SparseSeries m(vocabulary.size(), num_bins);
    m.setFromTriplets(triplets.begin(), triplets.end());
    corpus.feeds.push_back({feed_ids[f], std::move(m)});
  }
  return result;
}

Corpus tfidf_normalize(const Corpus& counts) {
  if (counts.normalization != Normalization::Counts) {
    throw Error(Errc::AlreadyNormalized, "corpus is already tf-idf normalized");
  }
  const Index W = counts.num_terms();
  std::vector<double> df(static_cast<std::size_t>(W), 0.0);
  for (const auto& feed : counts.feeds) {
    for (Index r = 0; r < feed.matrix.outerSize(); ++r) {
      for (SparseSeries::InnerIterator it(feed.matrix, r); it; ++it) {
        if (it.value() > 0) df[static_cast<std::size_t>(r)] += 1.0;
      }
    }
  }
  const double cells = static_cast<double>(counts.num_feeds()) * static_cast<double>(counts.num_bins);
  std::vector<double> idf(static_cast<std::size_t>(W));
  for (std::size_t w = 0; w < idf.size(); ++w) idf[w] = std::max(0.0, std::log(cells / (1.0 + df[w])));

  Corpus out = counts;
  out.normalization = Normalization::Tfidf;
  for (auto& feed : out.feeds) {
    for (Index r = 0; r < feed.matrix.outerSize(); ++r) {
      for (SparseSeries::InnerIterator it(feed.matrix, r); it; ++it) it.valueRef() *= idf[static_cast<std::size_t>(r)];
    }
    feed.matrix.prune(0.0, 0.0);
  }
  return out;
}

std::string corpus_meta_json(const Corpus& corpus) {
  nlohmann::json meta;
  meta["format_version"] = kCorpusFormatVersion;
  meta["vocabulary"] = corpus.vocabulary.terms();
  auto feeds = nlohmann::json::array();
  for (const auto& f : corpus.feeds) feeds.push_back(f.feed_id);
  meta["feeds"] = feeds;
  meta["t0"] = format_rfc3339(corpus.t0, corpus.timezone);
  meta["timezone"] = offset_name(corpus.timezone);
  meta["bin_hours"] = static_cast<double>(corpus.bin_width.count()) / 3'600'000.0;
  meta["T"] = corpus.num_bins;
  meta["normalization"] = std::string(normalization_name(corpus.normalization));
  meta["synthetic"] = corpus.synthetic;
  return dump_canonical(meta);
}

std::string corpus_matrix_csv(const Corpus& corpus) {
  std::string out = "feed_index,term_index,time_index,value\n";
  for (std::size_t f = 0; f < corpus.feeds.size(); ++f) {
    const auto& m = corpus.feeds[f].matrix;
    for (Index r = 0; r < m.outerSize(); ++r) {
      for (SparseSeries::InnerIterator it(m, r); it; ++it) {
        out += std::to_string(f);
        out += ',';
        out += std::to_string(r);
        out += ',';
        out += std::to_string(it.col());
        out += ',';
        out += format_double(it.value());
        out += '\n';
      }
    }
  }
  return out;
}

std::string corpus_hash(const Corpus& corpus) {
  return fnv1a_hex(corpus_meta_json(corpus) + corpus_matrix_csv(corpus));
}

void store_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  corpus.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "meta.json", corpus_meta_json(corpus));
  write_text(dir / "matrix.csv", corpus_matrix_csv(corpus));
}

Corpus load_corpus(const std::filesystem::path& dir) {
  const std::string meta_text = read_text(dir / "meta.json");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_text);
  } catch (const nlohmann::json::exception& e) {
    format_error("meta.json is not valid JSON: " + std::string(e.what()));
  }

  Corpus corpus;
  try {
    if (!meta.is_object() || !meta.contains("format_version")) format_error("meta.json lacks format_version");
    const auto version = meta.at("format_version");
    if (!version.is_number_integer() || version.get<int>() != kCorpusFormatVersion) {
      format_error("unsupported corpus format_version: expected " + std::to_string(kCorpusFormatVersion) +
                   ", found " + version.dump());
    }
    corpus.vocabulary = Vocabulary(meta.at("vocabulary").get<std::vector<std::string>>());
    const auto feed_ids = meta.at("feeds").get<std::vector<std::string>>();
    corpus.timezone = meta.contains("timezone") ? parse_utc_offset(meta.at("timezone").get<std::string>())
                                                : UtcOffset{};
    corpus.t0 = parse_rfc3339(meta.at("t0").get<std::string>());
    const double bin_hours = meta.at("bin_hours").get<double>();
    if (!(bin_hours > 0)) format_error("bin_hours must be positive");
    corpus.bin_width = Millis{static_cast<Millis::rep>(std::llround(bin_hours * 3'600'000.0))};
    corpus.num_bins = meta.at("T").get<Index>();
    const auto norm = meta.at("normalization").get<std::string>();
    if (norm == "counts") {
      corpus.normalization = Normalization::Counts;
    } else if (norm == "tfidf") {
      corpus.normalization = Normalization::Tfidf;
    } else {
      format_error("unknown normalization '" + norm + "'");
    }
    corpus.synthetic = meta.value("synthetic", false);
    for (const auto& id : feed_ids) corpus.feeds.push_back({id, SparseSeries(corpus.num_terms(), corpus.num_bins)});
  } catch (const nlohmann::json::exception& e) {
    format_error("meta.json schema mismatch: " + std::string(e.what()));
  } catch (const Error& e) {
    if (e.code() == Errc::FormatError) throw;
    format_error(std::string("meta.json: ") + e.what());
  }
  if (corpus.num_bins <= 0) format_error("T must be positive");

  std::ifstream in(dir / "matrix.csv");
  if (!in) throw Error(Errc::IoError, "cannot open " + (dir / "matrix.csv").string());
  std::string line;
  if (!std::getline(in, line) || line != "feed_index,term_index,time_index,value") {
    format_error("matrix.csv header mismatch");
  }
  std::vector<std::vector<Eigen::Triplet<double, Index>>> triplets(corpus.feeds.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    long long f = 0, w = 0, t = 0;
    char* cursor = line.data();
    char* next = nullptr;
    auto field_error = [&] { format_error("matrix.csv line " + std::to_string(line_no) + " is malformed"); };
    f = std::strtoll(cursor, &next, 10);
    if (next == cursor || *next != ',') field_error();
    cursor = next + 1;
    w = std::strtoll(cursor, &next, 10);
    if (next == cursor || *next != ',') field_error();
    cursor = next + 1;
    t = std::strtoll(cursor, &next, 10);
    if (next == cursor || *next != ',') field_error();
    cursor = next + 1;
    const double value = std::strtod(cursor, &next);
    if (next == cursor || *next != '\0') field_error();
    if (f < 0 || f >= corpus.num_feeds() || w < 0 || w >= corpus.num_terms() || t < 0 || t >= corpus.num_bins) {
      format_error("matrix.csv line " + std::to_string(line_no) + " index out of range");
    }
    triplets[static_cast<std::size_t>(f)].emplace_back(w, t, value);
  }
  for (std::size_t f = 0; f < corpus.feeds.size(); ++f) {
    corpus.feeds[f].matrix.setFromTriplets(triplets[f].begin(), triplets[f].end());
  }
  corpus.validate();
  return corpus;
}

std::vector<Document> read_documents_jsonl(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Document doc;
      doc.feed_id = j.at("feed").get<std::string>();
      doc.timestamp = parse_rfc3339(j.at("timestamp").get<std::string>());
      doc.text = j.at("text").get<std::string>();
      if (doc.feed_id.empty()) throw Error(Errc::FormatError, "empty feed id");
      docs.push_back(std::move(doc));
    } catch (const std::exception& e) {
      throw Error(Errc::FormatError, "malformed document on line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

}  // namespace ct
