#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ct/corpus.hpp"
#include "ct/error.hpp"
#include "ct/evaluation.hpp"
#include "ct/json_io.hpp"
#include "ct/report.hpp"
#include "ct/synth.hpp"
#include "ct/version.hpp"

namespace ct::cli {
namespace {

namespace fs = std::filesystem;

/// Raised for bad flag values discovered after parsing; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

long parse_long(const std::string& s) {
  std::size_t used = 0;
  const long v = std::stol(s, &used);
  if (used != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::optional<long> decade_exponent(double v) {
  if (!(v > 0)) return std::nullopt;
  const double e = std::log10(v);
  const double r = std::round(e);
  if (std::abs(e - r) > 1e-9) return std::nullopt;
  return static_cast<long>(r);
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("CT_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("CT_SEED is not an unsigned integer: '") + env + "'");
  }
  return 42;
}

template <class Fn>
auto as_usage(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == Errc::BadConfig || e.code() == Errc::InvalidArgument) throw UsageError(e.detail());
    throw;
  }
}

std::unordered_set<std::string> read_stopwords(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::transform(line.begin(), line.end(), line.begin(), [](unsigned char c) { return std::tolower(c); });
    out.insert(line);
  }
  return out;
}

void check_distinct(const fs::path& a, const fs::path& b) {
  std::error_code ec;
  const auto ca = fs::weakly_canonical(a, ec);
  const auto cb = fs::weakly_canonical(b, ec);
  if (ca == cb) throw UsageError("input and output paths must differ: " + a.string());
}

void emit(const std::optional<std::string>& path, const std::string& text, std::ostream& out) {
  if (path) {
    write_text(*path, text);
  } else {
    out << text;
  }
}

// --------------------------------------------------------------------------

struct SynthArgs {
  std::string mode = "toy";
  std::optional<std::uint64_t> seed;
  long T = 2000;
  double gamma = 0.9;
  std::optional<long> lag;
  std::string out;
  long feeds = 5;
  long vocab = 12;
  double sparsity = 0.25;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.seed);
  nlohmann::json gen;
  Corpus corpus;
  if (a.mode == "toy") {
    ToyConfig cfg;
    cfg.T = a.T;
    cfg.gamma = a.gamma;
    cfg.lag = a.lag.value_or(3);
    cfg.seed = seed;
    as_usage([&] { cfg.validate(); });
    corpus = generate_toy(cfg).corpus;
    gen = gen_json(cfg);
  } else {
    LeaderConfig cfg;
    cfg.F = a.feeds;
    cfg.W = a.vocab;
    cfg.T = a.T;
    cfg.leader_lag = a.lag.value_or(4);
    cfg.trend_sparsity = a.sparsity;
    cfg.gamma = a.gamma;
    cfg.seed = seed;
    as_usage([&] { cfg.validate(); });
    LeaderData data = generate_leader(cfg);
    gen = gen_json(cfg, data);
    corpus = std::move(data.corpus);
  }
  gen["tool_version"] = kToolVersion;
  store_corpus(corpus, a.out);
  write_text(fs::path(a.out) / "gen.json", dump_canonical(gen));
  out << "wrote " << a.mode << " corpus with " << corpus.num_feeds() << " feeds, " << corpus.num_terms()
      << " terms, " << corpus.num_bins << " bins to " << a.out << " (seed " << seed << ", hash "
      << corpus_hash(corpus) << ")\n";
  return kOk;
}

// --------------------------------------------------------------------------

struct FeaturizeArgs {
  std::string docs;
  std::string out;
  std::optional<std::string> stopwords;
  bool stem = true;
  double bin_hours = 1.0;
  std::optional<std::string> t0;
  std::optional<long> T;
  std::string timezone = "UTC";
  bool counts = false;
  long min_df = 1;
};

int cmd_featurize(const FeaturizeArgs& a, std::ostream& out) {
  if (!(a.bin_hours > 0)) throw UsageError("--bin-hours must be positive");
  if (a.T && *a.T < 1) throw UsageError("--T must be at least 1");
  if (a.min_df < 1) throw UsageError("--min-df must be at least 1");
  check_distinct(a.docs, a.out);
  const UtcOffset tz = as_usage([&] { return parse_utc_offset(a.timezone); });
  std::optional<Instant> t0;
  if (a.t0) {
    try {
      t0 = parse_rfc3339(*a.t0);
    } catch (const Error& e) {
      throw UsageError("--t0: " + e.detail());
    }
  }
  const Millis bin{static_cast<Millis::rep>(std::llround(a.bin_hours * 3'600'000.0))};
  if (bin.count() <= 0) throw UsageError("--bin-hours is below one millisecond");

  TokenizerConfig tok;
  tok.stem = a.stem;
  tok.stopwords = a.stopwords ? read_stopwords(*a.stopwords) : default_stopwords();

  std::ifstream in(a.docs, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + a.docs);
  const std::vector<Document> all = read_documents_jsonl(in);
  if (all.empty()) throw Error(Errc::EmptyCorpus, "no documents in " + a.docs);

  Instant lo = all.front().timestamp, hi = all.front().timestamp;
  for (const Document& d : all) {
    lo = std::min(lo, d.timestamp);
    hi = std::max(hi, d.timestamp);
  }
  const Instant start = t0 ? *t0 : floor_to_bin(lo, bin, tz);
  const Index T = a.T ? *a.T : std::max<Index>(1, (hi - start) / bin + 1);
  const Instant end = start + bin * T;

  std::vector<Document> window;
  for (const Document& d : all) {
    if (d.timestamp >= start && d.timestamp < end) window.push_back(d);
  }
  const Vocabulary vocab = build_vocabulary(window, tok, static_cast<std::size_t>(a.min_df));
  FeaturizeResult res = featurize(all, vocab, tok, start, bin, T);
  res.corpus.timezone = tz;
  Corpus corpus = a.counts ? std::move(res.corpus) : tfidf_normalize(res.corpus);
  store_corpus(corpus, a.out);
  out << "ingested " << res.ingested << " documents, dropped " << res.dropped << "\n";
  out << "corpus: " << corpus.num_feeds() << " feeds, " << corpus.num_terms() << " terms, " << corpus.num_bins
      << " bins from " << format_rfc3339(corpus.t0, tz) << ", hash " << corpus_hash(corpus) << "\n";
  return kOk;
}

// --------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string corpus;
  std::string out;
  long folds = 10;
  std::optional<long> inner_folds;
  std::string lags = "1..10";
  std::string kappas = "1e-5..1e1";
  std::optional<std::uint64_t> seed;
  bool lsa = false;
  bool shuffle = false;
  long jobs = 1;
  std::vector<std::string> feeds;
  long top_terms = 3;
  bool verbose = false;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  check_distinct(a.corpus, a.out);
  if (a.jobs < 1) throw UsageError("--jobs must be at least 1");
  PipelineConfig cfg;
  cfg.folds = a.folds;
  cfg.inner_folds = a.inner_folds.value_or(a.folds);
  try {
    const auto lags = parse_lag_grid(a.lags);
    cfg.grid.lags.assign(lags.begin(), lags.end());
  } catch (const std::exception& e) {
    throw UsageError(std::string("--lags: ") + e.what());
  }
  try {
    cfg.grid.kappas = parse_kappa_grid(a.kappas);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--kappas: ") + e.what());
  }
  cfg.seed = resolve_seed(a.seed);
  cfg.lsa_baseline = a.lsa;
  cfg.shuffle_control = a.shuffle;
  cfg.jobs = static_cast<unsigned>(a.jobs);
  cfg.feeds = a.feeds;
  cfg.top_terms = a.top_terms;
  as_usage([&] { cfg.validate(); });

  const Corpus corpus = load_corpus(a.corpus);
  const RunStamp stamp{cfg.seed, corpus_hash(corpus)};
  if (a.verbose) {
    err << "corpus " << stamp.corpus_hash << ": " << corpus.num_feeds() << " feeds, " << corpus.num_terms()
        << " terms, " << corpus.num_bins << " bins; " << cfg.folds << " folds, " << cfg.grid.lags.size() << " lags x "
        << cfg.grid.kappas.size() << " kappas, " << cfg.jobs << " jobs\n";
  }
  const Analysis analysis = analyze_corpus(corpus, cfg);
  const double bin_hours = std::chrono::duration<double, std::ratio<3600>>(corpus.bin_width).count();
  write_analysis(a.out, analysis, cfg, stamp, bin_hours);

  out << "rank  feed                  ct";
  if (cfg.lsa_baseline) out << "       lsa";
  if (cfg.shuffle_control) out << "  shuffled";
  out << "\n";
  std::size_t rank = 1;
  for (const RankEntry& e : analysis.ranking.entries) {
    out << std::setw(4) << rank++ << "  " << std::left << std::setw(18) << e.feed_id << std::right << std::fixed
        << std::setprecision(4) << std::setw(8) << e.score;
    for (const FeedReport& r : analysis.feeds) {
      if (r.feed_id != e.feed_id) continue;
      auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
      };
      if (r.lsa) out << std::setw(10) << mean(r.lsa->fold_scores);
      if (r.shuffled) out << std::setw(10) << mean(r.shuffled->fold_scores);
    }
    out << std::defaultfloat << "\n";
  }
  if (a.verbose) err << "wrote " << (fs::path(a.out) / "report.json").string() << "\n";
  return kOk;
}

// --------------------------------------------------------------------------

struct ModelArgs {
  std::string corpus;
  std::string model;
  std::optional<std::string> out;
  long top = 3;
};

std::pair<Corpus, StoredModel> load_bound_model(const ModelArgs& a) {
  const Corpus corpus = load_corpus(a.corpus);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(a.model));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::FormatError, a.model + " is not valid JSON: " + e.what());
  }
  StoredModel stored = model_from_json(j);
  const std::string hash = corpus_hash(corpus);
  if (hash != stored.corpus_hash) {
    throw Error(Errc::InvalidArgument, "corpus hash mismatch: model was fit on " + stored.corpus_hash +
                                           ", corpus " + a.corpus + " hashes to " + hash);
  }
  if (stored.model.weights.w_y.size() != corpus.num_terms()) {
    throw Error(Errc::ShapeMismatch, "model vocabulary size differs from the corpus");
  }
  return {corpus, std::move(stored)};
}

int cmd_correlogram(const ModelArgs& a, std::ostream& out) {
  const auto [corpus, stored] = load_bound_model(a);
  const FeedProblem problem = make_feed_problem(corpus, stored.feed_id, stored.axis_offset);
  std::vector<Index> axis(static_cast<std::size_t>(problem.t_eff()));
  for (std::size_t i = 0; i < axis.size(); ++i) axis[i] = static_cast<Index>(i);
  const auto points = canonical_correlogram(problem, stored.model, axis);
  const double bin_hours = std::chrono::duration<double, std::ratio<3600>>(corpus.bin_width).count();
  emit(a.out, correlogram_csv(points, {stored.seed, stored.corpus_hash}, stored.feed_id, bin_hours), out);
  return kOk;
}

int cmd_topwords(const ModelArgs& a, std::ostream& out) {
  if (a.top < 1) throw UsageError("--top must be at least 1");
  const auto [corpus, stored] = load_bound_model(a);
  const auto terms = top_terms(stored.model.weights, corpus.vocabulary, a.top);
  emit(a.out, topwords_csv(terms, {stored.seed, stored.corpus_hash}, stored.feed_id), out);
  return kOk;
}

}  // namespace

// --------------------------------------------------------------------------

std::vector<long> parse_lag_grid(const std::string& text) {
  std::vector<long> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const long a = parse_long(trim(text.substr(0, dots)));
    const long b = parse_long(trim(text.substr(dots + 2)));
    if (a > b) throw std::invalid_argument("empty range '" + text + "'");
    for (long l = a; l <= b; ++l) out.push_back(l);
  } else {
    for (const std::string& item : split(text, ',')) out.push_back(parse_long(item));
  }
  if (out.empty()) throw std::invalid_argument("empty lag grid");
  return out;
}

std::vector<double> parse_kappa_grid(const std::string& text) {
  std::vector<double> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const double a = parse_double(trim(text.substr(0, dots)));
    const double b = parse_double(trim(text.substr(dots + 2)));
    const auto ea = decade_exponent(a);
    const auto eb = decade_exponent(b);
    if (!ea || !eb) throw std::invalid_argument("range ends must be powers of ten: '" + text + "'");
    if (*ea > *eb) throw std::invalid_argument("empty range '" + text + "'");
    // Parse "1e<k>" so each value is the correctly rounded decimal literal.
    for (long e = *ea; e <= *eb; ++e) out.push_back(std::stod("1e" + std::to_string(e)));
  } else {
    for (const std::string& item : split(text, ',')) out.push_back(parse_double(item));
  }
  if (out.empty()) throw std::invalid_argument("empty kappa grid");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Canonical trend analysis of multi-feed text time series", "ct"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic corpus");
  s->add_option("--mode", synth.mode, "toy (two feeds) or leader (F feeds, one planted leader)")
      ->check(CLI::IsMember({"toy", "leader"}));
  s->add_option("--seed", synth.seed, "RNG seed (falls back to CT_SEED, then 42)");
  s->add_option("--T", synth.T, "number of time bins");
  s->add_option("--gamma", synth.gamma, "signal share in (0, 1]");
  s->add_option("--lag", synth.lag, "bins the leading feed is ahead (toy default 3, leader default 4)");
  s->add_option("--feeds", synth.feeds, "leader mode: number of feeds");
  s->add_option("--vocab", synth.vocab, "leader mode: vocabulary size");
  s->add_option("--sparsity", synth.sparsity, "leader mode: fraction of trend-carrying terms per feed");
  s->add_option("--out", synth.out, "output corpus directory")->required();

  FeaturizeArgs feat;
  auto* f = app.add_subcommand("featurize", "turn JSONL documents into a corpus");
  f->add_option("--docs", feat.docs, "JSON lines with feed, timestamp, text")->required();
  f->add_option("--out", feat.out, "output corpus directory")->required();
  f->add_option("--stopwords", feat.stopwords, "stop word file, one per line (default: built-in list)");
  f->add_flag("--stem,!--no-stem", feat.stem, "Porter stemming (default on)");
  f->add_option("--bin-hours", feat.bin_hours, "bin width in hours");
  f->add_option("--t0", feat.t0, "first bin start, RFC 3339 (default: earliest document, floored)");
  f->add_option("--T", feat.T, "number of bins (default: through the latest document)");
  f->add_option("--timezone", feat.timezone, "reference timezone: UTC or a fixed offset like +01:00");
  f->add_flag("--counts", feat.counts, "keep raw counts instead of tf-idf");
  f->add_option("--min-df", feat.min_df, "minimum number of documents a term must occur in");

  AnalyzeArgs an;
  auto* z = app.add_subcommand("analyze", "rank feeds by trend-setting ability");
  z->add_option("--corpus", an.corpus, "corpus directory")->required();
  z->add_option("--out", an.out, "output directory")->required();
  z->add_option("--folds", an.folds, "outer cross-validation folds");
  z->add_option("--inner-folds", an.inner_folds, "inner folds for hyperparameter selection (default: --folds)");
  z->add_option("--lags", an.lags, "lag grid, 'a..b' or comma list");
  z->add_option("--kappas", an.kappas, "regularizer grid, decade range '1e-5..1e1' or comma list");
  z->add_option("--seed", an.seed, "seed for the shuffle control (falls back to CT_SEED, then 42)");
  z->add_flag("--baseline-lsa", an.lsa, "also score the LSA baseline");
  z->add_flag("--shuffle-control", an.shuffle, "also score time-shuffled feeds");
  z->add_option("--jobs", an.jobs, "worker threads");
  z->add_option("--feed", an.feeds, "analyze only this feed (repeatable)");
  z->add_option("--top-terms", an.top_terms, "terms per feed in topwords.csv");
  z->add_flag("-v,--verbose", an.verbose, "progress on stderr");

  ModelArgs cg;
  auto* c = app.add_subcommand("correlogram", "canonical correlogram of a stored model");
  c->add_option("--corpus", cg.corpus, "corpus directory")->required();
  c->add_option("--model", cg.model, "model.json written by analyze")->required();
  c->add_option("--out", cg.out, "CSV path (default: stdout)");

  ModelArgs tw;
  auto* t = app.add_subcommand("topwords", "top weighted terms per lag of a stored model");
  t->add_option("--corpus", tw.corpus, "corpus directory")->required();
  t->add_option("--model", tw.model, "model.json written by analyze")->required();
  t->add_option("--out", tw.out, "CSV path (default: stdout)");
  t->add_option("--top", tw.top, "number of terms");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsageError;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (f->parsed()) return cmd_featurize(feat, out);
    if (z->parsed()) return cmd_analyze(an, out, err);
    if (c->parsed()) return cmd_correlogram(cg, out);
    if (t->parsed()) return cmd_topwords(tw, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace ct::cli
