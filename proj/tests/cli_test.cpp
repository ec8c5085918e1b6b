#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "ct/corpus.hpp"
#include "ct/json_io.hpp"
#include "support.hpp"

using testing::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = ct::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("synth writes a loadable corpus") {
  TempDir dir;
  const auto out = (dir / "toy").string();
  const Result r = run({"synth", "--mode", "toy", "--seed", "3", "--T", "300", "--out", out});
  REQUIRE(r.code == 0);
  const ct::Corpus c = ct::load_corpus(out);
  CHECK(c.num_bins == 300);
  CHECK(c.num_feeds() == 2);
  const auto gen = nlohmann::json::parse(ct::read_text(dir / "toy" / "gen.json"));
  CHECK(gen["seed"] == 3);
  CHECK(gen["tool_version"] == "0.1.0");

  const auto again = (dir / "again").string();
  REQUIRE(run({"synth", "--seed", "3", "--T", "300", "--out", again}).code == 0);
  CHECK(ct::read_text(dir / "toy" / "matrix.csv") == ct::read_text(dir / "again" / "matrix.csv"));
}

TEST_CASE("usage errors exit with 2") {
  TempDir dir;
  CHECK(run({"synth"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  const Result r = run({"synth", "--gamma", "1.5", "--out", (dir / "x").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("gamma") != std::string::npos);
  CHECK(run({"analyze", "--corpus", (dir / "x").string(), "--out", (dir / "y").string(), "--folds", "1"}).code == 2);
  CHECK(run({"analyze", "--corpus", "c", "--out", "o", "--kappas", "1e-9"}).code == 2);
  CHECK(run({"analyze", "--corpus", "c", "--out", "o", "--lags", "3..1"}).code == 2);
}

TEST_CASE("featurize a small document stream") {
  TempDir dir;
  {
    std::ofstream docs(dir / "docs.jsonl");
    docs << R"({"feed":"bbc","timestamp":"2010-04-14T09:15:00Z","text":"Volcano ash cloud grounds flights"})" << "\n"
         << R"({"feed":"cnn","timestamp":"2010-04-14T09:45:00Z","text":"Ash cloud over Europe"})" << "\n"
         << "\n"
         << R"({"feed":"bbc","timestamp":"2010-04-14T11:05:00+01:00","text":"The ash cloud spreads"})" << "\n";
  }
  const Result r = run({"featurize", "--docs", (dir / "docs.jsonl").string(), "--out", (dir / "c").string(),
                        "--counts", "--no-stem", "--t0", "2010-04-14T09:00:00Z", "--T", "2"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("ingested 3 documents, dropped 0") != std::string::npos);
  const ct::Corpus c = ct::load_corpus(dir / "c");
  CHECK(c.vocabulary.terms() ==
        std::vector<std::string>{"ash", "cloud", "europe", "flights", "grounds", "spreads", "volcano"});
  REQUIRE(c.num_feeds() == 2);
  CHECK(c.feeds[0].feed_id == "bbc");
  CHECK(c.feeds[0].matrix.nonZeros() == 8);
  CHECK(c.feeds[1].matrix.nonZeros() == 3);
  CHECK(c.feeds[0].matrix.coeff(0, 1) == 1.0);  // ash in the 10:05Z bin
  CHECK(c.feeds[1].matrix.coeff(2, 0) == 1.0);  // europe, cnn, first bin
  CHECK(c.normalization == ct::Normalization::Counts);

  SUBCASE("a shorter window drops documents") {
    const Result s = run({"featurize", "--docs", (dir / "docs.jsonl").string(), "--out", (dir / "d").string(),
                          "--t0", "2010-04-14T09:00:00Z", "--T", "1"});
    REQUIRE(s.code == 0);
    CHECK(s.out.find("ingested 2 documents, dropped 1") != std::string::npos);
  }
  SUBCASE("defaults cover the whole stream") {
    REQUIRE(run({"featurize", "--docs", (dir / "docs.jsonl").string(), "--out", (dir / "e").string()}).code == 0);
    const ct::Corpus e = ct::load_corpus(dir / "e");
    CHECK(e.num_bins == 2);
    CHECK(e.normalization == ct::Normalization::Tfidf);
  }
}

TEST_CASE("featurize input errors") {
  TempDir dir;
  {
    std::ofstream docs(dir / "bad.jsonl");
    docs << R"({"feed":"bbc","timestamp":"2010-04-14T09:15:00Z","text":"ok"})" << "\n"
         << R"({"feed":"bbc","timestamp":"yesterday","text":"bad"})" << "\n";
    std::ofstream empty(dir / "empty.jsonl");
  }
  const Result bad = run({"featurize", "--docs", (dir / "bad.jsonl").string(), "--out", (dir / "c").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("line 2") != std::string::npos);
  CHECK(run({"featurize", "--docs", (dir / "empty.jsonl").string(), "--out", (dir / "c").string()}).code == 1);
  CHECK(run({"featurize", "--docs", (dir / "missing.jsonl").string(), "--out", (dir / "c").string()}).code == 1);
}

TEST_CASE("analyze, correlogram and topwords on the toy corpus") {
  TempDir dir;
  const auto corpus = (dir / "toy").string();
  const auto out = (dir / "run").string();
  REQUIRE(run({"synth", "--seed", "5", "--T", "800", "--out", corpus}).code == 0);
  const Result a = run({"analyze", "--corpus", corpus, "--out", out, "--lags", "1..4", "--kappas", "1e-3..1e-1",
                        "--baseline-lsa", "--jobs", "2"});
  REQUIRE(a.code == 0);
  const auto report = nlohmann::json::parse(ct::read_text(dir / "run" / "report.json"));
  CHECK(report["ranking"][0]["feed_id"] == "X");
  CHECK(report["config"]["grid"]["kappas"].size() == 3);
  CHECK(report["feeds"][0]["lsa"].is_object());
  CHECK(a.out.find("X") != std::string::npos);

  const auto model = (dir / "run" / "feeds" / "X" / "model.json").string();
  const Result cg = run({"correlogram", "--corpus", corpus, "--model", model});
  REQUIRE(cg.code == 0);
  const auto lines = split_lines(cg.out);
  REQUIRE(lines.size() >= 4);
  CHECK(lines[0].rfind("# ct 0.1.0 seed=", 0) == 0);
  CHECK(lines[1] == "tau_hours,rho");
  std::string peak;
  double best = -2;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto comma = lines[i].find(',');
    const double rho = std::stod(lines[i].substr(comma + 1));
    if (rho > best) {
      best = rho;
      peak = lines[i].substr(0, comma);
    }
  }
  CHECK(std::stod(peak) == 3.0);

  const Result tw = run({"topwords", "--corpus", corpus, "--model", model, "--top", "2"});
  REQUIRE(tw.code == 0);
  const auto rows = split_lines(tw.out);
  CHECK(rows[1] == "term,lag,weight");
  double max_abs = 0;
  for (std::size_t i = 2; i < rows.size(); ++i) {
    max_abs = std::max(max_abs, std::abs(std::stod(rows[i].substr(rows[i].rfind(',') + 1))));
  }
  CHECK(max_abs == 1.0);

  SUBCASE("a model from another corpus is rejected") {
    const auto other = (dir / "other").string();
    REQUIRE(run({"synth", "--seed", "6", "--T", "800", "--out", other}).code == 0);
    const Result r = run({"correlogram", "--corpus", other, "--model", model});
    CHECK(r.code == 1);
    CHECK(r.err.find("hash") != std::string::npos);
  }
  SUBCASE("the csv can go to a file") {
    REQUIRE(run({"correlogram", "--corpus", corpus, "--model", model, "--out", (dir / "cg.csv").string()}).code == 0);
    CHECK(ct::read_text(dir / "cg.csv") == cg.out);
  }
}

TEST_CASE("grid parsing") {
  using ct::cli::parse_kappa_grid;
  using ct::cli::parse_lag_grid;
  CHECK(parse_lag_grid("1..4") == std::vector<long>{1, 2, 3, 4});
  CHECK(parse_lag_grid("2,5") == std::vector<long>{2, 5});
  CHECK(parse_kappa_grid("1e-2..1e0") == std::vector<double>{1e-2, 1e-1, 1.0});
  CHECK(parse_kappa_grid("0.5,2") == std::vector<double>{0.5, 2.0});
  CHECK(parse_kappa_grid("1e-5..1e1").size() == 7);
  CHECK_THROWS(parse_lag_grid("a..b"));
  CHECK_THROWS(parse_kappa_grid("3e-2..1e0"));
  CHECK_THROWS(parse_lag_grid(""));
}

TEST_CASE("CT_SEED is the fallback seed") {
  TempDir dir;
  ::setenv("CT_SEED", "17", 1);
  REQUIRE(run({"synth", "--T", "200", "--out", (dir / "a").string()}).code == 0);
  ::unsetenv("CT_SEED");
  REQUIRE(run({"synth", "--T", "200", "--seed", "17", "--out", (dir / "b").string()}).code == 0);
  REQUIRE(run({"synth", "--T", "200", "--out", (dir / "c").string()}).code == 0);
  CHECK(ct::read_text(dir / "a" / "matrix.csv") == ct::read_text(dir / "b" / "matrix.csv"));
  CHECK(nlohmann::json::parse(ct::read_text(dir / "c" / "gen.json"))["seed"] == 42);
}
