#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oclust/cli.h"
#include "oclust/embedding_model.h"
#include "oclust/io.h"

namespace fs = std::filesystem;
using namespace oclust;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / ("oclust_cli_" + name);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

// value of column `col` in the row whose first field is `key`
double csv_value(const std::string& text, const std::string& key, std::size_t col) {
  for (const auto& l : lines(text)) {
    std::vector<std::string> f;
    std::stringstream ss(l);
    for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
    if (!f.empty() && f[0] == key) return std::stod(f.at(col));
  }
  FAIL("row not found: " << key);
  return 0;
}

}  // namespace

TEST_CASE("parse_range") {
  CHECK(cli::parse_range("4..8") == std::pair{4, 8});
  CHECK(cli::parse_range("6") == std::pair{6, 6});
  CHECK_THROWS_AS(cli::parse_range("8..4"), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_range("a..b"), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_range("4..8x"), cli::UsageError);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"bogus"}).code == 1);
  CHECK(run({"gen"}).code == 1);  // --seed is required
  CHECK(run({"cluster", "--input", "x.csv", "--l-intra"}).code == 1);
  CHECK(run({"cluster", "--input", "x.csv", "--l-new"}).code == 1);
  CHECK(run({"cluster", "--input", "x.csv", "--l-new", "2"}).code == 1);
  CHECK(run({"--version"}).code == 0);
}

TEST_CASE("missing files are data errors") {
  TempDir d("missing");
  const Run r = run({"cluster", "--input", d / "nope.csv", "--manifest", d / "m.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find("nope.csv") != std::string::npos);
}

TEST_CASE("train with zero learning rate keeps the initial weights") {
  TempDir d("train0");
  const Run r = run({"train", "--seed", "7", "--iters", "1", "--lr", "0", "--out", d / "m.ckpt"});
  REQUIRE(r.code == 0);
  EmbeddingModel m;
  Thresholds t;
  read_checkpoint_file(d / "m.ckpt", m, t);
  CHECK(m == EmbeddingModel::random_orthonormal(24, 16, 1));
  CHECK(fs::exists(d / "m.ckpt.manifest.json"));
}

TEST_CASE("train is deterministic and echoes its config") {
  TempDir d("train_det");
  const std::vector<std::string> base{"train", "--seed", "3", "--iters", "15", "--speakers", "4..8"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", d / "a.ckpt", "--report", d / "a.csv"});
  b.insert(b.end(), {"--out", d / "b.ckpt", "--report", d / "b.csv"});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(d / "a.ckpt") == slurp(d / "b.ckpt"));
  CHECK(slurp(d / "a.csv") == slurp(d / "b.csv"));
  CHECK(lines(slurp(d / "a.csv")).front() == "iter,loss_posi,loss_nega,l_intra,l_new,err");

  const auto m = nlohmann::json::parse(slurp(d / "a.ckpt.manifest.json"));
  CHECK(m["command"] == "train");
  CHECK(m["config"]["speakers"] == "4..8");
  CHECK(m["config"]["lr"] == "0.05");
  CHECK(m["seed"] == 3);
  CHECK(m.contains("versions"));
  CHECK(m.contains("wall_clock_seconds"));
  CHECK(m["outputs"].size() == 2);
}

TEST_CASE("train rejects unlabeled streams") {
  TempDir d("train_unlabeled");
  REQUIRE(run({"gen", "--seed", "1", "--frames", "50", "--unlabeled", "--out", d / "s.csv"}).code == 0);
  const Run r = run({"train", "--streams", d / "s.csv", "--iters", "2", "--out", d / "m.ckpt"});
  CHECK(r.code == 1);
  CHECK(r.err.find("unlabeled") != std::string::npos);
}

TEST_CASE("train on labeled streams") {
  TempDir d("train_streams");
  REQUIRE(run({"gen", "--seed", "1", "--frames", "300", "--out", d / "s.csv"}).code == 0);
  CHECK(run({"train", "--streams", d / "s.csv", "--window", "100", "--iters", "5", "--out",
             d / "m.ckpt"}).code == 0);
}

TEST_CASE("degenerate tbsc equals leader-follower through the CLI") {
  TempDir d("degenerate");
  for (int seed = 0; seed < 5; ++seed) {
    const std::string s = d / ("s" + std::to_string(seed) + ".csv");
    REQUIRE(run({"gen", "--seed", std::to_string(seed), "--separation", "60", "--out", s}).code == 0);
    const Run a = run({"cluster", "--input", s, "--beam", "1", "--latency", "0", "--no-thresholds",
                       "--lambda", "0", "--manifest", d / "a.json"});
    const Run b = run({"cluster", "--input", s, "--algo", "lfc", "--tau", "0.5", "--manifest",
                       d / "b.json"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out == b.out);
    CHECK(lines(a.out).size() == 600);
  }
}

TEST_CASE("latency 25 on a 0.1 s hop delays output by 2.5 s") {
  TempDir d("latency");
  REQUIRE(run({"gen", "--seed", "2", "--frames", "100", "--out", d / "s.csv"}).code == 0);
  const Run r = run({"cluster", "--input", d / "s.csv", "--beam", "4", "--latency", "25",
                     "--manifest", d / "m.json"});
  REQUIRE(r.code == 0);
  const auto out = lines(r.out);
  REQUIRE(out.size() == 100);
  for (std::size_t k = 0; k < out.size(); ++k) CHECK(out[k].rfind(std::to_string(k) + "\t", 0) == 0);
  // emission of frame k happens when frame k + 25 arrives
  const EmbeddingStream s = read_stream_file(d / "s.csv");
  CHECK(s.records[25].t_start - s.records[0].t_start == doctest::Approx(2.5));
}

TEST_CASE("empty stream produces no output") {
  TempDir d("empty");
  spit(d / "e.csv", "t_start,t_end,f_0,f_1\n");
  const Run r = run({"cluster", "--input", d / "e.csv", "--manifest", d / "m.json"});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
}

TEST_CASE("cluster writes rttm and honours model thresholds") {
  TempDir d("cluster_rttm");
  REQUIRE(run({"gen", "--seed", "4", "--out", d / "s.csv", "--rttm", d / "ref.rttm", "--file-id",
               "s"}).code == 0);
  REQUIRE(run({"train", "--iters", "20", "--out", d / "m.ckpt"}).code == 0);
  for (std::string algo : {"tbsc", "lfc", "ahc", "spectral"}) {
    std::vector<std::string> args{"cluster", "--input", d / "s.csv", "--model", d / "m.ckpt", "--algo",
                                  algo, "--rttm", d / "hyp.rttm", "--output", d / "lab.tsv"};
    if (algo == "spectral") args.insert(args.end(), {"--num-speakers", "6"});
    const Run r = run(args);
    REQUIRE(r.code == 0);
    CHECK(lines(slurp(d / "lab.tsv")).size() == 600);
    const RttmTracks hyp = read_rttm_file(d / "hyp.rttm");
    CHECK(hyp.count("s") == 1);
    CHECK(run({"eval", "--ref", d / "ref.rttm", "--hyp", d / "hyp.rttm", "--manifest",
               d / "e.json"}).code == 0);
  }
  CHECK(run({"cluster", "--input", d / "s.csv", "--algo", "spectral", "--manifest", d / "x.json"}).code == 1);
  CHECK(run({"cluster", "--input", d / "s.csv", "--calibrate-from", d / "s.csv", "--model",
             d / "m.ckpt", "--manifest", d / "x.json"}).code == 0);
}

TEST_CASE("eval examples") {
  TempDir d("eval");
  spit(d / "ref.rttm",
       "SPEAKER f 1 0 10 <NA> <NA> A <NA> <NA>\nSPEAKER f 1 10 10 <NA> <NA> B <NA> <NA>\n");
  spit(d / "hyp.rttm",
       "SPEAKER f 1 0 9 <NA> <NA> x <NA> <NA>\nSPEAKER f 1 9 11 <NA> <NA> y <NA> <NA>\n");
  spit(d / "other.rttm", "SPEAKER g 1 0 9 <NA> <NA> x <NA> <NA>\n");

  const Run self = run({"eval", "--ref", d / "ref.rttm", "--hyp", d / "ref.rttm", "--output",
                        d / "self.csv"});
  REQUIRE(self.code == 0);
  for (const char* c : {"0.25", "0"}) {
    const std::string text = slurp(d / (std::string("self_collar") + c + ".csv"));
    CHECK(lines(text).front() == "file,der,miss,fa,conf,scored_seconds");
    CHECK(csv_value(text, "f", 1) == 0.0);
    CHECK(csv_value(text, "ALL", 1) == 0.0);
  }

  const Run hand = run({"eval", "--ref", d / "ref.rttm", "--hyp", d / "hyp.rttm", "--collars", "0",
                        "--manifest", d / "m.json"});
  REQUIRE(hand.code == 0);
  CHECK(csv_value(hand.out, "ALL", 1) == doctest::Approx(0.05).epsilon(1e-12));

  const Run mismatch = run({"eval", "--ref", d / "ref.rttm", "--hyp", d / "other.rttm",
                            "--manifest", d / "m.json"});
  CHECK(mismatch.code == 2);
  CHECK(mismatch.err.find("f") != std::string::npos);
  CHECK(mismatch.err.find("g") != std::string::npos);
}

TEST_CASE("degenerate sweep equals a direct cluster and eval run") {
  TempDir d("sweep_single");
  REQUIRE(run({"sweep", "--beams", "1", "--latencies", "0", "--seeds", "1", "--seed-base", "77",
               "--output", d / "sw.csv"}).code == 0);
  const auto rows = lines(slurp(d / "sw.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "beam,latency,der,peak_hypotheses");

  REQUIRE(run({"gen", "--seed", "77", "--out", d / "s.csv", "--rttm", d / "ref.rttm", "--file-id",
               "s"}).code == 0);
  REQUIRE(run({"cluster", "--input", d / "s.csv", "--beam", "1", "--latency", "0", "--max-clusters",
               "10", "--rttm", d / "hyp.rttm", "--file-id", "s", "--output", d / "lab.tsv"}).code == 0);
  const Run e = run({"eval", "--ref", d / "ref.rttm", "--hyp", d / "hyp.rttm", "--collars", "0.25",
                     "--manifest", d / "e.json"});
  REQUIRE(e.code == 0);
  CHECK(csv_value(slurp(d / "sw.csv"), "1", 2) == csv_value(e.out, "ALL", 1));
}

TEST_CASE("sweep cells are independent of execution order") {
  TempDir d("sweep_order");
  const std::vector<std::string> base{"sweep", "--beams", "1,2,4", "--latencies", "0,3,6", "--seeds", "3"};
  auto a = base, b = base;
  a.insert(a.end(), {"--output", d / "a.csv"});
  b.insert(b.end(), {"--output", d / "b.csv", "--shuffle-seed", "99", "--jobs", "3"});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(d / "a.csv") == slurp(d / "b.csv"));
  CHECK(lines(slurp(d / "a.csv")).size() == 10);
  CHECK(fs::exists(d / "a.csv.timing.csv"));
}

TEST_CASE("rerun reproduces outputs") {
  TempDir d("rerun");
  REQUIRE(run({"gen", "--seed", "9", "--frames", "120", "--out", d / "s.csv"}).code == 0);
  REQUIRE(run({"cluster", "--input", d / "s.csv", "--output", d / "lab.tsv"}).code == 0);
  const std::string first = slurp(d / "lab.tsv");
  fs::remove(d / "lab.tsv");
  REQUIRE(run({"rerun", d / "lab.tsv.manifest.json"}).code == 0);
  CHECK(slurp(d / "lab.tsv") == first);
  CHECK(run({"rerun", d / "missing.json"}).code == 2);
}
