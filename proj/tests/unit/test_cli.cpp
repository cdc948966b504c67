#include <doctest.h>

#include <filesystem>

#include <json.hpp>

#include "mdecomp/config.hpp"
#include "expect.hpp"
#include "mdecomp/text_format.hpp"
#include "run_cli.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using fixture::run_cli;
using fixture::slurp;

namespace {

std::string q(const std::string& s) { return "'" + s + "'"; }

std::string cfg(const fixture::LandscapeFiles& f) { return " --config " + q(f.config) + " --threads 2"; }

std::size_t count_files(const fs::path& dir, const std::string& prefix, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    n += name.rfind(prefix, 0) == 0 && e.path().extension() == ext;
  }
  return n;
}

json error_json(const fixture::CliResult& r) { return json::parse(r.err.substr(r.err.rfind("{\"error\""))); }

void write_corpus(const std::vector<mdecomp::Sentence>& sentences, const std::string& path) {
  std::string text;
  for (const auto& s : sentences) {
    json j = {{"id", s.id}, {"party", s.party}, {"election_date", s.election_date}, {"position", s.position},
              {"text", s.text}};
    j["code"] = s.code ? json(*s.code) : json(nullptr);
    text += j.dump() + "\n";
  }
  mdecomp::write_file(path, text);
}

}  // namespace

TEST_CASE("config parsing") {
  const auto dir = fixture::temp_dir("config");
  mdecomp::write_file(dir + "/c.jsonl", "");
  using mdecomp::cli::parse_config;
  const auto c = parse_config(R"({"analysis_corpus": "c.jsonl", "grouping": {"min_count": 3, "k": 4,
      "stance_pairs": [["a", "b"]], "overrides": {"x": "other"}, "names": {"0": "econ"}},
      "labeller": {"kind": "majority", "epochs": 7}, "whitening": {"enabled": false}})",
                              dir);
  CHECK(c.analysis_corpus == dir + "/c.jsonl");
  CHECK(c.output_dir == dir + "/out");
  CHECK(c.grouping.min_count == 3);
  CHECK(c.grouping.k == 4);
  CHECK(c.grouping.stance_pairs.size() == 1);
  CHECK(c.grouping.overrides.front() == mdecomp::CodePair{"x", "other"});
  CHECK(c.grouping.names.at(0) == "econ");
  CHECK(c.labeller.kind == "majority");
  CHECK(c.labeller.training.epochs == 7);
  CHECK_FALSE(c.whiten);

  using fixture::throws_kind;
  using mdecomp::ErrorKind;
  CHECK(throws_kind([&] { parse_config(R"({"grouping": {"min_count": 0}})", dir); }, ErrorKind::Validation));
  CHECK(throws_kind([&] { parse_config(R"({"grouping": {"k": 1}})", dir); }, ErrorKind::Validation));
  CHECK(throws_kind([&] { parse_config(R"({"analysis_corpus": "missing.jsonl"})", dir); }, ErrorKind::Validation));
  CHECK(throws_kind([&] { parse_config(R"({"labeller": {"kind": "svm"}})", dir); }, ErrorKind::Validation));
  CHECK(throws_kind([&] { parse_config("{nope", dir); }, ErrorKind::Parse));
}

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("group --config /definitely/missing.json").exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("group") {
  const auto land = fixture::make_landscape();
  const auto f = fixture::write_landscape(
      land, fixture::temp_dir("cli_group"),
      R"({"grouping": {"stance_pairs": [["economy_l", "economy_r"], ["security_l", "security_r"]]}})");
  const auto r = run_cli("group" + cfg(f));
  REQUIRE(r.exit_code == 0);
  const fs::path out = fs::path(f.dir) / "out";
  for (const char* name : {"category_matrix.csv", "dendrogram.json", "partition.json", "leftovers.json"}) {
    CHECK(fs::exists(out / name));
  }
  const auto stance = json::parse(r.out);
  CHECK(stance.at("pass").get<bool>());
  // The planted left/right codes of each domain end up together.
  const auto scheme = mdecomp::load_scheme((out / "partition.json").string());
  CHECK(scheme.domains().size() == land.domains.size());
  for (const auto& d : land.domains) CHECK(scheme.domain_of(d + "_l") == scheme.domain_of(d + "_r"));
  CHECK(scheme.other_codes().count("000") == 1);

  const auto starved = fixture::write_landscape(land, fixture::temp_dir("cli_group_starved"),
                                                R"({"grouping": {"min_count": 100000}})");
  const auto e = run_cli("group" + cfg(starved));
  CHECK(e.exit_code == 2);
  const auto err = error_json(e);
  CHECK(err["error"]["kind"] == "insufficient-categories");
  CHECK(err["error"]["exit_code"] == 2);
}

TEST_CASE("label train, predict, eval") {
  const auto land = fixture::make_landscape();
  const auto f = fixture::write_landscape(land, fixture::temp_dir("cli_label"));
  REQUIRE(run_cli("label train" + cfg(f)).exit_code == 0);
  const fs::path out = fs::path(f.dir) / "out";
  CHECK(fs::exists(out / "model.json"));
  const auto train_report = json::parse(slurp(out / "train_report.json"));
  CHECK(train_report["n_validation"].get<std::size_t>() > 0);

  REQUIRE(run_cli("label eval" + cfg(f)).exit_code == 0);
  const auto acc = json::parse(slurp(out / "accuracy_report.json"));
  CHECK(acc["overall"].get<double>() >= 0.99);
  for (const auto& d : land.domains) CHECK(acc["per_domain"][d].is_number());

  REQUIRE(run_cli("label predict" + cfg(f)).exit_code == 0);
  const auto predicted = mdecomp::parse_predictions_jsonl(slurp(out / "predictions.jsonl"));
  CHECK(predicted.size() == land.corpus().size());

  SUBCASE("unannotated corpus") {
    auto sentences = land.sentences;
    std::erase_if(sentences, [](const auto& s) { return s.code == "H"; });
    for (auto& s : sentences) s.code.reset();
    write_corpus(sentences, f.dir + "/plain.jsonl");
    mdecomp::write_file(f.dir + "/plain.json",
                        R"({"analysis_corpus": "plain.jsonl", "bigram_embeddings": "bigrams.emb",
                            "scheme": "scheme.json", "output_dir": "out"})");
    const std::string plain = " --config " + q(f.dir + "/plain.json");
    REQUIRE(run_cli("label predict" + plain).exit_code == 0);
    CHECK(mdecomp::parse_predictions_jsonl(slurp(out / "predictions.jsonl")).size() == sentences.size());
    const auto e = run_cli("label eval" + plain);
    CHECK(e.exit_code == 2);
    CHECK(error_json(e)["error"]["kind"] == "undefined-metric");
  }
}

TEST_CASE("similarity with the 13-domain layout") {
  const auto land = fixture::make_landscape({.domains = 13, .sentences_per_domain = 9});
  const auto f = fixture::write_landscape(land, fixture::temp_dir("cli_sim13"));
  REQUIRE(run_cli("similarity" + cfg(f)).exit_code == 0);
  const fs::path dir = fs::path(f.dir) / "out" / "similarity_annotated";
  CHECK(count_files(dir, "domain_", ".csv") == 13);
  CHECK(fs::exists(dir / "aggregate.csv"));

  // Gold labels passed off as predictions give the same matrices.
  std::string preds;
  for (const auto& [id, label] : mdecomp::annotated_labels(land.corpus(), land.scheme)) {
    preds += json({{"id", id}, {"predicted_domain", label}}).dump() + "\n";
  }
  mdecomp::write_file(f.dir + "/out/predictions.jsonl", preds);
  REQUIRE(run_cli("similarity --labels predicted" + cfg(f)).exit_code == 0);
  const fs::path pdir = fs::path(f.dir) / "out" / "similarity_predicted";
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".csv") CHECK(slurp(e.path()) == slurp(pdir / e.path().filename()));
  }

  REQUIRE(run_cli("evaluate" + cfg(f)).exit_code == 0);
  const auto report = json::parse(slurp(fs::path(f.dir) / "out" / "report.json"));
  CHECK(report["domains"].size() == 13);
  for (const auto& [name, block] : report["domains"].items()) {
    CHECK(block.contains("mantel_vs_salience"));
    CHECK(block.contains("pearson_vs_rile"));
    CHECK(block["pearson_vs_rile"]["defined"].get<bool>());
  }
  CHECK(report.contains("aggregate"));
  const auto& cmp = report["comparison"]["mantel_annotated_vs_predicted"];
  CHECK(cmp.size() == 14);
  for (const auto& d : land.domains) CHECK(cmp[d]["r"].get<double>() == 1.0);
}

TEST_CASE("a party without sentences in a domain gives NA cells and a warning") {
  const auto land = fixture::make_landscape();
  auto sentences = land.sentences;
  std::erase_if(sentences, [](const auto& s) { return s.party == "party_a" && s.code && s.code->rfind("economy_", 0) == 0; });
  const auto f = fixture::write_landscape(land, fixture::temp_dir("cli_na"));
  write_corpus(sentences, f.corpus);
  const auto r = run_cli("similarity" + cfg(f));
  REQUIRE(r.exit_code == 0);
  CHECK(r.err.find("party_a") != std::string::npos);
  const auto csv = slurp(fs::path(f.dir) / "out" / "similarity_annotated" / "domain_economy.csv");
  CHECK(csv.find("party_a,NA,NA,NA,NA,NA,NA\n") != std::string::npos);

  REQUIRE(run_cli("evaluate" + cfg(f)).exit_code == 0);
  const auto report = json::parse(slurp(fs::path(f.dir) / "out" / "report.json"));
  CHECK_FALSE(report["domains"]["economy"]["mds"]["defined"].get<bool>());
  CHECK(report["domains"]["security"]["mds"]["defined"].get<bool>());
}

TEST_CASE("two-party corpus: undefined statistics, exit 0 with warnings") {
  const auto land = fixture::make_landscape({.parties = 2});
  const auto f = fixture::write_landscape(land, fixture::temp_dir("cli_two"));
  REQUIRE(run_cli("similarity" + cfg(f)).exit_code == 0);
  const auto r = run_cli("evaluate" + cfg(f));
  REQUIRE(r.exit_code == 0);
  const auto report = json::parse(slurp(fs::path(f.dir) / "out" / "report.json"));
  for (const auto& [_, block] : report["domains"].items()) {
    CHECK_FALSE(block["pearson_vs_rile"]["defined"].get<bool>());
    CHECK(block["mds"]["defined"].get<bool>());
  }
  CHECK_FALSE(report["warnings"].empty());
}

TEST_CASE("inputs are not modified") {
  const auto land = fixture::make_landscape({.parties = 3});
  const auto f = fixture::write_landscape(land, fixture::temp_dir("cli_ro"));
  const auto before = slurp(f.corpus) + slurp(f.sentences) + slurp(f.bigrams) + slurp(f.scheme) + slurp(f.config);
  for (const char* cmd : {"group", "label train", "label predict", "label eval", "similarity", "evaluate"}) {
    CHECK(run_cli(std::string(cmd) + cfg(f)).exit_code == 0);
  }
  CHECK(slurp(f.corpus) + slurp(f.sentences) + slurp(f.bigrams) + slurp(f.scheme) + slurp(f.config) == before);
}
