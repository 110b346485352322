#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "longmt/config.hpp"
#include "test_util.hpp"

using namespace longmt;
using namespace longmt::config;

TEST_CASE("toml subset: sections, types, comments") {
  const auto t = parse_toml(
      "# top comment\n"
      "[backend]\n"
      "kind = \"scripted\"   # trailing comment\n"
      "concurrency = 4\n"
      "temperature = 0.25\n"
      "\n"
      "[pipeline]\n"
      "resume = false\n");
  CHECK(std::get<std::string>(*t.find("backend", "kind")) == "scripted");
  CHECK(std::get<std::int64_t>(*t.find("backend", "concurrency")) == 4);
  CHECK(std::get<double>(*t.find("backend", "temperature")) == 0.25);
  CHECK(std::get<bool>(*t.find("pipeline", "resume")) == false);
  CHECK(t.find("backend", "missing") == nullptr);
}

TEST_CASE("toml subset: string escapes and malformed input") {
  const auto t = parse_toml("[s]\nv = \"a\\nb\\\"c\\\\d\"\n");
  CHECK(std::get<std::string>(*t.find("s", "v")) == "a\nb\"c\\d");
  CHECK_THROWS_AS(parse_toml("[s\nk = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[s]\nnovalue\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[s]\nk = \"unterminated\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[s]\nk = 12abc\n"), ConfigError);
}

TEST_CASE("environment interpolation") {
  ::setenv("LONGMT_TEST_VAR", "resolved", 1);
  CHECK(interpolate_env("pre ${LONGMT_TEST_VAR} post") == "pre resolved post");
  CHECK(interpolate_env("${LONGMT_TEST_UNSET_VAR}") == "");
  CHECK_THROWS_AS(interpolate_env("${broken"), ConfigError);
  const auto t = parse_toml("[backend]\ncredential_env = \"${LONGMT_TEST_VAR}\"\n");
  CHECK(std::get<std::string>(*t.find("backend", "credential_env")) == "resolved");
  ::unsetenv("LONGMT_TEST_VAR");
}

TEST_CASE("config defaults follow the pipeline contract") {
  PipelineConfig cfg;
  CHECK(cfg.threshold == 90);
  CHECK(cfg.max_refinements == 8);
  CHECK(cfg.temperature == 0.1);
  CHECK(cfg.concurrency == 8);
  CHECK(cfg.min_words == 10);
  CHECK(cfg.max_words == 100);
  CHECK(cfg.split_counts.train == 19264);
  CHECK(cfg.split_counts.validation == 1000);
  CHECK(cfg.split_counts.test == 2000);
  CHECK(cfg.token_scheme == datastore::TokenScheme::whitespace_cjk);
  CHECK(cfg.resume);
}

TEST_CASE("config_from_toml maps sections onto the pipeline config") {
  const auto cfg = config_from_toml(parse_toml(
      "[backend]\n"
      "kind = \"live\"\n"
      "endpoint = \"http://localhost:9999/v1/chat/completions\"\n"
      "credential_env = \"MY_KEY\"\n"
      "concurrency = 2\n"
      "[models]\n"
      "miner = \"m-miner\"\n"
      "judge = \"m-judge\"\n"
      "[synthesis]\n"
      "threshold = 85\n"
      "max_refinements = 4\n"
      "[split]\n"
      "train = 10\nvalidation = 2\ntest = 3\nseed = 5\n"
      "[eval]\n"
      "metrics = \"bleu, grf\"\n"
      "[paths]\n"
      "sentences = \"x/sentences.jsonl\"\n"));
  CHECK(cfg.backend == BackendKind::live);
  CHECK(cfg.endpoint == "http://localhost:9999/v1/chat/completions");
  CHECK(cfg.credential_env == "MY_KEY");
  CHECK(cfg.concurrency == 2);
  CHECK(cfg.models.miner == "m-miner");
  CHECK(cfg.models.judge == "m-judge");
  CHECK(cfg.models.translator == "default-model");
  CHECK(cfg.threshold == 85);
  CHECK(cfg.max_refinements == 4);
  CHECK(cfg.split_counts.train == 10);
  CHECK(cfg.split_seed == 5);
  CHECK(cfg.metrics == std::vector<std::string>{"bleu", "grf"});
  CHECK(cfg.sentences == std::filesystem::path("x/sentences.jsonl"));
}

TEST_CASE("config validation") {
  PipelineConfig cfg;
  cfg.fixture = "f.jsonl";
  CHECK_NOTHROW(validate(cfg));

  PipelineConfig bad = cfg;
  bad.threshold = 101;
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = cfg;
  bad.backend = BackendKind::live;  // no endpoint
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = cfg;
  bad.fixture.clear();  // scripted without fixture
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = cfg;
  bad.verdicts = bad.sentences;  // colliding stage outputs
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = cfg;
  bad.min_words = 200;
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = cfg;
  bad.max_failure_rate = 1.5;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("load_config reads the shipped replay config") {
  const auto cfg = load_config(testutil::repo_dir() / "configs" / "replay.toml");
  CHECK(cfg.backend == BackendKind::scripted);
  CHECK_NOTHROW(validate(cfg));
}
