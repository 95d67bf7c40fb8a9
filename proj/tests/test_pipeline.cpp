#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "scaffold/commands.hpp"
#include "scaffold/config.hpp"
#include "scaffold/dataset.hpp"
#include "scaffold/filters.hpp"
#include "scaffold/grpo.hpp"
#include "scaffold/provider.hpp"
#include "scaffold/reformulate.hpp"
#include "scaffold/rng.hpp"
#include "scaffold/rundir.hpp"
#include "test_data.hpp"
#include "test_util.hpp"

// httplib's transitive system headers clash with Eigen when seen first, so
// it comes after the scaffold headers.
#include <httplib.h>
#include <nlohmann/json.hpp>

using namespace scaffold;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Swallows command stdout so test output stays readable.
struct CoutSilencer {
  std::ostringstream sink;
  std::streambuf* old;
  CoutSilencer() : old(std::cout.rdbuf(sink.rdbuf())) {}
  ~CoutSilencer() { std::cout.rdbuf(old); }
};

Dataset problems_only(const std::vector<std::pair<std::string, std::string>>& id_gold) {
  Dataset d;
  for (const auto& [id, gold] : id_gold)
    d.problems.push_back({id, "Question for " + id, gold, "unit", {}});
  return d;
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> out;
  std::istringstream in(testutil::read_file(path));
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

// Local chat-completions endpoint; handler runs on the server thread.
class LocalEndpoint {
 public:
  explicit LocalEndpoint(httplib::Server::Handler handler) {
    server_.Post("/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("cannot bind a local test port");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalEndpoint() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string chat_body(int n, const std::string& content) {
  json choices = json::array();
  for (int i = 0; i < n; ++i)
    choices.push_back({{"message", {{"role", "assistant"}, {"content", content}}}});
  return json{{"choices", choices}}.dump();
}

}  // namespace

TEST_CASE("solve and answerability prompts") {
  Problem p{"x", "What is 2 + 2?", "4", "", {}};
  const std::string solve = solve_prompt(p);
  CHECK(solve.find("What is 2 + 2?") == 0);
  CHECK(solve.find("\\boxed{}") != std::string::npos);
  const std::string judge = answerability_prompt(p);
  CHECK(judge.find("Problem: What is 2 + 2?") != std::string::npos);
  CHECK(judge.find("ANSWERABLE or UNANSWERABLE") != std::string::npos);
}

TEST_CASE("scripted provider replays batches in order and cycles to fill n") {
  auto provider = make_scripted_provider(testutil::fixture("judge_silver.jsonl").string());
  CHECK(provider->kind() == "scripted");

  RolloutRequest request;
  request.problem_id = "s1";
  request.level = DifficultyLevel::OpenEnded;
  request.n = 1;
  CHECK(provider->complete(request) ==
        std::vector<std::string>{"Adding gives \\boxed{21}."});
  CHECK(provider->complete(request) == std::vector<std::string>{"I get \\boxed{21} again."});
  CHECK(provider->complete(request) ==
        std::vector<std::string>{"On second thought \\boxed{18}."});
  // Batches exhausted: the fourth request wraps to the first batch.
  CHECK(provider->complete(request) ==
        std::vector<std::string>{"Adding gives \\boxed{21}."});
}

TEST_CASE("scripted provider cycles within a batch when n exceeds its size") {
  auto provider = make_scripted_provider(testutil::fixture("rollouts_hardset.jsonl").string());
  RolloutRequest request;
  request.problem_id = "p5";
  request.level = DifficultyLevel::OpenEnded;
  request.n = 5;
  std::vector<std::string> got = provider->complete(request);
  REQUIRE(got.size() == 5);
  CHECK(got[0] == got[2]);
  CHECK(got[1] == got[3]);
  // Cycling advances batch-by-batch, so the fifth draw is the first entry of
  // the next cycle, not a truncated copy.
  CHECK(got[4] == got[0]);
}

TEST_CASE("scripted provider errors") {
  auto provider = make_scripted_provider(testutil::fixture("judge_silver.jsonl").string());
  RolloutRequest request;
  request.problem_id = "nope";
  request.level = DifficultyLevel::OpenEnded;
  request.n = 1;
  CHECK_THROWS_WITH_AS(provider->complete(request),
                       doctest::Contains("has no completions for \"nope\""), std::runtime_error);

  request.problem_id = "s1";
  request.level = DifficultyLevel::Mcq4;  // recorded only at level 4
  CHECK_THROWS_AS(provider->complete(request), std::runtime_error);

  CHECK_THROWS_WITH_AS(make_scripted_provider("/nonexistent/fixture.jsonl"),
                       doctest::Contains("cannot read rollout fixture"), std::runtime_error);

  testutil::TempDir tmp("fixture");
  testutil::write_file(tmp.file("bad.jsonl"), "{not json}\n");
  CHECK_THROWS_WITH_AS(make_scripted_provider(tmp.file("bad.jsonl").string()),
                       doctest::Contains("bad.jsonl:1"), std::runtime_error);
}

TEST_CASE("simulated provider draws from the policy's seeded sampler") {
  Dataset d = testutil::make_ready_dataset(2);
  SimPolicyConfig config;
  config.rng_seed = 17;
  SimPolicy policy = build_sim_policy(d, config);
  auto provider = make_simulated_provider(policy);
  CHECK(provider->kind() == "simulated");

  RolloutRequest request;
  request.problem_id = "q1";
  request.level = DifficultyLevel::Mcq4;
  request.n = 6;
  request.seed = 555;
  RolloutGroup direct = sample_rollouts(policy, "q1", DifficultyLevel::Mcq4, 6, 555);
  CHECK(provider->complete(request) == direct.completions);
}

TEST_CASE("remote provider round trip with auth, payload, and logging") {
  std::mutex mu;
  std::string seen_auth, seen_body;
  LocalEndpoint endpoint([&](const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard<std::mutex> lock(mu);
      seen_auth = req.get_header_value("Authorization");
      seen_body = req.body;
    }
    const int n = json::parse(req.body).at("n").get<int>();
    res.set_content(chat_body(n, "\\boxed{42}"), "application/json");
  });

  testutil::TempDir tmp("remote");
  RemoteOptions options;
  options.endpoint_url = endpoint.url();
  options.api_key = "test-key";
  options.model = "m1";
  options.temperature = 0.7;
  options.attempts = 2;
  options.initial_backoff_ms = 1;
  options.timeout_seconds = 5;
  options.log_path = tmp.file("requests.jsonl").string();
  auto provider = make_remote_provider(options);
  CHECK(provider->kind() == "remote");

  RolloutRequest request;
  request.problem_id = "p1";
  request.level = DifficultyLevel::OpenEnded;
  request.prompt = "Solve it.";
  request.n = 3;
  std::vector<std::string> got = provider->complete(request);
  CHECK(got == std::vector<std::string>(3, "\\boxed{42}"));

  std::lock_guard<std::mutex> lock(mu);
  CHECK(seen_auth == "Bearer test-key");
  json body = json::parse(seen_body);
  CHECK(body.at("model") == "m1");
  CHECK(body.at("n") == 3);
  CHECK(body.at("temperature").get<double>() == doctest::Approx(0.7));
  CHECK(body.at("messages")[0].at("content") == "Solve it.");

  std::vector<json> log = read_jsonl(tmp.file("requests.jsonl"));
  REQUIRE(log.size() == 1);
  CHECK(log[0].at("status") == 200);
  CHECK(log[0].at("attempt") == 1);
  CHECK(log[0].at("problem_id") == "p1");
  CHECK(log[0].at("completions").size() == 3);
  CHECK(!log[0].contains("error"));
}

TEST_CASE("remote provider retries a 429 then succeeds") {
  std::atomic<int> calls{0};
  LocalEndpoint endpoint([&](const httplib::Request& req, httplib::Response& res) {
    if (calls.fetch_add(1) == 0) {
      res.status = 429;
      res.set_content("slow down", "text/plain");
      return;
    }
    const int n = json::parse(req.body).at("n").get<int>();
    res.set_content(chat_body(n, "ok"), "application/json");
  });

  testutil::TempDir tmp("remote");
  RemoteOptions options;
  options.endpoint_url = endpoint.url();
  options.model = "m1";
  options.attempts = 3;
  options.initial_backoff_ms = 1;
  options.timeout_seconds = 5;
  options.log_path = tmp.file("requests.jsonl").string();
  auto provider = make_remote_provider(options);

  RolloutRequest request;
  request.n = 2;
  CHECK(provider->complete(request) == std::vector<std::string>{"ok", "ok"});
  CHECK(calls.load() == 2);

  std::vector<json> log = read_jsonl(tmp.file("requests.jsonl"));
  REQUIRE(log.size() == 2);
  CHECK(log[0].at("status") == 429);
  CHECK(log[0].at("error") == "slow down");
  CHECK(log[1].at("status") == 200);
  CHECK(log[1].at("attempt") == 2);
}

TEST_CASE("remote provider gives up after the attempt budget") {
  std::atomic<int> calls{0};
  LocalEndpoint endpoint([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  });

  RemoteOptions options;
  options.endpoint_url = endpoint.url();
  options.model = "m1";
  options.attempts = 2;
  options.initial_backoff_ms = 1;
  options.timeout_seconds = 5;
  auto provider = make_remote_provider(options);

  RolloutRequest request;
  request.n = 1;
  CHECK_THROWS_WITH_AS(provider->complete(request),
                       doctest::Contains("remote rollout failed after 2 attempts"),
                       std::runtime_error);
  CHECK(calls.load() == 2);
}

TEST_CASE("remote provider rejects malformed and empty responses") {
  RolloutRequest request;
  request.n = 1;

  {
    LocalEndpoint endpoint([](const httplib::Request&, httplib::Response& res) {
      res.set_content("not json", "text/plain");
    });
    RemoteOptions options;
    options.endpoint_url = endpoint.url();
    options.model = "m1";
    options.attempts = 1;
    options.timeout_seconds = 5;
    CHECK_THROWS_WITH_AS(make_remote_provider(options)->complete(request),
                         doctest::Contains("malformed response"), std::runtime_error);
  }
  {
    LocalEndpoint endpoint([](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"choices":[]})", "application/json");
    });
    RemoteOptions options;
    options.endpoint_url = endpoint.url();
    options.model = "m1";
    options.attempts = 1;
    options.timeout_seconds = 5;
    CHECK_THROWS_WITH_AS(make_remote_provider(options)->complete(request),
                         doctest::Contains("no choices"), std::runtime_error);
  }
}

TEST_CASE("remote provider option validation") {
  RemoteOptions options;
  options.model = "m1";
  CHECK_THROWS_WITH_AS(make_remote_provider(options), doctest::Contains("endpoint URL"),
                       std::runtime_error);
  options.endpoint_url = "http://127.0.0.1:1";
  options.model.clear();
  CHECK_THROWS_WITH_AS(make_remote_provider(options), doctest::Contains("model name"),
                       std::runtime_error);
}

TEST_CASE("provider factory builds each kind and validates its inputs") {
  Dataset d = testutil::make_ready_dataset(1);

  SUBCASE("simulated matches a hand-built policy") {
    Settings settings;
    settings.seed = 31;
    auto provider = make_provider_from_settings(settings, false, "", &d);
    CHECK(provider->kind() == "simulated");

    SimPolicyConfig config;
    config.transfer = settings.sim_transfer;
    config.learning_rate = settings.sim_learning_rate;
    config.cloze_pool_size = settings.cloze_pool_size;
    config.open_ended_pool_size = settings.open_ended_pool_size;
    config.rng_seed = settings.seed;
    SimPolicy policy = build_sim_policy(d, config);
    RolloutRequest request;
    request.problem_id = "q1";
    request.level = DifficultyLevel::OpenEnded;
    request.n = 4;
    request.seed = 77;
    CHECK(provider->complete(request) ==
          sample_rollouts(policy, "q1", DifficultyLevel::OpenEnded, 4, 77).completions);
  }

  SUBCASE("simulated needs a dataset") {
    Settings settings;
    CHECK_THROWS_WITH_AS(make_provider_from_settings(settings, false, "", nullptr),
                         doctest::Contains("needs a dataset"), std::runtime_error);
  }

  SUBCASE("scripted resolves a relative fixture against base_dir") {
    Settings settings;
    settings.provider = "scripted";
    settings.provider_fixture = "judge_silver.jsonl";
    auto provider = make_provider_from_settings(settings, false, SCAFFOLD_FIXTURE_DIR, nullptr);
    RolloutRequest request;
    request.problem_id = "s1";
    request.level = DifficultyLevel::OpenEnded;
    request.n = 1;
    CHECK(provider->complete(request) ==
          std::vector<std::string>{"Adding gives \\boxed{21}."});
  }

  SUBCASE("scripted without a fixture path is a config error") {
    Settings settings;
    settings.provider = "scripted";
    CHECK_THROWS_WITH_AS(make_provider_from_settings(settings, false, "", nullptr),
                         doctest::Contains("provider is scripted but no fixture"),
                         std::runtime_error);
    settings.judge = "scripted";
    settings.judge_fixture.clear();
    CHECK_THROWS_WITH_AS(make_provider_from_settings(settings, true, "", nullptr),
                         doctest::Contains("judge is scripted but no fixture"),
                         std::runtime_error);
  }

  SUBCASE("unknown kind") {
    Settings settings;
    settings.provider = "banana";
    CHECK_THROWS_WITH_AS(make_provider_from_settings(settings, false, "", nullptr),
                         doctest::Contains("unknown provider kind \"banana\""),
                         std::runtime_error);
  }

  SUBCASE("remote settings honor ENDPOINT_URL and API_KEY env overrides") {
    std::mutex mu;
    std::string seen_auth, seen_model;
    LocalEndpoint endpoint([&](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard<std::mutex> lock(mu);
        seen_auth = req.get_header_value("Authorization");
        seen_model = json::parse(req.body).at("model").get<std::string>();
      }
      res.set_content(chat_body(1, "ok"), "application/json");
    });
    setenv("ENDPOINT_URL", endpoint.url().c_str(), 1);
    setenv("API_KEY", "env-key", 1);
    Settings settings;
    settings.provider = "remote";
    settings.model = "rollout-model";
    settings.judge_model = "judge-model";
    settings.endpoint_url = "http://127.0.0.1:1";  // overridden by the env var
    auto provider = make_provider_from_settings(settings, false, "", nullptr);
    RolloutRequest request;
    request.n = 1;
    CHECK(provider->complete(request) == std::vector<std::string>{"ok"});
    unsetenv("ENDPOINT_URL");
    unsetenv("API_KEY");
    std::lock_guard<std::mutex> lock(mu);
    CHECK(seen_auth == "Bearer env-key");
    CHECK(seen_model == "rollout-model");
  }
}

TEST_CASE("build_hard_set flags exactly the never-correct problems") {
  Dataset d = problems_only(
      {{"p1", "36"}, {"p2", "17"}, {"p3", "128"}, {"p4", "45"}, {"p5", "72"}, {"p6", "250"}});
  auto provider = make_scripted_provider(testutil::fixture("rollouts_hardset.jsonl").string());

  std::vector<HardSetProgress> progress;
  build_hard_set(d, *provider, 4, 99, [&](const HardSetProgress& p) { progress.push_back(p); });

  for (const char* id : {"p1", "p2", "p3", "p4"}) CHECK(d.is_hard(id));
  CHECK_FALSE(d.is_hard("p5"));
  CHECK_FALSE(d.is_hard("p6"));

  REQUIRE(progress.size() == 6);
  for (std::size_t i = 0; i < progress.size(); ++i) {
    CHECK(progress[i].problem_id == "p" + std::to_string(i + 1));
    CHECK(progress[i].n == 4);
    CHECK(progress[i].hard == (progress[i].c == 0));
  }
  CHECK(progress[4].c == 2);  // p5's two-entry batch cycled twice
  CHECK(progress[5].c == 2);

  CHECK_THROWS_AS(build_hard_set(d, *provider, 0, 99), std::invalid_argument);
}

TEST_CASE("silver filter keeps strict judge majorities and fails closed") {
  Dataset d = problems_only({{"s1", "21"}, {"s2", "21"}, {"s3", "21"}, {"s4", "21"}});

  auto judge = make_scripted_provider(testutil::fixture("judge_silver.jsonl").string());
  std::vector<FilterVerdict> verdicts = silver_answer_filter(d, *judge, 3, 5);
  REQUIRE(verdicts.size() == 4);

  CHECK(verdicts[0].problem_id == "s1");
  CHECK(verdicts[0].kept);
  CHECK(verdicts[0].filter == "silver");
  CHECK(verdicts[0].judge_answers == std::vector<std::string>{"21", "21", "18"});
  CHECK(verdicts[0].note.empty());

  CHECK_FALSE(verdicts[1].kept);  // 18, 18, 21: majority is wrong
  CHECK_FALSE(verdicts[2].kept);  // 21, 18, 24: no majority, fail closed

  CHECK(verdicts[3].kept);  // one unparseable, two matches
  CHECK(verdicts[3].note == "1 unparseable judge answer(s) counted as misses");
  CHECK(verdicts[3].judge_answers[0] == "I cannot settle on an answer.");

  CHECK_THROWS_AS(silver_answer_filter(d, *judge, 2, 5), std::invalid_argument);
  CHECK_THROWS_AS(silver_answer_filter(d, *judge, 0, 5), std::invalid_argument);

  auto fresh = make_scripted_provider(testutil::fixture("judge_silver.jsonl").string());
  std::vector<FilterVerdict> single = silver_answer_filter(d, *fresh, 1, 5);
  CHECK(single[0].kept);         // first batch alone: 21
  CHECK_FALSE(single[1].kept);   // first batch alone: 18
}

TEST_CASE("binary filter demands the whole ANSWERABLE token") {
  Dataset d = problems_only({{"b1", "1"}, {"b2", "1"}, {"b3", "1"}, {"b4", "1"}, {"b5", "1"}});
  auto judge = make_scripted_provider(testutil::fixture("judge_binary.jsonl").string());
  std::vector<FilterVerdict> verdicts = binary_filter(d, *judge, 5);
  REQUIRE(verdicts.size() == 5);

  CHECK(verdicts[0].kept);
  CHECK_FALSE(verdicts[1].kept);  // UNANSWERABLE is not a hit for ANSWERABLE
  CHECK(verdicts[2].kept);        // lowercase "answerable" counts as the token
  CHECK_FALSE(verdicts[3].kept);
  CHECK(verdicts[3].note == "unparseable verdict");
  CHECK_FALSE(verdicts[4].kept);  // both tokens present: the refusal wins
  CHECK(verdicts[4].note.empty());
  for (const FilterVerdict& v : verdicts) CHECK(v.filter == "binary");
}

TEST_CASE("filters scope to hard-flagged problems when any exist") {
  Dataset d = problems_only({{"b1", "1"}, {"b2", "1"}, {"b3", "1"}});
  d.hard_flag["b2"] = true;
  auto judge = make_scripted_provider(testutil::fixture("judge_binary.jsonl").string());
  std::vector<FilterVerdict> verdicts = binary_filter(d, *judge, 5);
  REQUIRE(verdicts.size() == 1);
  CHECK(verdicts[0].problem_id == "b2");

  // A false flag is not a flag: scope falls back to everything.
  d.hard_flag["b2"] = false;
  auto fresh = make_scripted_provider(testutil::fixture("judge_binary.jsonl").string());
  CHECK(binary_filter(d, *fresh, 5).size() == 3);
}

TEST_CASE("apply_filter prunes problems, variants, and hard flags") {
  Dataset d = problems_only({{"b1", "1"}, {"b2", "1"}, {"b3", "1"}, {"b4", "1"}, {"b5", "1"}});
  for (const Problem& p : d.problems) {
    attach_variant(d, make_open_ended_variant(p));
    d.hard_flag[p.id] = true;
  }
  auto judge = make_scripted_provider(testutil::fixture("judge_binary.jsonl").string());
  std::vector<FilterVerdict> verdicts = binary_filter(d, *judge, 5);

  CHECK(apply_filter(d, verdicts) == 3);
  REQUIRE(d.problems.size() == 2);
  CHECK(d.problems[0].id == "b1");
  CHECK(d.problems[1].id == "b3");
  CHECK(d.variants.count("b1") == 1);
  CHECK(d.variants.count("b2") == 0);
  CHECK(d.hard_flag.count("b2") == 0);
  CHECK(d.is_hard("b1"));

  std::vector<FilterVerdict> all_kept{{"b1", "binary", true, {}, ""}};
  CHECK(apply_filter(d, all_kept) == 0);
  CHECK(d.problems.size() == 2);
}

TEST_CASE("run directory layout, resolve, and metrics append") {
  testutil::TempDir tmp("rundir");
  RunDir rd(tmp.path() / "run");
  rd.ensure_layout();
  CHECK(fs::is_directory(rd.checkpoints_dir()));
  CHECK(fs::is_directory(rd.data_dir()));
  CHECK(fs::is_directory(rd.reports_dir()));
  CHECK(fs::is_directory(rd.requests_log().parent_path()));

  CHECK(rd.resolve("data/problems.jsonl") == rd.root() / "data/problems.jsonl");
  CHECK(rd.resolve("/abs/path.jsonl") == fs::path("/abs/path.jsonl"));

  rd.append_metrics("step,x", "0,1");
  rd.append_metrics("step,x", "1,2");
  CHECK(testutil::read_file(rd.metrics_csv()) == "step,x\n0,1\n1,2\n");

  rd.write_config_snapshot("tau = 0.5\n");
  CHECK(testutil::read_file(rd.config_snapshot()) == "tau = 0.5\n");

  append_line(rd.requests_log(), "{\"a\":1}");
  append_line(rd.requests_log(), "{\"a\":2}");
  CHECK(testutil::read_file(rd.requests_log()) == "{\"a\":1}\n{\"a\":2}\n");
}

TEST_CASE("checkpoints publish atomically and list in step order") {
  testutil::TempDir tmp("rundir");
  RunDir rd(tmp.path() / "run");
  rd.ensure_layout();
  CHECK(rd.checkpoint_steps().empty());

  for (std::int64_t step : {10, 2, 5})
    rd.publish_checkpoint(step, [&](const fs::path& dir) {
      testutil::write_file(dir / "policy.json", "step " + std::to_string(step));
    });
  CHECK(rd.checkpoint_steps() == std::vector<std::int64_t>{2, 5, 10});
  CHECK(testutil::read_file(rd.checkpoint_dir(5) / "policy.json") == "step 5");

  // Republishing a step replaces it wholesale.
  rd.publish_checkpoint(5, [](const fs::path& dir) {
    testutil::write_file(dir / "policy.json", "replaced");
  });
  CHECK(testutil::read_file(rd.checkpoint_dir(5) / "policy.json") == "replaced");

  // A writer failure leaves no final directory behind.
  CHECK_THROWS_AS(rd.publish_checkpoint(7,
                                        [](const fs::path&) {
                                          throw std::runtime_error("writer failed");
                                        }),
                  std::runtime_error);
  CHECK_FALSE(fs::exists(rd.checkpoint_dir(7)));

  // Junk in the checkpoints directory is ignored, staging leftovers included.
  fs::create_directories(rd.checkpoints_dir() / "step-abc");
  testutil::write_file(rd.checkpoints_dir() / "step-3", "a file, not a directory");
  CHECK(rd.checkpoint_steps() == std::vector<std::int64_t>{2, 5, 10});
}

TEST_CASE("settings parse, render, and round-trip") {
  Settings defaults;
  CHECK(render_settings(parse_settings_text("")) == render_settings(defaults));

  Settings s = parse_settings_text(
      "# comment line\n"
      "tau = 0.75   # trailing comment\n"
      "\n"
      "seed = 42\n"
      "graduation = downweight\n"
      "static_mixture = true\n"
      "sim_transfer = false\n"
      "provider = scripted\n"
      "provider_fixture = fixtures/rollouts.jsonl\n");
  CHECK(s.tau == doctest::Approx(0.75));
  CHECK(s.seed == 42);
  CHECK(s.graduation == "downweight");
  CHECK(s.static_mixture);
  CHECK_FALSE(s.sim_transfer);
  CHECK(s.provider == "scripted");
  CHECK(s.provider_fixture == "fixtures/rollouts.jsonl");
  // Untouched keys keep their defaults.
  CHECK(s.rollout_n == defaults.rollout_n);
  CHECK(s.lr == defaults.lr);

  const std::string rendered = render_settings(s);
  CHECK(render_settings(parse_settings_text(rendered)) == rendered);
  CHECK(rendered.rfind("checkpoint_every = 10\n", 0) == 0);  // keys emit sorted
}

TEST_CASE("settings reject unknown keys and bad values with their origin") {
  CHECK_THROWS_WITH_AS(parse_settings_text("tau = 0.5\nbogus = 1\n", "cfg"),
                       doctest::Contains("cfg:2: unknown key \"bogus\""), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_settings_text("tau = warm\n", "cfg"),
                       doctest::Contains("cfg:1: key \"tau\""), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_settings_text("rollout_n = 8.5\n", "cfg"),
                       doctest::Contains("key \"rollout_n\""), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_settings_text("static_mixture = maybe\n", "cfg"),
                       doctest::Contains("key \"static_mixture\""), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_settings_text("no equals sign here\n", "cfg"),
                       doctest::Contains("cfg:1: expected \"key = value\""), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_settings("/nonexistent/config"),
                       doctest::Contains("cannot read config file"), std::runtime_error);
}

TEST_CASE("ingest and reformulate commands populate the run directory") {
  testutil::TempDir tmp("cmd");
  CoutSilencer quiet;
  GlobalOptions global;
  global.run_dir = (tmp.path() / "run").string();

  CHECK(cmd_ingest(global, testutil::fixture("problems.jsonl").string()) == 0);
  Dataset d = load_dataset(tmp.path() / "run" / "data" / "problems.jsonl");
  CHECK(d.problems.size() == 4);

  CHECK(cmd_reformulate(global, "") == 0);

  std::vector<json> prompts = read_jsonl(tmp.path() / "run" / "data" / "prompts_needed.jsonl");
  REQUIRE(prompts.size() == 5);
  std::vector<std::pair<std::string, int>> needed;
  for (const json& j : prompts) {
    needed.emplace_back(j.at("problem_id").get<std::string>(), j.at("level").get<int>());
    CHECK(j.at("prompt").get<std::string>().find("Original Question:") != std::string::npos);
  }
  const std::vector<std::pair<std::string, int>> expected{
      {"fx-sixes", 1}, {"fx-sixes", 2}, {"fx-single", 3}, {"fx-pair", 1}, {"fx-pair", 2}};
  CHECK(needed == expected);

  std::vector<json> review = read_jsonl(tmp.path() / "run" / "data" / "mask_review.jsonl");
  REQUIRE(review.size() == 2);
  CHECK(review[0].at("problem_id") == "fx-sixes");
  CHECK(review[1].at("problem_id") == "fx-pair");
  CHECK(review[1].at("gold_answer") == "(3, 4)");

  Dataset loaded = load_dataset(tmp.path() / "run" / "data" / "problems.jsonl");
  attach_stored_variants(loaded,
                         load_variants(tmp.path() / "run" / "data" / "variants.jsonl"));
  CHECK(loaded.ready_for_training("fx-add"));
  CHECK_FALSE(loaded.ready_for_training("fx-sixes"));  // MCQs await the LLM path
  CHECK(loaded.variant("fx-sixes", DifficultyLevel::Cloze) != nullptr);
  CHECK(loaded.variant("fx-single", DifficultyLevel::Cloze) == nullptr);
  CHECK(loaded.variant("fx-pair", DifficultyLevel::Mcq4) == nullptr);

  // Feed back LLM responses: one valid MCQ-4, one mismatched MCQ-10, one
  // cloze whose mask reveals nothing.
  CHECK(cmd_reformulate(global, testutil::fixture("reformulation_responses.jsonl").string()) == 0);

  std::vector<json> rejected =
      read_jsonl(tmp.path() / "run" / "data" / "rejected_variants.jsonl");
  REQUIRE(rejected.size() == 2);
  CHECK(rejected[0].at("problem_id") == "fx-sixes");
  CHECK(rejected[0].at("level") == 2);
  CHECK(rejected[0].at("reason") == "letter/gold mismatch");
  CHECK(rejected[1].at("problem_id") == "fx-single");
  CHECK(rejected[1].at("level") == 3);
  CHECK(rejected[1].at("reason") == "no digit revealed");

  Dataset after = load_dataset(tmp.path() / "run" / "data" / "problems.jsonl");
  attach_stored_variants(after, load_variants(tmp.path() / "run" / "data" / "variants.jsonl"));
  const Variant* mcq4 = after.variant("fx-sixes", DifficultyLevel::Mcq4);
  REQUIRE(mcq4 != nullptr);
  CHECK(mcq4->options == std::vector<std::string>{"1-12", "1-14", "2-15", "1-10"});
  CHECK(after.variant("fx-sixes", DifficultyLevel::Mcq10) == nullptr);
}

TEST_CASE("reformulate command rejects responses for unknown problems") {
  testutil::TempDir tmp("cmd");
  CoutSilencer quiet;
  GlobalOptions global;
  global.run_dir = (tmp.path() / "run").string();
  CHECK(cmd_ingest(global, testutil::fixture("problems.jsonl").string()) == 0);

  testutil::write_file(tmp.file("responses.jsonl"),
                       R"({"problem_id":"ghost","level":1,"response":"x"})"
                       "\n");
  CHECK_THROWS_WITH_AS(cmd_reformulate(global, tmp.file("responses.jsonl").string()),
                       doctest::Contains("unknown problem id \"ghost\""), std::runtime_error);

  // Without ingest the dataset is missing and the command says which step to run.
  GlobalOptions fresh;
  fresh.run_dir = (tmp.path() / "other").string();
  CHECK_THROWS_WITH_AS(cmd_reformulate(fresh, ""),
                       doctest::Contains("run the ingest command first"), std::runtime_error);
}
