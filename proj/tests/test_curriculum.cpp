#include <doctest.h>

#include <map>
#include <set>
#include <string>

#include "scaffold/curriculum.hpp"
#include "scaffold/rng.hpp"
#include "test_data.hpp"
#include "test_util.hpp"

using namespace scaffold;
using testutil::make_ready_dataset;

namespace {

std::vector<bool> outcomes_with(int correct, int m) {
  std::vector<bool> v(m, false);
  for (int i = 0; i < correct; ++i) v[i] = true;
  return v;
}

}  // namespace

TEST_CASE("init_curriculum starts every hard problem at level 1") {
  Dataset d = make_ready_dataset(3);
  CurriculumState state = init_curriculum(d, CurriculumConfig{});
  REQUIRE(state.records.size() == 3);
  for (const CurriculumRecord& r : state.records) {
    CHECK(r.level == DifficultyLevel::Mcq4);
    CHECK(r.last_accuracy == 0.0);
    CHECK_FALSE(r.graduated);
    CHECK(r.promotions.empty());
  }
  CHECK(state.find("q2") != nullptr);
  CHECK(state.find("zz") == nullptr);

  // Non-hard problems stay out of the curriculum.
  Dataset easy = make_ready_dataset(3, 101, false);
  CHECK(init_curriculum(easy, CurriculumConfig{}).records.empty());
}

TEST_CASE("init_curriculum validates config and variant coverage") {
  Dataset d = make_ready_dataset(2);
  CurriculumConfig bad_tau;
  bad_tau.tau = 0.0;
  CHECK_THROWS_AS(init_curriculum(d, bad_tau), std::invalid_argument);
  bad_tau.tau = 1.5;
  CHECK_THROWS_AS(init_curriculum(d, bad_tau), std::invalid_argument);
  CurriculumConfig bad_m;
  bad_m.m = 0;
  CHECK_THROWS_AS(init_curriculum(d, bad_m), std::invalid_argument);

  Dataset partial = make_ready_dataset(1);
  partial.problems.push_back({"p7", "Q?", "55", "unit", {}});
  partial.hard_flag["p7"] = true;
  const Problem& p7 = partial.problems.back();
  DistractorPolicy policy;
  attach_variant(partial, build_mcq(p7, 4, policy));
  attach_variant(partial, build_mcq(p7, 10, policy));
  attach_variant(partial, make_open_ended_variant(p7));
  CHECK_THROWS_WITH_AS(init_curriculum(partial, CurriculumConfig{}),
                       doctest::Contains("\"p7\" missing level 3"), std::runtime_error);
}

TEST_CASE("record_outcomes promotes at the inclusive threshold") {
  Dataset d = make_ready_dataset(1);
  CurriculumState state = init_curriculum(d, CurriculumConfig{});

  // tau - 1/m stays put.
  record_outcomes(state, "q1", outcomes_with(3, 8), 1);
  CHECK(state.records[0].level == DifficultyLevel::Mcq4);
  CHECK(state.records[0].last_accuracy == 0.375);
  CHECK(state.records[0].promotions.empty());

  // Exactly tau promotes.
  record_outcomes(state, "q1", outcomes_with(4, 8), 2);
  CHECK(state.records[0].level == DifficultyLevel::Mcq10);
  REQUIRE(state.records[0].promotions.size() == 1);
  CHECK(state.records[0].promotions[0].step == 2);
  CHECK(state.records[0].promotions[0].from == DifficultyLevel::Mcq4);
  CHECK(state.records[0].promotions[0].to == DifficultyLevel::Mcq10);

  record_outcomes(state, "q1", outcomes_with(6, 8), 3);
  record_outcomes(state, "q1", outcomes_with(5, 8), 4);
  CHECK(state.records[0].level == DifficultyLevel::OpenEnded);
  CHECK_FALSE(state.records[0].graduated);

  record_outcomes(state, "q1", outcomes_with(8, 8), 5);
  CHECK(state.records[0].graduated);
  CHECK(state.records[0].graduated_step == 5);
  CHECK(state.records[0].level == DifficultyLevel::OpenEnded);

  CHECK_THROWS_WITH_AS(record_outcomes(state, "q1", outcomes_with(8, 8), 6),
                       doctest::Contains("already graduated"), std::runtime_error);
  CHECK_THROWS_WITH_AS(record_outcomes(state, "nope", outcomes_with(4, 8), 6),
                       doctest::Contains("unknown problem id"), std::runtime_error);
  Dataset d2 = make_ready_dataset(1);
  CurriculumState s2 = init_curriculum(d2, CurriculumConfig{});
  CHECK_THROWS_WITH_AS(record_outcomes(s2, "q1", outcomes_with(2, 4), 1),
                       doctest::Contains("expected 8 outcomes"), std::runtime_error);
}

TEST_CASE("levels never demote and promotions always carry accuracy >= tau") {
  Dataset d = make_ready_dataset(4);
  CurriculumConfig config;
  CurriculumState state = init_curriculum(d, config);
  Rng rng(55);
  std::map<std::string, int> last_level;
  for (const CurriculumRecord& r : state.records) last_level[r.problem_id] = 1;

  for (std::int64_t step = 0; step < 300; ++step) {
    const CurriculumRecord& r = state.records[rng.uniform_index(4)];
    if (r.graduated) continue;
    const std::string id = r.problem_id;
    const std::size_t promotions_before = r.promotions.size();
    record_outcomes(state, id, outcomes_with(rng.uniform_index(9), 8), step);
    const CurriculumRecord* after = state.find(id);
    CHECK(level_value(after->level) >= last_level[id]);
    last_level[id] = level_value(after->level);
    if (after->promotions.size() > promotions_before) {
      // The accuracy recorded at the promotion step met the threshold.
      CHECK(after->last_accuracy >= 0.5);
      CHECK(after->promotions.back().step == step);
    }
  }
}

TEST_CASE("compose_batch draws without replacement and cycles when short") {
  Dataset d = make_ready_dataset(4);
  CurriculumState state = init_curriculum(d, CurriculumConfig{});

  std::vector<BatchEntry> two = compose_batch(state, d, 2, 9);
  REQUIRE(two.size() == 2);
  CHECK(two[0].problem_id != two[1].problem_id);
  for (const BatchEntry& e : two) {
    CHECK(e.level == DifficultyLevel::Mcq4);
    CHECK(e.variant.level == DifficultyLevel::Mcq4);
  }

  // batch_size 4 covers all problems exactly once.
  std::vector<BatchEntry> four = compose_batch(state, d, 4, 9);
  std::set<std::string> ids;
  for (const BatchEntry& e : four) ids.insert(e.problem_id);
  CHECK(ids.size() == 4);

  // batch_size 10 = 2 full cycles + 2: every problem appears 2 or 3 times.
  std::vector<BatchEntry> ten = compose_batch(state, d, 10, 9);
  std::map<std::string, int> counts;
  for (const BatchEntry& e : ten) counts[e.problem_id]++;
  for (const auto& [id, count] : counts) CHECK((count == 2 || count == 3));

  // Determinism.
  std::vector<BatchEntry> again = compose_batch(state, d, 10, 9);
  REQUIRE(again.size() == ten.size());
  for (std::size_t i = 0; i < ten.size(); ++i)
    CHECK(again[i].problem_id == ten[i].problem_id);

  CHECK_THROWS_AS(compose_batch(state, d, 0, 9), std::invalid_argument);
}

TEST_CASE("compose_batch pairs each problem with its current level") {
  Dataset d = make_ready_dataset(2);
  CurriculumState state = init_curriculum(d, CurriculumConfig{});
  record_outcomes(state, "q1", outcomes_with(8, 8), 0);
  record_outcomes(state, "q1", outcomes_with(8, 8), 1);

  std::vector<BatchEntry> batch = compose_batch(state, d, 2, 4);
  for (const BatchEntry& e : batch) {
    if (e.problem_id == "q1") CHECK(e.level == DifficultyLevel::Cloze);
    if (e.problem_id == "q2") CHECK(e.level == DifficultyLevel::Mcq4);
    CHECK(e.variant.level == e.level);
  }
}

TEST_CASE("graduated records retire, downweight, or stay in the static mixture") {
  Dataset d = make_ready_dataset(2);
  auto graduate = [](CurriculumState& state, const std::string& id) {
    for (int hop = 0; hop < 4; ++hop)
      record_outcomes(state, id, std::vector<bool>(8, true), hop);
  };

  CurriculumConfig retire;
  CurriculumState state = init_curriculum(d, retire);
  graduate(state, "q1");
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (const BatchEntry& e : compose_batch(state, d, 4, seed))
      CHECK(e.problem_id == "q2");
  graduate(state, "q2");
  CHECK(curriculum_complete(state));
  CHECK(compose_batch(state, d, 4, 1).empty());

  CurriculumConfig downweight;
  downweight.graduation = GraduationPolicy::Downweight;
  downweight.downweight_factor = 0.25;
  CurriculumState dw = init_curriculum(d, downweight);
  graduate(dw, "q1");
  int graduated_draws = 0, active_draws = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    std::vector<BatchEntry> batch = compose_batch(dw, d, 1, seed);
    REQUIRE(batch.size() == 1);
    if (batch[0].problem_id == "q1") {
      ++graduated_draws;
      CHECK(batch[0].level == DifficultyLevel::OpenEnded);
    } else {
      ++active_draws;
    }
  }
  // Weight 0.25 vs 1.0: expect about 20% graduated draws; 3 sigma ~ 6%.
  CHECK(graduated_draws > 0);
  CHECK(graduated_draws < active_draws);
  CHECK(std::abs(graduated_draws / 400.0 - 0.2) < 0.06);

  CurriculumConfig stat;
  stat.static_mixture = true;
  CurriculumState sm = init_curriculum(d, stat);
  std::array<int, 4> level_counts{};
  for (std::uint64_t seed = 0; seed < 400; ++seed)
    for (const BatchEntry& e : compose_batch(sm, d, 2, seed))
      level_counts[level_index(e.level)]++;
  // 800 draws, expected 200 per level; 3 sigma ~ 37.
  for (int f = 0; f < 4; ++f) CHECK(std::abs(level_counts[f] - 200) < 60);
}

TEST_CASE("level histograms count active and progress views") {
  Dataset d = make_ready_dataset(4);
  CurriculumState state = init_curriculum(d, CurriculumConfig{});
  std::array<double, 4> initial = level_histogram(state);
  CHECK(initial == std::array<double, 4>{1.0, 0.0, 0.0, 0.0});

  // Walk q1 and q2 to level 4.
  for (const std::string id : {"q1", "q2"})
    for (int hop = 0; hop < 3; ++hop)
      record_outcomes(state, id, std::vector<bool>(8, true), hop);
  std::array<double, 4> split = level_histogram(state);
  CHECK(split == std::array<double, 4>{0.5, 0.0, 0.0, 0.5});

  // Graduating q1 removes it from the active view, not the progress view.
  record_outcomes(state, "q1", std::vector<bool>(8, true), 9);
  std::array<double, 4> active = level_histogram(state);
  CHECK(active[0] == doctest::Approx(2.0 / 3.0));
  CHECK(active[3] == doctest::Approx(1.0 / 3.0));
  std::array<double, 4> progress = level_histogram_with_graduated(state);
  CHECK(progress == std::array<double, 4>{0.5, 0.0, 0.0, 0.5});

  CHECK(level_histogram(CurriculumState{}) == std::array<double, 4>{0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("curriculum files round-trip records, promotions, and trainer meta") {
  testutil::TempDir dir("curriculum");
  Dataset d = make_ready_dataset(3);
  CurriculumConfig config;
  config.graduation = GraduationPolicy::Downweight;
  config.downweight_factor = 0.125;
  CurriculumState state = init_curriculum(d, config);
  record_outcomes(state, "q1", outcomes_with(5, 8), 3);
  record_outcomes(state, "q2", outcomes_with(4, 8), 3);
  record_outcomes(state, "q2", outcomes_with(7, 8), 4);

  TrainerMeta meta;
  meta.master_seed = 777;
  meta.next_step = 5;
  meta.mode = "adaptive";
  meta.batch_size = 6;
  meta.rollout_n = 8;
  meta.cumulative_rollouts = 240;

  const std::string path = dir.file("curriculum.json").string();
  save_curriculum(path, state, meta);

  TrainerMeta back_meta;
  CurriculumState back = load_curriculum(path, &back_meta);
  CHECK(back_meta.master_seed == 777);
  CHECK(back_meta.next_step == 5);
  CHECK(back_meta.mode == "adaptive");
  CHECK(back_meta.batch_size == 6);
  CHECK(back_meta.cumulative_rollouts == 240);
  CHECK(back.config.tau == state.config.tau);
  CHECK(back.config.graduation == GraduationPolicy::Downweight);
  CHECK(back.config.downweight_factor == 0.125);
  REQUIRE(back.records.size() == 3);
  CHECK(back.records[0].last_accuracy == 0.625);
  CHECK(back.records[1].level == DifficultyLevel::Cloze);
  REQUIRE(back.records[1].promotions.size() == 2);
  CHECK(back.records[1].promotions[1].step == 4);

  // A reloaded state composes the same batches: behavioral replay equality.
  std::vector<BatchEntry> a = compose_batch(state, d, 5, 12);
  std::vector<BatchEntry> b = compose_batch(back, d, 5, 12);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].problem_id == b[i].problem_id);
    CHECK(a[i].level == b[i].level);
  }
}
