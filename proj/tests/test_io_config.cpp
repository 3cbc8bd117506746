#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "metacoop/config.hpp"
#include "metacoop/io.hpp"
#include "metacoop/version.hpp"

using namespace metacoop;

TEST_CASE("config: kv text parsing handles comments, blanks, and errors") {
  auto kv = parse_kv_text("# header\n\n game = dsl \narch=ar_rnn\n# trailing\n");
  CHECK(kv.size() == 2);
  CHECK(kv.at("game") == "dsl");
  CHECK(kv.at("arch") == "ar_rnn");

  CHECK_THROWS_AS(parse_kv_text("game = lc\ngame = dsl\n"), ContractError);
  CHECK_THROWS_AS(parse_kv_text("no equals sign here\n"), ContractError);
}

TEST_CASE("config: unknown keys are reported together") {
  auto kv = parse_kv_text("game = lc\nbanana = 3\napple = 4\n");
  try {
    config_from_kv(kv);
    FAIL("expected an error");
  } catch (const ContractError& e) {
    std::string msg = e.what();
    CHECK(msg.find("apple") != std::string::npos);
    CHECK(msg.find("banana") != std::string::npos);
  }
}

TEST_CASE("config: malformed values name the key") {
  auto kv = parse_kv_text("budget = not_a_number\n");
  try {
    config_from_kv(kv);
    FAIL("expected an error");
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("budget") != std::string::npos);
  }
}

TEST_CASE("config: serialization round-trips losslessly") {
  ExperimentConfig cfg;
  cfg.experiment = "roundtrip";
  cfg.method = "il";
  cfg.game = GameId::DSL;
  cfg.arch = ArchVariant::R_RNN;
  cfg.budget = 123456;
  cfg.gamma = 0.991234567890123;
  cfg.lr = 2.5e-4;
  cfg.seeds = {4, 7};
  cfg.sweep_ks = {15, 30};
  cfg.switch_schedule = {50, 200, 50};
  cfg.quantity_k = 30;
  cfg.out = "/tmp/somewhere";

  const std::string text = config_to_kv(cfg);
  ExperimentConfig back = config_from_kv(parse_kv_text(text));
  CHECK(back.experiment == cfg.experiment);
  CHECK(back.method == cfg.method);
  CHECK(back.game == cfg.game);
  CHECK(back.arch == cfg.arch);
  CHECK(back.budget == cfg.budget);
  CHECK(back.gamma == cfg.gamma);  // exact through %.17g
  CHECK(back.lr == cfg.lr);
  CHECK(back.seeds == cfg.seeds);
  CHECK(back.sweep_ks == cfg.sweep_ks);
  CHECK(back.switch_schedule == cfg.switch_schedule);
  CHECK(back.quantity_k == cfg.quantity_k);
  CHECK(back.out == cfg.out);
  CHECK(back.code_version == kCodeVersion);
  // a second serialization is byte-identical
  CHECK(config_to_kv(back) == text);
}

TEST_CASE("config: validation guards the enum-ish fields") {
  CHECK_THROWS_AS(config_from_kv(parse_kv_text("method = sarsa\n")), ContractError);
  CHECK_THROWS_AS(config_from_kv(parse_kv_text("split_kind = quantity\n")), ContractError);
  CHECK_THROWS_AS(config_from_kv(parse_kv_text("game = checkers\n")), ContractError);
  CHECK_THROWS_AS(config_from_kv(parse_kv_text("seeds = \n")), ContractError);
}

TEST_CASE("config: split construction follows kind and quantity") {
  ExperimentConfig cfg;
  cfg.game = GameId::LC;
  cfg.split_seed = 7;

  auto random_split = make_split(cfg);
  CHECK(random_split.kind == SplitKind::Random);
  CHECK(random_split.train.size() == 60);

  cfg.quantity_k = 15;
  auto quantity = make_split(cfg);
  CHECK(quantity.kind == SplitKind::Quantity);
  CHECK(quantity.train.size() == 15);
  CHECK(quantity.test == random_split.test);

  cfg.quantity_k = 0;
  cfg.split_kind = "skewed";
  auto skewed = make_split(cfg);
  CHECK(skewed.kind == SplitKind::Skewed);
  CHECK(skewed.train.size() == 60);

  cfg.game = GameId::DSL;
  auto skewed_dsl = make_split(cfg);
  CHECK(skewed_dsl.train.front() == 0);
  CHECK(skewed_dsl.test.back() == 119);
}

TEST_CASE("config: per-seed train config inherits every hyperparameter") {
  ExperimentConfig cfg;
  cfg.game = GameId::DSL;
  cfg.arch = ArchVariant::A_RNN;
  cfg.budget = 50000;
  cfg.lr = 1e-3;
  cfg.epochs = 2;
  TrainConfig tc = to_train_config(cfg, 3);
  CHECK(tc.game == GameId::DSL);
  CHECK(tc.arch == ArchVariant::A_RNN);
  CHECK(tc.total_timesteps == 50000);
  CHECK(tc.lr == 1e-3);
  CHECK(tc.epochs == 2);
  CHECK(tc.seed == 3);
  CHECK(tc.split.game_id == GameId::DSL);
  CHECK_NOTHROW(tc.validate());
}

TEST_CASE("config: default switch schedules per game") {
  auto lc = default_switch_schedule(GameId::LC);
  CHECK(lc.durations == std::vector<int>(10, 50));
  CHECK(lc.total() == 500);
  auto dsl = default_switch_schedule(GameId::DSL);
  CHECK(dsl.durations == std::vector<int>{50, 200, 50, 200});
}

TEST_CASE("io: fixed-decimal formatting is stable") {
  CHECK(io::fmt(1.0, 2) == "1.00");
  CHECK(io::fmt(0.125, 2) == "0.12");  // round-half-even via printf
  CHECK(io::fmt(-3.14159, 3) == "-3.142");
  CHECK(io::fmt(10.0, 0) == "10");
}

TEST_CASE("io: training curve csv layout") {
  std::vector<CurveRow> rows = {{3200, 12.5, -0.001, 4.25, 0.9},
                                {6400, 14.0, 0.002, 3.5, 0.85}};
  std::string csv = io::training_curve_csv(rows);
  auto first_nl = csv.find('\n');
  CHECK(csv.substr(0, first_nl) == "env_timesteps,mean_return,policy_loss,value_loss,entropy");
  CHECK(csv.find("3200,12.500000,-0.001000,4.250000,0.900000\n") != std::string::npos);
  CHECK(csv.find("6400,14.000000,0.002000,3.500000,0.850000\n") != std::string::npos);
}

TEST_CASE("io: chance curve csv layout") {
  std::string csv = io::chance_curve_csv({0.25, 0.5});
  CHECK(csv == "t,chance\n0,0.250000\n1,0.500000\n");
}

TEST_CASE("io: matrix csv uses labels and two decimals") {
  CrossPlayMatrix m;
  m.row_labels = {"seed_0", "seed_1"};
  m.col_labels = {"seed_0", "seed_1"};
  m.cells = {{42.125, 10.0}, {9.5, 41.0}};
  std::string csv = io::matrix_csv(m);
  CHECK(csv == ",seed_0,seed_1\nseed_0,42.12,10.00\nseed_1,9.50,41.00\n");
}

TEST_CASE("io: report and summary json shapes") {
  EvalReport report;
  report.mean_score = 33.5;
  report.episodes = 100;
  report.curve = {0.5, 0.7};
  report.per_partner = {{3, 31.0}, {7, 36.0}};
  report.seeds = {0, 1};
  auto j = io::report_json(report);
  CHECK(j["mean_score"] == 33.5);
  CHECK(j["episodes"] == 100);
  CHECK(j["per_partner"].size() == 2);
  CHECK(j["per_partner"][0]["partner_id"] == 3);
  CHECK(j["per_partner"][1]["mean"] == 36.0);
  CHECK(j["seeds"].size() == 2);

  CrossPlayMatrix m;
  m.row_labels = {"a", "b"};
  m.col_labels = {"a", "b"};
  m.cells = {{40.0, 10.0}, {12.0, 38.0}};
  auto mj = io::matrix_summary_json("crossplay_test", m);
  CHECK(mj["experiment"] == "crossplay_test");
  CHECK(mj["rows"].size() == 2);
  CHECK(mj["matrix"].size() == 2);
  REQUIRE(mj.contains("cells"));
  bool has_seen = false, has_cross = false, has_grid = false;
  for (const auto& cell : mj["cells"]) {
    std::string label = cell["label"];
    has_seen = has_seen || label == "seen";
    has_cross = has_cross || label == "crossplay";
    has_grid = has_grid || label == "grid";
    CHECK(cell.contains("mean"));
    CHECK(cell.contains("std"));
  }
  CHECK(has_seen);
  CHECK(has_cross);
  CHECK(has_grid);

  std::vector<SweepCell> cells(2);
  cells[0].label = "k15";
  cells[0].mean = 20.0;
  cells[0].stddev = 1.0;
  cells[0].seeds = {0, 1, 2};
  cells[0].per_seed = {19.0, 20.0, 21.0};
  cells[1].label = "k30";
  cells[1].mean = 25.0;
  auto sj = io::sweep_summary_json("sweep_test", cells);
  CHECK(sj["experiment"] == "sweep_test");
  REQUIRE(sj["cells"].size() == 2);
  CHECK(sj["cells"][0]["label"] == "k15");
  CHECK(sj["cells"][0]["mean"] == 20.0);
  CHECK(sj["cells"][0]["std"] == 1.0);
  CHECK(sj["cells"][0]["seeds"].size() == 3);
}

TEST_CASE("io: atomic writes land complete and leave no temp file") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "metacoop_io_test";
  fs::remove_all(dir);
  io::ensure_dir(dir.string());
  const std::string path = (dir / "artifact.txt").string();
  io::write_file_atomic(path, "line one\nline two\n");
  CHECK(io::file_exists(path));
  CHECK(io::read_file(path) == "line one\nline two\n");
  CHECK(!io::file_exists(path + ".tmp"));
  // overwrite in place
  io::write_file_atomic(path, "replaced");
  CHECK(io::read_file(path) == "replaced");
  CHECK_THROWS_AS(io::read_file((dir / "missing.txt").string()), ContractError);
  fs::remove_all(dir);
}

TEST_CASE("io: svg renderers emit self-contained documents") {
  CrossPlayMatrix m;
  m.row_labels = {"a", "b"};
  m.col_labels = {"a", "b"};
  m.cells = {{40.0, 10.0}, {12.0, 38.0}};
  std::string heat = io::svg_heatmap(m, 50.0);
  CHECK(heat.find("<svg") != std::string::npos);
  CHECK(heat.find("</svg>") != std::string::npos);
  CHECK(heat.find("40.0") != std::string::npos);

  std::string curves = io::svg_curves({{"x_axis_series", {0.1, 0.4, 0.8}}}, "t", "chance", 1.0);
  CHECK(curves.find("<svg") != std::string::npos);
  CHECK(curves.find("x_axis_series") != std::string::npos);
  CHECK(curves.find("polyline") != std::string::npos);
}
