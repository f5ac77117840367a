#include <gtest/gtest.h>

#include <filesystem>
#include <functional>

#include "mrid/benchmark.hpp"
#include "mrid/pipeline.hpp"
#include "support.hpp"

using mrid::ErrorKind;
using mrid::Json;
using mrid::Matrix;
using support::kind_of;

namespace {

mrid::SignalLog sample_log(int N) {
  mrid::ExperimentConfig cfg;
  cfg.plant = mrid::benchmark::plant();
  cfg.rates = {2, 3};
  cfg.N = N;
  cfg.input.seed = 4;
  cfg.noise = 0.01;
  return mrid::simulate_experiment(cfg);
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const mrid::Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(FormatDouble, RoundTripsExactly) {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 123456789.125, 0.0, 2.2250738585072014e-308}) {
    EXPECT_EQ(std::stod(mrid::io::format_double(v)), v);
  }
}

TEST(Signals, CsvRoundTripIsBitExact) {
  const auto log = sample_log(100);
  const auto back = mrid::signals_from_csv(mrid::signals_to_csv(log));
  EXPECT_EQ(back.u, log.u);
  EXPECT_EQ(back.y, log.y);
  EXPECT_TRUE((back.observed == log.observed).all());
  EXPECT_EQ(back.N(), 100);
}

TEST(Signals, HeaderLayout) {
  const auto csv = mrid::signals_to_csv(sample_log(2));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,u_1,y_1,y_2,obs_1,obs_2");
}

TEST(Signals, MissingObservationColumnsAreASchemaError) {
  const std::string csv = "k,u_1,y_1,y_2\n0,1,2,3\n";
  EXPECT_EQ(kind_of([&] { mrid::signals_from_csv(csv); }), ErrorKind::SchemaError);
}

TEST(Signals, BadNumberReportsLineAndColumn) {
  const std::string csv = "k,u_1,y_1,obs_1\n0,1,2,1\n1,0.5,abc,1\n";
  const auto msg = message_of([&] { mrid::signals_from_csv(csv, "s.csv"); });
  EXPECT_EQ(kind_of([&] { mrid::signals_from_csv(csv, "s.csv"); }), ErrorKind::ParseError);
  EXPECT_NE(msg.find("s.csv:3:3"), std::string::npos) << msg;
}

TEST(Signals, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "mrid_io_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "signals.csv").string();
  const auto log = sample_log(30);
  mrid::save_signals(path, log);
  EXPECT_EQ(mrid::load_signals(path).y, log.y);
  EXPECT_EQ(kind_of([&] { mrid::load_signals((dir / "missing.csv").string()); }), ErrorKind::ParseError);
}

TEST(Matrices, JsonRoundTrip) {
  Matrix m(2, 3);
  m << 1, -2.5, 1.0 / 3.0, 0, 1e-17, 7;
  const Json j = mrid::matrix_to_json(m);
  EXPECT_EQ(j.dump(), mrid::matrix_to_json(mrid::matrix_from_json(Json::parse(j.dump()), "m")).dump());
  EXPECT_EQ(mrid::matrix_from_json(Json::parse(j.dump()), "m"), m);
}

TEST(Matrices, RaggedRowsRejected) {
  EXPECT_EQ(kind_of([] { mrid::matrix_from_json(Json::parse("[[1,2],[3]]"), "m"); }), ErrorKind::SchemaError);
  EXPECT_EQ(kind_of([] { mrid::matrix_from_json(Json::parse("[[1,\"x\"]]"), "m"); }), ErrorKind::SchemaError);
}

TEST(Json, ParseErrorsCarryPosition) {
  const auto msg = message_of([] { mrid::io::parse_json("{\n  \"a\": ,\n}", "cfg.json"); });
  EXPECT_EQ(msg.rfind("ParseError: cfg.json:2:", 0), 0u) << msg;
}

TEST(Model, JsonRoundTrip) {
  mrid::ExperimentConfig cfg;
  cfg.plant = mrid::benchmark::plant();
  cfg.rates = {1, 3};
  cfg.N = 1200;
  const auto r = mrid::run_identification(cfg);
  const auto f = mrid::to_model_file(r);
  const auto back = mrid::model_from_json(Json::parse(mrid::model_to_json(f).dump()));
  EXPECT_EQ(back.model.A, f.model.A);
  EXPECT_EQ(back.model.B, f.model.B);
  EXPECT_EQ(back.model.C, f.model.C);
  EXPECT_EQ(back.model.D, f.model.D);
  ASSERT_TRUE(back.T.has_value());
  EXPECT_EQ(*back.T, *f.T);
  EXPECT_EQ(back.rates, f.rates);
  EXPECT_EQ(back.convention, f.convention);
  EXPECT_EQ(back.N, 1200);
  EXPECT_EQ(back.model.M, 3);
  EXPECT_EQ(mrid::model_to_json(back).dump(), mrid::model_to_json(f).dump());
}

TEST(Model, SizesMustMatchRates) {
  mrid::ModelFile f;
  f.rates = {1, 3};
  f.offsets = {0, 0};
  f.model.n = 3;
  f.model.m = 1;
  f.model.l = 2;
  f.model.M = 3;
  f.model.A = Matrix::Zero(9, 9);
  f.model.B = Matrix::Zero(9, 3);
  f.model.C = Matrix::Zero(6, 9);
  f.model.D = Matrix::Zero(6, 3);
  Json j = mrid::model_to_json(f);
  EXPECT_NO_THROW(mrid::model_from_json(j));
  j["rates"] = {2, 3};
  j.erase("M");
  EXPECT_EQ(kind_of([&] { mrid::model_from_json(j); }), ErrorKind::SchemaError);
  j = mrid::model_to_json(f);
  j["format"] = "other";
  EXPECT_EQ(kind_of([&] { mrid::model_from_json(j); }), ErrorKind::SchemaError);
}

TEST(Config, RoundTripAndMissingFieldNamed) {
  const auto cfg = mrid::load_config(MRID_CONFIG_DIR "/two_three.json");
  EXPECT_EQ(cfg.rates, (std::vector<int>{2, 3}));
  EXPECT_EQ(cfg.input.seed, 20240u);
  EXPECT_EQ(cfg.plant.A, mrid::benchmark::plant().A);
  const Json j = mrid::config_to_json(cfg);
  EXPECT_EQ(mrid::config_to_json(mrid::config_from_json(j)).dump(), j.dump());

  Json missing = j;
  missing.erase("plant");
  const auto msg = message_of([&] { mrid::config_from_json(missing); });
  EXPECT_NE(msg.find("missing field 'plant'"), std::string::npos) << msg;

  Json bad_plant = j;
  bad_plant["plant"]["B"] = Json::parse("[[1],[0]]");
  EXPECT_EQ(kind_of([&] { mrid::config_from_json(bad_plant); }), ErrorKind::SchemaError);

  Json bad_rates = j;
  bad_rates["rates"] = {2};
  EXPECT_EQ(kind_of([&] { mrid::config_from_json(bad_rates); }), ErrorKind::SchemaError);
}

TEST(Config, ConventionNames) {
  EXPECT_EQ(mrid::convention_choice_from_string("general"), mrid::ConventionChoice::General);
  EXPECT_EQ(kind_of([] { mrid::convention_choice_from_string("best"); }), ErrorKind::SchemaError);
}
