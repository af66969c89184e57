#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "gen.hpp"
#include "qdcavity/config.hpp"
#include "qdcavity/csv.hpp"
#include "qdcavity/fitkit.hpp"
#include "qdcavity/recipes.hpp"

using namespace qdc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "qdc_io_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(csv::format_number(0.1) == "0.1");
  CHECK(csv::format_number(1.0 / 3.0) == "0.333333333");
  CHECK(csv::format_number(NAN) == "nan");
  CHECK(csv::format_number(-INFINITY) == "-inf");
  CHECK(csv::format_number(942.5) == "942.5");
}

TEST_CASE("tables round trip through files") {
  csv::Table t;
  t.add_meta("mode", "analytic");
  t.header = {"x", "y"};
  t.add_row(std::vector<double>{1.0, 2.5});
  t.add_row(std::vector<double>{3.0, NAN});
  CHECK_THROWS_AS(t.add_row(std::vector<double>{1.0}), std::invalid_argument);
  const auto path = scratch("nested/dir/t.csv");
  fs::remove_all(path.parent_path());
  csv::write_atomic(path.string(), t.to_string());
  CHECK_FALSE(fs::exists(path.string() + ".tmp"));
  CHECK(slurp(path) == "# mode: analytic\nx,y\n1,2.5\n3,nan\n");
  const auto back = csv::read_numeric(path.string());
  REQUIRE(back.metadata.size() == 1);
  CHECK(back.metadata[0].second == "analytic");
  CHECK(back.column("y") == 1);
  CHECK(back.column("z") == -1);
  CHECK(back.values(0) == std::vector<double>{1.0, 3.0});
  CHECK(std::isnan(back.rows[1][1]));
  std::ofstream(scratch("ragged.csv")) << "a,b\n1,2\n3\n";
  CHECK_THROWS_AS(csv::read_numeric(scratch("ragged.csv").string()), std::invalid_argument);
  CHECK_THROWS_AS(csv::read_numeric(scratch("missing.csv").string()), std::runtime_error);
}

TEST_CASE("property: formatted numbers read back to nine digits") {
  Gen g(13);
  for (int k = 0; k < 2000; ++k) {
    const double v = (g.coin() ? 1 : -1) * g.log_uniform(1e-12, 1e12);
    const double back = std::stod(csv::format_number(v));
    CHECK(std::abs(back - v) <= 5e-9 * std::abs(v));
  }
}

TEST_CASE("configuration parsing") {
  const auto cfg = config::parse(R"({"system": {"g_GHz": 20.7, "n_max": 3},
                                     "pulses": {"rep_rate_MHz": 80},
                                     "correlation": {"estimator": "start_stop"},
                                     "seed": 5, "output_dir": "o"})");
  CHECK(cfg.system.g_GHz == 20.7);
  CHECK(cfg.system.n_max == 3);
  CHECK(cfg.system.gamma_m_GHz == 24.1);
  CHECK(cfg.pulses.rep_rate_MHz == 80.0);
  CHECK(cfg.correlation.estimator == hbt::Estimator::start_stop);
  CHECK(cfg.seed == 5u);
  CHECK(cfg.output_dir == "o");
  CHECK_THROWS_AS(config::parse(R"({"system": {"gee": 1}})"), config::ConfigError);
  CHECK_THROWS_AS(config::parse(R"({"bogus": 1})"), config::ConfigError);
  CHECK_THROWS_AS(config::parse(R"({"system": {"g_GHz": "big"}})"), config::ConfigError);
  CHECK_THROWS_AS(config::parse("{"), config::ConfigError);
  CHECK_THROWS_AS(config::parse(R"({"system": {"gamma_m_GHz": -1}})"), config::ConfigError);
  CHECK_THROWS_AS(config::parse(R"({"correlation": {"estimator": "nearest"}})"), config::ConfigError);
  CHECK_THROWS_AS(config::load(scratch("absent.json").string()), config::ConfigError);
}

TEST_CASE("canonical form and hash") {
  const auto a = config::parse(R"({"system": {"g_GHz": 20.7}, "output_dir": "x"})");
  const auto b = config::parse(R"({"output_dir": "y", "system": {"g_GHz": 20.7}})");
  const auto c = config::parse(R"({"system": {"g_GHz": 20.8}})");
  CHECK(config::canonical_json(a) == config::canonical_json(b));
  CHECK(config::canonical_json(a) != config::canonical_json(c));
  CHECK(config::canonical_json(config::parse(config::canonical_json(c))) == config::canonical_json(c));
  // Published FNV-1a test vectors.
  CHECK(config::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(config::fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(config::fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("thread count from the environment") {
  ::setenv("QDC_THREADS", "3", 1);
  CHECK(config::default_threads() == 3);
  ::setenv("QDC_THREADS", "zero", 1);
  CHECK_THROWS_AS(config::default_threads(), config::ConfigError);
  ::unsetenv("QDC_THREADS");
  CHECK(config::default_threads() == 1);
}

TEST_CASE("spectrum recipe") {
  config::RunConfig cfg;
  const auto s = recipes::measured_spectrum(cfg, 0.0, recipes::SpectrumMode::analytic);
  CHECK(s.axis == Axis::wavelength_nm);
  const auto pk = find_peaks(s, 0.5);
  REQUIRE(pk.size() == 2);
  const auto [lp, lm] = fit::branch_wavelengths(0.0, cfg.system.g_GHz, cfg.system.lambda_m_nm, cfg.system.gamma_x_GHz,
                                                cfg.system.gamma_m_GHz);
  // Resolution broadening merges the flanks and pulls the maxima inwards slightly.
  CHECK(std::abs(pk[0].position - lp) < 0.01);
  CHECK(std::abs(pk[1].position - lm) < 0.01);
  const auto t = recipes::spectrum_table(cfg, 0.0, recipes::SpectrumMode::analytic);
  CHECK(t.header == std::vector<std::string>{"wavelength_nm", "intensity"});
  CHECK(t.rows.size() == s.x.size());
}

TEST_CASE("sweeps") {
  recipes::Sweep s{0.0, 1.0, 5};
  CHECK(s.points() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  recipes::Sweep bad{0.0, 0.0, 5};
  CHECK_THROWS_AS(bad.points(), std::invalid_argument);
  recipes::Sweep one{0.0, 1.0, 1};
  CHECK_THROWS_AS(one.points(), std::invalid_argument);
}

TEST_CASE("anti-crossing recipe tracks the model") {
  config::RunConfig cfg;
  const auto t = recipes::anticross_table(cfg, {-0.3, 0.3, 4}, recipes::SpectrumMode::analytic);
  REQUIRE(t.rows.size() == 4);
  for (const auto& r : t.rows) {
    CHECK(std::abs(std::stod(r[1]) - std::stod(r[4])) < 2e-3);
    CHECK(std::abs(std::stod(r[2]) - std::stod(r[5])) < 2e-3);
  }
  CHECK_THROWS(recipes::anticross_table(cfg, {-0.3, 0.3, 4}, recipes::SpectrumMode::diffused));
}

TEST_CASE("uncorrelated admixture") {
  trajectories::ClickStream in;
  const double period = 25.0;
  const std::int64_t n = 20000;
  for (std::int64_t k = 0; k < n; ++k) {
    if (k % 2 == 0) in.push_back({hilbert::ChannelLabel::cavity_loss, k * period + 0.3});
  }
  const auto same = recipes::admix_uncorrelated(in, hilbert::ChannelLabel::cavity_loss, period, n, 0.0, 100, 0.1, 1);
  CHECK(same.size() == in.size());
  CHECK_THROWS_AS(recipes::admix_uncorrelated(in, hilbert::ChannelLabel::cavity_loss, period, n, 1.0, 100, 0.1, 1),
                  std::invalid_argument);
  const auto all = recipes::admix_uncorrelated(in, hilbert::ChannelLabel::cavity_loss, period, n, 0.9, 100, 0.1, 1);
  // Switched pulses carry Poisson(0.5) clicks, so the count stays near n / 2 and some pulses carry two.
  CHECK(std::abs(static_cast<double>(all.size()) - 10000.0) < 5 * std::sqrt(10000.0));
  int doubles = 0;
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK(all[i].time_ns >= all[i - 1].time_ns);
    if (std::floor(all[i].time_ns / period) == std::floor(all[i - 1].time_ns / period)) ++doubles;
  }
  CHECK(doubles > 400);
}

TEST_CASE("arrival histogram bins divide the period") {
  trajectories::ClickStream c = {{hilbert::ChannelLabel::cavity_loss, 0.1},
                                 {hilbert::ChannelLabel::exciton_radiative, 25.2}};
  const auto h = recipes::arrival_histogram(c, 25.0, 0.07);
  CHECK(h.bin_edges_ns.back() == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(h.total() == 2);
  const double w = h.width(0);
  CHECK(std::abs(25.0 / w - std::round(25.0 / w)) < 1e-9);
}

TEST_CASE("fit recipe on a written spectrum") {
  csv::Table t;
  t.header = {"wavelength_nm", "intensity"};
  for (double x : linspace(942.0, 943.0, 801)) {
    t.add_row(std::vector<double>{x, fit::lorentzian(x, 942.4, 0.05, 1.0) + fit::lorentzian(x, 942.6, 0.08, 2.0)});
  }
  const auto path = scratch("two.csv");
  csv::write_atomic(path.string(), t.to_string());
  config::RunConfig cfg;
  recipes::FitRequest req;
  req.n_peaks = 2;
  const auto out = recipes::fit_table(cfg, req, csv::read_numeric(path.string()));
  CHECK(out.header == std::vector<std::string>{"parameter", "value", "stderr"});
  bool found = false;
  for (const auto& r : out.rows) {
    if (r[0] == "center_0") {
      found = true;
      CHECK(std::stod(r[1]) == doctest::Approx(942.4).epsilon(1e-7));
    }
  }
  CHECK(found);
  csv::NumericTable wrong;
  wrong.header = {"a"};
  wrong.rows = {{1.0}};
  req.model = recipes::FitModel::lifetime;
  CHECK_THROWS(recipes::fit_table(cfg, req, wrong));
}

TEST_CASE("regression g2 recipe") {
  config::RunConfig cfg;
  recipes::G2Request req;
  req.dl_nm = 4.1;
  const auto out = recipes::g2_tables(cfg, req, std::nullopt);
  REQUIRE(!out.g2.rows.empty());
  double at0 = NAN;
  for (const auto& r : out.g2.rows) {
    if (std::abs(std::stod(r[0])) < 1e-12) at0 = std::stod(r[1]);
  }
  CHECK(at0 < 0.05);
  req.pulsed = true;
  CHECK_THROWS(recipes::g2_tables(cfg, req, std::nullopt));
  req.pulsed = false;
  req.method = recipes::G2Method::trajectories;
  CHECK_THROWS(recipes::g2_tables(cfg, req, std::nullopt));
}
