#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qdcavity/config.hpp"
#include "qdcavity/csv.hpp"
#include "qdcavity/error.hpp"
#include "qdcavity/recipes.hpp"

namespace {

using namespace qdc;

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "random seed (overrides the config)");
  sub->add_option("--threads", c.threads, "worker threads (default: QDC_THREADS or config)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "output CSV (default: <output_dir>/<command>.csv)");
}

config::RunConfig resolve(const Common& c) {
  config::RunConfig cfg = c.config_path.empty() ? config::parse("{}") : config::load(c.config_path);
  if (c.seed) cfg.seed = c.seed;
  if (c.threads) {
    cfg.trajectories.threads = *c.threads;
  } else if (std::getenv("QDC_THREADS")) {
    cfg.trajectories.threads = config::default_threads();
  }
  cfg.validate();
  return cfg;
}

std::string sibling(const std::string& path, const std::string& suffix) {
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + "_" + suffix + p.extension().string())).string();
}

void emit(csv::Table t, const std::string& path, const std::string& command,
          const nlohmann::json& options, const config::RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> head = {
      {"tool", recipes::kToolVersion},
      {"command", command},
      {"options", options.dump()},
      {"config_hash", config::fnv1a_hex(config::canonical_json(cfg) + options.dump())},
      {"seed", cfg.seed ? std::to_string(*cfg.seed) : "none"},
  };
  t.metadata.insert(t.metadata.begin(), head.begin(), head.end());
  csv::write_atomic(path, t.to_string());
}

template <class F>
int guarded(F&& body) {
  try {
    body();
    return 0;
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-dot cavity QED simulation and analysis"};
  app.require_subcommand(1);

  Common common;

  auto* spec = app.add_subcommand("spectrum", "emission spectrum after the spectrometer");
  add_common(spec, common);
  std::optional<double> detuning;
  std::string spec_mode = "analytic";
  spec->add_option("--detuning-nm", detuning, "exciton minus cavity wavelength (nm)");
  spec->add_option("--mode", spec_mode)->check(CLI::IsMember({"analytic", "master", "diffused"}));

  auto* anti = app.add_subcommand("anticross", "polariton peak tracks over a detuning sweep");
  auto* life = app.add_subcommand("lifetime", "simulated decay fits over a detuning sweep");
  recipes::Sweep sweep;
  std::string anti_mode = "analytic";
  for (auto* s : {anti, life}) {
    add_common(s, common);
    s->add_option("--dl-start", sweep.start_nm)->required();
    s->add_option("--dl-end", sweep.end_nm)->required();
    s->add_option("--steps", sweep.steps)->required();
  }
  anti->add_option("--mode", anti_mode)->check(CLI::IsMember({"analytic", "master"}));

  auto* g2 = app.add_subcommand("g2", "intensity correlations");
  add_common(g2, common);
  std::string kind = "auto", method = "regression";
  bool pulsed = false;
  g2->add_option("--kind", kind)->check(CLI::IsMember({"auto", "cross"}));
  g2->add_option("--method", method)->check(CLI::IsMember({"regression", "trajectories"}));
  g2->add_flag("--pulsed", pulsed, "pulsed capture excitation");
  g2->add_option("--detuning-nm", detuning, "exciton minus cavity wavelength (nm)");

  auto* fitc = app.add_subcommand("fit", "fit a model to tabulated data");
  add_common(fitc, common);
  std::string model, data_path;
  recipes::FitRequest freq;
  fitc->add_option("--model", model)->required()->check(
      CLI::IsMember({"lorentz", "anticross", "lifetime", "decay"}));
  fitc->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  fitc->add_option("--peaks", freq.n_peaks, "Lorentzian count (1-3)")->check(CLI::Range(1, 3));
  fitc->add_flag("--dispersive", freq.dispersive, "add antisymmetric Lorentzian terms");
  fitc->add_flag("--bi", freq.bi_exponential, "bi-exponential decay");
  fitc->add_option("--period-ns", freq.period_ns, "repetition period of folded decay histograms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  return guarded([&] {
    const config::RunConfig cfg = resolve(common);
    auto out_path = [&](const std::string& command) {
      return common.out.empty() ? (std::filesystem::path(cfg.output_dir) / (command + ".csv")).string()
                                : common.out;
    };
    const double dl = detuning.value_or(cfg.system.lambda_x_nm - cfg.system.lambda_m_nm);
    static const std::map<std::string, recipes::SpectrumMode> modes = {
        {"analytic", recipes::SpectrumMode::analytic},
        {"master", recipes::SpectrumMode::master},
        {"diffused", recipes::SpectrumMode::diffused}};

    if (spec->parsed()) {
      const nlohmann::json o = {{"detuning_nm", dl}, {"mode", spec_mode}};
      emit(recipes::spectrum_table(cfg, dl, modes.at(spec_mode)), out_path("spectrum"), "spectrum", o, cfg);
    } else if (anti->parsed()) {
      const nlohmann::json o = {{"dl_start_nm", sweep.start_nm}, {"dl_end_nm", sweep.end_nm},
                                {"steps", sweep.steps}, {"mode", anti_mode}};
      emit(recipes::anticross_table(cfg, sweep, modes.at(anti_mode)), out_path("anticross"), "anticross", o,
           cfg);
    } else if (life->parsed()) {
      if (!cfg.seed) throw config::ConfigError("lifetime simulations need a seed (--seed or config)");
      const nlohmann::json o = {{"dl_start_nm", sweep.start_nm}, {"dl_end_nm", sweep.end_nm},
                                {"steps", sweep.steps}};
      emit(recipes::lifetime_table(cfg, sweep, *cfg.seed), out_path("lifetime"), "lifetime", o, cfg);
    } else if (g2->parsed()) {
      recipes::G2Request r;
      r.kind = kind == "auto" ? recipes::G2Kind::autocorrelation : recipes::G2Kind::cross;
      r.method = method == "regression" ? recipes::G2Method::regression : recipes::G2Method::trajectories;
      r.pulsed = pulsed;
      r.dl_nm = dl;
      if (r.method == recipes::G2Method::trajectories && !cfg.seed) {
        throw config::ConfigError("trajectory runs need a seed (--seed or config)");
      }
      if (r.method == recipes::G2Method::regression && pulsed) {
        throw config::ConfigError("pulsed correlations need --method trajectories");
      }
      const nlohmann::json o = {{"kind", kind}, {"method", method}, {"pulsed", pulsed}, {"detuning_nm", dl}};
      auto res = recipes::g2_tables(cfg, r, cfg.seed);
      const std::string path = out_path("g2");
      emit(std::move(res.g2), path, "g2", o, cfg);
      if (res.clicks) emit(std::move(*res.clicks), sibling(path, "clicks"), "g2", o, cfg);
      if (res.histogram) emit(std::move(*res.histogram), sibling(path, "histogram"), "g2", o, cfg);
      if (res.peaks) emit(std::move(*res.peaks), sibling(path, "peaks"), "g2", o, cfg);
    } else if (fitc->parsed()) {
      static const std::map<std::string, recipes::FitModel> models = {
          {"lorentz", recipes::FitModel::lorentz},
          {"anticross", recipes::FitModel::anticross},
          {"lifetime", recipes::FitModel::lifetime},
          {"decay", recipes::FitModel::decay}};
      freq.model = models.at(model);
      const auto data = csv::read_numeric(data_path);
      const nlohmann::json o = {{"model", model}, {"peaks", freq.n_peaks}, {"dispersive", freq.dispersive},
                                {"bi", freq.bi_exponential}, {"period_ns", freq.period_ns},
                                {"data_hash", config::fnv1a_hex(nlohmann::json(data.rows).dump())}};
      emit(recipes::fit_table(cfg, freq, data), out_path("fit"), "fit", o, cfg);
    }
  });
}
