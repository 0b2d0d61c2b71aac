// treeval command-line front end.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "treeval/bench.hpp"
#include "treeval/config.hpp"
#include "treeval/error.hpp"
#include "treeval/flat.hpp"
#include "treeval/io.hpp"
#include "treeval/parallel.hpp"
#include "treeval/risk.hpp"
#include "treeval/valuation.hpp"

namespace fs = std::filesystem;
using namespace treeval;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scale;
  std::optional<std::size_t> threads;
  std::optional<std::string> out;
};

RunConfig resolve(const Globals& g) {
  Overrides ov;
  if (g.seed) ov.seed = *g.seed;
  if (g.scale) ov.scale = parse_scale(*g.scale);
  if (g.threads) ov.threads = *g.threads;
  if (g.out) ov.out = fs::path(*g.out);
  RunConfig cfg = g.config.empty() ? build_config(IniDocument{"<defaults>", {}}, ov)
                                   : load_config(g.config, ov);
  set_thread_count(cfg.threads);
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec || !fs::is_directory(cfg.out))
    throw Error(ErrorKind::Io, "cannot create output directory " + cfg.out.string());
  write_file(cfg.out / "config.snapshot", render_snapshot(cfg));
  return cfg;
}

std::string config_hash(const RunConfig& cfg) { return hex64(fnv1a64(render_snapshot(cfg.plan))); }

fs::path upstream(const RunConfig& cfg, const char* name, const char* producer) {
  const fs::path p = cfg.out / name;
  if (!fs::exists(p))
    throw Error(ErrorKind::Io, "missing upstream artifact " + p.string() + " (run '" +
                                   producer + "' first)");
  return p;
}

void write_sample(const fs::path& path, const DriverSample& x, const std::vector<double>& y) {
  std::ostringstream os;
  os << "path";
  for (std::size_t s = 0; s < x.periods(); ++s)
    for (std::size_t j = 0; j < x.components(); ++j) os << ",x_" << s + 1 << '_' << j + 1;
  os << ",payoff\n";
  for (std::size_t i = 0; i < x.n(); ++i) {
    os << i;
    for (double v : x.path(i)) os << ',' << format_double(v);
    os << ',' << format_double(y[i]) << '\n';
  }
  write_file(path, os.str());
}

std::pair<DriverSample, std::vector<double>> read_sample(const fs::path& path,
                                                         const ExperimentPlan& plan) {
  const CsvTable t = read_csv(path);
  const std::size_t d = plan.problem.components();
  const std::size_t T = plan.problem.periods();
  if (t.header.size() != d * T + 2)
    throw Error(ErrorKind::Dimension, path.string() + ": sample shape does not match the "
                                                      "configured problem (d*T = " +
                                          std::to_string(d * T) + ")");
  DriverSample x;
  x.values = Tensor3(t.rows.size(), T, d);
  x.seed = plan.seed;
  std::vector<double> y(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t c = 0; c < d * T; ++c) x.values.data[i * d * T + c] = std::stod(t.rows[i][c + 1]);
    y[i] = std::stod(t.rows[i][d * T + 1]);
  }
  return {std::move(x), std::move(y)};
}

void cmd_simulate(const RunConfig& cfg) {
  const Datasets ds = make_datasets(cfg.plan);
  write_sample(cfg.out / "sample_train.csv", ds.train, ds.y_train);
  write_sample(cfg.out / "sample_valid.csv", ds.valid, ds.y_valid);
  write_sample(cfg.out / "sample_test.csv", ds.test, ds.y_test);
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["rng"] = CounterRng::kAlgorithm;
  j["streams"] = {{"train", static_cast<int>(Stream::Train)},
                  {"valid", static_cast<int>(Stream::Valid)},
                  {"test", static_cast<int>(Stream::Test)}};
  j["d"] = cfg.plan.problem.components();
  j["T"] = cfg.plan.problem.periods();
  j["rows"] = {{"train", ds.train.n()}, {"valid", ds.valid.n()}, {"test", ds.test.n()}};
  j["measure"] = cfg.plan.driver_measure().describe();
  j["config_hash"] = config_hash(cfg);
  write_file(cfg.out / "sample.json", j.dump(2) + "\n");
  std::cout << "simulate: wrote " << ds.train.n() << "/" << ds.valid.n() << "/" << ds.test.n()
            << " paths to " << cfg.out.string() << "\n";
}

void cmd_train(const RunConfig& cfg) {
  auto [train, ytr] = read_sample(upstream(cfg, "sample_train.csv", "simulate"), cfg.plan);
  auto [valid, yva] = read_sample(upstream(cfg, "sample_valid.csv", "simulate"), cfg.plan);
  Datasets ds;
  ds.train = std::move(train);
  ds.valid = std::move(valid);
  ds.y_train = std::move(ytr);
  ds.y_valid = std::move(yva);
  const GridResult g = run_validation_grid(cfg.plan, ds);
  const FlatEnsemble fe =
      flatten(g.model, cfg.plan.problem.components(), cfg.plan.problem.periods());
  save_flat(cfg.out / "model.flat", fe);
  std::ostringstream os;
  os << "params,validation_l2_pct,cells,selected\n";
  for (std::size_t k = 0; k < g.rows.size(); ++k)
    os << g.rows[k].params << ',' << format_double(g.rows[k].error_pct) << ','
       << g.rows[k].cells << ',' << (k == g.best ? 1 : 0) << '\n';
  write_file(cfg.out / "grid.csv", os.str());
  nlohmann::ordered_json j;
  j["model"] = g.rows[g.best].params;
  j["cells"] = fe.size();
  j["validation_l2_pct"] = g.rows[g.best].error_pct;
  j["seed"] = cfg.seed;
  j["config_hash"] = config_hash(cfg);
  write_file(cfg.out / "model.json", j.dump(2) + "\n");
  std::cout << "train: selected " << g.rows[g.best].params << " (" << fe.size()
            << " cells, validation error " << g.rows[g.best].error_pct << "%)\n";
}

std::vector<std::size_t> parse_dates(const std::vector<std::string>& items, std::size_t T) {
  std::vector<std::size_t> out;
  for (const auto& s : items) {
    std::size_t t = 0;
    if (s == "T") {
      t = T;
    } else {
      try {
        std::size_t used = 0;
        t = std::stoul(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        throw Error(ErrorKind::Config, "--t: invalid date '" + s + "'");
      }
    }
    if (t > T) throw Error(ErrorKind::Config, "--t: date " + s + " exceeds T=" + std::to_string(T));
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

void cmd_value(const RunConfig& cfg, const std::vector<std::string>& dates_arg) {
  const FlatEnsemble fe = load_flat(upstream(cfg, "model.flat", "train"));
  auto [test, y] = read_sample(upstream(cfg, "sample_test.csv", "simulate"), cfg.plan);
  (void)y;
  const std::vector<std::size_t> dates =
      dates_arg.empty() ? cfg.plan.resolved_dates() : parse_dates(dates_arg, fe.periods());
  std::string model_id = "model.flat";
  if (fs::exists(cfg.out / "model.json")) {
    const auto j = nlohmann::json::parse(read_file(cfg.out / "model.json"));
    model_id = j.value("model", model_id);
  }
  const ValueSurface s = value_surface(fe, cfg.plan.driver_measure(), dates, test,
                                       {model_id, cfg.plan.driver_measure().describe(), cfg.seed});
  save_surface(cfg.out / "values.csv", s, config_hash(cfg));
  std::cout << "value: " << s.scenarios << " scenarios x " << dates.size() << " dates\n";
}

void cmd_risk(const RunConfig& cfg) {
  const ValueSurface s = read_surface_csv(upstream(cfg, "values.csv", "value"));
  auto [test, y] = read_sample(upstream(cfg, "sample_test.csv", "simulate"), cfg.plan);
  require(s.scenarios == test.n(), ErrorKind::Dimension,
          "risk: values.csv and sample_test.csv differ in scenario count");
  const std::size_t T = cfg.plan.problem.periods();
  const Estimate v0 = oracle_v0(y);
  std::ostringstream l2;
  l2 << "t,method,normalized_l2_pct,oracle_noise_pct,debiased_pct\n";
  std::vector<double> v1;
  for (std::size_t t : s.dates) {
    std::vector<double> truth;
    double noise = 0.0;
    if (t == 0) {
      truth.assign(test.n(), v0.value);
      noise = v0.stderr_;
    } else if (t == T) {
      truth = y;
    } else {
      InnerEstimate ie =
          oracle_vt(cfg.plan.problem, cfg.plan.driver_measure(), test, t, cfg.plan.n_inner, cfg.seed);
      double ss = 0.0;
      for (double e : ie.stderr_) ss += e * e;
      noise = std::sqrt(ss / static_cast<double>(test.n()));
      truth = std::move(ie.mean);
    }
    const double err = normalized_l2(s.column(t), truth, v0.value);
    const double np = 100.0 * noise / std::fabs(v0.value);
    l2 << t << ",later," << format_double(err) << ',' << format_double(np) << ','
       << format_double(std::sqrt(std::max(0.0, err * err - np * np))) << '\n';
    if (t == 1) v1 = truth;
  }
  write_file(cfg.out / "l2_errors.csv", l2.str());
  std::vector<QQPoint> q1, qT;
  std::vector<RiskRow> risk;
  const bool has0 = std::find(s.dates.begin(), s.dates.end(), 0) != s.dates.end();
  if (!v1.empty()) {
    q1 = detrended_qq(s.column(1), v1);
    if (has0) {
      const std::vector<double> v0col(test.n(), v0.value);
      risk = risk_table(loss_samples(s, 0, 1), loss_samples(v0col, v1), cfg.plan.var_alpha,
                        cfg.plan.es_alpha);
    }
  }
  if (std::find(s.dates.begin(), s.dates.end(), T) != s.dates.end())
    qT = detrended_qq(s.column(T), y);
  std::ostringstream a, b, c;
  write_qq_csv(a, q1);
  write_qq_csv(b, qT);
  write_risk_csv(c, risk);
  write_file(cfg.out / "qq_t1.csv", a.str());
  write_file(cfg.out / "qq_tT.csv", b.str());
  write_file(cfg.out / "risk.csv", c.str());
  std::cout << "risk: wrote l2_errors.csv, qq_t1.csv, qq_tT.csv, risk.csv\n";
}

void cmd_bermudan(const RunConfig& cfg) {
  const BermudanReport r = run_bermudan(cfg.bermudan);
  const std::string h = write_bundle(r, cfg.out);
  std::cout << "bermudan: price " << r.later.value.price << " (Black " << r.truth_v0
            << "), stopping mass at T " << r.later.stopping.back() << ", bundle " << h << "\n";
}

void cmd_report(const RunConfig& cfg) {
  const ExperimentReport r = run_experiment(cfg.plan);
  const std::string h = write_bundle(r, cfg.out);
  std::cout << "report: bundle " << h << " in " << cfg.out.string() << "\n";
  for (const auto& row : r.l2)
    std::cout << "  t=" << row.t << " " << row.method << " normalized L2 " << row.error_pct
              << "%\n";
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"treeval: tree-ensemble value processes, risk and Bermudan pricing"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed (u64)");
  app.add_option("--scale", g.scale, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
  app.add_option("--out", g.out, "output directory");
  auto* sim = app.add_subcommand("simulate", "draw train/valid/test samples");
  auto* train = app.add_subcommand("train", "validation-grid fit, writes model.flat");
  auto* value = app.add_subcommand("value", "value surface of model.flat on the test sample");
  std::vector<std::string> dates;
  value->add_option("--t", dates, "dates to evaluate (integers or T)");
  auto* risk = app.add_subcommand("risk", "errors, Q-Q data and risk measures of values.csv");
  auto* berm = app.add_subcommand("bermudan", "Bermudan put by backward induction");
  auto* report = app.add_subcommand("report", "end-to-end experiment bundle");
  for (auto* sc : {sim, train, value, risk, berm, report}) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << "\n";
    return 2;
  }
  try {
    const RunConfig cfg = resolve(g);
    if (sim->parsed()) cmd_simulate(cfg);
    else if (train->parsed()) cmd_train(cfg);
    else if (value->parsed()) cmd_value(cfg, dates);
    else if (risk->parsed()) cmd_risk(cfg);
    else if (berm->parsed()) cmd_bermudan(cfg);
    else if (report->parsed()) cmd_report(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << one_line(e.what()) << "\n";
    return 3;
  }
  return 0;
}
