#include "treeval/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "treeval/error.hpp"
#include "treeval/io.hpp"

namespace treeval {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = v.find(',', start);
    out.push_back(trim(v.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(const IniDocument& doc, const IniEntry& e, const std::string& what) {
  throw Error(ErrorKind::Config, doc.source + ":" + std::to_string(e.line) + ": [" +
                                     e.section + "] " + e.key + ": " + what);
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"run", {"seed", "scale", "threads", "out"}},
      {"problem",
       {"payoff", "assets", "steps", "vol", "rate", "s0", "strike", "barrier", "coupon",
        "face"}},
      {"measure", {"kind", "marginal", "loc", "scale", "theta"}},
      {"estimator", {"kind", "regress_now"}},
      {"forest", {"trees", "nodesize", "features", "sampling", "subsample", "max_depth"}},
      {"boost", {"rounds", "learning_rate", "nodesize", "max_depth", "patience"}},
      {"plan", {"n_train", "n_valid", "n_test", "n_inner", "dates", "var_alpha", "es_alpha"}},
      {"bermudan",
       {"estimator", "strike", "sigma", "rate", "maturity", "periods", "z0", "n_train",
        "n_test", "regress_now"}},
  };
  return s;
}

class Reader {
 public:
  explicit Reader(const IniDocument& doc) : doc_(doc) {}

  const IniEntry* get(std::string_view section, std::string_view key) const {
    return doc_.find(section, key);
  }

  std::uint64_t to_u64(const IniEntry& e) const {
    std::uint64_t v = 0;
    const std::string& s = e.value;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      fail(doc_, e, "expected a non-negative integer, got '" + s + "'");
    return v;
  }

  std::size_t to_count(const IniEntry& e, std::string_view s, std::size_t min) const {
    std::size_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      fail(doc_, e, "expected an integer, got '" + std::string(s) + "'");
    if (v < min) fail(doc_, e, "must be >= " + std::to_string(min));
    return v;
  }

  double to_real(const IniEntry& e, std::string_view s) const {
    const auto slash = s.find('/');
    if (slash != std::string_view::npos) {
      const double num = to_real(e, trim(s.substr(0, slash)));
      const double den = to_real(e, trim(s.substr(slash + 1)));
      if (den == 0.0) fail(doc_, e, "division by zero in '" + std::string(s) + "'");
      return num / den;
    }
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
      fail(doc_, e, "expected a real number, got '" + std::string(s) + "'");
    return v;
  }

  bool to_bool(const IniEntry& e) const {
    const std::string& v = e.value;
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail(doc_, e, "expected true or false, got '" + v + "'");
  }

  template <class F>
  void with(std::string_view section, std::string_view key, F&& f) const {
    if (const IniEntry* e = get(section, key)) f(*e);
  }

  std::size_t count(std::string_view section, std::string_view key, std::size_t current,
                    std::size_t min = 1) const {
    if (const IniEntry* e = get(section, key)) return to_count(*e, e->value, min);
    return current;
  }

  double real(std::string_view section, std::string_view key, double current) const {
    if (const IniEntry* e = get(section, key)) return to_real(*e, e->value);
    return current;
  }

  std::vector<std::size_t> counts(const IniEntry& e, std::size_t min) const {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(e.value)) out.push_back(to_count(e, item, min));
    return out;
  }

  const IniDocument& doc() const { return doc_; }

 private:
  const IniDocument& doc_;
};

template <class E>
E parse_enum(const IniDocument& doc, const IniEntry& e,
             std::initializer_list<std::pair<const char*, E>> options) {
  std::string names;
  for (const auto& [name, value] : options) {
    if (e.value == name) return value;
    names += names.empty() ? name : std::string(", ") + name;
  }
  fail(doc, e, "invalid value '" + e.value + "' (expected one of: " + names + ")");
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

const char* marginal_name(MarginalFamily f) {
  switch (f) {
    case MarginalFamily::Normal: return "normal";
    case MarginalFamily::Uniform: return "uniform";
    case MarginalFamily::Logistic: return "logistic";
  }
  return "normal";
}

void apply_problem(const Reader& r, ExperimentPlan& plan) {
  Problem& p = plan.problem;
  const bool reshape = r.get("problem", "assets") || r.get("problem", "steps") ||
                       r.get("problem", "vol") || r.get("problem", "rate") ||
                       r.get("problem", "s0");
  if (reshape) {
    const std::size_t d = r.count("problem", "assets", p.components());
    std::vector<double> steps = p.model.steps;
    r.with("problem", "steps", [&](const IniEntry& e) {
      steps.clear();
      for (const auto& item : split_list(e.value)) {
        const double v = r.to_real(e, item);
        if (!(v > 0.0)) fail(r.doc(), e, "steps must be > 0");
        steps.push_back(v);
      }
    });
    const double vol = r.real("problem", "vol", p.model.vols.empty() ? 0.2 : p.model.vols[0]);
    const double rate = r.real("problem", "rate", p.model.rate);
    const double s0 = r.real("problem", "s0", p.model.initial_prices.at(0));
    if (!(s0 > 0.0)) fail(r.doc(), *r.get("problem", "s0"), "s0 must be > 0");
    if (vol < 0.0) fail(r.doc(), *r.get("problem", "vol"), "vol must be >= 0");
    p.model = BlackScholesModel::independent(d, vol, steps, rate, s0);
  }
  p.payoff.strike = r.real("problem", "strike", p.payoff.strike);
  p.payoff.barrier = r.real("problem", "barrier", p.payoff.barrier);
  p.payoff.coupon = r.real("problem", "coupon", p.payoff.coupon);
  p.payoff.face = r.real("problem", "face", p.payoff.face);
  if (p.payoff.kind == PayoffKind::BRC && !(p.payoff.barrier < p.payoff.strike)) {
    const IniEntry* e = r.get("problem", "barrier");
    if (!e) e = r.get("problem", "strike");
    if (e) fail(r.doc(), *e, "BRC requires barrier < strike");
  }
}

void apply_measure(const Reader& r, ExperimentPlan& plan) {
  const IniEntry* kind = r.get("measure", "kind");
  const std::string k = kind ? kind->value : "normal";
  enum class M { Normal, Product, Clayton };
  const M which = kind ? parse_enum<M>(r.doc(), *kind,
                                       {{"normal", M::Normal},
                                        {"product", M::Product},
                                        {"clayton", M::Clayton}})
                       : M::Normal;
  Marginal marg;
  r.with("measure", "marginal", [&](const IniEntry& e) {
    marg.family = parse_enum<MarginalFamily>(r.doc(), e,
                                             {{"normal", MarginalFamily::Normal},
                                              {"uniform", MarginalFamily::Uniform},
                                              {"logistic", MarginalFamily::Logistic}});
  });
  marg.loc = r.real("measure", "loc", 0.0);
  marg.scale = r.real("measure", "scale", 1.0);
  if (const IniEntry* e = r.get("measure", "scale"); e && !(marg.scale > 0.0))
    fail(r.doc(), *e, "scale must be > 0");
  const double theta = r.real("measure", "theta", 1.0);
  if (const IniEntry* e = r.get("measure", "theta"); e && !(theta > 0.0))
    fail(r.doc(), *e, "theta must be > 0");
  const std::size_t d = plan.problem.components();
  const std::size_t T = plan.problem.periods();
  if (which == M::Normal) {
    for (const char* key : {"marginal", "loc", "scale", "theta"})
      if (const IniEntry* e = r.get("measure", key))
        fail(r.doc(), *e, "kind=normal takes no further keys");
    plan.measure = MeasureSpec();
    return;
  }
  std::vector<PeriodMeasure> periods;
  for (std::size_t s = 0; s < T; ++s) {
    if (which == M::Product) {
      periods.emplace_back(ProductPeriod{std::vector<Marginal>(d, marg)});
    } else {
      CopulaPeriod c;
      c.family = CopulaFamily::Clayton;
      c.theta = theta;
      c.marginals.assign(d, marg);
      periods.emplace_back(c);
    }
  }
  plan.measure = MeasureSpec(d, std::move(periods));
}

void apply_grids(const Reader& r, ExperimentPlan& plan) {
  ForestGrid& f = plan.forest_grid;
  r.with("forest", "trees", [&](const IniEntry& e) { f.trees = r.counts(e, 1); });
  r.with("forest", "nodesize", [&](const IniEntry& e) { f.nodesize = r.counts(e, 2); });
  r.with("forest", "features", [&](const IniEntry& e) {
    if (e.value == "all")
      f.features.clear();
    else
      f.features = r.counts(e, 1);
    const std::size_t dim = plan.problem.components() * plan.problem.periods();
    for (std::size_t p : f.features)
      if (p > dim) fail(r.doc(), e, "p exceeds d*T = " + std::to_string(dim));
  });
  r.with("forest", "sampling", [&](const IniEntry& e) {
    f.sampling = parse_enum<Sampling>(r.doc(), e,
                                      {{"bootstrap", Sampling::Bootstrap},
                                       {"subsample-with", Sampling::SubsampleWith},
                                       {"subsample-without", Sampling::SubsampleWithout}});
  });
  r.with("forest", "subsample",
         [&](const IniEntry& e) { f.subsample = r.to_count(e, e.value, 1); });
  r.with("forest", "max_depth",
         [&](const IniEntry& e) { f.max_depth = r.to_count(e, e.value, 1); });

  BoostGrid& b = plan.boost_grid;
  b.rounds = r.count("boost", "rounds", b.rounds);
  b.patience = r.count("boost", "patience", b.patience, 0);
  r.with("boost", "nodesize", [&](const IniEntry& e) { b.nodesize = r.counts(e, 1); });
  r.with("boost", "max_depth", [&](const IniEntry& e) { b.max_depth = r.counts(e, 1); });
  r.with("boost", "learning_rate", [&](const IniEntry& e) {
    b.learning_rate.clear();
    for (const auto& item : split_list(e.value)) {
      const double v = r.to_real(e, item);
      if (!(v > 0.0 && v <= 1.0)) fail(r.doc(), e, "learning_rate must lie in (0, 1]");
      b.learning_rate.push_back(v);
    }
  });
}

void apply_plan(const Reader& r, ExperimentPlan& plan) {
  const std::size_t n_train = r.count("plan", "n_train", plan.n_train);
  if (r.get("plan", "n_train") && !r.get("plan", "n_valid"))
    plan.n_valid = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                std::llround(0.4 * static_cast<double>(n_train))));
  plan.n_train = n_train;
  plan.n_valid = r.count("plan", "n_valid", plan.n_valid);
  plan.n_test = r.count("plan", "n_test", plan.n_test);
  plan.n_inner = r.count("plan", "n_inner", plan.n_inner);
  r.with("plan", "dates", [&](const IniEntry& e) {
    plan.dates.clear();
    const std::size_t T = plan.problem.periods();
    for (const auto& item : split_list(e.value)) {
      const std::size_t t = item == "T" ? T : r.to_count(e, item, 0);
      if (t > T) fail(r.doc(), e, "date " + item + " exceeds T = " + std::to_string(T));
      if (std::find(plan.dates.begin(), plan.dates.end(), t) == plan.dates.end())
        plan.dates.push_back(t);
    }
  });
  auto level = [&](const char* key, double& slot) {
    r.with("plan", key, [&](const IniEntry& e) {
      slot = r.to_real(e, e.value);
      if (!(slot > 0.0 && slot < 1.0)) fail(r.doc(), e, "must lie in (0, 1)");
    });
  };
  level("var_alpha", plan.var_alpha);
  level("es_alpha", plan.es_alpha);
}

void apply_bermudan(const Reader& r, RunConfig& cfg) {
  EstimatorKind est = cfg.plan.estimator;
  r.with("bermudan", "estimator",
         [&](const IniEntry& e) { est = parse_enum<EstimatorKind>(r.doc(), e, {{"boost", EstimatorKind::Boost}, {"forest", EstimatorKind::Forest}}); });
  BermudanPlan& b = cfg.bermudan;
  b = BermudanPlan::make(est, cfg.scale, cfg.seed);
  b.strike = r.real("bermudan", "strike", b.strike);
  b.sigma = r.real("bermudan", "sigma", b.sigma);
  b.rate = r.real("bermudan", "rate", b.rate);
  b.maturity = r.real("bermudan", "maturity", b.maturity);
  b.periods = r.count("bermudan", "periods", b.periods);
  b.z0 = r.real("bermudan", "z0", b.z0);
  b.n_train = r.count("bermudan", "n_train", b.n_train);
  b.n_test = r.count("bermudan", "n_test", b.n_test);
  r.with("bermudan", "regress_now", [&](const IniEntry& e) { b.regress_now = r.to_bool(e); });
  for (const char* key : {"sigma", "maturity", "strike"})
    r.with("bermudan", key, [&](const IniEntry& e) {
      if (!(r.to_real(e, e.value) > 0.0)) fail(r.doc(), e, "must be > 0");
    });
}

}  // namespace

const IniEntry* IniDocument::find(std::string_view section, std::string_view key) const {
  for (const auto& e : entries)
    if (e.section == section && e.key == key) return &e;
  return nullptr;
}

IniDocument parse_ini(std::string_view text, std::string source) {
  IniDocument doc;
  doc.source = std::move(source);
  std::string section;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    auto where = [&] { return doc.source + ":" + std::to_string(lineno) + ": "; };
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::Config, where() + "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!schema().count(section))
        throw Error(ErrorKind::Config, where() + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Config, where() + "expected 'key = value'");
    if (section.empty())
      throw Error(ErrorKind::Config, where() + "key outside of any section");
    IniEntry e;
    e.section = section;
    e.key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (const auto hash = value.find(" #"); hash != std::string::npos) value = trim(value.substr(0, hash));
    e.value = value;
    e.line = lineno;
    if (!schema().at(section).count(e.key))
      throw Error(ErrorKind::Config, where() + "unknown key '" + e.key + "' in [" + section + "]");
    if (doc.find(e.section, e.key))
      throw Error(ErrorKind::Config, where() + "duplicate key '" + e.key + "'");
    if (e.value.empty())
      throw Error(ErrorKind::Config, where() + "empty value for key '" + e.key + "'");
    doc.entries.push_back(std::move(e));
  }
  return doc;
}

Scale parse_scale(std::string_view s) {
  if (s == "desk") return Scale::Desk;
  if (s == "paper") return Scale::Paper;
  throw Error(ErrorKind::Config, "invalid scale '" + std::string(s) + "' (expected desk or paper)");
}

EstimatorKind parse_estimator(std::string_view s) {
  if (s == "boost") return EstimatorKind::Boost;
  if (s == "forest") return EstimatorKind::Forest;
  throw Error(ErrorKind::Config,
              "invalid estimator '" + std::string(s) + "' (expected boost or forest)");
}

RunConfig build_config(const IniDocument& doc, const Overrides& ov) {
  const Reader r(doc);
  RunConfig cfg;
  r.with("run", "scale", [&](const IniEntry& e) {
    cfg.scale = parse_enum<Scale>(doc, e, {{"desk", Scale::Desk}, {"paper", Scale::Paper}});
  });
  r.with("run", "seed", [&](const IniEntry& e) { cfg.seed = r.to_u64(e); });
  r.with("run", "threads", [&](const IniEntry& e) { cfg.threads = r.to_count(e, e.value, 0); });
  r.with("run", "out", [&](const IniEntry& e) { cfg.out = e.value; });
  if (ov.scale) cfg.scale = *ov.scale;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.threads) cfg.threads = *ov.threads;
  if (ov.out) cfg.out = *ov.out;

  std::string problem = "min-put";
  r.with("problem", "payoff", [&](const IniEntry& e) {
    problem = parse_enum<std::string>(doc, e,
                                      {{"min-put", "min-put"},
                                       {"max-call", "max-call"},
                                       {"brc", "brc"}});
  });
  EstimatorKind est = EstimatorKind::Boost;
  r.with("estimator", "kind", [&](const IniEntry& e) {
    est = parse_enum<EstimatorKind>(doc, e,
                                    {{"boost", EstimatorKind::Boost},
                                     {"forest", EstimatorKind::Forest}});
  });
  cfg.plan = ExperimentPlan::make(problem, est, cfg.scale, cfg.seed);
  r.with("estimator", "regress_now",
         [&](const IniEntry& e) { cfg.plan.regress_now = r.to_bool(e); });
  apply_problem(r, cfg.plan);
  // Grids sized by d*T follow a reshaped problem.
  const std::size_t dim = cfg.plan.problem.components() * cfg.plan.problem.periods();
  cfg.plan.forest_grid = cfg.scale == Scale::Desk ? ForestGrid::desk(dim) : ForestGrid::paper(dim);
  apply_measure(r, cfg.plan);
  apply_grids(r, cfg.plan);
  apply_plan(r, cfg.plan);
  apply_bermudan(r, cfg);
  try {
    cfg.plan.validate();
    cfg.bermudan.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, doc.source + ": " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& ov) {
  return build_config(parse_ini(read_file(path), path.string()), ov);
}

namespace {

void render_plan_sections(std::ostream& os, const ExperimentPlan& p) {
  const auto& m = p.problem.model;
  os << "[problem]\n"
     << "payoff = " << p.problem.name << '\n'
     << "assets = " << m.assets() << '\n'
     << "steps = " << join(m.steps) << '\n'
     << "vol = " << format_double(m.vols.empty() ? 0.0 : m.vols[0]) << '\n'
     << "rate = " << format_double(m.rate) << '\n'
     << "s0 = " << format_double(m.initial_prices.at(0)) << '\n'
     << "strike = " << format_double(p.problem.payoff.strike) << '\n'
     << "barrier = " << format_double(p.problem.payoff.barrier) << '\n'
     << "coupon = " << format_double(p.problem.payoff.coupon) << '\n'
     << "face = " << format_double(p.problem.payoff.face) << "\n\n";

  os << "[measure]\n";
  if (p.measure.periods() == 0) {
    os << "kind = normal\n\n";
  } else {
    const PeriodMeasure& q = p.measure.period(0);
    const Marginal* mg = nullptr;
    if (const auto* pp = std::get_if<ProductPeriod>(&q)) {
      os << "kind = product\n";
      mg = &pp->marginals.at(0);
    } else if (const auto* cp = std::get_if<CopulaPeriod>(&q)) {
      os << "kind = clayton\ntheta = " << format_double(cp->theta) << '\n';
      mg = &cp->marginals.at(0);
    }
    if (mg)
      os << "marginal = " << marginal_name(mg->family) << "\nloc = " << format_double(mg->loc)
         << "\nscale = " << format_double(mg->scale) << '\n';
    os << "# " << p.measure.describe() << "\n\n";
  }

  os << "[estimator]\n"
     << "kind = " << to_string(p.estimator) << '\n'
     << "regress_now = " << (p.regress_now ? "true" : "false") << "\n\n";
  const auto& f = p.forest_grid;
  os << "[forest]\n"
     << "trees = " << join(f.trees) << '\n'
     << "nodesize = " << join(f.nodesize) << '\n'
     << "features = " << (f.features.empty() ? std::string("all") : join(f.features)) << '\n'
     << "sampling = " << to_string(f.sampling) << '\n';
  if (f.subsample) os << "subsample = " << *f.subsample << '\n';
  if (f.max_depth) os << "max_depth = " << *f.max_depth << '\n';
  const auto& b = p.boost_grid;
  os << "\n[boost]\n"
     << "rounds = " << b.rounds << '\n'
     << "learning_rate = " << join(b.learning_rate) << '\n'
     << "nodesize = " << join(b.nodesize) << '\n'
     << "max_depth = " << join(b.max_depth) << '\n'
     << "patience = " << b.patience << "\n\n";
  os << "[plan]\n"
     << "n_train = " << p.n_train << '\n'
     << "n_valid = " << p.n_valid << '\n'
     << "n_test = " << p.n_test << '\n'
     << "n_inner = " << p.n_inner << '\n'
     << "dates = " << join(p.resolved_dates()) << '\n'
     << "var_alpha = " << format_double(p.var_alpha) << '\n'
     << "es_alpha = " << format_double(p.es_alpha) << "\n\n";
}

void render_bermudan_section(std::ostream& os, const BermudanPlan& b) {
  os << "[bermudan]\n"
     << "estimator = " << to_string(b.estimator) << '\n'
     << "strike = " << format_double(b.strike) << '\n'
     << "sigma = " << format_double(b.sigma) << '\n'
     << "rate = " << format_double(b.rate) << '\n'
     << "maturity = " << format_double(b.maturity) << '\n'
     << "periods = " << b.periods << '\n'
     << "z0 = " << format_double(b.z0) << '\n'
     << "n_train = " << b.n_train << '\n'
     << "n_test = " << b.n_test << '\n'
     << "regress_now = " << (b.regress_now ? "true" : "false") << '\n'
     << "# later: " << describe(b.later) << '\n'
     << "# now: " << describe(b.now) << "\n\n";
}

}  // namespace

std::string render_snapshot(const ExperimentPlan& plan) {
  std::ostringstream os;
  os << "# resolved experiment plan, rng " << CounterRng::kAlgorithm << "\n\n";
  render_plan_sections(os, plan);
  os << "[run]\nseed = " << plan.seed << '\n';
  return os.str();
}

std::string render_snapshot(const BermudanPlan& plan) {
  std::ostringstream os;
  os << "# resolved bermudan plan, rng " << CounterRng::kAlgorithm << "\n\n";
  render_bermudan_section(os, plan);
  os << "[run]\nseed = " << plan.seed << '\n';
  return os.str();
}

std::string render_snapshot(const RunConfig& cfg) {
  std::ostringstream os;
  os << "# resolved configuration, rng " << CounterRng::kAlgorithm << "\n\n";
  render_plan_sections(os, cfg.plan);
  render_bermudan_section(os, cfg.bermudan);
  os << "[run]\n"
     << "seed = " << cfg.seed << '\n'
     << "scale = " << to_string(cfg.scale) << '\n'
     << "threads = " << cfg.threads << '\n'
     << "out = " << cfg.out.string() << '\n';
  return os.str();
}

}  // namespace treeval
