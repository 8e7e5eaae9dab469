#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "potwell/error.hpp"
#include "potwell/format.hpp"
#include "potwell/inference.hpp"
#include "potwell/mcmc.hpp"
#include "potwell/regimes.hpp"
#include "potwell/replicate.hpp"
#include "potwell/serialize.hpp"
#include "potwell/series.hpp"
#include "potwell/simulate.hpp"

namespace potwell::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kPartial = 2;

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const EmptyInput*>(&e)) return "EmptyInput";
  if (dynamic_cast<const LengthMismatch*>(&e)) return "LengthMismatch";
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const DegenerateState*>(&e)) return "DegenerateState";
  if (dynamic_cast<const TooManyRejections*>(&e)) return "TooManyRejections";
  if (dynamic_cast<const OptimizerFailure*>(&e)) return "OptimizerFailure";
  if (dynamic_cast<const SelectionFailure*>(&e)) return "SelectionFailure";
  if (dynamic_cast<const ChainStuck*>(&e)) return "ChainStuck";
  if (dynamic_cast<const OrderOutOfRange*>(&e)) return "OrderOutOfRange";
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "InvalidArgument";
  return "Error";
}

std::string describe(const std::exception& e) {
  return std::string(error_kind(e)) + ": " + e.what();
}

// Registers options on a subcommand and fills anything not given on the
// command line from the --config JSON object (keys are the long flag
// names without dashes).
class Settings {
 public:
  explicit Settings(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON file supplying option values");
  }

  template <typename T>
  CLI::Option* option(const std::string& name, T& value, const std::string& help) {
    keys_.insert(name);
    fill_.push_back([this, name, &value](const Json& cfg) {
      if (app_->count("--" + name) == 0 && cfg.contains(name)) value = cfg.at(name).get<T>();
    });
    return app_->add_option("--" + name, value, help)->capture_default_str();
  }

  CLI::Option* flag(const std::string& name, bool& value, const std::string& help) {
    keys_.insert(name);
    fill_.push_back([this, name, &value](const Json& cfg) {
      if (app_->count("--" + name) == 0 && cfg.contains(name)) value = cfg.at(name).get<bool>();
    });
    return app_->add_flag("--" + name, value, help);
  }

  void apply() const {
    if (config_path_.empty()) return;
    std::ifstream in(config_path_);
    if (!in) throw ConfigError("cannot open config file " + config_path_);
    Json cfg;
    try {
      cfg = Json::parse(in);
    } catch (const Json::exception& e) {
      throw ConfigError("config file " + config_path_ + ": " + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& item : cfg.items())
      if (!keys_.count(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");
    try {
      for (const auto& f : fill_) f(cfg);
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("config value: ") + e.what());
    }
  }

 private:
  CLI::App* app_;
  std::string config_path_;
  std::set<std::string> keys_;
  std::vector<std::function<void(const Json&)>> fill_;
};

// Files are staged in memory and written together, so a refused overwrite
// leaves the output directory untouched.
class Output {
 public:
  Output(fs::path root, bool force) : root_(std::move(root)), force_(force) {}

  void protect(const fs::path& p) { protected_.push_back(p); }
  void add(fs::path rel, std::string content) { files_.emplace_back(std::move(rel), std::move(content)); }
  void add_json(fs::path rel, const Json& j) { add(std::move(rel), j.dump(2) + "\n"); }

  std::vector<fs::path> commit() const {
    for (const auto& [rel, _] : files_) {
      const auto p = root_ / rel;
      if (!fs::exists(p)) continue;
      for (const auto& in : protected_)
        if (fs::exists(in) && fs::equivalent(in, p))
          throw ConfigError("output " + p.string() + " would overwrite an input file");
      if (!force_) throw ConfigError("refusing to overwrite " + p.string() + " (pass --force)");
    }
    std::vector<fs::path> written;
    for (const auto& [rel, content] : files_) {
      const auto p = root_ / rel;
      fs::create_directories(p.parent_path());
      std::ofstream f(p, std::ios::binary | std::ios::trunc);
      f << content;
      if (!f) throw Error("cannot write " + p.string());
      written.push_back(p);
    }
    return written;
  }

 private:
  fs::path root_;
  bool force_;
  std::vector<fs::path> protected_;
  std::vector<std::pair<fs::path, std::string>> files_;
};

template <typename Writer>
std::string render(Writer&& write) {
  std::ostringstream os;
  write(os);
  return os.str();
}

struct Common {
  std::string out = "out";
  bool force = false;
  std::uint64_t seed = 1;
};

void add_common(Settings& s, Common& c, std::uint64_t default_seed) {
  c.seed = default_seed;
  s.option("out", c.out, "output directory");
  s.flag("force", c.force, "overwrite existing output files");
  s.option("seed", c.seed, "random seed");
}

struct InputOptions {
  std::string input;
  std::string format = "auto";
  std::string window = "auto";
  double spread_cap = 5.0;
  double interval = 30.0;  // minutes
};

void add_input(Settings& s, InputOptions& in, bool required = true) {
  auto* o = s.option("input", in.input, "price-csv or quote-csv file");
  if (required) o->required();
  s.option("format", in.format, "auto | price | quote");
  s.option("window", in.window, "monthly | whole-series | auto (monthly when dated)");
  s.option("spread-cap", in.spread_cap, "quote-csv: drop quotes with ask - bid >= cap");
  s.option("interval", in.interval, "quote-csv: resampling interval in minutes");
}

void check_member(const std::string& name, const std::string& value,
                  std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (value == a) return;
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw ConfigError("--" + name + " must be one of " + list + ", got '" + value + "'");
}

DatedSeries load(const InputOptions& in) {
  check_member("format", in.format, {"auto", "price", "quote"});
  if (!(in.spread_cap > 0.0)) throw ConfigError("--spread-cap must be positive");
  if (!(in.interval > 0.0)) throw ConfigError("--interval must be positive");
  std::optional<SeriesFormat> format;
  if (in.format == "price") format = SeriesFormat::PriceCsv;
  if (in.format == "quote") format = SeriesFormat::QuoteCsv;
  LoadOptions options;
  options.spread_cap = in.spread_cap;
  options.interval = std::chrono::milliseconds(static_cast<long long>(std::llround(in.interval * 60000.0)));
  if (options.interval.count() <= 0) throw ConfigError("--interval is below one millisecond");
  return load_series(in.input, format, options);
}

WindowMode window_mode(const InputOptions& in, const DatedSeries& data) {
  check_member("window", in.window, {"auto", "monthly", "whole-series"});
  if (in.window == "monthly") return WindowMode::Monthly;
  if (in.window == "whole-series") return WindowMode::WholeSeries;
  return data.has_calendar() ? WindowMode::Monthly : WindowMode::WholeSeries;
}

const char* to_string(WindowMode m) { return m == WindowMode::Monthly ? "monthly" : "whole-series"; }

struct SamplerOptions {
  int walkers = 0;
  int steps = SamplerConfig{}.steps;
  int burnin = SamplerConfig{}.burn_in;
  int thin = SamplerConfig{}.thin;
  double stretch = SamplerConfig{}.stretch;
  std::size_t grid_points = 200;
};

void add_sampler(Settings& s, SamplerOptions& o) {
  s.option("walkers", o.walkers, "ensemble walkers (0: max(32, 4 * dim))");
  s.option("steps", o.steps, "sampler steps per walker");
  s.option("burnin", o.burnin, "discarded initial steps");
  s.option("thin", o.thin, "keep every thin-th post-burn-in step");
  s.option("stretch", o.stretch, "stretch move scale a");
  s.option("grid-points", o.grid_points, "potential band grid size");
}

SamplerConfig sampler_config(const SamplerOptions& o, std::uint64_t seed) {
  if (o.walkers < 0) throw ConfigError("--walkers must be non-negative");
  if (o.steps < 1) throw ConfigError("--steps must be positive");
  if (o.burnin < 0 || o.burnin >= o.steps) throw ConfigError("--burnin must lie in [0, steps)");
  if (o.thin < 1) throw ConfigError("--thin must be positive");
  if (!(o.stretch > 1.0)) throw ConfigError("--stretch must exceed 1");
  if (o.grid_points < 2) throw ConfigError("--grid-points must be at least 2");
  SamplerConfig c;
  c.walkers = o.walkers;
  c.steps = o.steps;
  c.burn_in = o.burnin;
  c.thin = o.thin;
  c.stretch = o.stretch;
  c.seed = seed;
  return c;
}

void check_qmax(int qmax) {
  if (qmax < kMinOrder || qmax > kMaxOrder) throw ConfigError("--qmax must lie in 1..4");
}

int exit_for(std::size_t ok, std::size_t failed) {
  if (ok == 0) return kFailure;
  return failed > 0 ? kPartial : kOk;
}

void report_written(std::ostream& out, const std::vector<fs::path>& files) {
  for (const auto& f : files) out << "wrote " << f.string() << '\n';
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  Common common;
  int q = 0;
  std::vector<double> alpha;
  double sigma2 = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 1;
  std::size_t len = 1000;
  double s0 = 1.0;
  double dt = 1.0;
  std::string grid = "jittered";
  double bound = 1e9;
  std::string format = "long";
};

void add_simulate(Settings& s, SimulateArgs& a) {
  add_common(s, a.common, 1);
  s.option("q", a.q, "drift order (0: length of --alpha)");
  s.option("alpha", a.alpha, "drift coefficients alpha_1..alpha_q")->delimiter(',');
  s.option("sigma2", a.sigma2, "diffusion variance sigma^2");
  s.option("n", a.n, "number of accepted paths");
  s.option("len", a.len, "points per path");
  s.option("s0", a.s0, "initial price");
  s.option("dt", a.dt, "mean time step");
  s.option("grid", a.grid, "jittered | equidistant");
  s.option("bound", a.bound, "divergence bound");
  s.option("format", a.format, "long (one CSV) | price (one price-csv per path)");
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.alpha.empty()) throw ConfigError("--alpha is required");
  if (a.q != 0 && a.q != static_cast<int>(a.alpha.size()))
    throw ConfigError("--q " + std::to_string(a.q) + " does not match " +
                      std::to_string(a.alpha.size()) + " alpha values");
  if (!std::isfinite(a.sigma2)) throw ConfigError("--sigma2 is required");
  check_member("grid", a.grid, {"jittered", "equidistant"});
  check_member("format", a.format, {"long", "price"});
  if (static_cast<int>(a.alpha.size()) > kMaxOrder) throw OrderOutOfRange(static_cast<int>(a.alpha.size()));

  DriftModel model(a.alpha, a.sigma2);
  EnsembleOptions options;
  options.s0 = a.s0;
  options.dt = a.dt;
  options.divergence_bound = a.bound;
  const auto grid = a.grid == "jittered" ? GridStyle::Jittered : GridStyle::Equidistant;
  const auto ensemble = simulate_ensemble(model, a.n, a.len, grid, a.common.seed, options);

  Output files(a.common.out, a.common.force);
  Json names = Json::array();
  if (a.format == "long") {
    files.add("ensemble.csv", render([&](std::ostream& os) { write_long_ensemble_csv(os, ensemble.paths); }));
    names.push_back("ensemble.csv");
  } else {
    for (std::size_t p = 0; p < ensemble.paths.size(); ++p) {
      char name[32];
      std::snprintf(name, sizeof name, "path_%04zu.csv", p);
      files.add(name, render([&](std::ostream& os) { write_price_csv(os, ensemble.paths[p]); }));
      names.push_back(name);
    }
  }
  files.add_json("manifest.json", Json{{"model", to_json(model)},
                                       {"seed", a.common.seed},
                                       {"count", a.n},
                                       {"length", a.len},
                                       {"grid", a.grid},
                                       {"dt", a.dt},
                                       {"s0", a.s0},
                                       {"divergence_bound", a.bound},
                                       {"attempts", ensemble.attempts},
                                       {"rejections", ensemble.rejections},
                                       {"files", names}});
  report_written(out, files.commit());
  out << ensemble.paths.size() << " paths, " << ensemble.rejections << " rejected\n";
  return kOk;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
  Common common;
  std::vector<std::string> inputs;
  InputOptions input;
  int qmax = kMaxOrder;
  int restarts = FitOptions{}.restarts;
  bool histogram = false;
};

void add_fit(Settings& s, FitArgs& a) {
  add_common(s, a.common, FitOptions{}.seed);
  s.option("input", a.inputs, "one or more price-csv / quote-csv files")->required();
  s.option("format", a.input.format, "auto | price | quote");
  s.option("window", a.input.window, "monthly | whole-series | auto (monthly when dated)");
  s.option("spread-cap", a.input.spread_cap, "quote-csv: drop quotes with ask - bid >= cap");
  s.option("interval", a.input.interval, "quote-csv: resampling interval in minutes");
  s.option("qmax", a.qmax, "largest drift order tried");
  s.option("restarts", a.restarts, "random optimizer restarts per order");
  s.flag("order-histogram", a.histogram, "also write chosen-order counts across windows");
}

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  check_qmax(a.qmax);
  if (a.restarts < 0) throw ConfigError("--restarts must be non-negative");
  FitOptions fit;
  fit.restarts = a.restarts;
  fit.seed = a.common.seed;

  Output files(a.common.out, a.common.force);
  std::array<long, kMaxOrder> histogram{};
  std::size_t ok = 0, failed = 0;
  Json inputs = Json::array();
  for (const auto& path : a.inputs) {
    files.protect(path);
    Json entry{{"path", path}};
    InputOptions in = a.input;
    in.input = path;
    std::optional<DatedSeries> data;
    WindowMode mode = WindowMode::WholeSeries;
    try {
      data = load(in);
      mode = window_mode(in, *data);
      entry["window_mode"] = to_string(mode);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      err << path << ": " << describe(e) << '\n';
      entry["error"] = describe(e);
      inputs.push_back(entry);
      ++failed;
      continue;
    }
    Json windows = Json::array();
    for (const auto& w : make_windows(*data, mode)) {
      Json jw{{"window", w.tag.str()}, {"n", w.series.size()}};
      try {
        const auto sel = select_order(w.series, a.qmax, fit);
        jw["selection"] = to_json(sel);
        ++histogram[static_cast<std::size_t>(sel.chosen - 1)];
        ++ok;
        out << path << " " << w.tag.str() << ": q=" << sel.chosen << '\n';
      } catch (const std::exception& e) {
        jw["error"] = describe(e);
        ++failed;
        err << path << " " << w.tag.str() << ": " << describe(e) << '\n';
      }
      windows.push_back(jw);
    }
    entry["windows"] = windows;
    inputs.push_back(entry);
  }
  files.add_json("selections.json", Json{{"qmax", a.qmax}, {"seed", a.common.seed}, {"inputs", inputs}});
  if (a.histogram)
    files.add("order_histogram.csv", render([&](std::ostream& os) {
                os << "q,count\n";
                for (int q = 1; q <= kMaxOrder; ++q) os << q << ',' << histogram[q - 1] << '\n';
              }));
  report_written(out, files.commit());
  return exit_for(ok, failed);
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
  Common common;
  InputOptions input;
  SamplerOptions sampler;
  int q = 0;
  int qmax = kMaxOrder;
  std::string selections;
};

void add_sample(Settings& s, SampleArgs& a) {
  add_common(s, a.common, 1);
  add_input(s, a.input);
  add_sampler(s, a.sampler);
  s.option("q", a.q, "drift order (0: AIC selection or --selections)");
  s.option("qmax", a.qmax, "largest drift order tried by AIC selection");
  s.option("selections", a.selections, "selections.json written by the fit command");
}

// Chosen fit for a window from a fit-command document, if present.
std::optional<FitResult> stored_fit(const Json& doc, const std::string& input, const std::string& tag) {
  const auto& inputs = doc.at("inputs");
  for (const auto& entry : inputs) {
    if (inputs.size() > 1 && entry.at("path").get<std::string>() != input) continue;
    if (!entry.contains("windows")) continue;
    for (const auto& w : entry.at("windows"))
      if (w.at("window").get<std::string>() == tag && w.contains("selection")) {
        const auto sel = selection_from_json(w.at("selection"));
        return sel.best();
      }
  }
  return std::nullopt;
}

int cmd_sample(const SampleArgs& a, std::ostream& out, std::ostream& err) {
  if (a.q != 0 && (a.q < kMinOrder || a.q > kMaxOrder)) throw OrderOutOfRange(a.q);
  check_qmax(a.qmax);
  const auto cfg = sampler_config(a.sampler, a.common.seed);
  Json stored;
  if (!a.selections.empty()) {
    std::ifstream in(a.selections);
    if (!in) throw ConfigError("cannot open " + a.selections);
    try {
      stored = Json::parse(in);
    } catch (const Json::exception& e) {
      throw ConfigError(a.selections + ": " + e.what());
    }
  }

  const auto data = load(a.input);
  const auto mode = window_mode(a.input, data);
  Output files(a.common.out, a.common.force);
  files.protect(a.input.input);
  if (!a.selections.empty()) files.protect(a.selections);

  std::size_t ok = 0, failed = 0;
  Json summary = Json::array();
  for (const auto& w : make_windows(data, mode)) {
    const auto tag = w.tag.str();
    Json js{{"window", tag}};
    try {
      std::optional<FitResult> mle;
      if (a.q != 0) {
        mle = fit_mle(w.series, a.q);
      } else if (!stored.is_null()) {
        mle = stored_fit(stored, a.input.input, tag);
        if (!mle) throw ConfigError("no stored selection for window " + tag);
      } else {
        mle = select_order(w.series, a.qmax).best();
      }
      const auto ensemble = sample_posterior(w.series, *mle, cfg);
      const auto band = potential_band(ensemble, default_band_grid(w.series, a.sampler.grid_points), *mle);
      const auto diag = diagnostics(ensemble, &band);

      Json sidecar = ensemble_sidecar(ensemble);
      sidecar["window"] = tag;
      sidecar["mle"] = to_json(*mle);
      Json jd = to_json(diag);
      jd["window"] = tag;
      jd["q"] = mle->q;
      jd["acceptance_fraction"] = ensemble.acceptance_fraction();
      files.add(fs::path(tag) / "posterior.csv",
                render([&](std::ostream& os) { write_ensemble_csv(os, ensemble); }));
      files.add_json(fs::path(tag) / "posterior.json", sidecar);
      files.add(fs::path(tag) / "band.csv", render([&](std::ostream& os) { write_band_csv(os, band); }));
      files.add_json(fs::path(tag) / "diagnostics.json", jd);
      js["q"] = mle->q;
      js["multimodal"] = diag.multimodal;
      ++ok;
      out << tag << ": q=" << mle->q << ", acceptance " << ensemble.acceptance_fraction()
          << (diag.multimodal ? ", multimodal" : "") << '\n';
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      js["error"] = describe(e);
      ++failed;
      err << tag << ": " << describe(e) << '\n';
    }
    summary.push_back(js);
  }
  files.add_json("sample_summary.json",
                 Json{{"input", a.input.input}, {"window_mode", to_string(mode)}, {"windows", summary}});
  report_written(out, files.commit());
  return exit_for(ok, failed);
}

// ---------------------------------------------------------------- classify

struct ClassifyArgs {
  Common common;
  InputOptions input;
  SamplerOptions sampler;
  int qmax = kMaxOrder;
  double exclusion = ClassifyOptions{}.exclusion_fraction;
};

void add_classify(Settings& s, ClassifyArgs& a) {
  add_common(s, a.common, 1);
  add_input(s, a.input);
  add_sampler(s, a.sampler);
  s.option("qmax", a.qmax, "largest drift order tried");
  s.option("exclusion", a.exclusion, "fraction of the band that must exclude zero for a direction");
}

int cmd_classify(const ClassifyArgs& a, std::ostream& out, std::ostream& err) {
  check_qmax(a.qmax);
  if (!(a.exclusion > 0.0 && a.exclusion <= 1.0)) throw ConfigError("--exclusion must lie in (0, 1]");
  TrackConfig cfg;
  cfg.q_max = a.qmax;
  cfg.sampler = sampler_config(a.sampler, a.common.seed);
  cfg.classify.exclusion_fraction = a.exclusion;
  cfg.grid_points = a.sampler.grid_points;

  const auto data = load(a.input);
  cfg.mode = window_mode(a.input, data);
  const auto track = regime_track(data, cfg);

  std::size_t ok = 0, skipped = 0;
  Json windows = Json::array();
  for (const auto& e : track) {
    windows.push_back(to_json(e));
    if (e.skipped()) {
      ++skipped;
      err << e.tag.str() << ": skipped (" << e.skip_reason << ")\n";
    } else {
      ++ok;
      out << e.tag.str() << ": " << potwell::to_string(e.label->label) << " (q=" << e.label->q << ")\n";
    }
  }
  Output files(a.common.out, a.common.force);
  files.protect(a.input.input);
  files.add("regimes.csv", render([&](std::ostream& os) { write_track_csv(os, track); }));
  files.add_json("regimes.json", Json{{"input", a.input.input},
                                      {"window_mode", to_string(cfg.mode)},
                                      {"seed", a.common.seed},
                                      {"windows", windows}});
  report_written(out, files.commit());
  return exit_for(ok, skipped);
}

// --------------------------------------------------------------- replicate

struct ReplicateArgs {
  Common common;
  std::string which;
  std::size_t paths = 100;
  std::size_t len = 1000;
  double dt = replicate::OrderRecoveryConfig{}.dt;
  std::string grid = "jittered";
};

void add_replicate(Settings& s, ReplicateArgs& a, CLI::App* app) {
  add_common(s, a.common, 11);
  app->add_option("which", a.which, "order-recovery | parameter-recovery")
      ->required()
      ->check(CLI::IsMember({"order-recovery", "parameter-recovery"}));
  s.option("paths", a.paths, "paths per ensemble");
  s.option("len", a.len, "points per path");
  s.option("dt", a.dt, "mean time step of the jittered grid");
  s.option("grid", a.grid, "jittered | equidistant");
}

Json checks_json(const std::vector<replicate::Check>& checks) {
  Json out = Json::array();
  for (const auto& c : checks) out.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return out;
}

std::string estimates_csv(const std::vector<FitResult>& fits, int q) {
  std::ostringstream os;
  os << "path,sigma2";
  for (int i = 1; i <= q; ++i) os << ",alpha" << i;
  os << ",log_likelihood,aic\n";
  for (std::size_t p = 0; p < fits.size(); ++p) {
    os << p;
    for (double v : fits[p].phi) os << ',' << format_double(v);
    os << ',' << format_double(fits[p].log_likelihood) << ',' << format_double(fits[p].aic) << '\n';
  }
  return os.str();
}

int cmd_replicate(const ReplicateArgs& a, std::ostream& out) {
  check_member("grid", a.grid, {"jittered", "equidistant"});
  const auto grid = a.grid == "jittered" ? GridStyle::Jittered : GridStyle::Equidistant;
  Output files(a.common.out, a.common.force);
  std::vector<replicate::Check> checks;
  Json verdict{{"experiment", a.which}, {"seed", a.common.seed}, {"paths", a.paths},
               {"length", a.len},       {"dt", a.dt},            {"grid", a.grid}};

  if (a.which == "parameter-recovery") {
    replicate::ParameterRecoveryConfig cfg;
    cfg.paths = a.paths;
    cfg.length = a.len;
    cfg.seed = a.common.seed;
    cfg.grid = grid;
    cfg.dt = a.dt;
    const auto r = replicate::run_parameter_recovery(cfg);
    checks = r.checks;
    files.add("estimates_q3.csv", estimates_csv(r.fits_q3, 3));
    files.add("estimates_q4.csv", estimates_csv(r.fits_q4, 4));
    files.add("summary.csv", render([&](std::ostream& os) {
                os << "order,parameter,truth,mean,std\n";
                for (const auto* set : {&r.q3, &r.q4})
                  for (const auto& s : *set)
                    os << (set == &r.q3 ? 3 : 4) << ',' << s.name << ',' << format_double(s.truth) << ','
                       << format_double(s.mean) << ',' << format_double(s.std) << '\n';
              }));
    verdict["truth"] = to_json(r.truth);
    verdict["attempts"] = r.attempts;
    verdict["rejections"] = r.rejections;
    verdict["failed_fits"] = r.failed_fits;
  } else {
    replicate::OrderRecoveryConfig cfg;
    cfg.paths = a.paths;
    cfg.length = a.len;
    cfg.seed = a.common.seed;
    cfg.grid = grid;
    cfg.dt = a.dt;
    const auto r = replicate::run_order_recovery(cfg);
    checks = r.checks;
    files.add("order_histogram.csv", render([&](std::ostream& os) {
                os << "true_q,est_q1,est_q2,est_q3,est_q4,rejections,failed\n";
                for (int q = 1; q <= kMaxOrder; ++q) {
                  const auto i = static_cast<std::size_t>(q - 1);
                  os << q;
                  for (long c : r.histogram[i]) os << ',' << c;
                  os << ',' << r.rejections[i] << ',' << r.failed[i] << '\n';
                }
              }));
  }
  verdict["checks"] = checks_json(checks);
  verdict["pass"] = replicate::all_pass(checks);
  files.add_json("verdict.json", verdict);
  report_written(out, files.commit());
  for (const auto& c : checks) out << (c.pass ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
  return replicate::all_pass(checks) ? kOk : kFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polynomial-drift SDE fitting, posterior potential bands and regime tracks"};
  app.name("potwell");
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Euler-Maruyama ensembles of a given model");
  auto* fit = app.add_subcommand("fit", "maximum-likelihood fits and AIC order selection per window");
  auto* sample = app.add_subcommand("sample", "posterior ensembles and potential bands per window");
  auto* classify = app.add_subcommand("classify", "regime label per window");
  auto* rep = app.add_subcommand("replicate", "synthetic recovery experiments with a PASS/FAIL verdict");

  SimulateArgs sim_args;
  Settings sim_settings(sim);
  add_simulate(sim_settings, sim_args);
  FitArgs fit_args;
  Settings fit_settings(fit);
  add_fit(fit_settings, fit_args);
  SampleArgs sample_args;
  Settings sample_settings(sample);
  add_sample(sample_settings, sample_args);
  ClassifyArgs classify_args;
  Settings classify_settings(classify);
  add_classify(classify_settings, classify_args);
  ReplicateArgs rep_args;
  Settings rep_settings(rep);
  add_replicate(rep_settings, rep_args, rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kFailure;
  }

  try {
    if (sim->parsed()) {
      sim_settings.apply();
      return cmd_simulate(sim_args, out);
    }
    if (fit->parsed()) {
      fit_settings.apply();
      return cmd_fit(fit_args, out, err);
    }
    if (sample->parsed()) {
      sample_settings.apply();
      return cmd_sample(sample_args, out, err);
    }
    if (classify->parsed()) {
      classify_settings.apply();
      return cmd_classify(classify_args, out, err);
    }
    rep_settings.apply();
    return cmd_replicate(rep_args, out);
  } catch (const std::exception& e) {
    err << "error: " << describe(e) << '\n';
    return kFailure;
  }
}

}  // namespace potwell::cli
