#include "cli.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "lbd/closedforms.hpp"
#include "lbd/errors.hpp"
#include "lbd/laplace.hpp"
#include "lbd/montecarlo.hpp"
#include "lbd/ruin.hpp"
#include "lbd/supdist.hpp"

#ifndef LBD_PRESET_DIR
#define LBD_PRESET_DIR "presets"
#endif

namespace lbd::cli {

namespace {

enum class Kind { real, real_or_inf, count, seed, flag, choice };

struct Field {
  std::string key;
  Kind kind;
  std::vector<std::string> choices;
  std::string help;
};

const std::vector<std::string> kCommands = {"density", "sup", "broken-sup", "ruin", "laplace", "mc", "identity-check"};
const std::vector<std::string> kTargets = {"sup", "broken-sup", "ruin", "laplace"};

// Canonical order: records echo fields in this order.
const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"command", Kind::choice, kCommands, "computation"},
      {"target", Kind::choice, kTargets, "mc: quantity to simulate"},
      {"model", Kind::choice, {"brownian", "gamma", "stable"}, "Levy family"},
      {"delta", Kind::real, {}, "gamma rate"},
      {"alpha", Kind::real, {}, "stable index in (1, 2)"},
      {"reflected", Kind::flag, {}, "use -X (spectrally negative)"},
      {"side", Kind::choice, {"sp", "sn"}, "formula family: spectrally positive or negative"},
      {"event", Kind::choice, {"or", "sim", "and"}, "mc ruin event"},
      {"variant", Kind::choice, {"minus", "plus"}, "identity variant"},
      {"x1", Kind::real, {}, "capital of company 1"},
      {"x2", Kind::real, {}, "capital of company 2"},
      {"p1", Kind::real, {}, "premium rate of company 1"},
      {"p2", Kind::real, {}, "premium rate of company 2"},
      {"delta1", Kind::real, {}, "claim share of company 1"},
      {"delta2", Kind::real, {}, "claim share of company 2"},
      {"c", Kind::real, {}, "drift rate"},
      {"c1", Kind::real, {}, "drift rate before the break"},
      {"c2", Kind::real, {}, "drift rate after the break"},
      {"T", Kind::real, {}, "break time"},
      {"horizon", Kind::real_or_inf, {}, "time horizon (number or inf)"},
      {"lambda", Kind::real, {}, "rate of the exponential break time"},
      {"theta", Kind::real_or_inf, {}, "rate of the exponential extra time V (inf: V infinite)"},
      {"gamma", Kind::real, {}, "transform argument"},
      {"u", Kind::real, {}, "level"},
      {"x", Kind::real, {}, "density argument"},
      {"t", Kind::real, {}, "time of the marginal"},
      {"n_paths", Kind::count, {}, "Monte Carlo paths"},
      {"grid_step", Kind::real, {}, "Monte Carlo grid step"},
      {"seed", Kind::seed, {}, "Monte Carlo seed"},
      {"antithetic", Kind::flag, {}, "antithetic pairs (Brownian)"},
      {"bridge", Kind::flag, {}, "exact Brownian bridge crossing"},
      {"extrapolate", Kind::flag, {}, "grid extrapolation (h and 2h)"},
      {"max_work", Kind::real, {}, "Monte Carlo budget in simulated increments"},
      {"abs_tol", Kind::real, {}, "quadrature absolute tolerance"},
      {"rel_tol", Kind::real, {}, "quadrature relative tolerance"},
      {"max_subdivisions", Kind::count, {}, "quadrature subdivision budget"},
      {"tolerance", Kind::real, {}, "largest acceptable err_est"},
  };
  return f;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

bool is_numeric(Kind k) { return k == Kind::real || k == Kind::real_or_inf || k == Kind::count || k == Kind::seed; }

struct Rules {
  std::vector<std::string> required;
  std::vector<std::string> optional;
  Job defaults = Job::object();
};

const std::vector<std::string> kQuadKeys = {"abs_tol", "rel_tol", "max_subdivisions", "tolerance"};
const std::vector<std::string> kMCKeys = {"target",     "n_paths",   "grid_step", "seed",
                                          "antithetic", "bridge",    "extrapolate", "max_work"};

std::vector<std::string> quantity_keys(const std::string& q) {
  if (q == "density") return {"x", "t"};
  if (q == "sup") return {"c", "u", "horizon"};
  if (q == "broken-sup") return {"c1", "c2", "T", "u", "horizon"};
  if (q == "ruin") return {"x1", "x2", "p1", "p2", "delta1", "delta2", "horizon"};
  if (q == "laplace") return {"c1", "c2", "lambda", "gamma"};
  return {"c", "T", "u", "variant"};
}

Rules rules(const std::string& command, const std::string& target, const std::string& model) {
  Rules r;
  auto add = [](std::vector<std::string>& to, const std::vector<std::string>& keys) {
    to.insert(to.end(), keys.begin(), keys.end());
  };
  const std::string q = command == "mc" ? target : command;
  add(r.required, quantity_keys(q));
  if (command != "identity-check") {
    r.required.push_back("model");
    r.optional.push_back("reflected");
    r.defaults["model"] = "brownian";
    r.defaults["reflected"] = false;
    if (model == "gamma") r.required.push_back("delta");
    if (model == "stable") r.required.push_back("alpha");
  }
  if (q == "laplace") {
    r.optional.push_back("theta");
    r.defaults["theta"] = "inf";
  }
  if (command == "mc") {
    add(r.optional, kMCKeys);
    r.required.push_back("target");
    r.defaults["n_paths"] = 100000;
    r.defaults["grid_step"] = 1e-3;
    r.defaults["seed"] = 0;
    r.defaults["antithetic"] = false;
    r.defaults["bridge"] = true;
    r.defaults["extrapolate"] = false;
    r.defaults["max_work"] = 1e10;
    if (target == "ruin") {
      r.optional.push_back("event");
      r.defaults["event"] = "or";
    }
  } else if (command == "sup" || command == "broken-sup" || command == "ruin" || command == "identity-check") {
    add(r.optional, kQuadKeys);
    r.defaults["tolerance"] = 1e-6;
    if (command != "ruin" && command != "identity-check") {
      r.optional.push_back("side");
      r.defaults["side"] = "sp";
    }
  }
  return r;
}

[[noreturn]] void fail(const std::string& msg) { throw JobError(msg); }

double parse_real(const std::string& key, const Job& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (!s.empty() && end == s.c_str() + s.size() && std::isfinite(d)) return d;
  }
  fail("field '" + key + "': expected a finite number, got " + v.dump());
}

Job parse_scalar(const Field& f, const Job& v) {
  switch (f.kind) {
    case Kind::real:
      return parse_real(f.key, v);
    case Kind::real_or_inf:
      if (v.is_string() && (v == "inf" || v == "infinity" || v == "Infinity")) return "inf";
      return parse_real(f.key, v);
    case Kind::count: {
      const double d = parse_real(f.key, v);
      if (d != std::floor(d) || std::abs(d) > 9e15) fail("field '" + f.key + "': expected an integer");
      return static_cast<long long>(d);
    }
    case Kind::seed: {
      if (v.is_number_unsigned()) return v.get<std::uint64_t>();
      if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
      if (v.is_string()) {
        const auto s = v.get<std::string>();
        std::size_t pos = 0;
        try {
          if (!s.empty() && s[0] != '-') {
            const auto n = std::stoull(s, &pos);
            if (pos == s.size()) return n;
          }
        } catch (const std::exception&) {
        }
      }
      fail("field 'seed': expected a non-negative integer, got " + v.dump());
    }
    case Kind::flag:
      if (v.is_boolean()) return v;
      if (v == "true" || v == "1") return true;
      if (v == "false" || v == "0") return false;
      fail("field '" + f.key + "': expected true or false, got " + v.dump());
    case Kind::choice:
      if (v.is_string() && std::find(f.choices.begin(), f.choices.end(), v.get<std::string>()) != f.choices.end())
        return v;
      {
        std::string list;
        for (const auto& c : f.choices) list += (list.empty() ? "" : ", ") + c;
        fail("field '" + f.key + "': expected one of " + list + ", got " + v.dump());
      }
  }
  fail("field '" + f.key + "': unsupported value");
}

// "a:b:n" -> n evenly spaced values from a to b.
std::optional<std::vector<double>> linspace(const Job& v) {
  if (!v.is_string()) return std::nullopt;
  const auto s = v.get<std::string>();
  if (std::count(s.begin(), s.end(), ':') != 2) return std::nullopt;
  const auto i = s.find(':'), k = s.find(':', i + 1);
  const double a = parse_real("range", s.substr(0, i));
  const double b = parse_real("range", s.substr(i + 1, k - i - 1));
  const double n = parse_real("range", s.substr(k + 1));
  if (!(n >= 1.0) || n != std::floor(n) || n > 1e6) fail("range '" + s + "': count must be a positive integer");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = out.size() == 1 ? a : a + (b - a) * static_cast<double>(j) / static_cast<double>(out.size() - 1);
  return out;
}

Job parse_value(const Field& f, const Job& v) {
  if (!is_numeric(f.kind)) {
    if (v.is_array()) fail("field '" + f.key + "' does not accept a list");
    return parse_scalar(f, v);
  }
  if (!v.is_array()) {
    if (f.kind == Kind::real || f.kind == Kind::real_or_inf)
      if (auto r = linspace(v)) return Job(*r);
    return parse_scalar(f, v);
  }
  if (v.empty()) fail("field '" + f.key + "': empty list");
  Job out = Job::array();
  for (const auto& e : v) {
    if (e.is_array()) fail("field '" + f.key + "': nested lists are not allowed");
    out.push_back(parse_scalar(f, e));
  }
  return out;
}

void dump_to(const Job& j, std::string& s) {
  switch (j.type()) {
    case Job::value_t::object: {
      s += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) s += ',';
        first = false;
        s += Job(k).dump();
        s += ':';
        dump_to(v, s);
      }
      s += '}';
      break;
    }
    case Job::value_t::array: {
      s += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) s += ',';
        dump_to(j[i], s);
      }
      s += ']';
      break;
    }
    case Job::value_t::number_float: {
      const double d = j.get<double>();
      if (std::isnan(d))
        s += "null";
      else if (std::isinf(d))
        s += d > 0 ? "\"inf\"" : "\"-inf\"";
      else
        s += format_number(d);
      break;
    }
    default:
      s += j.dump();
  }
}

std::string dump(const Job& j) {
  std::string s;
  dump_to(j, s);
  return s;
}

std::string csv_cell(const Job& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return dump(v);
}

// ---- computation ----

LevyModel make_model(const Job& j) {
  const auto name = j["model"].get<std::string>();
  LevyModel m = name == "gamma"    ? LevyModel::gamma(j["delta"].get<double>())
                : name == "stable" ? LevyModel::stable(j["alpha"].get<double>())
                                   : LevyModel::brownian();
  return j["reflected"].get<bool>() ? m.reflected() : m;
}

Horizon make_horizon(const Job& v) { return v.is_string() ? Horizon::infinite() : Horizon::finite(v.get<double>()); }

quad::QuadConfig make_quad(const Job& j) {
  auto cfg = supdist::default_config();
  if (j.contains("abs_tol")) cfg.abs_tol = j["abs_tol"].get<double>();
  if (j.contains("rel_tol")) cfg.rel_tol = j["rel_tol"].get<double>();
  if (j.contains("max_subdivisions")) cfg.max_subdivisions = static_cast<int>(j["max_subdivisions"].get<long long>());
  cfg.validate();
  return cfg;
}

int env_threads() {
  const char* s = std::getenv("LEVY_BREAKDRIFT_THREADS");
  if (!s || !*s) return 0;
  char* end = nullptr;
  const long n = std::strtol(s, &end, 10);
  if (*end != '\0' || n < 1 || n > 4096) fail("LEVY_BREAKDRIFT_THREADS must be a positive integer");
  return static_cast<int>(n);
}

MCConfig make_mc(const Job& j) {
  MCConfig cfg;
  cfg.n_paths = j["n_paths"].get<long long>();
  cfg.grid_step = j["grid_step"].get<double>();
  cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.antithetic = j["antithetic"].get<bool>();
  cfg.brownian_bridge = j["bridge"].get<bool>();
  cfg.extrapolate = j["extrapolate"].get<bool>();
  cfg.max_work = j["max_work"].get<double>();
  cfg.threads = env_threads();
  return cfg;
}

RandomHorizonSpec make_v(const Job& j) {
  return j["theta"].is_string() ? RandomHorizonSpec::infinite() : RandomHorizonSpec::exponential(j["theta"].get<double>());
}

Job probability_record(const Probability& p) {
  Job r = Job::object();
  r["value"] = p.value;
  r["err_est"] = p.err_est;
  return r;
}

Job mc_record(const MCEstimate& e) {
  Job r = Job::object();
  r["estimate"] = e.estimate;
  r["stderr"] = e.std_error;
  r["n_paths"] = e.n_paths;
  r["bias_note"] = to_string(e.bias_note);
  if (std::isinf(e.horizon))
    r["horizon_simulated"] = "inf";
  else
    r["horizon_simulated"] = e.horizon;
  return r;
}

TwoCompanyParams make_companies(const Job& j) {
  TwoCompanyParams p;
  p.x1 = j["x1"].get<double>();
  p.x2 = j["x2"].get<double>();
  p.p1 = j["p1"].get<double>();
  p.p2 = j["p2"].get<double>();
  p.delta1 = j["delta1"].get<double>();
  p.delta2 = j["delta2"].get<double>();
  p.model = make_model(j);
  return p;
}

Job compute_mc(const Job& j) {
  const auto target = j["target"].get<std::string>();
  const LevyModel m = make_model(j);
  const MCConfig cfg = make_mc(j);
  if (target == "sup") {
    const double c = j["c"].get<double>();
    const Horizon h = make_horizon(j["horizon"]);
    return mc_record(mc::simulate_sup_broken(m, BrokenDrift(c, c, 1.0), j["u"].get<double>(), h, cfg));
  }
  if (target == "broken-sup") {
    const BrokenDrift d(j["c1"].get<double>(), j["c2"].get<double>(), j["T"].get<double>());
    return mc_record(mc::simulate_sup_broken(m, d, j["u"].get<double>(), make_horizon(j["horizon"]), cfg));
  }
  if (target == "ruin") {
    const auto ev = j["event"].get<std::string>();
    const RuinEvent e = ev == "or" ? RuinEvent::either : ev == "sim" ? RuinEvent::simultaneous : RuinEvent::both;
    return mc_record(mc::simulate_two_company(make_companies(j), make_horizon(j["horizon"]), cfg, e));
  }
  return mc_record(mc::simulate_laplace_transform(m, j["c1"].get<double>(), j["c2"].get<double>(),
                                                  j["lambda"].get<double>(), make_v(j), j["gamma"].get<double>(),
                                                  cfg));
}

Job compute(const Job& j) {
  const auto command = j["command"].get<std::string>();
  if (command == "density") {
    const LevyModel m = make_model(j);
    const double x = j["x"].get<double>(), t = j["t"].get<double>();
    Job r = Job::object();
    r["density"] = models::density(m, x, t);
    r["cdf"] = models::cdf(m, x, t);
    return r;
  }
  if (command == "sup") {
    const LevyModel m = make_model(j);
    const auto cfg = make_quad(j);
    const double c = j["c"].get<double>(), u = j["u"].get<double>();
    const Horizon h = make_horizon(j["horizon"]);
    const bool sn = j["side"] == "sn";
    if (h.is_infinite())
      return probability_record(sn ? supdist::sup_linear_sn_inf(m, c, u) : supdist::sup_linear_sp_inf(m, c, u, cfg));
    return probability_record(sn ? supdist::sup_linear_sn(m, c, u, h.S(), cfg)
                                 : supdist::sup_linear_sp(m, c, u, h.S(), cfg));
  }
  if (command == "broken-sup") {
    const LevyModel m = make_model(j);
    const auto cfg = make_quad(j);
    const BrokenDrift d(j["c1"].get<double>(), j["c2"].get<double>(), j["T"].get<double>());
    const double u = j["u"].get<double>();
    const Horizon h = make_horizon(j["horizon"]);
    const SupResult s = j["side"] == "sn" ? supdist::sup_broken_sn(m, d, u, h, cfg) : supdist::sup_broken_sp(m, d, u, h, cfg);
    Job r = Job::object();
    r["value"] = s.probability;
    r["a_term"] = s.A_term;
    r["b_term"] = s.B_term;
    r["err_est"] = s.err_est;
    return r;
  }
  if (command == "ruin") {
    const TwoCompanyParams p = make_companies(j);
    const auto cfg = make_quad(j);
    const RuinProbabilities rp = ruin::evaluate(p, make_horizon(j["horizon"]), cfg);
    const ReducedParams red = ruin::reduce(p);
    Job r = Job::object();
    r["psi1"] = rp.psi1.value;
    r["psi2"] = rp.psi2.value;
    r["psi_or"] = rp.psi_or.value;
    r["psi_sim"] = rp.psi_sim.value;
    r["psi_and"] = rp.psi_and.value;
    r["psi_and_raw"] = rp.psi_and.raw;
    if (red.crossing)
      r["crossing_time"] = *red.crossing;
    else
      r["crossing_time"] = nullptr;
    r["err_est"] = std::max({rp.psi1.err_est, rp.psi2.err_est, rp.psi_or.err_est, rp.psi_sim.err_est,
                             rp.psi_and.err_est});
    return r;
  }
  if (command == "laplace") {
    LaplaceQuery q;
    q.model = make_model(j);
    q.c1 = j["c1"].get<double>();
    q.c2 = j["c2"].get<double>();
    q.lambda = j["lambda"].get<double>();
    q.gamma = j["gamma"].get<double>();
    Job r = Job::object();
    r["value"] = laplace::laplace_sup_broken(q, make_v(j));
    return r;
  }
  if (command == "identity-check") {
    const auto variant = j["variant"] == "minus" ? closedforms::IdentityVariant::minus : closedforms::IdentityVariant::plus;
    const auto s = closedforms::brownian_identity_check(j["c"].get<double>(), j["T"].get<double>(),
                                                        j["u"].get<double>(), variant, make_quad(j));
    Job r = Job::object();
    r["lhs"] = s.lhs;
    r["rhs"] = s.rhs;
    r["abs_diff"] = std::abs(s.lhs - s.rhs);
    r["err_est"] = s.err_est;
    return r;
  }
  return compute_mc(j);
}

std::string preset_dir() {
  const char* env = std::getenv("LEVY_BREAKDRIFT_PRESETS");
  return env && *env ? std::string(env) : std::string(LBD_PRESET_DIR);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

Invocation load_job_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open job file '" + path + "'");
  Job doc;
  try {
    doc = Job::parse(in);
  } catch (const Job::parse_error& e) {
    fail("job file '" + path + "': " + e.what());
  }
  if (!doc.is_object()) fail("job file '" + path + "': expected a JSON object");
  if (doc.contains("job")) {
    for (const auto& [k, v] : doc.items())
      if (k != "job" && k != "result") fail("job file '" + path + "': unknown top-level field '" + k + "'");
    doc = doc["job"];
    if (!doc.is_object()) fail("job file '" + path + "': 'job' must be an object");
  }
  Invocation inv;
  inv.job = Job::object();
  for (const auto& [k, v] : doc.items()) {
    if (k == "output") {
      if (v != "json" && v != "csv") fail("field 'output': expected json or csv");
      inv.output = v.get<std::string>();
    } else if (k == "timing") {
      if (!v.is_boolean()) fail("field 'timing': expected true or false");
      inv.timing = v.get<bool>();
    } else {
      inv.job[k] = v;
    }
  }
  return inv;
}

Invocation parse_args(int argc, const char* const* argv) {
  CLI::App app{"Supremum distributions and ruin probabilities of Levy processes with a broken drift", "levy-breakdrift"};
  std::string command, config, preset, output;
  bool timing = false;
  app.add_option("command", command, "computation")->check(CLI::IsMember(kCommands));
  app.add_option("--config", config, "job file (JSON object, or a record written earlier)");
  app.add_option("--preset", preset, "named job file from the presets directory");
  app.add_option("--output", output, "output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--timing", timing, "add wall_time_s to every result");

  std::map<std::string, std::vector<std::string>> values;
  std::map<std::string, int> flags;
  int no_bridge = 0;
  for (const auto& f : fields()) {
    if (f.key == "command") continue;
    std::string names = "--" + f.key;
    if (f.key.find('_') != std::string::npos) {
      std::string dashed = f.key;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      names += ",--" + dashed;
    }
    if (f.kind == Kind::flag) {
      app.add_flag(names, flags[f.key], f.help);
    } else {
      auto* opt = app.add_option(names, values[f.key], f.help);
      if (is_numeric(f.kind)) opt->delimiter(',');
    }
  }
  app.add_flag("--no-bridge", no_bridge, "plain grid for Brownian paths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw;
  } catch (const CLI::ParseError& e) {
    fail(e.what());
  }

  Invocation inv;
  if (!config.empty() && !preset.empty()) fail("--config and --preset are mutually exclusive");
  if (!preset.empty()) {
    if (preset.find('/') != std::string::npos) fail("--preset takes a name, not a path");
    inv = load_job_file(preset_dir() + "/" + preset + ".json");
  } else if (!config.empty()) {
    inv = load_job_file(config);
  } else {
    inv.job = Job::object();
  }
  if (!command.empty()) {
    if (inv.job.contains("command") && inv.job["command"] != command)
      fail("command '" + command + "' conflicts with the job file's command " + inv.job["command"].dump());
    inv.job["command"] = command;
  }
  for (const auto& [key, items] : values) {
    if (items.empty()) continue;
    std::vector<std::string> parts;
    for (auto s : items) {
      s.erase(std::remove(s.begin(), s.end(), '['), s.end());
      s.erase(std::remove(s.begin(), s.end(), ']'), s.end());
      if (!s.empty()) parts.push_back(s);
    }
    if (parts.empty()) fail("field '" + key + "': empty value");
    if (parts.size() == 1)
      inv.job[key] = parts[0];
    else
      inv.job[key] = parts;
  }
  for (const auto& [key, n] : flags)
    if (n > 0) inv.job[key] = true;
  if (no_bridge > 0) {
    if (flags["bridge"] > 0) fail("--bridge and --no-bridge are mutually exclusive");
    inv.job["bridge"] = false;
  }
  if (!output.empty()) inv.output = output;
  if (timing) inv.timing = true;
  return inv;
}

Job normalize(const Job& job) {
  if (!job.is_object()) fail("job must be a JSON object");
  if (!job.contains("command")) fail("no command given");
  const auto command = parse_scalar(*find_field("command"), job["command"]).get<std::string>();
  std::string target, model = "brownian";
  if (job.contains("target")) target = parse_scalar(*find_field("target"), job["target"]).get<std::string>();
  if (job.contains("model")) model = parse_scalar(*find_field("model"), job["model"]).get<std::string>();
  if (command == "mc" && target.empty()) fail("mc needs a target (sup, broken-sup, ruin or laplace)");
  const Rules r = rules(command, target, model);

  std::set<std::string> allowed(r.required.begin(), r.required.end());
  allowed.insert(r.optional.begin(), r.optional.end());
  allowed.insert("command");
  for (const auto& [k, v] : job.items()) {
    if (!find_field(k)) fail("unknown field '" + k + "'");
    if (!allowed.count(k)) fail("field '" + k + "' does not apply to command '" + command + "'" +
                                (command == "mc" ? " with target '" + target + "'" : std::string()) +
                                (k == "delta" || k == "alpha" ? " with model '" + model + "'" : std::string()));
  }

  Job out = Job::object();
  for (const auto& f : fields()) {
    if (job.contains(f.key))
      out[f.key] = parse_value(f, job[f.key]);
    else if (r.defaults.contains(f.key))
      out[f.key] = parse_value(f, r.defaults[f.key]);
    else if (std::find(r.required.begin(), r.required.end(), f.key) != r.required.end())
      fail("missing field '" + f.key + "' for command '" + command + "'");
  }
  return out;
}

std::vector<Job> expand(const Job& job) {
  std::vector<Job> out{Job::object()};
  for (const auto& [k, v] : job.items()) {
    if (!v.is_array()) {
      for (auto& j : out) j[k] = v;
      continue;
    }
    std::vector<Job> next;
    next.reserve(out.size() * v.size());
    for (const auto& j : out)
      for (const auto& e : v) {
        next.push_back(j);
        next.back()[k] = e;
      }
    out = std::move(next);
  }
  return out;
}

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const Job job = normalize(inv.job);
  const auto points = expand(job);
  int code = ok;
  bool header = false;
  for (const auto& p : points) {
    Job result;
    const auto start = std::chrono::steady_clock::now();
    try {
      result = compute(p);
    } catch (...) {
      err << "levy-breakdrift: failed at " << dump(p) << "\n";
      throw;
    }
    if (inv.timing)
      result["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (result.contains("err_est") && p.contains("tolerance") &&
        result["err_est"].get<double>() > p["tolerance"].get<double>()) {
      err << "levy-breakdrift: err_est " << format_number(result["err_est"].get<double>()) << " exceeds tolerance "
          << format_number(p["tolerance"].get<double>()) << " at " << dump(p) << "\n";
      code = convergence_failure;
    }
    if (inv.output == "csv") {
      if (!header) {
        std::string line;
        for (const auto& [k, v] : p.items()) line += (line.empty() ? "" : ",") + k;
        for (const auto& [k, v] : result.items()) line += "," + k;
        out << line << "\n";
        header = true;
      }
      std::string line;
      bool first = true;
      for (const auto& [k, v] : p.items()) {
        line += (first ? "" : ",") + csv_cell(v);
        first = false;
      }
      for (const auto& [k, v] : result.items()) line += "," + csv_cell(v);
      out << line << "\n";
    } else {
      Job record = Job::object();
      record["job"] = p;
      record["result"] = result;
      out << dump(record) << "\n";
    }
    out.flush();
  }
  return code;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    return run(parse_args(argc, argv), out, err);
  } catch (const CLI::CallForHelp&) {
    out << "usage: levy-breakdrift <command> [--field value[,value...]] [--config FILE | --preset NAME]\n"
           "           [--output json|csv] [--timing]\n\ncommands:";
    for (const auto& c : kCommands) out << " " << c;
    out << "\n\nfields:\n";
    for (const auto& f : fields()) {
      if (f.key == "command") continue;
      std::string name = f.key;
      std::replace(name.begin(), name.end(), '_', '-');
      out << "  --" << name << std::string(name.size() < 18 ? 18 - name.size() : 1, ' ') << f.help << "\n";
    }
    out << "  --no-bridge         plain grid for Brownian paths\n"
           "\nList fields take a,b,c or start:stop:count; all lists are combined.\n"
           "Exit codes: 0 ok, 2 invalid job or domain error, 3 convergence or budget failure.\n";
    return ok;
  } catch (const JobError& e) {
    err << "levy-breakdrift: invalid job: " << e.what() << "\n";
    return domain_error;
  } catch (const DomainError& e) {
    err << "levy-breakdrift: domain error: " << e.what() << "\n";
    return domain_error;
  } catch (const UnsupportedRegimeError& e) {
    err << "levy-breakdrift: unsupported regime: " << e.what() << "\n";
    return domain_error;
  } catch (const ConvergenceError& e) {
    err << "levy-breakdrift: convergence failure: " << e.what() << " (partial value "
        << format_number(e.partial_value()) << ", err_est " << format_number(e.err_est()) << ")\n";
    return convergence_failure;
  } catch (const BudgetError& e) {
    err << "levy-breakdrift: budget exceeded: " << e.what() << " (" << e.achieved_paths() << " paths, estimate "
        << format_number(e.estimate()) << ", stderr " << format_number(e.std_error()) << ")\n";
    return convergence_failure;
  } catch (const std::exception& e) {
    err << "levy-breakdrift: internal error: " << e.what() << "\n";
    return internal_error;
  }
}

}  // namespace lbd::cli
