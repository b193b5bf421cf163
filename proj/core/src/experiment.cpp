#include "cone_spde/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "cone_spde/error.hpp"

namespace cone_spde {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

json compliant_coefficients(std::size_t columns) {
  json vol = json::array();
  for (std::size_t j = 0; j < columns; ++j) {
    vol.push_back({{"family", "proportional"}, {"scale", 0.3}, {"index", j}});
  }
  return {{"drift", {{"family", "mean_reversion"}, {"kappa", 1.0}, {"b", 0.5}}},
          {"vol", vol},
          {"jumps", json::array({{{"weight", 0.2},
                                  {"kernel", {{"family", "constant"}, {"value", 0.1}}}}})}};
}

json base_document() {
  return {{"space", {{"dim", 16}, {"signs", "nonnegative"}}},
          {"semigroup", {{"rates", "heat"}}},
          {"coefficients", compliant_coefficients(8)},
          {"noise", {{"q_eigenvalues", "unit"}, {"seed", 20240501}}},
          {"sim", {{"dt", 1e-3}, {"horizon", 1.0}, {"paths", 200}, {"exit_tol", 1e-8}}},
          {"initial", "apex"},
          {"checker", {{"per_face", 64}, {"interior", 64}, {"seed", 1}}},
          {"verify", {{"exit_threshold", 0.01}}}};
}

/// Throws ConfigError naming the first key of `j` not in `allowed`.
void require_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(where + "." + key + ": unknown field");
    }
  }
}

/// Runs `parse`, prefixing any error with the field path.
template <class F>
auto in_field(const std::string& where, F&& parse) {
  try {
    return parse();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) throw;
    throw ConfigError(where + ": " + msg);
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::vector<int> parse_signs(const json& j, std::size_t dim) {
  if (j.is_string()) {
    const auto rule = j.get<std::string>();
    if (rule == "nonnegative") return ConeSpec::nonnegative(dim).signs();
    if (rule == "unconstrained") return ConeSpec::unconstrained(dim).signs();
    throw ConfigError("unknown sign rule \"" + rule + "\"");
  }
  auto signs = j.get<std::vector<int>>();
  if (signs.size() != dim) {
    throw ConfigError("expected " + std::to_string(dim) + " signs, got " +
                      std::to_string(signs.size()));
  }
  return signs;
}

StateVec parse_initial(const json& j, std::size_t dim) {
  if (j.is_string()) {
    if (j.get<std::string>() != "apex") throw ConfigError("expected \"apex\", a number or a list");
    return StateVec(dim);
  }
  if (j.is_number()) return StateVec(dim, j.get<double>());
  auto v = j.get<std::vector<double>>();
  if (v.size() != dim) {
    throw ConfigError("expected " + std::to_string(dim) + " coordinates, got " +
                      std::to_string(v.size()));
  }
  return StateVec(std::move(v));
}

std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::ofstream open_output(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  return out;
}

void write_json(const std::filesystem::path& file, const json& j) {
  auto out = open_output(file);
  out << j.dump(2) << '\n';
}

json manifest_document(const ExperimentConfig& cfg, const std::string& command,
                       const std::vector<std::string>& files) {
  return {{"hash", manifest_hash(cfg)},
          {"command", command},
          {"version", kVersion},
          {"files", files},
          {"config", canonical_json(cfg)}};
}

void prepare_out(const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw Error("cannot create output directory " + out.string() + ": " + ec.message());
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"heat-positive", "heat-positive-badvol", "heat-positive-hidden-drift"};
}

json preset_document(const std::string& name) {
  json doc = base_document();
  if (name == "heat-positive") return doc;
  if (name == "heat-positive-badvol") {
    // Constant noise on the first face.
    doc["coefficients"]["vol"].push_back(
        {{"family", "constant"}, {"value", 0.3}, {"index", 0}});
    return doc;
  }
  if (name == "heat-positive-hidden-drift") {
    // Outward drift on the first face, switched on only where the second
    // coordinate exceeds 50, far outside the sampler's reach.
    doc["coefficients"]["drift"] = {
        {"family", "sum"},
        {"terms",
         {{{"family", "mean_reversion"}, {"kappa", 1.0}, {"b", 0.5}},
          {{"family", "step"},
           {"index", 0},
           {"gate", 1},
           {"threshold", 50.0},
           {"below", 0.0},
           {"above", -5.0}}}}};
    std::vector<double> h0(16, 0.5);
    h0[0] = 0.1;
    h0[1] = 100.0;
    doc["initial"] = h0;
    return doc;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("preset: unknown name \"" + name + "\" (known: " + known + ")");
}

ExperimentConfig parse_config(const json& input) {
  if (!input.is_object()) throw ConfigError("config: expected a JSON object");
  json doc = input;
  ExperimentConfig cfg;
  if (doc.contains("preset")) {
    cfg.preset = in_field("preset", [&] { return doc.at("preset").get<std::string>(); });
    json expanded = preset_document(cfg.preset);
    json patch = doc;
    patch.erase("preset");
    expanded.merge_patch(patch);
    doc = std::move(expanded);
  }
  require_keys(doc, "config",
               {"space", "semigroup", "coefficients", "noise", "sim", "initial", "checker",
                "verify"});
  for (const char* key : {"space", "semigroup", "coefficients", "sim"}) {
    if (!doc.contains(key)) throw ConfigError(std::string("config.") + key + ": missing");
  }

  const json& space = doc.at("space");
  require_keys(space, "space", {"dim", "signs"});
  const auto dim = in_field("space.dim", [&] {
    const auto n = space.at("dim").get<std::size_t>();
    if (n == 0) throw ConfigError("must be positive");
    return n;
  });
  cfg.cone = in_field("space.signs", [&] {
    return ConeSpec(parse_signs(space.value("signs", json("nonnegative")), dim));
  });

  cfg.semigroup = in_field("semigroup", [&] {
    json s = doc.at("semigroup");
    require_keys(s, "semigroup", {"rates", "dim"});
    if (s.contains("rates") && s.at("rates").is_string() && !s.contains("dim")) s["dim"] = dim;
    auto sg = s.get<DiagonalSemigroup>();
    if (sg.dim() != dim) {
      throw ConfigError("has " + std::to_string(sg.dim()) + " rates, space.dim is " +
                        std::to_string(dim));
    }
    return sg;
  });

  const json& coeffs = doc.at("coefficients");
  require_keys(coeffs, "coefficients", {"drift", "vol", "jumps", "lipschitz_hint"});
  if (coeffs.contains("drift")) {
    in_field("coefficients.drift", [&] { return VectorField::from_spec(coeffs.at("drift"), dim); });
  }
  if (coeffs.contains("vol")) {
    if (!coeffs.at("vol").is_array()) throw ConfigError("coefficients.vol: expected a list");
    for (std::size_t j = 0; j < coeffs.at("vol").size(); ++j) {
      in_field("coefficients.vol[" + std::to_string(j) + "]",
               [&] { return VectorField::from_spec(coeffs.at("vol").at(j), dim); });
    }
  }
  if (coeffs.contains("jumps")) {
    if (!coeffs.at("jumps").is_array()) throw ConfigError("coefficients.jumps: expected a list");
    for (std::size_t i = 0; i < coeffs.at("jumps").size(); ++i) {
      const auto& atom = coeffs.at("jumps").at(i);
      const std::string where = "coefficients.jumps[" + std::to_string(i) + "]";
      require_keys(atom, where, {"weight", "kernel"});
      in_field(where + ".kernel", [&] { return VectorField::from_spec(atom.at("kernel"), dim); });
    }
  }
  cfg.coefficients = in_field("coefficients", [&] { return coefficients_from_json(coeffs, dim); });
  cfg.coefficients_spec = coefficients_to_json(cfg.coefficients);
  const std::size_t columns = cfg.coefficients.vol().size();

  cfg.noise = in_field("noise", [&] {
    json n = doc.value("noise", json::object());
    require_keys(n, "noise", {"q_eigenvalues", "seed"});
    return noise_from_json(n, columns);
  });

  const json& sim = doc.at("sim");
  require_keys(sim, "sim",
               {"dt", "horizon", "paths", "scheme", "exit_tol", "clip", "overflow_guard",
                "keep_trajectories", "thin", "dt_sweep"});
  cfg.sim = in_field("sim", [&] { return sim.get<SimConfig>(); });
  cfg.dt_sweep = in_field("sim.dt_sweep", [&] {
    std::vector<double> sweep = sim.contains("dt_sweep")
                                    ? sim.at("dt_sweep").get<std::vector<double>>()
                                    : std::vector<double>{4 * cfg.sim.dt, 2 * cfg.sim.dt, cfg.sim.dt};
    if (sweep.empty()) throw ConfigError("must not be empty");
    for (double dt : sweep) {
      SimConfig probe = cfg.sim;
      probe.dt = dt;
      probe.validate();
    }
    return sweep;
  });

  cfg.initial = in_field("initial", [&] {
    auto h0 = parse_initial(doc.value("initial", json("apex")), dim);
    if (!cfg.cone.contains(h0)) throw ConfigError("initial state is not in the cone");
    return h0;
  });

  const json checker = doc.value("checker", json::object());
  require_keys(checker, "checker", {"per_face", "interior", "corners", "seed", "scale", "tol"});
  cfg.sampler = in_field("checker", [&] { return checker.get<SamplerSpec>(); });
  if (checker.contains("tol")) {
    cfg.checker_tol = in_field("checker.tol", [&] {
      const double tol = checker.at("tol").get<double>();
      if (!(tol >= 0.0)) throw ConfigError("must be nonnegative");
      return tol;
    });
  }

  const json verify = doc.value("verify", json::object());
  require_keys(verify, "verify", {"exit_threshold"});
  cfg.exit_threshold = in_field("verify.exit_threshold", [&] {
    const double t = verify.value("exit_threshold", 0.01);
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("must lie in [0, 1]");
    return t;
  });
  return cfg;
}

json load_config_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_and_column(text, e.byte);
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": " + e.what());
  }
  if (doc.is_object() && doc.contains("hash") && doc.contains("config")) return doc.at("config");
  return doc;
}

json canonical_json(const ExperimentConfig& cfg) {
  json sim = cfg.sim;
  sim["dt_sweep"] = cfg.dt_sweep;
  json checker = cfg.sampler;
  if (cfg.checker_tol) checker["tol"] = *cfg.checker_tol;
  return {{"space", {{"dim", cfg.dim()}, {"signs", cfg.cone.signs()}}},
          {"semigroup", cfg.semigroup},
          {"coefficients", cfg.coefficients_spec},
          {"noise", cfg.noise},
          {"sim", sim},
          {"initial", cfg.initial.values()},
          {"checker", checker},
          {"verify", {{"exit_threshold", cfg.exit_threshold}}}};
}

std::string git_blob_sha1(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw InternalError("EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw InternalError("SHA-1 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string manifest_hash(const ExperimentConfig& cfg) {
  return git_blob_sha1(canonical_json(cfg).dump());
}

json apply_overrides(json doc, const Overrides& o) {
  if (!doc.is_object()) doc = json::object();
  if (o.preset) doc["preset"] = *o.preset;
  if (o.seed) doc["noise"]["seed"] = *o.seed;
  if (o.paths) doc["sim"]["paths"] = *o.paths;
  if (o.dt) {
    doc["sim"]["dt"] = *o.dt;
    if (doc["sim"].contains("dt_sweep")) doc["sim"].erase("dt_sweep");
  }
  return doc;
}

bool agreement(Verdict checker, const SweepRow& finest, double exit_threshold) {
  if (checker == Verdict::no_violation_found) return finest.exit_fraction <= exit_threshold;
  return finest.exits > 0;
}

ConditionReport run_checker(const ExperimentConfig& cfg) {
  return invariance_verdict(cfg.coefficients, cfg.semigroup, cfg.cone, cfg.sampler,
                            cfg.checker_tol);
}

PathEnsemble run_simulation(const ExperimentConfig& cfg, double dt) {
  SimConfig sim = cfg.sim;
  sim.dt = dt;
  if (sim.paths == 1) sim.keep_trajectories = true;
  return run_ensemble(cfg.semigroup, cfg.coefficients, cfg.cone, cfg.noise, sim, cfg.initial);
}

VerdictReport run_verification(const ExperimentConfig& cfg, PathEnsemble* finest) {
  VerdictReport report;
  report.manifest = manifest_hash(cfg);
  report.checker = run_checker(cfg);
  std::size_t finest_row = 0;
  for (double dt : cfg.dt_sweep) {
    SimConfig sim = cfg.sim;
    sim.dt = dt;
    sim.keep_trajectories = false;
    auto e = run_ensemble(cfg.semigroup, cfg.coefficients, cfg.cone, cfg.noise, sim, cfg.initial);
    if (report.sweep.empty() || dt < report.sweep[finest_row].dt) {
      finest_row = report.sweep.size();
      if (finest != nullptr) *finest = e;
    }
    report.sweep.push_back({dt, e.paths.size(), e.exited(), e.diverged(), e.exit_fraction(),
                            e.exit_std_error()});
  }
  report.agreement =
      agreement(report.checker.verdict(), report.sweep[finest_row], cfg.exit_threshold);
  return report;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void write_paths_csv(const std::filesystem::path& file, const PathEnsemble& e,
                     const std::string& manifest) {
  auto out = open_output(file);
  out << "# manifest=" << manifest << '\n';
  out << "path,seed,exited,exit_time,min_margin,diverged\n";
  for (const auto& p : e.paths) {
    out << p.index << ',' << p.seed << ',' << (p.exited ? 1 : 0) << ','
        << (p.exit_time ? format_double(*p.exit_time) : std::string()) << ','
        << (p.diverged ? std::string() : format_double(p.min_margin)) << ','
        << (p.diverged ? 1 : 0) << '\n';
  }
}

void write_sweep_csv(const std::filesystem::path& file, const std::vector<SweepRow>& rows,
                     const std::string& manifest) {
  auto out = open_output(file);
  out << "# manifest=" << manifest << '\n';
  out << "dt,paths,exits,diverged,exit_fraction,std_error\n";
  for (const auto& r : rows) {
    out << format_double(r.dt) << ',' << r.paths << ',' << r.exits << ',' << r.diverged << ','
        << format_double(r.exit_fraction) << ',' << format_double(r.std_error) << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& file, const PathEnsemble& e,
                          const std::string& manifest) {
  auto out = open_output(file);
  out << "# manifest=" << manifest << '\n';
  out << "path,t";
  const std::size_t dim = e.paths.empty() || e.paths.front().trajectory.empty()
                              ? 0
                              : e.paths.front().trajectory.front().dim();
  for (std::size_t k = 0; k < dim; ++k) out << ",r" << k;
  out << '\n';
  for (const auto& p : e.paths) {
    for (std::size_t m = 0; m < p.trajectory.size(); ++m) {
      out << p.index << ',' << format_double(p.times[m]);
      for (double x : p.trajectory[m].values()) out << ',' << format_double(x);
      out << '\n';
    }
  }
}

void to_json(json& j, const SweepRow& r) {
  j = json{{"dt", r.dt},
           {"paths", r.paths},
           {"exits", r.exits},
           {"diverged", r.diverged},
           {"exit_fraction", r.exit_fraction},
           {"std_error", r.std_error}};
}

void to_json(json& j, const VerdictReport& r) {
  j = json{{"checker", r.checker},
           {"simulation", r.sweep},
           {"agreement", r.agreement},
           {"manifest", r.manifest}};
}

int cmd_check(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  prepare_out(out);
  const auto report = run_checker(cfg);
  const auto hash = manifest_hash(cfg);
  write_json(out / "report.json", {{"manifest", hash}, {"checker", report}});
  write_json(out / "manifest.json", manifest_document(cfg, "check", {"report.json"}));
  std::cout << verdict_name(report.verdict()) << '\n';
  std::cout << "  jump        " << (*report.jump_ok ? "ok" : "violated") << '\n';
  std::cout << "  drift       " << (*report.drift_ok ? "ok" : "violated") << '\n';
  std::cout << "  volatility  " << (*report.vol_ok ? "ok" : "violated") << '\n';
  if (!report.witnesses.empty()) {
    const auto& w = report.witnesses.front();
    std::cout << "  witness: " << condition_name(w.condition) << " on face k="
              << w.functional.index << ", violation " << format_double(w.violation) << '\n';
  }
  return report.verdict() == Verdict::violated ? exit_violation : exit_ok;
}

int cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  prepare_out(out);
  const auto hash = manifest_hash(cfg);
  const auto e = run_simulation(cfg, cfg.sim.dt);
  std::vector<std::string> files{"paths.csv", "summary.json"};
  write_paths_csv(out / "paths.csv", e, hash);
  if (cfg.sim.paths == 1 || cfg.sim.keep_trajectories) {
    write_trajectory_csv(out / "trajectory.csv", e, hash);
    files.push_back("trajectory.csv");
  }
  const SweepRow row{cfg.sim.dt, e.paths.size(), e.exited(), e.diverged(), e.exit_fraction(),
                     e.exit_std_error()};
  write_json(out / "summary.json", {{"manifest", hash}, {"simulation", row}});
  write_json(out / "manifest.json", manifest_document(cfg, "simulate", files));
  std::cout << "dt=" << format_double(row.dt) << " paths=" << row.paths << " exits=" << row.exits
            << " diverged=" << row.diverged << " exit_fraction=" << format_double(row.exit_fraction)
            << '\n';
  return exit_ok;
}

int cmd_verify(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  prepare_out(out);
  PathEnsemble e;
  const auto report = run_verification(cfg, &e);
  write_json(out / "report.json", report);
  write_sweep_csv(out / "sweep.csv", report.sweep, report.manifest);
  write_paths_csv(out / "paths.csv", e, report.manifest);
  write_json(out / "manifest.json",
             manifest_document(cfg, "verify", {"report.json", "sweep.csv", "paths.csv"}));
  std::cout << "checker: " << verdict_name(report.checker.verdict()) << '\n';
  for (const auto& r : report.sweep) {
    std::cout << "  dt=" << format_double(r.dt) << " exit_fraction=" << format_double(r.exit_fraction)
              << " +- " << format_double(r.std_error) << '\n';
  }
  std::cout << "agreement: " << (report.agreement ? "true" : "false") << '\n';
  return exit_ok;
}

}  // namespace cone_spde
